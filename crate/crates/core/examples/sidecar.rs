//! Merge facts from an external analysis tool.

use stml::c::parser::parse_c;
use stml::c::printer::print_c;
use stml::semantics::ingest::ingest_properties;

fn main() {
    let src = "#pragma stml pure F\nx = F(y);\nz = G(x);\n";
    let sidecar = "p.c:2: #pragma stml write(F) = {g}\np.c:3: #pragma stml pure G\n";
    let (ast, warnings) = ingest_properties(&parse_c(src).unwrap(), sidecar).unwrap();
    print!("{}", print_c(&ast));
    for w in warnings {
        println!("warning: {}", w.to_json());
    }
}
