//! Lower POLCA skeleton pragmas into STML facts.

use stml::c::parser::parse_c;
use stml::c::printer::print_c;
use stml::semantics::lower::lower_polca_with_warnings;

fn main() {
    let ast = parse_c(include_str!("../corpus/skeletons.c")).unwrap();
    let (lowered, warnings) = lower_polca_with_warnings(&ast).unwrap();
    print!("{}", print_c(&lowered));
    for w in warnings {
        eprintln!("warning: {}", w.to_json());
    }
}
