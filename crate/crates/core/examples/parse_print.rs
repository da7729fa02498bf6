//! Parse annotated C and print it back in canonical form.

use stml::c::parser::parse_c;
use stml::c::printer::print_c;
use stml::engine::digest;

fn main() {
    let src = include_str!("../corpus/fusion_step0.c");
    let ast = parse_c(src).expect("corpus parses");
    let out = print_c(&ast);
    print!("{out}");
    let again = parse_c(&out).expect("printed code parses");
    assert_eq!(print_c(&again), out);
    println!("// digest {}", digest(&ast));
}
