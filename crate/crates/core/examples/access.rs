//! Read/write sets and semantic predicates of program fragments.

use stml::c::parser::parse_c;
use stml::c::printer::print_stmts;
use stml::semantics::access::access_set;
use stml::semantics::predicates::{eval_args, Arg, Ctx};

fn main() {
    let src = "float c[N], v[N], a;\nfor (int i = 0; i < N - 1; i++) {\n    c[i+1] = a*v[i];\n    c[i+1] += v[i];\n}\nx = c[0];\n";
    let ast = parse_c(src).unwrap();
    let body = ast.stmt_at_line(3).unwrap();
    let set = access_set(&ast, body, Some("i"));
    println!("{}", serde_json::to_string_pretty(&set).unwrap());

    let loop_ = &ast.items[1];
    let last = &ast.items[2];
    let ctx = Ctx::new(&ast, ast.stmt_at_line(2).unwrap());
    for p in ["no_write", "no_read"] {
        let r = eval_args(
            p,
            &[
                vec![Arg::Stmts(vec![loop_.clone()])],
                vec![Arg::Stmts(vec![last.clone()])],
            ],
            &ctx,
        );
        println!(
            "{p}(loop, {}) = {:?}",
            print_stmts(std::slice::from_ref(last)).trim(),
            r
        );
    }
}
