//! Run the reference interpreter before and after a rewrite.

use stml::c::eval::{evaluate, Env, Value};
use stml::c::parser::parse_c;
use stml::engine::{app_rules, trans, Certainty};
use stml::lang::rules::default_rules;

fn main() {
    let ast = parse_c(include_str!("../corpus/fusion_step0.c")).unwrap();
    let mut env = Env::new();
    env.insert("N".into(), Value::int(5));
    env.insert("a".into(), Value::float(1.5));
    env.insert("b".into(), Value::float(-0.5));
    env.insert("v".into(), Value::floats([1.0, 2.0, 3.0, 4.0, 5.0]));
    let before = evaluate(&ast, &env).unwrap();
    let rules = default_rules().unwrap();
    for m in app_rules(&ast, &rules)
        .iter()
        .filter(|m| m.certainty == Certainty::Proven)
    {
        let after = evaluate(&trans(&ast, m, false).unwrap().ast, &env).unwrap();
        let same = before
            .iter()
            .all(|(k, v)| after.get(k).is_some_and(|w| v.approx_eq(w, 1e-9)));
        println!(
            "{} at node {}: {}",
            m.rule,
            m.pos.0,
            if same { "same result" } else { "DIFFERENT" }
        );
    }
}
