//! Enumerate applicable rules with their certainty.

use stml::c::parser::parse_c;
use stml::engine::app_rules;
use stml::lang::rules::default_rules;

fn main() {
    let ast = parse_c(include_str!("../corpus/fusion_step0.c")).unwrap();
    let rules = default_rules().unwrap();
    for m in app_rules(&ast, &rules) {
        println!(
            "#{} {} at node {} ({:?})",
            m.id, m.rule, m.pos.0, m.certainty
        );
        for c in &m.unknown_conditions {
            println!("    unknown: {c}");
        }
        println!("    => {}", m.instance_code().replace('\n', " "));
    }
}
