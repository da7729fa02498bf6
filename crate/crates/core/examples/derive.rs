//! Drive a derivation with a scripted, greedy or lookahead oracle.
//!
//! cargo run --example derive -- [scripted|greedy|lookahead[:d]]

use stml::c::parser::parse_c;
use stml::c::printer::print_c;
use stml::engine::DEFAULT_BUDGET;
use stml::lang::rules::default_rules;
use stml::oracle::{oracle_from_spec, run_derivation, Oracle, ScriptedOracle};

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "scripted".into());
    let rules = default_rules().unwrap();
    let (src, mut oracle): (&str, Box<dyn Oracle + Send>) = if mode == "scripted" {
        let names: Vec<&str> = include_str!("../corpus/fusion.script").lines().collect();
        (
            include_str!("../corpus/fusion_step0.c"),
            Box::new(ScriptedOracle::from_names(&names)),
        )
    } else {
        (
            include_str!("../corpus/local_min.c"),
            oracle_from_spec(&mode).unwrap(),
        )
    };
    let ast = parse_c(src).unwrap();
    let d = run_derivation(&ast, &rules, oracle.as_mut(), DEFAULT_BUDGET).unwrap();
    for (k, s) in d.steps().iter().enumerate() {
        println!("step {}: {} at node {}", k + 1, s.m.rule, s.m.pos.0);
    }
    println!("protocol ok: {}", d.protocol_ok());
    print!("{}", print_c(d.ast()));
}
