mod common;

use std::time::{Duration, Instant};

use common::*;
use stml::engine::{app_rules, Certainty};
use stml::oracle::*;

fn fusion_script() -> ScriptedOracle {
    ScriptedOracle::new(parse_script(&corpus("fusion.script")).unwrap())
}

#[test]
fn scripted_derivation_reproduces_every_step() {
    let rules = rules();
    let start = program("fusion_step0.c");
    let known = identifiers(&start);
    let t = Instant::now();
    let d = run_derivation(&start, &rules, &mut fusion_script(), 1000).unwrap();
    assert!(t.elapsed() < Duration::from_secs(5));
    assert!(d.is_final);
    assert_eq!(d.steps().len(), 5);
    for k in 1..=5 {
        let want = program(&format!("fusion_step{k}.c"));
        let got = d.history.states()[k].clone();
        assert!(
            same_structure(&got, &want, &known),
            "step {k}:\n{}",
            stml::c::printer::print_c(&got)
        );
    }
    assert!(d.protocol_ok());
}

#[test]
fn metric_along_fusion_chain() {
    let m: Vec<f64> = (0..=5)
        .map(|k| default_metric(&program(&format!("fusion_step{k}.c"))))
        .collect();
    assert_eq!(m, [27.0, 16.0, 17.0, 16.0, 15.0, 16.0]);
}

#[test]
fn first_new_code_call() {
    let rules = rules();
    let step0 = program("fusion_step0.c");
    let known = identifiers(&step0);
    let r = new_code(&step0, None, &rules, &mut fusion_script()).unwrap();
    assert!(same_structure(
        &r.candidate.ast,
        &program("fusion_step1.c"),
        &known
    ));
    assert_eq!(r.next_rule.as_deref(), Some("AugAdditionAssign"));
}

#[test]
fn final_step_is_not_reversible() {
    let rules = rules();
    let step4 = program("fusion_step4.c");
    let step5 = program("fusion_step5.c");
    let known = identifiers(&step4);
    for m in app_rules(&step5, &rules) {
        if m.rule == "LoopInvCodeMotion" {
            assert!(
                !m.instance_code().contains("a + b"),
                "{}",
                m.instance_code()
            );
        }
        let next = stml::engine::trans(&step5, &m, true).unwrap().ast;
        assert!(
            !same_structure(&next, &step4, &known),
            "{} reverses the last step",
            m.rule
        );
    }
}

#[test]
fn undo_restores_start() {
    let rules = rules();
    let start = program("fusion_step0.c");
    let mut d = run_derivation(&start, &rules, &mut fusion_script(), 1000).unwrap();
    let h0 = stml::engine::digest(&start);
    for _ in 0..5 {
        d.history.undo().unwrap();
    }
    assert_eq!(stml::engine::digest(d.history.current()), h0);
    assert!(d.history.undo().is_err());
}

#[test]
fn scripted_replay_is_stable() {
    let rules = rules();
    let start = program("fusion_step0.c");
    let a = run_derivation(&start, &rules, &mut fusion_script(), 1000).unwrap();
    let b = run_derivation(&start, &rules, &mut fusion_script(), 1000).unwrap();
    let ha: Vec<_> = a.steps().iter().map(|s| s.after_hash.clone()).collect();
    let hb: Vec<_> = b.steps().iter().map(|s| s.after_hash.clone()).collect();
    assert_eq!(ha, hb);
}

#[test]
fn greedy_never_increases_metric() {
    let rules = rules();
    let d = run_derivation(
        &program("fusion_step0.c"),
        &rules,
        &mut GreedyOracle::default(),
        1000,
    )
    .unwrap();
    let ms: Vec<f64> = d.history.states().into_iter().map(default_metric).collect();
    assert!(ms.windows(2).all(|w| w[1] <= w[0]), "{ms:?}");
    assert!(d.protocol_ok());
}

#[test]
fn greedy_stalls_where_lookahead_proceeds() {
    let rules = rules();
    let p = program("local_min.c");
    let m0 = default_metric(&p);
    let g = run_derivation(&p, &rules, &mut GreedyOracle::default(), 1000).unwrap();
    assert_eq!(g.steps().len(), 0);
    let l = run_derivation(&p, &rules, &mut LookaheadOracle::new(2), 1000).unwrap();
    assert!(l.is_final);
    assert!(default_metric(l.ast()) < m0);
    assert!(l.protocol_ok());
    eprintln!("{}", stml::c::printer::print_c(l.ast()));
    for s in l.steps() {
        eprintln!("{}", s.m.rule);
    }
}

#[test]
fn all_matches_on_fusion_chain_are_proven() {
    let rules = rules();
    let ms = app_rules(&program("fusion_step0.c"), &rules);
    assert!(!ms.is_empty());
    assert!(ms.iter().all(|m| m.certainty == Certainty::Proven));
}

#[test]
fn budget_is_enforced() {
    let rules = rules();
    match run_derivation(&program("fusion_step0.c"), &rules, &mut fusion_script(), 2) {
        Err(OracleError::BudgetExceeded(partial)) => assert_eq!(partial.steps().len(), 2),
        other => panic!("{other:?}"),
    }
}
