mod common;

use std::collections::BTreeSet;

use common::tracer::{harness, trace, Frag};
use common::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use stml::c::ast::*;
use stml::c::eval::{evaluate, Value};
use stml::c::parser::{parse_c, parse_expr_str};
use stml::c::printer::{print_c, print_expr};
use stml::c::visit::NodeRef;
use stml::engine::{app_rules, digest, trans, Certainty};
use stml::lang::instantiate::{instantiate_expr, subs};
use stml::lang::matcher::match_pattern;
use stml::lang::rules::Pattern;
use stml::oracle::{default_metric, run_derivation, GreedyOracle, LookaheadOracle, Oracle};
use stml::semantics::access::Analyzer;
use stml::semantics::lower::lower_polca;

fn expr_src() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("a".to_string()),
        Just("b".to_string()),
        Just("x".to_string()),
        (0..5i64).prop_map(|k| k.to_string()),
        Just("v[i]".to_string()),
        Just("v[i + 1]".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["+", "-", "*", "/"]),
                inner.clone()
            )
                .prop_map(|(l, op, r)| format!("({l} {op} {r})")),
            inner.prop_map(|e| format!("F({e})")),
        ]
    })
}

fn all_programs() -> Vec<(String, AnnotatedAst)> {
    let mut v = sem_corpus();
    for f in ["skeletons.c", "skeletons_lowered.c", "local_min.c"] {
        if std::path::Path::new(&format!("{}/corpus/{f}", env!("CARGO_MANIFEST_DIR"))).exists() {
            v.push((f.to_string(), program(f)));
        }
    }
    v
}

proptest! {
    #[test]
    fn subs_is_idempotent(e in expr_src(), from in prop::sample::select(vec!["a", "x", "v[i]"]), to in expr_src()) {
        let e = parse_expr_str(&e).unwrap();
        let from = parse_expr_str(from).unwrap();
        let to = parse_expr_str(&to).unwrap();
        prop_assume!(!to.contains(&from));
        let once = subs(&e, &from, &to);
        prop_assert_eq!(subs(&once, &from, &to), once.clone());
        prop_assert!(!once.contains(&from));
    }

    #[test]
    fn expressions_round_trip(e in expr_src()) {
        let e = parse_expr_str(&e).unwrap();
        prop_assert_eq!(parse_expr_str(&print_expr(&e)).unwrap(), e);
    }

    #[test]
    fn lowering_is_idempotent(
        head in prop::sample::select(vec!["map F v w", "zipWith F v w z", "fold F INI v a", "scanl F INI v w", "zipWith G v v v"]),
        user in prop::sample::select(vec!["", "#pragma stml writes w in {1}\n", "#pragma stml iteration_space 1 N\n", "#pragma stml pure F\n"]),
    ) {
        let src = format!("#pragma polca {head}\n{user}for (int i = 0; i < N; i++) w[i] = F(v[i]);\n");
        let once = lower_polca(&parse_c(&src).unwrap()).unwrap();
        prop_assert_eq!(lower_polca(&once).unwrap(), once);
    }
}

#[test]
fn corpus_round_trips() {
    for (name, p) in all_programs() {
        let again = parse_c(&print_c(&p)).unwrap();
        assert_eq!(again, p, "{name}");
        let ids: Vec<usize> = p.nodes().iter().map(|v| v.id.0).collect();
        let ids2: Vec<usize> = again.nodes().iter().map(|v| v.id.0).collect();
        assert_eq!(ids, ids2, "{name}");
    }
}

#[test]
fn evaluation_is_deterministic() {
    let mut rng = StdRng::seed_from_u64(3);
    for (name, p) in sem_corpus() {
        let env = random_inputs(&p, 6, &mut rng);
        assert_eq!(evaluate(&p, &env), evaluate(&p, &env), "{name}");
    }
}

#[test]
fn expression_matches_instantiate_back() {
    let rules = rules();
    let mut checked = 0;
    for (name, p) in all_programs() {
        for v in p.nodes() {
            let NodeRef::Expr(e) = v.node else { continue };
            for r in &rules.rules {
                let Pattern::Expr(pat) = &r.pattern else {
                    continue;
                };
                for b in match_pattern(&r.pattern, &p, v.id) {
                    assert_eq!(&instantiate_expr(pat, &b).unwrap(), e, "{name}: {}", r.name);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn app_rules_is_deterministic() {
    let rules = rules();
    for (name, p) in all_programs() {
        assert_eq!(app_rules(&p, &rules), app_rules(&p, &rules), "{name}");
    }
}

/// Top-level item holding `id`, if `id` is not the unit itself.
fn item_of(ast: &AnnotatedAst, id: NodeId) -> Option<usize> {
    let tops = ast.sequence_ids(NodeId(0));
    tops.iter()
        .rposition(|t| *t <= id)
        .filter(|_| id != NodeId(0))
}

#[test]
fn rewrites_stay_local() {
    let rules = rules();
    for (name, p) in sem_corpus() {
        for (state, ms) in reachable(&p, &rules, 1, 10) {
            for m in ms {
                let Some(k) = item_of(&state, m.pos) else {
                    continue;
                };
                let after = trans(&state, &m, false).unwrap().ast;
                let (b, a) = (&state.items, &after.items);
                let tail = b.len() - k - 1;
                assert!(a.len() > k + tail - 1, "{name}: {}", m.rule);
                for j in 0..k {
                    assert!(b[j].same_code(&a[j]), "{name}: {} touched item {j}", m.rule);
                }
                for j in 0..tail {
                    assert!(
                        b[b.len() - 1 - j].same_code(&a[a.len() - 1 - j]),
                        "{name}: {} touched a later item",
                        m.rule
                    );
                }
            }
        }
    }
}

#[test]
fn derivations_replay_and_follow_protocol() {
    let rules = rules();
    for (name, p) in all_programs() {
        let oracles: Vec<Box<dyn Oracle>> = vec![
            Box::new(GreedyOracle::default()),
            Box::new(LookaheadOracle::new(2)),
        ];
        for mut o in oracles {
            let d = run_derivation(&p, &rules, o.as_mut(), 50).unwrap();
            assert!(d.protocol_ok(), "{name}");
            let mut cur = p.clone();
            for s in d.history.steps() {
                assert_eq!(digest(&cur), s.before_hash);
                let ms = app_rules(&cur, &rules);
                let m = ms
                    .iter()
                    .find(|m| m.rule == s.m.rule && m.pos == s.m.pos && m.binding == s.m.binding)
                    .unwrap();
                cur = trans(&cur, m, false).unwrap().ast;
                assert_eq!(digest(&cur), s.after_hash, "{name}");
            }
        }
    }
}

/// Lowest metric reachable from `ast` in at most `d` proven steps.
fn best_within(ast: &AnnotatedAst, rules: &stml::lang::rules::RuleSet, d: usize) -> f64 {
    let mut best = default_metric(ast);
    if d == 0 {
        return best;
    }
    for m in app_rules(ast, rules)
        .into_iter()
        .filter(|m| m.certainty == Certainty::Proven)
    {
        best = best.min(best_within(
            &trans(ast, &m, false).unwrap().ast,
            rules,
            d - 1,
        ));
    }
    best
}

#[test]
fn lookahead_never_picks_a_worse_horizon_than_greedy() {
    let rules = rules();
    let d = 2;
    let mut compared = 0;
    for (name, p) in all_programs() {
        for (state, _) in reachable(&p, &rules, 1, 6) {
            let cands = stml::oracle::candidates(&state, &rules, None).unwrap();
            if cands.is_empty() {
                continue;
            }
            let la = LookaheadOracle::new(d)
                .select_rule(&rules, &cands)
                .unwrap()
                .chosen;
            let gr = GreedyOracle::default()
                .select_rule(&rules, &cands)
                .unwrap()
                .chosen;
            let score = |k: usize| best_within(&cands[k].ast, &rules, d - 1);
            assert!(
                score(la) <= score(gr),
                "{name}: lookahead {} vs greedy {}",
                score(la),
                score(gr)
            );
            compared += 1;
        }
    }
    assert!(compared > 10);
}

#[test]
fn static_access_sets_cover_dynamic_ones() {
    let mut rng = StdRng::seed_from_u64(5);
    let (mut exact, mut known) = (0, 0);
    for (name, p) in sem_corpus() {
        let funcs: Vec<Stmt> = p
            .items
            .iter()
            .filter(|s| matches!(s.kind, StmtKind::Func(_)))
            .cloned()
            .collect();
        let an = Analyzer::new(&p);
        for v in p.nodes() {
            let NodeRef::Stmt(s) = v.node else { continue };
            // the harness makes a lone declaration local to its block
            if matches!(s.kind, StmtKind::Func(_) | StmtKind::Decl(_)) {
                continue;
            }
            let acc = an.stmt(s);
            let bases = |set: &BTreeSet<stml::semantics::access::Location>| -> BTreeSet<String> {
                set.iter().map(|l| l.base.clone()).collect()
            };
            let (sr, sw) = (bases(&acc.reads), bases(&acc.writes));
            let prog = harness(&funcs, &Frag::Stmt(s.clone())).unwrap();
            let (mut dr, mut dw) = (BTreeSet::new(), BTreeSet::new());
            for _ in 0..20 {
                let mut env = random_inputs(&p, 8, &mut rng);
                let n = match env["N"] {
                    Value::Scalar(x) => x.as_f64() as i64,
                    _ => unreachable!(),
                };
                for id in identifiers(&p) {
                    if !env.contains_key(&id) {
                        env.insert(id, Value::int(rng.gen_range(0..n)));
                    }
                }
                let Some(t) = trace(&prog, &env) else {
                    continue;
                };
                dr.extend(t.reads.into_iter().map(|c| c.0));
                dw.extend(t.writes.into_iter().map(|c| c.0));
            }
            let text = stml::c::printer::print_stmts(std::slice::from_ref(s));
            assert!(
                acc.unknown || dw.is_subset(&sw),
                "{name}: writes {dw:?} not in {sw:?}\n{text}"
            );
            assert!(
                acc.unknown || dr.is_subset(&sr.union(&sw).cloned().collect()),
                "{name}: reads {dr:?} not in {sr:?}\n{text}"
            );
            if !acc.unknown {
                known += 1;
                if dw == sw
                    && dr.union(&dw).cloned().collect::<BTreeSet<_>>()
                        == sr.union(&sw).cloned().collect()
                {
                    exact += 1;
                } else {
                    eprintln!(
                        "{name}: static r{sr:?} w{sw:?} dynamic r{dr:?} w{dw:?}: {}",
                        text.trim()
                    );
                }
            }
        }
    }
    assert!(known > 50 && exact == known, "{exact} of {known}");
}
