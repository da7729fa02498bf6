mod common;

use common::brute::*;
use common::*;
use proptest::prelude::*;
use stml::c::parser::{parse_c, parse_template_stmts};
use stml::lang::matcher::match_seq;
use stml::lang::matcher::Binding;

#[test]
fn corpus_blocks_agree_with_enumerator() {
    let rules = rules();
    let patterns = sequence_patterns(&rules);
    let mut t = MatchTally::default();
    for (name, prog) in sem_corpus() {
        for (state, _) in reachable(&prog, &rules, 1, 8) {
            check_blocks(&name, &state, &patterns, 8, &mut t);
        }
    }
    for f in ["skeletons.c", "skeletons_lowered.c"] {
        check_blocks(f, &program(f), &patterns, 8, &mut t);
    }
    assert!(t.mismatches.is_empty(), "{}", t.mismatches.join("\n"));
    assert!(t.blocks > 50 && t.bindings > 100, "{t:?}");
}

#[test]
fn enumerator_counts_splits() {
    let ss = parse_c("a = 1; b = 2; c = 3;").unwrap().items;
    let p = parse_template_stmts("cstmts(x); cstmts(y);", 1).unwrap();
    assert_eq!(brute_seq(&p, &ss).len(), 4);
    let p = parse_template_stmts("cstmts(x); cstmts(y); cstmts(z);", 1).unwrap();
    assert_eq!(brute_seq(&p, &ss).len(), 10);
}

const STMTS: &[&str] = &[
    "x = 1;",
    "y = x;",
    "x = y + 1;",
    "c[i] = v[i];",
    "x += 2;",
    "for (int i = 0; i < N; i++) c[i] = 0;",
    "{ x = 1; y = 2; }",
];

const PIECES: &[&str] = &[
    "cstmts(a);",
    "cstmts(b);",
    "cexpr(l) = cexpr(e);",
    "cexpr(l) = cexpr(e2);",
    "cstmt(s);",
    "x = cexpr(e);",
    "cexpr(l) += cexpr(e);",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn random_sequences_agree(
        body in prop::collection::vec(0..STMTS.len(), 0..=8),
        pat in prop::collection::vec(0..PIECES.len(), 1..=5),
    ) {
        let src: String = body.iter().map(|&k| STMTS[k]).collect::<Vec<_>>().join("\n");
        let ss = parse_c(&src).unwrap().items;
        let psrc: String = pat.iter().map(|&k| PIECES[k]).collect::<Vec<_>>().join(" ");
        let p = parse_template_stmts(&psrc, 1).unwrap();
        let got: std::collections::BTreeSet<Flat> = match_seq(&p, &ss, Binding::default()).iter().map(flatten).collect();
        prop_assert_eq!(got, brute_seq(&p, &ss));
    }
}
