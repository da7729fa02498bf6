//! Reference matcher for sequence patterns: enumerate every way to cut the
//! statement list, then check each piece on its own.

use std::collections::{BTreeMap, BTreeSet};

use stml::c::ast::*;
use stml::c::printer::print_stmts;
use stml::lang::matcher::{match_stmt, Binding, Fragment};

/// A binding as name to pragma-free text.
pub type Flat = BTreeMap<String, String>;

fn strip(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("#pragma"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn flat_fragment(f: &Fragment) -> String {
    match f {
        Fragment::Stmt(s) => strip(&print_stmts(std::slice::from_ref(s))),
        Fragment::Stmts(v) => strip(&print_stmts(v)),
        other => other.text(),
    }
}

pub fn flatten(b: &Binding) -> Flat {
    b.0.iter()
        .map(|(k, v)| (k.clone(), flat_fragment(v)))
        .collect()
}

/// Piece sizes: exactly one statement for plain items, any count for
/// sequence variables, summing to `n`.
fn cuts(items: &[bool], n: usize) -> Vec<Vec<usize>> {
    let Some((&is_seq, rest)) = items.split_first() else {
        return if n == 0 { vec![vec![]] } else { vec![] };
    };
    let sizes: Vec<usize> = if is_seq {
        (0..=n).collect()
    } else if n >= 1 {
        vec![1]
    } else {
        vec![]
    };
    let mut out = Vec::new();
    for k in sizes {
        for mut tail in cuts(rest, n - k) {
            tail.insert(0, k);
            out.push(tail);
        }
    }
    out
}

fn merge(a: &Flat, b: &Flat) -> Option<Flat> {
    let mut m = a.clone();
    for (k, v) in b {
        match m.get(k) {
            Some(old) if old != v => return None,
            _ => {
                m.insert(k.clone(), v.clone());
            }
        }
    }
    Some(m)
}

pub fn brute_seq(ps: &[Stmt], ss: &[Stmt]) -> BTreeSet<Flat> {
    let kinds: Vec<bool> = ps
        .iter()
        .map(|p| matches!(p.kind, StmtKind::MetaSeq(_)))
        .collect();
    let mut out = BTreeSet::new();
    for sizes in cuts(&kinds, ss.len()) {
        let mut partial = vec![Flat::new()];
        let mut at = 0;
        for (p, k) in ps.iter().zip(sizes) {
            let piece = &ss[at..at + k];
            at += k;
            let local: Vec<Flat> = match &p.kind {
                StmtKind::MetaSeq(n) => {
                    vec![Flat::from([(
                        n.clone(),
                        flat_fragment(&Fragment::Stmts(piece.to_vec())),
                    )])]
                }
                _ => match_stmt(p, &piece[0], Binding::default())
                    .iter()
                    .map(flatten)
                    .collect(),
            };
            partial = partial
                .iter()
                .flat_map(|a| local.iter().filter_map(move |b| merge(a, b)))
                .collect();
            if partial.is_empty() {
                break;
            }
        }
        out.extend(partial);
    }
    out
}

/// Extra sequence patterns beyond the rule library, stressing repeated and
/// adjacent sequence variables.
pub const EXTRA_PATTERNS: &[&str] = &[
    "cstmts(a); cstmts(b);",
    "cstmts(a); cstmts(b); cstmts(c);",
    "cstmts(a); cstmt(s); cstmts(b); cstmt(s); cstmts(c);",
    "cstmts(a); cstmts(a); cstmts(b);",
    "cstmts(a); cexpr(x) = cexpr(e); cstmts(b); cexpr(y) = cexpr(e); cstmts(c);",
    "cstmt(s); cstmts(rest);",
    "cstmts(a); cexpr(l) += cexpr(e); cstmts(b);",
];

pub fn sequence_patterns(rules: &stml::lang::rules::RuleSet) -> Vec<(String, Vec<Stmt>)> {
    let mut out: Vec<(String, Vec<Stmt>)> = rules
        .rules
        .iter()
        .filter_map(|r| match &r.pattern {
            stml::lang::rules::Pattern::Seq(p) => Some((r.name.clone(), p.clone())),
            _ => None,
        })
        .collect();
    for src in EXTRA_PATTERNS {
        out.push((
            src.to_string(),
            stml::c::parser::parse_template_stmts(src, 1).unwrap(),
        ));
    }
    out
}

#[derive(Debug, Default)]
pub struct MatchTally {
    pub blocks: usize,
    pub comparisons: usize,
    pub bindings: usize,
    pub mismatches: Vec<String>,
}

/// Compare the engine's matcher with [`brute_seq`] on every sequence of at
/// most `max_len` statements in `ast`.
pub fn check_blocks(
    name: &str,
    ast: &AnnotatedAst,
    patterns: &[(String, Vec<Stmt>)],
    max_len: usize,
    t: &mut MatchTally,
) {
    for v in ast.nodes() {
        let Some(items) = v.node.sequence() else {
            continue;
        };
        if items.len() > max_len {
            continue;
        }
        t.blocks += 1;
        for (pname, p) in patterns {
            let got: BTreeSet<Flat> = stml::lang::matcher::match_pattern(
                &stml::lang::rules::Pattern::Seq(p.clone()),
                ast,
                v.id,
            )
            .iter()
            .map(flatten)
            .collect();
            let want = brute_seq(p, items);
            t.comparisons += 1;
            t.bindings += want.len();
            if got != want {
                t.mismatches.push(format!(
                    "{name} node {}: `{pname}` matcher {} vs enumerator {}",
                    v.id.0,
                    got.len(),
                    want.len()
                ));
            }
        }
    }
}
