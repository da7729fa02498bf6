#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use stml::c::ast::*;
use stml::c::parser::parse_c;
use stml::c::printer::print_c;
use stml::lang::rules::{default_rules, RuleSet};

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub fn program(name: &str) -> AnnotatedAst {
    parse_c(&corpus(name)).unwrap()
}

pub fn rules() -> RuleSet {
    default_rules().unwrap()
}

fn unwrap_blocks(s: &mut Stmt, top: bool) {
    match &mut s.kind {
        StmtKind::For { body, .. } | StmtKind::While { body, .. } => unwrap_blocks(body, false),
        StmtKind::If { then, els, .. } => {
            unwrap_blocks(then, false);
            if let Some(e) = els {
                unwrap_blocks(e, false);
            }
        }
        StmtKind::Block(items) => {
            for i in items.iter_mut() {
                unwrap_blocks(i, true);
            }
            if !top && items.len() == 1 && s.pragmas.is_empty() {
                let inner = items.pop().unwrap();
                *s = inner;
            }
        }
        StmtKind::Func(f) => {
            for i in f.body.iter_mut() {
                unwrap_blocks(i, true);
            }
        }
        _ => {}
    }
}

/// Printed form with single-statement loop/branch bodies unbraced and every
/// identifier outside `known` renamed in order of first appearance.
pub fn canonical(ast: &AnnotatedAst, known: &BTreeSet<String>) -> String {
    let mut a = ast.clone();
    for s in a.items.iter_mut() {
        unwrap_blocks(s, true);
    }
    let text = print_c(&a);
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut out = String::new();
    let mut word = String::new();
    let mut flush = |w: &mut String, out: &mut String| {
        if w.is_empty() {
            return;
        }
        let starts_alpha = w
            .chars()
            .next()
            .is_some_and(|c| c.is_alphabetic() || c == '_');
        if starts_alpha && !known.contains(w.as_str()) && !KEYWORDS.contains(&w.as_str()) {
            let n = names.len();
            out.push_str(
                names
                    .entry(w.clone())
                    .or_insert_with(|| format!("fresh{n}")),
            );
        } else {
            out.push_str(w);
        }
        w.clear();
    };
    for ch in text.chars() {
        if ch.is_alphanumeric() || ch == '_' {
            word.push(ch);
        } else {
            flush(&mut word, &mut out);
            out.push(ch);
        }
    }
    flush(&mut word, &mut out);
    out
}

const KEYWORDS: &[&str] = &[
    "int", "float", "double", "for", "while", "if", "else", "return", "void", "pragma", "stml",
    "polca",
];

/// Identifiers of a program.
pub fn identifiers(ast: &AnnotatedAst) -> BTreeSet<String> {
    let text = print_c(ast);
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| {
            w.chars()
                .next()
                .is_some_and(|c| c.is_alphabetic() || c == '_')
        })
        .map(str::to_string)
        .collect()
}

/// Same program up to block braces on single statements and fresh names.
pub fn same_structure(a: &AnnotatedAst, b: &AnnotatedAst, known: &BTreeSet<String>) -> bool {
    canonical(a, known) == canonical(b, known)
}

// ---------------------------------------------------------------------------
// differential execution

pub mod brute;
pub mod soundness;
pub mod tracer;

use rand::rngs::StdRng;
use rand::Rng;
use stml::c::eval::{evaluate, Env, Scalar, Value};
use stml::engine::{app_rules, digest, trans, Certainty, Match};

/// Every corpus program used for differential checks.
pub fn sem_corpus() -> Vec<(String, AnnotatedAst)> {
    let dir = format!("{}/corpus/sem", env!("CARGO_MANIFEST_DIR"));
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".c"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let src = std::fs::read_to_string(format!("{dir}/{n}")).unwrap();
            let ast = stml::semantics::lower::lower_polca(&parse_c(&src).unwrap()).unwrap();
            (n, ast)
        })
        .collect()
}

fn random_scalar(s: &Scalar, rng: &mut StdRng) -> Scalar {
    match s {
        Scalar::Int(_) => Scalar::Int(rng.gen_range(-20..=20)),
        Scalar::Float(_) => {
            Scalar::Float(rng.gen_range(0.5..4.0) * if rng.gen_bool(0.2) { -1.0 } else { 1.0 })
        }
    }
}

/// Random values for `N` and every top-level variable, shaped as a run
/// with zero inputs leaves them.
pub fn random_inputs(ast: &AnnotatedAst, max_n: i64, rng: &mut StdRng) -> Env {
    let n = rng.gen_range(1..=max_n);
    let mut env = Env::new();
    env.insert("N".into(), Value::int(n));
    let shapes = evaluate(ast, &env).expect("program runs on zero inputs");
    for (name, v) in shapes {
        let r = match v {
            Value::Scalar(s) => Value::Scalar(random_scalar(&s, rng)),
            Value::Array { dims, data } => Value::Array {
                dims,
                data: data.iter().map(|s| random_scalar(s, rng)).collect(),
            },
        };
        env.insert(name, r);
    }
    env.insert("N".into(), Value::int(n));
    env
}

/// Compare every variable of `before`'s final state, within `rel`.
pub fn agree(
    before: &AnnotatedAst,
    after: &AnnotatedAst,
    inputs: &Env,
    rel: f64,
) -> Result<(), String> {
    let a = evaluate(before, inputs);
    let b = evaluate(after, inputs);
    match (a, b) {
        (Ok(a), Ok(b)) => {
            for (k, va) in &a {
                match b.get(k) {
                    Some(vb) if va.approx_eq(vb, rel) => {}
                    other => return Err(format!("`{k}`: {va:?} vs {other:?}")),
                }
            }
            Ok(())
        }
        (Err(x), Err(y)) if x == y => Ok(()),
        (a, b) => Err(format!("{:?} vs {:?}", a.err(), b.err())),
    }
}

/// States reachable with proven rewrites in at most `depth` steps, at most
/// `cap` of them, in breadth-first order.
pub fn reachable(
    start: &AnnotatedAst,
    rules: &RuleSet,
    depth: usize,
    cap: usize,
) -> Vec<(AnnotatedAst, Vec<Match>)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut frontier = vec![start.clone()];
    seen.insert(digest(start));
    for level in 0..=depth {
        let mut next = Vec::new();
        for s in frontier {
            if out.len() >= cap {
                return out;
            }
            let ms: Vec<Match> = app_rules(&s, rules)
                .into_iter()
                .filter(|m| m.certainty == Certainty::Proven)
                .collect();
            if level < depth {
                for m in &ms {
                    let t = trans(&s, m, false).unwrap().ast;
                    if seen.insert(digest(&t)) {
                        next.push(t);
                    }
                }
            }
            out.push((s, ms));
        }
        frontier = next;
    }
    out
}

#[derive(Debug, Default)]
pub struct Preservation {
    pub programs: usize,
    pub applications: usize,
    pub runs: usize,
    pub failures: Vec<String>,
}

/// Apply every proven match on states reachable within `depth` steps and
/// compare final states on `inputs` random draws each.
pub fn check_preservation(
    depth: usize,
    cap: usize,
    inputs: usize,
    rel: f64,
    seed: u64,
) -> Preservation {
    use rand::SeedableRng;
    let rules = rules();
    let mut out = Preservation::default();
    for (name, prog) in sem_corpus() {
        out.programs += 1;
        let mut rng = StdRng::seed_from_u64(seed);
        for (state, ms) in reachable(&prog, &rules, depth, cap) {
            for m in ms {
                let after = trans(&state, &m, false).unwrap().ast;
                for _ in 0..inputs {
                    let env = random_inputs(&state, 6, &mut rng);
                    out.runs += 1;
                    if let Err(e) = agree(&state, &after, &env, rel) {
                        out.failures
                            .push(format!("{name}: {} at node {}: {e}", m.rule, m.pos.0));
                        break;
                    }
                }
                out.applications += 1;
            }
        }
    }
    out
}
