//! Static predicates checked against dynamic traces: a predicate judged
//! true must never be contradicted by a concrete run.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::rngs::StdRng;
use rand::Rng;
use stml::c::ast::*;
use stml::c::eval::{Env, Value};
use stml::c::visit::NodeRef;
use stml::semantics::predicates::{eval_args, Arg, Ctx, Tri};

use super::tracer::{harness, trace, Cell, Frag, Trace};
use super::{identifiers, random_inputs};

#[derive(Debug, Default)]
pub struct Tally {
    /// Instances judged true and exercised by at least one run.
    pub checked: BTreeMap<&'static str, usize>,
    pub violations: Vec<String>,
}

struct Item {
    frag: Frag,
    prog: AnnotatedAst,
    text: String,
}

#[derive(Debug, Clone, Copy)]
enum Inst {
    Pure(usize),
    NoWrite(usize, usize),
    NoRead(usize, usize),
    Subseteq(usize, usize),
    Except(usize, usize, usize),
    Overwrite(usize, usize, usize),
    Prev(usize, usize, usize),
    Next(usize, usize, usize),
}

impl Inst {
    fn name(&self) -> &'static str {
        match self {
            Inst::Pure(_) => "pure",
            Inst::NoWrite(..) => "no_write",
            Inst::NoRead(..) => "no_read",
            Inst::Subseteq(..) => "is_subseteq",
            Inst::Except(..) => "no_write_except_arrays",
            Inst::Overwrite(..) => "no_overwrite",
            Inst::Prev(..) => "no_write_prev_arrays",
            Inst::Next(..) => "no_write_next_arrays",
        }
    }
}

const MAX_PAIRS: usize = 4000;

fn arg(f: &Frag) -> Vec<Arg> {
    match f {
        Frag::Stmt(s) => vec![Arg::Stmts(vec![s.clone()])],
        Frag::Expr(e) => vec![Arg::Expr(e.clone())],
    }
}

fn is_lvalue(f: &Frag) -> bool {
    matches!(f, Frag::Expr(Expr::Var(_) | Expr::Index(..)))
}

fn loop_vars(ast: &AnnotatedAst) -> Vec<String> {
    let mut out = BTreeSet::new();
    for v in ast.nodes() {
        if let NodeRef::Stmt(Stmt {
            kind: StmtKind::For { init, .. },
            ..
        }) = v.node
        {
            if let StmtKind::Decl(d) = &init.kind {
                out.extend(d.declarators.iter().map(|d| d.name.clone()));
            }
            if let StmtKind::Expr(Expr::Assign(l, _)) = &init.kind {
                if let Expr::Var(n) = l.as_ref() {
                    out.insert(n.clone());
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Every `step`-th pair, so that at most `MAX_PAIRS` remain.
fn pairs(idx: &[usize]) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = idx
        .iter()
        .flat_map(|&a| idx.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
        .collect();
    let step = all.len().div_ceil(MAX_PAIRS).max(1);
    all.into_iter().step_by(step).collect()
}

fn is_array(env: &Env, c: &Cell) -> bool {
    !c.1.is_empty() || matches!(env.get(&c.0), Some(Value::Array { .. }))
}

/// The cell an lvalue names under a run.
fn lcell(f: &Frag, t: &Trace) -> Option<Cell> {
    match f {
        Frag::Expr(Expr::Var(n)) => Some((n.clone(), vec![])),
        Frag::Expr(Expr::Index(b, _)) => t
            .reads
            .iter()
            .rev()
            .find(|c| &c.0 == b && !c.1.is_empty())
            .cloned(),
        _ => None,
    }
}

fn meets(a: &BTreeSet<Cell>, b: &BTreeSet<Cell>, keep: impl Fn(&Cell) -> bool) -> Option<Cell> {
    a.intersection(b).find(|c| keep(c)).cloned()
}

pub fn check_program(
    name: &str,
    prog: &AnnotatedAst,
    max_n: i64,
    samples: usize,
    rng: &mut StdRng,
    tally: &mut Tally,
) {
    let funcs: Vec<Stmt> = prog
        .items
        .iter()
        .filter(|s| matches!(s.kind, StmtKind::Func(_)))
        .cloned()
        .collect();
    let fnames: BTreeSet<String> = funcs
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::Func(f) => Some(f.name.clone()),
            _ => None,
        })
        .collect();
    let mut items: Vec<Item> = Vec::new();
    for v in prog.nodes() {
        let frag = match v.node {
            NodeRef::Stmt(s) if !matches!(s.kind, StmtKind::Func(_)) => Frag::Stmt(s.clone()),
            NodeRef::Expr(e) => Frag::Expr(e.clone()),
            _ => continue,
        };
        if let Some(p) = harness(&funcs, &frag) {
            let text = match &frag {
                Frag::Expr(e) => stml::c::printer::print_expr(e),
                Frag::Stmt(s) => stml::c::printer::print_stmts(std::slice::from_ref(s))
                    .split_whitespace()
                    .collect::<Vec<_>>()
                    .join(" "),
            };
            items.push(Item {
                frag,
                prog: p,
                text,
            });
        }
    }
    let stmts: Vec<usize> = (0..items.len())
        .filter(|&i| matches!(items[i].frag, Frag::Stmt(_)))
        .collect();
    let all: Vec<usize> = (0..items.len()).collect();
    let lvars = loop_vars(prog);

    let ctx = Ctx::new(prog, NodeId(0));
    let holds = |pred: &str, args: &[Vec<Arg>]| eval_args(pred, args, &ctx) == Ok(Tri::True);
    let mut insts = Vec::new();
    for &a in &all {
        if holds("pure", &[arg(&items[a].frag)]) {
            insts.push(Inst::Pure(a));
        }
    }
    for (a, b) in pairs(&all) {
        let (x, y) = (arg(&items[a].frag), arg(&items[b].frag));
        if holds("no_write", &[x.clone(), y.clone()]) {
            insts.push(Inst::NoWrite(a, b));
        }
        if holds("no_read", &[x.clone(), y.clone()]) {
            insts.push(Inst::NoRead(a, b));
        }
        if is_lvalue(&items[b].frag) {
            if let Frag::Expr(e) = &items[a].frag {
                let acc = ctx.analyzer().expr(e);
                if !acc.writes.is_empty()
                    && holds(
                        "is_subseteq",
                        &[vec![Arg::Locs(acc.writes, acc.unknown)], y],
                    )
                {
                    insts.push(Inst::Subseteq(a, b));
                }
            }
        }
    }
    for (li, l) in lvars.iter().enumerate() {
        let lv = vec![Arg::Expr(Expr::Var(l.clone()))];
        for (a, b) in pairs(&stmts) {
            let args = [arg(&items[a].frag), arg(&items[b].frag), lv.clone()];
            if holds("no_write_except_arrays", &args) {
                insts.push(Inst::Except(a, b, li));
            }
            if holds("no_overwrite", &args) {
                insts.push(Inst::Overwrite(a, b, li));
            }
            if holds("no_write_prev_arrays", &args) {
                insts.push(Inst::Prev(a, b, li));
            }
            if holds("no_write_next_arrays", &args) {
                insts.push(Inst::Next(a, b, li));
            }
        }
    }

    let known = identifiers(prog);
    let mut exercised = vec![false; insts.len()];
    for _ in 0..samples {
        let mut env = random_inputs(prog, max_n, rng);
        let n = match env["N"] {
            Value::Scalar(s) => s.as_f64() as i64,
            _ => unreachable!(),
        };
        for id in &known {
            if !env.contains_key(id) && !fnames.contains(id) {
                env.insert(id.clone(), Value::int(rng.gen_range(0..n)));
            }
        }
        let mut base: HashMap<usize, Option<Trace>> = HashMap::new();
        let mut at: HashMap<(usize, usize, i64), Option<Trace>> = HashMap::new();
        let mut run = |i: usize| {
            base.entry(i)
                .or_insert_with(|| trace(&items[i].prog, &env))
                .clone()
        };
        let mut run_at = |i: usize, li: usize, t: i64| {
            at.entry((i, li, t))
                .or_insert_with(|| {
                    let mut e = env.clone();
                    e.insert(lvars[li].clone(), Value::int(t));
                    trace(&items[i].prog, &e)
                })
                .clone()
        };
        for (k, inst) in insts.iter().enumerate() {
            let refuted: Option<String> = match *inst {
                Inst::Pure(a) => {
                    let Some(ta) = run(a) else { continue };
                    ta.writes.iter().next().map(|c| format!("writes {c:?}"))
                }
                Inst::NoWrite(a, b) => {
                    let (Some(ta), Some(tb)) = (run(a), run(b)) else {
                        continue;
                    };
                    meets(&ta.writes, &tb.touched(), |_| true).map(|c| format!("{c:?}"))
                }
                Inst::NoRead(a, b) => {
                    let (Some(ta), Some(tb)) = (run(a), run(b)) else {
                        continue;
                    };
                    let mut w = tb.writes.clone();
                    w.extend(lcell(&items[b].frag, &tb));
                    meets(&ta.reads, &w, |_| true).map(|c| format!("{c:?}"))
                }
                Inst::Subseteq(a, b) => {
                    let (Some(ta), Some(tb)) = (run(a), run(b)) else {
                        continue;
                    };
                    let allowed: BTreeSet<Cell> = lcell(&items[b].frag, &tb).into_iter().collect();
                    ta.writes
                        .difference(&allowed)
                        .next()
                        .map(|c| format!("writes {c:?}"))
                }
                Inst::Except(a, b, li)
                | Inst::Overwrite(a, b, li)
                | Inst::Prev(a, b, li)
                | Inst::Next(a, b, li) => {
                    let mut found = None;
                    let mut ran = false;
                    'outer: for t in 0..n {
                        for t2 in 0..n {
                            let (Some(ta), Some(tb)) = (run_at(a, li, t2), run_at(b, li, t)) else {
                                continue;
                            };
                            ran = true;
                            let hit = match inst {
                                Inst::Except(..) => {
                                    meets(&ta.writes, &tb.touched(), |c| !is_array(&env, c))
                                }
                                Inst::Overwrite(..) => {
                                    meets(&ta.writes, &tb.writes, |c| !is_array(&env, c))
                                }
                                Inst::Prev(..) if t2 > t => {
                                    meets(&ta.writes, &tb.reads, |c| is_array(&env, c))
                                }
                                Inst::Next(..) if t2 < t => {
                                    meets(&ta.writes, &tb.touched(), |c| is_array(&env, c))
                                }
                                _ => None,
                            };
                            if let Some(c) = hit {
                                found = Some(format!("{c:?} with {}={t2} vs {t}", lvars[li]));
                                break 'outer;
                            }
                        }
                    }
                    if !ran {
                        continue;
                    }
                    found
                }
            };
            exercised[k] = true;
            if let Some(why) = refuted {
                let (a, b) = match *inst {
                    Inst::Pure(a) => (a, a),
                    Inst::NoWrite(a, b) | Inst::NoRead(a, b) | Inst::Subseteq(a, b) => (a, b),
                    Inst::Except(a, b, _)
                    | Inst::Overwrite(a, b, _)
                    | Inst::Prev(a, b, _)
                    | Inst::Next(a, b, _) => (a, b),
                };
                tally.violations.push(format!(
                    "{name}: {}({:?}, {:?}) refuted: {why}",
                    inst.name(),
                    items[a].text,
                    items[b].text
                ));
            }
        }
    }
    for (k, inst) in insts.iter().enumerate() {
        if exercised[k] {
            *tally.checked.entry(inst.name()).or_default() += 1;
        }
    }
}
