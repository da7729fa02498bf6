//! Three-valued evaluation of rule conditions.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::c::ast::*;
use crate::c::printer::print_expr;
use crate::lang::instantiate::{fresh_name, instantiate_expr, InstantiationError};
use crate::lang::matcher::{Binding, Fragment};
use crate::lang::property::{ExpProp, OpProp, Property, StmlProp};
use crate::lang::rules::{predicate_arities, Cond, PredCall, Term};
use crate::semantics::access::{overlap, AccessSet, Analyzer, Location, Mode, Overlap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }

    pub fn and(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        }
    }

    pub fn or(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::True, _) | (_, Tri::True) => Tri::True,
            (Tri::False, Tri::False) => Tri::False,
            _ => Tri::Unknown,
        }
    }

    pub fn not(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::True => "true",
            Tri::False => "false",
            Tri::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredError {
    #[error("PredicateArityError: `{name}` takes {expected:?} arguments, got {got}")]
    Arity {
        name: String,
        expected: Vec<usize>,
        got: usize,
    },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("bad argument to `{name}`: {msg}")]
    BadArgument { name: String, msg: String },
    #[error("{0}")]
    Template(Box<InstantiationError>),
}

impl PredError {
    pub fn kind(&self) -> &'static str {
        match self {
            PredError::Arity { .. } => "PredicateArityError",
            PredError::UnknownPredicate(_) => "UnknownPredicate",
            PredError::BadArgument { .. } => "PredicateArgumentError",
            PredError::Template(_) => "InstantiationError",
        }
    }
}

impl From<InstantiationError> for PredError {
    fn from(e: InstantiationError) -> Self {
        PredError::Template(Box::new(e))
    }
}

/// Evaluation context: the program, the position being rewritten and a
/// prepared analyser.
pub struct Ctx<'a> {
    pub ast: &'a AnnotatedAst,
    pub pos: NodeId,
    analyzer: Analyzer<'a>,
    facts: Vec<(NodeId, &'a Pragma)>,
    identifiers: BTreeSet<String>,
}

impl<'a> Ctx<'a> {
    pub fn new(ast: &'a AnnotatedAst, pos: NodeId) -> Ctx<'a> {
        let mut facts = Vec::new();
        for v in ast.nodes() {
            if let crate::c::visit::NodeRef::Stmt(s) = v.node {
                facts.extend(s.pragmas.iter().map(|p| (v.id, p)));
            }
        }
        Ctx {
            ast,
            pos,
            analyzer: Analyzer::new(ast),
            facts,
            identifiers: ast.identifiers(),
        }
    }

    /// Same program, another position.
    pub fn at(&self, pos: NodeId) -> Ctx<'a> {
        Ctx {
            ast: self.ast,
            pos,
            analyzer: self.analyzer.clone(),
            facts: self.facts.clone(),
            identifiers: self.identifiers.clone(),
        }
    }

    pub fn identifiers(&self) -> &BTreeSet<String> {
        &self.identifiers
    }

    pub fn analyzer(&self) -> &Analyzer<'a> {
        &self.analyzer
    }
}

/// Evaluated predicate argument.
#[derive(Debug, Clone)]
pub enum Arg {
    Expr(Expr),
    Stmts(Vec<Stmt>),
    Locs(BTreeSet<Location>, bool),
    Op(OpSlot),
}

fn bad(name: &str, msg: impl Into<String>) -> PredError {
    PredError::BadArgument {
        name: name.into(),
        msg: msg.into(),
    }
}

fn eval_term(t: &Term, b: &Binding, ctx: &Ctx<'_>, out: &mut Vec<Arg>) -> Result<(), PredError> {
    match t {
        Term::Expr(Expr::Meta(n)) if matches!(b.get(n), Some(Fragment::Op(_))) => {
            if let Some(Fragment::Op(op)) = b.get(n) {
                out.push(Arg::Op(OpSlot::Op(*op)));
            }
        }
        Term::Expr(e) => out.push(Arg::Expr(instantiate_expr(e, b)?)),
        Term::Stmt(n) | Term::Seq(n) => match b.get(n) {
            Some(Fragment::Stmt(s)) => out.push(Arg::Stmts(vec![s.clone()])),
            Some(Fragment::Stmts(v)) => out.push(Arg::Stmts(v.clone())),
            Some(_) => return Err(bad(n, "not a statement metavariable")),
            None => return Err(InstantiationError::Unbound(n.clone()).into()),
        },
        Term::List(v) => {
            for x in v {
                eval_term(x, b, ctx, out)?;
            }
        }
        Term::Writes(x) => {
            let mut inner = Vec::new();
            eval_term(x, b, ctx, &mut inner)?;
            let acc = access(&inner, ctx.analyzer());
            out.push(Arg::Locs(acc.writes, acc.unknown));
        }
        Term::Op(OpSlot::Name(n)) => match b.get(n) {
            Some(Fragment::Op(op)) => out.push(Arg::Op(OpSlot::Op(*op))),
            _ => out.push(Arg::Op(OpSlot::Name(n.clone()))),
        },
        Term::Op(slot) => out.push(Arg::Op(slot.clone())),
    }
    Ok(())
}

fn access(args: &[Arg], an: &Analyzer<'_>) -> AccessSet {
    let mut acc = AccessSet::default();
    for a in args {
        match a {
            Arg::Expr(e) => acc.union(an.expr(e)),
            Arg::Stmts(v) => acc.union(an.stmts(v)),
            Arg::Locs(l, unknown) => {
                acc.writes.extend(l.iter().cloned());
                acc.unknown |= unknown;
            }
            Arg::Op(_) => {}
        }
    }
    acc
}

/// Locations written by `args`, counting a top-level lvalue as written.
fn written_by(args: &[Arg], an: &Analyzer<'_>) -> AccessSet {
    let mut acc = access(args, an);
    for a in args {
        if let Arg::Expr(e) = a {
            if let Some(l) = Location::of_lvalue(e) {
                acc.writes.insert(l);
            }
        }
    }
    acc
}

/// `False` on a certain clash, `Unknown` on a possible one.
fn disjoint<'x>(
    xs: impl IntoIterator<Item = &'x Location>,
    ys: &BTreeSet<Location>,
    skip: &dyn Fn(&str) -> bool,
) -> Tri {
    let mut r = Tri::True;
    for x in xs {
        if skip(&x.base) {
            continue;
        }
        for y in ys {
            match overlap(x, y) {
                Overlap::Must => return Tri::False,
                Overlap::May => r = Tri::Unknown,
                Overlap::Disjoint => {}
            }
        }
    }
    r
}

fn touched(a: &AccessSet) -> BTreeSet<Location> {
    a.reads.iter().chain(&a.writes).cloned().collect()
}

fn unknown_guard(t: Tri, a: &AccessSet, b: &AccessSet) -> Tri {
    if t == Tri::True && (a.unknown || b.unknown) {
        Tri::Unknown
    } else {
        t
    }
}

fn loop_expr(name: &str, args: &[Arg]) -> Result<Expr, PredError> {
    match args {
        [Arg::Expr(e)] => Ok(e.clone()),
        _ => Err(bad(name, "third argument must be one expression")),
    }
}

fn is_pure_expr(e: &Expr, an: &Analyzer<'_>) -> Tri {
    let mut r = Tri::True;
    for x in e.subexpressions() {
        match x {
            Expr::Assign(..) | Expr::AugAssign(..) => return Tri::False,
            Expr::Unary(op, _) if op.is_increment() => return Tri::False,
            Expr::Call(f, _) if !an.has_pure_fact(f) => r = Tri::Unknown,
            Expr::Meta(_) | Expr::BinOper(..) | Expr::Subs(..) | Expr::FreshVar(_) => {
                r = Tri::Unknown
            }
            _ => {}
        }
    }
    r
}

fn same_slot(a: &OpSlot, b: &OpSlot) -> bool {
    a == b
}

/// Evaluate one predicate on already-evaluated arguments.
pub fn eval_args(name: &str, args: &[Vec<Arg>], ctx: &Ctx<'_>) -> Result<Tri, PredError> {
    let Some(ar) = predicate_arities(name) else {
        return Err(PredError::UnknownPredicate(name.into()));
    };
    if !ar.contains(&args.len()) {
        return Err(PredError::Arity {
            name: name.into(),
            expected: ar.to_vec(),
            got: args.len(),
        });
    }
    let an = ctx.analyzer();
    let with_loop = |e: &Expr| an.clone().with_loop(Some(e.clone()));
    Ok(match name {
        "no_write" => {
            let a = access(&args[0], an);
            let b = access(&args[1], an);
            if touched(&b).iter().any(|l| a.locals.contains(&l.base)) {
                return Ok(Tri::False);
            }
            unknown_guard(disjoint(&a.writes, &touched(&b), &|_| false), &a, &b)
        }
        "no_read" => {
            let a = access(&args[0], an);
            let b = written_by(&args[1], an);
            unknown_guard(disjoint(&a.reads, &b.writes, &|_| false), &a, &b)
        }
        "no_write_except_arrays" => {
            let an = with_loop(&loop_expr(name, &args[2])?);
            let a = access(&args[0], &an);
            let b = access(&args[1], &an);
            let skip = |base: &str| a.loop_indexed_only(base) && b.loop_indexed_only(base);
            unknown_guard(disjoint(&a.writes, &touched(&b), &skip), &a, &b)
        }
        "no_overwrite" => {
            let an = with_loop(&loop_expr(name, &args[2])?);
            let a = access(&args[0], &an);
            let b = access(&args[1], &an);
            let skip = |base: &str| a.loop_indexed_only(base) && b.loop_indexed_only(base);
            unknown_guard(disjoint(&a.writes, &b.writes, &skip), &a, &b)
        }
        "no_write_prev_arrays" | "no_write_next_arrays" => {
            let an = with_loop(&loop_expr(name, &args[2])?);
            let a = access(&args[0], &an);
            let b = access(&args[1], &an);
            let prev = name == "no_write_prev_arrays";
            let mut r = Tri::True;
            let written: BTreeSet<&str> = a.writes.iter().map(|l| l.base.as_str()).collect();
            for base in written {
                let b_modes: &[Mode] = if prev {
                    &[Mode::Reads]
                } else {
                    &[Mode::Reads, Mode::Writes]
                };
                let b_offs: BTreeSet<i64> = b_modes
                    .iter()
                    .filter_map(|m| b.offsets_of(base, *m))
                    .flatten()
                    .copied()
                    .collect();
                let touches = b_modes.iter().any(|m| match m {
                    Mode::Reads => b.reads.iter().any(|l| l.base == base),
                    Mode::Writes => b.writes.iter().any(|l| l.base == base),
                });
                if !touches {
                    continue;
                }
                if !(a.loop_indexed_only(base) && b.loop_indexed_only(base)) || b_offs.is_empty() {
                    r = Tri::Unknown;
                    continue;
                }
                let Some(w) = a.offsets_of(base, Mode::Writes) else {
                    r = Tri::Unknown;
                    continue;
                };
                let ok = if prev {
                    w.first() >= b_offs.last()
                } else {
                    w.last() <= b_offs.first()
                };
                if !ok {
                    return Ok(Tri::False);
                }
            }
            unknown_guard(r, &a, &b)
        }
        "pure" => {
            let mut r = Tri::True;
            for a in &args[0] {
                r = r.and(match a {
                    Arg::Expr(e) => is_pure_expr(e, an),
                    Arg::Stmts(v) => {
                        let acc = an.stmts(v);
                        if !acc.writes.is_empty() {
                            Tri::False
                        } else if acc.unknown {
                            Tri::Unknown
                        } else {
                            Tri::True
                        }
                    }
                    Arg::Locs(..) | Arg::Op(_) => Tri::True,
                });
            }
            r
        }
        "is_assignment" => match args[0].as_slice() {
            [Arg::Expr(e)] => Tri::from_bool(matches!(e, Expr::Assign(..) | Expr::AugAssign(..))),
            [Arg::Stmts(v)] => Tri::from_bool(
                v.len() == 1
                    && matches!(
                        &v[0].kind,
                        StmtKind::Expr(Expr::Assign(..) | Expr::AugAssign(..))
                    ),
            ),
            _ => Tri::False,
        },
        "occurs_in" => {
            let [Arg::Expr(needle)] = args[0].as_slice() else {
                return Err(bad(name, "first argument must be one expression"));
            };
            Tri::from_bool(haystack_exprs(&args[1]).iter().any(|h| h.contains(needle)))
        }
        "fresh_var" => match args[0].as_slice() {
            [Arg::Expr(Expr::Var(n))] => Tri::from_bool(!ctx.identifiers.contains(n)),
            _ => Tri::False,
        },
        "distributes_over" => {
            let (Some(Arg::Op(g)), Some(Arg::Op(f))) = (args[0].first(), args[1].first()) else {
                return Err(bad(name, "arguments must be operators"));
            };
            if *g == OpSlot::Op(BinOp::Mul) && *f == OpSlot::Op(BinOp::Add) {
                Tri::True
            } else if ctx.facts.iter().any(|(_, p)| match &p.prop {
                Property::Stml(StmlProp::Op {
                    prop: OpProp::DistributesOver,
                    left: Some(l),
                    right,
                }) => same_slot(l, g) && same_slot(right, f),
                _ => false,
            }) {
                Tri::True
            } else {
                Tri::Unknown
            }
        }
        "is_identity" => {
            let [Arg::Expr(e)] = args[0].as_slice() else {
                return Err(bad(name, "first argument must be one expression"));
            };
            let op = match args.get(1).map(|v| v.as_slice()) {
                None => None,
                Some([Arg::Op(o)]) => Some(o.clone()),
                Some(_) => return Err(bad(name, "second argument must be an operator")),
            };
            is_identity(e, op.as_ref(), ctx)
        }
        "is_subseteq" => {
            let a = locations(&args[0], an);
            let b = locations(&args[1], an);
            let (Some(a), Some(b)) = (a, b) else {
                return Ok(Tri::Unknown);
            };
            let mut r = Tri::True;
            for x in &a {
                let mut best = Tri::False;
                for y in &b {
                    if x == y {
                        best = Tri::True;
                        break;
                    }
                    if overlap(x, y) != Overlap::Disjoint {
                        best = Tri::Unknown;
                    }
                }
                r = r.and(best);
            }
            r
        }
        other => return Err(PredError::UnknownPredicate(other.into())),
    })
}

fn haystack_exprs(args: &[Arg]) -> Vec<Expr> {
    let mut out = Vec::new();
    fn stmt(s: &Stmt, out: &mut Vec<Expr>) {
        out.extend(s.own_exprs().into_iter().cloned());
        for c in s.child_stmts() {
            stmt(c, out);
        }
    }
    for a in args {
        match a {
            Arg::Expr(e) => out.push(e.clone()),
            Arg::Stmts(v) => v.iter().for_each(|s| stmt(s, &mut out)),
            _ => {}
        }
    }
    out
}

/// Location sets named by the arguments; `None` when some argument does not
/// name locations or they are not fully known.
fn locations(args: &[Arg], an: &Analyzer<'_>) -> Option<BTreeSet<Location>> {
    let mut out = BTreeSet::new();
    for a in args {
        match a {
            Arg::Locs(l, false) => out.extend(l.iter().cloned()),
            Arg::Expr(e) => {
                out.insert(Location::of_lvalue(e)?);
            }
            Arg::Stmts(v) => {
                let acc = an.stmts(v);
                if acc.unknown {
                    return None;
                }
                out.extend(acc.writes);
            }
            _ => return None,
        }
    }
    Some(out)
}

fn is_identity(e: &Expr, op: Option<&OpSlot>, ctx: &Ctx<'_>) -> Tri {
    let lit = match e {
        Expr::Int(k) => Some(*k as f64),
        Expr::Float(s) => s.trim_end_matches(['f', 'F']).parse::<f64>().ok(),
        _ => None,
    };
    if let Some(v) = lit {
        let ok = match op {
            None => v == 0.0 || v == 1.0,
            Some(OpSlot::Op(BinOp::Add | BinOp::Sub | BinOp::Or)) => v == 0.0,
            Some(OpSlot::Op(BinOp::Mul | BinOp::Div | BinOp::And)) => v == 1.0,
            Some(_) => false,
        };
        if ok {
            return Tri::True;
        }
    }
    let known = ctx.facts.iter().any(|(id, p)| {
        *id < ctx.pos
            && match &p.prop {
                Property::Stml(StmlProp::Exp {
                    prop: ExpProp::IsIdentity,
                    qualifier,
                    expr,
                }) => expr == e && (op.is_none() || qualifier.as_ref() == op),
                _ => false,
            }
    });
    if known {
        Tri::True
    } else {
        Tri::Unknown
    }
}

/// Evaluate a predicate call under `b`.
pub fn eval_predicate(pc: &PredCall, b: &Binding, ctx: &Ctx<'_>) -> Result<Tri, PredError> {
    let mut args = Vec::new();
    for t in &pc.args {
        let mut v = Vec::new();
        eval_term(t, b, ctx, &mut v)?;
        args.push(v);
    }
    eval_args(&pc.name, &args, ctx)
}

/// Kleene evaluation of a condition with every metavariable bound.
pub fn eval_cond(c: &Cond, b: &Binding, ctx: &Ctx<'_>) -> Result<Tri, PredError> {
    Ok(match c {
        Cond::True => Tri::True,
        Cond::And(v) => {
            let mut r = Tri::True;
            for x in v {
                r = r.and(eval_cond(x, b, ctx)?);
                if r == Tri::False {
                    break;
                }
            }
            r
        }
        Cond::Or(v) => {
            let mut r = Tri::False;
            for x in v {
                r = r.or(eval_cond(x, b, ctx)?);
                if r == Tri::True {
                    break;
                }
            }
            r
        }
        Cond::Not(x) => eval_cond(x, b, ctx)?.not(),
        Cond::Pred(pc) => eval_predicate(pc, b, ctx)?,
    })
}

fn unbound_meta(t: &Term, b: &Binding) -> Option<String> {
    match t {
        Term::Expr(Expr::Meta(n)) if b.get(n).is_none() => Some(n.clone()),
        _ => None,
    }
}

/// Evaluate a rule condition. Top-level `fresh_var` and `occurs_in` with an
/// unbound first argument extend the binding; every extension whose
/// condition is not false is returned with its verdict, in order.
pub fn eval_condition(
    c: &Cond,
    b: &Binding,
    ctx: &Ctx<'_>,
) -> Result<Vec<(Binding, Tri)>, PredError> {
    let mut live = vec![(b.clone(), Tri::True)];
    for conj in c.conjuncts() {
        let mut next = Vec::new();
        for (b, t) in live {
            match conj {
                Cond::Pred(pc)
                    if pc.name == "fresh_var" && unbound_meta(&pc.args[0], &b).is_some() =>
                {
                    let n = unbound_meta(&pc.args[0], &b).unwrap();
                    let mut b = b;
                    b.insert(n, Fragment::Expr(Expr::Var(fresh_name(&ctx.identifiers))));
                    next.push((b, t));
                }
                Cond::Pred(pc)
                    if pc.name == "occurs_in" && unbound_meta(&pc.args[0], &b).is_some() =>
                {
                    let n = unbound_meta(&pc.args[0], &b).unwrap();
                    let mut hay = Vec::new();
                    eval_term(&pc.args[1], &b, ctx, &mut hay)?;
                    let mut seen: Vec<Expr> = Vec::new();
                    for h in haystack_exprs(&hay) {
                        for sub in h.subexpressions() {
                            if !seen.contains(sub) {
                                seen.push(sub.clone());
                            }
                        }
                    }
                    for sub in seen {
                        let mut b2 = b.clone();
                        b2.insert(n.clone(), Fragment::Expr(sub));
                        next.push((b2, t));
                    }
                }
                other => {
                    let r = t.and(eval_cond(other, &b, ctx)?);
                    if r != Tri::False {
                        next.push((b, r));
                    }
                }
            }
        }
        live = next;
        if live.is_empty() {
            break;
        }
    }
    Ok(live)
}

/// Human-readable list of the conjuncts that are not known to hold.
pub fn undecided_conjuncts(c: &Cond, b: &Binding, ctx: &Ctx<'_>) -> Vec<String> {
    c.conjuncts()
        .into_iter()
        .filter(|x| !matches!(eval_cond(x, b, ctx), Ok(Tri::True)))
        .map(cond_text)
        .collect()
}

pub fn cond_text(c: &Cond) -> String {
    match c {
        Cond::True => "true".into(),
        Cond::And(v) => v.iter().map(cond_text).collect::<Vec<_>>().join(" && "),
        Cond::Or(v) => format!(
            "({})",
            v.iter().map(cond_text).collect::<Vec<_>>().join(" || ")
        ),
        Cond::Not(x) => format!("!{}", cond_text(x)),
        Cond::Pred(pc) => format!(
            "{}({})",
            pc.name,
            pc.args.iter().map(term_text).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn term_text(t: &Term) -> String {
    match t {
        Term::Expr(e) => print_expr(e),
        Term::Stmt(n) => format!("cstmt({n})"),
        Term::Seq(n) => format!("cstmts({n})"),
        Term::List(v) => format!(
            "{{{}}}",
            v.iter().map(term_text).collect::<Vec<_>>().join(", ")
        ),
        Term::Writes(x) => format!("writes({})", term_text(x)),
        Term::Op(s) => s.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c::parser::{parse_c, parse_expr_str};

    fn ex(s: &str) -> Vec<Arg> {
        vec![Arg::Expr(parse_expr_str(s).unwrap())]
    }

    #[test]
    fn purity() {
        let ast = parse_c("x = 1;").unwrap();
        let ctx = Ctx::new(&ast, NodeId(0));
        assert_eq!(eval_args("pure", &[ex("a + b")], &ctx).unwrap(), Tri::True);
        assert_eq!(eval_args("pure", &[ex("a = b")], &ctx).unwrap(), Tri::False);
        assert_eq!(eval_args("pure", &[ex("i++")], &ctx).unwrap(), Tri::False);
        assert_eq!(
            eval_args("pure", &[ex("f(a)")], &ctx).unwrap(),
            Tri::Unknown
        );
    }

    #[test]
    fn names_declared_inside_are_written() {
        let ast = parse_c("for (int j = 0; j < N; j++)\n    m[j] = a*x[j];").unwrap();
        let ctx = Ctx::new(&ast, NodeId(0));
        let body = vec![Arg::Stmts(vec![ast.items[0].clone()])];
        assert_eq!(
            eval_args("no_write", &[body.clone(), ex("a*x[j]")], &ctx).unwrap(),
            Tri::False
        );
        assert_eq!(
            eval_args("no_write", &[body, ex("a")], &ctx).unwrap(),
            Tri::True
        );
    }

    #[test]
    fn arity_is_checked() {
        let ast = AnnotatedAst::default();
        let ctx = Ctx::new(&ast, NodeId(0));
        let e = eval_args("pure", &[ex("a"), ex("b")], &ctx).unwrap_err();
        assert_eq!(e.kind(), "PredicateArityError");
    }

    #[test]
    fn distributivity() {
        let ast = AnnotatedAst::default();
        let ctx = Ctx::new(&ast, NodeId(0));
        let op = |o| vec![Arg::Op(OpSlot::Op(o))];
        assert_eq!(
            eval_args("distributes_over", &[op(BinOp::Mul), op(BinOp::Add)], &ctx).unwrap(),
            Tri::True
        );
        assert_eq!(
            eval_args("distributes_over", &[op(BinOp::Add), op(BinOp::Mul)], &ctx).unwrap(),
            Tri::Unknown
        );
    }

    #[test]
    fn identity_facts_must_precede() {
        let ast = parse_c("x = 1;\n#pragma stml + is_identity z\ny = 2;").unwrap();
        let ids = ast.sequence_ids(NodeId(0));
        let op = vec![Arg::Op(OpSlot::Op(BinOp::Add))];
        let before = Ctx::new(&ast, ids[0]);
        assert_eq!(
            eval_args("is_identity", &[ex("z"), op.clone()], &before).unwrap(),
            Tri::Unknown
        );
        let after = Ctx::new(&ast, NodeId(ids[1].0 + 1));
        assert_eq!(
            eval_args("is_identity", &[ex("z"), op], &after).unwrap(),
            Tri::True
        );
        assert_eq!(
            eval_args("is_identity", &[ex("0")], &before).unwrap(),
            Tri::True
        );
    }

    #[test]
    fn prev_arrays_by_offset() {
        let ast = parse_c("float c[N], d[N], v[N];").unwrap();
        let ctx = Ctx::new(&ast, NodeId(0));
        let s = |src: &str| vec![Arg::Stmts(parse_c(src).unwrap().items)];
        let i = ex("i");
        let ok = eval_args(
            "no_write_prev_arrays",
            &[s("c[i] = v[i];"), s("d[i] = c[i];"), i.clone()],
            &ctx,
        );
        assert_eq!(ok.unwrap(), Tri::True);
        let bad = eval_args(
            "no_write_prev_arrays",
            &[s("c[i] = v[i];"), s("d[i] = c[i+1];"), i.clone()],
            &ctx,
        );
        assert_eq!(bad.unwrap(), Tri::False);
        let next = eval_args(
            "no_write_next_arrays",
            &[s("c[i] = v[i];"), s("d[i] = c[i-1];"), i],
            &ctx,
        );
        assert_eq!(next.unwrap(), Tri::False);
    }
}
