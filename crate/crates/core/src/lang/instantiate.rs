//! Building rule consequents from a binding.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::c::ast::*;
use crate::lang::matcher::{Binding, Fragment};
use crate::lang::property::Property;
use crate::lang::rules::{Code, GenItem, Rule};
use crate::semantics::predicates::{eval_cond, Ctx, PredError, Tri};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiationError {
    #[error("InstantiationError: metavariable `{0}` is not bound")]
    Unbound(String),
    #[error("InstantiationError: `{var}` is bound to {found} where {expected} is needed")]
    WrongKind {
        var: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("InstantiationError: condition of `{0}` is undecided")]
    UndecidedCondition(String),
    #[error("InstantiationError: {0}")]
    Shape(String),
    #[error("InstantiationError: {0}")]
    Predicate(#[from] PredError),
}

/// One possible consequent of a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub code: Code,
    /// Rule assertions with metavariables filled in.
    pub asserts: Vec<Property>,
    /// Index of the first generated statement not copied from a statement
    /// metavariable; assertions attach there.
    pub anchor: Option<usize>,
}

/// Replace every occurrence of `from` in `e` by `to`. Occurrences inside an
/// inserted `to` are not revisited.
pub fn subs(e: &Expr, from: &Expr, to: &Expr) -> Expr {
    if e == from {
        return to.clone();
    }
    let mut out = e.clone();
    for c in out.children_mut() {
        *c = subs(c, from, to);
    }
    out
}

/// [`subs`] over every expression of a statement. Declared names and
/// pragmas are left alone.
pub fn subs_stmt(s: &Stmt, from: &Expr, to: &Expr) -> Stmt {
    let mut out = s.clone();
    subs_stmt_in_place(&mut out, from, to);
    out
}

fn subs_stmt_in_place(s: &mut Stmt, from: &Expr, to: &Expr) {
    match &mut s.kind {
        StmtKind::Decl(d) => {
            for dc in &mut d.declarators {
                for e in dc.dims.iter_mut().chain(dc.init.iter_mut()) {
                    *e = subs(e, from, to);
                }
            }
        }
        StmtKind::Expr(e) => *e = subs(e, from, to),
        StmtKind::For { cond, step, .. } => {
            *cond = subs(cond, from, to);
            *step = subs(step, from, to);
        }
        StmtKind::While { cond, .. } | StmtKind::If { cond, .. } => *cond = subs(cond, from, to),
        StmtKind::Return(Some(e)) => *e = subs(e, from, to),
        StmtKind::Subs { from: f, to: t, .. } => {
            *f = subs(f, from, to);
            *t = subs(t, from, to);
        }
        _ => {}
    }
    s.for_each_child_stmt_mut(&mut |c| subs_stmt_in_place(c, from, to));
}

fn fragment_kind(f: &Fragment) -> &'static str {
    match f {
        Fragment::Expr(_) => "an expression",
        Fragment::Stmt(_) => "a statement",
        Fragment::Stmts(_) => "a statement list",
        Fragment::Op(_) => "an operator",
    }
}

fn lookup<'b>(b: &'b Binding, n: &str) -> Result<&'b Fragment, InstantiationError> {
    b.get(n)
        .ok_or_else(|| InstantiationError::Unbound(n.to_string()))
}

/// Fill an expression template.
pub fn instantiate_expr(t: &Expr, b: &Binding) -> Result<Expr, InstantiationError> {
    Ok(match t {
        Expr::Meta(n) | Expr::FreshVar(n) => match lookup(b, n)? {
            Fragment::Expr(e) => e.clone(),
            f => {
                return Err(InstantiationError::WrongKind {
                    var: n.clone(),
                    expected: "an expression",
                    found: fragment_kind(f),
                })
            }
        },
        Expr::BinOper(slot, l, r) => {
            let op = match slot {
                OpSlot::Op(op) => *op,
                OpSlot::Name(n) => match lookup(b, n)? {
                    Fragment::Op(op) => *op,
                    f => {
                        return Err(InstantiationError::WrongKind {
                            var: n.clone(),
                            expected: "an operator",
                            found: fragment_kind(f),
                        })
                    }
                },
            };
            Expr::binary(op, instantiate_expr(l, b)?, instantiate_expr(r, b)?)
        }
        Expr::Subs(x, from, to) => subs(
            &instantiate_expr(x, b)?,
            &instantiate_expr(from, b)?,
            &instantiate_expr(to, b)?,
        ),
        other => {
            let mut out = other.clone();
            for c in out.children_mut() {
                *c = instantiate_expr(c, b)?;
            }
            out
        }
    })
}

fn instantiate_prop(p: &Property, b: &Binding) -> Result<Property, InstantiationError> {
    let mut p = p.clone();
    for e in p.exprs_mut() {
        *e = instantiate_expr(e, b)?;
    }
    for s in p.op_slots_mut() {
        if let OpSlot::Name(n) = s {
            if let Some(Fragment::Op(op)) = b.get(n) {
                *s = OpSlot::Op(*op);
            }
        }
    }
    Ok(p)
}

fn template_pragmas(s: &Stmt, b: &Binding) -> Result<Vec<Pragma>, InstantiationError> {
    s.pragmas
        .iter()
        .map(|p| {
            Ok(Pragma {
                prop: instantiate_prop(&p.prop, b)?,
                origin: Origin::RuleAssert,
            })
        })
        .collect()
}

/// Output statements, each flagged with whether it came straight from a
/// statement metavariable.
fn instantiate_stmt(
    t: &Stmt,
    b: &Binding,
    out: &mut Vec<(Stmt, bool)>,
) -> Result<(), InstantiationError> {
    let extra = template_pragmas(t, b)?;
    let start = out.len();
    match &t.kind {
        StmtKind::Meta(n) => match lookup(b, n)? {
            Fragment::Stmt(s) => out.push((s.clone(), true)),
            f => {
                return Err(InstantiationError::WrongKind {
                    var: n.clone(),
                    expected: "a statement",
                    found: fragment_kind(f),
                })
            }
        },
        StmtKind::MetaSeq(n) => match lookup(b, n)? {
            Fragment::Stmts(v) => out.extend(v.iter().map(|s| (s.clone(), true))),
            Fragment::Stmt(s) => out.push((s.clone(), true)),
            f => {
                return Err(InstantiationError::WrongKind {
                    var: n.clone(),
                    expected: "a statement list",
                    found: fragment_kind(f),
                })
            }
        },
        StmtKind::Subs { target, from, to } => {
            let from = instantiate_expr(from, b)?;
            let to = instantiate_expr(to, b)?;
            let mut inner = Vec::new();
            instantiate_stmt(target, b, &mut inner)?;
            out.extend(
                inner
                    .into_iter()
                    .map(|(s, m)| (subs_stmt(&s, &from, &to), m)),
            );
        }
        StmtKind::Decl(d) => {
            let mut d = d.clone();
            for dc in &mut d.declarators {
                for e in dc.dims.iter_mut().chain(dc.init.iter_mut()) {
                    *e = instantiate_expr(e, b)?;
                }
            }
            out.push((Stmt::new(StmtKind::Decl(d)), false));
        }
        StmtKind::Expr(e) => out.push((Stmt::expr(instantiate_expr(e, b)?), false)),
        StmtKind::Return(e) => {
            let e = e.as_ref().map(|e| instantiate_expr(e, b)).transpose()?;
            out.push((Stmt::new(StmtKind::Return(e)), false));
        }
        StmtKind::Block(items) => out.push((Stmt::block(instantiate_seq(items, b)?), false)),
        StmtKind::For {
            init,
            cond,
            step,
            body,
        } => {
            let mut i = instantiate_seq(std::slice::from_ref(init), b)?;
            if i.len() != 1 {
                return Err(InstantiationError::Shape(format!(
                    "a for header needs one init statement, got {}",
                    i.len()
                )));
            }
            let init = Box::new(i.remove(0));
            out.push((
                Stmt::new(StmtKind::For {
                    init,
                    cond: instantiate_expr(cond, b)?,
                    step: instantiate_expr(step, b)?,
                    body: Box::new(single(instantiate_seq(std::slice::from_ref(body), b)?)),
                }),
                false,
            ));
        }
        StmtKind::While { cond, body } => out.push((
            Stmt::new(StmtKind::While {
                cond: instantiate_expr(cond, b)?,
                body: Box::new(single(instantiate_seq(std::slice::from_ref(body), b)?)),
            }),
            false,
        )),
        StmtKind::If { cond, then, els } => {
            let els = match els {
                Some(e) => Some(Box::new(single(instantiate_seq(
                    std::slice::from_ref(e),
                    b,
                )?))),
                None => None,
            };
            out.push((
                Stmt::new(StmtKind::If {
                    cond: instantiate_expr(cond, b)?,
                    then: Box::new(single(instantiate_seq(std::slice::from_ref(then), b)?)),
                    els,
                }),
                false,
            ));
        }
        StmtKind::Func(f) => {
            let mut f = f.clone();
            f.body = instantiate_seq(&f.body, b)?;
            out.push((Stmt::new(StmtKind::Func(f)), false));
        }
    }
    if !extra.is_empty() {
        if let Some((s, _)) = out.get_mut(start) {
            for p in extra {
                if !s.pragmas.contains(&p) {
                    s.pragmas.push(p);
                }
            }
        }
    }
    Ok(())
}

fn single(mut v: Vec<Stmt>) -> Stmt {
    if v.len() == 1 {
        v.remove(0)
    } else {
        Stmt::block(v)
    }
}

fn instantiate_seq(items: &[Stmt], b: &Binding) -> Result<Vec<Stmt>, InstantiationError> {
    let mut out = Vec::new();
    for t in items {
        instantiate_stmt(t, b, &mut out)?;
    }
    Ok(out.into_iter().map(|(s, _)| s).collect())
}

/// Partial consequent while walking generate items.
#[derive(Clone, Default)]
struct Partial {
    expr: Option<Expr>,
    stmts: Vec<(Stmt, bool)>,
}

fn gen_items(
    items: &[GenItem],
    rule: &Rule,
    b: &Binding,
    ctx: &Ctx<'_>,
    acc: Vec<Partial>,
) -> Result<Vec<Partial>, InstantiationError> {
    let mut acc = acc;
    for it in items {
        acc = match it {
            GenItem::Code(Code::Expr(e)) => {
                let e = instantiate_expr(e, b)?;
                acc.into_iter()
                    .map(|mut p| {
                        p.expr = Some(e.clone());
                        p
                    })
                    .collect()
            }
            GenItem::Code(Code::Stmts(v)) => {
                let mut gen = Vec::new();
                for t in v {
                    instantiate_stmt(t, b, &mut gen)?;
                }
                acc.into_iter()
                    .map(|mut p| {
                        p.stmts.extend(gen.iter().cloned());
                        p
                    })
                    .collect()
            }
            GenItem::IfThen { cond, then } => match decide(cond, rule, b, ctx)? {
                true => gen_items(then, rule, b, ctx, acc)?,
                false => acc,
            },
            GenItem::IfThenElse { cond, then, els } => match decide(cond, rule, b, ctx)? {
                true => gen_items(then, rule, b, ctx, acc)?,
                false => gen_items(els, rule, b, ctx, acc)?,
            },
            GenItem::GenList(alts) => {
                let mut next = Vec::new();
                for alt in alts {
                    next.extend(gen_items(alt, rule, b, ctx, acc.clone())?);
                }
                next
            }
        };
    }
    Ok(acc)
}

fn decide(
    cond: &crate::lang::rules::Cond,
    rule: &Rule,
    b: &Binding,
    ctx: &Ctx<'_>,
) -> Result<bool, InstantiationError> {
    match eval_cond(cond, b, ctx)? {
        Tri::True => Ok(true),
        Tri::False => Ok(false),
        Tri::Unknown => Err(InstantiationError::UndecidedCondition(rule.name.clone())),
    }
}

/// Every consequent of `rule` under `b`: one per combination of `gen_list`
/// alternatives, in declaration order.
pub fn instantiate(
    rule: &Rule,
    b: &Binding,
    ctx: &Ctx<'_>,
) -> Result<Vec<Instance>, InstantiationError> {
    let mut fresh = Vec::new();
    for g in &rule.generate {
        crate::lang::rules::gen_fresh_vars(g, &mut fresh);
    }
    let mut taken = ctx.identifiers().clone();
    let mut owned = b.clone();
    for n in fresh {
        if owned.get(&n).is_none() {
            let name = fresh_name(&taken);
            taken.insert(name.clone());
            owned.insert(n, Fragment::Expr(Expr::Var(name)));
        }
    }
    let b = &owned;
    let parts = gen_items(&rule.generate, rule, b, ctx, vec![Partial::default()])?;
    let asserts = rule
        .asserts
        .iter()
        .map(|p| instantiate_prop(p, b))
        .collect::<Result<Vec<_>, _>>()?;
    parts
        .into_iter()
        .map(|p| {
            let code = match p.expr {
                Some(e) => Code::Expr(e),
                None => Code::Stmts(p.stmts.iter().map(|(s, _)| s.clone()).collect()),
            };
            let anchor = match &code {
                Code::Expr(_) => None,
                Code::Stmts(v) if v.is_empty() => None,
                Code::Stmts(_) => Some(
                    p.stmts
                        .iter()
                        .position(|(_, from_meta)| !from_meta)
                        .unwrap_or(0),
                ),
            };
            Ok(Instance {
                code,
                asserts: asserts.clone(),
                anchor,
            })
        })
        .collect()
}

/// Smallest `__stml_<k>` not among `taken`.
pub fn fresh_name(taken: &BTreeSet<String>) -> String {
    (0..)
        .map(|k| format!("__stml_{k}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded")
}
