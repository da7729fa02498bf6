//! Lowering of skeleton annotations to STML facts.

use thiserror::Error;

use crate::c::ast::*;
use crate::lang::property::{ExpProp, MemAccess, PolcaHead, PolcaProp, Property, StmlProp};
use crate::semantics::store::{merge_fact, Warning};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("LoweringError at line {line:?}: `{head}` takes {expected} arguments, got {got}")]
pub struct LoweringError {
    pub line: Option<u32>,
    pub head: String,
    pub expected: usize,
    pub got: usize,
}

fn access(mode: MemAccess, target: &Expr, offsets: Option<Vec<i64>>) -> StmlProp {
    StmlProp::Access {
        mode,
        target: target.clone(),
        offsets,
    }
}

fn same_length(a: &Expr, b: &Expr) -> StmlProp {
    StmlProp::SameLength {
        a: a.clone(),
        b: b.clone(),
    }
}

fn pure(f: &Expr) -> StmlProp {
    StmlProp::Exp {
        prop: ExpProp::Pure,
        qualifier: None,
        expr: f.clone(),
    }
}

fn space(v: &Expr) -> StmlProp {
    StmlProp::IterationSpace {
        lo: Expr::Int(0),
        hi: Expr::Call("length".into(), vec![v.clone()]),
    }
}

fn output(e: &Expr) -> Expr {
    Expr::Call("output".into(), vec![e.clone()])
}

/// STML facts for one skeleton annotation, in table order with duplicates
/// removed. Non-skeleton heads yield nothing.
pub fn skeleton_facts(p: &PolcaProp) -> Result<Vec<StmlProp>, LoweringError> {
    if p.args.len() != p.head.arity() {
        return Err(LoweringError {
            line: None,
            head: p.head.keyword().into(),
            expected: p.head.arity(),
            got: p.args.len(),
        });
    }
    let a = &p.args;
    let zero = Some(vec![0]);
    let facts = match p.head {
        PolcaHead::Map => vec![
            access(MemAccess::Reads, &a[1], zero.clone()),
            access(MemAccess::Writes, &a[2], zero),
            same_length(&a[1], &a[2]),
            pure(&a[0]),
            space(&a[1]),
            StmlProp::IterationIndependent,
        ],
        PolcaHead::ZipWith => vec![
            access(MemAccess::Reads, &a[1], zero.clone()),
            access(MemAccess::Reads, &a[2], zero.clone()),
            access(MemAccess::Writes, &a[3], zero),
            same_length(&a[1], &a[2]),
            same_length(&a[1], &a[3]),
            pure(&a[0]),
            space(&a[1]),
            StmlProp::IterationIndependent,
        ],
        PolcaHead::Fold => vec![
            access(MemAccess::Reads, &a[2], zero),
            access(MemAccess::Reads, &output(&a[1]), None),
            access(MemAccess::Writes, &a[3], None),
            pure(&a[0]),
            space(&a[2]),
        ],
        PolcaHead::Scanl => vec![
            access(MemAccess::Reads, &output(&a[1]), None),
            access(MemAccess::Reads, &a[2], zero.clone()),
            access(MemAccess::Reads, &a[3], zero),
            access(MemAccess::Writes, &a[3], Some(vec![1])),
            pure(&a[0]),
            space(&a[2]),
        ],
        PolcaHead::Def | PolcaHead::Input | PolcaHead::Output => vec![],
    };
    let mut out: Vec<StmlProp> = Vec::new();
    for f in facts {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

/// Attach the STML facts implied by every skeleton annotation, right after
/// the annotation itself. Facts already present are not repeated, and a
/// fact already present wins over a contradicting lowered one.
pub fn lower_polca(ast: &AnnotatedAst) -> Result<AnnotatedAst, LoweringError> {
    lower_polca_with_warnings(ast).map(|(a, _)| a)
}

pub fn lower_polca_with_warnings(
    ast: &AnnotatedAst,
) -> Result<(AnnotatedAst, Vec<Warning>), LoweringError> {
    let mut out = ast.clone();
    let mut warnings = Vec::new();
    let ids: Vec<(NodeId, Option<u32>)> = ast
        .nodes()
        .into_iter()
        .filter(|v| matches!(v.node, crate::c::visit::NodeRef::Stmt(_)))
        .map(|v| (v.id, ast.line_of(v.id)))
        .collect();
    let mut k = 0;
    let mut err = None;
    for_each_stmt_mut(&mut out.items, &mut |s| {
        let (id, line) = ids[k];
        k += 1;
        if err.is_some() {
            return;
        }
        let mut i = 0;
        while i < s.pragmas.len() {
            let Property::Polca(p) = &s.pragmas[i].prop else {
                i += 1;
                continue;
            };
            let facts = match skeleton_facts(p) {
                Ok(f) => f,
                Err(mut e) => {
                    e.line = line;
                    err = Some(e);
                    return;
                }
            };
            let mut at = i + 1;
            for f in facts {
                let new = Pragma {
                    prop: Property::Stml(f),
                    origin: Origin::Lowered,
                };
                if merge_fact(&mut s.pragmas, new, at, id, line, &mut warnings) {
                    at += 1;
                }
            }
            i = at;
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok((out, warnings)),
    }
}

/// Visit statements mutably in preorder.
pub fn for_each_stmt_mut(items: &mut [Stmt], f: &mut dyn FnMut(&mut Stmt)) {
    fn go(s: &mut Stmt, f: &mut dyn FnMut(&mut Stmt)) {
        f(s);
        s.for_each_child_stmt_mut(&mut |c| go(c, f));
    }
    for s in items {
        go(s, f);
    }
}
