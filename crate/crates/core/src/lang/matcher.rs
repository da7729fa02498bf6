//! Structural matching of rule patterns against program fragments.
//!
//! Sequence metavariables (`cstmts`) try every split, leftmost metavariable
//! first and shortest prefix first, so the order of returned bindings is
//! deterministic.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::c::ast::*;
use crate::c::printer::{print_expr, print_stmts};
use crate::c::visit::{NodeRef, StmtSlot};
use crate::lang::rules::Pattern;

/// What a metavariable stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Fragment {
    Expr(Expr),
    Stmt(Stmt),
    Stmts(Vec<Stmt>),
    Op(BinOp),
}

impl Fragment {
    /// C text of the fragment, pragmas included.
    pub fn text(&self) -> String {
        match self {
            Fragment::Expr(e) => print_expr(e),
            Fragment::Stmt(s) => print_stmts(std::slice::from_ref(s)).trim_end().to_string(),
            Fragment::Stmts(v) => print_stmts(v).trim_end().to_string(),
            Fragment::Op(op) => op.symbol().to_string(),
        }
    }

    fn same(&self, other: &Fragment) -> bool {
        match (self, other) {
            (Fragment::Stmt(a), Fragment::Stmt(b)) => a.same_code(b),
            (Fragment::Stmts(a), Fragment::Stmts(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_code(y))
            }
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

impl Serialize for Fragment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text())
    }
}

/// Metavariable environment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Binding(pub BTreeMap<String, Fragment>);

impl Binding {
    pub fn get(&self, name: &str) -> Option<&Fragment> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, f: Fragment) {
        self.0.insert(name.into(), f);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bind `name` or check agreement with an existing binding.
    fn unify(&mut self, name: &str, f: Fragment) -> bool {
        match self.0.get(name) {
            Some(old) => old.same(&f),
            None => {
                self.0.insert(name.to_string(), f);
                true
            }
        }
    }
}

impl Serialize for Binding {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

/// Every binding under which `pattern` matches the node `at`.
pub fn match_pattern(pattern: &Pattern, ast: &AnnotatedAst, at: NodeId) -> Vec<Binding> {
    let Some(node) = ast.node(at) else {
        return Vec::new();
    };
    match_node(pattern, node)
}

/// As [`match_pattern`], for a node already in hand.
pub fn match_node(pattern: &Pattern, node: NodeRef<'_>) -> Vec<Binding> {
    match (pattern, node) {
        (Pattern::Expr(p), NodeRef::Expr(e)) => {
            let mut b = Binding::default();
            if match_expr(p, e, &mut b) {
                vec![b]
            } else {
                vec![]
            }
        }
        (Pattern::Stmt(p), NodeRef::Stmt(s)) => match_stmt(p, s, Binding::default()),
        (Pattern::Seq(p), n) => match n.sequence() {
            Some(items) => match_seq(p, items, Binding::default()),
            None => vec![],
        },
        _ => vec![],
    }
}

/// Whether a statement pattern should be tried at a statement in `slot`.
pub fn stmt_slot_eligible(slot: Option<StmtSlot>) -> bool {
    matches!(slot, Some(StmtSlot::Item) | Some(StmtSlot::Body))
}

pub fn match_expr(p: &Expr, e: &Expr, b: &mut Binding) -> bool {
    match (p, e) {
        (Expr::Meta(n), _) => b.unify(n, Fragment::Expr(e.clone())),
        (Expr::BinOper(slot, pl, pr), Expr::Binary(op, l, r)) => {
            let op_ok = match slot {
                OpSlot::Op(o) => o == op,
                OpSlot::Name(n) => b.unify(n, Fragment::Op(*op)),
            };
            op_ok && match_expr(pl, l, b) && match_expr(pr, r, b)
        }
        (Expr::Int(x), Expr::Int(y)) => x == y,
        (Expr::Float(x), Expr::Float(y)) => x == y,
        (Expr::Var(x), Expr::Var(y)) => x == y,
        (Expr::Index(x, xi), Expr::Index(y, yi)) => x == y && match_all(xi, yi, b),
        (Expr::Call(x, xa), Expr::Call(y, ya)) => x == y && match_all(xa, ya, b),
        (Expr::Unary(o1, x), Expr::Unary(o2, y)) => o1 == o2 && match_expr(x, y, b),
        (Expr::Binary(o1, l1, r1), Expr::Binary(o2, l2, r2))
        | (Expr::AugAssign(o1, l1, r1), Expr::AugAssign(o2, l2, r2)) => {
            o1 == o2 && match_expr(l1, l2, b) && match_expr(r1, r2, b)
        }
        (Expr::Assign(l1, r1), Expr::Assign(l2, r2)) => {
            match_expr(l1, l2, b) && match_expr(r1, r2, b)
        }
        _ => false,
    }
}

fn match_all(ps: &[Expr], es: &[Expr], b: &mut Binding) -> bool {
    ps.len() == es.len() && ps.iter().zip(es).all(|(p, e)| match_expr(p, e, b))
}

fn match_opt_expr(p: &Option<Expr>, e: &Option<Expr>, b: &mut Binding) -> bool {
    match (p, e) {
        (None, None) => true,
        (Some(p), Some(e)) => match_expr(p, e, b),
        _ => false,
    }
}

/// Bindings under which statement pattern `p` matches `s`. Pragmas on either
/// side are ignored.
pub fn match_stmt(p: &Stmt, s: &Stmt, b: Binding) -> Vec<Binding> {
    let mut b = b;
    match (&p.kind, &s.kind) {
        (StmtKind::Meta(n), _) => {
            if b.unify(n, Fragment::Stmt(s.clone())) {
                vec![b]
            } else {
                vec![]
            }
        }
        // sequence variable in a body position: binds the body's statements
        (StmtKind::MetaSeq(n), _) => {
            let items = s.as_body().to_vec();
            one(b.unify(n, Fragment::Stmts(items)), b)
        }
        (StmtKind::Expr(pe), StmtKind::Expr(se)) => one(match_expr(pe, se, &mut b), b),
        (StmtKind::Return(pe), StmtKind::Return(se)) => one(match_opt_expr(pe, se, &mut b), b),
        (StmtKind::Decl(pd), StmtKind::Decl(sd)) => {
            let ok = pd.ty == sd.ty
                && pd.declarators.len() == sd.declarators.len()
                && pd.declarators.iter().zip(&sd.declarators).all(|(x, y)| {
                    x.name == y.name
                        && match_all(&x.dims, &y.dims, &mut b)
                        && match_opt_expr(&x.init, &y.init, &mut b)
                });
            one(ok, b)
        }
        (StmtKind::Block(pi), StmtKind::Block(si)) => match_seq(pi, si, b),
        (
            StmtKind::For {
                init: pi,
                cond: pc,
                step: ps,
                body: pb,
            },
            StmtKind::For {
                init: si,
                cond: sc,
                step: ss,
                body: sb,
            },
        ) => {
            if !(match_expr(pc, sc, &mut b) && match_expr(ps, ss, &mut b)) {
                return vec![];
            }
            match_stmt(pi, si, b)
                .into_iter()
                .flat_map(|b| match_stmt(pb, sb, b))
                .collect()
        }
        (StmtKind::While { cond: pc, body: pb }, StmtKind::While { cond: sc, body: sb }) => {
            if !match_expr(pc, sc, &mut b) {
                return vec![];
            }
            match_stmt(pb, sb, b)
        }
        (
            StmtKind::If {
                cond: pc,
                then: pt,
                els: pe,
            },
            StmtKind::If {
                cond: sc,
                then: st,
                els: se,
            },
        ) => {
            if !match_expr(pc, sc, &mut b) {
                return vec![];
            }
            let after_then = match_stmt(pt, st, b);
            match (pe, se) {
                (None, None) => after_then,
                (Some(pe), Some(se)) => after_then
                    .into_iter()
                    .flat_map(|b| match_stmt(pe, se, b))
                    .collect(),
                _ => vec![],
            }
        }
        (StmtKind::Func(pf), StmtKind::Func(sf)) => {
            if pf.name != sf.name || pf.ret != sf.ret || pf.params != sf.params {
                return vec![];
            }
            match_seq(&pf.body, &sf.body, b)
        }
        _ => vec![],
    }
}

fn one(ok: bool, b: Binding) -> Vec<Binding> {
    if ok {
        vec![b]
    } else {
        vec![]
    }
}

/// Bindings under which the pattern sequence `ps` matches exactly `ss`.
pub fn match_seq(ps: &[Stmt], ss: &[Stmt], b: Binding) -> Vec<Binding> {
    let mut out = Vec::new();
    seq(ps, ss, b, &mut out);
    out
}

fn seq(ps: &[Stmt], ss: &[Stmt], b: Binding, out: &mut Vec<Binding>) {
    let Some((p, rest)) = ps.split_first() else {
        if ss.is_empty() {
            out.push(b);
        }
        return;
    };
    if let StmtKind::MetaSeq(n) = &p.kind {
        // a sequence variable cannot absorb more than what the remaining
        // non-sequence patterns leave over
        let fixed = rest
            .iter()
            .filter(|s| !matches!(s.kind, StmtKind::MetaSeq(_)))
            .count();
        if fixed > ss.len() {
            return;
        }
        for k in 0..=ss.len() - fixed {
            let mut b2 = b.clone();
            if b2.unify(n, Fragment::Stmts(ss[..k].to_vec())) {
                seq(rest, &ss[k..], b2, out);
            }
        }
        return;
    }
    let Some((s, srest)) = ss.split_first() else {
        return;
    };
    for b2 in match_stmt(p, s, b) {
        seq(rest, srest, b2, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c::parser::{parse_c, parse_template_expr, parse_template_stmts};

    fn seq_pat(src: &str) -> Vec<Stmt> {
        parse_template_stmts(src, 1).unwrap()
    }

    #[test]
    fn aug_assign_binding() {
        let ast = parse_c("c[i] += b*v[i];").unwrap();
        let p = &seq_pat("cexpr(l) += cexpr(e);")[0];
        let bs = match_stmt(p, &ast.items[0], Binding::default());
        assert_eq!(bs.len(), 1);
        assert_eq!(bs[0].get("l").unwrap().text(), "c[i]");
        assert_eq!(bs[0].get("e").unwrap().text(), "b*v[i]");
    }

    #[test]
    fn splits_are_leftmost_shortest_first() {
        let ast = parse_c("x = 1; y = 2; z = 3;").unwrap();
        let bs = match_seq(
            &seq_pat("cstmts(a); cstmts(b);"),
            &ast.items,
            Binding::default(),
        );
        let lens: Vec<usize> = bs
            .iter()
            .map(|b| match b.get("a") {
                Some(Fragment::Stmts(v)) => v.len(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(lens, [0, 1, 2, 3]);
    }

    #[test]
    fn repeated_metavariable_must_agree() {
        let p = parse_template_expr("cexpr(x) + cexpr(x)", 1).unwrap();
        let mut b = Binding::default();
        assert!(match_expr(
            &p,
            &parse_template_expr("a*b + a*b", 1).unwrap(),
            &mut b
        ));
        let mut b = Binding::default();
        assert!(!match_expr(
            &p,
            &parse_template_expr("a + b", 1).unwrap(),
            &mut b
        ));
    }

    #[test]
    fn bin_oper_binds_operator() {
        let p = parse_template_expr("bin_oper(g, cexpr(a), cexpr(b))", 1).unwrap();
        let mut b = Binding::default();
        assert!(match_expr(
            &p,
            &parse_template_expr("x - y", 1).unwrap(),
            &mut b
        ));
        assert_eq!(b.get("g"), Some(&Fragment::Op(BinOp::Sub)));
    }

    #[test]
    fn literal_pattern() {
        let ast = parse_c("x = 0;").unwrap();
        let pat = Pattern::Expr(Expr::Int(0));
        assert_eq!(
            match_pattern(&pat, &ast, NodeId(4)),
            vec![Binding::default()]
        );
        assert!(match_pattern(&pat, &ast, NodeId(1)).is_empty());
        assert!(match_pattern(&pat, &ast, NodeId(0)).is_empty());
    }
}
