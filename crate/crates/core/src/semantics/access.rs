//! Syntactic read/write sets with loop-relative array offsets.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::c::ast::*;
use crate::c::printer::print_expr;
use crate::c::visit::NodeRef;
use crate::lang::property::{ExpProp, Property, StmlProp};

/// A memory location: a scalar, an array element, or a whole array when an
/// array base carries no indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Location {
    pub base: String,
    pub indices: Vec<Expr>,
}

impl Location {
    pub fn scalar(name: impl Into<String>) -> Location {
        Location {
            base: name.into(),
            indices: Vec::new(),
        }
    }

    /// Location named by an lvalue expression, with index expressions
    /// normalized.
    pub fn of_lvalue(e: &Expr) -> Option<Location> {
        match e {
            Expr::Var(n) => Some(Location::scalar(n.clone())),
            Expr::Index(b, idx) => Some(Location {
                base: b.clone(),
                indices: idx.iter().map(normalize_index).collect(),
            }),
            _ => None,
        }
    }

    fn key(&self) -> (String, Vec<String>) {
        (
            self.base.clone(),
            self.indices.iter().map(print_expr).collect(),
        )
    }
}

impl PartialOrd for Location {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Location {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        for i in &self.indices {
            write!(f, "[{}]", print_expr(i))?;
        }
        Ok(())
    }
}

impl Serialize for Location {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Reads,
    Writes,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AccessSet {
    pub reads: BTreeSet<Location>,
    pub writes: BTreeSet<Location>,
    /// Offsets relative to the loop expression, per array base and mode.
    #[serde(serialize_with = "ser_offsets")]
    pub offsets: BTreeMap<(String, Mode), BTreeSet<i64>>,
    /// Array bases accessed (in the given mode) through an index that is
    /// not the loop expression plus a literal.
    pub unclassified: BTreeSet<(String, Mode)>,
    /// Some access could not be analysed; the sets are then incomplete.
    pub unknown: bool,
    /// Names declared inside the fragment and hidden from the sets.
    pub locals: BTreeSet<String>,
}

fn ser_offsets<S: Serializer>(
    m: &BTreeMap<(String, Mode), BTreeSet<i64>>,
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for ((base, mode), offs) in m {
        seq.serialize_element(&(base, mode, offs))?;
    }
    seq.end()
}

impl AccessSet {
    pub fn union(&mut self, other: AccessSet) {
        self.reads.extend(other.reads);
        self.writes.extend(other.writes);
        for (k, v) in other.offsets {
            self.offsets.entry(k).or_default().extend(v);
        }
        self.unclassified.extend(other.unclassified);
        self.unknown |= other.unknown;
        self.locals.extend(other.locals);
    }

    pub fn offsets_of(&self, base: &str, mode: Mode) -> Option<&BTreeSet<i64>> {
        self.offsets.get(&(base.to_string(), mode))
    }

    /// Bases read or written.
    pub fn bases(&self) -> BTreeSet<&str> {
        self.reads
            .iter()
            .chain(&self.writes)
            .map(|l| l.base.as_str())
            .collect()
    }

    /// Whether every access to `base` goes through the loop expression plus
    /// a literal offset on the first index.
    pub fn loop_indexed_only(&self, base: &str) -> bool {
        let touched = self
            .reads
            .iter()
            .chain(&self.writes)
            .any(|l| l.base == base);
        if !touched {
            return true;
        }
        let classified = [Mode::Reads, Mode::Writes]
            .iter()
            .any(|m| self.offsets.contains_key(&(base.to_string(), *m)));
        classified
            && !self.unclassified.iter().any(|(b, _)| b == base)
            && self
                .reads
                .iter()
                .chain(&self.writes)
                .all(|l| l.base != base || !l.indices.is_empty())
    }

    fn remove_base(&mut self, base: &str) {
        self.reads.retain(|l| l.base != base);
        self.writes.retain(|l| l.base != base);
        self.offsets.retain(|(b, _), _| b != base);
        self.unclassified.retain(|(b, _)| b != base);
    }

    fn remove_bases(&mut self, names: &BTreeSet<String>) {
        for n in names {
            self.remove_base(n);
            self.locals.insert(n.clone());
        }
    }
}

/// `i++` and `i--` stand for `i`, `++i` for `i + 1`, an assignment for its
/// right-hand side.
pub fn normalize_index(e: &Expr) -> Expr {
    match e {
        Expr::Unary(UnOp::PostInc | UnOp::PostDec, x) => normalize_index(x),
        Expr::Unary(UnOp::PreInc, x) => Expr::binary(BinOp::Add, normalize_index(x), Expr::Int(1)),
        Expr::Unary(UnOp::PreDec, x) => Expr::binary(BinOp::Sub, normalize_index(x), Expr::Int(1)),
        Expr::Assign(_, r) => normalize_index(r),
        Expr::AugAssign(op, l, r) => Expr::binary(*op, normalize_index(l), normalize_index(r)),
        other => other.clone(),
    }
}

/// `k` when `idx` is `e`, `e + k`, `e - k` or `k + e` for an integer literal `k`.
pub fn offset_from(idx: &Expr, e: &Expr) -> Option<i64> {
    fn lit(x: &Expr) -> Option<i64> {
        match x {
            Expr::Int(k) => Some(*k),
            Expr::Unary(UnOp::Neg, y) => lit(y).map(|k| -k),
            _ => None,
        }
    }
    if idx == e {
        return Some(0);
    }
    match idx {
        Expr::Binary(BinOp::Add, a, b) if **a == *e => lit(b),
        Expr::Binary(BinOp::Add, a, b) if **b == *e => lit(a),
        Expr::Binary(BinOp::Sub, a, b) if **a == *e => lit(b).map(|k| -k),
        _ => None,
    }
}

/// Whole-program facts the analysis needs.
#[derive(Clone)]
pub struct Analyzer<'a> {
    funcs: BTreeMap<&'a str, &'a FuncDef>,
    arrays: BTreeSet<String>,
    pure_fns: BTreeSet<String>,
    loop_expr: Option<Expr>,
}

impl<'a> Analyzer<'a> {
    pub fn new(ast: &'a AnnotatedAst) -> Analyzer<'a> {
        let mut funcs = BTreeMap::new();
        let mut arrays = BTreeSet::new();
        let mut pure_fns = BTreeSet::new();
        fn scan(s: &Stmt, arrays: &mut BTreeSet<String>, pure_fns: &mut BTreeSet<String>) {
            for p in &s.pragmas {
                if let Property::Stml(StmlProp::Exp {
                    prop: ExpProp::Pure,
                    qualifier: None,
                    expr: Expr::Var(n),
                }) = &p.prop
                {
                    pure_fns.insert(n.clone());
                }
            }
            if let StmtKind::Decl(d) = &s.kind {
                for dc in &d.declarators {
                    if !dc.dims.is_empty() {
                        arrays.insert(dc.name.clone());
                    }
                }
            }
            for c in s.child_stmts() {
                scan(c, arrays, pure_fns);
            }
        }
        for s in &ast.items {
            if let StmtKind::Func(f) = &s.kind {
                funcs.insert(f.name.as_str(), f);
            }
            scan(s, &mut arrays, &mut pure_fns);
        }
        Analyzer {
            funcs,
            arrays,
            pure_fns,
            loop_expr: None,
        }
    }

    /// Record offsets relative to `e` (usually the loop variable).
    pub fn with_loop(mut self, e: Option<Expr>) -> Self {
        self.loop_expr = e;
        self
    }

    pub fn set_loop(&mut self, e: Option<Expr>) {
        self.loop_expr = e;
    }

    pub fn is_array(&self, name: &str) -> bool {
        self.arrays.contains(name)
    }

    pub fn has_pure_fact(&self, name: &str) -> bool {
        self.pure_fns.contains(name)
    }

    pub fn node(&self, n: NodeRef<'_>) -> AccessSet {
        match n {
            NodeRef::Unit(items) => self.stmts(items),
            NodeRef::Stmt(s) => self.stmt(s),
            NodeRef::Expr(e) => self.expr(e),
        }
    }

    pub fn expr(&self, e: &Expr) -> AccessSet {
        let mut acc = AccessSet::default();
        self.expr_into(e, &mut acc, &mut BTreeSet::new());
        acc
    }

    pub fn stmt(&self, s: &Stmt) -> AccessSet {
        let mut acc = AccessSet::default();
        self.stmt_into(s, &mut acc, &mut BTreeSet::new());
        acc
    }

    /// Statements in sequence; names they declare are local to the sequence.
    pub fn stmts(&self, items: &[Stmt]) -> AccessSet {
        let mut acc = AccessSet::default();
        self.seq_into(items, &mut acc, &mut BTreeSet::new());
        acc
    }

    fn add(&self, acc: &mut AccessSet, mode: Mode, loc: Location) {
        if !loc.indices.is_empty() || self.arrays.contains(&loc.base) {
            if let Some(le) = &self.loop_expr {
                match loc.indices.first().and_then(|i| offset_from(i, le)) {
                    Some(k) => {
                        acc.offsets
                            .entry((loc.base.clone(), mode))
                            .or_default()
                            .insert(k);
                    }
                    None => {
                        acc.unclassified.insert((loc.base.clone(), mode));
                    }
                }
            }
        }
        match mode {
            Mode::Reads => acc.reads.insert(loc),
            Mode::Writes => acc.writes.insert(loc),
        };
    }

    fn lvalue(
        &self,
        e: &Expr,
        read_too: bool,
        acc: &mut AccessSet,
        visiting: &mut BTreeSet<String>,
    ) {
        match e {
            Expr::Var(_) | Expr::Index(..) => {
                if let Expr::Index(_, idx) = e {
                    for i in idx {
                        self.expr_into(i, acc, visiting);
                    }
                }
                let loc = Location::of_lvalue(e).expect("lvalue");
                if read_too {
                    self.add(acc, Mode::Reads, loc.clone());
                }
                self.add(acc, Mode::Writes, loc);
            }
            _ => {
                acc.unknown = true;
                self.expr_into(e, acc, visiting);
            }
        }
    }

    fn expr_into(&self, e: &Expr, acc: &mut AccessSet, visiting: &mut BTreeSet<String>) {
        match e {
            Expr::Int(_) | Expr::Float(_) => {}
            Expr::Var(n) => self.add(acc, Mode::Reads, Location::scalar(n.clone())),
            Expr::Index(..) => {
                if let Expr::Index(_, idx) = e {
                    for i in idx {
                        self.expr_into(i, acc, visiting);
                    }
                }
                self.add(acc, Mode::Reads, Location::of_lvalue(e).expect("index"));
            }
            Expr::Unary(op, x) if op.is_increment() => self.lvalue(x, true, acc, visiting),
            Expr::Unary(_, x) => self.expr_into(x, acc, visiting),
            Expr::Binary(_, l, r) => {
                self.expr_into(l, acc, visiting);
                self.expr_into(r, acc, visiting);
            }
            Expr::Assign(l, r) => {
                self.expr_into(r, acc, visiting);
                self.lvalue(l, false, acc, visiting);
            }
            Expr::AugAssign(_, l, r) => {
                self.lvalue(l, true, acc, visiting);
                self.expr_into(r, acc, visiting);
            }
            Expr::Call(f, args) => {
                for a in args {
                    self.expr_into(a, acc, visiting);
                }
                self.call_effects(f, acc, visiting);
            }
            Expr::Meta(_) | Expr::BinOper(..) | Expr::Subs(..) | Expr::FreshVar(_) => {
                acc.unknown = true
            }
        }
    }

    /// Global effects of calling `name`: a whole-base summary for functions
    /// defined in the program, nothing for functions declared pure, unknown
    /// otherwise.
    fn call_effects(&self, name: &str, acc: &mut AccessSet, visiting: &mut BTreeSet<String>) {
        let Some(f) = self.funcs.get(name) else {
            if !self.pure_fns.contains(name) {
                acc.unknown = true;
            }
            return;
        };
        if !visiting.insert(name.to_string()) {
            return;
        }
        let inner = Analyzer {
            funcs: self.funcs.clone(),
            arrays: self.arrays.clone(),
            pure_fns: self.pure_fns.clone(),
            loop_expr: None,
        };
        let mut body = AccessSet::default();
        let locals: BTreeSet<String> = f.params.iter().map(|p| p.name.clone()).collect();
        inner.seq_into(&f.body, &mut body, visiting);
        body.remove_bases(&locals);
        visiting.remove(name);
        acc.unknown |= body.unknown;
        for (mode, set) in [(Mode::Reads, body.reads), (Mode::Writes, body.writes)] {
            for loc in set {
                let whole = Location::scalar(loc.base.clone());
                if self.arrays.contains(&loc.base) && self.loop_expr.is_some() {
                    acc.unclassified.insert((loc.base.clone(), mode));
                }
                match mode {
                    Mode::Reads => acc.reads.insert(whole),
                    Mode::Writes => acc.writes.insert(whole),
                };
            }
        }
    }

    /// A local hiding a name of the loop expression makes offsets
    /// meaningless inside its scope.
    fn shadowed(&self, names: &BTreeSet<String>) -> Option<Analyzer<'a>> {
        let le = self.loop_expr.as_ref()?;
        if !names.iter().any(|n| le.contains(&Expr::var(n.clone()))) {
            return None;
        }
        Some(self.clone().with_loop(Some(Expr::var("<shadowed>"))))
    }

    fn seq_into(&self, items: &[Stmt], acc: &mut AccessSet, visiting: &mut BTreeSet<String>) {
        let mut locals = BTreeSet::new();
        let mut scoped: Option<Analyzer<'a>> = None;
        for s in items {
            let mut one = AccessSet::default();
            scoped
                .as_ref()
                .unwrap_or(self)
                .stmt_into(s, &mut one, visiting);
            if let StmtKind::Decl(d) = &s.kind {
                locals.extend(d.declarators.iter().map(|dc| dc.name.clone()));
                if scoped.is_none() {
                    scoped = self.shadowed(&locals);
                }
            }
            one.remove_bases(&locals);
            acc.union(one);
        }
    }

    fn stmt_into(&self, s: &Stmt, acc: &mut AccessSet, visiting: &mut BTreeSet<String>) {
        match &s.kind {
            StmtKind::Decl(d) => {
                for dc in &d.declarators {
                    for e in dc.dims.iter().chain(dc.init.iter()) {
                        self.expr_into(e, acc, visiting);
                    }
                    self.add(acc, Mode::Writes, Location::scalar(dc.name.clone()));
                }
            }
            StmtKind::Expr(e) => self.expr_into(e, acc, visiting),
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr_into(e, acc, visiting);
                }
            }
            StmtKind::Block(items) => self.seq_into(items, acc, visiting),
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                let names: BTreeSet<String> = match &init.kind {
                    StmtKind::Decl(d) => d.declarators.iter().map(|dc| dc.name.clone()).collect(),
                    _ => BTreeSet::new(),
                };
                let scoped = self.shadowed(&names);
                let an = scoped.as_ref().unwrap_or(self);
                let mut inner = AccessSet::default();
                an.stmt_into(init, &mut inner, visiting);
                an.expr_into(cond, &mut inner, visiting);
                an.expr_into(step, &mut inner, visiting);
                an.stmt_into(body, &mut inner, visiting);
                inner.remove_bases(&names);
                acc.union(inner);
            }
            StmtKind::While { cond, body } => {
                self.expr_into(cond, acc, visiting);
                self.stmt_into(body, acc, visiting);
            }
            StmtKind::If { cond, then, els } => {
                self.expr_into(cond, acc, visiting);
                self.stmt_into(then, acc, visiting);
                if let Some(e) = els {
                    self.stmt_into(e, acc, visiting);
                }
            }
            StmtKind::Func(_) => {}
            StmtKind::Meta(_) | StmtKind::MetaSeq(_) | StmtKind::Subs { .. } => acc.unknown = true,
        }
    }
}

/// Read/write sets of the node `at`, with offsets of arrays indexed by
/// `loop_var ± k`.
pub fn access_set(ast: &AnnotatedAst, at: NodeId, loop_var: Option<&str>) -> AccessSet {
    let Some(node) = ast.node(at) else {
        return AccessSet {
            unknown: true,
            ..Default::default()
        };
    };
    Analyzer::new(ast)
        .with_loop(loop_var.map(Expr::var))
        .node(node)
}

/// How two locations may share storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overlap {
    Disjoint,
    May,
    Must,
}

pub fn overlap(a: &Location, b: &Location) -> Overlap {
    if a.base != b.base {
        return Overlap::Disjoint;
    }
    if a.indices.is_empty() || b.indices.is_empty() || a == b {
        return Overlap::Must;
    }
    let distinct_literal = a.indices.iter().zip(&b.indices).any(|(x, y)| match (x, y) {
        (Expr::Int(p), Expr::Int(q)) => p != q,
        _ => false,
    });
    if distinct_literal {
        Overlap::Disjoint
    } else {
        Overlap::May
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c::parser::{parse_c, parse_expr_str};

    fn names(s: &BTreeSet<Location>) -> Vec<String> {
        s.iter().map(|l| l.to_string()).collect()
    }

    #[test]
    fn assignment_sets() {
        let an = AnnotatedAst::default();
        let a = Analyzer::new(&an);
        let acc = a.expr(&parse_expr_str("c = a + 3").unwrap());
        assert_eq!(names(&acc.writes), ["c"]);
        assert_eq!(names(&acc.reads), ["a"]);
        let acc = a.expr(&parse_expr_str("c[i++] = a + 3").unwrap());
        assert_eq!(names(&acc.writes), ["c[i]", "i"]);
    }

    #[test]
    fn stencil_offsets() {
        let ast = parse_c(
            "float a, c[N];\nfor (int i = 1; i < N - 1; i++) a += c[i-1] + c[i+1] - 2*c[i];",
        )
        .unwrap();
        let body = ast
            .nodes()
            .into_iter()
            .find(|v| matches!(v.node, NodeRef::Stmt(s) if matches!(s.kind, StmtKind::Expr(_))))
            .unwrap();
        let acc = access_set(&ast, body.id, Some("i"));
        let offs: Vec<i64> = acc
            .offsets_of("c", Mode::Reads)
            .unwrap()
            .iter()
            .copied()
            .collect();
        assert_eq!(offs, [-1, 0, 1]);
        assert!(acc.unclassified.is_empty());
    }

    #[test]
    fn loop_locals_are_hidden() {
        let ast = parse_c("for (int i = 0; i < N; i++) { float t = v[i]; w[i] = t; }").unwrap();
        let acc = access_set(&ast, NodeId(1), None);
        assert_eq!(names(&acc.writes), ["w[i]"]);
        assert_eq!(names(&acc.reads), ["N", "v[i]"]);
    }

    #[test]
    fn shadowing_loop_variable_hides_offsets() {
        let ast = parse_c("for (int i = 0; i < N; i++) p[i] = 1;").unwrap();
        let acc = access_set(&ast, NodeId(1), Some("i"));
        assert!(acc.offsets_of("p", Mode::Writes).is_none());
        assert!(!acc.loop_indexed_only("p"));
    }

    #[test]
    fn unknown_callee() {
        let ast = parse_c("x = f(y);").unwrap();
        assert!(access_set(&ast, NodeId(1), None).unknown);
        let ast = parse_c("#pragma stml pure f\nx = f(y);").unwrap();
        assert!(!access_set(&ast, NodeId(1), None).unknown);
    }

    #[test]
    fn function_summary_uses_whole_bases() {
        let ast = parse_c("float g[4], s;\nvoid put(int k) { g[k] = s; }\nput(2);").unwrap();
        let acc = access_set(&ast, ast.sequence_ids(NodeId(0))[2], None);
        assert_eq!(names(&acc.writes), ["g"]);
        assert_eq!(names(&acc.reads), ["s"]);
    }
}
