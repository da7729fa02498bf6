//! Preorder numbering of tree nodes and in-place replacement by [`NodeId`].

use super::ast::{AnnotatedAst, Expr, NodeId, Stmt, StmtKind};

/// Borrowed view of one numbered node.
#[derive(Debug, Clone, Copy)]
pub enum NodeRef<'a> {
    Unit(&'a [Stmt]),
    Stmt(&'a Stmt),
    Expr(&'a Expr),
}

/// Syntactic role of a statement node, which decides what a rewrite may put
/// in its place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StmtSlot {
    /// Element of the translation unit, a block or a function body.
    Item,
    /// Body of a loop or branch of an `if`.
    Body,
    /// First clause of a `for` header.
    ForInit,
}

#[derive(Debug, Clone, Copy)]
pub struct Visited<'a> {
    pub id: NodeId,
    pub node: NodeRef<'a>,
    pub slot: Option<StmtSlot>,
}

impl<'a> NodeRef<'a> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            NodeRef::Unit(_) => "TranslationUnit",
            NodeRef::Stmt(s) => match &s.kind {
                StmtKind::Decl(_) => "Decl",
                StmtKind::Expr(_) => "ExprStmt",
                StmtKind::For { .. } => "For",
                StmtKind::While { .. } => "While",
                StmtKind::If { .. } => "If",
                StmtKind::Block(_) => "Block",
                StmtKind::Return(_) => "Return",
                StmtKind::Func(_) => "FuncDef",
                StmtKind::Meta(_) => "cstmt",
                StmtKind::MetaSeq(_) => "cstmts",
                StmtKind::Subs { .. } => "subs",
            },
            NodeRef::Expr(e) => match e {
                Expr::Int(_) => "IntLit",
                Expr::Float(_) => "FloatLit",
                Expr::Var(_) => "Var",
                Expr::Index(..) => "Index",
                Expr::Unary(..) => "UnaryOp",
                Expr::Binary(..) => "BinOp",
                Expr::Assign(..) => "Assign",
                Expr::AugAssign(..) => "AugAssign",
                Expr::Call(..) => "Call",
                Expr::Meta(_) => "cexpr",
                Expr::BinOper(..) => "bin_oper",
                Expr::Subs(..) => "subs",
                Expr::FreshVar(_) => "fresh_var",
            },
        }
    }

    /// Statements directly held as a sequence by this node (translation
    /// unit items, block items or a function body).
    pub fn sequence(&self) -> Option<&'a [Stmt]> {
        match self {
            NodeRef::Unit(items) => Some(items),
            NodeRef::Stmt(Stmt {
                kind: StmtKind::Block(items),
                ..
            }) => Some(items),
            NodeRef::Stmt(Stmt {
                kind: StmtKind::Func(f),
                ..
            }) => Some(&f.body),
            _ => None,
        }
    }
}

/// Number of numbered nodes in a statement subtree.
pub fn stmt_size(s: &Stmt) -> usize {
    1 + s.own_exprs().iter().map(|e| e.size()).sum::<usize>()
        + s.child_stmts().iter().map(|c| stmt_size(c)).sum::<usize>()
}

/// Visit every node in preorder. Within a statement, header expressions come
/// before nested statements except for `for`, whose clauses are numbered in
/// source order: init, cond, step, body.
pub fn walk<'a>(ast: &'a AnnotatedAst, f: &mut dyn FnMut(Visited<'a>)) {
    let mut next = 0usize;
    f(Visited {
        id: NodeId(next),
        node: NodeRef::Unit(&ast.items),
        slot: None,
    });
    next += 1;
    for s in &ast.items {
        walk_stmt(s, StmtSlot::Item, &mut next, f);
    }
}

fn walk_stmt<'a>(s: &'a Stmt, slot: StmtSlot, next: &mut usize, f: &mut dyn FnMut(Visited<'a>)) {
    f(Visited {
        id: NodeId(*next),
        node: NodeRef::Stmt(s),
        slot: Some(slot),
    });
    *next += 1;
    match &s.kind {
        StmtKind::For {
            init,
            cond,
            step,
            body,
        } => {
            walk_stmt(init, StmtSlot::ForInit, next, f);
            walk_expr(cond, next, f);
            walk_expr(step, next, f);
            walk_stmt(body, StmtSlot::Body, next, f);
        }
        StmtKind::While { cond, body } => {
            walk_expr(cond, next, f);
            walk_stmt(body, StmtSlot::Body, next, f);
        }
        StmtKind::If { cond, then, els } => {
            walk_expr(cond, next, f);
            walk_stmt(then, StmtSlot::Body, next, f);
            if let Some(e) = els {
                walk_stmt(e, StmtSlot::Body, next, f);
            }
        }
        StmtKind::Block(items) => {
            for c in items {
                walk_stmt(c, StmtSlot::Item, next, f);
            }
        }
        StmtKind::Func(func) => {
            for c in &func.body {
                walk_stmt(c, StmtSlot::Item, next, f);
            }
        }
        StmtKind::Subs { target, from, to } => {
            walk_stmt(target, StmtSlot::Item, next, f);
            walk_expr(from, next, f);
            walk_expr(to, next, f);
        }
        _ => {
            for e in s.own_exprs() {
                walk_expr(e, next, f);
            }
        }
    }
}

fn walk_expr<'a>(e: &'a Expr, next: &mut usize, f: &mut dyn FnMut(Visited<'a>)) {
    f(Visited {
        id: NodeId(*next),
        node: NodeRef::Expr(e),
        slot: None,
    });
    *next += 1;
    for c in e.children() {
        walk_expr(c, next, f);
    }
}

impl AnnotatedAst {
    /// Every node with its id, in preorder.
    pub fn nodes(&self) -> Vec<Visited<'_>> {
        let mut out = Vec::new();
        walk(self, &mut |v| out.push(v));
        out
    }

    pub fn node(&self, id: NodeId) -> Option<NodeRef<'_>> {
        let mut found = None;
        walk(self, &mut |v| {
            if v.id == id {
                found = Some(v.node);
            }
        });
        found
    }

    pub fn node_count(&self) -> usize {
        1 + self.items.iter().map(stmt_size).sum::<usize>()
    }

    /// Ids of the statements inside `container` (the unit or a block).
    pub fn sequence_ids(&self, container: NodeId) -> Vec<NodeId> {
        let Some(seq) = self.node(container).and_then(|n| n.sequence()) else {
            return Vec::new();
        };
        let mut next = container.0 + 1;
        seq.iter()
            .map(|s| {
                let id = NodeId(next);
                next += stmt_size(s);
                id
            })
            .collect()
    }
}

/// What goes in place of a node.
#[derive(Debug, Clone)]
pub enum Replacement {
    Expr(Expr),
    /// Statements replacing one statement. Spliced into item sequences;
    /// wrapped in a block when the slot holds exactly one statement.
    Stmts(Vec<Stmt>),
    /// New contents of a sequence container (unit or block).
    Sequence(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplaceError {
    #[error("no node {0}")]
    NoSuchNode(NodeId),
    #[error("node {0} cannot be replaced by {1}")]
    KindMismatch(NodeId, &'static str),
}

/// Replace the node numbered `id` in a copy of `ast`.
pub fn replace(
    ast: &AnnotatedAst,
    id: NodeId,
    rep: Replacement,
) -> Result<AnnotatedAst, ReplaceError> {
    let mut out = AnnotatedAst::new(ast.items.clone());
    let mut r = Rewriter {
        target: id.0,
        next: 0,
        rep: Some(rep),
        err: None,
    };
    if id.0 == 0 {
        match r.rep.take() {
            Some(Replacement::Sequence(items)) => {
                out.items = items;
                return Ok(out);
            }
            _ => return Err(ReplaceError::KindMismatch(id, "a non-sequence")),
        }
    }
    r.next = 1;
    r.items(&mut out.items);
    if let Some(e) = r.err {
        return Err(e);
    }
    if r.rep.is_some() {
        return Err(ReplaceError::NoSuchNode(id));
    }
    Ok(out)
}

struct Rewriter {
    target: usize,
    next: usize,
    rep: Option<Replacement>,
    err: Option<ReplaceError>,
}

impl Rewriter {
    fn done(&self) -> bool {
        self.rep.is_none() || self.err.is_some()
    }

    fn items(&mut self, items: &mut Vec<Stmt>) {
        let mut i = 0;
        while i < items.len() && !self.done() {
            if self.next == self.target {
                match self.rep.take() {
                    Some(Replacement::Stmts(new)) => {
                        let n = new.len();
                        items.splice(i..i + 1, new);
                        i += n;
                        continue;
                    }
                    Some(Replacement::Sequence(new)) => {
                        self.set_sequence(&mut items[i], new);
                        return;
                    }
                    other => {
                        self.rep = other;
                        self.err = Some(ReplaceError::KindMismatch(
                            NodeId(self.target),
                            "an expression",
                        ));
                        return;
                    }
                }
            }
            if self.next + stmt_size(&items[i]) <= self.target {
                self.next += stmt_size(&items[i]);
            } else {
                self.stmt(&mut items[i]);
            }
            i += 1;
        }
    }

    fn set_sequence(&mut self, s: &mut Stmt, new: Vec<Stmt>) {
        match &mut s.kind {
            StmtKind::Block(inner) => *inner = new,
            StmtKind::Func(f) => f.body = new,
            _ => {
                self.err = Some(ReplaceError::KindMismatch(
                    NodeId(self.target),
                    "a sequence",
                ))
            }
        }
    }

    fn single(&mut self, s: &mut Stmt, slot: StmtSlot) {
        if self.done() {
            return;
        }
        if self.next == self.target {
            match self.rep.take() {
                Some(Replacement::Stmts(mut new))
                    if slot != StmtSlot::ForInit || new.len() == 1 =>
                {
                    *s = if new.len() == 1 {
                        new.remove(0)
                    } else {
                        Stmt::block(new)
                    };
                }
                Some(Replacement::Sequence(new)) => self.set_sequence(s, new),
                _ => {
                    self.err = Some(ReplaceError::KindMismatch(
                        NodeId(self.target),
                        "this replacement",
                    ));
                }
            }
            return;
        }
        if self.next + stmt_size(s) <= self.target {
            self.next += stmt_size(s);
            return;
        }
        self.stmt(s);
    }

    fn stmt(&mut self, s: &mut Stmt) {
        // s contains the target strictly below its own node
        self.next += 1;
        match &mut s.kind {
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                self.single(init, StmtSlot::ForInit);
                self.expr(cond);
                self.expr(step);
                self.single(body, StmtSlot::Body);
            }
            StmtKind::While { cond, body } => {
                self.expr(cond);
                self.single(body, StmtSlot::Body);
            }
            StmtKind::If { cond, then, els } => {
                self.expr(cond);
                self.single(then, StmtSlot::Body);
                if let Some(e) = els {
                    self.single(e, StmtSlot::Body);
                }
            }
            StmtKind::Block(items) => self.items(items),
            StmtKind::Func(func) => self.items(&mut func.body),
            StmtKind::Subs { target, from, to } => {
                self.single(target, StmtSlot::Item);
                self.expr(from);
                self.expr(to);
            }
            StmtKind::Decl(d) => {
                for dc in &mut d.declarators {
                    for e in dc.dims.iter_mut().chain(dc.init.iter_mut()) {
                        self.expr(e);
                    }
                }
            }
            StmtKind::Expr(e) => self.expr(e),
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e);
                }
            }
            StmtKind::Meta(_) | StmtKind::MetaSeq(_) => {}
        }
    }

    fn expr(&mut self, e: &mut Expr) {
        if self.done() {
            return;
        }
        let size = e.size();
        if self.next + size <= self.target {
            self.next += size;
            return;
        }
        if self.next == self.target {
            match self.rep.take() {
                Some(Replacement::Expr(new)) => *e = new,
                other => {
                    self.rep = other;
                    self.err = Some(ReplaceError::KindMismatch(
                        NodeId(self.target),
                        "statements",
                    ));
                }
            }
            return;
        }
        self.next += 1;
        for c in e.children_mut() {
            self.expr(c);
            if self.done() {
                return;
            }
        }
    }
}
