//! Syntax tree for the supported C subset.
//!
//! The same types carry rule templates: metavariables (`cexpr`, `cstmt`,
//! `cstmts`), `bin_oper`, `subs` and `fresh_var` only appear in trees built by
//! the parser in template mode and are rejected by the evaluator.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::property::Property;

/// Preorder position of a node in an [`AnnotatedAst`]. The translation unit
/// itself is always `NodeId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 13] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Rem,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        BinOp::ALL.iter().copied().find(|op| op.symbol() == s)
    }

    /// Binding strength, higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem
        )
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

impl UnOp {
    pub fn is_increment(self) -> bool {
        matches!(
            self,
            UnOp::PreInc | UnOp::PreDec | UnOp::PostInc | UnOp::PostDec
        )
    }
}

/// Operator position of a `bin_oper` template or an operator property.
/// `Name` is either an operator metavariable (inside rules) or the name of a
/// C function playing the role of an operator (inside pragmas).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpSlot {
    Op(BinOp),
    Name(String),
}

impl fmt::Display for OpSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpSlot::Op(op) => f.write_str(op.symbol()),
            OpSlot::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    /// Float literal, kept as written.
    Float(String),
    Var(String),
    /// `base[i]` or `base[i][j]`.
    Index(String, Vec<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Assign(Box<Expr>, Box<Expr>),
    AugAssign(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    /// `cexpr(name)`
    Meta(String),
    /// `bin_oper(op, l, r)`
    BinOper(OpSlot, Box<Expr>, Box<Expr>),
    /// `subs(target, from, to)` inside a generate template.
    Subs(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `fresh_var(cexpr(name))`
    FreshVar(String),
}

impl Eq for Expr {}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    /// Direct subexpressions, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Int(_) | Expr::Float(_) | Expr::Var(_) | Expr::Meta(_) | Expr::FreshVar(_) => {
                vec![]
            }
            Expr::Index(_, idx) | Expr::Call(_, idx) => idx.iter().collect(),
            Expr::Unary(_, e) => vec![e],
            Expr::Binary(_, l, r)
            | Expr::Assign(l, r)
            | Expr::AugAssign(_, l, r)
            | Expr::BinOper(_, l, r) => vec![l, r],
            Expr::Subs(a, b, c) => vec![a, b, c],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Int(_) | Expr::Float(_) | Expr::Var(_) | Expr::Meta(_) | Expr::FreshVar(_) => {
                vec![]
            }
            Expr::Index(_, idx) | Expr::Call(_, idx) => idx.iter_mut().collect(),
            Expr::Unary(_, e) => vec![e],
            Expr::Binary(_, l, r)
            | Expr::Assign(l, r)
            | Expr::AugAssign(_, l, r)
            | Expr::BinOper(_, l, r) => vec![l, r],
            Expr::Subs(a, b, c) => vec![a, b, c],
        }
    }

    /// Number of expression nodes in this subtree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Preorder list of every subexpression, including `self`.
    pub fn subexpressions(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            out.push(e);
            for c in e.children() {
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }

    pub fn contains(&self, needle: &Expr) -> bool {
        self == needle || self.children().iter().any(|c| c.contains(needle))
    }

    /// Identifiers mentioned anywhere in the expression, including array and
    /// function names.
    pub fn collect_identifiers(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Expr::Var(n) | Expr::FreshVar(n) => {
                out.insert(n.clone());
            }
            Expr::Index(n, _) | Expr::Call(n, _) => {
                out.insert(n.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.collect_identifiers(out);
        }
    }

    pub fn is_template(&self) -> bool {
        matches!(
            self,
            Expr::Meta(_) | Expr::BinOper(..) | Expr::Subs(..) | Expr::FreshVar(_)
        ) || self.children().iter().any(|c| c.is_template())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CType {
    Int,
    Float,
    Double,
    Void,
}

impl CType {
    pub fn keyword(self) -> &'static str {
        match self {
            CType::Int => "int",
            CType::Float => "float",
            CType::Double => "double",
            CType::Void => "void",
        }
    }

    pub fn from_keyword(s: &str) -> Option<CType> {
        match s {
            "int" => Some(CType::Int),
            "float" => Some(CType::Float),
            "double" => Some(CType::Double),
            "void" => Some(CType::Void),
            _ => None,
        }
    }

    pub fn is_floating(self) -> bool {
        matches!(self, CType::Float | CType::Double)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Declarator {
    pub name: String,
    /// Array extents, possibly symbolic. Empty for scalars.
    pub dims: Vec<Expr>,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decl {
    pub ty: CType,
    pub declarators: Vec<Declarator>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Param {
    pub ty: CType,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FuncDef {
    pub ret: CType,
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
}

/// Where a pragma fact came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    User,
    Lowered,
    ExternalTool,
    RuleAssert,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::User => "user",
            Origin::Lowered => "lowered",
            Origin::ExternalTool => "external-tool",
            Origin::RuleAssert => "rule-assert",
        })
    }
}

/// A property attached to a statement. Equality looks at the property only;
/// the origin is bookkeeping and does not survive printing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pragma {
    pub prop: Property,
    pub origin: Origin,
}

impl Pragma {
    pub fn user(prop: Property) -> Pragma {
        Pragma {
            prop,
            origin: Origin::User,
        }
    }
}

impl PartialEq for Pragma {
    fn eq(&self, other: &Self) -> bool {
        self.prop == other.prop
    }
}

impl Eq for Pragma {}

impl std::hash::Hash for Pragma {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.prop.hash(state)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stmt {
    pub pragmas: Vec<Pragma>,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StmtKind {
    Decl(Decl),
    Expr(Expr),
    For {
        init: Box<Stmt>,
        cond: Expr,
        step: Expr,
        body: Box<Stmt>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    Block(Vec<Stmt>),
    Return(Option<Expr>),
    Func(FuncDef),
    /// `cstmt(name)`
    Meta(String),
    /// `cstmts(name)`
    MetaSeq(String),
    /// `subs(cstmt(s) | cstmts(s), from, to);` inside a generate template.
    Subs {
        target: Box<Stmt>,
        from: Expr,
        to: Expr,
    },
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt {
            pragmas: Vec::new(),
            kind,
        }
    }

    pub fn expr(e: Expr) -> Stmt {
        Stmt::new(StmtKind::Expr(e))
    }

    pub fn block(items: Vec<Stmt>) -> Stmt {
        Stmt::new(StmtKind::Block(items))
    }

    /// Copy without any pragmas, recursively.
    pub fn without_pragmas(&self) -> Stmt {
        let mut s = self.clone();
        s.strip_pragmas();
        s
    }

    pub fn strip_pragmas(&mut self) {
        self.pragmas.clear();
        self.for_each_child_stmt_mut(&mut |c| c.strip_pragmas());
    }

    /// Code equality ignoring attached pragmas.
    pub fn same_code(&self, other: &Stmt) -> bool {
        self.without_pragmas() == other.without_pragmas()
    }

    pub fn for_each_child_stmt_mut(&mut self, f: &mut dyn FnMut(&mut Stmt)) {
        match &mut self.kind {
            StmtKind::For { init, body, .. } => {
                f(init);
                f(body);
            }
            StmtKind::While { body, .. } => f(body),
            StmtKind::If { then, els, .. } => {
                f(then);
                if let Some(e) = els {
                    f(e);
                }
            }
            StmtKind::Block(items) => items.iter_mut().for_each(|s| f(s)),
            StmtKind::Func(func) => func.body.iter_mut().for_each(|s| f(s)),
            StmtKind::Subs { target, .. } => f(target),
            _ => {}
        }
    }

    /// Expressions owned directly by this statement (not by nested statements).
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Decl(d) => d
                .declarators
                .iter()
                .flat_map(|dc| dc.dims.iter().chain(dc.init.iter()))
                .collect(),
            StmtKind::Expr(e) => vec![e],
            StmtKind::For { cond, step, .. } => vec![cond, step],
            StmtKind::While { cond, .. } | StmtKind::If { cond, .. } => vec![cond],
            StmtKind::Return(e) => e.iter().collect(),
            StmtKind::Subs { from, to, .. } => vec![from, to],
            _ => vec![],
        }
    }

    /// Every identifier used in this statement, including declared names.
    pub fn collect_identifiers(&self, out: &mut std::collections::BTreeSet<String>) {
        match &self.kind {
            StmtKind::Decl(d) => {
                for dc in &d.declarators {
                    out.insert(dc.name.clone());
                }
            }
            StmtKind::Func(func) => {
                out.insert(func.name.clone());
                for p in &func.params {
                    out.insert(p.name.clone());
                }
            }
            _ => {}
        }
        for e in self.own_exprs() {
            e.collect_identifiers(out);
        }
        for c in self.child_stmts() {
            c.collect_identifiers(out);
        }
    }

    /// Directly nested statements, in source order.
    pub fn child_stmts(&self) -> Vec<&Stmt> {
        match &self.kind {
            StmtKind::For { init, body, .. } => vec![init, body],
            StmtKind::While { body, .. } => vec![body],
            StmtKind::If { then, els, .. } => {
                let mut v: Vec<&Stmt> = vec![then];
                v.extend(els.iter().map(|b| &**b));
                v
            }
            StmtKind::Block(items) => items.iter().collect(),
            StmtKind::Func(func) => func.body.iter().collect(),
            StmtKind::Subs { target, .. } => vec![target],
            _ => vec![],
        }
    }

    /// Statements of a loop or branch body, seen as a sequence: a block
    /// yields its items, any other statement yields itself.
    pub fn as_body(&self) -> &[Stmt] {
        match &self.kind {
            StmtKind::Block(items) => items,
            _ => std::slice::from_ref(self),
        }
    }
}

/// Parsed program: the translation unit plus the source line of every
/// statement that came from text (used to resolve sidecar anchors).
///
/// Equality is structural over the tree, attached properties included.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnnotatedAst {
    pub items: Vec<Stmt>,
    #[serde(skip)]
    pub(crate) lines: BTreeMap<NodeId, u32>,
}

impl PartialEq for AnnotatedAst {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
    }
}

impl Eq for AnnotatedAst {}

impl AnnotatedAst {
    pub fn new(items: Vec<Stmt>) -> AnnotatedAst {
        AnnotatedAst {
            items,
            lines: BTreeMap::new(),
        }
    }

    /// Source line of the statement at `id`, when the tree came from text.
    pub fn line_of(&self, id: NodeId) -> Option<u32> {
        self.lines.get(&id).copied()
    }

    /// Statement starting on `line`, outermost first.
    pub fn stmt_at_line(&self, line: u32) -> Option<NodeId> {
        self.lines
            .iter()
            .find(|(_, l)| **l == line)
            .map(|(id, _)| *id)
    }

    /// Every identifier appearing anywhere in the program.
    pub fn identifiers(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        for s in &self.items {
            s.collect_identifiers(&mut out);
        }
        out
    }

    /// Same tree with all pragmas removed.
    pub fn without_pragmas(&self) -> AnnotatedAst {
        AnnotatedAst::new(self.items.iter().map(Stmt::without_pragmas).collect())
    }
}
