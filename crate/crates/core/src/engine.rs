//! Enumerating applicable matches, applying one, and the step history.

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::c::ast::*;
use crate::c::diff::diff_text;
use crate::c::printer::{print_c, print_expr, print_stmts};
use crate::c::visit::{replace, stmt_size, NodeRef, ReplaceError, Replacement};
use crate::lang::instantiate::{instantiate, Instance};
use crate::lang::matcher::{match_node, stmt_slot_eligible, Binding};
use crate::lang::rules::{Code, Pattern, RuleSet};
use crate::semantics::lower::for_each_stmt_mut;
use crate::semantics::predicates::{eval_condition, undecided_conjuncts, Ctx, Tri};
use crate::semantics::store::{PropertyStore, Warning};

/// Steps allowed per derivation unless configured otherwise.
pub const DEFAULT_BUDGET: usize = 1000;

/// Content digest of a program: SHA-256 of its printed form.
pub fn digest(ast: &AnnotatedAst) -> String {
    hex::encode(Sha256::digest(print_c(ast).as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Certainty {
    Proven,
    #[serde(rename = "Unknown-conditions")]
    UnknownConditions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Expr,
    Stmt,
    Seq,
}

/// An applicable (rule, position) pair together with its binding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Match {
    /// Index in the list returned by [`app_rules`].
    pub id: usize,
    pub rule: String,
    pub pos: NodeId,
    pub binding: Binding,
    pub certainty: Certainty,
    /// Which consequent, when the rule generates alternatives.
    pub alternative: usize,
    /// Conditions not known to hold; empty for proven matches.
    pub unknown_conditions: Vec<String>,
    /// Digest of the program the match was computed on.
    pub digest: String,
    pub kind: PatternKind,
    #[serde(skip)]
    pub instance: Instance,
}

impl Match {
    /// Printed replacement code.
    pub fn instance_code(&self) -> String {
        code_text(&self.instance.code)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("StaleMatch: match was computed on {expected}, program is now {found}")]
    StaleMatch { expected: String, found: String },
    #[error("UnsafeApplication: {rule} has undecided conditions: {}", conditions.join("; "))]
    UnsafeApplication {
        rule: String,
        conditions: Vec<String>,
    },
    #[error("EmptyHistory: nothing to undo")]
    EmptyHistory,
    #[error("cannot rewrite: {0}")]
    Replace(#[from] ReplaceError),
}

impl EngineError {
    pub fn kind(&self) -> &'static str {
        match self {
            EngineError::StaleMatch { .. } => "StaleMatch",
            EngineError::UnsafeApplication { .. } => "UnsafeApplication",
            EngineError::EmptyHistory => "EmptyHistory",
            EngineError::Replace(_) => "RewriteError",
        }
    }
}

fn node_text(n: NodeRef<'_>) -> String {
    match n {
        NodeRef::Unit(items) => print_stmts(items),
        NodeRef::Stmt(s) => print_stmts(std::slice::from_ref(s)),
        NodeRef::Expr(e) => print_expr(e),
    }
}

fn code_text(c: &Code) -> String {
    match c {
        Code::Expr(e) => print_expr(e),
        Code::Stmts(v) => print_stmts(v),
    }
}

/// Every applicable match, ordered by position, then rule order, then
/// binding order, then alternative. Matches whose rewrite would leave the
/// code unchanged are left out.
pub fn app_rules(ast: &AnnotatedAst, rules: &RuleSet) -> Vec<Match> {
    let d = digest(ast);
    let mut ctx = Ctx::new(ast, NodeId(0));
    let mut out = Vec::new();
    for v in ast.nodes() {
        for rule in &rules.rules {
            let kind = match (&rule.pattern, v.node) {
                (Pattern::Expr(_), NodeRef::Expr(_)) => PatternKind::Expr,
                (Pattern::Stmt(_), NodeRef::Stmt(_)) if stmt_slot_eligible(v.slot) => {
                    PatternKind::Stmt
                }
                (Pattern::Seq(_), n) if n.sequence().is_some() => PatternKind::Seq,
                _ => continue,
            };
            let bindings = match_node(&rule.pattern, v.node);
            if bindings.is_empty() {
                continue;
            }
            ctx.pos = v.id;
            let original = node_text(v.node);
            for b in bindings {
                let Ok(extended) = eval_condition(&rule.condition, &b, &ctx) else {
                    continue;
                };
                for (b, verdict) in extended {
                    let Ok(instances) = instantiate(rule, &b, &ctx) else {
                        continue;
                    };
                    let (certainty, unknown) = match verdict {
                        Tri::True => (Certainty::Proven, Vec::new()),
                        _ => (
                            Certainty::UnknownConditions,
                            undecided_conjuncts(&rule.condition, &b, &ctx),
                        ),
                    };
                    for (k, inst) in instances.into_iter().enumerate() {
                        if code_text(&inst.code) == original {
                            continue;
                        }
                        out.push(Match {
                            id: out.len(),
                            rule: rule.name.clone(),
                            pos: v.id,
                            binding: b.clone(),
                            certainty,
                            alternative: k,
                            unknown_conditions: unknown.clone(),
                            digest: d.clone(),
                            kind,
                            instance: inst,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Result of one rewrite.
#[derive(Debug, Clone)]
pub struct Applied {
    pub ast: AnnotatedAst,
    pub store: PropertyStore,
    pub warnings: Vec<Warning>,
    pub old_code: String,
    pub new_code: String,
}

fn collect_pragmas(stmts: &[Stmt], out: &mut Vec<Pragma>) {
    for s in stmts {
        out.extend(s.pragmas.iter().cloned());
        for c in s.child_stmts() {
            collect_pragmas(std::slice::from_ref(c), out);
        }
    }
}

/// Apply `m` to `ast`. Unknown-conditions matches need `force`.
pub fn trans(ast: &AnnotatedAst, m: &Match, force: bool) -> Result<Applied, EngineError> {
    let found = digest(ast);
    if found != m.digest {
        return Err(EngineError::StaleMatch {
            expected: m.digest.clone(),
            found,
        });
    }
    if m.certainty == Certainty::UnknownConditions && !force {
        return Err(EngineError::UnsafeApplication {
            rule: m.rule.clone(),
            conditions: m.unknown_conditions.clone(),
        });
    }
    let node = ast.node(m.pos).ok_or(ReplaceError::NoSuchNode(m.pos))?;
    let old_code = node_text(node);
    let mut old_pragmas = Vec::new();
    match node {
        NodeRef::Stmt(s) if m.kind == PatternKind::Stmt => {
            collect_pragmas(std::slice::from_ref(s), &mut old_pragmas)
        }
        n => {
            if let (PatternKind::Seq, Some(items)) = (m.kind, n.sequence()) {
                collect_pragmas(items, &mut old_pragmas);
            }
        }
    }
    let inst = &m.instance;
    let asserted: Vec<Pragma> = inst
        .asserts
        .iter()
        .map(|p| Pragma {
            prop: p.clone(),
            origin: Origin::RuleAssert,
        })
        .collect();
    let (rep, new_code, new_stmts) = match &inst.code {
        Code::Expr(e) => (Replacement::Expr(e.clone()), print_expr(e), Vec::new()),
        Code::Stmts(v) => {
            let mut v = v.clone();
            if let Some(a) = inst.anchor {
                if let Some(s) = v.get_mut(a) {
                    for p in &asserted {
                        if !s.pragmas.contains(p) {
                            s.pragmas.push(p.clone());
                        }
                    }
                }
            }
            let text = print_stmts(&v);
            let rep = if m.kind == PatternKind::Seq {
                Replacement::Sequence(v.clone())
            } else {
                Replacement::Stmts(v.clone())
            };
            (rep, text, v)
        }
    };
    let mut out = replace(ast, m.pos, rep)?;
    if let Code::Expr(_) = inst.code {
        if !asserted.is_empty() {
            if let Some(owner) = enclosing_stmt(ast, m.pos) {
                with_stmt_mut(&mut out, owner, |s| {
                    for p in &asserted {
                        if !s.pragmas.contains(p) {
                            s.pragmas.push(p.clone());
                        }
                    }
                });
            }
        }
    }
    let mut remaining = Vec::new();
    collect_pragmas(&new_stmts, &mut remaining);
    let mut warnings = Vec::new();
    for p in old_pragmas {
        match remaining.iter().position(|q| q == &p) {
            Some(k) => {
                remaining.remove(k);
            }
            None => warnings.push(Warning::dropped(&m.rule, &p)),
        }
    }
    let store = PropertyStore::from_ast(&out).with_warnings(warnings.clone());
    Ok(Applied {
        ast: out,
        store,
        warnings,
        old_code,
        new_code,
    })
}

/// Innermost statement strictly containing node `id`.
pub fn enclosing_stmt(ast: &AnnotatedAst, id: NodeId) -> Option<NodeId> {
    let mut best = None;
    for v in ast.nodes() {
        if v.id >= id {
            break;
        }
        if let NodeRef::Stmt(s) = v.node {
            if v.id.0 + stmt_size(s) > id.0 {
                best = Some(v.id);
            }
        }
    }
    best
}

/// Run `f` on the statement numbered `id`.
pub fn with_stmt_mut(ast: &mut AnnotatedAst, id: NodeId, f: impl FnOnce(&mut Stmt)) {
    let ids: Vec<NodeId> = ast
        .nodes()
        .into_iter()
        .filter(|v| matches!(v.node, NodeRef::Stmt(_)))
        .map(|v| v.id)
        .collect();
    let mut k = 0;
    let mut f = Some(f);
    for_each_stmt_mut(&mut ast.items, &mut |s| {
        if ids[k] == id {
            if let Some(f) = f.take() {
                f(s);
            }
        }
        k += 1;
    });
}

/// One applied rewrite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub index: usize,
    #[serde(rename = "match")]
    pub m: Match,
    pub overridden: bool,
    pub before_hash: String,
    pub after_hash: String,
    pub old_code: String,
    pub new_code: String,
    pub diff: String,
    pub warnings: Vec<Warning>,
}

/// Applied steps with the program after each one.
#[derive(Debug, Clone)]
pub struct History {
    initial: AnnotatedAst,
    states: Vec<AnnotatedAst>,
    steps: Vec<StepRecord>,
}

impl History {
    pub fn new(ast: AnnotatedAst) -> History {
        History {
            initial: ast,
            states: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn initial(&self) -> &AnnotatedAst {
        &self.initial
    }

    pub fn current(&self) -> &AnnotatedAst {
        self.states.last().unwrap_or(&self.initial)
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    /// Initial program followed by the program after each step.
    pub fn states(&self) -> Vec<&AnnotatedAst> {
        std::iter::once(&self.initial)
            .chain(self.states.iter())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Warnings of every applied step, in order.
    pub fn warnings(&self) -> Vec<Warning> {
        self.steps
            .iter()
            .flat_map(|s| s.warnings.iter().cloned())
            .collect()
    }

    pub fn apply(&mut self, m: &Match, force: bool) -> Result<&StepRecord, EngineError> {
        let before = self.current();
        let applied = trans(before, m, force)?;
        let before_text = print_c(before);
        let after_text = print_c(&applied.ast);
        let rec = StepRecord {
            index: self.steps.len(),
            m: m.clone(),
            overridden: m.certainty == Certainty::UnknownConditions,
            before_hash: digest(before),
            after_hash: digest(&applied.ast),
            old_code: applied.old_code,
            new_code: applied.new_code,
            diff: diff_text(&before_text, &after_text),
            warnings: applied.warnings,
        };
        self.states.push(applied.ast);
        self.steps.push(rec);
        Ok(self.steps.last().unwrap())
    }

    /// Drop the last step; returns the restored program.
    pub fn undo(&mut self) -> Result<&AnnotatedAst, EngineError> {
        if self.steps.is_empty() {
            return Err(EngineError::EmptyHistory);
        }
        self.steps.pop();
        self.states.pop();
        Ok(self.current())
    }
}
