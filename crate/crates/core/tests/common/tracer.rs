//! Dynamic read/write sets: run a fragment on its own from a given state
//! and record which global cells it reads and writes.

use std::collections::BTreeSet;

use stml::c::ast::*;
use stml::c::eval::{evaluate_with, Access, AccessKind, Env, EvalConfig, Observer};
use stml::c::parser::parse_c;
use stml::c::printer::{print_expr, print_stmts};

pub type Cell = (String, Vec<i64>);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub reads: BTreeSet<Cell>,
    pub writes: BTreeSet<Cell>,
}

impl Trace {
    pub fn touched(&self) -> BTreeSet<Cell> {
        self.reads.union(&self.writes).cloned().collect()
    }
}

impl Observer for Trace {
    fn access(&mut self, a: &Access) {
        if a.depth != 0 {
            return;
        }
        let cell = (a.base.clone(), a.indices.clone());
        match a.kind {
            AccessKind::Read => self.reads.insert(cell),
            AccessKind::Write => self.writes.insert(cell),
        };
    }
}

#[derive(Debug, Clone)]
pub enum Frag {
    Stmt(Stmt),
    Expr(Expr),
}

/// Standalone program running the fragment inside a block, after the
/// function definitions of its home program.
pub fn harness(funcs: &[Stmt], f: &Frag) -> Option<AnnotatedAst> {
    let body = match f {
        Frag::Stmt(s) => print_stmts(std::slice::from_ref(s)),
        Frag::Expr(e) => format!("{};\n", print_expr(e)),
    };
    parse_c(&format!("{}{{\n{body}}}\n", print_stmts(funcs))).ok()
}

/// Accesses to globals, or `None` if the run fails.
pub fn trace(prog: &AnnotatedAst, env: &Env) -> Option<Trace> {
    let mut t = Trace::default();
    evaluate_with(
        prog,
        env,
        EvalConfig {
            step_budget: 50_000,
        },
        Some(&mut t),
    )
    .ok()?;
    Some(t)
}
