//! Interactive sessions: one program, its match cache and its history.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::c::ast::*;
use crate::c::diff::diff_text;
use crate::c::printer::print_c;
use crate::c::visit::NodeRef;
use crate::engine::{app_rules, digest, trans, Certainty, EngineError, History, Match, StepRecord};
use crate::lang::rules::RuleSet;
use crate::semantics::store::{PropertyStore, Warning};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Active,
    Final,
    Error,
}

/// Derivation report written next to transformed code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub input_digest: String,
    pub output_digest: String,
    pub oracle: String,
    /// `final`, `budget_exhausted` or `active`.
    pub outcome: String,
    pub steps: Vec<StepRecord>,
    pub warnings: Vec<Warning>,
}

impl Report {
    pub fn new(
        history: &History,
        oracle: &str,
        outcome: &str,
        input_warnings: &[Warning],
    ) -> Report {
        let mut warnings = input_warnings.to_vec();
        warnings.extend(history.warnings());
        Report {
            input_digest: digest(history.initial()),
            output_digest: digest(history.current()),
            oracle: oracle.to_string(),
            outcome: outcome.to_string(),
            steps: history.steps().to_vec(),
            warnings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Export {
    pub code: String,
    pub report: Report,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PragmaView {
    pub node: NodeId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    pub pragma: String,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateView {
    pub id: String,
    pub digest: String,
    pub code: String,
    pub pragmas: Vec<PragmaView>,
    pub status: Status,
    pub steps: usize,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchView {
    #[serde(flatten)]
    pub m: Match,
    pub node_kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    pub before: String,
    pub after: String,
    /// Whole-program diff if this match were applied.
    pub preview: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApplyRequest {
    pub match_id: usize,
    #[serde(default, rename = "override")]
    pub force: bool,
    /// Digest the client saw; a mismatch is a stale match.
    #[serde(default)]
    pub digest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("UnknownMatch: no match {0} on the current program")]
    UnknownMatch(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl SessionError {
    pub fn kind(&self) -> &'static str {
        match self {
            SessionError::UnknownMatch(_) => "UnknownMatch",
            SessionError::Engine(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    rules: RuleSet,
    history: History,
    input_warnings: Vec<Warning>,
    matches: Vec<Match>,
    previews: HashMap<(String, usize), MatchView>,
    error: bool,
}

impl Session {
    pub fn new(
        id: impl Into<String>,
        ast: AnnotatedAst,
        rules: RuleSet,
        input_warnings: Vec<Warning>,
    ) -> Session {
        let matches = app_rules(&ast, &rules);
        Session {
            id: id.into(),
            rules,
            history: History::new(ast),
            input_warnings,
            matches,
            previews: HashMap::new(),
            error: false,
        }
    }

    pub fn current(&self) -> &AnnotatedAst {
        self.history.current()
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn store(&self) -> PropertyStore {
        PropertyStore::from_ast(self.current()).with_warnings(self.warnings())
    }

    pub fn warnings(&self) -> Vec<Warning> {
        let mut w = self.input_warnings.clone();
        w.extend(self.history.warnings());
        w
    }

    pub fn status(&self) -> Status {
        if self.error {
            Status::Error
        } else if self.matches.is_empty() {
            Status::Final
        } else {
            Status::Active
        }
    }

    pub fn matches(&self) -> &[Match] {
        &self.matches
    }

    pub fn state(&self) -> StateView {
        let ast = self.current();
        let pragmas = PropertyStore::from_ast(ast)
            .facts()
            .map(|(node, p)| PragmaView {
                node,
                line: ast.line_of(node),
                pragma: p.prop.to_pragma(),
                origin: p.origin,
            })
            .collect();
        StateView {
            id: self.id.clone(),
            digest: digest(ast),
            code: print_c(ast),
            pragmas,
            status: self.status(),
            steps: self.history.len(),
            warnings: self.warnings(),
        }
    }

    fn view(&self, m: &Match) -> MatchView {
        let ast = self.current();
        let v = ast.nodes().into_iter().find(|v| v.id == m.pos);
        let node_kind = v.as_ref().map_or("", |v| v.node.kind_name()).to_string();
        let before = match v.map(|v| v.node) {
            Some(NodeRef::Expr(e)) => crate::c::printer::print_expr(e),
            Some(NodeRef::Stmt(s)) => crate::c::printer::print_stmt(s),
            Some(NodeRef::Unit(items)) => crate::c::printer::print_stmts(items),
            None => String::new(),
        };
        let preview = match trans(ast, m, true) {
            Ok(a) => diff_text(&print_c(ast), &print_c(&a.ast)),
            Err(e) => format!("cannot preview: {e}"),
        };
        MatchView {
            m: m.clone(),
            node_kind,
            line: ast.line_of(m.pos),
            before,
            after: m.instance_code(),
            preview,
        }
    }

    /// Every match, proven or not, with its preview.
    pub fn match_views(&mut self) -> Vec<MatchView> {
        let d = digest(self.current());
        let mut out = Vec::new();
        for m in self.matches.clone() {
            let key = (d.clone(), m.id);
            if !self.previews.contains_key(&key) {
                let v = self.view(&m);
                self.previews.insert(key.clone(), v);
            }
            out.push(self.previews[&key].clone());
        }
        out
    }

    pub fn apply(&mut self, req: &ApplyRequest) -> Result<StepRecord, SessionError> {
        let now = digest(self.current());
        if let Some(seen) = &req.digest {
            if *seen != now {
                return Err(EngineError::StaleMatch {
                    expected: seen.clone(),
                    found: now,
                }
                .into());
            }
        }
        let m = self
            .matches
            .get(req.match_id)
            .cloned()
            .ok_or(SessionError::UnknownMatch(req.match_id))?;
        let rec = match self
            .history
            .apply(&m, req.force && m.certainty == Certainty::UnknownConditions)
        {
            Ok(r) => r.clone(),
            Err(e @ EngineError::Replace(_)) => {
                self.error = true;
                return Err(e.into());
            }
            Err(e) => return Err(e.into()),
        };
        self.refresh();
        Ok(rec)
    }

    pub fn undo(&mut self) -> Result<StateView, SessionError> {
        self.history.undo()?;
        self.error = false;
        self.refresh();
        Ok(self.state())
    }

    fn refresh(&mut self) {
        self.matches = app_rules(self.current(), &self.rules);
    }

    pub fn export(&self) -> Export {
        let outcome = match self.status() {
            Status::Final => "final",
            Status::Active => "active",
            Status::Error => "error",
        };
        Export {
            code: print_c(self.current()),
            report: Report::new(&self.history, "interactive", outcome, &self.input_warnings),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c::parser::parse_c;
    use crate::lang::rules::default_rules;

    const STEP0: &str = "float c[N], v[N], a, b;\nfor (int i = 0; i < N; i++)\n    c[i] = a*v[i];\nfor (int i = 0; i < N; i++)\n    c[i] += b*v[i];\n";

    fn session(src: &str) -> Session {
        Session::new(
            "s",
            parse_c(src).unwrap(),
            default_rules().unwrap(),
            Vec::new(),
        )
    }

    #[test]
    fn fusion_then_undo() {
        let mut s = session(STEP0);
        let start = s.state();
        let id = s
            .matches()
            .iter()
            .find(|m| m.rule == "For-LoopFusion")
            .unwrap()
            .id;
        s.apply(&ApplyRequest {
            match_id: id,
            force: false,
            digest: Some(start.digest.clone()),
        })
        .unwrap();
        assert_eq!(s.state().steps, 1);
        assert_eq!(s.undo().unwrap().digest, start.digest);
        assert_eq!(s.undo().unwrap_err().kind(), "EmptyHistory");
    }

    #[test]
    fn stale_and_unknown() {
        let mut s = session(STEP0);
        let e = s
            .apply(&ApplyRequest {
                match_id: 0,
                force: false,
                digest: Some("x".into()),
            })
            .unwrap_err();
        assert_eq!(e.kind(), "StaleMatch");
        let e = s
            .apply(&ApplyRequest {
                match_id: 999,
                force: false,
                digest: None,
            })
            .unwrap_err();
        assert_eq!(e.kind(), "UnknownMatch");
    }

    #[test]
    fn empty_program_is_final() {
        let mut s = session("");
        assert_eq!(s.status(), Status::Final);
        assert!(s.match_views().is_empty());
        assert_eq!(s.export().code, "");
    }

    #[test]
    fn previews_show_change() {
        let mut s = session(STEP0);
        let v = s.match_views();
        assert!(!v.is_empty());
        assert!(v
            .iter()
            .all(|v| v.preview.contains('+') || v.preview.contains('-')));
    }
}
