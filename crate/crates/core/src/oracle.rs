//! Rule selection: the oracle protocol, built-in oracles and the driver.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::c::ast::*;
use crate::c::printer::print_c;
use crate::c::visit::NodeRef;
use crate::engine::{app_rules, digest, trans, Certainty, EngineError, History, Match, StepRecord};
use crate::lang::rules::RuleSet;

/// Score of a program; lower is better.
pub type MetricFn = fn(&AnnotatedAst) -> f64;

/// `10 * loops + statements + arithmetic operators`. Blocks and `for`
/// headers do not count as statements; compound assignments do not count
/// as operators.
pub fn default_metric(ast: &AnnotatedAst) -> f64 {
    let mut loops = 0;
    let mut stmts = 0;
    let mut ops = 0;
    for v in ast.nodes() {
        match v.node {
            NodeRef::Stmt(s) => match &s.kind {
                StmtKind::Block(_) => {}
                _ if v.slot == Some(crate::c::visit::StmtSlot::ForInit) => {}
                StmtKind::For { .. } | StmtKind::While { .. } => {
                    loops += 1;
                    stmts += 1;
                }
                _ => stmts += 1,
            },
            NodeRef::Expr(Expr::Binary(op, ..)) if op.is_arithmetic() => ops += 1,
            _ => {}
        }
    }
    (10 * loops + stmts + ops) as f64
}

/// A possible next program with the rules applicable to it.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub ast: AnnotatedAst,
    /// Names of rules with a proven match on `ast`, in rule order.
    pub rules: Vec<String>,
    /// Rule that produced this candidate.
    pub rule: String,
    /// Match that produced this candidate, when known locally.
    pub origin: Option<Match>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleDecision {
    pub chosen: usize,
    pub next_rule: Option<String>,
}

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("NoViableCandidate: no candidate can be continued")]
    NoViableCandidate,
    #[error("ScriptMismatch: step {step} expects {rule}, which has no proven match here")]
    ScriptMismatch { step: usize, rule: String },
    #[error("BudgetExceeded after {} steps", .0.history.len())]
    BudgetExceeded(Box<Derivation>),
    #[error("OracleFailure: {0}")]
    External(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl OracleError {
    pub fn kind(&self) -> &'static str {
        match self {
            OracleError::NoViableCandidate => "NoViableCandidate",
            OracleError::ScriptMismatch { .. } => "ScriptMismatch",
            OracleError::BudgetExceeded(_) => "BudgetExceeded",
            OracleError::External(_) => "OracleFailure",
            OracleError::Engine(e) => e.kind(),
        }
    }
}

pub trait Oracle {
    fn name(&self) -> String;
    fn select_rule(
        &mut self,
        rules: &RuleSet,
        candidates: &[Candidate],
    ) -> Result<OracleDecision, OracleError>;
    fn is_final(&mut self, rules: &RuleSet, ast: &AnnotatedAst) -> Result<bool, OracleError>;
}

/// Proven matches of the named rules (all rules when `only` is `None`).
pub fn proven_matches(ast: &AnnotatedAst, rules: &RuleSet, only: Option<&[String]>) -> Vec<Match> {
    app_rules(ast, rules)
        .into_iter()
        .filter(|m| {
            m.certainty == Certainty::Proven && only.is_none_or(|o| o.iter().any(|x| *x == m.rule))
        })
        .collect()
}

fn rule_names(ms: &[Match]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for m in ms {
        if !out.contains(&m.rule) {
            out.push(m.rule.clone());
        }
    }
    out
}

/// Proven successors of `ast`, as candidates.
pub fn candidates(
    ast: &AnnotatedAst,
    rules: &RuleSet,
    only: Option<&[String]>,
) -> Result<Vec<Candidate>, OracleError> {
    proven_matches(ast, rules, only)
        .into_iter()
        .map(|m| {
            let next = trans(ast, &m, false)?.ast;
            let applicable = rule_names(&proven_matches(&next, rules, None));
            Ok(Candidate {
                ast: next,
                rules: applicable,
                rule: m.rule.clone(),
                origin: Some(m),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// scripted

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptStep {
    pub rule: String,
    /// 1-based rank among the rule's candidates, in match order.
    pub ordinal: usize,
}

/// One rule name per line, optionally followed by `@<ordinal>`. Blank lines
/// and `#` comments are skipped.
pub fn parse_script(text: &str) -> Result<Vec<ScriptStep>, String> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (rule, ordinal) = match l.split_once('@') {
            Some((r, o)) => {
                let o: usize = o
                    .trim()
                    .parse()
                    .map_err(|_| format!("line {}: bad ordinal `{o}`", k + 1))?;
                if o == 0 {
                    return Err(format!("line {}: ordinals start at 1", k + 1));
                }
                (r.trim(), o)
            }
            None => (l, 1),
        };
        out.push(ScriptStep {
            rule: rule.to_string(),
            ordinal,
        });
    }
    Ok(out)
}

/// Replays a fixed rule sequence.
#[derive(Debug, Clone)]
pub struct ScriptedOracle {
    pub script: Vec<ScriptStep>,
    pub step: usize,
}

impl ScriptedOracle {
    pub fn new(script: Vec<ScriptStep>) -> Self {
        ScriptedOracle { script, step: 0 }
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Self {
        Self::new(
            names
                .iter()
                .map(|n| ScriptStep {
                    rule: n.as_ref().to_string(),
                    ordinal: 1,
                })
                .collect(),
        )
    }
}

impl Oracle for ScriptedOracle {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn select_rule(
        &mut self,
        _rules: &RuleSet,
        candidates: &[Candidate],
    ) -> Result<OracleDecision, OracleError> {
        let Some(want) = self.script.get(self.step) else {
            return Err(OracleError::NoViableCandidate);
        };
        let chosen = candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| c.rule == want.rule)
            .nth(want.ordinal - 1)
            .map(|(i, _)| i)
            .ok_or_else(|| OracleError::ScriptMismatch {
                step: self.step,
                rule: want.rule.clone(),
            })?;
        self.step += 1;
        let next_rule = self.script.get(self.step).map(|s| s.rule.clone());
        Ok(OracleDecision { chosen, next_rule })
    }

    fn is_final(&mut self, rules: &RuleSet, ast: &AnnotatedAst) -> Result<bool, OracleError> {
        Ok(self.step >= self.script.len() || proven_matches(ast, rules, None).is_empty())
    }
}

// ---------------------------------------------------------------------------
// greedy and lookahead

/// Picks the candidate with the lowest metric.
#[derive(Debug, Clone)]
pub struct GreedyOracle {
    pub metric: MetricFn,
}

impl Default for GreedyOracle {
    fn default() -> Self {
        GreedyOracle {
            metric: default_metric,
        }
    }
}

fn argmin<T>(items: impl IntoIterator<Item = T>, key: impl Fn(&T) -> (f64, f64)) -> Option<T> {
    let mut best: Option<(T, (f64, f64))> = None;
    for it in items {
        let k = key(&it);
        if best.as_ref().is_none_or(|(_, b)| k < *b) {
            best = Some((it, k));
        }
    }
    best.map(|(t, _)| t)
}

impl GreedyOracle {
    fn best_rule(&self, rules: &RuleSet, c: &Candidate) -> Result<Option<String>, OracleError> {
        if c.rules.is_empty() {
            return Ok(None);
        }
        let succ = candidates(&c.ast, rules, None)?;
        Ok(argmin(succ.iter(), |s| ((self.metric)(&s.ast), 0.0)).map(|s| s.rule.clone()))
    }
}

impl Oracle for GreedyOracle {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn select_rule(
        &mut self,
        rules: &RuleSet,
        candidates: &[Candidate],
    ) -> Result<OracleDecision, OracleError> {
        let (chosen, c) = argmin(candidates.iter().enumerate(), |(_, c)| {
            ((self.metric)(&c.ast), 0.0)
        })
        .ok_or(OracleError::NoViableCandidate)?;
        Ok(OracleDecision {
            chosen,
            next_rule: self.best_rule(rules, c)?,
        })
    }

    fn is_final(&mut self, rules: &RuleSet, ast: &AnnotatedAst) -> Result<bool, OracleError> {
        let now = (self.metric)(ast);
        Ok(!candidates(ast, rules, None)?
            .iter()
            .any(|c| (self.metric)(&c.ast) < now))
    }
}

/// Minimises the best metric reachable within `depth` steps.
#[derive(Debug, Clone)]
pub struct LookaheadOracle {
    pub depth: usize,
    pub metric: MetricFn,
    memo: HashMap<(String, usize), f64>,
    succ: HashMap<String, Vec<(String, AnnotatedAst)>>,
}

impl LookaheadOracle {
    pub fn new(depth: usize) -> Self {
        LookaheadOracle {
            depth,
            metric: default_metric,
            memo: HashMap::new(),
            succ: HashMap::new(),
        }
    }

    fn successors(
        &mut self,
        rules: &RuleSet,
        ast: &AnnotatedAst,
    ) -> Result<Vec<(String, AnnotatedAst)>, OracleError> {
        let d = digest(ast);
        if let Some(s) = self.succ.get(&d) {
            return Ok(s.clone());
        }
        let mut out = Vec::new();
        for m in proven_matches(ast, rules, None) {
            out.push((m.rule.clone(), trans(ast, &m, false)?.ast));
        }
        self.succ.insert(d, out.clone());
        Ok(out)
    }

    /// Best metric reachable from `ast` in at most `depth` steps.
    pub fn value(
        &mut self,
        rules: &RuleSet,
        ast: &AnnotatedAst,
        depth: usize,
    ) -> Result<f64, OracleError> {
        let here = (self.metric)(ast);
        if depth == 0 {
            return Ok(here);
        }
        let key = (digest(ast), depth);
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let mut best = here;
        for (_, s) in self.successors(rules, ast)? {
            best = best.min(self.value(rules, &s, depth - 1)?);
        }
        self.memo.insert(key, best);
        Ok(best)
    }
}

impl Oracle for LookaheadOracle {
    fn name(&self) -> String {
        format!("lookahead:{}", self.depth)
    }

    fn select_rule(
        &mut self,
        rules: &RuleSet,
        candidates: &[Candidate],
    ) -> Result<OracleDecision, OracleError> {
        let rest = self.depth.saturating_sub(1);
        let mut scored = Vec::new();
        for (i, c) in candidates.iter().enumerate() {
            scored.push((i, self.value(rules, &c.ast, rest)?, (self.metric)(&c.ast)));
        }
        let (chosen, _, _) =
            argmin(scored, |(_, v, m)| (*v, *m)).ok_or(OracleError::NoViableCandidate)?;
        let c = &candidates[chosen];
        let mut next = Vec::new();
        for (rule, s) in self.successors(rules, &c.ast)? {
            next.push((rule, self.value(rules, &s, rest)?, (self.metric)(&s)));
        }
        let next_rule = argmin(next, |(_, v, m)| (*v, *m)).map(|(r, _, _)| r);
        Ok(OracleDecision { chosen, next_rule })
    }

    fn is_final(&mut self, rules: &RuleSet, ast: &AnnotatedAst) -> Result<bool, OracleError> {
        let d = self.depth;
        Ok(self.value(rules, ast, d)? >= (self.metric)(ast))
    }
}

// ---------------------------------------------------------------------------
// driver

/// Outcome of one `new_code` call.
#[derive(Debug, Clone)]
pub struct NewCode {
    pub candidate: Candidate,
    pub next_rule: Option<String>,
}

/// Build every proven successor using the allowed rules and let the oracle
/// pick one.
pub fn new_code(
    ast: &AnnotatedAst,
    allowed: Option<&[String]>,
    rules: &RuleSet,
    oracle: &mut dyn Oracle,
) -> Result<NewCode, OracleError> {
    let cands = candidates(ast, rules, allowed)?;
    if cands.is_empty() {
        return Err(OracleError::NoViableCandidate);
    }
    if cands.iter().all(|c| c.rules.is_empty()) {
        let mut any_final = false;
        for c in &cands {
            any_final |= oracle.is_final(rules, &c.ast)?;
        }
        if !any_final {
            return Err(OracleError::NoViableCandidate);
        }
    }
    let d = oracle.select_rule(rules, &cands)?;
    let candidate = cands
        .into_iter()
        .nth(d.chosen)
        .ok_or(OracleError::NoViableCandidate)?;
    Ok(NewCode {
        candidate,
        next_rule: d.next_rule,
    })
}

/// A derivation: applied steps plus, per step, the rule set offered and the
/// rule the oracle returned.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub history: History,
    pub allowed: Vec<Option<String>>,
    pub returned: Vec<Option<String>>,
    pub is_final: bool,
}

impl Derivation {
    pub fn ast(&self) -> &AnnotatedAst {
        self.history.current()
    }

    pub fn steps(&self) -> &[StepRecord] {
        self.history.steps()
    }

    /// Every step after the first used exactly the rule returned by the
    /// step before it.
    pub fn protocol_ok(&self) -> bool {
        self.steps().iter().enumerate().skip(1).all(|(i, s)| {
            self.returned[i - 1].as_deref() == Some(s.m.rule.as_str())
                && self.allowed[i] == self.returned[i - 1]
        }) && self.allowed.first().is_none_or(|a| a.is_none())
    }
}

/// Call `new_code` until the oracle declares the code final. The first call
/// offers every rule, later calls only the rule returned before.
pub fn run_derivation(
    ast: &AnnotatedAst,
    rules: &RuleSet,
    oracle: &mut dyn Oracle,
    budget: usize,
) -> Result<Derivation, OracleError> {
    let mut d = Derivation {
        history: History::new(ast.clone()),
        allowed: Vec::new(),
        returned: Vec::new(),
        is_final: false,
    };
    let mut allowed: Option<String> = None;
    loop {
        if oracle.is_final(rules, d.ast())? {
            d.is_final = true;
            return Ok(d);
        }
        if d.history.len() >= budget {
            return Err(OracleError::BudgetExceeded(Box::new(d)));
        }
        let only = allowed.clone().map(|r| vec![r]);
        let step = match new_code(d.ast(), only.as_deref(), rules, oracle) {
            Ok(s) => s,
            Err(OracleError::NoViableCandidate) => {
                d.is_final = true;
                return Ok(d);
            }
            Err(e) => return Err(e),
        };
        let m = step
            .candidate
            .origin
            .as_ref()
            .ok_or(OracleError::NoViableCandidate)?;
        d.history.apply(m, false)?;
        d.allowed.push(allowed.clone());
        d.returned.push(step.next_rule.clone());
        match step.next_rule {
            Some(r) => allowed = Some(r),
            None => {
                d.is_final = true;
                return Ok(d);
            }
        }
    }
}

/// Oracle from a command-line spec: `greedy`, `lookahead[:d]` or
/// `scripted:<file>`.
pub fn oracle_from_spec(spec: &str) -> Result<Box<dyn Oracle + Send>, String> {
    if spec == "greedy" {
        return Ok(Box::new(GreedyOracle::default()));
    }
    if spec == "lookahead" {
        return Ok(Box::new(LookaheadOracle::new(2)));
    }
    if let Some(d) = spec.strip_prefix("lookahead:") {
        let d: usize = d
            .parse()
            .map_err(|_| format!("bad lookahead depth `{d}`"))?;
        if d == 0 {
            return Err("lookahead depth must be at least 1".into());
        }
        return Ok(Box::new(LookaheadOracle::new(d)));
    }
    if let Some(path) = spec.strip_prefix("scripted:") {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("cannot read script {path}: {e}"))?;
        return Ok(Box::new(ScriptedOracle::new(parse_script(&text)?)));
    }
    Err(format!("unknown oracle `{spec}`"))
}

/// Printed program, for reports.
pub fn code_of(ast: &AnnotatedAst) -> String {
    print_c(ast)
}

// ---------------------------------------------------------------------------
// wire format shared by the HTTP oracle client and the service

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireCandidate {
    pub code: String,
    pub rules: Vec<String>,
    pub produced_by: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectRequest {
    pub candidates: Vec<WireCandidate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsFinalRequest {
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsFinalResponse {
    #[serde(rename = "final")]
    pub is_final: bool,
}

impl SelectRequest {
    pub fn new(candidates: &[Candidate]) -> Self {
        SelectRequest {
            candidates: candidates
                .iter()
                .map(|c| WireCandidate {
                    code: print_c(&c.ast),
                    rules: c.rules.clone(),
                    produced_by: c.rule.clone(),
                })
                .collect(),
        }
    }

    pub fn candidates(&self) -> Result<Vec<Candidate>, crate::c::error::ParseError> {
        self.candidates
            .iter()
            .map(|w| {
                Ok(Candidate {
                    ast: crate::c::parser::parse_c(&w.code)?,
                    rules: w.rules.clone(),
                    rule: w.produced_by.clone(),
                    origin: None,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c::parser::parse_c;

    #[test]
    fn script_ordinals() {
        let s = parse_script("A\nB @2\n\n# note\nC@1\n").unwrap();
        assert_eq!(s.iter().map(|x| x.ordinal).collect::<Vec<_>>(), [1, 2, 1]);
        assert!(parse_script("A@0").is_err());
    }

    #[test]
    fn metric_counts() {
        let ast = parse_c("float x;\nfor (int i = 0; i < N; i++) { x = x + 1; }").unwrap();
        assert_eq!(default_metric(&ast), 10.0 + 3.0 + 1.0);
    }

    #[test]
    fn specs() {
        assert_eq!(oracle_from_spec("greedy").unwrap().name(), "greedy");
        assert_eq!(
            oracle_from_spec("lookahead:3").unwrap().name(),
            "lookahead:3"
        );
        assert!(oracle_from_spec("lookahead:0").is_err());
        assert!(oracle_from_spec("magic").is_err());
    }
}
