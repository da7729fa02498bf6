//! Rule files: parsing, metavariable tagging and scoping checks.
//!
//! ```text
//! Name {
//!     pattern:   { ... }
//!     condition: { pred(args); pred(args) || !pred(args); ... }
//!     generate:  { ... }
//!     assert:    { #pragma stml ... }
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::c::ast::*;
use crate::c::error::ParseError;
use crate::c::lexer::{tokenize, Tok};
use crate::c::parser::{describe, Parser};
use crate::lang::property::Property;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule syntax error at line {line}: {msg}")]
    RuleSyntaxError { line: u32, msg: String },
    #[error("rule `{rule}` uses unbound metavariable `{var}`")]
    UnboundMetavariable { rule: String, var: String },
}

impl RuleError {
    pub fn kind(&self) -> &'static str {
        match self {
            RuleError::RuleSyntaxError { .. } => "RuleSyntaxError",
            RuleError::UnboundMetavariable { .. } => "UnboundMetavariable",
        }
    }
}

impl From<ParseError> for RuleError {
    fn from(e: ParseError) -> Self {
        RuleError::RuleSyntaxError {
            line: e.line(),
            msg: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaKind {
    Expr,
    Stmt,
    Stmts,
    Op,
}

impl fmt::Display for MetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetaKind::Expr => "cexpr",
            MetaKind::Stmt => "cstmt",
            MetaKind::Stmts => "cstmts",
            MetaKind::Op => "operator",
        })
    }
}

/// Shape of a rule's left-hand side, which decides where it is tried.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    /// Tried at every expression node.
    Expr(Expr),
    /// Tried at every statement in an item or body position.
    Stmt(Stmt),
    /// Matched against the whole item list of a sequence container.
    Seq(Vec<Stmt>),
}

/// An argument of a condition predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Expr(Expr),
    Stmt(String),
    Seq(String),
    List(Vec<Term>),
    Writes(Box<Term>),
    Op(OpSlot),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredCall {
    pub name: String,
    pub args: Vec<Term>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    True,
    And(Vec<Cond>),
    Or(Vec<Cond>),
    Not(Box<Cond>),
    Pred(PredCall),
}

impl Cond {
    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Cond> {
        match self {
            Cond::True => vec![],
            Cond::And(v) => v.iter().flat_map(|c| c.conjuncts()).collect(),
            c => vec![c],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Code {
    Expr(Expr),
    Stmts(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenItem {
    Code(Code),
    IfThen {
        cond: Cond,
        then: Vec<GenItem>,
    },
    IfThenElse {
        cond: Cond,
        then: Vec<GenItem>,
        els: Vec<GenItem>,
    },
    GenList(Vec<Vec<GenItem>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub pattern: Pattern,
    pub condition: Cond,
    pub generate: Vec<GenItem>,
    pub asserts: Vec<Property>,
    pub tags: BTreeMap<String, MetaKind>,
    pub line: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn names(&self) -> Vec<String> {
        self.rules.iter().map(|r| r.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Append `other`; a rule whose name is already present replaces the
    /// earlier definition in place.
    pub fn extend(&mut self, other: RuleSet) {
        for r in other.rules {
            match self.rules.iter_mut().find(|x| x.name == r.name) {
                Some(slot) => *slot = r,
                None => self.rules.push(r),
            }
        }
    }
}

/// Predicates accepted in conditions with their allowed arities.
pub const PREDICATES: &[(&str, &[usize])] = &[
    ("no_write", &[2]),
    ("no_write_except_arrays", &[3]),
    ("no_write_prev_arrays", &[3]),
    ("no_write_next_arrays", &[3]),
    ("no_overwrite", &[3]),
    ("no_read", &[2]),
    ("pure", &[1]),
    ("distributes_over", &[2]),
    ("occurs_in", &[2]),
    ("fresh_var", &[1]),
    ("is_identity", &[1, 2]),
    ("is_assignment", &[1]),
    ("is_subseteq", &[2]),
];

pub fn predicate_arities(name: &str) -> Option<&'static [usize]> {
    PREDICATES.iter().find(|(n, _)| *n == name).map(|(_, a)| *a)
}

const DEFAULT_RULES: &str = include_str!("../../rules/default.stml");

/// Text of the shipped rule library.
pub fn default_rules_source() -> &'static str {
    DEFAULT_RULES
}

/// The shipped rule library, or `default.stml` from the directory named by
/// `STML_RULE_PATH` when that variable is set.
pub fn default_rules() -> Result<RuleSet, RuleError> {
    if let Ok(dir) = std::env::var("STML_RULE_PATH") {
        let path = std::path::Path::new(&dir).join("default.stml");
        if let Ok(text) = std::fs::read_to_string(&path) {
            return parse_rules(&text);
        }
    }
    parse_rules(DEFAULT_RULES)
}

pub fn parse_rules(src: &str) -> Result<RuleSet, RuleError> {
    let mut p = Parser::new(tokenize(src)?, true);
    let mut rules: Vec<Rule> = Vec::new();
    while !p.at_eof() {
        let r = parse_rule(&mut p)?;
        if rules.iter().any(|x| x.name == r.name) {
            return Err(syntax(r.line, format!("duplicate rule `{}`", r.name)));
        }
        rules.push(r);
    }
    Ok(RuleSet { rules })
}

fn syntax(line: u32, msg: impl Into<String>) -> RuleError {
    RuleError::RuleSyntaxError {
        line,
        msg: msg.into(),
    }
}

fn parse_rule(p: &mut Parser) -> Result<Rule, RuleError> {
    let (line, _) = p.here();
    let mut name = match p.bump_any() {
        Tok::Ident(s) => s,
        t => {
            return Err(syntax(
                line,
                format!("expected rule name, found {}", describe(&t)),
            ))
        }
    };
    while p.is_punct("-") {
        p.bump_any();
        match p.bump_any() {
            Tok::Ident(s) => {
                name.push('-');
                name.push_str(&s);
            }
            t => return Err(syntax(line, format!("bad rule name near {}", describe(&t)))),
        }
    }
    p.expect_punct("{")?;
    let mut pattern = None;
    let mut condition = Cond::True;
    let mut generate = None;
    let mut asserts = Vec::new();
    while !p.eat_punct("}") {
        let (sl, _) = p.here();
        let section = match p.bump_any() {
            Tok::Ident(s) => s,
            t => {
                return Err(syntax(
                    sl,
                    format!("expected section name, found {}", describe(&t)),
                ))
            }
        };
        p.expect_punct(":")?;
        p.expect_punct("{")?;
        match section.as_str() {
            "pattern" => pattern = Some(parse_pattern(p)?),
            "condition" => condition = parse_condition_section(p)?,
            "generate" => {
                let as_expr = matches!(pattern, Some(Pattern::Expr(_)));
                if pattern.is_none() {
                    return Err(syntax(sl, "generate section before pattern"));
                }
                generate = Some(parse_gen_items(p, as_expr)?);
            }
            "assert" => asserts = p.parse_pragma_lines()?,
            other => return Err(syntax(sl, format!("unknown section `{other}`"))),
        }
        p.expect_punct("}")?;
    }
    let pattern = pattern.ok_or_else(|| syntax(line, format!("rule `{name}` has no pattern")))?;
    let generate =
        generate.ok_or_else(|| syntax(line, format!("rule `{name}` has no generate section")))?;
    let mut rule = Rule {
        name,
        pattern,
        condition,
        generate,
        asserts,
        tags: BTreeMap::new(),
        line,
    };
    validate(&mut rule)?;
    Ok(rule)
}

fn parse_pattern(p: &mut Parser) -> Result<Pattern, RuleError> {
    let m = p.mark();
    if let Ok(e) = p.parse_expr() {
        if p.is_punct("}") {
            return Ok(Pattern::Expr(e));
        }
    }
    p.reset(m);
    let mut items = Vec::new();
    while !p.is_punct("}") {
        if p.at_eof() {
            return Err(syntax(p.here().0, "unterminated pattern"));
        }
        items.push(p.parse_stmt(false)?);
    }
    if items.is_empty() {
        return Err(syntax(p.here().0, "empty pattern"));
    }
    if items.len() == 1 && !matches!(items[0].kind, StmtKind::MetaSeq(_)) {
        return Ok(Pattern::Stmt(items.pop().unwrap()));
    }
    Ok(Pattern::Seq(items))
}

fn parse_condition_section(p: &mut Parser) -> Result<Cond, RuleError> {
    let mut parts = Vec::new();
    while !p.is_punct("}") {
        if p.at_eof() {
            return Err(syntax(p.here().0, "unterminated condition"));
        }
        parts.push(parse_disj(p)?);
        if !p.eat_punct(";") && !p.is_punct("}") {
            return Err(p
                .err(format!(
                    "expected `;` in condition, found {}",
                    describe(p.peek())
                ))
                .into());
        }
    }
    Ok(match parts.len() {
        0 => Cond::True,
        1 => parts.pop().unwrap(),
        _ => Cond::And(parts),
    })
}

fn parse_disj(p: &mut Parser) -> Result<Cond, RuleError> {
    let mut v = vec![parse_conj(p)?];
    while p.eat_punct("||") {
        v.push(parse_conj(p)?);
    }
    Ok(if v.len() == 1 {
        v.pop().unwrap()
    } else {
        Cond::Or(v)
    })
}

fn parse_conj(p: &mut Parser) -> Result<Cond, RuleError> {
    let mut v = vec![parse_cond_unary(p)?];
    while p.eat_punct("&&") {
        v.push(parse_cond_unary(p)?);
    }
    Ok(if v.len() == 1 {
        v.pop().unwrap()
    } else {
        Cond::And(v)
    })
}

fn parse_cond_unary(p: &mut Parser) -> Result<Cond, RuleError> {
    if p.eat_punct("!") {
        return Ok(Cond::Not(Box::new(parse_cond_unary(p)?)));
    }
    if p.eat_punct("(") {
        let c = parse_disj(p)?;
        p.expect_punct(")")?;
        return Ok(c);
    }
    let (line, _) = p.here();
    let name = match p.bump_any() {
        Tok::Ident(s) => s,
        t => {
            return Err(syntax(
                line,
                format!("expected predicate, found {}", describe(&t)),
            ))
        }
    };
    if name == "true" {
        return Ok(Cond::True);
    }
    let Some(arities) = predicate_arities(&name) else {
        return Err(syntax(line, format!("unknown predicate `{name}`")));
    };
    p.expect_punct("(")?;
    let mut args = Vec::new();
    if !p.eat_punct(")") {
        loop {
            args.push(parse_term(p)?);
            if p.eat_punct(")") {
                break;
            }
            p.expect_punct(",")?;
        }
    }
    if !arities.contains(&args.len()) {
        return Err(syntax(
            line,
            format!("`{name}` takes {arities:?} arguments, got {}", args.len()),
        ));
    }
    Ok(Cond::Pred(PredCall { name, args, line }))
}

fn parse_term(p: &mut Parser) -> Result<Term, RuleError> {
    if p.eat_punct("{") {
        let mut items = Vec::new();
        if !p.eat_punct("}") {
            loop {
                items.push(parse_term(p)?);
                if p.eat_punct("}") {
                    break;
                }
                p.expect_punct(",")?;
            }
        }
        return Ok(Term::List(items));
    }
    if let Tok::Ident(id) = p.peek().clone() {
        if p.peek_at(1) == &Tok::Punct("(") {
            match id.as_str() {
                "writes" => {
                    p.bump_any();
                    p.bump_any();
                    let t = parse_term(p)?;
                    p.expect_punct(")")?;
                    return Ok(Term::Writes(Box::new(t)));
                }
                "cstmt" | "cstmts" => {
                    p.bump_any();
                    p.bump_any();
                    let v = p.expect_ident()?;
                    p.expect_punct(")")?;
                    return Ok(if id == "cstmt" {
                        Term::Stmt(v)
                    } else {
                        Term::Seq(v)
                    });
                }
                _ => {}
            }
        }
    }
    if let Tok::Punct(s) = p.peek().clone() {
        if let Some(op) = BinOp::from_symbol(s) {
            if matches!(
                p.peek_at(1),
                Tok::Punct(",") | Tok::Punct(")") | Tok::Punct("}")
            ) {
                p.bump_any();
                return Ok(Term::Op(OpSlot::Op(op)));
            }
        }
    }
    Ok(Term::Expr(p.parse_expr()?))
}

fn parse_gen_items(p: &mut Parser, as_expr: bool) -> Result<Vec<GenItem>, RuleError> {
    let mut items = Vec::new();
    let mut stmts: Vec<Stmt> = Vec::new();
    let flush = |items: &mut Vec<GenItem>, stmts: &mut Vec<Stmt>| {
        if !stmts.is_empty() {
            items.push(GenItem::Code(Code::Stmts(std::mem::take(stmts))));
        }
    };
    while !p.is_punct("}") {
        if p.at_eof() {
            return Err(syntax(p.here().0, "unterminated generate section"));
        }
        if let Tok::Ident(id) = p.peek().clone() {
            if p.peek_at(1) == &Tok::Punct(":")
                && matches!(id.as_str(), "if_then" | "if_then_else" | "gen_list")
            {
                flush(&mut items, &mut stmts);
                p.bump_any();
                p.bump_any();
                p.expect_punct("{")?;
                let item = match id.as_str() {
                    "if_then" => {
                        let cond = parse_disj(p)?;
                        p.expect_punct(";")?;
                        let then = parse_gen_items(p, as_expr)?;
                        GenItem::IfThen { cond, then }
                    }
                    "if_then_else" => {
                        let cond = parse_disj(p)?;
                        p.expect_punct(";")?;
                        let then = parse_group(p, as_expr)?;
                        let els = parse_group(p, as_expr)?;
                        GenItem::IfThenElse { cond, then, els }
                    }
                    _ => {
                        let mut alts = Vec::new();
                        while !p.is_punct("}") {
                            alts.push(parse_group(p, as_expr)?);
                        }
                        if alts.is_empty() {
                            return Err(syntax(p.here().0, "empty gen_list"));
                        }
                        GenItem::GenList(alts)
                    }
                };
                p.expect_punct("}")?;
                items.push(item);
                continue;
            }
        }
        if as_expr {
            let e = p.parse_expr()?;
            p.eat_punct(";");
            items.push(GenItem::Code(Code::Expr(e)));
        } else {
            stmts.push(p.parse_stmt(false)?);
        }
    }
    flush(&mut items, &mut stmts);
    Ok(items)
}

fn parse_group(p: &mut Parser, as_expr: bool) -> Result<Vec<GenItem>, RuleError> {
    p.expect_punct("{")?;
    let items = parse_gen_items(p, as_expr)?;
    p.expect_punct("}")?;
    Ok(items)
}

// ---------------------------------------------------------------------------
// validation

struct Scope<'a> {
    rule: &'a str,
    line: u32,
    tags: BTreeMap<String, MetaKind>,
}

impl Scope<'_> {
    fn tag(&mut self, name: &str, kind: MetaKind) -> Result<(), RuleError> {
        match self.tags.get(name) {
            Some(k) if *k != kind => Err(syntax(
                self.line,
                format!(
                    "metavariable `{name}` of rule `{}` tagged both {k} and {kind}",
                    self.rule
                ),
            )),
            _ => {
                self.tags.insert(name.to_string(), kind);
                Ok(())
            }
        }
    }

    fn use_var(&self, name: &str, kind: MetaKind) -> Result<(), RuleError> {
        match self.tags.get(name) {
            None => Err(RuleError::UnboundMetavariable {
                rule: self.rule.to_string(),
                var: name.to_string(),
            }),
            Some(k) if *k == kind || (kind == MetaKind::Expr && *k == MetaKind::Op) => Ok(()),
            Some(k) => Err(syntax(
                self.line,
                format!(
                    "metavariable `{name}` of rule `{}` is {k} but used as {kind}",
                    self.rule
                ),
            )),
        }
    }
}

fn expr_metas(e: &Expr, f: &mut dyn FnMut(&str, MetaKind)) {
    match e {
        Expr::Meta(n) | Expr::FreshVar(n) => f(n, MetaKind::Expr),
        Expr::BinOper(OpSlot::Name(n), ..) => f(n, MetaKind::Op),
        _ => {}
    }
    for c in e.children() {
        expr_metas(c, f);
    }
}

fn prop_metas(p: &Property, f: &mut dyn FnMut(&str, MetaKind)) {
    let mut p = p.clone();
    for e in p.exprs_mut() {
        expr_metas(e, f);
    }
}

fn stmt_metas(s: &Stmt, f: &mut dyn FnMut(&str, MetaKind)) {
    for pr in &s.pragmas {
        prop_metas(&pr.prop, f);
    }
    match &s.kind {
        StmtKind::Meta(n) => f(n, MetaKind::Stmt),
        StmtKind::MetaSeq(n) => f(n, MetaKind::Stmts),
        _ => {}
    }
    for e in s.own_exprs() {
        expr_metas(e, f);
    }
    for c in s.child_stmts() {
        stmt_metas(c, f);
    }
}

fn validate(rule: &mut Rule) -> Result<(), RuleError> {
    let mut scope = Scope {
        rule: &rule.name,
        line: rule.line,
        tags: BTreeMap::new(),
    };
    let mut found = Vec::new();
    match &rule.pattern {
        Pattern::Expr(e) => expr_metas(e, &mut |n, k| found.push((n.to_string(), k))),
        Pattern::Stmt(s) => stmt_metas(s, &mut |n, k| found.push((n.to_string(), k))),
        Pattern::Seq(v) => v
            .iter()
            .for_each(|s| stmt_metas(s, &mut |n, k| found.push((n.to_string(), k)))),
    }
    for (n, k) in &found {
        scope.tag(n, *k)?;
    }
    if let Pattern::Expr(e)
    | Pattern::Stmt(Stmt {
        kind: StmtKind::Expr(e),
        ..
    }) = &rule.pattern
    {
        if e.subexpressions()
            .iter()
            .any(|x| matches!(x, Expr::Subs(..) | Expr::FreshVar(_)))
        {
            return Err(syntax(
                rule.line,
                "subs and fresh_var are not allowed in patterns",
            ));
        }
    }

    // condition: binders extend the scope left to right across top-level conjuncts
    let mut condition = rule.condition.clone();
    resolve_ops_cond(&mut condition, &scope.tags);
    for c in condition.conjuncts() {
        match c {
            Cond::Pred(pc) if pc.name == "fresh_var" => match &pc.args[0] {
                Term::Expr(Expr::Meta(n)) => {
                    if !scope.tags.contains_key(n) {
                        scope.tag(n, MetaKind::Expr)?;
                    }
                }
                _ => return Err(syntax(pc.line, "fresh_var expects cexpr(name)")),
            },
            Cond::Pred(pc) if pc.name == "occurs_in" => {
                if let Term::Expr(Expr::Meta(n)) = &pc.args[0] {
                    check_term(&scope, &pc.args[1])?;
                    if !scope.tags.contains_key(n) {
                        scope.tag(n, MetaKind::Expr)?;
                    }
                } else {
                    check_cond(&scope, c)?;
                }
            }
            _ => check_cond(&scope, c)?,
        }
    }
    rule.condition = condition;

    let mut generate = rule.generate.clone();
    for g in generate.iter_mut() {
        resolve_ops_gen(g, &scope.tags);
    }
    let mut fresh = Vec::new();
    for g in &generate {
        gen_fresh_vars(g, &mut fresh);
    }
    for n in fresh {
        if !scope.tags.contains_key(&n) {
            scope.tag(&n, MetaKind::Expr)?;
        }
    }
    for g in &generate {
        check_gen(&scope, g)?;
    }
    rule.generate = generate;
    for a in &rule.asserts {
        let mut err = None;
        prop_metas(a, &mut |n, k| {
            if err.is_none() {
                err = scope.use_var(n, k).err();
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    rule.tags = scope.tags;
    Ok(())
}

/// Names introduced by `fresh_var` inside generate code.
pub(crate) fn gen_fresh_vars(g: &GenItem, out: &mut Vec<String>) {
    fn expr(e: &Expr, out: &mut Vec<String>) {
        for x in e.subexpressions() {
            if let Expr::FreshVar(n) = x {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
        }
    }
    fn stmt(s: &Stmt, out: &mut Vec<String>) {
        s.own_exprs().into_iter().for_each(|e| expr(e, out));
        s.child_stmts().into_iter().for_each(|c| stmt(c, out));
    }
    match g {
        GenItem::Code(Code::Expr(e)) => expr(e, out),
        GenItem::Code(Code::Stmts(v)) => v.iter().for_each(|s| stmt(s, out)),
        GenItem::IfThen { then, .. } => then.iter().for_each(|x| gen_fresh_vars(x, out)),
        GenItem::IfThenElse { then, els, .. } => {
            then.iter().chain(els).for_each(|x| gen_fresh_vars(x, out))
        }
        GenItem::GenList(alts) => alts.iter().flatten().for_each(|x| gen_fresh_vars(x, out)),
    }
}

fn resolve_ops_term(t: &mut Term, tags: &BTreeMap<String, MetaKind>) {
    match t {
        Term::Expr(Expr::Var(n)) | Term::Expr(Expr::Meta(n))
            if tags.get(n.as_str()) == Some(&MetaKind::Op) =>
        {
            *t = Term::Op(OpSlot::Name(n.clone()));
        }
        Term::List(v) => v.iter_mut().for_each(|x| resolve_ops_term(x, tags)),
        Term::Writes(x) => resolve_ops_term(x, tags),
        _ => {}
    }
}

fn resolve_ops_cond(c: &mut Cond, tags: &BTreeMap<String, MetaKind>) {
    match c {
        Cond::True => {}
        Cond::And(v) | Cond::Or(v) => v.iter_mut().for_each(|x| resolve_ops_cond(x, tags)),
        Cond::Not(x) => resolve_ops_cond(x, tags),
        Cond::Pred(pc) => pc.args.iter_mut().for_each(|t| resolve_ops_term(t, tags)),
    }
}

fn resolve_ops_gen(g: &mut GenItem, tags: &BTreeMap<String, MetaKind>) {
    match g {
        GenItem::Code(_) => {}
        GenItem::IfThen { cond, then } => {
            resolve_ops_cond(cond, tags);
            then.iter_mut().for_each(|x| resolve_ops_gen(x, tags));
        }
        GenItem::IfThenElse { cond, then, els } => {
            resolve_ops_cond(cond, tags);
            then.iter_mut()
                .chain(els.iter_mut())
                .for_each(|x| resolve_ops_gen(x, tags));
        }
        GenItem::GenList(alts) => alts
            .iter_mut()
            .flatten()
            .for_each(|x| resolve_ops_gen(x, tags)),
    }
}

fn check_expr(scope: &Scope, e: &Expr) -> Result<(), RuleError> {
    let mut err = None;
    expr_metas(e, &mut |n, k| {
        if err.is_none() {
            err = scope.use_var(n, k).err();
        }
    });
    err.map_or(Ok(()), Err)
}

fn check_term(scope: &Scope, t: &Term) -> Result<(), RuleError> {
    match t {
        Term::Expr(e) => check_expr(scope, e),
        Term::Stmt(n) => scope.use_var(n, MetaKind::Stmt),
        Term::Seq(n) => scope.use_var(n, MetaKind::Stmts),
        Term::List(v) => v.iter().try_for_each(|x| check_term(scope, x)),
        Term::Writes(x) => check_term(scope, x),
        Term::Op(OpSlot::Name(n)) => scope.use_var(n, MetaKind::Op),
        Term::Op(OpSlot::Op(_)) => Ok(()),
    }
}

fn check_cond(scope: &Scope, c: &Cond) -> Result<(), RuleError> {
    match c {
        Cond::True => Ok(()),
        Cond::And(v) | Cond::Or(v) => v.iter().try_for_each(|x| check_cond(scope, x)),
        Cond::Not(x) => check_cond(scope, x),
        Cond::Pred(pc) => pc.args.iter().try_for_each(|t| check_term(scope, t)),
    }
}

fn check_stmt(scope: &Scope, s: &Stmt) -> Result<(), RuleError> {
    let mut err = None;
    stmt_metas(s, &mut |n, k| {
        if err.is_none() {
            err = scope.use_var(n, k).err();
        }
    });
    err.map_or(Ok(()), Err)
}

fn check_gen(scope: &Scope, g: &GenItem) -> Result<(), RuleError> {
    match g {
        GenItem::Code(Code::Expr(e)) => check_expr(scope, e),
        GenItem::Code(Code::Stmts(v)) => v.iter().try_for_each(|s| check_stmt(scope, s)),
        GenItem::IfThen { cond, then } => {
            check_cond(scope, cond)?;
            then.iter().try_for_each(|x| check_gen(scope, x))
        }
        GenItem::IfThenElse { cond, then, els } => {
            check_cond(scope, cond)?;
            then.iter().chain(els).try_for_each(|x| check_gen(scope, x))
        }
        GenItem::GenList(alts) => alts.iter().flatten().try_for_each(|x| check_gen(scope, x)),
    }
}
