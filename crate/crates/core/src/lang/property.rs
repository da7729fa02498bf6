//! STML and POLCA pragma facts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::c::ast::{Expr, OpSlot};
use crate::c::error::ParseError;
use crate::c::lexer::{tokenize_at, Tok};
use crate::c::parser::{describe, Parser};
use crate::c::printer::print_expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemAccess {
    Reads,
    Writes,
    Rw,
}

impl MemAccess {
    pub fn keyword(self) -> &'static str {
        match self {
            MemAccess::Reads => "reads",
            MemAccess::Writes => "writes",
            MemAccess::Rw => "rw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpProp {
    Appears,
    Pure,
    IsIdentity,
}

impl ExpProp {
    pub fn keyword(self) -> &'static str {
        match self {
            ExpProp::Appears => "appears",
            ExpProp::Pure => "pure",
            ExpProp::IsIdentity => "is_identity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpProp {
    Commutative,
    Associative,
    DistributesOver,
}

impl OpProp {
    pub fn keyword(self) -> &'static str {
        match self {
            OpProp::Commutative => "commutative",
            OpProp::Associative => "associative",
            OpProp::DistributesOver => "distributes_over",
        }
    }
}

/// A low-level STML fact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StmlProp {
    Access {
        mode: MemAccess,
        target: Expr,
        offsets: Option<Vec<i64>>,
    },
    WriteSet {
        expr: Expr,
        locations: Vec<Expr>,
    },
    SameLength {
        a: Expr,
        b: Expr,
    },
    Output {
        expr: Expr,
    },
    Exp {
        prop: ExpProp,
        qualifier: Option<OpSlot>,
        expr: Expr,
    },
    Op {
        prop: OpProp,
        left: Option<OpSlot>,
        right: OpSlot,
    },
    IterationSpace {
        lo: Expr,
        hi: Expr,
    },
    IterationIndependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolcaHead {
    #[serde(rename = "map")]
    Map,
    #[serde(rename = "zipWith")]
    ZipWith,
    #[serde(rename = "fold")]
    Fold,
    #[serde(rename = "scanl")]
    Scanl,
    #[serde(rename = "def")]
    Def,
    #[serde(rename = "input")]
    Input,
    #[serde(rename = "output")]
    Output,
}

impl PolcaHead {
    pub const ALL: [PolcaHead; 7] = [
        PolcaHead::Map,
        PolcaHead::ZipWith,
        PolcaHead::Fold,
        PolcaHead::Scanl,
        PolcaHead::Def,
        PolcaHead::Input,
        PolcaHead::Output,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            PolcaHead::Map => "map",
            PolcaHead::ZipWith => "zipWith",
            PolcaHead::Fold => "fold",
            PolcaHead::Scanl => "scanl",
            PolcaHead::Def => "def",
            PolcaHead::Input => "input",
            PolcaHead::Output => "output",
        }
    }

    /// Number of arguments the head takes.
    pub fn arity(self) -> usize {
        match self {
            PolcaHead::Map => 3,
            PolcaHead::ZipWith | PolcaHead::Fold | PolcaHead::Scanl => 4,
            PolcaHead::Def | PolcaHead::Input | PolcaHead::Output => 1,
        }
    }

    pub fn is_skeleton(self) -> bool {
        matches!(
            self,
            PolcaHead::Map | PolcaHead::ZipWith | PolcaHead::Fold | PolcaHead::Scanl
        )
    }
}

/// A high-level skeleton annotation. Arity is checked when lowering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolcaProp {
    pub head: PolcaHead,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "namespace", rename_all = "snake_case")]
pub enum Property {
    Stml(StmlProp),
    Polca(PolcaProp),
}

impl Property {
    /// Parse the body of `#pragma <namespace> <body>`.
    pub fn parse_pragma(
        namespace: &str,
        body: &str,
        line: u32,
        template: bool,
    ) -> Result<Property, ParseError> {
        let perr = |msg: String| ParseError::Pragma { line, msg };
        let toks = tokenize_at(body, line).map_err(|e| perr(e.to_string()))?;
        let mut p = Parser::new(toks, template);
        let prop = match namespace {
            "stml" => Property::Stml(parse_stml(&mut p).map_err(|e| perr(e.to_string()))?),
            "polca" => Property::Polca(parse_polca(&mut p).map_err(|e| perr(e.to_string()))?),
            other => return Err(perr(format!("unknown pragma namespace `{other}`"))),
        };
        p.expect_eof().map_err(|e| perr(e.to_string()))?;
        Ok(prop)
    }

    /// Parse a full `#pragma stml ...` or `#pragma polca ...` line.
    pub fn parse_line(text: &str, line: u32) -> Result<Property, ParseError> {
        let perr = |msg: &str| ParseError::Pragma {
            line,
            msg: msg.into(),
        };
        let rest = text
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| perr("expected `#pragma`"))?;
        let rest = rest
            .trim_start()
            .strip_prefix("pragma")
            .ok_or_else(|| perr("expected `#pragma`"))?;
        let rest = rest.trim();
        let (ns, body) = match rest.find(char::is_whitespace) {
            Some(i) => (&rest[..i], rest[i..].trim()),
            None => (rest, ""),
        };
        Property::parse_pragma(ns, body, line, false)
    }

    pub fn is_stml(&self) -> bool {
        matches!(self, Property::Stml(_))
    }

    /// Keyword naming the property head, as written in pragmas.
    pub fn keyword(&self) -> &'static str {
        match self {
            Property::Polca(p) => p.head.keyword(),
            Property::Stml(s) => match s {
                StmlProp::Access { mode, .. } => mode.keyword(),
                StmlProp::WriteSet { .. } => "write",
                StmlProp::SameLength { .. } => "same_length",
                StmlProp::Output { .. } => "output",
                StmlProp::Exp { prop, .. } => prop.keyword(),
                StmlProp::Op { prop, .. } => prop.keyword(),
                StmlProp::IterationSpace { .. } => "iteration_space",
                StmlProp::IterationIndependent => "iteration_independent",
            },
        }
    }

    /// Mutable access to every expression inside the property.
    pub fn exprs_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Property::Polca(p) => p.args.iter_mut().collect(),
            Property::Stml(s) => match s {
                StmlProp::Access { target, .. } => vec![target],
                StmlProp::WriteSet { expr, locations } => {
                    let mut v = vec![expr];
                    v.extend(locations.iter_mut());
                    v
                }
                StmlProp::SameLength { a, b } => vec![a, b],
                StmlProp::Output { expr } | StmlProp::Exp { expr, .. } => vec![expr],
                StmlProp::IterationSpace { lo, hi } => vec![lo, hi],
                StmlProp::Op { .. } | StmlProp::IterationIndependent => vec![],
            },
        }
    }

    pub fn op_slots_mut(&mut self) -> Vec<&mut OpSlot> {
        match self {
            Property::Stml(StmlProp::Op { left, right, .. }) => {
                let mut v: Vec<&mut OpSlot> = left.iter_mut().collect();
                v.push(right);
                v
            }
            Property::Stml(StmlProp::Exp {
                qualifier: Some(q), ..
            }) => vec![q],
            _ => vec![],
        }
    }
}

fn parse_offsets(p: &mut Parser) -> Result<Vec<i64>, ParseError> {
    p.expect_punct("{")?;
    let mut out = Vec::new();
    loop {
        let neg = if p.eat_punct("-") {
            true
        } else {
            p.eat_punct("+");
            false
        };
        match p.peek().clone() {
            Tok::Int(v) => {
                out.push(if neg { -v } else { v });
                p.expect_int()?;
            }
            t => return Err(p.err(format!("expected integer offset, found {}", describe(&t)))),
        }
        if p.eat_punct("}") {
            return Ok(out);
        }
        p.expect_punct(",")?;
    }
}

fn exp_prop(s: &str) -> Option<ExpProp> {
    match s {
        "appears" => Some(ExpProp::Appears),
        "pure" => Some(ExpProp::Pure),
        "is_identity" => Some(ExpProp::IsIdentity),
        _ => None,
    }
}

fn op_prop(s: &str) -> Option<OpProp> {
    match s {
        "commutative" => Some(OpProp::Commutative),
        "associative" => Some(OpProp::Associative),
        "distributes_over" => Some(OpProp::DistributesOver),
        _ => None,
    }
}

fn mem_access(s: &str) -> Option<MemAccess> {
    match s {
        "reads" => Some(MemAccess::Reads),
        "writes" => Some(MemAccess::Writes),
        "rw" => Some(MemAccess::Rw),
        _ => None,
    }
}

fn parse_stml(p: &mut Parser) -> Result<StmlProp, ParseError> {
    let head = match p.peek().clone() {
        Tok::Ident(s) => Some(s),
        _ => None,
    };
    if let Some(h) = head.as_deref() {
        let next_is_paren = p.peek_at(1) == &Tok::Punct("(");
        match h {
            "iteration_independent" => {
                p.bump_any();
                return Ok(StmlProp::IterationIndependent);
            }
            "iteration_space" => {
                p.bump_any();
                let lo = p.parse_expr()?;
                let hi = p.parse_expr()?;
                return Ok(StmlProp::IterationSpace { lo, hi });
            }
            "same_length" => {
                p.bump_any();
                let a = p.parse_expr()?;
                let b = p.parse_expr()?;
                return Ok(StmlProp::SameLength { a, b });
            }
            "write" if next_is_paren => {
                p.bump_any();
                p.expect_punct("(")?;
                let expr = p.parse_expr()?;
                p.expect_punct(")")?;
                p.expect_punct("=")?;
                p.expect_punct("{")?;
                let mut locations = Vec::new();
                if !p.eat_punct("}") {
                    loop {
                        locations.push(p.parse_expr()?);
                        if p.eat_punct("}") {
                            break;
                        }
                        p.expect_punct(",")?;
                    }
                }
                return Ok(StmlProp::WriteSet { expr, locations });
            }
            "output" if next_is_paren => {
                p.bump_any();
                p.expect_punct("(")?;
                let expr = p.parse_expr()?;
                p.expect_punct(")")?;
                return Ok(StmlProp::Output { expr });
            }
            _ => {}
        }
        if let Some(mode) = mem_access(h) {
            p.bump_any();
            let target = p.parse_expr()?;
            let offsets = if p.is_ident("in") {
                p.bump_any();
                Some(parse_offsets(p)?)
            } else {
                None
            };
            return Ok(StmlProp::Access {
                mode,
                target,
                offsets,
            });
        }
        if let Some(prop) = exp_prop(h) {
            p.bump_any();
            let expr = p.parse_expr()?;
            return Ok(StmlProp::Exp {
                prop,
                qualifier: None,
                expr,
            });
        }
        if let Some(prop) = op_prop(h) {
            p.bump_any();
            let right = p.parse_op_slot()?;
            return Ok(StmlProp::Op {
                prop,
                left: None,
                right,
            });
        }
    }
    // qualified forms: `<op> distributes_over <op>`, `<op> is_identity <exp>`
    let left = p.parse_op_slot()?;
    match p.peek().clone() {
        Tok::Ident(s) if op_prop(&s).is_some() => {
            p.bump_any();
            let right = p.parse_op_slot()?;
            Ok(StmlProp::Op {
                prop: op_prop(&s).unwrap(),
                left: Some(left),
                right,
            })
        }
        Tok::Ident(s) if exp_prop(&s).is_some() => {
            p.bump_any();
            let expr = p.parse_expr()?;
            Ok(StmlProp::Exp {
                prop: exp_prop(&s).unwrap(),
                qualifier: Some(left),
                expr,
            })
        }
        t => Err(p.err(format!("unknown stml property at {}", describe(&t)))),
    }
}

fn parse_polca(p: &mut Parser) -> Result<PolcaProp, ParseError> {
    let head = match p.peek().clone() {
        Tok::Ident(s) => PolcaHead::ALL.into_iter().find(|h| h.keyword() == s),
        _ => None,
    };
    let Some(head) = head else {
        return Err(p.err(format!("unknown polca annotation {}", describe(p.peek()))));
    };
    p.bump_any();
    let mut args = Vec::new();
    while !p.at_eof() {
        args.push(p.parse_expr()?);
    }
    Ok(PolcaProp { head, args })
}

fn fmt_slot(s: &OpSlot) -> String {
    s.to_string()
}

impl fmt::Display for StmlProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StmlProp::Access {
                mode,
                target,
                offsets,
            } => {
                write!(f, "{} {}", mode.keyword(), print_expr(target))?;
                if let Some(o) = offsets {
                    let parts: Vec<String> = o.iter().map(|v| v.to_string()).collect();
                    write!(f, " in {{{}}}", parts.join(", "))?;
                }
                Ok(())
            }
            StmlProp::WriteSet { expr, locations } => {
                let parts: Vec<String> = locations.iter().map(print_expr).collect();
                write!(f, "write({}) = {{{}}}", print_expr(expr), parts.join(", "))
            }
            StmlProp::SameLength { a, b } => {
                write!(f, "same_length {} {}", print_arg(a), print_arg(b))
            }
            StmlProp::Output { expr } => write!(f, "output({})", print_expr(expr)),
            StmlProp::Exp {
                prop,
                qualifier,
                expr,
            } => {
                if let Some(q) = qualifier {
                    write!(f, "{} ", fmt_slot(q))?;
                }
                write!(f, "{} {}", prop.keyword(), print_expr(expr))
            }
            StmlProp::Op { prop, left, right } => {
                if let Some(l) = left {
                    write!(f, "{} ", fmt_slot(l))?;
                }
                write!(f, "{} {}", prop.keyword(), fmt_slot(right))
            }
            StmlProp::IterationSpace { lo, hi } => {
                write!(f, "iteration_space {} {}", print_arg(lo), print_arg(hi))
            }
            StmlProp::IterationIndependent => f.write_str("iteration_independent"),
        }
    }
}

/// Print an expression used as one of several space-separated arguments,
/// parenthesizing when a bare rendering would not re-parse as one argument.
fn print_arg(e: &Expr) -> String {
    let s = print_expr(e);
    if matches!(e, Expr::Unary(crate::c::ast::UnOp::Neg, _)) {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for PolcaProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.head.keyword())?;
        for a in &self.args {
            write!(f, " {}", print_arg(a))?;
        }
        Ok(())
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Stml(s) => write!(f, "stml {s}"),
            Property::Polca(p) => write!(f, "polca {p}"),
        }
    }
}

impl Property {
    /// The full pragma line.
    pub fn to_pragma(&self) -> String {
        format!("#pragma {self}")
    }
}
