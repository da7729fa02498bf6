//! Recursive-descent parser for the C subset and for rule templates.

use super::ast::*;
use super::error::ParseError;
use super::lexer::{tokenize, tokenize_at, Tok, Token};
use crate::lang::property::Property;

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "goto", "switch", "case", "default", "break", "continue", "do", "struct", "union", "enum",
    "typedef", "char", "long", "short", "unsigned", "signed", "const", "static", "extern",
    "sizeof", "volatile", "register", "auto", "inline",
];

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    template: bool,
    /// Source line per statement, in statement preorder.
    lines: Vec<u32>,
}

/// Parse a C translation unit.
pub fn parse_c(src: &str) -> Result<AnnotatedAst, ParseError> {
    let mut p = Parser::new(tokenize(src)?, false);
    let items = p.parse_items_until_eof()?;
    let lines = p.lines;
    let mut ast = AnnotatedAst::new(items);
    let mut k = 0;
    let mut map = std::collections::BTreeMap::new();
    for v in ast.nodes() {
        if let super::visit::NodeRef::Stmt(_) = v.node {
            if let Some(l) = lines.get(k) {
                map.insert(v.id, *l);
            }
            k += 1;
        }
    }
    ast.lines = map;
    Ok(ast)
}

/// Parse a sequence of template statements (rule pattern or generate text).
pub fn parse_template_stmts(src: &str, first_line: u32) -> Result<Vec<Stmt>, ParseError> {
    let mut p = Parser::new(tokenize_at(src, first_line)?, true);
    p.parse_items_until_eof()
}

/// Parse a single template expression covering the whole input.
pub fn parse_template_expr(src: &str, first_line: u32) -> Result<Expr, ParseError> {
    let mut p = Parser::new(tokenize_at(src, first_line)?, true);
    let e = p.parse_expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parse a single plain C expression covering the whole input.
pub fn parse_expr_str(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(tokenize(src)?, false);
    let e = p.parse_expr()?;
    p.expect_eof()?;
    Ok(e)
}

impl Parser {
    pub fn new(toks: Vec<Token>, template: bool) -> Parser {
        Parser {
            toks,
            pos: 0,
            template,
            lines: Vec::new(),
        }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn here(&self) -> (u32, u32) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    pub fn mark(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, mark: usize) {
        self.pos = mark;
    }

    pub fn bump_any(&mut self) -> Tok {
        self.bump()
    }

    pub fn expect_int(&mut self) -> Result<i64, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(v)
            }
            t => Err(self.err(format!("expected integer, found {}", describe(&t)))),
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(q) if q == s)
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn err(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::syntax(l, c, msg)
    }

    fn unsupported(&self, feature: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Unsupported {
            line,
            col,
            feature: feature.into(),
        }
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{p}`, found {}", describe(self.peek()))))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.check_keyword(&s)?;
                self.bump();
                Ok(s)
            }
            t => Err(self.err(format!("expected identifier, found {}", describe(&t)))),
        }
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.err(format!("unexpected {}", describe(self.peek()))))
        }
    }

    fn check_keyword(&self, s: &str) -> Result<(), ParseError> {
        if UNSUPPORTED_KEYWORDS.contains(&s) {
            return Err(self.unsupported(format!("`{s}`")));
        }
        Ok(())
    }

    fn reserve_line(&mut self) {
        let (l, _) = self.here();
        self.lines.push(l);
    }

    fn parse_items_until_eof(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut items = Vec::new();
        loop {
            if self.at_eof() {
                return Ok(items);
            }
            items.push(self.parse_stmt(true)?);
        }
    }

    /// Consecutive pragma lines, with no statement required after them.
    pub fn parse_pragma_lines(&mut self) -> Result<Vec<Property>, ParseError> {
        let mut out = Vec::new();
        while let Tok::Pragma { namespace, body } = self.peek().clone() {
            let (line, _) = self.here();
            out.push(Property::parse_pragma(
                &namespace,
                &body,
                line,
                self.template,
            )?);
            self.bump();
        }
        Ok(out)
    }

    fn parse_pragmas(&mut self) -> Result<Vec<Pragma>, ParseError> {
        let mut out = Vec::new();
        while let Tok::Pragma { namespace, body } = self.peek().clone() {
            let (line, _) = self.here();
            let prop = Property::parse_pragma(&namespace, &body, line, self.template)?;
            out.push(Pragma::user(prop));
            self.bump();
        }
        if !out.is_empty() && (self.at_eof() || self.is_punct("}")) {
            let (line, _) = self.here();
            return Err(ParseError::Pragma {
                line,
                msg: "pragma is not followed by a statement".into(),
            });
        }
        Ok(out)
    }

    fn peek_type(&self) -> Option<CType> {
        match self.peek() {
            Tok::Ident(s) => CType::from_keyword(s),
            _ => None,
        }
    }

    /// Parse one statement with its leading pragmas.
    pub fn parse_stmt(&mut self, top: bool) -> Result<Stmt, ParseError> {
        let pragmas = self.parse_pragmas()?;
        self.reserve_line();
        let mut s = self.parse_stmt_kind(top)?;
        s.pragmas = pragmas;
        Ok(s)
    }

    fn parse_stmt_kind(&mut self, top: bool) -> Result<Stmt, ParseError> {
        if let Tok::Ident(id) = self.peek().clone() {
            self.check_keyword(&id)?;
            match id.as_str() {
                "for" => return self.parse_for(),
                "while" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.parse_expr()?;
                    self.expect_punct(")")?;
                    let body = self.parse_stmt(false)?;
                    return Ok(Stmt::new(StmtKind::While {
                        cond,
                        body: Box::new(body),
                    }));
                }
                "if" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.parse_expr()?;
                    self.expect_punct(")")?;
                    let then = Box::new(self.parse_stmt(false)?);
                    let els = if self.is_ident("else") {
                        self.bump();
                        Some(Box::new(self.parse_stmt(false)?))
                    } else {
                        None
                    };
                    return Ok(Stmt::new(StmtKind::If { cond, then, els }));
                }
                "else" => return Err(self.err("`else` without `if`")),
                "return" => {
                    self.bump();
                    let e = if self.is_punct(";") {
                        None
                    } else {
                        Some(self.parse_expr()?)
                    };
                    self.expect_punct(";")?;
                    return Ok(Stmt::new(StmtKind::Return(e)));
                }
                "cstmt" | "cstmts"
                    if self.template && matches!(self.peek_at(1), Tok::Punct("(")) =>
                {
                    let s = self.parse_meta_stmt()?;
                    self.eat_punct(";");
                    return Ok(s);
                }
                "subs" if self.template && self.subs_targets_stmt() => {
                    self.bump();
                    self.expect_punct("(")?;
                    let target = Box::new(self.parse_stmt(false)?);
                    if !self.is_punct(",") {
                        return Err(self.err("expected `,` in subs"));
                    }
                    self.bump();
                    let from = self.parse_expr()?;
                    self.expect_punct(",")?;
                    let to = self.parse_expr()?;
                    self.expect_punct(")")?;
                    self.eat_punct(";");
                    return Ok(Stmt::new(StmtKind::Subs { target, from, to }));
                }
                _ => {}
            }
        }
        if let Some(ty) = self.peek_type() {
            return self.parse_decl_or_func(ty, top);
        }
        if self.eat_punct("{") {
            let mut items = Vec::new();
            while !self.is_punct("}") {
                if self.at_eof() {
                    return Err(self.err("unterminated block"));
                }
                items.push(self.parse_stmt(false)?);
            }
            self.bump();
            return Ok(Stmt::block(items));
        }
        if self.eat_punct(";") {
            return Ok(Stmt::block(Vec::new()));
        }
        let e = self.parse_expr()?;
        self.expect_punct(";")?;
        Ok(Stmt::expr(e))
    }

    fn subs_targets_stmt(&self) -> bool {
        matches!(self.peek_at(1), Tok::Punct("("))
            && match self.peek_at(2) {
                Tok::Ident(s) => s == "cstmt" || s == "cstmts",
                Tok::Punct("{") => true,
                _ => false,
            }
    }

    fn parse_meta_stmt(&mut self) -> Result<Stmt, ParseError> {
        let Tok::Ident(tag) = self.bump() else {
            unreachable!()
        };
        self.expect_punct("(")?;
        let name = self.expect_ident()?;
        self.expect_punct(")")?;
        Ok(Stmt::new(if tag == "cstmt" {
            StmtKind::Meta(name)
        } else {
            StmtKind::MetaSeq(name)
        }))
    }

    fn parse_for(&mut self) -> Result<Stmt, ParseError> {
        self.bump();
        self.expect_punct("(")?;
        let init = {
            self.reserve_line();
            if self.template && self.is_ident("cstmt") && matches!(self.peek_at(1), Tok::Punct("("))
            {
                self.parse_meta_stmt()?
            } else if let Some(ty) = self.peek_type() {
                self.bump();
                Stmt::new(StmtKind::Decl(self.parse_declarators(ty)?))
            } else if self.is_punct(";") {
                return Err(self.unsupported("empty `for` initializer"));
            } else {
                Stmt::expr(self.parse_expr()?)
            }
        };
        self.expect_punct(";")?;
        if self.is_punct(";") {
            return Err(self.unsupported("empty `for` condition"));
        }
        let cond = self.parse_expr()?;
        self.expect_punct(";")?;
        if self.is_punct(")") {
            return Err(self.unsupported("empty `for` step"));
        }
        let step = self.parse_expr()?;
        self.expect_punct(")")?;
        let body = self.parse_stmt(false)?;
        Ok(Stmt::new(StmtKind::For {
            init: Box::new(init),
            cond,
            step,
            body: Box::new(body),
        }))
    }

    fn parse_decl_or_func(&mut self, ty: CType, top: bool) -> Result<Stmt, ParseError> {
        self.bump();
        if self.is_punct("*") {
            return Err(self.unsupported("pointer declaration"));
        }
        if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Punct("(")) {
            if !top {
                return Err(self.unsupported("nested function definition"));
            }
            let name = self.expect_ident()?;
            self.bump();
            let mut params = Vec::new();
            if self.is_ident("void") && matches!(self.peek_at(1), Tok::Punct(")")) {
                self.bump();
            }
            while !self.is_punct(")") {
                let Some(pty) = self.peek_type() else {
                    return Err(self.err("expected parameter type"));
                };
                self.bump();
                if self.is_punct("*") {
                    return Err(self.unsupported("pointer parameter"));
                }
                let pname = self.expect_ident()?;
                if self.is_punct("[") {
                    return Err(self.unsupported("array parameter"));
                }
                params.push(Param {
                    ty: pty,
                    name: pname,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
            if self.is_punct(";") {
                return Err(self.unsupported("function prototype"));
            }
            self.expect_punct("{")?;
            let mut body = Vec::new();
            while !self.is_punct("}") {
                if self.at_eof() {
                    return Err(self.err("unterminated function body"));
                }
                body.push(self.parse_stmt(false)?);
            }
            self.bump();
            return Ok(Stmt::new(StmtKind::Func(FuncDef {
                ret: ty,
                name,
                params,
                body,
            })));
        }
        if ty == CType::Void {
            return Err(self.err("`void` variable"));
        }
        let d = self.parse_declarators(ty)?;
        self.expect_punct(";")?;
        Ok(Stmt::new(StmtKind::Decl(d)))
    }

    /// Declarators after the type keyword, up to (not including) `;`.
    fn parse_declarators(&mut self, ty: CType) -> Result<Decl, ParseError> {
        let mut declarators = Vec::new();
        loop {
            if self.is_punct("*") {
                return Err(self.unsupported("pointer declaration"));
            }
            let name = self.expect_ident()?;
            let mut dims = Vec::new();
            while self.eat_punct("[") {
                dims.push(self.parse_expr()?);
                self.expect_punct("]")?;
            }
            if dims.len() > 2 {
                return Err(self.unsupported("array of rank above 2"));
            }
            let init = if self.eat_punct("=") {
                if self.is_punct("{") {
                    return Err(self.unsupported("brace initializer"));
                }
                Some(self.parse_assign()?)
            } else {
                None
            };
            declarators.push(Declarator { name, dims, init });
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(Decl { ty, declarators })
    }

    pub fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let e = self.parse_assign()?;
        if self.is_punct("?") {
            return Err(self.unsupported("conditional operator"));
        }
        Ok(e)
    }

    fn parse_assign(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_binary(1)?;
        let aug = match self.peek() {
            Tok::Punct("=") => None,
            Tok::Punct("+=") => Some(BinOp::Add),
            Tok::Punct("-=") => Some(BinOp::Sub),
            Tok::Punct("*=") => Some(BinOp::Mul),
            Tok::Punct("/=") => Some(BinOp::Div),
            Tok::Punct("%=") => Some(BinOp::Rem),
            Tok::Punct(p @ ("<<=" | ">>=" | "&=" | "|=" | "^=")) => {
                let p = *p;
                return Err(self.unsupported(format!("operator `{p}`")));
            }
            Tok::Punct("?") => return Err(self.unsupported("conditional operator")),
            _ => return Ok(lhs),
        };
        if !matches!(lhs, Expr::Var(_) | Expr::Index(..) | Expr::Meta(_)) {
            return Err(self.err("invalid assignment target"));
        }
        self.bump();
        let rhs = self.parse_assign()?;
        Ok(match aug {
            None => Expr::Assign(Box::new(lhs), Box::new(rhs)),
            Some(op) => Expr::AugAssign(op, Box::new(lhs), Box::new(rhs)),
        })
    }

    fn peek_binop(&self) -> Result<Option<BinOp>, ParseError> {
        match self.peek() {
            Tok::Punct(p @ ("&" | "|" | "^" | "<<" | ">>")) => {
                Err(self.unsupported(format!("bitwise operator `{p}`")))
            }
            Tok::Punct(p) => Ok(BinOp::from_symbol(p)),
            _ => Ok(None),
        }
    }

    fn parse_binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        while let Some(op) = self.peek_binop()? {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.parse_binary(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Punct("-") => {
                self.bump();
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.parse_unary()?)))
            }
            Tok::Punct("+") => {
                self.bump();
                self.parse_unary()
            }
            Tok::Punct("!") => {
                self.bump();
                Ok(Expr::Unary(UnOp::Not, Box::new(self.parse_unary()?)))
            }
            Tok::Punct(p @ ("++" | "--")) => {
                let op = if *p == "++" {
                    UnOp::PreInc
                } else {
                    UnOp::PreDec
                };
                self.bump();
                let e = self.parse_unary()?;
                if !matches!(e, Expr::Var(_) | Expr::Index(..) | Expr::Meta(_)) {
                    return Err(self.err("invalid increment operand"));
                }
                Ok(Expr::Unary(op, Box::new(e)))
            }
            Tok::Punct("*") | Tok::Punct("&") => Err(self.unsupported("pointer operator")),
            Tok::Punct("~") => Err(self.unsupported("bitwise operator `~`")),
            _ => self.parse_postfix(),
        }
    }

    fn parse_postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.parse_primary()?;
        loop {
            match self.peek() {
                Tok::Punct("[") => {
                    let (base, mut idx) = match e {
                        Expr::Var(n) => (n, Vec::new()),
                        Expr::Index(n, idx) => (n, idx),
                        _ => return Err(self.err("only named arrays can be indexed")),
                    };
                    self.bump();
                    idx.push(self.parse_expr()?);
                    self.expect_punct("]")?;
                    if idx.len() > 2 {
                        return Err(self.unsupported("array of rank above 2"));
                    }
                    e = Expr::Index(base, idx);
                }
                Tok::Punct(p @ ("++" | "--")) => {
                    let op = if *p == "++" {
                        UnOp::PostInc
                    } else {
                        UnOp::PostDec
                    };
                    if !matches!(e, Expr::Var(_) | Expr::Index(..) | Expr::Meta(_)) {
                        return Err(self.err("invalid increment operand"));
                    }
                    self.bump();
                    e = Expr::Unary(op, Box::new(e));
                }
                Tok::Punct(".") | Tok::Punct("->") => {
                    return Err(self.unsupported("member access"));
                }
                _ => return Ok(e),
            }
        }
    }

    fn parse_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        loop {
            args.push(self.parse_expr()?);
            if self.eat_punct(")") {
                return Ok(args);
            }
            self.expect_punct(",")?;
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Float(s) => {
                self.bump();
                Ok(Expr::Float(s))
            }
            Tok::Punct("(") => {
                if let Tok::Ident(s) = self.peek_at(1) {
                    if CType::from_keyword(s).is_some()
                        || UNSUPPORTED_KEYWORDS.contains(&s.as_str())
                    {
                        return Err(self.unsupported("cast"));
                    }
                }
                self.bump();
                let e = self.parse_expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.check_keyword(&name)?;
                if CType::from_keyword(&name).is_some() {
                    return Err(self.err(format!("unexpected type `{name}`")));
                }
                let call = matches!(self.peek_at(1), Tok::Punct("("));
                if self.template && call {
                    match name.as_str() {
                        "cexpr" => {
                            self.bump();
                            self.bump();
                            let v = self.expect_ident()?;
                            self.expect_punct(")")?;
                            return Ok(Expr::Meta(v));
                        }
                        "bin_oper" => {
                            self.bump();
                            self.bump();
                            let op = self.parse_op_slot()?;
                            self.expect_punct(",")?;
                            let l = self.parse_expr()?;
                            self.expect_punct(",")?;
                            let r = self.parse_expr()?;
                            self.expect_punct(")")?;
                            return Ok(Expr::BinOper(op, Box::new(l), Box::new(r)));
                        }
                        "subs" => {
                            self.bump();
                            let mut a = self.parse_args()?;
                            if a.len() != 3 {
                                return Err(self.err("subs takes three arguments"));
                            }
                            let to = a.pop().unwrap();
                            let from = a.pop().unwrap();
                            let t = a.pop().unwrap();
                            return Ok(Expr::Subs(Box::new(t), Box::new(from), Box::new(to)));
                        }
                        "fresh_var" => {
                            self.bump();
                            self.bump();
                            let inner = self.parse_expr()?;
                            self.expect_punct(")")?;
                            let Expr::Meta(v) = inner else {
                                return Err(self.err("fresh_var expects cexpr(name)"));
                            };
                            return Ok(Expr::FreshVar(v));
                        }
                        _ => {}
                    }
                }
                self.bump();
                if call {
                    let args = self.parse_args()?;
                    return Ok(Expr::Call(name, args));
                }
                Ok(Expr::Var(name))
            }
            t => Err(self.err(format!("expected expression, found {}", describe(&t)))),
        }
    }

    /// An operator position: a C operator symbol or an identifier.
    pub fn parse_op_slot(&mut self) -> Result<OpSlot, ParseError> {
        match self.peek().clone() {
            Tok::Punct(p) => match BinOp::from_symbol(p) {
                Some(op) => {
                    self.bump();
                    Ok(OpSlot::Op(op))
                }
                None => Err(self.err(format!("`{p}` is not a binary operator"))),
            },
            Tok::Ident(s) if s == "cexpr" && matches!(self.peek_at(1), Tok::Punct("(")) => {
                self.bump();
                self.bump();
                let v = self.expect_ident()?;
                self.expect_punct(")")?;
                Ok(OpSlot::Name(v))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(OpSlot::Name(s))
            }
            t => Err(self.err(format!("expected operator, found {}", describe(&t)))),
        }
    }
}

pub fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Float(s) => format!("`{s}`"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Pragma { .. } => "pragma".into(),
        Tok::Eof => "end of input".into(),
    }
}
