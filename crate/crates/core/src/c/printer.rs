//! Pretty-printer. Pragmas are emitted at column 0 directly above the
//! statement they are attached to; parentheses appear only where operator
//! precedence requires them.

use super::ast::*;

const INDENT: &str = "    ";

pub fn print_c(ast: &AnnotatedAst) -> String {
    let mut p = Printer::default();
    let mut prev_func = false;
    for (k, s) in ast.items.iter().enumerate() {
        let is_func = matches!(s.kind, StmtKind::Func(_));
        if k > 0 && (is_func || prev_func) {
            p.out.push('\n');
        }
        p.stmt(s, 0);
        prev_func = is_func;
    }
    p.out
}

/// Print statements as a standalone fragment.
pub fn print_stmts(items: &[Stmt]) -> String {
    let mut p = Printer::default();
    for s in items {
        p.stmt(s, 0);
    }
    p.out
}

pub fn print_stmt(s: &Stmt) -> String {
    print_stmts(std::slice::from_ref(s))
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(&mut s, e, 0);
    s
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Assign(..) | Expr::AugAssign(..) => 0,
        Expr::Binary(op, ..) | Expr::BinOper(OpSlot::Op(op), ..) => op.precedence(),
        Expr::Unary(op, _) => match op {
            UnOp::PostInc | UnOp::PostDec => 8,
            _ => 7,
        },
        _ => 9,
    }
}

fn sub(out: &mut String, e: &Expr, min: u8) {
    if prec(e) < min {
        out.push('(');
        expr(out, e, 0);
        out.push(')');
    } else {
        expr(out, e, min);
    }
}

fn binop_spacing(op: BinOp) -> &'static str {
    match op {
        BinOp::Mul | BinOp::Div | BinOp::Rem => "",
        _ => " ",
    }
}

fn expr(out: &mut String, e: &Expr, _min: u8) {
    match e {
        Expr::Int(v) => {
            if *v < 0 {
                out.push_str(&format!("({v})"));
            } else {
                out.push_str(&v.to_string());
            }
        }
        Expr::Float(s) => out.push_str(s),
        Expr::Var(n) => out.push_str(n),
        Expr::Index(b, idx) => {
            out.push_str(b);
            for i in idx {
                out.push('[');
                expr(out, i, 0);
                out.push(']');
            }
        }
        Expr::Unary(op, x) => match op {
            UnOp::PostInc | UnOp::PostDec => {
                sub(out, x, 8);
                out.push_str(if *op == UnOp::PostInc { "++" } else { "--" });
            }
            _ => {
                let sym = match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                    UnOp::PreInc => "++",
                    _ => "--",
                };
                out.push_str(sym);
                let clash = matches!(
                    (op, &**x),
                    (
                        UnOp::Neg | UnOp::PreDec,
                        Expr::Unary(UnOp::Neg | UnOp::PreDec, _)
                    ) | (UnOp::PreInc, Expr::Unary(UnOp::PreInc, _))
                ) || matches!(&**x, Expr::Int(v) if *v < 0);
                if clash {
                    out.push('(');
                    expr(out, x, 0);
                    out.push(')');
                } else {
                    sub(out, x, 7);
                }
            }
        },
        Expr::Binary(op, l, r) => {
            let sp = binop_spacing(*op);
            sub(out, l, op.precedence());
            out.push_str(sp);
            out.push_str(op.symbol());
            out.push_str(sp);
            sub(out, r, op.precedence() + 1);
        }
        Expr::Assign(l, r) => {
            sub(out, l, 1);
            out.push_str(" = ");
            sub(out, r, 0);
        }
        Expr::AugAssign(op, l, r) => {
            sub(out, l, 1);
            out.push_str(&format!(" {}= ", op.symbol()));
            sub(out, r, 0);
        }
        Expr::Call(n, args) => {
            out.push_str(n);
            out.push('(');
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                expr(out, a, 0);
            }
            out.push(')');
        }
        Expr::Meta(n) => out.push_str(&format!("cexpr({n})")),
        Expr::FreshVar(n) => out.push_str(&format!("fresh_var(cexpr({n}))")),
        Expr::BinOper(op, l, r) => {
            out.push_str("bin_oper(");
            match op {
                OpSlot::Op(o) => out.push_str(o.symbol()),
                OpSlot::Name(n) => out.push_str(n),
            }
            out.push_str(", ");
            expr(out, l, 0);
            out.push_str(", ");
            expr(out, r, 0);
            out.push(')');
        }
        Expr::Subs(t, f, to) => {
            out.push_str("subs(");
            expr(out, t, 0);
            out.push_str(", ");
            expr(out, f, 0);
            out.push_str(", ");
            expr(out, to, 0);
            out.push(')');
        }
    }
}

fn decl_text(d: &Decl) -> String {
    let mut s = format!("{} ", d.ty.keyword());
    for (k, dc) in d.declarators.iter().enumerate() {
        if k > 0 {
            s.push_str(", ");
        }
        s.push_str(&dc.name);
        for dim in &dc.dims {
            s.push('[');
            expr(&mut s, dim, 0);
            s.push(']');
        }
        if let Some(i) = &dc.init {
            s.push_str(" = ");
            sub(&mut s, i, 0);
        }
    }
    s
}

#[derive(Default)]
struct Printer {
    out: String,
}

impl Printer {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn pragmas(&mut self, s: &Stmt) {
        for p in &s.pragmas {
            self.out.push_str(&p.prop.to_pragma());
            self.out.push('\n');
        }
    }

    /// Header line followed by a nested body: blocks open on the header
    /// line unless they carry pragmas.
    fn header_and_body(&mut self, depth: usize, header: String, body: &Stmt) -> bool {
        match &body.kind {
            StmtKind::Block(items) if body.pragmas.is_empty() => {
                self.line(depth, &format!("{header} {{"));
                for c in items {
                    self.stmt(c, depth + 1);
                }
                false
            }
            _ => {
                self.line(depth, &header);
                self.stmt(body, depth + 1);
                true
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) {
        self.pragmas(s);
        match &s.kind {
            StmtKind::Decl(d) => self.line(depth, &format!("{};", decl_text(d))),
            StmtKind::Expr(e) => self.line(depth, &format!("{};", print_expr(e))),
            StmtKind::Return(None) => self.line(depth, "return;"),
            StmtKind::Return(Some(e)) => self.line(depth, &format!("return {};", print_expr(e))),
            StmtKind::Block(items) => {
                self.line(depth, "{");
                for c in items {
                    self.stmt(c, depth + 1);
                }
                self.line(depth, "}");
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                let init_text = match &init.kind {
                    StmtKind::Decl(d) => decl_text(d),
                    StmtKind::Expr(e) => print_expr(e),
                    StmtKind::Meta(n) => format!("cstmt({n})"),
                    _ => String::new(),
                };
                let header = format!(
                    "for ({}; {}; {})",
                    init_text,
                    print_expr(cond),
                    print_expr(step)
                );
                if !self.header_and_body(depth, header, body) {
                    self.line(depth, "}");
                }
            }
            StmtKind::While { cond, body } => {
                let header = format!("while ({})", print_expr(cond));
                if !self.header_and_body(depth, header, body) {
                    self.line(depth, "}");
                }
            }
            StmtKind::If { cond, then, els } => {
                let header = format!("if ({})", print_expr(cond));
                let open = !self.header_and_body(depth, header, then);
                if let Some(e) = els {
                    if open {
                        let else_block =
                            matches!(e.kind, StmtKind::Block(_)) && e.pragmas.is_empty();
                        if else_block {
                            let StmtKind::Block(items) = &e.kind else {
                                unreachable!()
                            };
                            self.line(depth, "} else {");
                            for c in items {
                                self.stmt(c, depth + 1);
                            }
                            self.line(depth, "}");
                        } else {
                            self.line(depth, "}");
                            self.line(depth, "else");
                            self.stmt(e, depth + 1);
                        }
                    } else if !self.header_and_body(depth, "else".into(), e) {
                        self.line(depth, "}");
                    }
                } else if open {
                    self.line(depth, "}");
                }
            }
            StmtKind::Func(f) => {
                let params: Vec<String> = f
                    .params
                    .iter()
                    .map(|p| format!("{} {}", p.ty.keyword(), p.name))
                    .collect();
                self.line(
                    depth,
                    &format!("{} {}({}) {{", f.ret.keyword(), f.name, params.join(", ")),
                );
                for c in &f.body {
                    self.stmt(c, depth + 1);
                }
                self.line(depth, "}");
            }
            StmtKind::Meta(n) => self.line(depth, &format!("cstmt({n});")),
            StmtKind::MetaSeq(n) => self.line(depth, &format!("cstmts({n});")),
            StmtKind::Subs { target, from, to } => {
                let t = match &target.kind {
                    StmtKind::Meta(n) if target.pragmas.is_empty() => format!("cstmt({n})"),
                    StmtKind::MetaSeq(n) if target.pragmas.is_empty() => format!("cstmts({n})"),
                    _ => print_stmt(target).trim_end().to_string(),
                };
                self.line(
                    depth,
                    &format!("subs({}, {}, {});", t, print_expr(from), print_expr(to)),
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c::parser::{parse_c, parse_expr_str};

    #[test]
    fn minimal_parentheses() {
        for (src, want) in [
            ("(a+b)*v[i]", "(a + b)*v[i]"),
            ("a*v[i] + b*v[i]", "a*v[i] + b*v[i]"),
            ("a - (b - c)", "a - (b - c)"),
            ("(a - b) - c", "a - b - c"),
            ("-(-x)", "-(-x)"),
            ("x = y = 3", "x = y = 3"),
            ("(x = 2) + 1", "(x = 2) + 1"),
            ("i++", "i++"),
        ] {
            assert_eq!(print_expr(&parse_expr_str(src).unwrap()), want);
        }
    }

    #[test]
    fn pragmas_sit_above_their_statement() {
        let src =
            "#pragma stml pure F\nfor(int i=0;i<N;i++)\n#pragma polca def F\n  c[i] = a*v[i];\n";
        let text = print_c(&parse_c(src).unwrap());
        assert_eq!(
            text,
            "#pragma stml pure F\nfor (int i = 0; i < N; i++)\n#pragma polca def F\n    c[i] = a*v[i];\n"
        );
    }

    #[test]
    fn else_chains_round_trip() {
        let src = "if (a < b) { x = 1; } else if (a > b) x = 2; else { x = 3; }";
        let a = parse_c(src).unwrap();
        assert_eq!(parse_c(&print_c(&a)).unwrap(), a);
    }
}
