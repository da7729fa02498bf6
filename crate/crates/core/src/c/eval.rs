//! Reference interpreter used for differential testing.
//!
//! `int` is wrapping 64-bit, `float` and `double` are both 64-bit IEEE.
//! Inputs override top-level declarations of the same name; every other
//! top-level variable starts at zero. Assigning to a name that was never
//! declared creates a global of the assigned value's type.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
}

impl Scalar {
    pub fn as_f64(self) -> f64 {
        match self {
            Scalar::Int(v) => v as f64,
            Scalar::Float(v) => v,
        }
    }

    fn truthy(self) -> bool {
        match self {
            Scalar::Int(v) => v != 0,
            Scalar::Float(v) => v != 0.0,
        }
    }

    fn convert(self, ty: CType) -> Scalar {
        match (ty, self) {
            (CType::Int, Scalar::Float(v)) => Scalar::Int(v as i64),
            (CType::Float | CType::Double, Scalar::Int(v)) => Scalar::Float(v as f64),
            _ => self,
        }
    }

    fn zero(ty: CType) -> Scalar {
        if ty.is_floating() {
            Scalar::Float(0.0)
        } else {
            Scalar::Int(0)
        }
    }

    fn ty(self) -> CType {
        match self {
            Scalar::Int(_) => CType::Int,
            Scalar::Float(_) => CType::Double,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(Scalar),
    Array { dims: Vec<usize>, data: Vec<Scalar> },
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Scalar(Scalar::Int(v))
    }

    pub fn float(v: f64) -> Value {
        Value::Scalar(Scalar::Float(v))
    }

    pub fn floats(data: impl IntoIterator<Item = f64>) -> Value {
        let data: Vec<Scalar> = data.into_iter().map(Scalar::Float).collect();
        Value::Array {
            dims: vec![data.len()],
            data,
        }
    }

    pub fn ints(data: impl IntoIterator<Item = i64>) -> Value {
        let data: Vec<Scalar> = data.into_iter().map(Scalar::Int).collect();
        Value::Array {
            dims: vec![data.len()],
            data,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: impl IntoIterator<Item = f64>) -> Value {
        let data: Vec<Scalar> = data.into_iter().map(Scalar::Float).collect();
        assert_eq!(data.len(), rows * cols);
        Value::Array {
            dims: vec![rows, cols],
            data,
        }
    }

    /// Elements as `f64`, a scalar giving one element.
    pub fn to_f64s(&self) -> Vec<f64> {
        match self {
            Value::Scalar(s) => vec![s.as_f64()],
            Value::Array { data, .. } => data.iter().map(|s| s.as_f64()).collect(),
        }
    }

    /// Same shape and every element within `rel` relative error (absolute
    /// near zero).
    pub fn approx_eq(&self, other: &Value, rel: f64) -> bool {
        let shape = |v: &Value| match v {
            Value::Scalar(_) => vec![],
            Value::Array { dims, .. } => dims.clone(),
        };
        if shape(self) != shape(other) {
            return false;
        }
        self.to_f64s()
            .iter()
            .zip(other.to_f64s())
            .all(|(a, b)| close(*a, b, rel))
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a == b || (a.is_nan() && b.is_nan()) {
        return true;
    }
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= rel * scale
}

pub type Env = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("index {index:?} out of bounds for array `{array}`")]
    OutOfBounds { array: String, index: Vec<i64> },
    #[error("step budget of {0} exhausted")]
    StepBudgetExceeded(u64),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("shape mismatch for `{0}`")]
    ShapeMismatch(String),
    #[error("type error: {0}")]
    TypeError(String),
    #[error("cannot evaluate template construct `{0}`")]
    Template(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Read,
    Write,
}

/// One concrete memory access.
#[derive(Debug, Clone, PartialEq)]
pub struct Access {
    pub kind: AccessKind,
    pub base: String,
    pub indices: Vec<i64>,
    /// Value read or stored, for element and scalar accesses.
    pub value: Option<Scalar>,
    /// Scope holding the variable: 0 for globals, `k + 1` for the k-th
    /// open scope, and above [`FRAME_DEPTH`] inside called functions.
    pub depth: usize,
}

/// Depth offset for scopes of called functions.
pub const FRAME_DEPTH: usize = 1 << 20;

/// Hooks for instrumented runs. Statements and expressions are reported by
/// address so callers can attribute accesses to fragments of the tree they
/// passed in.
pub trait Observer {
    /// `depth` is the number of open scopes when the statement starts.
    fn enter_stmt(&mut self, _s: &Stmt, _depth: usize) {}
    fn exit_stmt(&mut self, _s: &Stmt) {}
    fn enter_expr(&mut self, _e: &Expr) {}
    fn exit_expr(&mut self, _e: &Expr) {}
    fn access(&mut self, _a: &Access) {}
}

#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    pub step_budget: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            step_budget: 1_000_000,
        }
    }
}

pub fn evaluate(ast: &AnnotatedAst, inputs: &Env) -> Result<Env, EvalError> {
    evaluate_with(ast, inputs, EvalConfig::default(), None)
}

pub fn evaluate_with(
    ast: &AnnotatedAst,
    inputs: &Env,
    cfg: EvalConfig,
    observer: Option<&mut dyn Observer>,
) -> Result<Env, EvalError> {
    let mut it = Interp {
        globals: BTreeMap::new(),
        inputs,
        scopes: Vec::new(),
        funcs: BTreeMap::new(),
        steps: 0,
        budget: cfg.step_budget,
        obs: observer,
        frame_base: 0,
    };
    for (k, v) in inputs {
        it.globals.insert(
            k.clone(),
            Slot {
                ty: None,
                value: v.clone(),
            },
        );
    }
    for s in &ast.items {
        if let StmtKind::Func(f) = &s.kind {
            it.funcs.insert(f.name.clone(), f);
        }
    }
    for s in &ast.items {
        it.exec_top(s)?;
    }
    Ok(it.globals.into_iter().map(|(k, s)| (k, s.value)).collect())
}

#[derive(Debug, Clone)]
struct Slot {
    /// Declared element type; `None` for inputs never declared and for
    /// implicit globals, which keep whatever type is stored.
    ty: Option<CType>,
    value: Value,
}

enum Flow {
    Normal,
    Return(Scalar),
}

struct Interp<'a, 'o> {
    globals: BTreeMap<String, Slot>,
    inputs: &'a Env,
    scopes: Vec<BTreeMap<String, Slot>>,
    funcs: BTreeMap<String, &'a FuncDef>,
    steps: u64,
    budget: u64,
    obs: Option<&'o mut dyn Observer>,
    frame_base: usize,
}

impl<'a, 'o> Interp<'a, 'o> {
    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(EvalError::StepBudgetExceeded(self.budget));
        }
        Ok(())
    }

    fn note(&mut self, kind: AccessKind, base: &str, indices: &[i64], value: Option<Scalar>) {
        if self.obs.is_none() {
            return;
        }
        let depth = match self.scopes.iter().rposition(|s| s.contains_key(base)) {
            Some(k) => self.frame_base + k + 1,
            None => 0,
        };
        if let Some(o) = self.obs.as_deref_mut() {
            o.access(&Access {
                kind,
                base: base.to_string(),
                indices: indices.to_vec(),
                value,
                depth,
            });
        }
    }

    fn slot(&mut self, name: &str) -> Option<&mut Slot> {
        for s in self.scopes.iter_mut().rev() {
            if let Some(v) = s.get_mut(name) {
                return Some(v);
            }
        }
        self.globals.get_mut(name)
    }

    fn exec_top(&mut self, s: &'a Stmt) -> Result<(), EvalError> {
        match &s.kind {
            StmtKind::Func(_) => Ok(()),
            StmtKind::Decl(d) => {
                self.enter_stmt(s);
                self.tick()?;
                for dc in &d.declarators {
                    let fresh = self.make_value(d.ty, dc)?;
                    let value = match self.inputs.get(&dc.name) {
                        Some(given) => conform(&dc.name, d.ty, given, &fresh)?,
                        None => fresh,
                    };
                    if dc.init.is_some() || !self.inputs.contains_key(&dc.name) {
                        let v = if let Value::Scalar(x) = &value {
                            Some(*x)
                        } else {
                            None
                        };
                        self.note(AccessKind::Write, &dc.name, &[], v);
                    }
                    self.globals.insert(
                        dc.name.clone(),
                        Slot {
                            ty: Some(d.ty),
                            value,
                        },
                    );
                }
                self.exit_stmt(s);
                Ok(())
            }
            _ => match self.exec(s)? {
                Flow::Normal => Ok(()),
                Flow::Return(_) => Ok(()),
            },
        }
    }

    fn enter_stmt(&mut self, s: &Stmt) {
        let depth = self.frame_base + self.scopes.len();
        if let Some(o) = self.obs.as_deref_mut() {
            o.enter_stmt(s, depth);
        }
    }

    fn exit_stmt(&mut self, s: &Stmt) {
        if let Some(o) = self.obs.as_deref_mut() {
            o.exit_stmt(s);
        }
    }

    fn make_value(&mut self, ty: CType, dc: &'a Declarator) -> Result<Value, EvalError> {
        if dc.dims.is_empty() {
            let v = match &dc.init {
                Some(e) => self.eval(e)?.convert(ty),
                None => Scalar::zero(ty),
            };
            return Ok(Value::Scalar(v));
        }
        let mut dims = Vec::new();
        for d in &dc.dims {
            match self.eval(d)? {
                Scalar::Int(n) if n >= 0 => dims.push(n as usize),
                other => {
                    return Err(EvalError::TypeError(format!(
                        "bad extent {other:?} for `{}`",
                        dc.name
                    )))
                }
            }
        }
        if dc.init.is_some() {
            return Err(EvalError::TypeError(format!(
                "array `{}` with initializer",
                dc.name
            )));
        }
        let n: usize = dims.iter().product();
        Ok(Value::Array {
            dims,
            data: vec![Scalar::zero(ty); n],
        })
    }

    fn exec(&mut self, s: &'a Stmt) -> Result<Flow, EvalError> {
        self.enter_stmt(s);
        let r = self.exec_inner(s);
        self.exit_stmt(s);
        r
    }

    fn exec_body(&mut self, items: &'a [Stmt]) -> Result<Flow, EvalError> {
        self.scopes.push(BTreeMap::new());
        for c in items {
            match self.exec(c) {
                Ok(Flow::Normal) => {}
                other => {
                    self.scopes.pop();
                    return other;
                }
            }
        }
        self.scopes.pop();
        Ok(Flow::Normal)
    }

    fn exec_inner(&mut self, s: &'a Stmt) -> Result<Flow, EvalError> {
        self.tick()?;
        match &s.kind {
            StmtKind::Decl(d) => {
                for dc in &d.declarators {
                    let value = self.make_value(d.ty, dc)?;
                    let v = if let Value::Scalar(x) = &value {
                        Some(*x)
                    } else {
                        None
                    };
                    let scope = self
                        .scopes
                        .last_mut()
                        .expect("local declaration outside a scope");
                    scope.insert(
                        dc.name.clone(),
                        Slot {
                            ty: Some(d.ty),
                            value,
                        },
                    );
                    self.note(AccessKind::Write, &dc.name, &[], v);
                }
                Ok(Flow::Normal)
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
                Ok(Flow::Normal)
            }
            StmtKind::Block(items) => self.exec_body(items),
            StmtKind::If { cond, then, els } => {
                if self.eval(cond)?.truthy() {
                    self.exec_scoped(then)
                } else if let Some(e) = els {
                    self.exec_scoped(e)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval(cond)?.truthy() {
                    self.tick()?;
                    if let Flow::Return(v) = self.exec_scoped(body)? {
                        return Ok(Flow::Return(v));
                    }
                }
                Ok(Flow::Normal)
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                self.scopes.push(BTreeMap::new());
                let r = self.run_for(init, cond, step, body);
                self.scopes.pop();
                r
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e)?,
                    None => Scalar::Int(0),
                };
                Ok(Flow::Return(v))
            }
            StmtKind::Func(f) => Err(EvalError::TypeError(format!(
                "nested function `{}`",
                f.name
            ))),
            StmtKind::Meta(n) | StmtKind::MetaSeq(n) => Err(EvalError::Template(n.clone())),
            StmtKind::Subs { .. } => Err(EvalError::Template("subs".into())),
        }
    }

    fn run_for(
        &mut self,
        init: &'a Stmt,
        cond: &'a Expr,
        step: &'a Expr,
        body: &'a Stmt,
    ) -> Result<Flow, EvalError> {
        self.exec(init)?;
        while self.eval(cond)?.truthy() {
            self.tick()?;
            if let Flow::Return(v) = self.exec_scoped(body)? {
                return Ok(Flow::Return(v));
            }
            self.eval(step)?;
        }
        Ok(Flow::Normal)
    }

    fn exec_scoped(&mut self, s: &'a Stmt) -> Result<Flow, EvalError> {
        self.scopes.push(BTreeMap::new());
        let r = self.exec(s);
        self.scopes.pop();
        r
    }

    fn eval(&mut self, e: &'a Expr) -> Result<Scalar, EvalError> {
        if let Some(o) = self.obs.as_deref_mut() {
            o.enter_expr(e);
        }
        let r = self.eval_inner(e);
        if let Some(o) = self.obs.as_deref_mut() {
            o.exit_expr(e);
        }
        r
    }

    fn indices(&mut self, idx: &'a [Expr]) -> Result<Vec<i64>, EvalError> {
        let mut out = Vec::new();
        for i in idx {
            match self.eval(i)? {
                Scalar::Int(v) => out.push(v),
                Scalar::Float(_) => {
                    return Err(EvalError::TypeError("non-integer array index".into()))
                }
            }
        }
        Ok(out)
    }

    fn read(&mut self, base: &str, idx: &[i64]) -> Result<Scalar, EvalError> {
        let slot = self
            .slot(base)
            .ok_or_else(|| EvalError::UnboundVariable(base.to_string()))?;
        let v = match (&slot.value, idx.is_empty()) {
            (Value::Scalar(s), true) => *s,
            (Value::Array { dims, data }, false) => data[flat(base, dims, idx)?],
            _ => {
                return Err(EvalError::TypeError(format!(
                    "rank mismatch reading `{base}`"
                )))
            }
        };
        self.note(AccessKind::Read, base, idx, Some(v));
        Ok(v)
    }

    fn write(&mut self, base: &str, idx: &[i64], v: Scalar) -> Result<Scalar, EvalError> {
        let stored = match self.slot(base) {
            Some(slot) => {
                let v = match slot.ty {
                    Some(t) => v.convert(t),
                    None => match &slot.value {
                        Value::Scalar(old) => v.convert(old.ty()),
                        Value::Array { data, .. } => {
                            v.convert(data.first().map_or(v.ty(), |s| s.ty()))
                        }
                    },
                };
                match (&mut slot.value, idx.is_empty()) {
                    (Value::Scalar(s), true) => *s = v,
                    (Value::Array { dims, data }, false) => {
                        let k = flat(base, dims, idx)?;
                        data[k] = v;
                    }
                    _ => {
                        return Err(EvalError::TypeError(format!(
                            "rank mismatch writing `{base}`"
                        )))
                    }
                }
                v
            }
            None if idx.is_empty() => {
                self.globals.insert(
                    base.to_string(),
                    Slot {
                        ty: None,
                        value: Value::Scalar(v),
                    },
                );
                v
            }
            None => return Err(EvalError::UnboundVariable(base.to_string())),
        };
        self.note(AccessKind::Write, base, idx, Some(stored));
        Ok(stored)
    }

    fn lvalue(&mut self, e: &'a Expr) -> Result<(&'a str, Vec<i64>), EvalError> {
        match e {
            Expr::Var(n) => Ok((n, Vec::new())),
            Expr::Index(n, idx) => Ok((n, self.indices(idx)?)),
            _ => Err(EvalError::TypeError("assignment to a non-location".into())),
        }
    }

    fn eval_inner(&mut self, e: &'a Expr) -> Result<Scalar, EvalError> {
        match e {
            Expr::Int(v) => Ok(Scalar::Int(*v)),
            Expr::Float(s) => {
                let t = s.trim_end_matches(['f', 'F', 'l', 'L']);
                t.parse::<f64>()
                    .map(Scalar::Float)
                    .map_err(|_| EvalError::TypeError(format!("bad literal {s}")))
            }
            Expr::Var(n) => self.read(n, &[]),
            Expr::Index(n, idx) => {
                let i = self.indices(idx)?;
                self.read(n, &i)
            }
            Expr::Unary(op, x) => match op {
                UnOp::Neg => Ok(match self.eval(x)? {
                    Scalar::Int(v) => Scalar::Int(v.wrapping_neg()),
                    Scalar::Float(v) => Scalar::Float(-v),
                }),
                UnOp::Not => Ok(Scalar::Int(!self.eval(x)?.truthy() as i64)),
                _ => {
                    let (base, idx) = self.lvalue(x)?;
                    let old = self.read(base, &idx)?;
                    let delta = if matches!(op, UnOp::PreInc | UnOp::PostInc) {
                        1
                    } else {
                        -1
                    };
                    let new = arith(BinOp::Add, old, Scalar::Int(delta))?;
                    let stored = self.write(base, &idx, new)?;
                    Ok(if matches!(op, UnOp::PreInc | UnOp::PreDec) {
                        stored
                    } else {
                        old
                    })
                }
            },
            Expr::Binary(BinOp::And, l, r) => {
                let v = self.eval(l)?.truthy() && self.eval(r)?.truthy();
                Ok(Scalar::Int(v as i64))
            }
            Expr::Binary(BinOp::Or, l, r) => {
                let v = self.eval(l)?.truthy() || self.eval(r)?.truthy();
                Ok(Scalar::Int(v as i64))
            }
            Expr::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                arith(*op, a, b)
            }
            Expr::Assign(l, r) => {
                let v = self.eval(r)?;
                let (base, idx) = self.lvalue(l)?;
                self.write(base, &idx, v)
            }
            Expr::AugAssign(op, l, r) => {
                let (base, idx) = self.lvalue(l)?;
                let old = self.read(base, &idx)?;
                let v = self.eval(r)?;
                let new = arith(*op, old, v)?;
                self.write(base, &idx, new)
            }
            Expr::Call(name, args) => self.call(name, args),
            Expr::Meta(n) | Expr::FreshVar(n) => Err(EvalError::Template(n.clone())),
            Expr::BinOper(..) => Err(EvalError::Template("bin_oper".into())),
            Expr::Subs(..) => Err(EvalError::Template("subs".into())),
        }
    }

    fn call(&mut self, name: &str, args: &'a [Expr]) -> Result<Scalar, EvalError> {
        let f = *self
            .funcs
            .get(name)
            .ok_or_else(|| EvalError::UnboundVariable(name.to_string()))?;
        if f.params.len() != args.len() {
            return Err(EvalError::TypeError(format!(
                "`{name}` expects {} arguments",
                f.params.len()
            )));
        }
        let mut frame = BTreeMap::new();
        for (p, a) in f.params.iter().zip(args) {
            let v = self.eval(a)?.convert(p.ty);
            frame.insert(
                p.name.clone(),
                Slot {
                    ty: Some(p.ty),
                    value: Value::Scalar(v),
                },
            );
        }
        self.tick()?;
        let saved = std::mem::replace(&mut self.scopes, vec![frame]);
        let saved_base = self.frame_base;
        self.frame_base = FRAME_DEPTH * (saved_base / FRAME_DEPTH + 1);
        let r = self.exec_body(&f.body);
        self.scopes = saved;
        self.frame_base = saved_base;
        match r? {
            Flow::Return(v) => Ok(v.convert(f.ret)),
            Flow::Normal => Ok(Scalar::zero(f.ret)),
        }
    }
}

fn flat(base: &str, dims: &[usize], idx: &[i64]) -> Result<usize, EvalError> {
    let oob = || EvalError::OutOfBounds {
        array: base.to_string(),
        index: idx.to_vec(),
    };
    if dims.len() != idx.len() {
        return Err(EvalError::TypeError(format!(
            "rank mismatch indexing `{base}`"
        )));
    }
    let mut k = 0usize;
    for (d, i) in dims.iter().zip(idx) {
        if *i < 0 || *i as usize >= *d {
            return Err(oob());
        }
        k = k * d + *i as usize;
    }
    Ok(k)
}

fn conform(name: &str, ty: CType, given: &Value, fresh: &Value) -> Result<Value, EvalError> {
    match (given, fresh) {
        (Value::Scalar(s), Value::Scalar(_)) => Ok(Value::Scalar(s.convert(ty))),
        (Value::Array { dims, data }, Value::Array { dims: want, .. }) if dims == want => {
            Ok(Value::Array {
                dims: dims.clone(),
                data: data.iter().map(|s| s.convert(ty)).collect(),
            })
        }
        _ => Err(EvalError::ShapeMismatch(name.to_string())),
    }
}

fn arith(op: BinOp, a: Scalar, b: Scalar) -> Result<Scalar, EvalError> {
    use Scalar::*;
    let cmp = |r: bool| Ok(Int(r as i64));
    match (a, b) {
        (Int(x), Int(y)) => match op {
            BinOp::Add => Ok(Int(x.wrapping_add(y))),
            BinOp::Sub => Ok(Int(x.wrapping_sub(y))),
            BinOp::Mul => Ok(Int(x.wrapping_mul(y))),
            BinOp::Div if y == 0 => Err(EvalError::DivisionByZero),
            BinOp::Div => Ok(Int(x.wrapping_div(y))),
            BinOp::Rem if y == 0 => Err(EvalError::DivisionByZero),
            BinOp::Rem => Ok(Int(x.wrapping_rem(y))),
            BinOp::Lt => cmp(x < y),
            BinOp::Le => cmp(x <= y),
            BinOp::Gt => cmp(x > y),
            BinOp::Ge => cmp(x >= y),
            BinOp::Eq => cmp(x == y),
            BinOp::Ne => cmp(x != y),
            BinOp::And => cmp(x != 0 && y != 0),
            BinOp::Or => cmp(x != 0 || y != 0),
        },
        _ => {
            let (x, y) = (a.as_f64(), b.as_f64());
            match op {
                BinOp::Add => Ok(Float(x + y)),
                BinOp::Sub => Ok(Float(x - y)),
                BinOp::Mul => Ok(Float(x * y)),
                BinOp::Div => Ok(Float(x / y)),
                BinOp::Rem => Err(EvalError::TypeError("`%` on floating operands".into())),
                BinOp::Lt => cmp(x < y),
                BinOp::Le => cmp(x <= y),
                BinOp::Gt => cmp(x > y),
                BinOp::Ge => cmp(x >= y),
                BinOp::Eq => cmp(x == y),
                BinOp::Ne => cmp(x != y),
                BinOp::And => cmp(x != 0.0 && y != 0.0),
                BinOp::Or => cmp(x != 0.0 || y != 0.0),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c::parse_c;

    fn env(pairs: &[(&str, Value)]) -> Env {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    #[test]
    fn scaled_sum_of_two_loops() {
        let p = parse_c(
            "float c[N], v[N], a, b;
             for(int i=0;i<N;i++) c[i] = a*v[i];
             for(int i=0;i<N;i++) c[i] += b*v[i];",
        )
        .unwrap();
        let out = evaluate(
            &p,
            &env(&[
                ("N", Value::int(4)),
                ("a", Value::float(2.0)),
                ("b", Value::float(3.0)),
                ("v", Value::floats([1.0, 2.0, 3.0, 4.0])),
            ]),
        )
        .unwrap();
        assert_eq!(out["c"], Value::floats([5.0, 10.0, 15.0, 20.0]));
    }

    #[test]
    fn assignment_overwrites_input() {
        let p = parse_c("int c[1]; c[0]=0;").unwrap();
        let out = evaluate(&p, &env(&[("c", Value::ints([7]))])).unwrap();
        assert_eq!(out["c"], Value::ints([0]));
    }

    #[test]
    fn errors() {
        let p = parse_c("int c[2]; c[2] = 1;").unwrap();
        assert!(matches!(
            evaluate(&p, &Env::new()),
            Err(EvalError::OutOfBounds { .. })
        ));
        let p = parse_c("int x; while (1) x++;").unwrap();
        assert!(matches!(
            evaluate(&p, &Env::new()),
            Err(EvalError::StepBudgetExceeded(_))
        ));
        let p = parse_c("int x; x = y;").unwrap();
        assert_eq!(
            evaluate(&p, &Env::new()),
            Err(EvalError::UnboundVariable("y".into()))
        );
        let p = parse_c("int x; x = 1 / x;").unwrap();
        assert_eq!(evaluate(&p, &Env::new()), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn int_arithmetic_wraps() {
        let p = parse_c("int x; x = x * 2;").unwrap();
        let out = evaluate(&p, &env(&[("x", Value::int(i64::MAX))])).unwrap();
        assert_eq!(out["x"], Value::int(-2));
    }

    #[test]
    fn functions_and_implicit_globals() {
        let p = parse_c(
            "float sq(float x) { return x*x; }
             float y;
             t = 3;
             y = sq(t) + 1;",
        )
        .unwrap();
        let out = evaluate(&p, &Env::new()).unwrap();
        assert_eq!(out["y"], Value::float(10.0));
        assert_eq!(out["t"], Value::int(3));
    }

    #[test]
    fn two_dimensional_arrays() {
        let p =
            parse_c("float m[2][3]; for(int i=0;i<2;i++) for(int j=0;j<3;j++) m[i][j] = i*3 + j;")
                .unwrap();
        let out = evaluate(&p, &Env::new()).unwrap();
        assert_eq!(out["m"].to_f64s(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }
}
