//! Result values shared by the interpreters, plus forcing of residuals.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::stack::{StackId, StackInterner};
use crate::syntax::{BinOp, Label, Sym};

/// Result of the demand-style interpreters. Operators, projections and
/// inspections are kept as residuals; [`force`] reduces them when a ground
/// value is needed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ResVal {
    /// Function value: node label plus the stack at definition time.
    Fun(Label, StackId),
    Int(BigInt),
    Bool(bool),
    Op(Box<ResVal>, BinOp, Box<ResVal>),
    /// Fields in source order.
    Record(Vec<(Sym, ResVal)>),
    Proj(Box<ResVal>, Sym),
    Inspect(Sym, Box<ResVal>),
}

/// Fully forced value: no residuals, no stacks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Fun(Label),
    Record(BTreeMap<Sym, Value>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("fuel exhausted at label {label} with stack {stack} (possible divergence)")]
    FuelExhausted { label: Label, stack: String },
    #[error("recursion depth limit reached at label {label} with stack {stack} (possible divergence)")]
    DepthExceeded { label: Label, stack: String },
    #[error("stuck at label {label} with stack {stack}: {reason}")]
    Stuck { label: Label, stack: String, reason: String },
    #[error("type mismatch: {0}")]
    Type(String),
    #[error("label {label}: {what} unsupported in this semantics")]
    Unsupported { label: Label, what: &'static str },
}

/// Instrumentation totals for one evaluation run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counters {
    pub rule_firings: u64,
    pub app_firings: u64,
    pub var_local: u64,
    pub var_nonlocal: u64,
    pub cache_hits: u64,
    /// Times a cache entry was recomputed; must stay 0 when caching is on.
    pub double_evals: u64,
    /// Recursive function-position evaluations performed by non-local
    /// variable lookup (stays 0 in the optimized-frames semantics).
    pub nonlocal_reevals: u64,
}

/// Apply a binary operator to ground values.
pub fn apply_op(op: BinOp, l: &Value, r: &Value) -> Result<Value, EvalError> {
    use BinOp::*;
    match (op, l, r) {
        (Add, Value::Int(a), Value::Int(b)) => Ok(Value::Int(a + b)),
        (Sub, Value::Int(a), Value::Int(b)) => Ok(Value::Int(a - b)),
        (Eq, Value::Int(a), Value::Int(b)) => Ok(Value::Bool(a == b)),
        (Eq, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a == b)),
        (Lt, Value::Int(a), Value::Int(b)) => Ok(Value::Bool(a < b)),
        (Le, Value::Int(a), Value::Int(b)) => Ok(Value::Bool(a <= b)),
        (Ge, Value::Int(a), Value::Int(b)) => Ok(Value::Bool(a >= b)),
        (And, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(*a && *b)),
        (Or, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(*a || *b)),
        (Xor, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a != b)),
        _ => Err(EvalError::Type(format!(
            "operator {} undefined on these operand kinds",
            op.symbol()
        ))),
    }
}

/// Reduce a residual result to a ground value. Functions drop their stacks.
pub fn force(r: &ResVal) -> Result<Value, EvalError> {
    match r {
        ResVal::Fun(l, _) => Ok(Value::Fun(*l)),
        ResVal::Int(n) => Ok(Value::Int(n.clone())),
        ResVal::Bool(b) => Ok(Value::Bool(*b)),
        ResVal::Op(a, op, b) => apply_op(*op, &force(a)?, &force(b)?),
        ResVal::Record(fields) => {
            let mut out = BTreeMap::new();
            for (name, v) in fields {
                out.insert(name.clone(), force(v)?);
            }
            Ok(Value::Record(out))
        }
        ResVal::Proj(rec, field) => match force(rec)? {
            Value::Record(fields) => fields
                .get(field)
                .cloned()
                .ok_or_else(|| EvalError::Type(format!("record has no field `{field}`"))),
            _ => Err(EvalError::Type(format!("projecting `{field}` from a non-record"))),
        },
        ResVal::Inspect(field, rec) => match force(rec)? {
            Value::Record(fields) => Ok(Value::Bool(fields.contains_key(field))),
            _ => Err(EvalError::Type("inspecting a non-record".into())),
        },
    }
}

/// Human-readable rendering; functions print as `<fun@label [stack]>`.
pub fn render_resval(r: &ResVal, st: &StackInterner) -> String {
    match r {
        ResVal::Fun(l, s) => format!("<fun@{} {}>", l, st.render(*s)),
        ResVal::Int(n) => n.to_string(),
        ResVal::Bool(b) => b.to_string(),
        ResVal::Op(a, op, b) => format!(
            "({} {} {})",
            render_resval(a, st),
            op.symbol(),
            render_resval(b, st)
        ),
        ResVal::Record(fields) => {
            let parts: Vec<String> = fields
                .iter()
                .map(|(n, v)| format!("{} = {}", n, render_resval(v, st)))
                .collect();
            format!("{{{}}}", parts.join("; "))
        }
        ResVal::Proj(rec, f) => format!("({}.{})", render_resval(rec, st), f),
        ResVal::Inspect(f, rec) => format!("({} in {})", f, render_resval(rec, st)),
    }
}

pub fn render_value(v: &Value) -> String {
    match v {
        Value::Int(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Fun(l) => format!("<fun@{l}>"),
        Value::Record(fields) => {
            let parts: Vec<String> =
                fields.iter().map(|(n, v)| format!("{} = {}", n, render_value(v))).collect();
            format!("{{{}}}", parts.join("; "))
        }
    }
}
