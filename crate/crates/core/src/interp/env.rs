//! Standard call-by-value environment/closure interpreter, extended with
//! eager operators, records and conditionals. Serves as the reference
//! oracle for the demand interpreters.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::syntax::{Label, Node, Program, Sym};

use super::value::{apply_op, EvalError, Value};

/// Persistent environment: head is the local variable, outer scopes follow.
pub type Env = Option<Arc<EnvFrame>>;

#[derive(Debug)]
pub struct EnvFrame {
    name: Sym,
    val: EnvValue,
    rest: Env,
}

#[derive(Debug, Clone)]
pub enum EnvValue {
    Int(BigInt),
    Bool(bool),
    Closure(Label, Env),
    Record(Vec<(Sym, EnvValue)>),
}

impl EnvValue {
    /// Comparison view: closures collapse to their function label.
    pub fn to_value(&self) -> Value {
        match self {
            EnvValue::Int(n) => Value::Int(n.clone()),
            EnvValue::Bool(b) => Value::Bool(*b),
            EnvValue::Closure(l, _) => Value::Fun(*l),
            EnvValue::Record(fields) => Value::Record(
                fields.iter().map(|(n, v)| (n.clone(), v.to_value())).collect::<BTreeMap<_, _>>(),
            ),
        }
    }

    pub fn is_closure_of(&self, l: Label) -> bool {
        matches!(self, EnvValue::Closure(cl, _) if *cl == l)
    }
}

pub fn eval_env(p: &Program, fuel: u64) -> Result<EnvValue, EvalError> {
    super::on_big_stack(|| {
        let mut e = EnvInterp { p, fuel, depth: 0 };
        e.eval(p.root(), &None)
    })
}

struct EnvInterp<'a> {
    p: &'a Program,
    fuel: u64,
    depth: u32,
}

impl<'a> EnvInterp<'a> {
    fn burn(&mut self, l: Label) -> Result<(), EvalError> {
        if self.fuel == 0 {
            return Err(EvalError::FuelExhausted { label: l, stack: "[]".into() });
        }
        self.fuel -= 1;
        Ok(())
    }

    fn stuck(&self, l: Label, reason: impl Into<String>) -> EvalError {
        EvalError::Stuck { label: l, stack: "[]".into(), reason: reason.into() }
    }

    fn eval(&mut self, l: Label, env: &Env) -> Result<EnvValue, EvalError> {
        self.depth += 1;
        if self.depth > super::MAX_DEPTH {
            return Err(EvalError::DepthExceeded { label: l, stack: "[]".into() });
        }
        let r = self.eval_at(l, env);
        self.depth -= 1;
        r
    }

    fn eval_at(&mut self, l: Label, env: &Env) -> Result<EnvValue, EvalError> {
        self.burn(l)?;
        match self.p.node(l).clone() {
            Node::Fun { .. } => Ok(EnvValue::Closure(l, env.clone())),
            Node::Int(n) => Ok(EnvValue::Int(n)),
            Node::Bool(b) => Ok(EnvValue::Bool(b)),
            Node::Var { name } => {
                let mut cur = env;
                while let Some(frame) = cur {
                    if frame.name == name {
                        return Ok(frame.val.clone());
                    }
                    cur = &frame.rest;
                }
                Err(self.stuck(l, format!("variable `{name}` not in environment")))
            }
            Node::App { func, arg } => {
                let f = self.eval(func, env)?;
                let a = self.eval(arg, env)?;
                match f {
                    EnvValue::Closure(fl, fenv) => {
                        let (param, body) = match self.p.node(fl) {
                            Node::Fun { param, body } => (param.clone(), *body),
                            _ => unreachable!(),
                        };
                        let inner = Some(Arc::new(EnvFrame { name: param, val: a, rest: fenv }));
                        self.eval(body, &inner)
                    }
                    _ => Err(self.stuck(l, "applying a non-function")),
                }
            }
            Node::Op { op, lhs, rhs } => {
                let a = self.eval(lhs, env)?.to_value();
                let b = self.eval(rhs, env)?.to_value();
                Ok(from_value(apply_op(op, &a, &b)?))
            }
            Node::If { cond, then_branch, else_branch } => match self.eval(cond, env)? {
                EnvValue::Bool(true) => self.eval(then_branch, env),
                EnvValue::Bool(false) => self.eval(else_branch, env),
                _ => Err(self.stuck(l, "conditional guard is not a boolean")),
            },
            Node::Record(fields) => {
                let mut out = Vec::with_capacity(fields.len());
                for (name, fl) in fields {
                    out.push((name, self.eval(fl, env)?));
                }
                Ok(EnvValue::Record(out))
            }
            Node::Proj { rec, field } => match self.eval(rec, env)? {
                EnvValue::Record(fields) => fields
                    .iter()
                    .find(|(n, _)| *n == field)
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| self.stuck(l, format!("record has no field `{field}`"))),
                _ => Err(self.stuck(l, format!("projecting `{field}` from a non-record"))),
            },
            Node::Inspect { field, rec } => match self.eval(rec, env)? {
                EnvValue::Record(fields) => {
                    Ok(EnvValue::Bool(fields.iter().any(|(n, _)| *n == field)))
                }
                _ => Err(self.stuck(l, "inspecting a non-record")),
            },
            Node::LetAssert { bound, .. } => self.eval(bound, env),
        }
    }
}

fn from_value(v: Value) -> EnvValue {
    match v {
        Value::Int(n) => EnvValue::Int(n),
        Value::Bool(b) => EnvValue::Bool(b),
        Value::Record(fields) => {
            EnvValue::Record(fields.into_iter().map(|(n, v)| (n, from_value(v))).collect())
        }
        Value::Fun(_) => unreachable!("operators never produce functions"),
    }
}
