//! Optimized-frames semantics: each stack frame carries the value of the
//! calling function alongside the call-site label, so non-local variable
//! lookup reads the carried value instead of re-evaluating the function
//! position. Frames are `(call site, fun label, fun's defining stack)`.

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::stack::StackInterner;
use crate::syntax::{Label, Node, Program};

use super::demand::EvalOutcome;
use super::value::{Counters, EvalError, ResVal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct OStackId(u32);

const EMPTY: OStackId = OStackId(0);

/// One frame: the application label plus the calling function's value.
type Frame = (Label, Label, OStackId);

#[derive(Debug, Default)]
struct OStacks {
    nodes: Vec<Option<(Frame, OStackId)>>,
    map: HashMap<(Frame, OStackId), OStackId>,
}

impl OStacks {
    fn new() -> Self {
        OStacks { nodes: vec![None], map: HashMap::new() }
    }

    fn push(&mut self, frame: Frame, tail: OStackId) -> OStackId {
        if let Some(&id) = self.map.get(&(frame, tail)) {
            return id;
        }
        let id = OStackId(self.nodes.len() as u32);
        self.nodes.push(Some((frame, tail)));
        self.map.insert((frame, tail), id);
        id
    }

    fn pop(&self, s: OStackId) -> Option<(Frame, OStackId)> {
        self.nodes[s.0 as usize]
    }

    fn call_sites(&self, s: OStackId) -> Vec<Label> {
        let mut out = Vec::new();
        let mut cur = s;
        while let Some(((site, _, _), rest)) = self.pop(cur) {
            out.push(site);
            cur = rest;
        }
        out
    }
}

#[derive(Debug, Clone)]
enum OVal {
    Int(BigInt),
    Bool(bool),
    Fun(Label, OStackId),
}

pub fn eval_optimized(p: &Program, fuel: u64) -> Result<EvalOutcome, EvalError> {
    super::on_big_stack(|| eval_optimized_impl(p, fuel))
}

fn eval_optimized_impl(p: &Program, fuel: u64) -> Result<EvalOutcome, EvalError> {
    let mut o = OptInterp { p, os: OStacks::new(), fuel, depth: 0, counters: Counters::default() };
    let v = o.eval(p.root(), EMPTY)?;
    let mut st = StackInterner::new();
    let result = match v {
        OVal::Int(n) => ResVal::Int(n),
        OVal::Bool(b) => ResVal::Bool(b),
        OVal::Fun(l, s) => {
            let frames = o.os.call_sites(s);
            ResVal::Fun(l, st.from_frames(&frames))
        }
    };
    Ok(EvalOutcome { result, stacks: st, counters: o.counters, trace: Vec::new() })
}

struct OptInterp<'a> {
    p: &'a Program,
    os: OStacks,
    fuel: u64,
    depth: u32,
    counters: Counters,
}

impl<'a> OptInterp<'a> {
    fn burn(&mut self, l: Label) -> Result<(), EvalError> {
        self.counters.rule_firings += 1;
        if self.fuel == 0 {
            return Err(EvalError::FuelExhausted { label: l, stack: "[...]".into() });
        }
        self.fuel -= 1;
        Ok(())
    }

    fn stuck(&self, l: Label, reason: impl Into<String>) -> EvalError {
        EvalError::Stuck { label: l, stack: "[...]".into(), reason: reason.into() }
    }

    fn eval(&mut self, l: Label, s: OStackId) -> Result<OVal, EvalError> {
        self.depth += 1;
        if self.depth > super::MAX_DEPTH {
            return Err(EvalError::DepthExceeded { label: l, stack: "[...]".into() });
        }
        let r = self.eval_at(l, s);
        self.depth -= 1;
        r
    }

    fn eval_at(&mut self, l: Label, s: OStackId) -> Result<OVal, EvalError> {
        self.burn(l)?;
        match self.p.node(l).clone() {
            Node::Fun { .. } => Ok(OVal::Fun(l, s)),
            Node::Int(n) => Ok(OVal::Int(n)),
            Node::Bool(b) => Ok(OVal::Bool(b)),
            Node::App { func, arg } => {
                self.counters.app_firings += 1;
                let f = self.eval(func, s)?;
                let (fl, fs) = match f {
                    OVal::Fun(fl, fs) => (fl, fs),
                    _ => return Err(self.stuck(l, "applying a non-function")),
                };
                self.eval(arg, s)?;
                let body = match self.p.node(fl) {
                    Node::Fun { body, .. } => *body,
                    _ => unreachable!(),
                };
                let inner = self.os.push((l, fl, fs), s);
                self.eval(body, inner)
            }
            Node::Var { name } => self.lookup(&name, l, s),
            other => Err(EvalError::Unsupported { label: l, what: other.kind_name() }),
        }
    }

    /// Variable lookup viewed from context `ctx` (the occurrence, or the
    /// function label the search was renamed to). Non-local steps use the
    /// carried frame value and perform no re-evaluation.
    fn lookup(&mut self, name: &str, ctx: Label, s: OStackId) -> Result<OVal, EvalError> {
        let mf = self
            .p
            .my_fun(ctx)
            .ok()
            .flatten()
            .ok_or_else(|| self.stuck(ctx, format!("variable `{name}` has no enclosing function")))?;
        let mf_param = match self.p.node(mf) {
            Node::Fun { param, .. } => param.clone(),
            _ => unreachable!(),
        };
        let ((site, carried_fun, carried_stack), rest) = self
            .os
            .pop(s)
            .ok_or_else(|| self.stuck(ctx, "variable lookup on an empty stack"))?;
        if mf_param == name {
            self.counters.var_local += 1;
            let arg = match self.p.node(site) {
                Node::App { arg, .. } => *arg,
                _ => return Err(self.stuck(ctx, "top stack frame is not an application")),
            };
            self.eval(arg, rest)
        } else {
            self.counters.var_nonlocal += 1;
            if carried_fun != mf {
                return Err(self.stuck(
                    ctx,
                    "carried frame value is not the enclosing function",
                ));
            }
            self.burn(ctx)?;
            self.lookup(name, carried_fun, carried_stack)
        }
    }
}
