//! Display semantics: instead of chaining backwards at lookup time, every
//! call pushes forward a display — a list of frames, one per lexical level,
//! each frame holding the application node and the display saved when that
//! call was made. A variable at lexical depth m reads frame m and evaluates
//! that frame's argument under the saved display.

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::stack::StackInterner;
use crate::syntax::{Label, Node, Program};

use super::demand::EvalOutcome;
use super::value::{Counters, EvalError, ResVal};

/// Interned display: cons list of frames `(application label, saved display)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct DisplayId(u32);

const EMPTY: DisplayId = DisplayId(0);

#[derive(Debug, Default)]
struct Displays {
    nodes: Vec<Option<((Label, DisplayId), DisplayId)>>,
    map: HashMap<((Label, DisplayId), DisplayId), DisplayId>,
}

impl Displays {
    fn new() -> Self {
        Displays { nodes: vec![None], map: HashMap::new() }
    }

    fn push(&mut self, frame: (Label, DisplayId), tail: DisplayId) -> DisplayId {
        if let Some(&id) = self.map.get(&(frame, tail)) {
            return id;
        }
        let id = DisplayId(self.nodes.len() as u32);
        self.nodes.push(Some((frame, tail)));
        self.map.insert((frame, tail), id);
        id
    }

    fn get(&self, d: DisplayId, index: u32) -> Option<(Label, DisplayId)> {
        let mut cur = d;
        for _ in 0..index {
            cur = self.nodes[cur.0 as usize]?.1;
        }
        self.nodes[cur.0 as usize].map(|(f, _)| f)
    }

    fn frame_labels(&self, d: DisplayId) -> Vec<Label> {
        let mut out = Vec::new();
        let mut cur = d;
        while let Some((frame, rest)) = self.nodes[cur.0 as usize] {
            out.push(frame.0);
            cur = rest;
        }
        out
    }
}

#[derive(Debug, Clone)]
enum DVal {
    Int(BigInt),
    Bool(bool),
    Fun(Label, DisplayId),
}

pub fn eval_display(p: &Program, fuel: u64) -> Result<EvalOutcome, EvalError> {
    super::on_big_stack(|| eval_display_impl(p, fuel))
}

fn eval_display_impl(p: &Program, fuel: u64) -> Result<EvalOutcome, EvalError> {
    let mut d = DisplayInterp { p, ds: Displays::new(), fuel, depth: 0, counters: Counters::default() };
    let v = d.eval(p.root(), EMPTY)?;
    // render the display's frame labels as the result's stack
    let mut st = StackInterner::new();
    let result = match v {
        DVal::Int(n) => ResVal::Int(n),
        DVal::Bool(b) => ResVal::Bool(b),
        DVal::Fun(l, disp) => {
            let frames = d.ds.frame_labels(disp);
            let s = st.from_frames(&frames);
            ResVal::Fun(l, s)
        }
    };
    Ok(EvalOutcome { result, stacks: st, counters: d.counters, trace: Vec::new() })
}

struct DisplayInterp<'a> {
    p: &'a Program,
    ds: Displays,
    fuel: u64,
    depth: u32,
    counters: Counters,
}

impl<'a> DisplayInterp<'a> {
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

    fn eval(&mut self, l: Label, d: DisplayId) -> Result<DVal, EvalError> {
        self.depth += 1;
        if self.depth > super::MAX_DEPTH {
            return Err(EvalError::DepthExceeded { label: l, stack: "[...]".into() });
        }
        let r = self.eval_at(l, d);
        self.depth -= 1;
        r
    }

    fn eval_at(&mut self, l: Label, d: DisplayId) -> Result<DVal, EvalError> {
        self.burn(l)?;
        match self.p.node(l).clone() {
            Node::Fun { .. } => Ok(DVal::Fun(l, d)),
            Node::Int(n) => Ok(DVal::Int(n)),
            Node::Bool(b) => Ok(DVal::Bool(b)),
            Node::App { func, arg } => {
                self.counters.app_firings += 1;
                let f = self.eval(func, d)?;
                let (fl, fd) = match f {
                    DVal::Fun(fl, fd) => (fl, fd),
                    _ => return Err(self.stuck(l, "applying a non-function")),
                };
                self.eval(arg, d)?;
                let body = match self.p.node(fl) {
                    Node::Fun { body, .. } => *body,
                    _ => unreachable!(),
                };
                let inner = self.ds.push((l, d), fd);
                self.eval(body, inner)
            }
            Node::Var { .. } => {
                let m = self.p.lexical_depth(l).unwrap();
                self.counters.var_local += u64::from(m == 0);
                self.counters.var_nonlocal += u64::from(m > 0);
                let (frame, saved) = self
                    .ds
                    .get(d, m)
                    .ok_or_else(|| self.stuck(l, "display shorter than lexical depth"))?;
                let arg = match self.p.node(frame) {
                    Node::App { arg, .. } => *arg,
                    _ => return Err(self.stuck(l, "display frame is not an application")),
                };
                self.eval(arg, saved)
            }
            other => Err(EvalError::Unsupported { label: l, what: other.kind_name() }),
        }
    }
}
