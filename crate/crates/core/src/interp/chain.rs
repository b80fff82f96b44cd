//! Chaining-lookup semantics: a single Var rule performs all the lexical
//! scope chaining at once — n+1 function-position lookups (one per enclosing
//! level, including the binder's) followed by one argument evaluation.
//! Defined for the core language (functions, applications, variables) plus
//! bare literals.

use crate::stack::{StackId, StackInterner};
use crate::syntax::{Label, Node, Program};

use super::demand::EvalOutcome;
use super::value::{Counters, EvalError, ResVal};

pub fn eval_chain(p: &Program, fuel: u64) -> Result<EvalOutcome, EvalError> {
    super::on_big_stack(|| {
        let mut c = Chain { p, st: StackInterner::new(), fuel, depth: 0, counters: Counters::default() };
        let result = c.eval(p.root(), StackId::EMPTY)?;
        Ok(EvalOutcome { result, stacks: c.st, counters: c.counters, trace: Vec::new() })
    })
}

struct Chain<'a> {
    p: &'a Program,
    st: StackInterner,
    fuel: u64,
    depth: u32,
    counters: Counters,
}

impl<'a> Chain<'a> {
    fn burn(&mut self, l: Label, s: StackId) -> Result<(), EvalError> {
        self.counters.rule_firings += 1;
        if self.fuel == 0 {
            return Err(EvalError::FuelExhausted { label: l, stack: self.st.render(s) });
        }
        self.fuel -= 1;
        Ok(())
    }

    fn stuck(&self, l: Label, s: StackId, reason: impl Into<String>) -> EvalError {
        EvalError::Stuck { label: l, stack: self.st.render(s), reason: reason.into() }
    }

    /// Enclosing function labels from the nearest one out to the binder.
    fn binder_chain(&self, occ: Label) -> Vec<Label> {
        let binder = self.p.binder_of(occ).expect("validated variable occurrence");
        let mut chain = Vec::new();
        let mut cur = self.p.my_fun(occ).unwrap();
        while let Some(f) = cur {
            chain.push(f);
            if f == binder {
                break;
            }
            cur = self.p.my_fun(f).unwrap();
        }
        chain
    }

    fn eval(&mut self, l: Label, s: StackId) -> Result<ResVal, EvalError> {
        self.depth += 1;
        if self.depth > super::MAX_DEPTH {
            return Err(EvalError::DepthExceeded { label: l, stack: self.st.render(s) });
        }
        let r = self.eval_at(l, s);
        self.depth -= 1;
        r
    }

    fn eval_at(&mut self, l: Label, s: StackId) -> Result<ResVal, EvalError> {
        self.burn(l, s)?;
        match self.p.node(l).clone() {
            Node::Fun { .. } => Ok(ResVal::Fun(l, s)),
            Node::Int(n) => Ok(ResVal::Int(n)),
            Node::Bool(b) => Ok(ResVal::Bool(b)),
            Node::App { func, arg } => {
                self.counters.app_firings += 1;
                let rf = self.eval(func, s)?;
                let fun_label = match rf {
                    ResVal::Fun(fl, _) => fl,
                    _ => return Err(self.stuck(l, s, "applying a non-function")),
                };
                self.eval(arg, s)?;
                let body = match self.p.node(fun_label) {
                    Node::Fun { body, .. } => *body,
                    _ => unreachable!(),
                };
                let inner = self.st.push(l, s);
                self.eval(body, inner)
            }
            Node::Var { .. } => {
                let chain = self.binder_chain(l);
                let n = chain.len();
                debug_assert_eq!(n as u32, self.p.lexical_depth(l).unwrap() + 1);
                let mut cur = s;
                let mut frame_for_arg = None;
                for (i, &expected_fun) in chain.iter().enumerate() {
                    self.counters.var_nonlocal += u64::from(i > 0);
                    self.counters.var_local += u64::from(i == 0);
                    let (frame, rest) = self
                        .st
                        .pop(cur)
                        .ok_or_else(|| self.stuck(l, cur, "variable lookup on an empty stack"))?;
                    let func = match self.p.node(frame) {
                        Node::App { func, .. } => *func,
                        _ => return Err(self.stuck(l, cur, "stack frame is not an application")),
                    };
                    self.counters.nonlocal_reevals += 1;
                    let rf = self.eval(func, rest)?;
                    let (fl, fs) = match rf {
                        ResVal::Fun(fl, fs) => (fl, fs),
                        _ => return Err(self.stuck(l, cur, "function position is not a function")),
                    };
                    if fl != expected_fun {
                        return Err(self.stuck(
                            l,
                            cur,
                            "chained lookup reached a different function than expected",
                        ));
                    }
                    if i + 1 == n {
                        frame_for_arg = Some((frame, rest));
                    } else {
                        cur = fs;
                    }
                }
                let (frame, rest) = frame_for_arg.expect("chain is nonempty");
                let arg = match self.p.node(frame) {
                    Node::App { arg, .. } => *arg,
                    _ => unreachable!(),
                };
                self.eval(arg, rest)
            }
            other => Err(EvalError::Unsupported { label: l, what: other.kind_name() }),
        }
    }
}
