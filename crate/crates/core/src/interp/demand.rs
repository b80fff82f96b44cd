//! The pure demand interpreter.
//!
//! The only dynamic state is the call stack (a list of application-site
//! labels) and the program point under evaluation; variable values are
//! recomputed on demand by walking back through the stack. Non-local
//! variables re-run the function-position lookup of the top frame, then
//! continue the search relabeled to the function value's own label at its
//! definition-time stack.

use std::collections::HashMap;

use crate::stack::{StackId, StackInterner};
use crate::syntax::{Label, Node, Program, Sym};

use super::value::{force, Counters, EvalError, ResVal, Value};

#[derive(Debug, Clone)]
pub struct DemandOpts {
    /// Memoize `(stack, point) -> result` lookups and forced values.
    pub cache: bool,
    /// Skip the argument premise of Application (call-by-name-style trees).
    pub skip_arg: bool,
    /// Rule-firing budget before reporting possible divergence.
    pub fuel: u64,
    /// Nesting budget guarding the host stack; divergence that grows the
    /// derivation depth (rather than its breadth) trips this first.
    pub max_depth: u32,
    /// Record one line per rule firing: `RULE<TAB>label<TAB>stack`.
    pub trace: bool,
}

impl Default for DemandOpts {
    fn default() -> Self {
        DemandOpts { cache: true, skip_arg: false, fuel: 10_000_000, max_depth: 100_000, trace: false }
    }
}

/// Result of a demand run, with the interner needed to render stacks.
#[derive(Debug)]
pub struct EvalOutcome {
    pub result: ResVal,
    pub stacks: StackInterner,
    pub counters: Counters,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Node(Label),
    /// Variable lookup keyed by name and context label (the occurrence's own
    /// label, or the function label it was renamed to).
    Var(Sym, Label),
}

pub fn eval_demand(p: &Program, opts: &DemandOpts) -> Result<EvalOutcome, EvalError> {
    super::on_big_stack(|| {
        let mut d = Demand {
            p,
            st: StackInterner::new(),
            cache: HashMap::new(),
            force_cache: HashMap::new(),
            fuel: opts.fuel,
            depth: 0,
            opts: opts.clone(),
            counters: Counters::default(),
            trace: Vec::new(),
        };
        let result = d.eval(p.root(), StackId::EMPTY)?;
        Ok(EvalOutcome { result, stacks: d.st, counters: d.counters, trace: d.trace })
    })
}

struct Demand<'a> {
    p: &'a Program,
    st: StackInterner,
    cache: HashMap<(StackId, Key), ResVal>,
    force_cache: HashMap<ResVal, Value>,
    fuel: u64,
    depth: u32,
    opts: DemandOpts,
    counters: Counters,
    trace: Vec<String>,
}

impl<'a> Demand<'a> {
    fn fire(&mut self, rule: &str, l: Label, s: StackId) -> Result<(), EvalError> {
        self.counters.rule_firings += 1;
        if self.opts.trace {
            self.trace.push(format!("{rule}\t{l}\t{}", self.st.render(s)));
        }
        if self.fuel == 0 {
            return Err(EvalError::FuelExhausted { label: l, stack: self.st.render(s) });
        }
        self.fuel -= 1;
        Ok(())
    }

    fn stuck(&self, l: Label, s: StackId, reason: impl Into<String>) -> EvalError {
        EvalError::Stuck { label: l, stack: self.st.render(s), reason: reason.into() }
    }

    fn cached(&mut self, key: &(StackId, Key)) -> Option<ResVal> {
        if !self.opts.cache {
            return None;
        }
        let hit = self.cache.get(key).cloned();
        if hit.is_some() {
            self.counters.cache_hits += 1;
        }
        hit
    }

    fn store(&mut self, key: (StackId, Key), r: &ResVal) {
        if self.opts.cache && self.cache.insert(key, r.clone()).is_some() {
            self.counters.double_evals += 1;
        }
    }

    fn force(&mut self, r: &ResVal) -> Result<Value, EvalError> {
        if self.opts.cache {
            if let Some(v) = self.force_cache.get(r) {
                self.counters.cache_hits += 1;
                return Ok(v.clone());
            }
        }
        let v = force(r)?;
        if self.opts.cache {
            self.force_cache.insert(r.clone(), v.clone());
        }
        Ok(v)
    }

    fn eval(&mut self, l: Label, s: StackId) -> Result<ResVal, EvalError> {
        self.depth += 1;
        if self.depth > self.opts.max_depth {
            return Err(EvalError::DepthExceeded { label: l, stack: self.st.render(s) });
        }
        let r = self.eval_at(l, s);
        self.depth -= 1;
        r
    }

    fn eval_at(&mut self, l: Label, s: StackId) -> Result<ResVal, EvalError> {
        if let Node::Var { name } = self.p.node(l) {
            let name = name.clone();
            return self.lookup(&name, l, s);
        }
        let key = (s, Key::Node(l));
        if let Some(r) = self.cached(&key) {
            return Ok(r);
        }
        let r = match self.p.node(l).clone() {
            Node::Fun { .. } => {
                self.fire("Value Fun", l, s)?;
                ResVal::Fun(l, s)
            }
            Node::Int(n) => {
                self.fire("Value", l, s)?;
                ResVal::Int(n)
            }
            Node::Bool(b) => {
                self.fire("Value", l, s)?;
                ResVal::Bool(b)
            }
            Node::App { func, arg } => {
                self.fire("Application", l, s)?;
                self.counters.app_firings += 1;
                let rf = self.eval(func, s)?;
                let (fun_label, _) = self
                    .resolve_fun(&rf)
                    .ok_or_else(|| self.stuck(l, s, "applying a non-function"))?;
                if !self.opts.skip_arg {
                    self.eval(arg, s)?;
                }
                let body = match self.p.node(fun_label) {
                    Node::Fun { body, .. } => *body,
                    _ => unreachable!("function values label function nodes"),
                };
                let inner = self.st.push(l, s);
                self.eval(body, inner)?
            }
            Node::Op { op, lhs, rhs } => {
                self.fire("Operation", l, s)?;
                let r1 = self.eval(lhs, s)?;
                let r2 = self.eval(rhs, s)?;
                ResVal::Op(Box::new(r1), op, Box::new(r2))
            }
            Node::If { cond, then_branch, else_branch } => {
                self.fire("Conditional", l, s)?;
                let rc = self.eval(cond, s)?;
                match self.force(&rc)? {
                    Value::Bool(true) => self.eval(then_branch, s)?,
                    Value::Bool(false) => self.eval(else_branch, s)?,
                    _ => return Err(self.stuck(l, s, "conditional guard is not a boolean")),
                }
            }
            Node::Record(fields) => {
                self.fire("Record Value", l, s)?;
                let mut out = Vec::with_capacity(fields.len());
                for (name, fl) in fields {
                    out.push((name, self.eval(fl, s)?));
                }
                ResVal::Record(out)
            }
            Node::Proj { rec, field } => {
                self.fire("Record Project", l, s)?;
                let r = self.eval(rec, s)?;
                if let ResVal::Record(fs) = &r {
                    if !fs.iter().any(|(n, _)| *n == field) {
                        return Err(self.stuck(l, s, format!("record has no field `{field}`")));
                    }
                }
                ResVal::Proj(Box::new(r), field)
            }
            Node::Inspect { field, rec } => {
                self.fire("Record Inspect", l, s)?;
                let r = self.eval(rec, s)?;
                ResVal::Inspect(field, Box::new(r))
            }
            Node::LetAssert { bound, .. } => {
                // assertions are checked by the analysis, not the interpreter
                self.fire("Let Assert", l, s)?;
                self.eval(bound, s)?
            }
            Node::Var { .. } => unreachable!("handled above"),
        };
        self.store(key, &r);
        Ok(r)
    }

    /// Look up variable `name` viewed from context label `ctx` at stack `s`.
    fn lookup(&mut self, name: &str, ctx: Label, s: StackId) -> Result<ResVal, EvalError> {
        self.depth += 1;
        if self.depth > self.opts.max_depth {
            return Err(EvalError::DepthExceeded { label: ctx, stack: self.st.render(s) });
        }
        let r = self.lookup_at(name, ctx, s);
        self.depth -= 1;
        r
    }

    fn lookup_at(&mut self, name: &str, ctx: Label, s: StackId) -> Result<ResVal, EvalError> {
        let key = (s, Key::Var(name.to_string(), ctx));
        if let Some(r) = self.cached(&key) {
            return Ok(r);
        }
        let mf = self
            .p
            .my_fun(ctx)
            .ok()
            .flatten()
            .ok_or_else(|| self.stuck(ctx, s, format!("variable `{name}` has no enclosing function")))?;
        let mf_param = match self.p.node(mf) {
            Node::Fun { param, .. } => param.clone(),
            _ => unreachable!(),
        };
        let r = if mf_param == name {
            self.fire("Var Local", ctx, s)?;
            self.counters.var_local += 1;
            let (frame, rest) = self
                .st
                .pop(s)
                .ok_or_else(|| self.stuck(ctx, s, "variable lookup on an empty stack"))?;
            let arg = match self.p.node(frame) {
                Node::App { arg, .. } => *arg,
                _ => return Err(self.stuck(ctx, s, "top stack frame is not an application")),
            };
            self.eval(arg, rest)?
        } else {
            self.fire("Var Non-Local", ctx, s)?;
            self.counters.var_nonlocal += 1;
            self.counters.nonlocal_reevals += 1;
            let (frame, rest) = self
                .st
                .pop(s)
                .ok_or_else(|| self.stuck(ctx, s, "non-local lookup on an empty stack"))?;
            let func = match self.p.node(frame) {
                Node::App { func, .. } => *func,
                _ => return Err(self.stuck(ctx, s, "top stack frame is not an application")),
            };
            let rf = self.eval(func, rest)?;
            let (fun_label, fun_stack) = self
                .resolve_fun(&rf)
                .ok_or_else(|| self.stuck(ctx, s, "function position is not a function"))?;
            if fun_label != mf {
                return Err(self.stuck(
                    ctx,
                    s,
                    "non-local lookup reached a different function than the enclosing one",
                ));
            }
            self.lookup(name, fun_label, fun_stack)?
        };
        self.store(key, &r);
        Ok(r)
    }

    /// Reduce a result to a function value without dropping its stack,
    /// resolving projections through literal records.
    fn resolve_fun(&self, r: &ResVal) -> Option<(Label, StackId)> {
        match r {
            ResVal::Fun(l, s) => Some((*l, *s)),
            ResVal::Proj(rec, field) => self.resolve_fun(&resolve_field(rec, field)?),
            _ => None,
        }
    }
}

fn resolve_field(rec: &ResVal, field: &str) -> Option<ResVal> {
    match rec {
        ResVal::Record(fields) => fields.iter().find(|(n, _)| n == field).map(|(_, v)| v.clone()),
        ResVal::Proj(inner, f2) => match resolve_field(inner, f2)? {
            ResVal::Record(fields) => {
                fields.iter().find(|(n, _)| n == field).map(|(_, v)| v.clone())
            }
            _ => None,
        },
        _ => None,
    }
}
