//! Constrained Horn clauses from abstract results.
//!
//! An abstract result denotes a set of values per program state; encoding
//! each (sub)result as a unary predicate turns the recurrences cut by
//! stubs into recursive Horn clauses whose least model is exactly the
//! result's denotation. The system can be checked by any Horn solver
//! speaking SMT-LIB (`z3`, `eldarica`, ...), and [`saturate`] computes the
//! least model directly for non-recursive systems as an in-process oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write as _;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use crate::analyzer::{AbsAtom, AbsRes, Tag};
use crate::interp::{apply_op, Value};
use crate::syntax::{BinOp, Label, Node, Program, Sym};

/// Index of a unary predicate in a [`ChcSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub u32);

/// Clause-local variable index.
pub type VarId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(VarId),
    Int(BigInt),
    Bool(bool),
    Op(Box<Term>, BinOp, Box<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyAtom {
    /// `pred(var)` — the variable is a member of the predicate.
    Pred(PredId, VarId),
    /// `var = b` — a path-condition constraint on a guard variable.
    EqBool(VarId, bool),
}

/// `∀ vars. body ⇒ head.0(head.1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub vars: u32,
    pub body: Vec<BodyAtom>,
    pub head: (PredId, Term),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Int,
    Bool,
}

#[derive(Debug, Clone)]
pub struct ChcSystem {
    pub clauses: Vec<Clause>,
    /// Predicate for the whole translated result.
    pub root: PredId,
    pub n_preds: u32,
    pub sorts: Vec<Sort>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChcError {
    #[error("{0} atoms cannot be translated to Horn clauses")]
    Unsupported(&'static str),
    #[error("sort conflict on predicate P{0}")]
    SortConflict(u32),
}

/// One path-condition entry at translation time: the guard predicate must
/// hold a member equal to the expected boolean.
type CondStack = Vec<(PredId, bool)>;

struct Builder {
    clauses: Vec<Clause>,
    n_preds: u32,
    /// Labeled tags already given a predicate; stubs reuse them.
    registry: HashMap<Tag, PredId>,
}

impl Builder {
    fn fresh(&mut self) -> PredId {
        let id = PredId(self.n_preds);
        self.n_preds += 1;
        id
    }

    /// Translate a result set into clauses concluding a fresh predicate.
    fn set(&mut self, r: &AbsRes, pi: &CondStack) -> Result<PredId, ChcError> {
        let p = self.fresh();
        self.set_into(r, pi, p)?;
        Ok(p)
    }

    fn set_into(&mut self, r: &AbsRes, pi: &CondStack, p: PredId) -> Result<(), ChcError> {
        for atom in r {
            self.atom_into(atom, pi, p)?;
        }
        Ok(())
    }

    /// Body atoms for the path conditions, allocating one variable each.
    fn cond_body(&self, pi: &CondStack, next_var: &mut VarId) -> Vec<BodyAtom> {
        let mut body = Vec::new();
        for &(pred, b) in pi {
            let v = *next_var;
            *next_var += 1;
            body.push(BodyAtom::Pred(pred, v));
            body.push(BodyAtom::EqBool(v, b));
        }
        body
    }

    fn atom_into(&mut self, a: &AbsAtom, pi: &CondStack, p: PredId) -> Result<(), ChcError> {
        match a {
            AbsAtom::Int(n) => {
                let mut nv = 0;
                let body = self.cond_body(pi, &mut nv);
                self.clauses.push(Clause { vars: nv, body, head: (p, Term::Int(n.clone())) });
            }
            AbsAtom::Bool(b) => {
                let mut nv = 0;
                let body = self.cond_body(pi, &mut nv);
                self.clauses.push(Clause { vars: nv, body, head: (p, Term::Bool(*b)) });
            }
            // function values carry no first-order content
            AbsAtom::Fun(..) => {}
            AbsAtom::Labeled(inner, tag) => {
                let q = match self.registry.get(tag) {
                    Some(&q) => {
                        // a second occurrence of the same tag feeds the
                        // same predicate
                        self.set_into(inner, pi, q)?;
                        q
                    }
                    None => {
                        let q = self.fresh();
                        self.registry.insert(tag.clone(), q);
                        self.set_into(inner, pi, q)?;
                        q
                    }
                };
                self.link(q, pi, p);
            }
            AbsAtom::Stub(tag) => {
                let q = match self.registry.get(tag) {
                    Some(&q) => q,
                    None => {
                        // an unresolved stub denotes any value
                        let q = self.fresh();
                        self.clauses.push(Clause {
                            vars: 1,
                            body: Vec::new(),
                            head: (q, Term::Var(0)),
                        });
                        self.registry.insert(tag.clone(), q);
                        q
                    }
                };
                if q != p {
                    self.link(q, pi, p);
                }
            }
            AbsAtom::Guarded(g, inner) => {
                let c = self.set(&g.cond, pi)?;
                let mut pi2 = pi.clone();
                pi2.push((c, g.expect));
                let q = self.set(inner, &pi2)?;
                self.link_cond(q, &pi2, p);
            }
            AbsAtom::Op(l, op, r) => {
                let lp = self.set(l, pi)?;
                let rp = self.set(r, pi)?;
                let mut nv: VarId = 2;
                let mut body = vec![BodyAtom::Pred(lp, 0), BodyAtom::Pred(rp, 1)];
                body.extend(self.cond_body(pi, &mut nv));
                self.clauses.push(Clause {
                    vars: nv,
                    body,
                    head: (p, Term::Op(Box::new(Term::Var(0)), *op, Box::new(Term::Var(1)))),
                });
            }
            AbsAtom::Record(_) | AbsAtom::Proj(..) | AbsAtom::Inspect(..) => {
                return Err(ChcError::Unsupported("record"));
            }
        }
        Ok(())
    }

    /// `q(x) ∧ Cond(π) ⇒ p(x)`.
    fn link(&mut self, q: PredId, pi: &CondStack, p: PredId) {
        let mut nv: VarId = 1;
        let mut body = vec![BodyAtom::Pred(q, 0)];
        body.extend(self.cond_body(pi, &mut nv));
        self.clauses.push(Clause { vars: nv, body, head: (p, Term::Var(0)) });
    }

    fn link_cond(&mut self, q: PredId, pi: &CondStack, p: PredId) {
        self.link(q, pi, p)
    }
}

/// Translate an abstract result to a Horn-clause system whose root
/// predicate's least model is the result's denotation. Record-shaped atoms
/// are not translatable (values are unary integers/booleans).
pub fn to_chc(r: &AbsRes) -> Result<ChcSystem, ChcError> {
    let mut b = Builder { clauses: Vec::new(), n_preds: 0, registry: HashMap::new() };
    let root = b.set(r, &Vec::new())?;
    let sorts = infer_sorts(b.n_preds, &b.clauses)?;
    Ok(ChcSystem { clauses: b.clauses, root, n_preds: b.n_preds, sorts })
}

// ---------------------------------------------------------------------------
// Sort inference
// ---------------------------------------------------------------------------

fn op_sorts(op: BinOp) -> (Option<Sort>, Sort) {
    // (operand sort when fixed, result sort)
    match op {
        BinOp::Add | BinOp::Sub => (Some(Sort::Int), Sort::Int),
        BinOp::Lt | BinOp::Le | BinOp::Ge => (Some(Sort::Int), Sort::Bool),
        BinOp::And | BinOp::Or | BinOp::Xor => (Some(Sort::Bool), Sort::Bool),
        BinOp::Eq => (None, Sort::Bool),
    }
}

fn infer_sorts(n_preds: u32, clauses: &[Clause]) -> Result<Vec<Sort>, ChcError> {
    let mut pred: Vec<Option<Sort>> = vec![None; n_preds as usize];
    let mut changed = true;
    let mut conflict: Option<u32> = None;
    let assign = |slot: &mut Option<Sort>, s: Sort, who: u32, changed: &mut bool, conflict: &mut Option<u32>| {
        match *slot {
            None => {
                *slot = Some(s);
                *changed = true;
            }
            Some(prev) if prev != s => *conflict = Some(who),
            _ => {}
        }
    };
    while changed {
        changed = false;
        for c in clauses {
            let mut vars: Vec<Option<Sort>> = vec![None; c.vars as usize];
            // seed clause-local variable sorts from their predicates
            for ba in &c.body {
                match ba {
                    BodyAtom::Pred(q, v) => {
                        if let Some(s) = pred[q.0 as usize] {
                            vars[*v as usize] = Some(s);
                        }
                    }
                    BodyAtom::EqBool(v, _) => vars[*v as usize] = Some(Sort::Bool),
                }
            }
            // the head term constrains the head predicate and the vars
            if let Some(s) = term_sort(&c.head.1, &mut vars) {
                assign(&mut pred[c.head.0 .0 as usize], s, c.head.0 .0, &mut changed, &mut conflict);
            }
            // push var sorts back to body predicates
            for ba in &c.body {
                if let BodyAtom::Pred(q, v) = ba {
                    if let Some(s) = vars[*v as usize] {
                        assign(&mut pred[q.0 as usize], s, q.0, &mut changed, &mut conflict);
                    }
                }
            }
            if let Some(w) = conflict {
                return Err(ChcError::SortConflict(w));
            }
        }
    }
    Ok(pred.into_iter().map(|s| s.unwrap_or(Sort::Int)).collect())
}

/// Sort of a term, refining variable sorts where the operator fixes them.
fn term_sort(t: &Term, vars: &mut Vec<Option<Sort>>) -> Option<Sort> {
    match t {
        Term::Var(v) => vars[*v as usize],
        Term::Int(_) => Some(Sort::Int),
        Term::Bool(_) => Some(Sort::Bool),
        Term::Op(l, op, r) => {
            let (operand, result) = op_sorts(*op);
            if let Some(s) = operand {
                force_sort(l, s, vars);
                force_sort(r, s, vars);
            }
            term_sort(l, vars);
            term_sort(r, vars);
            Some(result)
        }
    }
}

fn force_sort(t: &Term, s: Sort, vars: &mut [Option<Sort>]) {
    if let Term::Var(v) = t {
        if vars[*v as usize].is_none() {
            vars[*v as usize] = Some(s);
        }
    }
}

// ---------------------------------------------------------------------------
// SMT-LIB emission
// ---------------------------------------------------------------------------

fn smt_sort(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::Bool => "Bool",
    }
}

fn smt_op(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Eq => "=",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Ge => ">=",
        BinOp::And => "and",
        BinOp::Or => "or",
        BinOp::Xor => "xor",
    }
}

fn smt_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => {
            let _ = write!(out, "x{v}");
        }
        Term::Int(n) => {
            if n.sign() == num_bigint::Sign::Minus {
                let _ = write!(out, "(- {})", n.magnitude());
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Term::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Term::Op(l, op, r) => {
            let _ = write!(out, "({} ", smt_op(*op));
            smt_term(l, out);
            out.push(' ');
            smt_term(r, out);
            out.push(')');
        }
    }
}

/// Deterministic SMT-LIB (logic HORN) text for the system. When `query` is
/// given, it is asserted as a goal clause `root(x) ∧ ¬query(x) ⇒ false`,
/// making `sat` mean "the property holds of every root value".
pub fn emit_smtlib(sys: &ChcSystem, query: Option<&Term>) -> String {
    let mut out = String::new();
    out.push_str("(set-logic HORN)\n");
    for i in 0..sys.n_preds {
        let _ = writeln!(out, "(declare-fun P{} ({}) Bool)", i, smt_sort(sys.sorts[i as usize]));
    }
    for c in &sys.clauses {
        out.push_str("(assert ");
        let close = if c.vars > 0 {
            out.push_str("(forall (");
            let sorts = clause_var_sorts(c, sys);
            for v in 0..c.vars {
                let _ = write!(out, "(x{} {})", v, smt_sort(sorts[v as usize]));
            }
            out.push_str(") ");
            true
        } else {
            false
        };
        if c.body.is_empty() {
            emit_head(c, &mut out);
        } else {
            out.push_str("(=> (and");
            for ba in &c.body {
                match ba {
                    BodyAtom::Pred(q, v) => {
                        let _ = write!(out, " (P{} x{})", q.0, v);
                    }
                    BodyAtom::EqBool(v, b) => {
                        let _ = write!(out, " (= x{v} {b})");
                    }
                }
            }
            out.push_str(") ");
            emit_head(c, &mut out);
            out.push(')');
        }
        if close {
            out.push(')');
        }
        out.push_str(")\n");
    }
    if let Some(q) = query {
        let s = smt_sort(sys.sorts[sys.root.0 as usize]);
        let mut qt = String::new();
        smt_term(q, &mut qt);
        let _ = writeln!(
            out,
            "(assert (forall ((x0 {s})) (=> (and (P{} x0) (not {qt})) false)))",
            sys.root.0
        );
    }
    out.push_str("(check-sat)\n");
    out
}

fn emit_head(c: &Clause, out: &mut String) {
    let _ = write!(out, "(P{} ", c.head.0 .0);
    smt_term(&c.head.1, out);
    out.push(')');
}

fn clause_var_sorts(c: &Clause, sys: &ChcSystem) -> Vec<Sort> {
    let mut vars: Vec<Option<Sort>> = vec![None; c.vars as usize];
    for ba in &c.body {
        match ba {
            BodyAtom::Pred(q, v) => vars[*v as usize] = Some(sys.sorts[q.0 as usize]),
            BodyAtom::EqBool(v, _) => vars[*v as usize] = Some(Sort::Bool),
        }
    }
    let mut tmp = vars.clone();
    term_sort(&c.head.1, &mut tmp);
    tmp.into_iter()
        .zip(vars)
        .map(|(a, b)| b.or(a).unwrap_or(Sort::Int))
        .collect()
}

// ---------------------------------------------------------------------------
// Saturation (in-process least model, for finite systems)
// ---------------------------------------------------------------------------

/// Value set of one predicate in the least model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Finite(BTreeSet<Value>),
    /// The predicate holds of every value of its sort (an unresolved stub
    /// reached it).
    Top,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SaturateError {
    #[error("saturation exceeded {0} derived facts")]
    TooLarge(usize),
}

/// Compute the least model bottom-up. Predicates reachable from an
/// any-value clause are reported as [`Model::Top`]; booleans stay finite.
pub fn saturate(sys: &ChcSystem, max_facts: usize) -> Result<Vec<Model>, SaturateError> {
    let mut model: Vec<Model> = sys
        .sorts
        .iter()
        .map(|_| Model::Finite(BTreeSet::new()))
        .collect();
    loop {
        let mut changed = false;
        for c in &sys.clauses {
            changed |= fire_clause(c, sys, &mut model, max_facts)?;
        }
        if !changed {
            return Ok(model);
        }
    }
}

fn fire_clause(
    c: &Clause,
    sys: &ChcSystem,
    model: &mut [Model],
    max_facts: usize,
) -> Result<bool, SaturateError> {
    // an unconstrained head variable means the head predicate is Top
    let mut bound: Vec<bool> = vec![false; c.vars as usize];
    for ba in &c.body {
        if let BodyAtom::Pred(_, v) = ba {
            bound[*v as usize] = true;
        }
    }
    let head_vars = term_vars(&c.head.1);
    if head_vars.iter().any(|v| !bound[*v as usize]) {
        return Ok(set_top(model, c.head.0));
    }
    // if any body predicate is Top, approximate: booleans enumerate, an
    // integer Top makes the head Top
    let mut domains: Vec<(VarId, Vec<Value>)> = Vec::new();
    let mut eqs: Vec<(VarId, bool)> = Vec::new();
    for ba in &c.body {
        match ba {
            BodyAtom::Pred(q, v) => match &model[q.0 as usize] {
                Model::Finite(set) => {
                    if set.is_empty() {
                        return Ok(false);
                    }
                    domains.push((*v, set.iter().cloned().collect()));
                }
                Model::Top => match sys.sorts[q.0 as usize] {
                    Sort::Bool => domains.push((
                        *v,
                        vec![Value::Bool(false), Value::Bool(true)],
                    )),
                    Sort::Int => {
                        if head_vars.contains(v) {
                            return Ok(set_top(model, c.head.0));
                        }
                        // the variable only occurs in conditions; booleans
                        // would be enumerable, integers satisfy equality
                        // checks vacuously (there are none on ints)
                        domains.push((*v, vec![Value::Int(BigInt::from(0))]));
                    }
                },
            },
            BodyAtom::EqBool(v, b) => eqs.push((*v, *b)),
        }
    }
    // enumerate assignments
    let mut changed = false;
    let mut idx = vec![0usize; domains.len()];
    'outer: loop {
        let mut env: HashMap<VarId, Value> = HashMap::new();
        for (slot, (v, dom)) in idx.iter().zip(&domains) {
            env.insert(*v, dom[*slot].clone());
        }
        let ok = eqs.iter().all(|(v, b)| env.get(v) == Some(&Value::Bool(*b)));
        if ok {
            if let Some(val) = eval_term(&c.head.1, &env) {
                if let Model::Finite(set) = &mut model[c.head.0 .0 as usize] {
                    if set.insert(val) {
                        changed = true;
                        if set.len() > max_facts {
                            return Err(SaturateError::TooLarge(max_facts));
                        }
                    }
                }
            }
        }
        // next assignment
        for i in 0..idx.len() {
            idx[i] += 1;
            if idx[i] < domains[i].1.len() {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    Ok(changed)
}

fn set_top(model: &mut [Model], p: PredId) -> bool {
    if model[p.0 as usize] != Model::Top {
        model[p.0 as usize] = Model::Top;
        true
    } else {
        false
    }
}

fn term_vars(t: &Term) -> BTreeSet<VarId> {
    match t {
        Term::Var(v) => BTreeSet::from([*v]),
        Term::Int(_) | Term::Bool(_) => BTreeSet::new(),
        Term::Op(l, _, r) => {
            let mut s = term_vars(l);
            s.extend(term_vars(r));
            s
        }
    }
}

fn eval_term(t: &Term, env: &HashMap<VarId, Value>) -> Option<Value> {
    match t {
        Term::Var(v) => env.get(v).cloned(),
        Term::Int(n) => Some(Value::Int(n.clone())),
        Term::Bool(b) => Some(Value::Bool(*b)),
        Term::Op(l, op, r) => {
            apply_op(*op, &eval_term(l, env)?, &eval_term(r, env)?).ok()
        }
    }
}

// ---------------------------------------------------------------------------
// External solver bridge
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    Unknown,
    Timeout,
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("solver binary not runnable: {0}")]
    SolverUnavailable(String),
    #[error("solver i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Run an external Horn solver on the given SMT-LIB text. The solver is
/// invoked as `<solver> <file>` and must print `sat`/`unsat`/`unknown`;
/// exceeding `timeout_ms` kills it and reports [`SolveResult::Timeout`].
pub fn solve(solver: &std::path::Path, smtlib: &str, timeout_ms: u64) -> Result<SolveResult, SolveError> {
    if timeout_ms == 0 {
        return Ok(SolveResult::Timeout);
    }
    let mut file = tempfile::Builder::new()
        .suffix(".smt2")
        .tempfile()
        .map_err(SolveError::Io)?;
    file.write_all(smtlib.as_bytes())?;
    file.flush()?;
    let mut child = std::process::Command::new(solver)
        .arg(file.path())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::null())
        .spawn()
        .map_err(|e| SolveError::SolverUnavailable(format!("{}: {e}", solver.display())))?;
    let deadline = Instant::now() + Duration::from_millis(timeout_ms);
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(SolveResult::Timeout);
        }
        std::thread::sleep(Duration::from_millis(5));
    }
    let out = child.wait_with_output()?;
    let text = String::from_utf8_lossy(&out.stdout);
    for line in text.lines() {
        match line.trim() {
            "sat" => return Ok(SolveResult::Sat),
            "unsat" => return Ok(SolveResult::Unsat),
            "unknown" => return Ok(SolveResult::Unknown),
            _ => {}
        }
    }
    Ok(SolveResult::Unknown)
}

// ---------------------------------------------------------------------------
// Assertion checking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyResult {
    /// Every value the result can denote satisfies the predicate.
    Verified,
    /// Some denoted value falsifies the predicate (with a witness when the
    /// falsifying value is known concretely).
    Violated(Option<Value>),
    Unknown,
}

/// Check a recorded assertion. With a solver configured the result is
/// translated to Horn clauses and the negated predicate queried; otherwise
/// (or when translation fails) a bounded evaluation decides what it can.
pub fn verify_letassert(
    p: &Program,
    ob: &crate::analyzer::Obligation,
    cfg: &crate::analyzer::AnalyzeConfig,
) -> VerifyResult {
    if let (Some(solver), Ok(sys), Some(q)) =
        (cfg.solver.as_ref(), to_chc(&ob.result), pred_to_term(p, ob.predicate, &ob.var))
    {
        let text = emit_smtlib(&sys, Some(&q));
        match solve(solver, &text, cfg.timeout_ms) {
            Ok(SolveResult::Sat) => return VerifyResult::Verified,
            Ok(SolveResult::Unsat) => {
                // fall through to the bounded check for a witness
            }
            _ => {}
        }
    }
    bounded_verify(p, ob, cfg)
}

fn bounded_verify(
    p: &Program,
    ob: &crate::analyzer::Obligation,
    cfg: &crate::analyzer::AnalyzeConfig,
) -> VerifyResult {
    let Ok(conc) = crate::resval::abs_eval(&ob.result, cfg.eval_depth) else {
        return VerifyResult::Unknown;
    };
    let mut all_hold = true;
    for v in &conc.values {
        match eval_pred(p, ob.predicate, &ob.var, v) {
            Some(true) => {}
            Some(false) => return VerifyResult::Violated(Some(v.clone())),
            None => all_hold = false,
        }
    }
    if all_hold && conc.exact() {
        VerifyResult::Verified
    } else {
        VerifyResult::Unknown
    }
}

/// Translate a predicate expression over one variable into a [`Term`] with
/// `Var(0)` standing for the asserted name. Only literals, the variable
/// and operators are translatable.
pub fn pred_to_term(p: &Program, l: Label, name: &Sym) -> Option<Term> {
    match p.node(l) {
        Node::Var { name: n } if n == name => Some(Term::Var(0)),
        Node::Int(n) => Some(Term::Int(n.clone())),
        Node::Bool(b) => Some(Term::Bool(*b)),
        Node::Op { op, lhs, rhs } => Some(Term::Op(
            Box::new(pred_to_term(p, *lhs, name)?),
            *op,
            Box::new(pred_to_term(p, *rhs, name)?),
        )),
        _ => None,
    }
}

/// Concretely evaluate a predicate expression at a ground value.
pub fn eval_pred(p: &Program, l: Label, name: &Sym, v: &Value) -> Option<bool> {
    fn go(p: &Program, l: Label, name: &Sym, v: &Value) -> Option<Value> {
        match p.node(l) {
            Node::Var { name: n } if n == name => Some(v.clone()),
            Node::Int(n) => Some(Value::Int(n.clone())),
            Node::Bool(b) => Some(Value::Bool(*b)),
            Node::Op { op, lhs, rhs } => {
                apply_op(*op, &go(p, *lhs, name, v)?, &go(p, *rhs, name, v)?).ok()
            }
            _ => None,
        }
    }
    match go(p, l, name, v)? {
        Value::Bool(b) => Some(b),
        _ => None,
    }
}

/// Least-model agreement helper used by tests: the saturated root model of
/// a translated result, when finite.
pub fn root_model(sys: &ChcSystem, max_facts: usize) -> Result<Model, SaturateError> {
    let m = saturate(sys, max_facts)?;
    Ok(m[sys.root.0 as usize].clone())
}

/// Convenience map form of [`saturate`] for assertions in tests.
pub fn saturate_map(sys: &ChcSystem, max_facts: usize) -> Result<BTreeMap<u32, Model>, SaturateError> {
    Ok(saturate(sys, max_facts)?
        .into_iter()
        .enumerate()
        .map(|(i, m)| (i as u32, m))
        .collect())
}
