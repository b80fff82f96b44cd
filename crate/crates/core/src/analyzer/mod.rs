//! Finitized analyses over truncated call stacks.
//!
//! The concrete semantics' only state is the call stack, so the analysis
//! finitizes it to at most `k` frames and "stitches" popped stacks back
//! together from the set `S` of stack fragments seen so far. Three systems
//! are provided:
//!
//! * [`analyze_single_path`]: a nondeterministic, one-derivation-at-a-time
//!   system for the functions-only core, enumerated exhaustively (an oracle
//!   for the others);
//! * [`analyze_all_paths_core`]: a deterministic all-paths system for the
//!   core that merges every nondeterministic choice into one derivation,
//!   cutting cycles with a visited set;
//! * [`analyze`]: the all-paths system for the full language, which marks
//!   cut cycles with explicit stub atoms (yielding recurrences), labels
//!   variable/application results with their state, and tracks path
//!   conditions for conditionals.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;

use crate::stack::{StackId, StackInterner};
use crate::syntax::{BinOp, Label, Node, Program, Sym};

mod render;
pub use render::{render_absres, render_site, render_tag};

/// The set `S` of stack fragments (each of length ≤ k) seen so far.
pub type FragmentSet = BTreeSet<StackId>;

/// A program point that can head a cycle: an application site or a variable
/// lookup `x` viewed from context label `ctx` (the occurrence's own label,
/// or the function label the lookup was renamed to).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    App(Label),
    Var(Sym, Label),
}

/// The `⟨site, stack⟩` state naming a labeled parent or a stub.
pub type Tag = (Site, StackId);

/// One path-condition entry: the guard result must evaluate to `expect`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    pub cond: AbsRes,
    pub expect: bool,
}

/// A conjunction of path-condition entries, oldest first.
pub type PathCond = Vec<Guard>;

/// One alternative in an abstract result set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AbsAtom {
    Int(BigInt),
    Bool(bool),
    /// A function value with its definition-time (truncated) stack.
    Fun(Label, StackId),
    Record(Vec<(Sym, AbsRes)>),
    Op(AbsRes, BinOp, AbsRes),
    Proj(AbsRes, Sym),
    Inspect(Sym, AbsRes),
    /// A result labeled with the state that produced it; stubs with the
    /// same tag refer back to it, closing a recurrence.
    Labeled(AbsRes, Tag),
    /// A cut cycle: a recursive reference to the enclosing parent with the
    /// same tag.
    Stub(Tag),
    /// A result conditional on a guard outcome.
    Guarded(Guard, AbsRes),
}

/// An abstract result: a canonically ordered set of alternatives.
pub type AbsRes = BTreeSet<AbsAtom>;

#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    /// Maximum stack frames kept at a call (k ≥ 1; stitching needs k ≥ 2).
    pub k: usize,
    /// Unrolling depth for bounded evaluation of abstract results.
    pub eval_depth: u32,
    /// External Horn-clause solver used to refine branch feasibility and
    /// check assertions, if configured.
    pub solver: Option<std::path::PathBuf>,
    /// Solver wall-clock budget in milliseconds.
    pub timeout_ms: u64,
    /// Derivation-node budget; exceeding it aborts the analysis.
    pub node_budget: u64,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            k: 2,
            eval_depth: 3,
            solver: None,
            timeout_ms: 10_000,
            node_budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyzeError {
    #[error("analysis budget of {budget} derivation nodes exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("label {label}: {what} unsupported by the core analysis")]
    Unsupported { label: Label, what: &'static str },
    #[error("k must be at least 1")]
    BadK,
}

/// A recorded assertion: the analyzed result of the bound expression plus
/// the predicate to check it against.
#[derive(Debug, Clone)]
pub struct Obligation {
    /// Label of the `letassert` node.
    pub label: Label,
    /// Name the predicate refers to the result by.
    pub var: Sym,
    /// Analyzed result of the bound expression.
    pub result: AbsRes,
    /// Root label of the predicate expression.
    pub predicate: Label,
}

#[derive(Debug)]
pub struct AnalysisOutcome {
    pub result: AbsRes,
    pub frags: FragmentSet,
    pub stacks: StackInterner,
    pub obligations: Vec<Obligation>,
    /// Number of stub atoms emitted (cycles cut).
    pub stubs_emitted: u64,
    /// Rule firings whose output fragment set failed to contain the input
    /// (instrumented invariant; must be zero).
    pub monotonicity_violations: u64,
    /// Derivation nodes used.
    pub nodes_used: u64,
}

/// `l ⋉_k s`: prepend frame `l`, keeping at most `k` frames.
pub fn push_frame_k(st: &mut StackInterner, l: Label, s: StackId, k: usize) -> StackId {
    st.push_k(l, s, k)
}

/// All ways to pop `l` off `l ⧺ s` using fragments of `frags` to restore
/// context: `{s ⧺ s' | ∃ f ∈ frags. f = l ⧺ s ⧺ s'}`.
pub fn suffixes(
    st: &mut StackInterner,
    l: Label,
    s: StackId,
    frags: &FragmentSet,
) -> BTreeSet<StackId> {
    let prefix = {
        let mut p = vec![l];
        p.extend(st.frames(s));
        p
    };
    let mut out = BTreeSet::new();
    for &f in frags.iter() {
        let fr = st.frames(f);
        if fr.len() >= prefix.len() && fr[..prefix.len()] == prefix[..] {
            let mut stitched = prefix[1..].to_vec();
            stitched.extend_from_slice(&fr[prefix.len()..]);
            out.insert(st.from_frames(&stitched));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Single-path core analysis (exhaustive enumeration oracle)
// ---------------------------------------------------------------------------

/// A single-path result value: a function with its defining stack, or a
/// literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SpVal {
    Fun(Label, StackId),
    Int(BigInt),
    Bool(bool),
}

/// Result of enumerating every single-path derivation.
#[derive(Debug)]
pub struct SinglePathOutcome {
    /// Conclusions `(value, final fragment set)` of all root derivations.
    pub results: BTreeSet<(SpVal, FragmentSet)>,
    pub stacks: StackInterner,
    /// True when the budget ran out and the set may be incomplete.
    pub truncated: bool,
}

impl SinglePathOutcome {
    /// The distinct values concluded at the root.
    pub fn atoms(&self) -> BTreeSet<SpVal> {
        self.results.iter().map(|(v, _)| v.clone()).collect()
    }
}

/// Exhaustively enumerate the single-path derivations of the core system,
/// pruning goals that repeat on the current path (which can never head a
/// finite derivation) and stopping at `budget` derivation nodes.
pub fn analyze_single_path(p: &Program, k: usize, budget: u64) -> Result<SinglePathOutcome, AnalyzeError> {
    if k == 0 {
        return Err(AnalyzeError::BadK);
    }
    let mut a = SinglePath {
        p,
        st: StackInterner::new(),
        k,
        budget_left: budget,
        truncated: false,
        path: HashSet::new(),
    };
    let found = a.eval(p.root(), StackId::EMPTY, &BTreeSet::new())?;
    Ok(SinglePathOutcome {
        results: found.into_iter().collect(),
        stacks: a.st,
        truncated: a.truncated,
    })
}

type PathGoal = (Site, StackId, FragmentSet);

struct SinglePath<'a> {
    p: &'a Program,
    st: StackInterner,
    k: usize,
    budget_left: u64,
    truncated: bool,
    path: HashSet<PathGoal>,
}

impl<'a> SinglePath<'a> {
    fn tick(&mut self) -> bool {
        if self.budget_left == 0 {
            self.truncated = true;
            return false;
        }
        self.budget_left -= 1;
        true
    }

    /// All `(value, fragment set)` conclusions derivable for this goal.
    fn eval(
        &mut self,
        l: Label,
        s: StackId,
        frags: &FragmentSet,
    ) -> Result<Vec<(SpVal, FragmentSet)>, AnalyzeError> {
        if !self.tick() {
            return Ok(Vec::new());
        }
        match self.p.node(l).clone() {
            Node::Fun { .. } => Ok(vec![(SpVal::Fun(l, s), frags.clone())]),
            Node::Int(n) => Ok(vec![(SpVal::Int(n), frags.clone())]),
            Node::Bool(b) => Ok(vec![(SpVal::Bool(b), frags.clone())]),
            Node::Var { name } => self.lookup(&name, l, s, frags),
            Node::App { func, .. } => {
                let goal = (Site::App(l), s, frags.clone());
                if !self.path.insert(goal.clone()) {
                    return Ok(Vec::new());
                }
                let mut out = Vec::new();
                let fun_results = self.eval(func, s, frags)?;
                for (v, s1) in fun_results {
                    let SpVal::Fun(fl, _) = v else { continue };
                    let body = match self.p.node(fl) {
                        Node::Fun { body, .. } => *body,
                        _ => continue,
                    };
                    let pushed = self.st.push_k(l, s, self.k);
                    let mut s2 = s1.clone();
                    s2.insert(pushed);
                    out.extend(self.eval(body, pushed, &s2)?);
                }
                self.path.remove(&goal);
                Ok(out)
            }
            _ => Err(AnalyzeError::Unsupported { label: l, what: self.p.node(l).kind_name() }),
        }
    }

    fn lookup(
        &mut self,
        name: &str,
        ctx: Label,
        s: StackId,
        frags: &FragmentSet,
    ) -> Result<Vec<(SpVal, FragmentSet)>, AnalyzeError> {
        if !self.tick() {
            return Ok(Vec::new());
        }
        let goal = (Site::Var(name.to_string(), ctx), s, frags.clone());
        if !self.path.insert(goal.clone()) {
            return Ok(Vec::new());
        }
        let out = self.lookup_body(name, ctx, s, frags);
        self.path.remove(&goal);
        out
    }

    fn lookup_body(
        &mut self,
        name: &str,
        ctx: Label,
        s: StackId,
        frags: &FragmentSet,
    ) -> Result<Vec<(SpVal, FragmentSet)>, AnalyzeError> {
        let Some(mf) = self.p.my_fun(ctx).ok().flatten() else {
            return Ok(Vec::new());
        };
        let param = match self.p.node(mf) {
            Node::Fun { param, .. } => param.clone(),
            _ => unreachable!(),
        };
        let Some((top, rest)) = self.st.pop(s) else {
            return Ok(Vec::new());
        };
        let (func, arg) = match self.p.node(top) {
            Node::App { func, arg } => (*func, *arg),
            _ => return Ok(Vec::new()),
        };
        let stitched = suffixes(&mut self.st, top, rest, frags);
        let mut out = Vec::new();
        if param == name {
            for s1 in stitched {
                out.extend(self.eval(arg, s1, frags)?);
            }
        } else {
            for s1 in stitched {
                for (v, frags1) in self.eval(func, s1, frags)? {
                    let SpVal::Fun(fl, fstack) = v else { continue };
                    if fl != mf {
                        continue;
                    }
                    out.extend(self.lookup(name, fl, fstack, &frags1)?);
                }
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// All-paths analyses (core and extended share one tabled engine)
// ---------------------------------------------------------------------------

/// All-paths analysis of a functions-only program: cycles are cut silently
/// (empty result), result atoms are bare function values.
pub fn analyze_all_paths_core(p: &Program, cfg: &AnalyzeConfig) -> Result<AnalysisOutcome, AnalyzeError> {
    run_all_paths(p, cfg, Mode::Core)
}

/// All-paths analysis of the full language: cut cycles become stub atoms,
/// variable and application results carry state labels, and conditionals
/// produce path-guarded results.
pub fn analyze(p: &Program, cfg: &AnalyzeConfig) -> Result<AnalysisOutcome, AnalyzeError> {
    run_all_paths(p, cfg, Mode::Extended)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Core,
    Extended,
}

/// One result per goal and stack: an expression evaluation or a variable
/// lookup continued at a function definition site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Goal {
    Eval(Label, StackId),
    Lookup(Sym, Label, StackId),
}

fn run_all_paths(p: &Program, cfg: &AnalyzeConfig, mode: Mode) -> Result<AnalysisOutcome, AnalyzeError> {
    if cfg.k == 0 {
        return Err(AnalyzeError::BadK);
    }
    if mode == Mode::Core && !p.is_core() {
        let bad = p
            .labels()
            .find(|&l| {
                !matches!(
                    p.node(l),
                    Node::Fun { .. } | Node::App { .. } | Node::Var { .. } | Node::Int(_) | Node::Bool(_)
                )
            })
            .expect("non-core node exists");
        return Err(AnalyzeError::Unsupported { label: bad, what: p.node(bad).kind_name() });
    }
    // Each pass evaluates every reachable goal once against the fragment
    // set discovered so far; passes repeat until the set stops growing.
    // The set grows monotonically within the finite universe of truncated
    // stacks, so the loop terminates.
    let mut a = AllPaths {
        p,
        st: StackInterner::new(),
        cfg: cfg.clone(),
        mode,
        nodes_used: 0,
        stubs_emitted: 0,
        monotonicity_violations: 0,
        obligations: Vec::new(),
        frags: BTreeSet::new(),
        table: HashMap::new(),
        in_progress: HashSet::new(),
    };
    loop {
        let before = a.frags.clone();
        a.table.clear();
        a.in_progress.clear();
        a.obligations.clear();
        a.stubs_emitted = 0;
        let result = a.eval(p.root(), StackId::EMPTY)?;
        if a.frags == before {
            return Ok(AnalysisOutcome {
                result,
                frags: a.frags,
                stacks: a.st,
                obligations: a.obligations,
                stubs_emitted: a.stubs_emitted,
                monotonicity_violations: a.monotonicity_violations,
                nodes_used: a.nodes_used,
            });
        }
    }
}

struct AllPaths<'a> {
    p: &'a Program,
    st: StackInterner,
    cfg: AnalyzeConfig,
    mode: Mode,
    nodes_used: u64,
    stubs_emitted: u64,
    monotonicity_violations: u64,
    obligations: Vec<Obligation>,
    /// The fragment set, shared by the whole pass and monotone across
    /// passes.
    frags: FragmentSet,
    /// Completed goals of the current pass.
    table: HashMap<Goal, AbsRes>,
    /// Goals currently being computed; reaching one again is a cycle and
    /// yields a stub.
    in_progress: HashSet<Goal>,
}

impl<'a> AllPaths<'a> {
    fn tick(&mut self) -> Result<(), AnalyzeError> {
        self.nodes_used += 1;
        if self.nodes_used > self.cfg.node_budget {
            return Err(AnalyzeError::BudgetExceeded { budget: self.cfg.node_budget });
        }
        Ok(())
    }

    fn stub_res(&mut self, tag: Tag) -> AbsRes {
        self.stubs_emitted += 1;
        match self.mode {
            Mode::Core => AbsRes::new(),
            Mode::Extended => BTreeSet::from([AbsAtom::Stub(tag)]),
        }
    }

    fn eval(&mut self, l: Label, s: StackId) -> Result<AbsRes, AnalyzeError> {
        self.tick()?;
        match self.p.node(l).clone() {
            Node::Int(n) => Ok(BTreeSet::from([AbsAtom::Int(n)])),
            Node::Bool(b) => Ok(BTreeSet::from([AbsAtom::Bool(b)])),
            Node::Fun { .. } => Ok(BTreeSet::from([AbsAtom::Fun(l, s)])),
            Node::Var { name } => self.lookup(&name, l, s),
            Node::App { func, .. } => self.apply(l, func, s),
            Node::Op { op, lhs, rhs } => {
                let r1 = self.eval(lhs, s)?;
                let r2 = self.eval(rhs, s)?;
                Ok(BTreeSet::from([AbsAtom::Op(r1, op, r2)]))
            }
            Node::Record(fields) => {
                let mut out_fields = Vec::with_capacity(fields.len());
                for (fname, fl) in fields {
                    out_fields.push((fname, self.eval(fl, s)?));
                }
                Ok(BTreeSet::from([AbsAtom::Record(out_fields)]))
            }
            Node::Proj { rec, field } => {
                let r0 = self.eval(rec, s)?;
                Ok(BTreeSet::from([AbsAtom::Proj(r0, field)]))
            }
            Node::Inspect { field, rec } => {
                let r0 = self.eval(rec, s)?;
                Ok(BTreeSet::from([AbsAtom::Inspect(field, r0)]))
            }
            Node::If { cond, then_branch, else_branch } => {
                let rc = self.eval(cond, s)?;
                let feasible = crate::resval::branch_feasibility(&rc, &Vec::new(), &self.cfg);
                let mut out = AbsRes::new();
                for b in [true, false] {
                    if !feasible.contains(&b) {
                        continue;
                    }
                    let branch = if b { then_branch } else { else_branch };
                    let rb = self.eval(branch, s)?;
                    out.insert(AbsAtom::Guarded(Guard { cond: rc.clone(), expect: b }, rb));
                }
                Ok(out)
            }
            Node::LetAssert { name, bound, pred } => {
                let r1 = self.eval(bound, s)?;
                self.obligations.push(Obligation {
                    label: l,
                    var: name,
                    result: r1.clone(),
                    predicate: pred,
                });
                Ok(r1)
            }
        }
    }

    /// The Application rules: a cycle yields a stub; otherwise evaluate the
    /// function position, push the truncated frame, and run every possible
    /// body, labeling the merged result with the callee state.
    fn apply(&mut self, l: Label, func: Label, s: StackId) -> Result<AbsRes, AnalyzeError> {
        let goal = Goal::Eval(l, s);
        if let Some(hit) = self.table.get(&goal) {
            return Ok(hit.clone());
        }
        if !self.in_progress.insert(goal.clone()) {
            return Ok(self.stub_res((Site::App(l), s)));
        }
        let out = (|| {
            let r1 = self.eval(func, s)?;
            let pushed = self.st.push_k(l, s, self.cfg.k);
            self.frags.insert(pushed);
            let mut out = AbsRes::new();
            for (fl, _) in self.resolve_funs(&r1) {
                let body = match self.p.node(fl) {
                    Node::Fun { body, .. } => *body,
                    _ => continue,
                };
                out.extend(self.eval(body, pushed)?);
            }
            Ok(match self.mode {
                Mode::Core => out,
                Mode::Extended => BTreeSet::from([AbsAtom::Labeled(out, (Site::App(l), pushed))]),
            })
        })();
        self.in_progress.remove(&goal);
        if let Ok(r) = &out {
            self.table.insert(goal, r.clone());
        }
        out
    }

    /// The Var rules: a cycle yields a stub; otherwise pop the top frame
    /// against every stitched continuation and either evaluate the
    /// call-site argument (local) or chase the enclosing function's value
    /// and continue the lookup from its definition stack (non-local).
    fn lookup(&mut self, name: &str, ctx: Label, s: StackId) -> Result<AbsRes, AnalyzeError> {
        self.tick()?;
        let goal = Goal::Lookup(name.to_string(), ctx, s);
        if let Some(hit) = self.table.get(&goal) {
            return Ok(hit.clone());
        }
        if !self.in_progress.insert(goal.clone()) {
            return Ok(self.stub_res((Site::Var(name.to_string(), ctx), s)));
        }
        let out = self.lookup_body(name, ctx, s);
        self.in_progress.remove(&Goal::Lookup(name.to_string(), ctx, s));
        if let Ok(r) = &out {
            self.table.insert(Goal::Lookup(name.to_string(), ctx, s), r.clone());
        }
        out
    }

    fn lookup_body(&mut self, name: &str, ctx: Label, s: StackId) -> Result<AbsRes, AnalyzeError> {
        let site = Site::Var(name.to_string(), ctx);
        let Some(mf) = self.p.my_fun(ctx).ok().flatten() else {
            return Ok(AbsRes::new());
        };
        let param = match self.p.node(mf) {
            Node::Fun { param, .. } => param.clone(),
            _ => unreachable!(),
        };
        let Some((top, rest)) = self.st.pop(s) else {
            return Ok(AbsRes::new());
        };
        let (func, arg) = match self.p.node(top) {
            Node::App { func, arg } => (*func, *arg),
            _ => return Ok(AbsRes::new()),
        };
        let frags = self.frags.clone();
        let stitched = suffixes(&mut self.st, top, rest, &frags);

        if param == name {
            let mut out = AbsRes::new();
            for s1 in stitched {
                out.extend(self.eval(arg, s1)?);
            }
            Ok(match self.mode {
                Mode::Core => out,
                Mode::Extended => BTreeSet::from([AbsAtom::Labeled(out, (site, s))]),
            })
        } else {
            let mut r1 = AbsRes::new();
            for s1 in stitched {
                r1.extend(self.eval(func, s1)?);
            }
            let mut out = AbsRes::new();
            for (fl, fstack) in self.resolve_funs(&r1) {
                if fl != mf {
                    continue;
                }
                out.extend(self.lookup(name, fl, fstack)?);
            }
            Ok(out)
        }
    }

    /// Bounded resolution of the function values an abstract result can
    /// denote, keeping their stacks (needed to continue lookups).
    fn resolve_funs(&self, r: &AbsRes) -> Vec<(Label, StackId)> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut parents: Vec<(Tag, AbsRes)> = Vec::new();
        collect_funs(r, &mut parents, self.cfg.eval_depth, &self.cfg, &mut seen, &mut out);
        out
    }
}

fn collect_funs(
    r: &AbsRes,
    parents: &mut Vec<(Tag, AbsRes)>,
    depth: u32,
    cfg: &AnalyzeConfig,
    seen: &mut BTreeSet<(Label, StackId)>,
    out: &mut Vec<(Label, StackId)>,
) {
    for atom in r {
        match atom {
            AbsAtom::Fun(l, s) => {
                if seen.insert((*l, *s)) {
                    out.push((*l, *s));
                }
            }
            AbsAtom::Labeled(inner, tag) => {
                parents.push((tag.clone(), inner.clone()));
                collect_funs(inner, parents, depth, cfg, seen, out);
                parents.pop();
            }
            AbsAtom::Guarded(g, inner) => {
                // follow the branch unless the guard provably fails
                let bools = crate::resval::guard_feasible(g, cfg);
                if bools {
                    collect_funs(inner, parents, depth, cfg, seen, out);
                }
            }
            AbsAtom::Stub(tag) => {
                if depth > 0 {
                    if let Some((_, body)) = parents.iter().rev().find(|(t, _)| t == tag) {
                        let body = body.clone();
                        collect_funs(&body, parents, depth - 1, cfg, seen, out);
                    }
                }
            }
            AbsAtom::Proj(inner, field) => {
                // resolve projections through literal record alternatives
                let mut records = Vec::new();
                collect_records(inner, parents, depth, &mut records);
                for fields in records {
                    if let Some((_, fr)) = fields.iter().find(|(n, _)| n == field) {
                        collect_funs(fr, parents, depth, cfg, seen, out);
                    }
                }
            }
            AbsAtom::Int(_) | AbsAtom::Bool(_) | AbsAtom::Op(..) | AbsAtom::Record(_) | AbsAtom::Inspect(..) => {}
        }
    }
}

fn collect_records(
    r: &AbsRes,
    parents: &Vec<(Tag, AbsRes)>,
    depth: u32,
    out: &mut Vec<Vec<(Sym, AbsRes)>>,
) {
    for atom in r {
        match atom {
            AbsAtom::Record(fields) => out.push(fields.clone()),
            AbsAtom::Labeled(inner, _) | AbsAtom::Guarded(_, inner) => {
                collect_records(inner, parents, depth, out)
            }
            AbsAtom::Stub(tag)
                if depth > 0 => {
                    if let Some((_, body)) = parents.iter().rev().find(|(t, _)| t == tag) {
                        collect_records(body, parents, depth - 1, out);
                    }
                }
            _ => {}
        }
    }
}
