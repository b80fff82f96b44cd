//! Bounded evaluation and simplification of abstract results.
//!
//! Abstract results are finite but self-referential (stubs point back to
//! labeled parents). [`abs_eval`] unrolls that structure to a bounded depth
//! and produces the set of ground values it can denote, flagging whether
//! the bound was hit. [`simplify`] rewrites a result into a smaller
//! equivalent one, which both helps readability and makes the Horn-clause
//! translation cheaper.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::analyzer::{AbsAtom, AbsRes, AnalyzeConfig, Guard, PathCond, Tag};
use crate::interp::{apply_op, EvalError, Value};
use crate::syntax::BinOp;

/// A bounded concretization: the ground values found, plus whether some
/// stub ran out of unrolling depth (in which case the set is a subset of
/// the true denotation).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConcSet {
    pub values: BTreeSet<Value>,
    pub widened: bool,
}

impl ConcSet {
    pub fn exact(&self) -> bool {
        !self.widened
    }

    fn just(v: Value) -> ConcSet {
        ConcSet { values: BTreeSet::from([v]), widened: false }
    }

    fn union(mut self, other: ConcSet) -> ConcSet {
        self.values.extend(other.values);
        self.widened |= other.widened;
        self
    }
}

/// Evaluate an abstract result to ground values, unrolling each stub at
/// most `depth` times. Errors only on operator type mismatches.
pub fn abs_eval(r: &AbsRes, depth: u32) -> Result<ConcSet, EvalError> {
    let mut parents = Vec::new();
    eval_set(r, &mut parents, depth)
}

type Parents = Vec<(Tag, AbsRes)>;

fn eval_set(r: &AbsRes, parents: &mut Parents, depth: u32) -> Result<ConcSet, EvalError> {
    let mut out = ConcSet::default();
    for atom in r {
        out = out.union(eval_atom(atom, parents, depth)?);
    }
    Ok(out)
}

fn eval_atom(a: &AbsAtom, parents: &mut Parents, depth: u32) -> Result<ConcSet, EvalError> {
    match a {
        AbsAtom::Int(n) => Ok(ConcSet::just(Value::Int(n.clone()))),
        AbsAtom::Bool(b) => Ok(ConcSet::just(Value::Bool(*b))),
        // ground views drop the definition stack
        AbsAtom::Fun(l, _) => Ok(ConcSet::just(Value::Fun(*l))),
        AbsAtom::Labeled(inner, tag) => {
            parents.push((tag.clone(), inner.clone()));
            let out = eval_set(inner, parents, depth);
            parents.pop();
            out
        }
        AbsAtom::Stub(tag) => {
            let found = parents.iter().rev().find(|(t, _)| t == tag).map(|(_, b)| b.clone());
            match found {
                Some(body) if depth > 0 => eval_set(&body, parents, depth - 1),
                Some(_) | None => Ok(ConcSet { values: BTreeSet::new(), widened: true }),
            }
        }
        AbsAtom::Guarded(g, inner) => {
            let cond = eval_set(&g.cond, parents, depth)?;
            let want = Value::Bool(g.expect);
            if cond.values.contains(&want) {
                let mut out = eval_set(inner, parents, depth)?;
                out.widened |= cond.widened;
                Ok(out)
            } else if cond.widened {
                // the guard may still hold beyond the bound
                let mut out = eval_set(inner, parents, depth)?;
                out.widened = true;
                Ok(out)
            } else {
                Ok(ConcSet::default())
            }
        }
        AbsAtom::Op(lhs, op, rhs) => {
            let l = eval_set(lhs, parents, depth)?;
            let r = eval_set(rhs, parents, depth)?;
            let mut out = ConcSet { values: BTreeSet::new(), widened: l.widened || r.widened };
            for a in &l.values {
                for b in &r.values {
                    out.values.insert(apply_op(*op, a, b)?);
                }
            }
            Ok(out)
        }
        AbsAtom::Record(fields) => {
            // cross product of the field denotations
            let mut acc: Vec<std::collections::BTreeMap<String, Value>> =
                vec![std::collections::BTreeMap::new()];
            let mut widened = false;
            for (name, fr) in fields {
                let fv = eval_set(fr, parents, depth)?;
                widened |= fv.widened;
                let mut next = Vec::new();
                for base in &acc {
                    for v in &fv.values {
                        let mut m = base.clone();
                        m.insert(name.clone(), v.clone());
                        next.push(m);
                    }
                }
                acc = next;
            }
            Ok(ConcSet { values: acc.into_iter().map(Value::Record).collect(), widened })
        }
        // sets over-approximate, so an alternative that is not a record
        // with the field belongs to an infeasible path and is pruned
        AbsAtom::Proj(inner, field) => {
            let rec = eval_set(inner, parents, depth)?;
            let mut out = ConcSet { values: BTreeSet::new(), widened: rec.widened };
            for v in rec.values {
                if let Value::Record(fields) = v {
                    if let Some(fv) = fields.get(field) {
                        out.values.insert(fv.clone());
                    }
                }
            }
            Ok(out)
        }
        AbsAtom::Inspect(field, inner) => {
            let rec = eval_set(inner, parents, depth)?;
            let mut out = ConcSet { values: BTreeSet::new(), widened: rec.widened };
            for v in rec.values {
                if let Value::Record(fields) = v {
                    out.values.insert(Value::Bool(fields.contains_key(field)));
                }
            }
            Ok(out)
        }
    }
}

/// Which branch outcomes a conditional guard can take. Evaluation errors
/// and widened results conservatively allow both.
pub fn branch_feasibility(cond: &AbsRes, _pi: &PathCond, cfg: &AnalyzeConfig) -> BTreeSet<bool> {
    match abs_eval(cond, cfg.eval_depth) {
        Ok(c) if c.exact() => {
            let mut out = BTreeSet::new();
            for b in [true, false] {
                if c.values.contains(&Value::Bool(b)) {
                    out.insert(b);
                }
            }
            // a guard that can only be a non-boolean gets both branches
            // pruned; treat the degenerate empty case as infeasible-both
            if out.is_empty() && c.values.is_empty() {
                return BTreeSet::new();
            }
            if out.is_empty() {
                return BTreeSet::from([true, false]);
            }
            out
        }
        _ => BTreeSet::from([true, false]),
    }
}

/// True unless the guard provably evaluates to the opposite constant.
pub fn guard_feasible(g: &Guard, cfg: &AnalyzeConfig) -> bool {
    branch_feasibility(&g.cond, &Vec::new(), cfg).contains(&g.expect)
}

// ---------------------------------------------------------------------------
// Simplification
// ---------------------------------------------------------------------------

/// Rewrite an abstract result to an equivalent, usually smaller one.
///
/// Rules applied innermost-first to a fixpoint (with a step cap):
/// 1. a stub-free, function-free result collapses to its ground values;
/// 2. operations on single constants fold;
/// 3. constants re-associate one way: `a + (b ⊕ x)` → `(a + b) ⊕ x`;
/// 4. projections from literal records select the field;
/// 5. projections/inspections blocked on a stub unroll the stub once;
/// 6. an operation over two-element sets distributes into four
///    singleton-operand operations;
/// 7. identically-tagged labeled operands of an operation merge under one
///    tag;
/// 8. identically-guarded operands of an operation merge under one guard.
pub fn simplify(r: &AbsRes, depth: u32) -> AbsRes {
    let mut cur = r.clone();
    let mut unroll_budget: u32 = 64;
    for _ in 0..100_000 {
        let parents = collect_parents(&cur);
        let next = simp_set(&cur, &parents, depth, &mut unroll_budget);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn collect_parents(r: &AbsRes) -> Vec<(Tag, AbsRes)> {
    let mut out = Vec::new();
    fn walk(r: &AbsRes, out: &mut Vec<(Tag, AbsRes)>) {
        for a in r {
            match a {
                AbsAtom::Labeled(inner, tag) => {
                    out.push((tag.clone(), inner.clone()));
                    walk(inner, out);
                }
                AbsAtom::Guarded(g, inner) => {
                    walk(&g.cond, out);
                    walk(inner, out);
                }
                AbsAtom::Op(l, _, rr) => {
                    walk(l, out);
                    walk(rr, out);
                }
                AbsAtom::Record(fields) => fields.iter().for_each(|(_, fr)| walk(fr, out)),
                AbsAtom::Proj(inner, _) | AbsAtom::Inspect(_, inner) => walk(inner, out),
                _ => {}
            }
        }
    }
    walk(r, &mut out);
    out
}

fn simp_set(r: &AbsRes, parents: &[(Tag, AbsRes)], depth: u32, unrolls: &mut u32) -> AbsRes {
    // rule 1: collapse when fully ground
    if !contains_stub(r) && !contains_fun(r) {
        if let Ok(c) = abs_eval(r, 0) {
            if c.exact() {
                return c.values.into_iter().map(value_to_atom).collect();
            }
        }
    }
    let mut out = AbsRes::new();
    for a in r {
        let a = simp_atom(a, parents, depth, unrolls);
        // rule 6: distribute an operation over small operand sets into
        // singleton-operand operations
        if let AbsAtom::Op(l, op, rr) = &a {
            if (l.len() > 1 || rr.len() > 1) && l.len() * rr.len() <= 4 && !l.is_empty() && !rr.is_empty() {
                for la in l {
                    for ra in rr {
                        out.insert(AbsAtom::Op(
                            BTreeSet::from([la.clone()]),
                            *op,
                            BTreeSet::from([ra.clone()]),
                        ));
                    }
                }
                continue;
            }
        }
        out.insert(a);
    }
    out
}

fn simp_atom(a: &AbsAtom, parents: &[(Tag, AbsRes)], depth: u32, unrolls: &mut u32) -> AbsAtom {
    match a {
        AbsAtom::Int(_) | AbsAtom::Bool(_) | AbsAtom::Fun(..) | AbsAtom::Stub(_) => a.clone(),
        AbsAtom::Labeled(inner, tag) => {
            AbsAtom::Labeled(simp_set(inner, parents, depth, unrolls), tag.clone())
        }
        AbsAtom::Guarded(g, inner) => AbsAtom::Guarded(
            Guard { cond: simp_set(&g.cond, parents, depth, unrolls), expect: g.expect },
            simp_set(inner, parents, depth, unrolls),
        ),
        AbsAtom::Record(fields) => AbsAtom::Record(
            fields
                .iter()
                .map(|(n, fr)| (n.clone(), simp_set(fr, parents, depth, unrolls)))
                .collect(),
        ),
        AbsAtom::Inspect(f, inner) => {
            let inner = simp_set(inner, parents, depth, unrolls);
            if let Some(u) = unroll_if_stub(&inner, parents, unrolls) {
                return AbsAtom::Inspect(f.clone(), u);
            }
            AbsAtom::Inspect(f.clone(), inner)
        }
        AbsAtom::Proj(inner, f) => {
            let inner = simp_set(inner, parents, depth, unrolls);
            // rule 4: project a literal singleton record
            if inner.len() == 1 {
                if let Some(AbsAtom::Record(fields)) = inner.iter().next() {
                    if let Some((_, fr)) = fields.iter().find(|(n, _)| n == f) {
                        if fr.len() == 1 {
                            return fr.iter().next().unwrap().clone();
                        }
                    }
                }
            }
            // rule 5: unroll a stub the projection is blocked on
            if let Some(u) = unroll_if_stub(&inner, parents, unrolls) {
                return AbsAtom::Proj(u, f.clone());
            }
            AbsAtom::Proj(inner, f.clone())
        }
        AbsAtom::Op(lhs, op, rhs) => {
            let lhs = simp_set(lhs, parents, depth, unrolls);
            let rhs = simp_set(rhs, parents, depth, unrolls);
            simp_op(&lhs, *op, &rhs)
        }
    }
}

fn simp_op(lhs: &AbsRes, op: BinOp, rhs: &AbsRes) -> AbsAtom {
    // rule 2: fold two constants
    if let (Some(a), Some(b)) = (singleton_const(lhs), singleton_const(rhs)) {
        if let Ok(v) = apply_op(op, &a, &b) {
            return value_to_atom(v);
        }
    }
    // rule 3: hoist a constant through an associative chain, one direction
    // only so the rewrite terminates: a + (b ⊕ x) → (a + b) ⊕ x
    if op == BinOp::Add {
        if let (Some(Value::Int(a)), Some(AbsAtom::Op(il, iop, ir))) =
            (singleton_const(lhs), singleton_atom(rhs))
        {
            if matches!(iop, BinOp::Add | BinOp::Sub) {
                if let Some(Value::Int(b)) = singleton_const(il) {
                    let folded: AbsRes =
                        BTreeSet::from([AbsAtom::Int(a + b)]);
                    return AbsAtom::Op(folded, *iop, ir.clone());
                }
            }
        }
    }
    // rule 7: merge identically-tagged labeled operands
    if let (Some(AbsAtom::Labeled(li, lt)), Some(AbsAtom::Labeled(ri, rt))) =
        (singleton_atom(lhs), singleton_atom(rhs))
    {
        if lt == rt {
            let merged = BTreeSet::from([AbsAtom::Op(li.clone(), op, ri.clone())]);
            return AbsAtom::Labeled(merged, lt.clone());
        }
    }
    // rule 8: merge identically-guarded operands
    if let (Some(AbsAtom::Guarded(lg, li)), Some(AbsAtom::Guarded(rg, ri))) =
        (singleton_atom(lhs), singleton_atom(rhs))
    {
        if lg == rg {
            let merged = BTreeSet::from([AbsAtom::Op(li.clone(), op, ri.clone())]);
            return AbsAtom::Guarded(lg.clone(), merged);
        }
    }
    // rule 6: distribute small sets into singleton-operand operations is
    // handled at the set level by the caller keeping the Op atom; here we
    // only rebuild
    AbsAtom::Op(lhs.clone(), op, rhs.clone())
}

fn unroll_if_stub(
    inner: &AbsRes,
    parents: &[(Tag, AbsRes)],
    unrolls: &mut u32,
) -> Option<AbsRes> {
    if *unrolls == 0 {
        return None;
    }
    let mut changed = false;
    let mut out = AbsRes::new();
    for a in inner {
        match a {
            AbsAtom::Stub(tag) => {
                if let Some((_, body)) = parents.iter().rev().find(|(t, _)| t == tag) {
                    out.extend(body.iter().cloned());
                    changed = true;
                } else {
                    out.insert(a.clone());
                }
            }
            _ => {
                out.insert(a.clone());
            }
        }
    }
    if changed {
        *unrolls -= 1;
        Some(out)
    } else {
        None
    }
}

fn singleton_atom(r: &AbsRes) -> Option<&AbsAtom> {
    if r.len() == 1 {
        r.iter().next()
    } else {
        None
    }
}

fn singleton_const(r: &AbsRes) -> Option<Value> {
    match singleton_atom(r)? {
        AbsAtom::Int(n) => Some(Value::Int(n.clone())),
        AbsAtom::Bool(b) => Some(Value::Bool(*b)),
        _ => None,
    }
}

fn value_to_atom(v: Value) -> AbsAtom {
    match v {
        Value::Int(n) => AbsAtom::Int(n),
        Value::Bool(b) => AbsAtom::Bool(b),
        Value::Fun(l) => AbsAtom::Fun(l, crate::stack::StackId::EMPTY),
        Value::Record(fields) => AbsAtom::Record(
            fields
                .into_iter()
                .map(|(n, fv)| (n, BTreeSet::from([value_to_atom(fv)])))
                .collect(),
        ),
    }
}

fn contains_stub(r: &AbsRes) -> bool {
    r.iter().any(|a| match a {
        AbsAtom::Stub(_) => true,
        AbsAtom::Labeled(inner, _) => contains_stub(inner),
        AbsAtom::Guarded(g, inner) => contains_stub(&g.cond) || contains_stub(inner),
        AbsAtom::Op(l, _, rr) => contains_stub(l) || contains_stub(rr),
        AbsAtom::Record(fields) => fields.iter().any(|(_, fr)| contains_stub(fr)),
        AbsAtom::Proj(inner, _) | AbsAtom::Inspect(_, inner) => contains_stub(inner),
        _ => false,
    })
}

fn contains_fun(r: &AbsRes) -> bool {
    r.iter().any(|a| match a {
        AbsAtom::Fun(..) => true,
        AbsAtom::Labeled(inner, _) => contains_fun(inner),
        AbsAtom::Guarded(g, inner) => contains_fun(&g.cond) || contains_fun(inner),
        AbsAtom::Op(l, _, rr) => contains_fun(l) || contains_fun(rr),
        AbsAtom::Record(fields) => fields.iter().any(|(_, fr)| contains_fun(fr)),
        AbsAtom::Proj(inner, _) | AbsAtom::Inspect(_, inner) => contains_fun(inner),
        _ => false,
    })
}

/// `BigInt` helper used by tests.
pub fn int(n: i64) -> BigInt {
    BigInt::from(n)
}
