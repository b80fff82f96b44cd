//! Acceptance suite: one test (and one pass/fail line) per release criterion.
//!
//! Run with `cargo test --test acceptance`. Criteria that need an external
//! Horn solver use it only when `PUREDEMAND_SOLVER` is set; otherwise the
//! bounded fallback applies.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use puredemand::analyzer::{
    analyze, analyze_all_paths_core, analyze_single_path, suffixes, AbsAtom, AbsRes,
    AnalyzeConfig, SpVal, Tag,
};
use puredemand::chc::{root_model, to_chc, Model};
use puredemand::interp::{
    eval_chain, eval_demand, eval_display, eval_env, eval_optimized, force, render_resval,
    render_value, DemandOpts, ResVal, Value,
};
use puredemand::resval::{abs_eval, int, simplify};
use puredemand::stack::{StackId, StackInterner};
use puredemand::syntax::{parse_program, BinOp, Label, Program};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus(name: &str) -> Program {
    let src = std::fs::read_to_string(corpus_dir().join(name)).expect("corpus file");
    parse_program(&src).expect("corpus parses")
}

fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("pd"))
        .collect();
    files.sort();
    files
}

fn terminating_corpus() -> Vec<(String, Program)> {
    corpus_files()
        .into_iter()
        .filter(|p| !p.file_name().unwrap().to_str().unwrap().contains("diverge"))
        .map(|p| {
            let name = p.file_name().unwrap().to_str().unwrap().to_string();
            let src = std::fs::read_to_string(&p).unwrap();
            (name, parse_program(&src).unwrap())
        })
        .collect()
}

fn pass(n: u32, what: &str) {
    println!("criterion {n:02}: PASS - {what}");
}

// --- 1. golden program under every semantics ---------------------------------

#[test]
fn criterion_01_golden_program_all_semantics() {
    let p = corpus("core_golden.pd");
    let budget = Duration::from_millis(50);
    type Check = (&'static str, Box<dyn Fn() -> String>);
    let checks: Vec<Check> = vec![
        ("demand", Box::new(|| {
            let o = eval_demand(&corpus("core_golden.pd"), &DemandOpts::default()).unwrap();
            render_value(&force(&o.result).unwrap())
        })),
        ("env", Box::new(|| render_value(&eval_env(&corpus("core_golden.pd"), 1_000_000).unwrap().to_value()))),
        ("chain", Box::new(|| render_value(&force(&eval_chain(&corpus("core_golden.pd"), 1_000_000).unwrap().result).unwrap()))),
        ("display", Box::new(|| render_value(&force(&eval_display(&corpus("core_golden.pd"), 1_000_000).unwrap().result).unwrap()))),
        ("opt", Box::new(|| render_value(&force(&eval_optimized(&corpus("core_golden.pd"), 1_000_000).unwrap().result).unwrap()))),
    ];
    assert!(p.is_core());
    for (name, run) in checks {
        let t = Instant::now();
        let got = run();
        let spent = t.elapsed();
        assert_eq!(got, "1", "{name} printed {got}");
        assert!(spent < budget, "{name} took {spent:?}");
    }
    pass(1, "golden program evaluates to 1 under all five semantics, each < 50 ms");
}

// --- 2. demand/env equivalence over the corpus --------------------------------

#[test]
fn criterion_02_equivalence_suite() {
    let t = Instant::now();
    let programs = terminating_corpus();
    assert!(programs.len() >= 20, "corpus too small: {}", programs.len());
    for (name, p) in &programs {
        let d = eval_demand(p, &DemandOpts::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
        let dv = force(&d.result).unwrap_or_else(|e| panic!("{name}: {e}"));
        let ev = eval_env(p, 10_000_000).unwrap_or_else(|e| panic!("{name}: {e}")).to_value();
        assert_eq!(dv, ev, "{name}");
    }
    let spent = t.elapsed();
    assert!(spent < Duration::from_secs(10), "suite took {spent:?}");
    pass(2, "demand and env agree on every terminating corpus program");
}

// --- 3. cache transparency and memoized-lookup linearity ----------------------

fn fib_iter(n: u32) -> Program {
    parse_program(&format!(
        "let fib = fun self -> fun n -> fun a -> fun b -> if n = 0 then a else self self (n - 1) b (a + b) in fib fib {n} 0 1"
    ))
    .unwrap()
}

#[test]
fn criterion_03_cache_transparency_and_linearity() {
    // transparency: identical rendered results with and without the cache
    for (name, p) in terminating_corpus() {
        let on = eval_demand(&p, &DemandOpts::default()).unwrap();
        let off = eval_demand(&p, &DemandOpts { cache: false, ..DemandOpts::default() }).unwrap();
        assert_eq!(
            render_resval(&on.result, &on.stacks),
            render_resval(&off.result, &off.stacks),
            "{name}"
        );
    }
    // memoization keeps the firing count linear in the input size
    let t = Instant::now();
    let small = eval_demand(&fib_iter(5), &DemandOpts::default()).unwrap().counters.app_firings;
    let big = eval_demand(&fib_iter(20), &DemandOpts::default()).unwrap().counters.app_firings;
    assert!(big <= 25 * small, "fib(20) fired {big} vs fib(5)'s {small}");
    assert!(t.elapsed() < Duration::from_secs(1));
    pass(3, "cache is transparent and keeps self-passing Fibonacci linear");
}

// --- 4. analysis termination --------------------------------------------------

#[test]
fn criterion_04_analysis_terminates_in_budget() {
    let cfg = AnalyzeConfig::default();
    assert_eq!(cfg.k, 2);
    for path in corpus_files() {
        let src = std::fs::read_to_string(&path).unwrap();
        let p = parse_program(&src).unwrap();
        let out = analyze(&p, &cfg).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(out.nodes_used <= 1_000_000, "{}", path.display());
        assert_eq!(out.monotonicity_violations, 0, "{}", path.display());
    }
    // two-function mutual self-application
    let p = parse_program("let f = fun x -> x x in let g = fun y -> y y in f g").unwrap();
    analyze(&p, &cfg).unwrap();

    // omega yields the empty set or a single stub
    let out = analyze(&corpus("diverge_omega.pd"), &cfg).unwrap();
    let mut leaves = Vec::new();
    flatten_labels(&out.result, &mut leaves);
    assert!(
        leaves.is_empty() || (leaves.len() == 1 && matches!(leaves[0], AbsAtom::Stub(_))),
        "omega result: {leaves:?}"
    );
    pass(4, "k=2 analysis terminates within the node budget on the whole corpus");
}

fn flatten_labels(r: &AbsRes, acc: &mut Vec<AbsAtom>) {
    for a in r {
        match a {
            AbsAtom::Labeled(inner, _) => flatten_labels(inner, acc),
            other => acc.push(other.clone()),
        }
    }
}

// --- 5. concrete soundness on core programs -----------------------------------

fn core_corpus() -> Vec<(String, Program)> {
    terminating_corpus().into_iter().filter(|(_, p)| p.is_core()).collect()
}

fn abstract_funs(r: &AbsRes, acc: &mut BTreeSet<(Label, StackId)>) {
    for a in r {
        match a {
            AbsAtom::Fun(l, s) => {
                acc.insert((*l, *s));
            }
            AbsAtom::Labeled(inner, _) | AbsAtom::Guarded(_, inner) => abstract_funs(inner, acc),
            AbsAtom::Op(l, _, rr) => {
                abstract_funs(l, acc);
                abstract_funs(rr, acc);
            }
            _ => {}
        }
    }
}

#[test]
fn criterion_05_concrete_soundness() {
    let t = Instant::now();
    let cfg = AnalyzeConfig::default();
    let programs = core_corpus();
    assert!(!programs.is_empty());
    for (name, p) in &programs {
        let o = eval_demand(p, &DemandOpts::default()).unwrap();
        let ap = analyze_all_paths_core(p, &cfg).unwrap();
        match &o.result {
            ResVal::Fun(l, s) => {
                // Stitching can recover at most the context recorded in
                // <= k-frame fragments, so the abstract definition stack is
                // a prefix of the truncated concrete one, not always equal.
                let mut frames = o.stacks.frames(*s);
                frames.truncate(cfg.k);
                let mut funs = BTreeSet::new();
                abstract_funs(&ap.result, &mut funs);
                let covered = funs.iter().any(|(al, asid)| {
                    al == l && frames.starts_with(&ap.stacks.frames(*asid))
                });
                assert!(covered, "{name}: fun ({l}, {frames:?}) not covered");
            }
            other => {
                let v = force(other).unwrap();
                let conc = abs_eval(&ap.result, 6).unwrap();
                assert!(conc.values.contains(&v) || !conc.exact(), "{name}: {v:?} missing");
            }
        }
    }
    let spent = t.elapsed();
    assert!(spent < Duration::from_secs(10), "took {spent:?}");
    pass(5, "every terminating core program's concrete result is in the abstraction");
}

// --- 6. single-path included in all-paths --------------------------------------

#[test]
fn criterion_06_single_path_within_all_paths() {
    let cfg = AnalyzeConfig::default();
    for (name, p) in core_corpus() {
        let sp = analyze_single_path(&p, cfg.k, 500_000).unwrap();
        let ap = analyze_all_paths_core(&p, &cfg).unwrap();
        let mut funs = BTreeSet::new();
        abstract_funs(&ap.result, &mut funs);
        let ground = abs_eval(&ap.result, 6).unwrap();
        for v in sp.atoms() {
            match v {
                SpVal::Fun(l, s) => {
                    let frames = sp.stacks.frames(s);
                    let mut st = ap.stacks.clone();
                    let want = st.from_frames(&frames);
                    assert!(funs.contains(&(l, want)), "{name}: fun ({l}, {frames:?})");
                }
                SpVal::Int(n) => assert!(
                    ground.values.contains(&Value::Int(n.clone())) || !ground.exact(),
                    "{name}: {n}"
                ),
                SpVal::Bool(b) => assert!(
                    ground.values.contains(&Value::Bool(b)) || !ground.exact(),
                    "{name}: {b}"
                ),
            }
        }
    }
    pass(6, "single-path atoms are contained in the all-paths result on core programs");
}

// --- 7. stitching micro-oracle --------------------------------------------------

#[test]
fn criterion_07_stitching_micro_oracle() {
    let mut st = StackInterner::new();
    let (l0, l1, l2, l3, l4) = (Label(0), Label(1), Label(2), Label(3), Label(4));
    let mut frags = BTreeSet::new();
    frags.insert(st.from_frames(&[l2, l1]));
    frags.insert(st.from_frames(&[l2, l3]));
    frags.insert(st.from_frames(&[l1, l0]));

    let s_l1 = st.from_frames(&[l1]);
    assert_eq!(suffixes(&mut st, l2, s_l1, &frags), BTreeSet::from([s_l1]));
    let s_l0 = st.from_frames(&[l0]);
    assert_eq!(suffixes(&mut st, l1, StackId::EMPTY, &frags), BTreeSet::from([s_l0]));

    frags.insert(st.from_frames(&[l1, l4]));
    let s_l4 = st.from_frames(&[l4]);
    assert_eq!(
        suffixes(&mut st, l1, StackId::EMPTY, &frags),
        BTreeSet::from([s_l0, s_l4])
    );
    pass(7, "worked stitching example pops exactly the expected stacks");
}

// --- 8. recurrence extraction ----------------------------------------------------

fn recurrence_parts(r: &AbsRes, parents: &mut Vec<Tag>, base: &mut bool, rec: &mut bool) {
    for a in r {
        match a {
            AbsAtom::Labeled(inner, tag) => {
                parents.push(tag.clone());
                recurrence_parts(inner, parents, base, rec);
                parents.pop();
            }
            AbsAtom::Guarded(g, inner) => {
                recurrence_parts(&g.cond, parents, base, rec);
                recurrence_parts(inner, parents, base, rec);
            }
            AbsAtom::Op(l, _, rr) => {
                recurrence_parts(l, parents, base, rec);
                recurrence_parts(rr, parents, base, rec);
            }
            AbsAtom::Int(n) if *n == int(0) => *base = true,
            AbsAtom::Stub(tag)
                if parents.iter().any(|t| t == tag) => {
                    *rec = true;
                }
            _ => {}
        }
    }
}

#[test]
fn criterion_08_identity_recurrence() {
    let p = corpus("id10.pd");
    let cfg = AnalyzeConfig {
        solver: std::env::var_os("PUREDEMAND_SOLVER").map(PathBuf::from),
        ..AnalyzeConfig::default()
    };
    let out = analyze(&p, &cfg).unwrap();
    assert_eq!(out.obligations.len(), 1);
    let r = &out.obligations[0].result;

    let (mut base, mut rec) = (false, false);
    recurrence_parts(r, &mut Vec::new(), &mut base, &mut rec);
    assert!(base, "guarded base case 0 missing");
    assert!(rec, "stub referring to an enclosing parent missing");

    let conc = abs_eval(r, 10).unwrap();
    for n in 2..=10 {
        assert!(conc.values.contains(&Value::Int(int(n))), "{n} missing at depth 10");
    }

    if cfg.solver.is_some() {
        let t = Instant::now();
        let verdict = puredemand::chc::verify_letassert(&p, &out.obligations[0], &cfg);
        assert!(
            matches!(verdict, puredemand::chc::VerifyResult::Verified),
            "solver verdict: {verdict:?}"
        );
        assert!(t.elapsed() < Duration::from_secs(10));
        pass(8, "identity recurrence has the expected shape; solver verdict Verified");
    } else {
        pass(8, "identity recurrence has the expected shape (solver absent; bounded check)");
    }
}

// --- 9. map recurrence -------------------------------------------------------------

#[test]
fn criterion_09_map_recurrence() {
    let p = corpus("map3.pd");
    let t = Instant::now();
    let out = analyze(&p, &AnalyzeConfig::default()).unwrap();
    assert!(t.elapsed() < Duration::from_secs(30));

    // the rendered graph must show at least one cut cycle
    let dot_out = tempfile::NamedTempFile::new().unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_puredemand"))
        .arg("analyze")
        .arg(corpus_dir().join("map3.pd"))
        .arg("--dot")
        .arg(dot_out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let dot = std::fs::read_to_string(dot_out.path()).unwrap();
    assert!(dot.contains("style=dashed"), "no dashed back-edge in DOT output");

    // the concrete list is contained in a bounded unrolling
    let o = eval_demand(&p, &DemandOpts::default()).unwrap();
    let concrete = force(&o.result).unwrap();
    let found = (1..=6).any(|d| {
        abs_eval(&out.result, d).map(|c| c.values.contains(&concrete)).unwrap_or(false)
    });
    assert!(found, "concrete map result not found within depth 6");
    pass(9, "map recurrence terminates, draws a back-edge, and contains the concrete list");
}

// --- 10. Horn-clause minimal-model agreement -----------------------------------------

/// Deterministic split-mix generator; no external dependency needed for a
/// fixed randomized suite.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

fn random_ints(rng: &mut Rng) -> AbsRes {
    (0..1 + rng.below(2))
        .map(|_| AbsAtom::Int(int(rng.below(40) as i64 - 20)))
        .collect()
}

fn random_ground_res(rng: &mut Rng, depth: u32) -> AbsRes {
    match if depth == 0 { 0 } else { rng.below(4) } {
        0 => random_ints(rng),
        1 => BTreeSet::from([AbsAtom::Bool(rng.below(2) == 0)]),
        2 => {
            let op = if rng.below(2) == 0 { BinOp::Add } else { BinOp::Sub };
            BTreeSet::from([AbsAtom::Op(random_ints(rng), op, random_ints(rng))])
        }
        _ => {
            let b = rng.below(2) == 0;
            let expect = rng.below(2) == 0;
            let guard = puredemand::analyzer::Guard {
                cond: BTreeSet::from([AbsAtom::Bool(b)]),
                expect,
            };
            let mut out = random_ground_res(rng, depth - 1);
            out.insert(AbsAtom::Guarded(guard, random_ground_res(rng, depth - 1)));
            out
        }
    }
}

#[test]
fn criterion_10_chc_minimal_model_agreement() {
    let t = Instant::now();
    let mut rng = Rng(0xACCE97);
    let mut checked = 0;
    while checked < 50 {
        let r = random_ground_res(&mut rng, 3);
        let Ok(sys) = to_chc(&r) else { continue };
        let conc = abs_eval(&r, 0).unwrap();
        assert!(conc.exact(), "stub-free result must evaluate exactly");
        assert!(conc.values.len() <= 16);
        let model = root_model(&sys, 100_000).unwrap();
        assert_eq!(model, Model::Finite(conc.values), "case {checked}");
        checked += 1;
    }
    assert!(t.elapsed() < Duration::from_secs(5));
    pass(10, "bottom-up saturation matches bounded evaluation on 50 random results");
}

// --- 11. performance envelope ----------------------------------------------------------

#[test]
fn criterion_11_performance_envelope() {
    let cfg = AnalyzeConfig::default();
    let mut times = Vec::new();
    for path in corpus_files() {
        let src = std::fs::read_to_string(&path).unwrap();
        let p = parse_program(&src).unwrap();
        let t = Instant::now();
        analyze(&p, &cfg).unwrap();
        let spent = t.elapsed();
        assert!(spent < Duration::from_secs(30), "{}: {spent:?}", path.display());
        times.push(spent);
    }
    times.sort();
    let median = times[times.len() / 2];
    assert!(median < Duration::from_secs(1), "median {median:?}");
    pass(11, "median analysis time < 1 s; no corpus program exceeds 30 s");
}

// --- 12. property spot-checks ------------------------------------------------------------

fn random_stack(rng: &mut Rng, st: &mut StackInterner, max_len: u64) -> StackId {
    let len = rng.below(max_len + 1);
    let frames: Vec<Label> = (0..len).map(|_| Label(rng.below(6) as u32)).collect();
    st.from_frames(&frames)
}

#[test]
fn criterion_12_property_suites() {
    // suffixes agrees with a brute-force frame-level definition (1000 cases)
    let mut rng = Rng(0x5EED);
    for _ in 0..1000 {
        let mut st = StackInterner::new();
        let l = Label(rng.below(6) as u32);
        let s = random_stack(&mut rng, &mut st, 2);
        let frags: BTreeSet<StackId> =
            (0..rng.below(8)).map(|_| random_stack(&mut rng, &mut st, 3)).collect();
        let mut prefix = vec![l];
        prefix.extend(st.frames(s));
        let mut want = BTreeSet::new();
        for &f in &frags {
            let fr = st.frames(f);
            if fr.len() >= prefix.len() && fr[..prefix.len()] == prefix[..] {
                let mut tail = prefix[1..].to_vec();
                tail.extend_from_slice(&fr[prefix.len()..]);
                want.insert(tail);
            }
        }
        let got: BTreeSet<Vec<Label>> = suffixes(&mut st, l, s, &frags)
            .into_iter()
            .map(|id| st.frames(id))
            .collect();
        assert_eq!(got, want);
    }

    // abs_eval is monotone in depth and exact on stub-free input; simplify
    // preserves the exact denotation
    let mut rng = Rng(0xD1CE);
    for _ in 0..200 {
        let r = random_ground_res(&mut rng, 3);
        let mut prev = abs_eval(&r, 0).unwrap();
        assert!(prev.exact());
        for d in 1..=4 {
            let cur = abs_eval(&r, d).unwrap();
            assert!(prev.values.is_subset(&cur.values));
            prev = cur;
        }
        let s = simplify(&r, 3);
        assert_eq!(abs_eval(&s, 0).unwrap().values, abs_eval(&r, 0).unwrap().values);
    }

    // fragment growth is monotone across the corpus (instrumented counter)
    for path in corpus_files() {
        let src = std::fs::read_to_string(&path).unwrap();
        let p = parse_program(&src).unwrap();
        let out = analyze(&p, &AnalyzeConfig::default()).unwrap();
        assert_eq!(out.monotonicity_violations, 0, "{}", path.display());
    }
    pass(12, "stitching, evaluation, simplification, and monotonicity properties hold");
}
