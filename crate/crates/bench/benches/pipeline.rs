//! End-to-end benchmarks: parsing, concrete evaluation under the demand and
//! environment semantics, analysis at k=2, and result simplification.

use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use puredemand::interp::{eval_demand, eval_env, DemandOpts};
use puredemand::resval::simplify;
use puredemand::syntax::{parse_program, Program};
use puredemand::{analyze, AnalyzeConfig};

fn corpus(name: &str) -> String {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    std::fs::read_to_string(dir.join(name)).expect("corpus file")
}

fn parsed(name: &str) -> Program {
    parse_program(&corpus(name)).expect("corpus parses")
}

const EVAL_PROGRAMS: &[&str] = &["core_golden.pd", "fib7.pd", "map3.pd", "deep_calls.pd"];
const ANALYZE_PROGRAMS: &[&str] = &["id10.pd", "fib7.pd", "map3.pd", "diverge_omega.pd"];

fn bench_parse(c: &mut Criterion) {
    let mut g = c.benchmark_group("parse");
    for name in EVAL_PROGRAMS {
        let src = corpus(name);
        g.bench_with_input(BenchmarkId::from_parameter(name), &src, |b, src| {
            b.iter(|| parse_program(src).unwrap());
        });
    }
    g.finish();
}

fn bench_eval(c: &mut Criterion) {
    let mut g = c.benchmark_group("eval_demand");
    for name in EVAL_PROGRAMS {
        let p = parsed(name);
        g.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| {
            b.iter(|| eval_demand(p, &DemandOpts::default()).unwrap());
        });
    }
    g.finish();

    let mut g = c.benchmark_group("eval_env");
    for name in EVAL_PROGRAMS {
        let p = parsed(name);
        g.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| {
            b.iter(|| eval_env(p, 10_000_000).unwrap());
        });
    }
    g.finish();
}

fn bench_analyze(c: &mut Criterion) {
    let cfg = AnalyzeConfig::default();
    let mut g = c.benchmark_group("analyze_k2");
    for name in ANALYZE_PROGRAMS {
        let p = parsed(name);
        g.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| {
            b.iter(|| analyze(p, &cfg).unwrap());
        });
    }
    g.finish();

    let mut g = c.benchmark_group("simplify");
    for name in ANALYZE_PROGRAMS {
        let out = analyze(&parsed(name), &cfg).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &out.result, |b, r| {
            b.iter(|| simplify(r, 3));
        });
    }
    g.finish();
}

criterion_group!(benches, bench_parse, bench_eval, bench_analyze);
criterion_main!(benches);
