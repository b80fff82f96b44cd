//! Batch front end: interpret, differential-check, analyze, and render.
//!
//! Exit codes: 0 success, 1 parse error, 2 stuck/fuel/depth, 3 analysis
//! budget exhausted.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use puredemand::analyzer::{analyze, render_absres, AnalyzeConfig, AnalyzeError};
use puredemand::chc::{emit_smtlib, to_chc, verify_letassert, VerifyResult};
use puredemand::interp::{
    eval_chain, eval_demand, eval_display, eval_env, eval_optimized, force, render_resval,
    render_value, DemandOpts, EvalError, EvalOutcome,
};

type CoreEval = fn(&Program, u64) -> Result<EvalOutcome, EvalError>;
use puredemand::resval::simplify;
use puredemand::syntax::{parse_program, Program};

mod dot;
mod report;

use report::RunReport;

/// Environment variable naming the default Horn solver binary.
const SOLVER_ENV: &str = "PUREDEMAND_SOLVER";

#[derive(Parser)]
#[command(name = "puredemand", version, about = "Demand semantics and stack-stitching analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a program under one of the concrete semantics.
    Interp(InterpArgs),
    /// Run all applicable semantics and compare their results.
    Check(CheckArgs),
    /// Run the stack-stitching analysis and check assertions.
    Analyze(AnalyzeArgs),
    /// Print the labeled syntax tree.
    DumpAst(FileArg),
}

#[derive(Args)]
struct FileArg {
    /// Source file.
    path: PathBuf,
    /// Emit the report as JSON on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct InterpArgs {
    path: PathBuf,
    /// Which evaluator to use.
    #[arg(long, default_value = "demand", value_parser = ["demand", "env", "chain", "display", "opt"])]
    semantics: String,
    /// Cache variable lookups (demand semantics only).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    cache: bool,
    /// Skip evaluating application arguments (demand semantics only).
    #[arg(long)]
    skip_arg: bool,
    /// Rule-firing budget before reporting probable divergence.
    #[arg(long, default_value_t = 10_000_000)]
    fuel: u64,
    /// Print one line per rule firing: RULE<TAB>label<TAB>stack.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    path: PathBuf,
    #[arg(long, default_value_t = 10_000_000)]
    fuel: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    path: PathBuf,
    /// Stack frames kept per call site.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Unrolling depth for bounded result evaluation.
    #[arg(long, default_value_t = 3)]
    eval_depth: u32,
    /// Horn solver binary (defaults to $PUREDEMAND_SOLVER if set).
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Solver wall-clock budget in milliseconds.
    #[arg(long, default_value_t = 10_000)]
    timeout: u64,
    /// Write the result graph as DOT.
    #[arg(long, value_name = "OUT")]
    dot: Option<PathBuf>,
    /// Write the Horn clauses as SMT-LIB.
    #[arg(long, value_name = "OUT")]
    chc: Option<PathBuf>,
    /// Derivation-node budget.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Interp(a) => cmd_interp(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Analyze(a) => cmd_analyze(a),
        Cmd::DumpAst(a) => cmd_dump_ast(a),
    }
}

fn load(path: &PathBuf, report: &mut RunReport) -> Result<Program, ExitCode> {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(ExitCode::from(1));
        }
    };
    let t = Instant::now();
    match parse_program(&src) {
        Ok(p) => {
            report.timings.parse_ms = t.elapsed().as_secs_f64() * 1000.0;
            Ok(p)
        }
        Err(e) => {
            eprintln!("parse error: {e}");
            Err(ExitCode::from(1))
        }
    }
}

fn eval_exit_code(e: &EvalError) -> ExitCode {
    match e {
        EvalError::FuelExhausted { .. }
        | EvalError::DepthExceeded { .. }
        | EvalError::Stuck { .. }
        | EvalError::Type(_)
        | EvalError::Unsupported { .. } => ExitCode::from(2),
    }
}

fn cmd_interp(a: InterpArgs) -> ExitCode {
    let mut report = RunReport::new(&a.path, "interp");
    let p = match load(&a.path, &mut report) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let t = Instant::now();
    let outcome = match a.semantics.as_str() {
        "env" => eval_env(&p, a.fuel).map(|v| (render_value(&v.to_value()), None)),
        "demand" => {
            let opts = DemandOpts {
                cache: a.cache,
                skip_arg: a.skip_arg,
                fuel: a.fuel,
                trace: a.trace,
                ..DemandOpts::default()
            };
            eval_demand(&p, &opts).map(|o| {
                for line in &o.trace {
                    println!("{line}");
                }
                report.counters.rule_firings = o.counters.rule_firings;
                report.counters.app_firings = o.counters.app_firings;
                report.counters.cache_hits = o.counters.cache_hits;
                let forced = force(&o.result)
                    .map(|v| render_value(&v))
                    .unwrap_or_else(|_| render_resval(&o.result, &o.stacks));
                (forced, Some(render_resval(&o.result, &o.stacks)))
            })
        }
        other => {
            let run = match other {
                "chain" => eval_chain,
                "display" => eval_display,
                "opt" => eval_optimized,
                _ => unreachable!("clap validates"),
            };
            run(&p, a.fuel).map(|o| {
                report.counters.rule_firings = o.counters.rule_firings;
                report.counters.app_firings = o.counters.app_firings;
                let forced = force(&o.result)
                    .map(|v| render_value(&v))
                    .unwrap_or_else(|_| render_resval(&o.result, &o.stacks));
                (forced, Some(render_resval(&o.result, &o.stacks)))
            })
        }
    };
    report.timings.eval_ms = t.elapsed().as_secs_f64() * 1000.0;
    match outcome {
        Ok((forced, residual)) => {
            report.result = Some(forced.clone());
            report.residual = residual;
            if a.json {
                println!("{}", report.to_json());
            } else {
                println!("{forced}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            eval_exit_code(&e)
        }
    }
}

fn cmd_check(a: CheckArgs) -> ExitCode {
    let mut report = RunReport::new(&a.path, "check");
    let p = match load(&a.path, &mut report) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let t = Instant::now();
    let demand = eval_demand(&p, &DemandOpts { fuel: a.fuel, ..DemandOpts::default() });
    let env = eval_env(&p, a.fuel);
    let mut verdicts: Vec<(String, String)> = Vec::new();
    let reference = match (&demand, &env) {
        (Ok(d), Ok(e)) => {
            let dv = force(&d.result).map(|v| render_value(&v));
            let ev = render_value(&e.to_value());
            match dv {
                Ok(dv) if dv == ev => {
                    verdicts.push(("demand=env".into(), "agree".into()));
                    Some(dv)
                }
                Ok(dv) => {
                    verdicts.push(("demand=env".into(), format!("DISAGREE: {dv} vs {ev}")));
                    None
                }
                Err(e2) => {
                    verdicts.push(("demand=env".into(), format!("DISAGREE: demand stuck: {e2}")));
                    None
                }
            }
        }
        (Err(de), Err(_ee)) => {
            // both diverge/fail: agreement on non-termination classes
            verdicts.push(("demand=env".into(), format!("agree (both fail: {de})")));
            Some("<error>".into())
        }
        (Ok(_), Err(ee)) => {
            verdicts.push(("demand=env".into(), format!("DISAGREE: env fails: {ee}")));
            None
        }
        (Err(de), Ok(_)) => {
            verdicts.push(("demand=env".into(), format!("DISAGREE: demand fails: {de}")));
            None
        }
    };
    if p.is_core() {
        for (name, run) in [
            ("chain", eval_chain as CoreEval),
            ("display", eval_display as CoreEval),
            ("opt", eval_optimized as CoreEval),
        ] {
            let got = run(&p, a.fuel);
            let entry = match (&reference, got) {
                (Some(r), Ok(o)) => {
                    let v = force(&o.result).map(|v| render_value(&v));
                    match v {
                        Ok(v) if &v == r => "agree".to_string(),
                        Ok(v) => format!("DISAGREE: {v} vs {r}"),
                        Err(e) => format!("DISAGREE: stuck: {e}"),
                    }
                }
                (Some(r), Err(e)) if r == "<error>" => format!("agree (fails: {e})"),
                (Some(r), Err(e)) => format!("DISAGREE: fails: {e} vs {r}"),
                (None, _) => "skipped (no reference)".to_string(),
            };
            verdicts.push((format!("demand={name}"), entry));
        }
    } else {
        verdicts.push(("chain/display/opt".into(), "unsupported (extended program)".into()));
    }
    report.timings.eval_ms = t.elapsed().as_secs_f64() * 1000.0;
    let all_agree = verdicts.iter().all(|(_, v)| !v.starts_with("DISAGREE"));
    report.verdicts = verdicts.clone();
    report.result = reference;
    if a.json {
        println!("{}", report.to_json());
    } else {
        for (what, verdict) in &verdicts {
            println!("{what}\t{verdict}");
        }
    }
    if all_agree {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_analyze(a: AnalyzeArgs) -> ExitCode {
    let mut report = RunReport::new(&a.path, "analyze");
    let p = match load(&a.path, &mut report) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let solver = a.solver.or_else(|| std::env::var_os(SOLVER_ENV).map(PathBuf::from));
    let cfg = AnalyzeConfig {
        k: a.k,
        eval_depth: a.eval_depth,
        solver,
        timeout_ms: a.timeout,
        node_budget: a.budget,
    };
    let t = Instant::now();
    let out = match analyze(&p, &cfg) {
        Ok(o) => o,
        Err(e @ AnalyzeError::BudgetExceeded { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    report.timings.analyze_ms = t.elapsed().as_secs_f64() * 1000.0;
    report.counters.stubs_emitted = out.stubs_emitted;
    report.counters.analysis_nodes = out.nodes_used;
    report.fragments = Some(out.frags.len());

    let simplified = simplify(&out.result, cfg.eval_depth);
    let rendered = render_absres(&simplified, &out.stacks);
    report.result = Some(rendered.clone());

    let t = Instant::now();
    let mut verdicts = Vec::new();
    for ob in &out.obligations {
        let verdict = match verify_letassert(&p, ob, &cfg) {
            VerifyResult::Verified => "Verified".to_string(),
            VerifyResult::Violated(Some(w)) => format!("Violated (witness {})", render_value(&w)),
            VerifyResult::Violated(None) => "Violated".to_string(),
            VerifyResult::Unknown => "Unknown".to_string(),
        };
        verdicts.push((format!("letassert@{}", ob.label), verdict));
    }
    report.timings.solve_ms = t.elapsed().as_secs_f64() * 1000.0;
    report.verdicts = verdicts.clone();

    if let Some(out_path) = &a.dot {
        let text = dot::render_dot(&simplified, &out.stacks);
        if let Err(e) = std::fs::write(out_path, text) {
            eprintln!("error: cannot write {}: {e}", out_path.display());
            return ExitCode::from(2);
        }
    }
    if let Some(out_path) = &a.chc {
        match to_chc(&simplified) {
            Ok(sys) => {
                if let Err(e) = std::fs::write(out_path, emit_smtlib(&sys, None)) {
                    eprintln!("error: cannot write {}: {e}", out_path.display());
                    return ExitCode::from(2);
                }
            }
            Err(e) => eprintln!("note: no Horn encoding: {e}"),
        }
    }

    if a.json {
        println!("{}", report.to_json());
    } else {
        println!("{rendered}");
        for (what, verdict) in &verdicts {
            println!("{what}\t{verdict}");
        }
        println!("fragments\t{}", out.frags.len());
    }
    ExitCode::SUCCESS
}

fn cmd_dump_ast(a: FileArg) -> ExitCode {
    let mut report = RunReport::new(&a.path, "dump-ast");
    let p = match load(&a.path, &mut report) {
        Ok(p) => p,
        Err(c) => return c,
    };
    if a.json {
        report.result = Some(p.dump_ast());
        println!("{}", report.to_json());
    } else {
        print!("{}", p.dump_ast());
    }
    ExitCode::SUCCESS
}
