//! Call-stack-only operational semantics and a stack-stitching analysis.
//!
//! The crate provides:
//! - [`syntax`]: parser and labeled AST for the small ML-ish source language;
//! - [`interp`]: five concrete big-step interpreters (demand, environment,
//!   chaining, display, optimized frames) sharing one result type;
//! - [`analyzer`]: an abstract interpreter over k-truncated call stacks that
//!   returns sets of (possibly recursive) abstract results;
//! - [`resval`]: bounded evaluation and simplification of abstract results;
//! - [`chc`]: translation of abstract results to constrained Horn clauses and
//!   an optional external-solver bridge for checking `letassert` claims.

pub mod analyzer;
pub mod chc;
pub mod interp;
pub mod resval;
pub mod stack;
pub mod syntax;

pub use analyzer::{
    analyze, analyze_all_paths_core, analyze_single_path, suffixes, AbsAtom, AbsRes,
    AnalysisOutcome, AnalyzeConfig, AnalyzeError, FragmentSet, Guard, Obligation,
    SinglePathOutcome, Site, SpVal, Tag,
};
pub use chc::{emit_smtlib, saturate, solve, to_chc, verify_letassert, ChcSystem, SolveResult, VerifyResult};
pub use interp::{eval_demand, eval_env, force, DemandOpts, EvalError, ResVal, Value};
pub use resval::{abs_eval, simplify, ConcSet};
pub use stack::{StackId, StackInterner};
pub use syntax::{parse_program, BinOp, Label, Node, Program, SyntaxError};
