//! The concrete interpreters: pure demand (with optional lookup cache),
//! environment/closure reference, chaining lookup, displays, and
//! optimized frames. All demand-style evaluators share [`ResVal`].

mod chain;
mod demand;
mod display;
mod env;
mod opt;
pub mod value;

/// Nesting budget shared by the fixed-fuel evaluators; recursion deeper than
/// this reports a clean divergence error before the host stack is at risk.
pub(crate) const MAX_DEPTH: u32 = 100_000;

/// Run an evaluator on a thread with a large stack so that deeply nested
/// (but budget-bounded) recursion reports a clean error instead of
/// overflowing the host stack.
pub(crate) fn on_big_stack<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(scope, f)
            .expect("spawn evaluator thread")
            .join()
            .expect("evaluator thread panicked")
    })
}

pub use chain::eval_chain;
pub use demand::{eval_demand, DemandOpts, EvalOutcome};
pub use display::eval_display;
pub use env::{eval_env, EnvValue};
pub use opt::eval_optimized;
pub use value::{apply_op, force, render_resval, render_value, Counters, EvalError, ResVal, Value};
