use thiserror::Error;

use crate::values::EvalError;

/// Runtime simulation failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{context}: {source}")]
    Eval {
        context: String,
        #[source]
        source: EvalError,
    },
    #[error("{context}: read of unresolved signal `{name}` (several drivers, no resolution function)")]
    Unresolved { context: String, name: String },
    #[error("delta cycle limit exceeded in cycle {cycle} after {limit} iterations; still active: {}", .active.join(", "))]
    DeltaLimit {
        cycle: u64,
        limit: usize,
        active: Vec<String>,
    },
    #[error("{context}: loop budget exceeded in loop `{loop_name}` ({budget} iterations)")]
    LoopBudget {
        context: String,
        loop_name: String,
        budget: u64,
    },
    #[error("{context}: call depth limit exceeded calling `{callee}`")]
    CallDepth { context: String, callee: String },
    #[error("{context}: function `{callee}` finished without returning a value")]
    MissingReturn { context: String, callee: String },
    #[error("{0}")]
    Config(String),
}

impl SimError {
    pub fn eval(context: &str, source: EvalError) -> SimError {
        SimError::Eval {
            context: context.to_string(),
            source,
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;
