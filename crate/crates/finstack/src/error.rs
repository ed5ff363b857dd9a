use std::cell::Cell;

use thiserror::Error;

/// Failure modes shared by every construction in the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A level would exceed the per-level cardinality budget.
    #[error("level {level} would hold {size} simplices, over the budget of {budget}")]
    Budget {
        level: usize,
        size: usize,
        budget: usize,
    },
    /// Not enough stored levels for the requested computation.
    #[error("insufficient truncation: {0}")]
    Truncation(String),
    /// Inputs do not fit together (different targets, degrees, orders).
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Input data violates a precondition.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A check that the mathematics guarantees has failed.
    #[error("invariant violated: {0}")]
    Invariant(String),
    /// The input fails a required classification; carries the witness.
    #[error("input rejected: {reason}")]
    Rejected {
        reason: String,
        witness: Box<crate::kan::Witness>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default bound on the number of simplices held in any one level.
pub const DEFAULT_LEVEL_BUDGET: usize = 1_000_000;

thread_local! {
    static LEVEL_BUDGET: Cell<usize> = const { Cell::new(DEFAULT_LEVEL_BUDGET) };
}

/// Current per-level budget for this thread.
pub fn level_budget() -> usize {
    LEVEL_BUDGET.with(|b| b.get())
}

/// Sets the per-level budget for this thread.
pub fn set_level_budget(n: usize) {
    LEVEL_BUDGET.with(|b| b.set(n));
}

/// Runs `f` with a temporary budget, restoring the previous one afterwards.
pub fn with_level_budget<T>(n: usize, f: impl FnOnce() -> T) -> T {
    let old = level_budget();
    set_level_budget(n);
    let out = f();
    set_level_budget(old);
    out
}

pub(crate) fn check_budget(level: usize, size: usize) -> Result<()> {
    let budget = level_budget();
    if size > budget {
        Err(Error::Budget {
            level,
            size,
            budget,
        })
    } else {
        Ok(())
    }
}
