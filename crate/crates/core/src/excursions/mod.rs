//! Excursion machinery: radii schedules, online crossing counters and
//! completion-time ledgers, success/qualification predicates, and the
//! crossing-history combinatorics.
//!
//! An excursion at level `l` is one inner→outer traversal: the walker, having
//! most recently been strictly inside the circle of radius `r_{l-1}` around
//! the center, first reaches distance `≥ r_l`. Round-trip excursions are
//! recoverable as consecutive traversal pairs. All circle membership tests
//! use exact integer squared distances against per-circle thresholds
//! `⌈r_k²⌉`, so there is no floating-point boundary ambiguity.

mod combinatorics;
mod machine;
mod predicates;
mod schedule;

pub use combinatorics::{
    crossing_probabilities, excursion_target, skewed_target, success_probability_ln,
    success_probability_ln_bruteforce, HistoryVector,
};
pub use machine::{
    history_levels, CrossingMachine, ExcursionEvent, ExcursionLedger, LedgerBuilder, LedgerRow,
    StepOutcome,
};
pub use predicates::{default_rho, is_qualified, is_successful};
pub use schedule::{RadiiSchedule, ScheduleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcursionError {
    /// A numeric argument is outside its domain.
    InvalidParameter(&'static str),
    /// Level index outside the schedule.
    IndexOutOfRange,
    /// Adjacent radii coincide in log scale, so crossing ratios degenerate.
    DegenerateRatio,
    /// A schedule radius is not representable on the lattice (overflow) or
    /// violates the torus bound.
    ScheduleUnusable(&'static str),
    /// History profiles must have strictly positive counts.
    ZeroCount,
    /// The exact band sum is capped at 12 free levels.
    LevelCapExceeded,
    /// The ledger lacks a completed row required by a predicate.
    IncompleteLedger,
}

impl core::fmt::Display for ExcursionError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ExcursionError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            ExcursionError::IndexOutOfRange => f.write_str("level index outside the schedule"),
            ExcursionError::DegenerateRatio => {
                f.write_str("adjacent radii coincide; crossing ratios degenerate")
            }
            ExcursionError::ScheduleUnusable(why) => {
                write!(f, "schedule unusable on this lattice: {why}")
            }
            ExcursionError::ZeroCount => {
                f.write_str("history profiles require strictly positive counts")
            }
            ExcursionError::LevelCapExceeded => {
                f.write_str("exact band sum capped at 12 free levels")
            }
            ExcursionError::IncompleteLedger => {
                f.write_str("ledger incomplete through the requested level")
            }
        }
    }
}
