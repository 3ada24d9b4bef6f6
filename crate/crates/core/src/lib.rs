//! Core algorithms for studying late points of the simple random walk on the
//! two-dimensional torus.
//!
//! The crate has five parts:
//!
//! * [`theory`] — closed-form multifractal exponents for late-point counts,
//!   disc counts and pair counts, the quadratic excursion rate function
//!   behind them, and independent numerical optimizers that must reproduce
//!   the closed forms.
//! * [`walk`] — a deterministic, seeded simple random walk on the `n × n`
//!   torus that records per-site first-hit times and streams every step to
//!   registered observers.
//! * [`excursions`] — radii schedules, online counting of inner→outer
//!   annulus traversals around a center, completion-time ledgers, and the
//!   crossing-history combinatorics that govern success probabilities.
//! * [`estimators`] — late-set extraction, torus metric queries (disc and
//!   pair counts), log-log exponent fits and per-seed summaries.
//! * [`oracle`] — exact finite-Markov-chain computations (sparse linear
//!   solves) on small discs, annuli and tori: hitting probabilities, Green
//!   values, expected exit and excursion times, harmonic-measure ratios and
//!   hitting-time moments.
//!
//! Everything here is `no_std + alloc`; IO, file formats and the CLI live in
//! the companion `latewalk` crate.

#![cfg_attr(not(test), no_std)]
// Parameter checks use `!(x >= 0.0)` so NaN fails them; the suggested
// rewrite `x < 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod estimators;
pub mod excursions;
pub mod numeric;
pub mod oracle;
pub mod theory;
pub mod walk;
