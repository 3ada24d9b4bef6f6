//! Radii schedules for excursion counting.
//!
//! Two families are provided. The factorial schedule `r_k = (k!)³` is kept in
//! log-domain form for the crossing combinatorics: past a handful of levels
//! its radii overflow any lattice, so machines reject it. Simulation uses the
//! geometric schedule `r_k = r₀ bᵏ`, whose log-ratios are constant, matching
//! the slowly-varying-ratio requirement the factorial family satisfies only
//! asymptotically.

use alloc::vec::Vec;

use super::ExcursionError;
use crate::numeric::{ceil, ln, ln_factorial};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Factorial,
    Geometric,
}

/// Increasing radii `r_0 < r_1 < … < r_L` (index 0 is the base circle; the
/// counted levels are `1..=L`). Radii are stored both directly and in log
/// form; factorial radii beyond the representable range are `+inf` and only
/// the log form is meaningful there.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiiSchedule {
    kind: ScheduleKind,
    radii: Vec<f64>,
    ln_radii: Vec<f64>,
}

impl RadiiSchedule {
    /// Factorial schedule with levels `1..=levels`: `r_k = (k!)³`, so
    /// `r_0 = r_1 = 1` and crossing ratios are defined from level 2 upward.
    pub fn factorial(levels: usize) -> Result<Self, ExcursionError> {
        if levels == 0 {
            return Err(ExcursionError::InvalidParameter("levels must be >= 1"));
        }
        let mut ln_radii = Vec::with_capacity(levels + 1);
        let mut radii = Vec::with_capacity(levels + 1);
        let mut fact = 1.0f64;
        for k in 0..=levels {
            ln_radii.push(3.0 * ln_factorial(k as u64));
            radii.push(fact * fact * fact);
            fact *= (k + 1) as f64;
        }
        Ok(Self {
            kind: ScheduleKind::Factorial,
            radii,
            ln_radii,
        })
    }

    /// Geometric schedule `r_k = r₀ bᵏ` with `r₀ ≥ 1` and base `b > 1`.
    pub fn geometric(r0: f64, base: f64, levels: usize) -> Result<Self, ExcursionError> {
        if levels == 0 {
            return Err(ExcursionError::InvalidParameter("levels must be >= 1"));
        }
        if !(r0 >= 1.0) || !r0.is_finite() {
            return Err(ExcursionError::InvalidParameter("r0 must be >= 1"));
        }
        if !(base > 1.0) || !base.is_finite() {
            return Err(ExcursionError::InvalidParameter("base must be > 1"));
        }
        let mut radii = Vec::with_capacity(levels + 1);
        let mut r = r0;
        for _ in 0..=levels {
            radii.push(r);
            r *= base;
        }
        let ln_radii = radii.iter().map(|&r| ln(r)).collect();
        Ok(Self {
            kind: ScheduleKind::Geometric,
            radii,
            ln_radii,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// Number of counted levels `L`.
    pub fn levels(&self) -> usize {
        self.radii.len() - 1
    }

    /// `r_k` for `k = 0..=L`; `+inf` when unrepresentable.
    pub fn radius(&self, k: usize) -> f64 {
        self.radii[k]
    }

    /// `ln r_k` for `k = 0..=L`.
    pub fn ln_radius(&self, k: usize) -> f64 {
        self.ln_radii[k]
    }

    pub fn max_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// Per-circle squared-distance thresholds `S_k = ⌈r_k²⌉`: a lattice point
    /// at squared distance `d²` is at or beyond circle `k` iff `d² ≥ S_k`.
    /// Fails if any radius overflows the integer range, or if consecutive
    /// radii are less than one lattice step apart (a single walk step could
    /// then cross two circles at once).
    pub fn squared_thresholds(&self) -> Result<Vec<u64>, ExcursionError> {
        let mut out = Vec::with_capacity(self.radii.len());
        for (k, &r) in self.radii.iter().enumerate() {
            if !r.is_finite() || r * r >= 9.0e18 {
                return Err(ExcursionError::ScheduleUnusable(
                    "radius overflows the lattice",
                ));
            }
            if k > 0 && !(r - self.radii[k - 1] > 1.0) {
                return Err(ExcursionError::ScheduleUnusable(
                    "consecutive radii closer than one lattice step",
                ));
            }
            out.push(ceil(r * r) as u64);
        }
        Ok(out)
    }
}
