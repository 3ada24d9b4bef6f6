//! Success and qualification predicates over completed ledgers.

use super::combinatorics::{excursion_target, skewed_target};
use super::machine::ExcursionLedger;
use super::ExcursionError;
use crate::numeric::{abs, ceil};

/// Midpoint of the admissible range `0 < ρ < (2 − a)/2`.
pub fn default_rho(a: f64) -> f64 {
    (2.0 - a) / 4.0
}

/// Whether the ledger's top-level completion happened with zero center
/// visits and every band `|N[top][k] − 3ak²ln k| ≤ k` for
/// `k = max(2, ⌈ρ·top⌉) .. top−1`. Targets are compared as real values,
/// without rounding.
pub fn is_successful(
    ledger: &ExcursionLedger,
    top: usize,
    rho: f64,
    a: f64,
) -> Result<bool, ExcursionError> {
    if !(a > 0.0 && a < 2.0) {
        return Err(ExcursionError::InvalidParameter("a must lie in (0,2)"));
    }
    if !(rho > 0.0 && rho < (2.0 - a) / 2.0) {
        return Err(ExcursionError::InvalidParameter(
            "rho must lie in (0, (2-a)/2)",
        ));
    }
    if top > ledger.levels() {
        return Err(ExcursionError::IndexOutOfRange);
    }
    // Only the top row is read: the bands are the counts frozen at the
    // top-level completion time.
    if ledger.completion_time(top).is_none() {
        return Err(ExcursionError::IncompleteLedger);
    }
    if ledger.center_visits_before(top) != Some(0) {
        return Ok(false);
    }
    let lo = (ceil(rho * top as f64) as usize).max(2);
    for k in lo..top {
        let target = excursion_target(a, k as u32)?;
        let observed = ledger.count(top, k).unwrap() as f64;
        if abs(observed - target) > k as f64 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the ledger matches the skewed profile (`|N[top][k] − n̂_k| ≤ k`
/// for `k = max(2, ⌈β·top⌉) .. top−1`) and the supplied witness count meets
/// its threshold.
#[allow(clippy::too_many_arguments)]
pub fn is_qualified(
    ledger: &ExcursionLedger,
    top: usize,
    beta: f64,
    gamma: f64,
    a: f64,
    witness_count: u64,
    threshold: u64,
) -> Result<bool, ExcursionError> {
    if top > ledger.levels() {
        return Err(ExcursionError::IndexOutOfRange);
    }
    if ledger.completion_time(top).is_none() {
        return Err(ExcursionError::IncompleteLedger);
    }
    let lo = (ceil(beta * top as f64) as usize).max(2);
    for k in lo..top {
        let target = skewed_target(a, gamma, beta, top as u32, k as u32)?;
        let observed = ledger.count(top, k).unwrap() as f64;
        if abs(observed - target) > k as f64 {
            return Ok(false);
        }
    }
    Ok(witness_count >= threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excursions::machine::{ExcursionLedger, LedgerRow};
    use crate::walk::Point;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Ledger whose top-row counts are exactly the rounded targets.
    fn synthetic_ledger(
        top: usize,
        center_visits: u64,
        counts_fn: impl Fn(usize) -> u64,
    ) -> ExcursionLedger {
        let mut rows: Vec<Option<LedgerRow>> = vec![None; top + 1];
        let counts: Vec<u64> = (0..=top)
            .map(|l| if l == 0 { 0 } else { counts_fn(l) })
            .collect();
        for k in 1..=top {
            rows[k] = Some(LedgerRow {
                time: 1000 * k as u64,
                counts: counts.clone(),
                center_visits,
            });
        }
        ExcursionLedger {
            center: Point::ORIGIN,
            n: 1024,
            targets: vec![f64::NAN; top + 1],
            rows,
            final_counts: counts,
            final_center_visits: center_visits,
        }
    }

    #[test]
    fn exact_profile_with_no_visits_is_successful() {
        let a = 1.0;
        let ledger = synthetic_ledger(8, 0, |k| {
            libm::round(excursion_target(a, k as u32).unwrap_or(1.0)) as u64
        });
        assert!(is_successful(&ledger, 8, default_rho(a), a).unwrap());
    }

    #[test]
    fn one_center_visit_fails_the_first_clause() {
        let a = 1.0;
        let ledger = synthetic_ledger(8, 1, |k| {
            libm::round(excursion_target(a, k as u32).unwrap_or(1.0)) as u64
        });
        assert!(!is_successful(&ledger, 8, default_rho(a), a).unwrap());
    }

    #[test]
    fn band_violation_fails() {
        let a = 1.0;
        let ledger = synthetic_ledger(8, 0, |k| {
            let t = libm::round(excursion_target(a, k as u32).unwrap_or(1.0)) as u64;
            if k == 5 {
                t + 6 // band halfwidth at level 5 is 5
            } else {
                t
            }
        });
        assert!(!is_successful(&ledger, 8, default_rho(a), a).unwrap());
    }

    #[test]
    fn missing_top_row_is_an_error() {
        let a = 1.0;
        let mut ledger = synthetic_ledger(8, 0, |_| 1);
        // Lower rows are irrelevant; only the top completion matters.
        ledger.rows[4] = None;
        assert!(is_successful(&ledger, 8, default_rho(a), a).is_ok());
        ledger.rows[8] = None;
        assert!(matches!(
            is_successful(&ledger, 8, default_rho(a), a),
            Err(ExcursionError::IncompleteLedger)
        ));
    }

    #[test]
    fn qualified_profile_and_witness_threshold() {
        let (a, beta, gamma) = (1.0, 0.5, 0.6);
        let top = 10usize;
        let ledger = synthetic_ledger(top, 0, |k| {
            libm::round(
                skewed_target(a, gamma, beta, top as u32, k as u32)
                    .or_else(|_| excursion_target(a, k as u32))
                    .unwrap_or(1.0),
            ) as u64
        });
        assert!(is_qualified(&ledger, top, beta, gamma, a, 100, 100).unwrap());
        assert!(!is_qualified(&ledger, top, beta, gamma, a, 99, 100).unwrap());

        // Violating one band by k+1 disqualifies.
        let bad = synthetic_ledger(top, 0, |k| {
            let t = libm::round(
                skewed_target(a, gamma, beta, top as u32, k as u32)
                    .or_else(|_| excursion_target(a, k as u32))
                    .unwrap_or(1.0),
            ) as u64;
            if k == 7 {
                t + 8
            } else {
                t
            }
        });
        assert!(!is_qualified(&bad, top, beta, gamma, a, 100, 100).unwrap());
    }

    #[test]
    fn gamma_one_limit_reduces_to_plain_targets() {
        // At gamma → 1 the skewed profile is the plain one, so a ledger with
        // plain targets qualifies.
        let (a, beta) = (1.0, 0.5);
        let top = 10usize;
        let ledger = synthetic_ledger(top, 0, |k| {
            libm::round(excursion_target(a, k as u32).unwrap_or(1.0)) as u64
        });
        assert!(is_qualified(&ledger, top, beta, 1.0 - 1e-9, a, 1, 0).unwrap());
    }
}
