//! Crossing-history combinatorics: per-level excursion targets, single-step
//! crossing probabilities, interleaving counts for up-crossing profiles, and
//! the exact band sum for the success probability at small level counts.

use alloc::vec;
use alloc::vec::Vec;

use super::{ExcursionError, RadiiSchedule};
use crate::numeric::{ceil, floor, ln, ln_1p, ln_binomial, log_add_exp, log_sum_exp};

/// Per-level excursion target `3 a k² ln k`. Levels below 2 are rejected
/// (`ln k` vanishes at `k = 1`).
pub fn excursion_target(a: f64, k: u32) -> Result<f64, ExcursionError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(ExcursionError::InvalidParameter("a must be positive"));
    }
    if k < 2 {
        return Err(ExcursionError::InvalidParameter("level must be >= 2"));
    }
    let kf = k as f64;
    Ok(3.0 * a * kf * kf * ln(kf))
}

/// Skewed per-level target interpolating from ratio `gamma` at level `βn`
/// back to the plain target at level `n`:
///
/// ```text
/// n̂_k = 3 a* (k − n(β − γβ)/(1 − γβ))² ln k,    a* = a (1 − γβ)²/(1 − β)²
/// ```
///
/// so `n̂_n = 3 a n² ln n` and `n̂_{βn} = γ² · 3 a (βn)² ln(βn)`.
pub fn skewed_target(a: f64, gamma: f64, beta: f64, n: u32, k: u32) -> Result<f64, ExcursionError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(ExcursionError::InvalidParameter("a must be positive"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ExcursionError::InvalidParameter("beta must lie in (0,1)"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() || gamma * beta >= 1.0 {
        return Err(ExcursionError::InvalidParameter(
            "gamma must be positive with gamma*beta < 1",
        ));
    }
    if k < 2 {
        return Err(ExcursionError::InvalidParameter("level must be >= 2"));
    }
    let (nf, kf) = (n as f64, k as f64);
    if kf + 1e-9 < beta * nf || k > n {
        return Err(ExcursionError::InvalidParameter(
            "level must lie between beta*n and n",
        ));
    }
    let a_star = a * (1.0 - gamma * beta) * (1.0 - gamma * beta) / ((1.0 - beta) * (1.0 - beta));
    let offset = (beta - gamma * beta) / (1.0 - gamma * beta) * nf;
    let d = kf - offset;
    Ok(3.0 * a_star * d * d * ln(kf))
}

/// Single-step crossing probabilities of the level-`l` boundary chain:
///
/// * `p_l = ln(r_{l+1}/r_l) / ln(r_{l+1}/r_{l−1})` — from boundary `l`,
///   reach `l+1` before `l−1`;
/// * `q_l = ln(r_l/r_{l−1}) / ln r_l` — from boundary `l−1`, hit the center
///   before returning to boundary `l`.
///
/// `p_l ∈ (0,1)`; `q_l ∈ (0,1]`, with `q_l = 1` exactly when `r_{l−1} = 1`.
pub fn crossing_probabilities(
    schedule: &RadiiSchedule,
    l: usize,
) -> Result<(f64, f64), ExcursionError> {
    if l < 1 || l + 1 > schedule.levels() {
        return Err(ExcursionError::IndexOutOfRange);
    }
    let (ra, rb, rc) = (
        schedule.radius(l - 1),
        schedule.radius(l),
        schedule.radius(l + 1),
    );
    // Log-ratios from direct radius quotients where representable (the
    // quotients of exact radii are exact, which keeps equal ratios equal
    // bitwise), falling back to stored logs for overflowed radii.
    let (lr_in, lr_out, ln_rb) = if rc.is_finite() {
        (ln(rb / ra), ln(rc / rb), ln(rb))
    } else {
        (
            schedule.ln_radius(l) - schedule.ln_radius(l - 1),
            schedule.ln_radius(l + 1) - schedule.ln_radius(l),
            schedule.ln_radius(l),
        )
    };
    if !(lr_in > 0.0 && lr_out > 0.0) || ln_rb <= 0.0 {
        return Err(ExcursionError::DegenerateRatio);
    }
    Ok((lr_out / (lr_out + lr_in), lr_in / ln_rb))
}

/// Per-level up-crossing counts `(m_lo, …, m_hi)` of a boundary-visit
/// history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryVector {
    pub counts: Vec<u64>,
}

impl HistoryVector {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    /// History length `|m̄| = 2 Σ m − 1`.
    pub fn len(&self) -> u64 {
        2 * self.counts.iter().sum::<u64>() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Log of the number of admissible boundary-visit histories with this
    /// up-crossing profile: `ln Π C(m_{ℓ+1} + m_ℓ − 1, m_ℓ)` over adjacent
    /// levels. All counts must be ≥ 1 (a zero inside the profile makes the
    /// product formula meaningless because no path can cross above it).
    pub fn interleavings_ln(&self) -> Result<f64, ExcursionError> {
        if self.counts.is_empty() || self.counts.contains(&0) {
            return Err(ExcursionError::ZeroCount);
        }
        let mut acc = 0.0;
        for w in self.counts.windows(2) {
            acc += ln_binomial((w[1] + w[0]) as i64 - 1, w[0] as i64);
        }
        Ok(acc)
    }
}

/// `m · ln y` with the convention `0 · (−inf) = 0`.
#[inline]
fn count_times_ln(m: u64, ln_y: f64) -> f64 {
    if m == 0 {
        0.0
    } else {
        m as f64 * ln_y
    }
}

fn band(center: f64, halfwidth: u64) -> (u64, u64) {
    let lb = ceil(center - halfwidth as f64).max(0.0) as u64;
    let ub = floor(center + halfwidth as f64).max(-1.0) as i64;
    (lb, ub.max(0) as u64)
}

/// Exact success probability, in the log domain, of the banded excursion
/// profile over levels `lo..=hi` with `lo = max(2, ⌈ρ·hi⌉)`:
///
/// ```text
/// q̄ = Σ over {m_ℓ : |m_ℓ − 3aℓ²ln ℓ| ≤ ℓ, m_hi = round(3a·hi²·ln hi)}
///       (1 − q_lo)^{m_lo} · Π_ℓ C(m_{ℓ+1} + m_ℓ − 1, m_ℓ) p_ℓ^{m_ℓ} (1 − p_ℓ)^{m_{ℓ+1}}
/// ```
///
/// The summand couples only adjacent levels, so the sum is computed by a
/// transfer (dynamic-programming) pass level by level rather than by
/// enumerating the product space. Capped at 12 free levels.
pub fn success_probability_ln(
    schedule: &RadiiSchedule,
    hi: usize,
    a: f64,
    rho: f64,
) -> Result<f64, ExcursionError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(ExcursionError::InvalidParameter("rho must lie in (0,1)"));
    }
    if hi < 2 || hi > schedule.levels() {
        return Err(ExcursionError::IndexOutOfRange);
    }
    let lo = (ceil(rho * hi as f64) as usize).max(2);
    if lo > hi {
        return Err(ExcursionError::InvalidParameter("rho*hi exceeds hi"));
    }
    if hi - lo > 12 {
        return Err(ExcursionError::LevelCapExceeded);
    }

    // The top count is pinned to the target, rounded up — the same integer
    // at which a ledger freezes its top row.
    let m_top = ceil(excursion_target(a, hi as u32)?).max(0.0) as u64;
    let (_, q_lo) = crossing_probabilities(schedule, lo)?;
    let ln_not_q = ln_1p(-q_lo);

    // Transfer pass upward from the lowest level. The top count is pinned,
    // every level below it is banded.
    let (lb, ub) = if lo == hi {
        (m_top, m_top)
    } else {
        band(excursion_target(a, lo as u32)?, lo as u64)
    };
    if lb > ub {
        return Ok(f64::NEG_INFINITY);
    }
    let mut cur_lb = lb;
    let mut cur: Vec<f64> = (lb..=ub).map(|m| count_times_ln(m, ln_not_q)).collect();

    for level in lo..hi {
        let (p, _) = crossing_probabilities(schedule, level)?;
        let (ln_p, ln_not_p) = (ln(p), ln_1p(-p));
        let (next_lb, next_ub) = if level + 1 == hi {
            (m_top, m_top)
        } else {
            band(excursion_target(a, (level + 1) as u32)?, (level + 1) as u64)
        };
        if next_lb > next_ub {
            return Ok(f64::NEG_INFINITY);
        }
        let mut next = vec![f64::NEG_INFINITY; (next_ub - next_lb + 1) as usize];
        for (slot, next_val) in next.iter_mut().enumerate() {
            let m_next = next_lb + slot as u64;
            let mut acc = f64::NEG_INFINITY;
            for (i, &val) in cur.iter().enumerate() {
                let m = cur_lb + i as u64;
                let term = val
                    + ln_binomial((m_next + m) as i64 - 1, m as i64)
                    + count_times_ln(m, ln_p)
                    + count_times_ln(m_next, ln_not_p);
                acc = log_add_exp(acc, term);
            }
            *next_val = acc;
        }
        cur = next;
        cur_lb = next_lb;
    }
    debug_assert_eq!(cur.len(), 1);
    Ok(cur[0])
}

/// Brute-force evaluation of the same band sum by direct enumeration of the
/// product space; exponential in the number of free levels and intended as
/// an oracle for [`success_probability_ln`] on tiny instances.
pub fn success_probability_ln_bruteforce(
    schedule: &RadiiSchedule,
    hi: usize,
    a: f64,
    rho: f64,
) -> Result<f64, ExcursionError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(ExcursionError::InvalidParameter("rho must lie in (0,1)"));
    }
    if hi < 2 || hi > schedule.levels() {
        return Err(ExcursionError::IndexOutOfRange);
    }
    let lo = (ceil(rho * hi as f64) as usize).max(2);
    if lo > hi {
        return Err(ExcursionError::InvalidParameter("rho*hi exceeds hi"));
    }
    if hi - lo > 4 {
        return Err(ExcursionError::LevelCapExceeded);
    }

    let m_top = ceil(excursion_target(a, hi as u32)?).max(0.0) as u64;
    let (_, q_lo) = crossing_probabilities(schedule, lo)?;
    let mut bands = Vec::new();
    for level in lo..hi {
        let (lb, ub) = band(excursion_target(a, level as u32)?, level as u64);
        if lb > ub {
            return Ok(f64::NEG_INFINITY);
        }
        bands.push((lb, ub));
    }

    let mut probs = Vec::new();
    for level in lo..hi {
        probs.push(crossing_probabilities(schedule, level)?.0);
    }

    // Odometer over the free levels lo..hi.
    let free = bands.len();
    let mut m = bands.iter().map(|&(lb, _)| lb).collect::<Vec<_>>();
    let mut terms = Vec::new();
    loop {
        let mut term = count_times_ln(if free == 0 { m_top } else { m[0] }, ln_1p(-q_lo));
        for i in 0..free {
            let m_next = if i + 1 < free { m[i + 1] } else { m_top };
            let p = probs[i];
            term += ln_binomial((m_next + m[i]) as i64 - 1, m[i] as i64)
                + count_times_ln(m[i], ln(p))
                + count_times_ln(m_next, ln_1p(-p));
        }
        terms.push(term);

        let mut i = 0;
        loop {
            if i == free {
                return Ok(log_sum_exp(&terms));
            }
            if m[i] < bands[i].1 {
                m[i] += 1;
                break;
            }
            m[i] = bands[i].0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::abs;

    #[test]
    fn target_known_values() {
        let v = excursion_target(1.0, 3).unwrap();
        assert!(abs(v - 27.0 * ln(3.0)) < 1e-12);
        // Linear in a.
        let v1 = excursion_target(0.7, 9).unwrap();
        let v2 = excursion_target(1.4, 9).unwrap();
        assert!(abs(v2 - 2.0 * v1) < 1e-12);
        assert!(excursion_target(1.0, 1).is_err());
        assert!(excursion_target(0.0, 5).is_err());
    }

    #[test]
    fn skewed_target_endpoint_identities() {
        let (a, gamma, beta, n) = (1.3, 0.6, 0.5, 20u32);
        let at_top = skewed_target(a, gamma, beta, n, n).unwrap();
        assert!(abs(at_top - excursion_target(a, n).unwrap()) < 1e-9);
        let k = (beta * n as f64) as u32;
        let at_bottom = skewed_target(a, gamma, beta, n, k).unwrap();
        assert!(abs(at_bottom - gamma * gamma * excursion_target(a, k).unwrap()) < 1e-9);
    }

    #[test]
    fn skewed_target_is_plain_target_at_gamma_one() {
        for k in 10..=20 {
            let v = skewed_target(0.9, 1.0 - 1e-12, 0.5, 20, k).unwrap();
            let t = excursion_target(0.9, k).unwrap();
            assert!(abs(v - t) < 1e-6, "k={k}: {v} vs {t}");
        }
        assert!(skewed_target(1.0, 2.1, 0.5, 20, 15).is_err());
    }

    #[test]
    fn crossing_probabilities_known_values() {
        // Factorial schedule at level 2: p = ln 3 / ln 6.
        let s = RadiiSchedule::factorial(3).unwrap();
        let (p, q) = crossing_probabilities(&s, 2).unwrap();
        assert!(abs(p - ln(3.0) / ln(6.0)) < 1e-12);
        assert!(abs(p - 0.61315) < 1e-5);
        // Inner radius 1 makes q degenerate at 1.
        assert!(abs(q - 1.0) < 1e-12);

        // Geometric schedules have p = 1/2 exactly at every level.
        let g = RadiiSchedule::geometric(4.0, 2.0, 6).unwrap();
        for l in 1..6 {
            let (p, q) = crossing_probabilities(&g, l).unwrap();
            assert_eq!(p, 0.5);
            assert!(q > 0.0 && q < 1.0);
        }

        assert!(crossing_probabilities(&g, 0).is_err());
        assert!(crossing_probabilities(&g, 6).is_err());
        // Factorial level 1 has coinciding radii r_0 = r_1.
        assert!(matches!(
            crossing_probabilities(&s, 1),
            Err(ExcursionError::DegenerateRatio)
        ));
    }

    #[test]
    fn factorial_crossing_probability_approaches_one_half() {
        // |p_l − 1/2| · l ln l stays bounded along the factorial schedule.
        let s = RadiiSchedule::factorial(1000).unwrap();
        let mut worst = 0.0f64;
        for l in 2..1000 {
            let (p, _) = crossing_probabilities(&s, l).unwrap();
            let scaled = abs(p - 0.5) * l as f64 * ln(l as f64);
            if scaled > worst {
                worst = scaled;
            }
        }
        assert!(worst < 1.0, "scaled deviation {worst}");
    }

    #[test]
    fn interleavings_known_values() {
        // All-ones profile admits exactly one history.
        let h = HistoryVector::new(vec![1, 1, 1]);
        assert_eq!(h.interleavings_ln().unwrap(), 0.0);
        // Adjacent pair (2, 3) contributes C(4, 2) = 6.
        let h = HistoryVector::new(vec![2, 3]);
        assert!(abs(h.interleavings_ln().unwrap() - ln(6.0)) < 1e-12);
        assert_eq!(h.len(), 9);
        assert!(HistoryVector::new(vec![1, 0, 2])
            .interleavings_ln()
            .is_err());
    }

    #[test]
    fn single_free_level_band_sum_matches_direct_terms() {
        let s = RadiiSchedule::geometric(4.0, 2.0, 6).unwrap();
        // hi = 4, rho = 0.7 → lo = 3: one free level (3).
        let (a, hi, rho) = (0.8, 4usize, 0.7);
        let dp = success_probability_ln(&s, hi, a, rho).unwrap();
        let m_top = ceil(excursion_target(a, hi as u32).unwrap()) as u64;
        let (lb, ub) = band(excursion_target(a, 3).unwrap(), 3);
        let (_, q) = crossing_probabilities(&s, 3).unwrap();
        let (p, _) = crossing_probabilities(&s, 3).unwrap();
        let mut terms = Vec::new();
        for m in lb..=ub {
            terms.push(
                count_times_ln(m, ln_1p(-q))
                    + ln_binomial((m_top + m) as i64 - 1, m as i64)
                    + count_times_ln(m, ln(p))
                    + count_times_ln(m_top, ln_1p(-p)),
            );
        }
        let direct = log_sum_exp(&terms);
        assert!(abs(dp - direct) < 1e-12 * abs(direct).max(1.0));
    }

    #[test]
    fn level_cap_enforced() {
        let s = RadiiSchedule::geometric(2.0, 2.0, 40).unwrap();
        assert!(matches!(
            success_probability_ln(&s, 40, 1.0, 0.05),
            Err(ExcursionError::LevelCapExceeded)
        ));
    }

    #[test]
    fn degenerate_band_start_at_the_top_level() {
        // rho large enough that the band range collapses to the pinned top
        // count: the whole sum is the single center-avoidance factor.
        let s = RadiiSchedule::geometric(4.0, 2.0, 11).unwrap();
        let (a, hi, rho) = (0.7, 10usize, 0.95);
        let dp = success_probability_ln(&s, hi, a, rho).unwrap();
        let bf = success_probability_ln_bruteforce(&s, hi, a, rho).unwrap();
        assert!((dp - bf).abs() <= 1e-12 * bf.abs(), "{dp} vs {bf}");
        let m_top = ceil(excursion_target(a, hi as u32).unwrap()) as u64;
        let (_, q) = crossing_probabilities(&s, hi).unwrap();
        assert!((dp - count_times_ln(m_top, ln_1p(-q))).abs() <= 1e-12 * dp.abs());
    }
}
