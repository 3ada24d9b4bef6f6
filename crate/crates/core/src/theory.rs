//! Closed-form exponents for late-point statistics and the variational
//! machinery behind them.
//!
//! The central object is the quadratic rate function
//!
//! ```text
//! F_h(γ) = (1 − γβ)² / (1 − β) + h γ² β
//! ```
//!
//! which prices an excursion-count ratio `γ` at distance scale `n^β`, with
//! `h` counting how many nearby points are forced to stay unvisited. The
//! typical-pair growth exponent is a constrained minimization of `F_2` over
//! the window of ratios actually realized on the torus; the mean-pair
//! exponent drops the constraint and adds an outer supremum over scales.
//! Both have closed forms, and this module exposes the closed forms and the
//! optimization routes separately so they can be checked against each other.

use crate::numeric::{abs, sqrt};

/// Parameters of the rate function: pair-forcing index `h`, scale `beta`,
/// excursion-count ratio `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub h: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl RateParams {
    /// Validates `h ≥ 0`, `beta ∈ (0,1)`, `gamma ≥ 0`.
    pub fn new(h: f64, beta: f64, gamma: f64) -> Result<Self, TheoryError> {
        if !(h >= 0.0) || !h.is_finite() {
            return Err(TheoryError::InvalidH);
        }
        check_unit_open(beta).map_err(|_| TheoryError::InvalidBeta)?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(TheoryError::InvalidGamma);
        }
        Ok(Self { h, beta, gamma })
    }
}

/// Window `[γ−, γ+]` of excursion-count ratios realized somewhere on the
/// torus at scale `beta`; the source of the median/mean exponent gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaWindow {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
}

impl GammaWindow {
    /// Clamps `gamma` into the window.
    pub fn clamp(&self, gamma: f64) -> f64 {
        if gamma < self.gamma_minus {
            self.gamma_minus
        } else if gamma > self.gamma_plus {
            self.gamma_plus
        } else {
            gamma
        }
    }

    pub fn contains(&self, gamma: f64) -> bool {
        gamma >= self.gamma_minus && gamma <= self.gamma_plus
    }
}

/// Exponential-tilt parameters of the rate function: the domain endpoint
/// `lambda_star` and the tilt `lambda` matched to a target ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltPoint {
    pub lambda_star: f64,
    pub lambda: f64,
}

/// One-sided deviation interval for a ratio `gamma` relative to the
/// rate-function minimizer; `hi == None` means unbounded above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationInterval {
    pub lo: f64,
    pub hi: Option<f64>,
}

/// Which closed-form exponent to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentKind {
    /// Growth exponent of the whole late set: `2(1 − α)`.
    LateCount,
    /// Late points in a disc of radius `n^β` at a nonrandom center:
    /// `max(2β − 2α/β, 0)`.
    FixedDisc,
    /// Late points in a disc centered at a uniformly chosen late point:
    /// `2β(1 − α)`.
    LateDisc,
    /// Typical (median) count of ordered late pairs within distance `n^β`.
    PairTypical,
    /// Mean count of ordered late pairs within distance `n^β`.
    PairMean,
}

impl ExponentKind {
    pub fn needs_beta(self) -> bool {
        !matches!(self, ExponentKind::LateCount)
    }

    pub fn name(self) -> &'static str {
        match self {
            ExponentKind::LateCount => "late_count",
            ExponentKind::FixedDisc => "fixed_disc",
            ExponentKind::LateDisc => "late_disc",
            ExponentKind::PairTypical => "pair_typical",
            ExponentKind::PairMean => "pair_mean",
        }
    }
}

/// A closed-form exponent evaluated at `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPrediction {
    pub kind: ExponentKind,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoryError {
    InvalidAlpha,
    InvalidBeta,
    InvalidGamma,
    InvalidH,
    /// `beta` missing for an exponent kind that requires it.
    MissingBeta,
    /// Tilt denominator degenerate (tilt at or beyond the domain endpoint).
    DegenerateTilt,
}

impl core::fmt::Display for TheoryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            TheoryError::InvalidAlpha => "alpha must lie in (0, 1)",
            TheoryError::InvalidBeta => "beta must lie in (0, 1)",
            TheoryError::InvalidGamma => "gamma must be a finite nonnegative real",
            TheoryError::InvalidH => "h must be a finite nonnegative real",
            TheoryError::MissingBeta => "this exponent kind requires beta",
            TheoryError::DegenerateTilt => "tilt parameter at or beyond the domain endpoint",
        };
        f.write_str(msg)
    }
}

fn check_unit_open(x: f64) -> Result<(), TheoryError> {
    if x > 0.0 && x < 1.0 && x.is_finite() {
        Ok(())
    } else {
        Err(TheoryError::InvalidAlpha)
    }
}

fn check_alpha_beta(alpha: f64, beta: f64) -> Result<(), TheoryError> {
    check_unit_open(alpha).map_err(|_| TheoryError::InvalidAlpha)?;
    check_unit_open(beta).map_err(|_| TheoryError::InvalidBeta)
}

/// The rate function `F_h(γ) = (1 − γβ)²/(1 − β) + hγ²β`.
pub fn rate_function(p: &RateParams) -> f64 {
    let d = 1.0 - p.gamma * p.beta;
    d * d / (1.0 - p.beta) + p.h * p.gamma * p.gamma * p.beta
}

/// Checked evaluation of the rate function from raw parameters.
pub fn rate_function_checked(h: f64, beta: f64, gamma: f64) -> Result<f64, TheoryError> {
    Ok(rate_function(&RateParams::new(h, beta, gamma)?))
}

/// The unique global minimizer `γ_h = 1 / (h(1 − β) + β)` of the rate
/// function in `γ`.
pub fn rate_minimizer(h: f64, beta: f64) -> Result<f64, TheoryError> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(TheoryError::InvalidH);
    }
    check_unit_open(beta).map_err(|_| TheoryError::InvalidBeta)?;
    Ok(1.0 / (h * (1.0 - beta) + beta))
}

/// The window `[γ−, γ+]` on which `2 − 2β − 2α F_0(γ) ≥ 0`, i.e.
/// `γ± = β⁻¹ max{1 ± α^{−1/2}(1 − β), 0}`.
pub fn gamma_window(alpha: f64, beta: f64) -> Result<GammaWindow, TheoryError> {
    check_alpha_beta(alpha, beta)?;
    let spread = (1.0 - beta) / sqrt(alpha);
    let lo = (1.0 - spread).max(0.0) / beta;
    let hi = (1.0 + spread).max(0.0) / beta;
    Ok(GammaWindow {
        gamma_minus: lo,
        gamma_plus: hi,
    })
}

/// Typical-pair growth exponent, closed form:
///
/// ```text
/// ρ(α, β) = 2 + 2β − 4α/(2 − β)                 for β ≤ 2(1 − √α)
///         = 8(1 − √α) − 4(1 − √α)²/β            for β ≥ 2(1 − √α)
/// ```
pub fn pair_exponent(alpha: f64, beta: f64) -> Result<f64, TheoryError> {
    check_alpha_beta(alpha, beta)?;
    let s = 1.0 - sqrt(alpha);
    Ok(if beta <= 2.0 * s {
        2.0 + 2.0 * beta - 4.0 * alpha / (2.0 - beta)
    } else {
        8.0 * s - 4.0 * s * s / beta
    })
}

/// Typical-pair exponent by the constrained variational route:
/// `2 + 2β − 2α · inf F_2(γ)` over the realized window, with the infimum of
/// the quadratic taken by clamping its stationary point into the window.
/// Must agree with [`pair_exponent`] everywhere.
pub fn pair_exponent_variational(alpha: f64, beta: f64) -> Result<f64, TheoryError> {
    check_alpha_beta(alpha, beta)?;
    let window = gamma_window(alpha, beta)?;
    let gamma2 = rate_minimizer(2.0, beta)?;
    let minimizer = window.clamp(gamma2);
    let f = rate_function(&RateParams {
        h: 2.0,
        beta,
        gamma: minimizer,
    });
    Ok(2.0 + 2.0 * beta - 2.0 * alpha * f)
}

/// Mean-pair growth exponent, closed form:
///
/// ```text
/// ρ̂(α, β) = 2 + 2β − 4α/(2 − β)    for β ≤ 2 − √(2α)
///          = 6 − 4√(2α)             for β ≥ 2 − √(2α)
/// ```
pub fn mean_pair_exponent(alpha: f64, beta: f64) -> Result<f64, TheoryError> {
    check_alpha_beta(alpha, beta)?;
    Ok(if beta <= 2.0 - sqrt(2.0 * alpha) {
        2.0 + 2.0 * beta - 4.0 * alpha / (2.0 - beta)
    } else {
        6.0 - 4.0 * sqrt(2.0 * alpha)
    })
}

/// Per-scale profile of the unconstrained problem: the inner supremum over
/// `γ` is the quadratic's unconstrained minimum `F_2(γ_2) = 2/(2 − β')`.
fn mean_pair_profile(alpha: f64, beta_prime: f64) -> f64 {
    2.0 + 2.0 * beta_prime - 4.0 * alpha / (2.0 - beta_prime)
}

/// Mean-pair exponent by the unconstrained variational route: the inner
/// supremum over `γ` is solved in closed form, the outer supremum over
/// scales `β' ∈ (0, β]` by a 4096-point grid followed by 40 golden-section
/// refinement steps. Must agree with [`mean_pair_exponent`] to 1e-6.
pub fn mean_pair_exponent_variational(alpha: f64, beta: f64) -> Result<f64, TheoryError> {
    check_alpha_beta(alpha, beta)?;
    const GRID: usize = 4096;
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 1;
    for i in 1..=GRID {
        let bp = beta * i as f64 / GRID as f64;
        let v = mean_pair_profile(alpha, bp);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // Golden-section maximization on the bracketing grid interval.
    let mut lo = beta * (best_i.saturating_sub(1)).max(1) as f64 / GRID as f64;
    let mut hi = beta * (best_i + 1).min(GRID) as f64 / GRID as f64;
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = mean_pair_profile(alpha, a);
    let mut fb = mean_pair_profile(alpha, b);
    for _ in 0..40 {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = mean_pair_profile(alpha, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = mean_pair_profile(alpha, b);
        }
    }
    Ok(best.max(fa).max(fb))
}

/// Evaluates the closed-form exponent of the requested kind.
pub fn predicted_exponent(
    kind: ExponentKind,
    alpha: f64,
    beta: Option<f64>,
) -> Result<ExponentPrediction, TheoryError> {
    check_unit_open(alpha).map_err(|_| TheoryError::InvalidAlpha)?;
    let value = match kind {
        ExponentKind::LateCount => 2.0 * (1.0 - alpha),
        _ => {
            let b = beta.ok_or(TheoryError::MissingBeta)?;
            check_unit_open(b).map_err(|_| TheoryError::InvalidBeta)?;
            match kind {
                ExponentKind::FixedDisc => (2.0 * b - 2.0 * alpha / b).max(0.0),
                ExponentKind::LateDisc => 2.0 * b * (1.0 - alpha),
                ExponentKind::PairTypical => pair_exponent(alpha, b)?,
                ExponentKind::PairMean => mean_pair_exponent(alpha, b)?,
                ExponentKind::LateCount => unreachable!(),
            }
        }
    };
    Ok(ExponentPrediction {
        kind,
        alpha,
        beta: if kind.needs_beta() { beta } else { None },
        value,
    })
}

/// Exponential-tilt representation of the rate function. Returns the tilt
/// point (`λ* = 1/(1−β) + h/β` and `λ = (β + h(1−β) − 1/γ)/(β(1−β))`) and
/// the residual between `F_h(γ)` and its tilted form
/// `λγ²β² − (βλ − h)/(β − (1−β)(λβ − h))`, which is an identity.
pub fn rate_tilt_identity(p: &RateParams) -> Result<(TiltPoint, f64), TheoryError> {
    if p.gamma <= 0.0 {
        return Err(TheoryError::InvalidGamma);
    }
    let (h, beta, gamma) = (p.h, p.beta, p.gamma);
    let lambda_star = 1.0 / (1.0 - beta) + h / beta;
    let lambda = (beta + h * (1.0 - beta) - 1.0 / gamma) / (beta * (1.0 - beta));
    if lambda >= lambda_star {
        return Err(TheoryError::DegenerateTilt);
    }
    let den = beta - (1.0 - beta) * (lambda * beta - h);
    if den == 0.0 {
        return Err(TheoryError::DegenerateTilt);
    }
    let tilted = lambda * gamma * gamma * beta * beta - (beta * lambda - h) / den;
    let residual = abs(rate_function(p) - tilted);
    Ok((
        TiltPoint {
            lambda_star,
            lambda,
        },
        residual,
    ))
}

/// Deviation interval for the normalized excursion count at ratio `gamma`:
/// `[0, γ²]` below the minimizer, `[0, ∞)` at it, `[γ², ∞)` above it.
pub fn deviation_interval(h: f64, gamma: f64, beta: f64) -> Result<DeviationInterval, TheoryError> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(TheoryError::InvalidGamma);
    }
    let gh = rate_minimizer(h, beta)?;
    let g2 = gamma * gamma;
    Ok(if gamma < gh {
        DeviationInterval {
            lo: 0.0,
            hi: Some(g2),
        }
    } else if gamma == gh {
        DeviationInterval { lo: 0.0, hi: None }
    } else {
        DeviationInterval { lo: g2, hi: None }
    })
}

/// Residual of the window-defining inequality at a point, used to check that
/// window endpoints sit exactly on the constraint boundary.
pub fn window_constraint_residual(alpha: f64, beta: f64, gamma: f64) -> f64 {
    let f0 = rate_function(&RateParams {
        h: 0.0,
        beta,
        gamma,
    });
    2.0 - 2.0 * beta - 2.0 * alpha * f0
}
