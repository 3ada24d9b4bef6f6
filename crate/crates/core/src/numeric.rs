//! Small float helpers shared across the crate.
//!
//! The crate is `no_std`, so transcendental functions are routed through
//! `libm`. Combinatorial quantities are computed in the log domain.

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `ln(1 + x)`, accurate near zero.
#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// `ln Γ(x)` for positive `x`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln k!`.
#[inline]
pub fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// `ln C(n, k)` for `0 <= k <= n`, and `0.0` when `k == 0` regardless of `n`
/// (the empty choice), so that chain products over adjacent count profiles
/// can be written uniformly.
pub fn ln_binomial(n: i64, k: i64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k < 0 || n < k {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n as u64) - ln_factorial(k as u64) - ln_factorial((n - k) as u64)
}

/// `ln(exp(a) + exp(b))` without overflow; `-inf` inputs behave as zeros.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(exp(lo - hi))
}

/// `ln Σ exp(v)` over a slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let mut acc = f64::NEG_INFINITY;
    for &v in values {
        acc = log_add_exp(acc, v);
    }
    acc
}
