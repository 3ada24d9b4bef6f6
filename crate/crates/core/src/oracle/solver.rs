//! Sparse symmetric positive-definite solvers for absorbing-chain systems
//! `A u = b` with `A = I − (1/4)·adjacency`.
//!
//! Domains are numbered in row-major scan order. Plane domains are banded
//! and small systems go through an exact banded Cholesky factorization;
//! torus domains (whose wraparound ruins bandedness) and large systems go
//! through conjugate gradients. `A`'s diagonal is identically one, so Jacobi
//! preconditioning is the identity and plain CG applies.

use alloc::vec;
use alloc::vec::Vec;

use super::OracleError;
use crate::numeric::{abs, sqrt};

/// Neighbor table: per unknown, up to four unknown-indices (`-1` = the
/// neighbor is absorbing/fixed and contributes to the right-hand side).
pub type Neighbors = Vec<[i32; 4]>;

/// `y = A x` for `A = I − (1/4) adjacency`.
pub fn apply(neighbors: &Neighbors, x: &[f64], y: &mut [f64]) {
    for (i, nbrs) in neighbors.iter().enumerate() {
        let mut s = 0.0;
        for &j in nbrs {
            if j >= 0 {
                s += x[j as usize];
            }
        }
        y[i] = x[i] - 0.25 * s;
    }
}

/// Max-norm of `b − A x`.
pub fn residual_max(neighbors: &Neighbors, x: &[f64], b: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (i, nbrs) in neighbors.iter().enumerate() {
        let mut s = 0.0;
        for &j in nbrs {
            if j >= 0 {
                s += x[j as usize];
            }
        }
        let r = abs(b[i] - (x[i] - 0.25 * s));
        if r > worst {
            worst = r;
        }
    }
    worst
}

fn bandwidth(neighbors: &Neighbors) -> usize {
    let mut w = 0usize;
    for (i, nbrs) in neighbors.iter().enumerate() {
        for &j in nbrs {
            if j >= 0 {
                w = w.max(i.abs_diff(j as usize));
            }
        }
    }
    w
}

/// Banded Cholesky factorization of `A`, built once and reused across
/// right-hand sides.
pub struct BandedCholesky {
    n: usize,
    w: usize,
    /// `band[i*(w+1) + d] = L(i, i−d)`, `d = 0..=w`.
    band: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(neighbors: &Neighbors) -> Result<Self, OracleError> {
        let n = neighbors.len();
        let w = bandwidth(neighbors);
        let stride = w + 1;
        if n.checked_mul(stride).is_none_or(|cells| cells > 16_000_000) {
            return Err(OracleError::SolveFailed("band storage too large"));
        }
        let mut band = vec![0.0f64; n * stride];
        // A(i, i−d) entries inside the band.
        for (i, nbrs) in neighbors.iter().enumerate() {
            band[i * stride] = 1.0;
            for &j in nbrs {
                if j >= 0 && (j as usize) < i {
                    band[i * stride + (i - j as usize)] = -0.25;
                }
            }
        }
        // In-place band Cholesky.
        for i in 0..n {
            let lo = i.saturating_sub(w);
            for j in lo..=i {
                let mut sum = band[i * stride + (i - j)];
                let klo = lo.max(j.saturating_sub(w));
                for k in klo..j {
                    sum -= band[i * stride + (i - k)] * band[j * stride + (j - k)];
                }
                if j == i {
                    if sum <= 0.0 {
                        return Err(OracleError::SolveFailed("matrix not positive definite"));
                    }
                    band[i * stride] = sqrt(sum);
                } else {
                    band[i * stride + (i - j)] = sum / band[j * stride];
                }
            }
        }
        Ok(Self { n, w, band })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, w, stride) = (self.n, self.w, self.w + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let mut s = y[i];
            for k in lo..i {
                s -= self.band[i * stride + (i - k)] * y[k];
            }
            y[i] = s / self.band[i * stride];
        }
        for i in (0..n).rev() {
            let hi = (i + w).min(n - 1);
            let mut s = y[i];
            for k in (i + 1)..=hi {
                s -= self.band[k * stride + (k - i)] * y[k];
            }
            y[i] = s / self.band[i * stride];
        }
        y
    }
}

/// Conjugate gradients from the zero vector, with periodic residual
/// recomputation. Returns the iterate once `‖r‖₂ ≤ tol_rel · ‖b‖₂` or the
/// iteration budget runs out (the caller certifies the final residual).
pub fn conjugate_gradient(
    neighbors: &Neighbors,
    b: &[f64],
    tol_rel: f64,
    max_iter: usize,
) -> Vec<f64> {
    let n = b.len();
    let norm_b = sqrt(b.iter().map(|v| v * v).sum::<f64>());
    let mut x = vec![0.0f64; n];
    if norm_b == 0.0 {
        return x;
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0f64; n];
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    let target = tol_rel * norm_b;
    for iter in 0..max_iter {
        if sqrt(rs) <= target {
            break;
        }
        apply(neighbors, &p, &mut ap);
        let pap: f64 = p.iter().zip(ap.iter()).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
        }
        if iter % 64 == 63 {
            apply(neighbors, &x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        } else {
            for i in 0..n {
                r[i] -= alpha * ap[i];
            }
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    x
}

/// Direct factorization for systems up to 2·10⁴ unknowns with workable
/// bandwidth, conjugate gradients otherwise.
pub fn solve_system(neighbors: &Neighbors, b: &[f64]) -> Vec<f64> {
    let n = neighbors.len();
    if n <= 20_000 {
        if let Ok(chol) = BandedCholesky::factor(neighbors) {
            return chol.solve(b);
        }
    }
    conjugate_gradient(neighbors, b, 1e-13, 40_000)
}
