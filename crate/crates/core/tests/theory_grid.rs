//! Grid-level identities and monotonicity properties of the exponent
//! formulas. The acceptance suite re-runs the full-resolution versions;
//! these strided variants keep the development loop fast.

use latewalk_core::theory::*;
use rand_core::RngCore;

fn grid(step: usize) -> impl Iterator<Item = f64> {
    (1..100).step_by(step).map(|i| i as f64 / 100.0)
}

#[test]
fn constrained_route_matches_closed_form_on_a_grid() {
    for alpha in grid(4) {
        for beta in grid(4) {
            let a = pair_exponent(alpha, beta).unwrap();
            let b = pair_exponent_variational(alpha, beta).unwrap();
            assert!((a - b).abs() <= 1e-9, "({alpha},{beta}): {a} vs {b}");
        }
    }
}

#[test]
fn sup_route_matches_closed_form_on_a_grid() {
    for alpha in grid(8) {
        for beta in grid(8) {
            let closed = mean_pair_exponent(alpha, beta).unwrap();
            let sup = mean_pair_exponent_variational(alpha, beta).unwrap();
            assert!(
                (closed - sup).abs() <= 1e-6,
                "({alpha},{beta}): {closed} vs {sup}"
            );
            // The unconstrained mean exponent dominates the typical one.
            assert!(sup >= pair_exponent(alpha, beta).unwrap() - 1e-12);
        }
    }
}

#[test]
fn mean_and_typical_exponents_agree_below_the_branch_point() {
    for alpha in grid(4) {
        for beta in grid(4) {
            if beta <= 2.0 * (1.0 - alpha.sqrt()) {
                let rho = pair_exponent(alpha, beta).unwrap();
                let rho_hat = mean_pair_exponent(alpha, beta).unwrap();
                assert!((rho - rho_hat).abs() <= 1e-9, "({alpha},{beta})");
            }
        }
    }
}

#[test]
fn typical_pair_exponent_is_nondecreasing_in_beta() {
    for alpha in [0.1f64, 0.3, 0.5, 0.7, 0.9] {
        let mut last = f64::NEG_INFINITY;
        for bi in 1..1000 {
            let beta = bi as f64 / 1000.0;
            let v = pair_exponent(alpha, beta).unwrap();
            assert!(v >= last - 1e-12, "alpha {alpha}, beta {beta}");
            last = v;
        }
    }
}

#[test]
fn typical_pair_exponent_dominates_the_independent_heuristic() {
    // ρ(α, β) ≥ 2(1−α) + 2β(1−α): the pair count beats multiplying the
    // late-set size by the late-centered disc count.
    for alpha in grid(2) {
        for beta in grid(2) {
            let rho = pair_exponent(alpha, beta).unwrap();
            let indep = 2.0 * (1.0 - alpha) + 2.0 * beta * (1.0 - alpha);
            assert!(rho >= indep - 1e-12, "({alpha},{beta}): {rho} < {indep}");
        }
    }
}

#[test]
fn window_endpoints_satisfy_the_constraint_with_equality() {
    for alpha in grid(2) {
        for beta in grid(2) {
            let w = gamma_window(alpha, beta).unwrap();
            for g in [w.gamma_minus, w.gamma_plus] {
                if g > 0.0 {
                    let r = window_constraint_residual(alpha, beta, g);
                    assert!(r.abs() <= 1e-9, "({alpha},{beta}) endpoint {g}: {r}");
                }
            }
        }
    }
}

#[test]
fn tilt_identity_residual_on_random_triples() {
    // 10⁴ uniform triples h ∈ [0,2], β ∈ [0.05,0.95], γ ∈ (0,3].
    let mut rng = latewalk_core::walk::aux_stream(2718, 1);
    let mut unit = move || {
        let mut r = rng.next_u64() as f64 / u64::MAX as f64;
        if r <= 0.0 {
            r = 0.5;
        }
        r
    };
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let h = 2.0 * unit();
        let beta = 0.05 + 0.9 * unit();
        let gamma = 3.0 * unit();
        if gamma <= 1e-6 {
            continue;
        }
        let p = RateParams::new(h, beta, gamma).unwrap();
        let (tilt, residual) = rate_tilt_identity(&p).unwrap();
        assert!(tilt.lambda < tilt.lambda_star);
        if residual > worst {
            worst = residual;
        }
    }
    assert!(worst <= 1e-12, "worst residual {worst}");
}
