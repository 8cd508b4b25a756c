//! Independent oracles for the inequality lab: the gap functions are
//! defined through the minor calculus, so here they are cross-checked
//! against finite differences of `log sigma` along lines, which touch only
//! the plain `sigma` evaluator.

use khess::ineq::{
    log_concavity_gap, log_quotient_concavity_gap, newton_minor_gap, sample_cone, ConcavityParams,
};
use khess::symm::{sigma, EigenVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sigma_at(base: &[f64], xi: &[f64], t: f64, k: usize) -> f64 {
    let moved: Vec<f64> = base.iter().zip(xi).map(|(&v, &x)| v + t * x).collect();
    sigma(&EigenVector::new(&moved).unwrap(), k).unwrap()
}

/// Fourth-order five-point second-derivative stencil of
/// `t -> log sigma_k(lambda + t xi)` at `t = 0`.
fn log_sigma_second_derivative(lam: &[f64], xi: &[f64], k: usize, h: f64) -> f64 {
    let f = |t: f64| sigma_at(lam, xi, t, k).ln();
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

#[test]
fn quotient_gap_matches_log_quotient_second_derivative() {
    // gap = -d^2/dt^2 [log sigma_k - log sigma_l](lambda + t xi).
    let lam = [2.0, 1.5, 0.7, 0.4];
    let ev = EigenVector::new(&lam).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let h = 1e-3;
    for (k, l) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
        for _ in 0..10 {
            let xi: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let gap = log_quotient_concavity_gap(&ev, &xi, k, l).unwrap();
            let fd = -(log_sigma_second_derivative(&lam, &xi, k, h)
                - log_sigma_second_derivative(&lam, &xi, l, h));
            assert!(
                (gap.gap - fd).abs() <= 1e-6 * gap.scale,
                "k = {k}, l = {l}: {} vs {fd}",
                gap.gap
            );
        }
    }
}

#[test]
fn concavity_lhs_matches_negative_log_second_derivative() {
    // The barrier side has a closed form, so subtracting it from the gap
    // recovers the LHS, which must equal -d^2/dt^2 log sigma_k.
    let lam = [1.0, 0.8, 0.05, 0.03];
    let ev = EigenVector::new(&lam).unwrap();
    let params = ConcavityParams::new(4, 3, 2, 0.5, 0.5, 0.5, 0.1).unwrap();
    let sigma_k = sigma(&ev, 3).unwrap();
    let grad: Vec<f64> = (0..4)
        .map(|i| khess::symm::sigma_minor(&ev, 2, &[i]).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let xi: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = log_concavity_gap(&ev, &xi, &params).unwrap();
        let tail: f64 = (2..4).map(|i| grad[i] * xi[i] * xi[i]).sum();
        let rhs = (1.0 - 0.5) * (xi[0] / lam[0]).powi(2) - 0.5 * tail / (lam[0] * sigma_k);
        let lhs = g.gap + rhs;
        let fd = -log_sigma_second_derivative(&lam, &xi, 3, 1e-3);
        assert!((lhs - fd).abs() <= 1e-5 * g.scale, "{lhs} vs {fd}");
    }
}

#[test]
fn newton_minor_gap_is_nonnegative_on_arbitrary_real_vectors() {
    // The bound needs no cone hypothesis; exercise it on sign-mixed input.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let n = rng.random_range(4..8usize);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let lam = EigenVector::new(&v).unwrap();
        let l = rng.random_range(2..=n - 1);
        let p = rng.random_range(0..n);
        let q = (p + 1 + rng.random_range(0..n - 1)) % n;
        if p == q {
            continue;
        }
        let g = newton_minor_gap(&lam, l, p, q).unwrap();
        assert!(g.value >= -1e-10 * g.scale, "value {} at n = {n}, l = {l}", g.value);
        let agree_tol = 1e-12 * g.scale;
        assert!(
            (g.value - g.alt_value).abs() <= agree_tol,
            "forms disagree: {} vs {}",
            g.value,
            g.alt_value
        );
    }
}

#[test]
fn quotient_gap_nonnegative_on_boundary_biased_cone_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for &(n, k, l) in &[(3, 2, 1), (5, 3, 2), (8, 4, 2)] {
        for _ in 0..200 {
            let lam = sample_cone(n, k, &mut rng).unwrap();
            let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g = log_quotient_concavity_gap(&lam, &xi, k, l).unwrap();
            assert!(
                g.gap >= -1e-10 * g.scale,
                "gap {} at n = {n}, k = {k}, l = {l}, lambda = {:?}",
                g.gap,
                lam.values()
            );
        }
    }
}

/// Reduced-budget sweep of the full search matrix the acceptance suite
/// runs; kept ignored because the full-budget version lives there. Run
/// explicitly when tuning the sampler.
#[test]
#[ignore]
fn probe_search_matrix_at_reduced_budget() {
    use khess::ineq::{search_delta_prime, SampleBudget};
    use std::time::Instant;
    let start = Instant::now();
    for &(n, k, l) in &[(3, 2, 1), (4, 3, 1), (4, 3, 2), (5, 3, 2)] {
        for &eps in &[0.25, 0.5, 0.75] {
            for &delta in &[0.25, 0.5, 0.75] {
                for &delta0 in &[0.25, 0.5, 0.75] {
                    let budget = SampleBudget::new(10_000, 2024);
                    let out =
                        search_delta_prime(n, k, l, eps, delta, delta0, &budget).unwrap();
                    println!(
                        "({n},{k},{l}) eps={eps} delta={delta} delta0={delta0}: \
                         found={:.6e} survived={} levels={} samples={} min_gap={:.3e}",
                        out.delta_prime_found,
                        out.survived,
                        out.levels.len(),
                        out.samples_checked,
                        out.min_gap
                    );
                    assert!(out.survived, "collapse at ({n},{k},{l},{eps},{delta},{delta0})");
                }
            }
        }
    }
    println!("matrix wall time: {:.1?}", start.elapsed());
}
