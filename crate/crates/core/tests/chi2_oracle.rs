//! Cross-checks of the weighted χ² CDF against characteristic-function
//! inversion and large Monte Carlo runs.

use gausdet_core::simulate::{estimate_quadratic_form_cdf, weighted_chi2_cdf};
use gausdet_core::special::gamma_p;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `P(Σ w_j ξ_j² < x)` by the inversion formula
/// `½ − (1/π) ∫₀^∞ sin θ(u)/(u ρ(u)) du` with `θ(u) = ½Σ atan(w_j u) − ½xu`,
/// `ρ(u) = Π (1 + w_j²u²)^{1/4}`, discretized by the midpoint rule. The
/// step is set from the spread of the distribution so that aliasing is
/// negligible; needs at least four weights for the truncated tail to be small.
fn cf_inversion(weights: &[f64], x: f64) -> f64 {
    assert!(weights.len() >= 4);
    let total: f64 = weights.iter().sum();
    let w_max = weights.iter().copied().fold(0.0, f64::max);
    let span = 2.0 * (x + total) + 80.0 * w_max;
    let step = 2.0 * std::f64::consts::PI / span;
    // past `upper` the integrand is below 1e-13 in absolute value
    let root_prod: f64 = weights.iter().map(|w| w.sqrt()).product();
    let upper = (1e13 / root_prod).powf(1.0 / (1.0 + 0.5 * weights.len() as f64));
    let terms = (upper / step) as usize;
    let mut sum = 0.0;
    for k in 0..terms {
        let u = (k as f64 + 0.5) * step;
        let mut theta = -0.5 * x * u;
        let mut ln_rho = 0.0;
        for &w in weights {
            theta += 0.5 * (w * u).atan();
            ln_rho += 0.25 * (w * w * u * u).ln_1p();
        }
        sum += theta.sin() / (u * ln_rho.exp());
    }
    0.5 - sum * step / std::f64::consts::PI
}

#[test]
fn series_matches_cf_inversion() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..12 {
        let m = rng.random_range(4..9);
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.3..3.0)).collect();
        let mean: f64 = w.iter().sum();
        for frac in [0.3, 0.8, 1.0, 1.6] {
            let x = frac * mean;
            let series = weighted_chi2_cdf(&w, x).unwrap();
            let cf = cf_inversion(&w, x);
            assert!((series - cf).abs() < 1e-9, "w={w:?} x={x}: series {series} vs cf {cf}");
        }
    }
}

#[test]
fn cf_inversion_reproduces_equal_weight_closed_form() {
    // sanity check of the oracle itself
    let w = vec![1.5; 6];
    for x in [2.0, 9.0, 20.0] {
        let exact = gamma_p(3.0, x / 3.0).unwrap();
        assert!((cf_inversion(&w, x) - exact).abs() < 1e-9);
    }
}

#[test]
fn series_matches_large_monte_carlo() {
    let cases: [(&[f64], f64); 3] = [(&[0.2, 1.0, 4.0], 3.0), (&[0.05, 0.5, 0.5, 2.5, 7.0], 10.0), (&[1.0, 9.0], 4.0)];
    for (k, (w, x)) in cases.into_iter().enumerate() {
        let est = estimate_quadratic_form_cdf(w, x, 10_000_000, 31 + k as u64).unwrap();
        let exact = weighted_chi2_cdf(w, x).unwrap();
        assert!(est.agrees_with(exact, 3.0), "w={w:?} x={x}: {est:?} vs {exact}");
    }
}

#[test]
fn spread_and_long_weight_vectors() {
    // many coordinates and a weight ratio of ~100
    let w: Vec<f64> = (0..60).map(|i| 0.05 + 0.08 * i as f64).collect();
    let total: f64 = w.iter().sum();
    let mut prev = 0.0;
    for frac in [0.4, 0.7, 1.0, 1.3, 2.0] {
        let v = weighted_chi2_cdf(&w, frac * total).unwrap();
        assert!(v >= prev && v <= 1.0);
        prev = v;
    }
    let est = estimate_quadratic_form_cdf(&w, total, 1_000_000, 41).unwrap();
    assert!(est.agrees_with(weighted_chi2_cdf(&w, total).unwrap(), 3.0));
}
