//! Detection of a signal whose total energy is at least `nR²` but whose
//! spread over coordinates is unknown.
//!
//! The set `{Σσ_i² ≥ nR²}` is replaced by its `n` one-hot points with value
//! `R√n`; the likelihood-ratio test over those points with common level
//! `A = 2 ln n − ln(1 + nR²)` accepts H0 iff `max_i y_i² ≤ z²`, where
//! `z² = (1 + nR²)·2 ln n/(nR²)`.

use serde::{Deserialize, Serialize};

use super::mc::{estimate_error_probs, Detector, MonteCarloEstimate, TrueState};
use crate::error::{DetectError, Result};
use crate::model::{CandidateSet, Glrt, IntensityVector};
use crate::reduction::canonical_reduction;
use crate::special::normal_two_sided_inner;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaProbe {
    pub beta_hat: MonteCarloEstimate,
    /// `Π_i P{|ξ| ≤ z/√(1+λ_i²)}`.
    pub beta_exact: f64,
    /// `ln β̂(λ)/ln β̂(σ₁)`; diagnostic only.
    pub log_ratio_mc: f64,
    /// The same ratio from the exact values.
    pub log_ratio_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example3Report {
    pub n: usize,
    pub r: f64,
    #[serde(rename = "A")]
    pub a: f64,
    /// `z²`, the per-coordinate acceptance threshold on `y_i²`.
    pub z_squared: f64,
    pub alpha_hat: MonteCarloEstimate,
    /// `1 − (P{|ξ| ≤ z})ⁿ`.
    pub alpha_exact: f64,
    /// `1/√(2 ln n)`.
    pub alpha_bound: f64,
    pub beta_hat_at_sigma1: MonteCarloEstimate,
    /// `P{η² ≤ 2 ln n/(nR²)}·(P{|ξ| ≤ z})^{n−1}`.
    pub beta_exact_at_sigma1: f64,
    /// `√(2 ln n)/(R√n)`.
    pub beta_bound: f64,
    pub lambda: Option<LambdaProbe>,
}

/// Exact miss probability of the max-coordinate test at true intensity λ.
pub fn example3_beta_exact(lambda: &IntensityVector, z_squared: f64) -> f64 {
    let z = z_squared.sqrt();
    lambda.squares().map(|l2| normal_two_sided_inner(z / (1.0 + l2).sqrt())).product()
}

pub fn example3_level(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    2.0 * nf.ln() - (nf * r * r).ln_1p()
}

/// Runs the experiment; `lambda`, when given, must lie in the set
/// (`Σλ_i² ≥ nR²`) and has its miss probability estimated too.
pub fn example3_experiment(
    n: usize,
    r: f64,
    samples: u64,
    seed: u64,
    lambda: Option<&IntensityVector>,
) -> Result<Example3Report> {
    if n < 2 {
        return Err(DetectError::invalid(format!("n must be at least 2, got {n}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(DetectError::invalid(format!("R must be positive and finite, got {r}")));
    }
    let nf = n as f64;
    let energy = nf * r * r;
    if let Some(l) = lambda {
        DetectError::check_len(n, l.len())?;
        if l.sum_squares() < energy * (1.0 - 1e-12) {
            return Err(DetectError::invalid(format!("lambda has energy {} below n R² = {energy}", l.sum_squares())));
        }
    }

    let a = example3_level(n, r);
    let z_squared = (1.0 + energy) * 2.0 * nf.ln() / energy;
    let points = match canonical_reduction(&CandidateSet::SumFloor { n, r })?.points {
        CandidateSet::FinitePoints(points) => points,
        _ => unreachable!("canonical reduction returns finite points"),
    };
    let sigma1 = points[0].clone();
    let detector = Detector::Glrt(Glrt::with_common_level(points, a)?);

    let alpha_hat = estimate_error_probs(&detector, &TrueState::H0, samples, seed)?;
    let beta_hat = estimate_error_probs(&detector, &TrueState::Signal(sigma1.clone()), samples, seed.wrapping_add(1))?;
    let inner = normal_two_sided_inner(z_squared.sqrt());
    let beta_exact = example3_beta_exact(&sigma1, z_squared);

    let lambda = match lambda {
        None => None,
        Some(l) => {
            let probe = estimate_error_probs(&detector, &TrueState::Signal(l.clone()), samples, seed.wrapping_add(2))?;
            let exact = example3_beta_exact(l, z_squared);
            Some(LambdaProbe {
                beta_hat: probe,
                beta_exact: exact,
                log_ratio_mc: probe.p_hat.ln() / beta_hat.p_hat.ln(),
                log_ratio_exact: exact.ln() / beta_exact.ln(),
            })
        }
    };

    Ok(Example3Report {
        n,
        r,
        a,
        z_squared,
        alpha_hat,
        alpha_exact: -(nf * inner.ln()).exp_m1(),
        alpha_bound: 1.0 / (2.0 * nf.ln()).sqrt(),
        beta_hat_at_sigma1: beta_hat,
        beta_exact_at_sigma1: beta_exact,
        beta_bound: (2.0 * nf.ln()).sqrt() / (r * nf.sqrt()),
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn level_and_bounds_at_ten_thousand() {
        assert_relative_eq!(example3_level(10_000, 1.0), 9.210_240_377_0, max_relative = 1e-10);
        let nf = 1e4f64;
        assert_relative_eq!(1.0 / (2.0 * nf.ln()).sqrt(), 0.232_995_300_9, max_relative = 1e-9);
        assert_relative_eq!((2.0 * nf.ln()).sqrt() / 100.0, 0.042_919_320_5, max_relative = 1e-9);
    }

    #[test]
    fn exact_beta_matches_product_formula() {
        let (n, r) = (50usize, 1.0);
        let nf = n as f64;
        let z2 = (1.0 + nf) * 2.0 * nf.ln() / nf;
        let sigma1 = IntensityVector::new({
            let mut v = vec![0.0; n];
            v[0] = nf.sqrt() * r;
            v
        })
        .unwrap();
        let expect =
            normal_two_sided_inner((2.0 * nf.ln() / nf).sqrt()) * normal_two_sided_inner(z2.sqrt()).powi(n as i32 - 1);
        assert_relative_eq!(example3_beta_exact(&sigma1, z2), expect, max_relative = 1e-13);
    }

    #[test]
    fn small_experiment_matches_exact_values() {
        let lambda = IntensityVector::constant(200, 1.0).unwrap();
        let rep = example3_experiment(200, 1.0, 50_000, 3, Some(&lambda)).unwrap();
        assert!(rep.alpha_hat.agrees_with(rep.alpha_exact, 3.0), "{rep:?}");
        assert!(rep.beta_hat_at_sigma1.agrees_with(rep.beta_exact_at_sigma1, 3.0), "{rep:?}");
        let probe = rep.lambda.unwrap();
        assert!(probe.beta_hat.agrees_with(probe.beta_exact, 3.0));
        assert!(probe.beta_exact <= 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(example3_experiment(1, 1.0, 1000, 1, None).is_err());
        assert!(example3_experiment(10, 0.0, 1000, 1, None).is_err());
        let weak = IntensityVector::constant(10, 0.5).unwrap();
        assert!(example3_experiment(10, 1.0, 1000, 1, Some(&weak)).is_err());
    }
}
