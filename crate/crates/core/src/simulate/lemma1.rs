//! Empirical check of `P(ξ + η ∈ B) ≤ P(ξ ∈ B)` for independent centered
//! Gaussian vectors with diagonal covariance and a convex set B symmetric
//! under every coordinate sign flip.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::chi2::weighted_chi2_cdf;
use super::mc::{MonteCarloEstimate, MIN_SAMPLES};
use super::rng::run_sharded;
use crate::error::{DetectError, Result};
use crate::special::normal_two_sided_inner;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSymmetricRegion {
    /// `|y_i| ≤ h_i`.
    Box { half_widths: Vec<f64> },
    /// `Σ w_i y_i² ≤ radius`.
    Ellipsoid { weights: Vec<f64>, radius: f64 },
}

impl AxisSymmetricRegion {
    pub fn dim(&self) -> usize {
        match self {
            AxisSymmetricRegion::Box { half_widths } => half_widths.len(),
            AxisSymmetricRegion::Ellipsoid { weights, .. } => weights.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AxisSymmetricRegion::Box { half_widths } => {
                if half_widths.is_empty() || half_widths.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
                    return Err(DetectError::invalid("box half-widths must be positive and finite"));
                }
            }
            AxisSymmetricRegion::Ellipsoid { weights, radius } => {
                if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(DetectError::invalid("ellipsoid weights must be nonnegative and finite"));
                }
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(DetectError::invalid("ellipsoid radius must be nonnegative and finite"));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            AxisSymmetricRegion::Box { half_widths } => y.iter().zip(half_widths).all(|(v, h)| v.abs() <= *h),
            AxisSymmetricRegion::Ellipsoid { weights, radius } => {
                y.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>() <= *radius
            }
        }
    }

    /// Exact probability that a centered Gaussian vector with independent
    /// components of standard deviations `sd` lands in the region.
    pub fn gaussian_probability(&self, sd: &[f64]) -> Result<f64> {
        self.validate()?;
        DetectError::check_len(self.dim(), sd.len())?;
        match self {
            AxisSymmetricRegion::Box { half_widths } => Ok(half_widths
                .iter()
                .zip(sd)
                .map(|(h, s)| if *s == 0.0 { 1.0 } else { normal_two_sided_inner(h / s) })
                .product()),
            AxisSymmetricRegion::Ellipsoid { weights, radius } => {
                let scaled: Vec<f64> = weights.iter().zip(sd).map(|(w, s)| w * s * s).collect();
                weighted_chi2_cdf(&scaled, *radius)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    pub p_xi_plus_eta: MonteCarloEstimate,
    pub p_xi: MonteCarloEstimate,
    /// `√(se₁² + se₂²)`.
    pub joint_stderr: f64,
    /// `p̂(ξ+η) ≤ p̂(ξ) + 3·joint_stderr`.
    pub holds: bool,
}

impl Lemma1Check {
    pub fn holds_within(&self, k: f64) -> bool {
        self.p_xi_plus_eta.p_hat <= self.p_xi.p_hat + k * self.joint_stderr
    }
}

/// Both sides estimated from the same draws of ξ and η.
pub fn lemma1_check(
    region: &AxisSymmetricRegion,
    xi_sd: &[f64],
    eta_sd: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Lemma1Check> {
    region.validate()?;
    let n = region.dim();
    DetectError::check_len(n, xi_sd.len())?;
    DetectError::check_len(n, eta_sd.len())?;
    if xi_sd.iter().chain(eta_sd).any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(DetectError::invalid("standard deviations must be nonnegative and finite"));
    }
    if samples < MIN_SAMPLES {
        return Err(DetectError::invalid(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let (sum_hits, xi_hits) = run_sharded(
        samples,
        seed,
        (0u64, 0u64),
        |rng, count| {
            let mut xi = vec![0.0; n];
            let mut sum = vec![0.0; n];
            let (mut a, mut b) = (0, 0);
            for _ in 0..count {
                for i in 0..n {
                    let u: f64 = rng.sample(StandardNormal);
                    let v: f64 = rng.sample(StandardNormal);
                    xi[i] = xi_sd[i] * u;
                    sum[i] = xi[i] + eta_sd[i] * v;
                }
                a += u64::from(region.contains(&sum));
                b += u64::from(region.contains(&xi));
            }
            (a, b)
        },
        |x, y| (x.0 + y.0, x.1 + y.1),
    );
    let p_xi_plus_eta = MonteCarloEstimate::from_count(sum_hits, samples, seed);
    let p_xi = MonteCarloEstimate::from_count(xi_hits, samples, seed);
    let joint_stderr = (p_xi_plus_eta.stderr.powi(2) + p_xi.stderr.powi(2)).sqrt();
    let mut check = Lemma1Check { p_xi_plus_eta, p_xi, joint_stderr, holds: false };
    check.holds = check.holds_within(3.0);
    Ok(check)
}
