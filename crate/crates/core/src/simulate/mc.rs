use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::run_sharded;
use crate::error::{DetectError, Result};
use crate::model::{weighted_energy, BayesTest, Glrt, Hypothesis, IntensityVector, NpTest};

pub const MIN_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub p_hat: f64,
    /// `√(p̂(1 − p̂)/samples)`.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_count(hits: u64, samples: u64, seed: u64) -> Self {
        let p_hat = hits as f64 / samples as f64;
        Self { p_hat, stderr: (p_hat * (1.0 - p_hat) / samples as f64).sqrt(), samples, seed }
    }

    /// `|p̂ − p| ≤ k·s` with `s` the larger of the estimated standard error
    /// and `√(p(1 − p)/samples)`, so that `p̂ = 0` does not collapse the band.
    pub fn agrees_with(&self, p: f64, k: f64) -> bool {
        let reference = (p * (1.0 - p) / self.samples as f64).sqrt();
        (self.p_hat - p).abs() <= k * self.stderr.max(reference)
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        Err(DetectError::invalid(format!("need at least {MIN_SAMPLES} samples, got {samples}")))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    Np(NpTest),
    Bayes(BayesTest),
    Glrt(Glrt),
}

impl Detector {
    pub fn dim(&self) -> usize {
        match self {
            Detector::Np(t) => t.sigma().len(),
            Detector::Bayes(t) => t.prior.dim(),
            Detector::Glrt(t) => t.dim(),
        }
    }

    #[inline]
    fn decide_raw(&self, y: &[f64]) -> Hypothesis {
        match self {
            Detector::Np(t) => t.decide_raw(y),
            Detector::Bayes(t) => t.decide_raw(y),
            Detector::Glrt(t) => t.decide_raw(y),
        }
    }
}

/// Distribution the observations are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueState {
    H0,
    /// Signal with the given true intensity (not necessarily the one the
    /// detector was built for).
    Signal(IntensityVector),
}

/// Fills `y` with `scale_i·η_i`.
#[inline]
fn draw(rng: &mut ChaCha8Rng, scale: &[f64], y: &mut [f64]) {
    for (v, s) in y.iter_mut().zip(scale) {
        let eta: f64 = rng.sample(StandardNormal);
        *v = s * eta;
    }
}

/// α̂ under H0 (rejection frequency) or β̂ under a signal (acceptance frequency).
pub fn estimate_error_probs(
    detector: &Detector,
    truth: &TrueState,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_samples(samples)?;
    let n = detector.dim();
    let (scale, error_when): (Vec<f64>, Hypothesis) = match truth {
        TrueState::H0 => (vec![1.0; n], Hypothesis::H1),
        TrueState::Signal(sigma) => {
            DetectError::check_len(n, sigma.len())?;
            (sigma.squares().map(|s2| (1.0 + s2).sqrt()).collect(), Hypothesis::H0)
        }
    };
    let hits = run_sharded(
        samples,
        seed,
        0u64,
        |rng, count| {
            let mut y = vec![0.0; n];
            let mut hits = 0;
            for _ in 0..count {
                draw(rng, &scale, &mut y);
                if detector.decide_raw(&y) == error_when {
                    hits += 1;
                }
            }
            hits
        },
        |a, b| a + b,
    );
    Ok(MonteCarloEstimate::from_count(hits, samples, seed))
}

/// `P(Σ w_i ξ_i² ≤ threshold)` by Monte Carlo.
pub fn estimate_quadratic_form_cdf(
    weights: &[f64],
    threshold: f64,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    check_samples(samples)?;
    if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(DetectError::invalid(format!("weight[{i}] must be finite and nonnegative")));
    }
    let ones = vec![1.0; weights.len()];
    let hits = run_sharded(
        samples,
        seed,
        0u64,
        |rng, count| {
            let mut y = vec![0.0; weights.len()];
            let mut hits = 0;
            for _ in 0..count {
                draw(rng, &ones, &mut y);
                if weighted_energy(weights, &y) <= threshold {
                    hits += 1;
                }
            }
            hits
        },
        |a, b| a + b,
    );
    Ok(MonteCarloEstimate::from_count(hits, samples, seed))
}
