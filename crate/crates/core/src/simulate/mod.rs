//! Monte Carlo estimation of error probabilities, the exact weighted-χ²
//! CDF, and experiment harnesses built on them.
//!
//! Under H1 with true intensity σ the observation is distributed as
//! `y_i = √(1 + σ_i²)·η_i` with standard normal `η`, which is how signals
//! are drawn here.

mod chi2;
mod example3;
mod lemma1;
mod mc;
pub mod rng;

pub use chi2::{weighted_chi2_cdf, CDF_TOLERANCE};
pub use example3::{example3_beta_exact, example3_experiment, example3_level, Example3Report, LambdaProbe};
pub use lemma1::{lemma1_check, AxisSymmetricRegion, Lemma1Check};
pub use mc::{estimate_error_probs, estimate_quadratic_form_cdf, Detector, MonteCarloEstimate, TrueState, MIN_SAMPLES};
