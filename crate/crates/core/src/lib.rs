//! Minimax detection of a Gaussian stochastic signal vector in white Gaussian
//! noise.
//!
//! Observations are `y = ξ` under H0 and `y = s + ξ` under H1, where `ξ` is
//! standard white noise and `s` has independent `N(0, σ_i²)` components. The
//! crate provides:
//!
//! * [`model`]: intensity vectors, signal statistics and the Neyman–Pearson,
//!   Bayes-mixture and likelihood-ratio (GLRT) decision rules;
//! * [`exponents`]: Chernoff-type exponents, their maximizers, upper bounds on
//!   the miss and false-alarm probabilities and the block lower bound;
//! * [`tails`]: Gaussian and χ² tail sandwiches, Berry–Esseen approximation;
//! * [`reduction`]: set reduction to componentwise-minimal points, dominance
//!   and partition certificates, canonical reductions of parametric sets;
//! * [`simulate`]: the Monte Carlo engine, exact weighted-χ² CDF and the
//!   experiment harnesses that cross-check everything above.

pub mod error;
pub mod exponents;
pub mod model;
pub mod reduction;
pub mod simulate;
pub mod special;
pub mod tails;

pub use error::{DetectError, Result};
pub use model::{
    BayesTest, CandidateSet, DiscretePrior, Glrt, Hypothesis, IntensityVector, NpTest, Observation, SignalStatistics,
};
