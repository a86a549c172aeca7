//! The observation model, the scalar statistics of an intensity vector and
//! the three decision rules built on the log-likelihood ratio.
//!
//! Under H0 the observation is white noise `y = ξ`; under H1 it is
//! `y = s + ξ` with `s_i ~ N(0, σ_i²)`. The log-likelihood ratio is
//!
//! ```text
//! r(y, σ) = ½ Σ σ_i² y_i² / (1 + σ_i²) − ½ D(σ),   D(σ) = Σ ln(1 + σ_i²).
//! ```
//!
//! All acceptance regions are closed: a statistic exactly on the threshold
//! decides H0.

use serde::{Deserialize, Serialize};

use crate::error::{DetectError, Result};

/// Nonnegative signal intensities σ = (σ_1, …, σ_n), n ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct IntensityVector(Vec<f64>);

impl IntensityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(DetectError::invalid("intensity vector must have at least one component"));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(DetectError::invalid(format!("sigma[{i}] is not finite")));
            }
            if v < 0.0 {
                return Err(DetectError::invalid(format!("sigma[{i}] negative")));
            }
        }
        Ok(Self(values))
    }

    /// `n` copies of `value`.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn squares(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|s| s * s)
    }

    pub fn sum_squares(&self) -> f64 {
        self.squares().sum()
    }

    /// `r_i² = σ_i² / (1 + σ_i²)`, the weights of the quadratic statistic.
    pub fn r_squared(&self) -> Vec<f64> {
        self.squares().map(|s2| s2 / (1.0 + s2)).collect()
    }

    /// `D(σ) = Σ ln(1 + σ_i²)`.
    pub fn log_det(&self) -> f64 {
        self.squares().map(f64::ln_1p).sum()
    }

    /// Componentwise `self ≤ other`.
    pub fn is_dominated_by(&self, other: &IntensityVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl TryFrom<Vec<f64>> for IntensityVector {
    type Error = DetectError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<IntensityVector> for Vec<f64> {
    fn from(v: IntensityVector) -> Self {
        v.0
    }
}

/// The scalar functionals of σ used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalStatistics {
    /// `D = Σ ln(1 + σ_i²)` (nats).
    pub d: f64,
    /// `T = Σ σ_i² / (1 + σ_i²)`.
    pub t: f64,
    /// `B = 2 Σ σ_i⁴ / (1 + σ_i²)²`.
    pub b: f64,
    /// `Σ σ_i²`.
    pub sum_squares: f64,
    /// `ln(max σ_i² / min σ_i²)`; `None` when some σ_i = 0.
    pub delta: Option<f64>,
    /// Open interval `(T − D, Σσ² − D)` of levels A for which both error
    /// probabilities vanish by the law of large numbers.
    pub window: (f64, f64),
}

pub fn signal_statistics(sigma: &IntensityVector) -> SignalStatistics {
    let mut d = 0.0;
    let mut t = 0.0;
    let mut b = 0.0;
    let mut sum_squares = 0.0;
    let mut min_sq = f64::INFINITY;
    let mut max_sq: f64 = 0.0;
    for s2 in sigma.squares() {
        let r2 = s2 / (1.0 + s2);
        d += s2.ln_1p();
        t += r2;
        b += 2.0 * r2 * r2;
        sum_squares += s2;
        min_sq = min_sq.min(s2);
        max_sq = max_sq.max(s2);
    }
    let delta = (min_sq > 0.0).then(|| (max_sq / min_sq).ln());
    SignalStatistics { d, t, b, sum_squares, delta, window: (t - d, sum_squares - d) }
}

/// One observation vector y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Observation(Vec<f64>);

impl Observation {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DetectError::invalid("observation contains a non-finite value"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Observation {
    type Error = DetectError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Observation> for Vec<f64> {
    fn from(v: Observation) -> Self {
        v.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// `Σ w_i y_i²` for precomputed weights.
#[inline]
pub(crate) fn weighted_energy(weights: &[f64], y: &[f64]) -> f64 {
    weights.iter().zip(y).map(|(w, v)| w * v * v).sum()
}

/// `r(y, σ) = ½ Σ σ_i² y_i²/(1+σ_i²) − ½ D(σ)`.
pub fn log_likelihood_ratio(y: &Observation, sigma: &IntensityVector) -> Result<f64> {
    DetectError::check_len(sigma.len(), y.len())?;
    let energy = weighted_energy(&sigma.r_squared(), y.values());
    Ok(0.5 * energy - 0.5 * sigma.log_det())
}

/// Neyman–Pearson test for a simple alternative σ at level A.
///
/// Accepts H0 on the ellipsoid `Σ σ_i² y_i²/(1+σ_i²) ≤ D(σ) + A`.
#[derive(Debug, Clone, PartialEq)]
pub struct NpTest {
    sigma: IntensityVector,
    level: f64,
    weights: Vec<f64>,
    stats: SignalStatistics,
}

impl NpTest {
    pub fn new(sigma: IntensityVector, level: f64) -> Result<Self> {
        if !level.is_finite() {
            return Err(DetectError::invalid("test level A must be finite"));
        }
        let stats = signal_statistics(&sigma);
        if stats.d + level < 0.0 {
            return Err(DetectError::invalid(format!(
                "D(sigma) + A = {} < 0: acceptance region is empty",
                stats.d + level
            )));
        }
        let weights = sigma.r_squared();
        Ok(Self { sigma, level, weights, stats })
    }

    /// Builds the test from the right-hand side `D(σ) + A` instead of A.
    pub fn with_threshold(sigma: IntensityVector, d_plus_a: f64) -> Result<Self> {
        let d = sigma.log_det();
        Self::new(sigma, d_plus_a - d)
    }

    pub fn sigma(&self) -> &IntensityVector {
        &self.sigma
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn stats(&self) -> &SignalStatistics {
        &self.stats
    }

    /// `D(σ) + A`, the ellipsoid radius.
    pub fn threshold(&self) -> f64 {
        self.stats.d + self.level
    }

    /// Whether `T − D < A < Σσ² − D` holds.
    pub fn in_window(&self) -> bool {
        let (lo, hi) = self.stats.window;
        lo < self.level && self.level < hi
    }

    /// `Σ σ_i² y_i² / (1 + σ_i²)`.
    pub fn statistic(&self, y: &Observation) -> Result<f64> {
        DetectError::check_len(self.sigma.len(), y.len())?;
        Ok(weighted_energy(&self.weights, y.values()))
    }

    pub fn decide(&self, y: &Observation) -> Result<Hypothesis> {
        DetectError::check_len(self.sigma.len(), y.len())?;
        Ok(self.decide_raw(y.values()))
    }

    #[inline]
    pub(crate) fn decide_raw(&self, y: &[f64]) -> Hypothesis {
        if weighted_energy(&self.weights, y) <= self.threshold() {
            Hypothesis::H0
        } else {
            Hypothesis::H1
        }
    }
}

pub fn np_decide(test: &NpTest, y: &Observation) -> Result<Hypothesis> {
    test.decide(y)
}

/// Prior with finite support on intensity vectors of a common length.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePrior {
    points: Vec<IntensityVector>,
    weights: Vec<f64>,
    // per-point r_i², ½D(σ_k) and ln w_k, cached for repeated evaluation
    coefs: Vec<Vec<f64>>,
    half_d: Vec<f64>,
    ln_w: Vec<f64>,
}

impl DiscretePrior {
    pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(points: Vec<IntensityVector>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(DetectError::invalid("prior must have at least one support point"));
        }
        DetectError::check_len(points.len(), weights.len())?;
        let n = points[0].len();
        for p in &points {
            DetectError::check_len(n, p.len())?;
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(DetectError::invalid(format!("prior weight[{i}] must be finite and nonnegative")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > Self::WEIGHT_SUM_TOLERANCE {
            return Err(DetectError::invalid(format!("prior weights sum to {total}, not 1")));
        }
        let coefs = points.iter().map(IntensityVector::r_squared).collect();
        let half_d = points.iter().map(|p| 0.5 * p.log_det()).collect();
        let ln_w = weights.iter().map(|w| w.ln()).collect();
        Ok(Self { points, weights, coefs, half_d, ln_w })
    }

    /// Unit mass on one point.
    pub fn point_mass(sigma: IntensityVector) -> Self {
        Self::new(vec![sigma], vec![1.0]).expect("a one-point prior is always valid")
    }

    pub fn points(&self) -> &[IntensityVector] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub(crate) fn log_ratio_raw(&self, y: &[f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        let mut exps = Vec::with_capacity(self.points.len());
        for ((coef, half_d), ln_w) in self.coefs.iter().zip(&self.half_d).zip(&self.ln_w) {
            let e = ln_w + 0.5 * weighted_energy(coef, y) - half_d;
            max = max.max(e);
            exps.push(e);
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + exps.iter().map(|e| (e - max).exp()).sum::<f64>().ln()
    }
}

/// `ln Σ_k w_k exp(r(y, σ_k))`, evaluated with a max shift.
pub fn bayes_log_ratio(y: &Observation, prior: &DiscretePrior) -> Result<f64> {
    DetectError::check_len(prior.dim(), y.len())?;
    Ok(prior.log_ratio_raw(y.values()))
}

/// Bayes-mixture test: H0 iff the mixture log-ratio is at most A.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesTest {
    pub prior: DiscretePrior,
    pub level: f64,
}

impl BayesTest {
    pub fn new(prior: DiscretePrior, level: f64) -> Result<Self> {
        if !level.is_finite() {
            return Err(DetectError::invalid("test level A must be finite"));
        }
        Ok(Self { prior, level })
    }

    pub fn decide(&self, y: &Observation) -> Result<Hypothesis> {
        DetectError::check_len(self.prior.dim(), y.len())?;
        Ok(self.decide_raw(y.values()))
    }

    #[inline]
    pub(crate) fn decide_raw(&self, y: &[f64]) -> Hypothesis {
        if self.prior.log_ratio_raw(y) <= self.level {
            Hypothesis::H0
        } else {
            Hypothesis::H1
        }
    }
}

/// Uncertainty set of intensity vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSet {
    FinitePoints(Vec<IntensityVector>),
    /// `{λ ≥ 0 : Π(1 + λ_i²) ≥ (1 + D²)ⁿ}`.
    ProductFloor {
        n: usize,
        d: f64,
    },
    /// `{σ ≥ 0 : Σ σ_i² ≥ n R²}`.
    SumFloor {
        n: usize,
        r: f64,
    },
}

impl CandidateSet {
    pub fn finite(points: Vec<IntensityVector>) -> Result<Self> {
        let set = CandidateSet::FinitePoints(points);
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CandidateSet::FinitePoints(points) => {
                let first = points.first().ok_or_else(|| DetectError::invalid("candidate set is empty"))?;
                for p in points {
                    DetectError::check_len(first.len(), p.len())?;
                }
                Ok(())
            }
            CandidateSet::ProductFloor { n, d } => {
                if *n == 0 || !(d.is_finite() && *d > 0.0) {
                    return Err(DetectError::invalid("product floor needs n ≥ 1 and D > 0"));
                }
                Ok(())
            }
            CandidateSet::SumFloor { n, r } => {
                if *n == 0 || !(r.is_finite() && *r > 0.0) {
                    return Err(DetectError::invalid("sum floor needs n ≥ 1 and R > 0"));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CandidateSet::FinitePoints(points) => points.first().map_or(0, IntensityVector::len),
            CandidateSet::ProductFloor { n, .. } | CandidateSet::SumFloor { n, .. } => *n,
        }
    }

    /// Points the reductions work with. A finite set is returned as is; the
    /// product floor yields its symmetric point `(D, …, D)`; the sum floor
    /// yields the `n` one-hot vectors with value `R√n` followed by the
    /// symmetric point `(R, …, R)`.
    pub fn witness_points(&self) -> Result<Vec<IntensityVector>> {
        self.validate()?;
        match self {
            CandidateSet::FinitePoints(points) => Ok(points.clone()),
            CandidateSet::ProductFloor { n, d } => Ok(vec![IntensityVector::constant(*n, *d)?]),
            CandidateSet::SumFloor { n, r } => {
                let mut points = one_hot_family(*n, r * (*n as f64).sqrt())?;
                points.push(IntensityVector::constant(*n, *r)?);
                Ok(points)
            }
        }
    }
}

/// The `n` vectors with a single nonzero coordinate equal to `value`.
pub(crate) fn one_hot_family(n: usize, value: f64) -> Result<Vec<IntensityVector>> {
    (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = value;
            IntensityVector::new(v)
        })
        .collect()
}

/// One GLRT candidate, stored sparsely: only components with σ_i > 0
/// contribute to `2r(y, σ)`.
#[derive(Debug, Clone, PartialEq)]
struct SparseCandidate {
    support: Vec<(usize, f64)>,
    /// `D(σ) + A(σ)`.
    offset: f64,
}

/// Likelihood-ratio criterion over a finite candidate set with a level
/// `A(σ)` per candidate: H0 iff `max_σ [2r(y, σ) − A(σ)] ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Glrt {
    points: Vec<IntensityVector>,
    levels: Vec<f64>,
    candidates: Vec<SparseCandidate>,
    dim: usize,
}

impl Glrt {
    pub fn new(points: Vec<IntensityVector>, levels: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(DetectError::invalid("GLRT candidate set is empty"));
        }
        DetectError::check_len(points.len(), levels.len())?;
        let dim = points[0].len();
        let mut candidates = Vec::with_capacity(points.len());
        for (p, &a) in points.iter().zip(&levels) {
            DetectError::check_len(dim, p.len())?;
            if !a.is_finite() {
                return Err(DetectError::invalid("GLRT level must be finite"));
            }
            let support = p.r_squared().into_iter().enumerate().filter(|(_, w)| *w > 0.0).collect();
            candidates.push(SparseCandidate { support, offset: p.log_det() + a });
        }
        Ok(Self { points, levels, candidates, dim })
    }

    pub fn with_common_level(points: Vec<IntensityVector>, level: f64) -> Result<Self> {
        let levels = vec![level; points.len()];
        Self::new(points, levels)
    }

    pub fn points(&self) -> &[IntensityVector] {
        &self.points
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `max_σ [2r(y, σ) − A(σ)]`.
    pub fn statistic(&self, y: &Observation) -> Result<f64> {
        DetectError::check_len(self.dim, y.len())?;
        let y = y.values();
        Ok(self.candidates.iter().map(|c| Self::penalized(c, y)).fold(f64::NEG_INFINITY, f64::max))
    }

    #[inline]
    fn penalized(c: &SparseCandidate, y: &[f64]) -> f64 {
        c.support.iter().map(|&(i, w)| w * y[i] * y[i]).sum::<f64>() - c.offset
    }

    pub fn decide(&self, y: &Observation) -> Result<Hypothesis> {
        DetectError::check_len(self.dim, y.len())?;
        Ok(self.decide_raw(y.values()))
    }

    #[inline]
    pub(crate) fn decide_raw(&self, y: &[f64]) -> Hypothesis {
        if self.candidates.iter().any(|c| Self::penalized(c, y) > 0.0) {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }
}

pub fn glrt_decide(candidates: &CandidateSet, levels: &[f64], y: &Observation) -> Result<Hypothesis> {
    match candidates {
        CandidateSet::FinitePoints(points) => Glrt::new(points.clone(), levels.to_vec())?.decide(y),
        _ => Err(DetectError::invalid("GLRT requires a finite candidate set")),
    }
}
