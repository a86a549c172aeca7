//! Lower bound on ln β(A, σ) by splitting the sorted coordinates into blocks.
//!
//! Notation: the stationarity equation for u₀ reads `Σ σ_i²/(1+u₀σ_i²) = c`
//! with `c = D(σ) + A`. The block construction assigns each block k a share
//! `A_k` of the same right side `c` (so `Σ_k A_k = c`, which is what the
//! block equation calls `A′`), with `A_k/b_k = m_k/(1+u₁b_k)`. Each block
//! then contributes `ln P{χ²_{m_k} < A_k/b_k}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::solver::{decreasing_root, expand_upper};
use super::{g_eval, solve_u0, BoundaryCase, ExponentSolution};
use crate::error::{DetectError, Result};
use crate::model::{signal_statistics, IntensityVector};
use crate::special::ln_gamma_p;

/// A sandwich `lower ≤ x ≤ upper` with a label for how each side was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_provenance: String,
    pub upper_provenance: String,
}

impl BoundInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// Interval on ln β(A, σ).
    pub interval: BoundInterval,
    pub u0: ExponentSolution,
    pub u1: f64,
    pub blocks: usize,
    pub block_sizes: Vec<usize>,
    /// `b_k`: the largest σ_i² in each block.
    pub block_heads: Vec<f64>,
    /// Σ_k of the χ² lower-tail sandwich lower side at `(A_k/b_k, m_k)`.
    pub constructive: f64,
    /// Σ_k ln P(m_k/2, A_k/(2b_k)), the exact value of the block product.
    pub constructive_exact: f64,
}

/// `clamp(round(√(nδ/ln(πn))), 1, n)`.
pub fn default_block_count(n: usize, delta: f64) -> usize {
    let ln_pin = (PI * n as f64).ln();
    let k = (n as f64 * delta / ln_pin).sqrt().round();
    (k as usize).clamp(1, n)
}

/// Sizes of `k` contiguous blocks covering `n` indices, larger blocks first.
fn block_sizes(n: usize, k: usize) -> Vec<usize> {
    let base = n / k;
    let extra = n % k;
    (0..k).map(|i| base + usize::from(i < extra)).collect()
}

/// `(ln πn, √(δ n ln πn))`: the two correction terms of the sandwich.
fn corrections(n: usize, delta: f64) -> (f64, f64) {
    let ln_pin = (PI * n as f64).ln();
    (ln_pin, (delta * n as f64 * ln_pin).sqrt())
}

fn delta_of(sigma: &IntensityVector) -> Result<f64> {
    signal_statistics(sigma)
        .delta
        .ok_or_else(|| DetectError::invalid("delta undefined: every sigma_i must be positive"))
}

pub fn beta_lower_bound(sigma: &IntensityVector, level: f64, blocks: Option<usize>) -> Result<LowerBound> {
    let delta = delta_of(sigma)?;
    let n = sigma.len();
    let u0 = solve_u0(sigma, level)?;
    if u0.boundary_case != BoundaryCase::Interior {
        return Err(DetectError::regime("level A outside the window T − D < A < Σσ² − D"));
    }
    let k = match blocks {
        Some(0) => return Err(DetectError::invalid("block count must be at least 1")),
        Some(k) if k > n => return Err(DetectError::invalid(format!("block count {k} exceeds dimension {n}"))),
        Some(k) => k,
        None => default_block_count(n, delta),
    };

    let mut sorted: Vec<f64> = sigma.squares().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let sizes = block_sizes(n, k);
    let mut heads = Vec::with_capacity(k);
    let mut start = 0;
    for &m in &sizes {
        heads.push(sorted[start]);
        start += m;
    }

    let c = sigma.log_det() + level;
    let h = |u: f64| {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (&m, &b) in sizes.iter().zip(&heads) {
            let q = 1.0 + u * b;
            s += m as f64 * b / q;
            ds -= m as f64 * b * b / (q * q);
        }
        (s - c, ds)
    };
    // h(u₀) ≥ 0 because every b_k dominates the σ_i² of its block.
    let hi = expand_upper(|u| h(u).0, u0.argmax.max(1.0))?;
    let u1 = if h(u0.argmax).0 <= 0.0 { u0.argmax } else { decreasing_root(h, u0.argmax, hi)?.x };

    let mut constructive = 0.0;
    let mut constructive_exact = 0.0;
    for (&m, &b) in sizes.iter().zip(&heads) {
        let mf = m as f64;
        let x = mf / (1.0 + u1 * b);
        let pivot = -0.5 * (mf * (u1 * b).ln_1p() - mf + x);
        constructive += pivot - 0.5 * (PI * mf).ln() - 1.0 / (3.0 * mf);
        constructive_exact += ln_gamma_p(0.5 * mf, 0.5 * x)?;
    }

    let (ln_pin, spread) = corrections(n, delta);
    let upper = -u0.value;
    Ok(LowerBound {
        interval: BoundInterval {
            lower: upper - spread - ln_pin,
            upper,
            lower_provenance: "-g(u0) - sqrt(delta*n*ln(pi*n)) - ln(pi*n) via K-block chi-square product".into(),
            upper_provenance: "-g(u0), Chernoff bound".into(),
        },
        u0,
        u1,
        blocks: k,
        block_sizes: sizes,
        block_heads: heads,
        constructive,
        constructive_exact,
    })
}

/// Upper estimate of ln β(A, λ) carried over from σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferBound {
    /// `−g_σ(u₀) + √(δ_σ n ln πn) + ln πn`.
    pub raw: f64,
    /// `min(raw, 0)`: a log-probability bound above 0 carries no information.
    pub clipped: f64,
    pub g_sigma: f64,
    /// `g_λ(u₀)` with λ's own `D(λ)` and σ's `u₀`.
    pub g_lambda: f64,
}

pub fn bound_transfer(sigma: &IntensityVector, lambda: &IntensityVector, level: f64) -> Result<TransferBound> {
    DetectError::check_len(sigma.len(), lambda.len())?;
    let delta = delta_of(sigma)?;
    let u0 = solve_u0(sigma, level)?;
    let (g_lambda, _) = g_eval(lambda, level, u0.argmax)?;
    let g_sigma = u0.value;
    if g_sigma > g_lambda + 1e-12 * (1.0 + g_sigma.abs()) {
        return Err(DetectError::NotApplicable(format!("g_sigma(u0) = {g_sigma} exceeds g_lambda(u0) = {g_lambda}")));
    }
    let (ln_pin, spread) = corrections(sigma.len(), delta);
    let raw = -g_sigma + spread + ln_pin;
    Ok(TransferBound { raw, clipped: raw.min(0.0), g_sigma, g_lambda })
}
