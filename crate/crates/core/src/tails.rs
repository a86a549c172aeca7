//! Closed-form tail estimates: Gaussian tail sandwich, χ² lower/upper
//! log-tail sandwiches, a Berry–Esseen approximation of α and the threshold
//! rule that caps α.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DetectError, Result};
use crate::model::{signal_statistics, IntensityVector};
use crate::special::normal_sf;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `lower ≤ quantity ≤ upper`. For the χ² sandwiches `center` is the pivot
/// `−½(n ln(n/(eA)) + A)`; for the Gaussian tail it is the geometric mean of
/// the two sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSandwich {
    pub lower: f64,
    pub upper: f64,
    pub center: f64,
}

impl TailSandwich {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Bounds on `Q(z) = P{ξ ≥ z}`:
/// `z e^{−z²/2}/((z²+1)√2π) ≤ Q(z) ≤ e^{−z²/2}/(z√2π)`.
pub fn normal_tail_bounds(z: f64) -> Result<TailSandwich> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(DetectError::invalid(format!("z must be positive and finite, got {z}")));
    }
    let density = INV_SQRT_2PI * (-0.5 * z * z).exp();
    let lower = z * density / (z * z + 1.0);
    let upper = density / z;
    Ok(TailSandwich { lower, upper, center: (lower * upper).sqrt() })
}

/// `−½(n ln(n/(eA)) + A)`, arranged so that `A = n` gives exactly 0.
fn pivot(a: f64, n: f64) -> f64 {
    -0.5 * (n * (n.ln() - a.ln() - 1.0) + a)
}

fn check_chi2_args(a: f64, n: usize) -> Result<()> {
    if n == 0 {
        return Err(DetectError::invalid("degrees of freedom must be at least 1"));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(DetectError::invalid(format!("A must be positive and finite, got {a}")));
    }
    Ok(())
}

/// Sandwich on `ln P{χ²_n < A}` for `0 < A ≤ n`:
/// `[p − ½ ln(πn) − 1/(3n), p]`.
pub fn chi2_lower_tail_sandwich(a: f64, n: usize) -> Result<TailSandwich> {
    check_chi2_args(a, n)?;
    let nf = n as f64;
    if a > nf {
        return Err(DetectError::regime(format!("lower-tail sandwich needs A ≤ n, got A = {a}, n = {n}")));
    }
    let p = pivot(a, nf);
    Ok(TailSandwich { lower: p - 0.5 * (PI * nf).ln() - 1.0 / (3.0 * nf), upper: p, center: p })
}

/// Sandwich on `ln P{χ²_n > A}` for `A ≥ n ≥ 2`:
/// `[p − 1/(3n) − ½ ln(πA²/n), p]`.
pub fn chi2_upper_tail_sandwich(a: f64, n: usize) -> Result<TailSandwich> {
    check_chi2_args(a, n)?;
    let nf = n as f64;
    if n < 2 {
        return Err(DetectError::regime("upper-tail sandwich needs n ≥ 2"));
    }
    if a < nf {
        return Err(DetectError::regime(format!("upper-tail sandwich needs A ≥ n, got A = {a}, n = {n}")));
    }
    let p = pivot(a, nf);
    Ok(TailSandwich { lower: p - 1.0 / (3.0 * nf) - 0.5 * (PI * a * a / nf).ln(), upper: p, center: p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseen {
    /// `x = (D + A − T)/√B`.
    pub x: f64,
    /// `Q(x)`.
    pub approx: f64,
    /// `5/√B`; `|α − approx| ≤ guarantee`.
    pub guarantee: f64,
}

/// Normal approximation of α(A, σ).
pub fn berry_esseen_alpha(sigma: &IntensityVector, level: f64) -> Result<BerryEsseen> {
    let st = signal_statistics(sigma);
    let z = st.d + level - st.t;
    if !(z > 0.0) {
        return Err(DetectError::regime(format!("D + A − T must be positive, got {z}")));
    }
    if st.b <= 0.0 {
        return Err(DetectError::regime("B(sigma) = 0: zero signal"));
    }
    let root_b = st.b.sqrt();
    let x = z / root_b;
    Ok(BerryEsseen { x, approx: normal_sf(x), guarantee: 5.0 / root_b })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop4Threshold {
    pub a_star: f64,
    /// `6/√B`: α(A, σ) ≤ alpha_cap for every A ≥ a_star.
    pub alpha_cap: f64,
}

/// `A* = T − D + √(B(ln B − ln ln B))`, defined for `B ≥ 3`.
pub fn prop4_threshold(sigma: &IntensityVector) -> Result<Prop4Threshold> {
    let st = signal_statistics(sigma);
    if st.b < 3.0 {
        return Err(DetectError::regime(format!("threshold rule needs B ≥ 3, got B = {}", st.b)));
    }
    let ln_b = st.b.ln();
    let a_star = st.t - st.d + (st.b * (ln_b - ln_b.ln())).sqrt();
    Ok(Prop4Threshold { a_star, alpha_cap: 6.0 / st.b.sqrt() })
}
