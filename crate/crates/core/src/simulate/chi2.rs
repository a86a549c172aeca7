//! CDF of a weighted sum of independent χ²₁ variables.
//!
//! Equal weights reduce to the regularized incomplete gamma function. For
//! general weights the CDF is expanded as a mixture of central χ² CDFs
//! (Ruben's series) with scale `β = min w_j`:
//!
//! ```text
//! P(Σ w_j ξ_j² ≤ x) = Σ_k a_k P(m/2 + k, x/(2β))
//! a_0 = Π (β/w_j)^{1/2},   a_k = (1/k) Σ_{r<k} g_{k−r} a_r,   g_k = ½ Σ_j (1 − β/w_j)^k
//! ```
//!
//! All `a_k ≥ 0` and `Σ a_k = 1`; since `P(·, x)` decreases in its first
//! argument, the tail after term K is at most `(1 − Σ_{k≤K} a_k)·P(m/2+K+1, ·)`,
//! which is the stopping rule.

use crate::error::{DetectError, Result};
use crate::special::{gamma_p, ln_gamma_p};

/// Absolute truncation error target.
pub const CDF_TOLERANCE: f64 = 1e-12;
const MAX_SERIES_TERMS: usize = 20_000;
const RESCALE_ABOVE: f64 = 1e200;

pub fn weighted_chi2_cdf(weights: &[f64], x: f64) -> Result<f64> {
    if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(DetectError::invalid(format!("weight[{i}] must be finite and nonnegative")));
    }
    if x.is_nan() {
        return Err(DetectError::invalid("x must be a number"));
    }
    if x < 0.0 {
        return Ok(0.0);
    }
    let w: Vec<f64> = weights.iter().copied().filter(|&v| v > 0.0).collect();
    if w.is_empty() {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let m = w.len() as f64;
    let beta = w.iter().copied().fold(f64::INFINITY, f64::min);
    let w_max = w.iter().copied().fold(0.0, f64::max);
    let z = 0.5 * x / beta;
    if w_max - beta <= 1e-15 * w_max {
        return gamma_p(0.5 * m, z);
    }

    let gammas: Vec<f64> = w.iter().map(|v| 1.0 - beta / v).collect();
    let ln_a0: f64 = w.iter().map(|v| 0.5 * (beta / v).ln()).sum();

    // a_k = scaled[k]·e^{ln_scale}; rescaled whenever the stored values grow large
    let mut ln_scale = ln_a0;
    let mut scaled: Vec<f64> = vec![1.0];
    let mut g: Vec<f64> = vec![0.0];
    let mut powers = gammas.clone();

    let mut cdf = ln_gamma_p(0.5 * m, z)?.exp() * ln_a0.exp();
    let mut mass = ln_a0.exp();
    for k in 1..=MAX_SERIES_TERMS {
        g.push(0.5 * powers.iter().sum::<f64>());
        powers.iter_mut().zip(&gammas).for_each(|(p, gm)| *p *= gm);

        let mut next = 0.0;
        for r in 0..k {
            next += g[k - r] * scaled[r];
        }
        next /= k as f64;
        scaled.push(next);
        if next > RESCALE_ABOVE {
            scaled.iter_mut().for_each(|v| *v /= RESCALE_ABOVE);
            ln_scale += RESCALE_ABOVE.ln();
        }

        let a_k = if next > 0.0 { (scaled[k].ln() + ln_scale).exp() } else { 0.0 };
        let shape = 0.5 * m + k as f64;
        cdf += a_k * ln_gamma_p(shape, z)?.exp();
        mass += a_k;

        // once the leftover mass is at rounding level it cannot shrink further
        let remaining = (1.0 - mass).max(0.0);
        if remaining < 4.0 * f64::EPSILON * k as f64 || remaining * gamma_p(shape + 1.0, z)? < CDF_TOLERANCE {
            return Ok(cdf.clamp(0.0, 1.0));
        }
    }
    Err(DetectError::Numerical(format!(
        "weighted chi-square series did not converge in {MAX_SERIES_TERMS} terms (weight ratio {})",
        w_max / beta
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_two_sided_inner;
    use approx::assert_relative_eq;

    #[test]
    fn single_weight() {
        for (w, x) in [(1.0, 2.0), (0.3, 0.1), (4.0, 30.0)] {
            let expect = normal_two_sided_inner((x / w as f64).sqrt());
            assert_relative_eq!(weighted_chi2_cdf(&[w], x).unwrap(), expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn equal_weights() {
        assert_relative_eq!(
            weighted_chi2_cdf(&[1.0, 1.0], 10.0).unwrap(),
            0.993_262_053_000_914_6,
            max_relative = 1e-14
        );
        let w = vec![1.0; 50];
        let direct = gamma_p(25.0, 15.0).unwrap();
        assert!((weighted_chi2_cdf(&w, 30.0).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn edge_cases() {
        assert_eq!(weighted_chi2_cdf(&[1.0, 2.0], 0.0).unwrap(), 0.0);
        assert_eq!(weighted_chi2_cdf(&[0.0, 0.0], 0.0).unwrap(), 1.0);
        assert_eq!(weighted_chi2_cdf(&[1.0], -1.0).unwrap(), 0.0);
        assert!(weighted_chi2_cdf(&[1.0, -2.0], 1.0).is_err());
        // zero weights drop out
        assert_eq!(weighted_chi2_cdf(&[0.0, 2.0], 3.0).unwrap(), weighted_chi2_cdf(&[2.0], 3.0).unwrap());
    }

    #[test]
    fn two_unequal_weights_by_quadrature() {
        // P(ξ₁² + 2ξ₂² ≤ x) = ∫ 2φ(s) P(ξ₁² ≤ x − 2s²) ds over 0 ≤ s ≤ √(x/2);
        // s = √(x/2)·sin θ makes the integrand smooth.
        let x = 3.0f64;
        let smax = (x / 2.0).sqrt();
        let steps = 20_000;
        let h = std::f64::consts::FRAC_PI_2 / steps as f64;
        let mut total = 0.0;
        for i in 0..steps {
            let theta = (i as f64 + 0.5) * h;
            let s = smax * theta.sin();
            let density = 2.0 * (-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI).sqrt();
            total += density * normal_two_sided_inner(x.sqrt() * theta.cos()) * smax * theta.cos() * h;
        }
        assert!((weighted_chi2_cdf(&[1.0, 2.0], x).unwrap() - total).abs() < 1e-10);
    }

    #[test]
    fn monotone_in_x() {
        let w = [0.2, 0.7, 1.5, 3.0];
        let mut prev = 0.0;
        for i in 1..200 {
            let v = weighted_chi2_cdf(&w, 0.1 * i as f64).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert!(weighted_chi2_cdf(&w, 500.0).unwrap() > 1.0 - 1e-11);
    }

    #[test]
    fn many_spread_weights_do_not_underflow() {
        let w: Vec<f64> = (0..200).map(|i| 0.1 + 0.02 * i as f64).collect();
        let total: f64 = w.iter().sum();
        let v = weighted_chi2_cdf(&w, total).unwrap();
        assert!(v > 0.3 && v < 0.8, "{v}");
    }
}
