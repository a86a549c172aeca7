//! Scalar root finding for the stationarity equations.
//!
//! Every equation solved here has the form `h(x) = 0` with `h` strictly
//! decreasing on the bracket, so bisection always converges; Newton steps
//! are taken whenever they stay strictly inside the current bracket.

use crate::error::{DetectError, Result};

pub(crate) const ROOT_TOLERANCE: f64 = 1e-12;
pub(crate) const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Root of a strictly decreasing `h` on `[lo, hi]` with `h(lo) ≥ 0 ≥ h(hi)`.
/// `h` returns the value and the derivative.
pub(crate) fn decreasing_root<F>(h: F, mut lo: f64, mut hi: f64) -> Result<Root>
where
    F: Fn(f64) -> (f64, f64),
{
    let (f_lo, _) = h(lo);
    let (f_hi, _) = h(hi);
    if f_lo < 0.0 || f_hi > 0.0 {
        return Err(DetectError::Numerical(format!("root not bracketed: h({lo}) = {f_lo}, h({hi}) = {f_hi}")));
    }
    if f_lo == 0.0 {
        return Ok(Root { x: lo, residual: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, residual: 0.0, iterations: 0 });
    }

    let mut x = 0.5 * (lo + hi);
    for iteration in 1..=MAX_ITERATIONS {
        let (fx, dfx) = h(x);
        if fx == 0.0 {
            return Ok(Root { x, residual: 0.0, iterations: iteration });
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if step <= ROOT_TOLERANCE || hi - lo <= ROOT_TOLERANCE {
            return Ok(polish(&h, x, lo, hi, iteration));
        }
    }
    Err(DetectError::Numerical(format!("root finder exceeded {MAX_ITERATIONS} iterations on [{lo}, {hi}]")))
}

/// A few extra Newton steps once `x` is pinned to the tolerance: where `h`
/// is steep, 1e-12 in `x` can still leave a visible residual.
fn polish<F>(h: &F, mut x: f64, lo: f64, hi: f64, mut iterations: usize) -> Root
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut fx, mut dfx) = h(x);
    for _ in 0..5 {
        if fx == 0.0 || !(dfx < 0.0) {
            break;
        }
        let next = (x - fx / dfx).clamp(lo, hi);
        let (f_next, df_next) = h(next);
        if f_next.abs() >= fx.abs() {
            break;
        }
        x = next;
        fx = f_next;
        dfx = df_next;
        iterations += 1;
    }
    Root { x, residual: fx.abs(), iterations }
}

/// Grows `hi` geometrically from `start` until `h(hi) < 0`.
pub(crate) fn expand_upper<F>(h: F, start: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut hi = start.max(1.0);
    for _ in 0..1100 {
        if h(hi) < 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(DetectError::Numerical("failed to bracket root from above".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_simple_decreasing_function() {
        let r = decreasing_root(|x| (2.0 - x * x, -2.0 * x), 0.0, 2.0).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-14);
        assert!(r.residual < 1e-14);
        assert!(r.iterations < 20);
    }

    #[test]
    fn falls_back_to_bisection_with_bad_derivative() {
        // derivative deliberately wrong sign: only bisection steps are taken
        let r = decreasing_root(|x| (1.0 - x, 1.0), 0.0, 3.0).unwrap();
        assert!((r.x - 1.0).abs() < 1e-11);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(decreasing_root(|x| (1.0 + x, 1.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn expands_bracket() {
        let hi = expand_upper(|v| 1.0 / (1.0 + v) - 0.001, 1.0).unwrap();
        assert!(hi > 999.0);
    }
}
