//! Chernoff-type exponents for the miss and false-alarm probabilities.
//!
//! For the Neyman–Pearson test with threshold `c = D(σ) + A`:
//!
//! ```text
//! β(A, σ) = P(Σ σ_i² ξ_i² < c)       ≤ exp(−g(u)),  2g(u) = Σ ln(1 + uσ_i²) − u c
//! α(A, σ) = P(Σ r_i² ξ_i² > c)       ≤ exp(−f(t)),  2f(t) = t c + Σ ln(1 − t r_i²)
//! β_σ(A, λ) = P(Σ ν_i² ξ_i² < c)     ≤ exp(−g(v, λ))
//! ```
//!
//! with `r_i² = σ_i²/(1+σ_i²)` and `ν_i² = σ_i²(1+λ_i²)/(1+σ_i²)`. Each
//! exponent is concave; its maximizer solves a monotone scalar equation.

mod lower;
pub(crate) mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{DetectError, Result};
use crate::model::{signal_statistics, IntensityVector};
use solver::{decreasing_root, expand_upper};

pub use lower::{beta_lower_bound, bound_transfer, BoundInterval, LowerBound, TransferBound};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    Interior,
    AtZero,
    AtOne,
}

/// Maximizer of a scalar exponent together with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSolution {
    pub argmax: f64,
    /// Exponent at the maximizer (nats).
    pub value: f64,
    /// `|stationarity equation|` at the returned argmax.
    pub stationarity_residual: f64,
    pub iterations: usize,
    pub boundary_case: BoundaryCase,
}

impl ExponentSolution {
    fn boundary(argmax: f64, value: f64, case: BoundaryCase) -> Self {
        Self { argmax, value, stationarity_residual: 0.0, iterations: 0, boundary_case: case }
    }
}

fn check_u(u: f64) -> Result<()> {
    if u >= 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(DetectError::invalid(format!("exponent argument must be a finite nonnegative number, got {u}")))
    }
}

/// `(g, g′)` for the Chernoff exponent of `P(Σ w_i ξ_i² < c)`.
fn lower_tail_exponent(weights: &[f64], c: f64, u: f64) -> (f64, f64) {
    let mut log_sum = 0.0;
    let mut slope = 0.0;
    for &w in weights {
        log_sum += (u * w).ln_1p();
        slope += w / (1.0 + u * w);
    }
    (0.5 * (log_sum - u * c), 0.5 * (slope - c))
}

/// Maximizes `g` over `u ∈ [0, upper]` (`upper = None` means unbounded).
fn maximize_lower_tail(weights: &[f64], c: f64, upper: Option<f64>) -> Result<ExponentSolution> {
    let residual = |u: f64| {
        let mut s = 0.0;
        let mut ds = 0.0;
        for &w in weights {
            let q = 1.0 + u * w;
            s += w / q;
            ds -= w * w / (q * q);
        }
        (s - c, ds)
    };
    let (at_zero, _) = residual(0.0);
    if at_zero <= 0.0 {
        return Ok(ExponentSolution::boundary(0.0, 0.0, BoundaryCase::AtZero));
    }
    let hi = match upper {
        Some(hi) => {
            let (at_hi, _) = residual(hi);
            if at_hi >= 0.0 {
                let (g, _) = lower_tail_exponent(weights, c, hi);
                return Ok(ExponentSolution::boundary(hi, g, BoundaryCase::AtOne));
            }
            hi
        }
        None => {
            if c <= 0.0 {
                return Err(DetectError::regime("D(sigma) + A ≤ 0: the exponent is unbounded"));
            }
            expand_upper(|v| residual(v).0, 1.0)?
        }
    };
    let root = decreasing_root(residual, 0.0, hi)?;
    let (g, _) = lower_tail_exponent(weights, c, root.x);
    Ok(ExponentSolution {
        argmax: root.x,
        value: g,
        stationarity_residual: root.residual,
        iterations: root.iterations,
        boundary_case: BoundaryCase::Interior,
    })
}

/// `(g_σ(u), g′_σ(u))` with `2g = Σ ln(1+uσ_i²) − u[D+A]`.
pub fn g_eval(sigma: &IntensityVector, level: f64, u: f64) -> Result<(f64, f64)> {
    check_u(u)?;
    let weights: Vec<f64> = sigma.squares().collect();
    Ok(lower_tail_exponent(&weights, sigma.log_det() + level, u))
}

/// Maximizer `u₀ ∈ [0, 1]` of `g_σ`, solving `Σ σ_i²/(1+u₀σ_i²) = D(σ) + A`.
///
/// Outside the window `T − D < A < Σσ² − D` the maximizer sits on an
/// endpoint and is reported as `AtZero` (A too large) or `AtOne` (A too
/// small) with the endpoint value.
pub fn solve_u0(sigma: &IntensityVector, level: f64) -> Result<ExponentSolution> {
    let weights: Vec<f64> = sigma.squares().collect();
    maximize_lower_tail(&weights, sigma.log_det() + level, Some(1.0))
}

/// `exp(−g_σ(u₀)) ≥ β(A, σ)`, capped at 1.
pub fn beta_upper_bound(sigma: &IntensityVector, level: f64) -> Result<f64> {
    Ok((-solve_u0(sigma, level)?.value).exp().min(1.0))
}

/// The transformed variances `ν_i²` governing the miss probability of the
/// test built for σ when the true intensity is λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchProfile {
    pub sigma: IntensityVector,
    pub lambda: IntensityVector,
    pub nu_squared: Vec<f64>,
}

pub fn mismatch_profile(sigma: &IntensityVector, lambda: &IntensityVector) -> Result<MismatchProfile> {
    DetectError::check_len(sigma.len(), lambda.len())?;
    let nu_squared = sigma.squares().zip(lambda.squares()).map(|(s2, l2)| s2 * (1.0 + l2) / (1.0 + s2)).collect();
    Ok(MismatchProfile { sigma: sigma.clone(), lambda: lambda.clone(), nu_squared })
}

impl MismatchProfile {
    /// `ν` as an intensity vector.
    pub fn nu(&self) -> IntensityVector {
        IntensityVector::new(self.nu_squared.iter().map(|v| v.sqrt()).collect()).expect("ν² is nonnegative")
    }
}

/// `(g_σ(v, λ), g′_σ(v, λ))` with `2g = Σ ln(1+vν_i²) − v[D(σ)+A]`.
pub fn mismatch_g_eval(sigma: &IntensityVector, lambda: &IntensityVector, level: f64, v: f64) -> Result<(f64, f64)> {
    check_u(v)?;
    let profile = mismatch_profile(sigma, lambda)?;
    Ok(lower_tail_exponent(&profile.nu_squared, sigma.log_det() + level, v))
}

/// Maximizer `v₀ ≥ 0` of `g_σ(·, λ)` and the bound `exp(−g_σ(v₀, λ)) ≥ β_σ(A, λ)`.
pub fn beta_mismatch_upper(
    sigma: &IntensityVector,
    lambda: &IntensityVector,
    level: f64,
) -> Result<(ExponentSolution, f64)> {
    let profile = mismatch_profile(sigma, lambda)?;
    let solution = maximize_lower_tail(&profile.nu_squared, sigma.log_det() + level, None)?;
    Ok((solution, (-solution.value).exp().min(1.0)))
}

/// Both upper bounds on α(A, σ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBounds {
    pub solution: ExponentSolution,
    /// `exp(−f_σ(t₀))`.
    pub chernoff: f64,
    /// `exp(−f_σ(1)) = exp(−A/2)`.
    pub simple: f64,
}

/// `(f_σ(t), f′_σ(t))` with `2f = t[D+A] + Σ ln(1 − t r_i²)`, `t ∈ [0, 1]`.
pub fn f_eval(sigma: &IntensityVector, level: f64, t: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(DetectError::invalid(format!("t must lie in [0, 1], got {t}")));
    }
    let c = sigma.log_det() + level;
    let mut log_sum = 0.0;
    let mut slope = 0.0;
    for r2 in sigma.r_squared() {
        log_sum += (-t * r2).ln_1p();
        slope += r2 / (1.0 - t * r2);
    }
    Ok((0.5 * (t * c + log_sum), 0.5 * (c - slope)))
}

/// Maximizer `t₀ ∈ [0, 1]` of `f_σ`, solving `Σ r_i²/(1 − t₀r_i²) = D + A`,
/// with the Chernoff bound and the simple bound `exp(−A/2)`.
pub fn alpha_upper_bound(sigma: &IntensityVector, level: f64) -> Result<AlphaBounds> {
    let c = sigma.log_det() + level;
    let r2 = sigma.r_squared();
    // h(t) = c − Σ r²/(1 − t r²) is decreasing in t.
    let h = |t: f64| {
        let mut s = 0.0;
        let mut ds = 0.0;
        for &w in &r2 {
            let q = 1.0 - t * w;
            s += w / q;
            ds += w * w / (q * q);
        }
        (c - s, -ds)
    };
    let f = |t: f64| f_eval(sigma, level, t).map(|(v, _)| v);
    let solution = if h(0.0).0 <= 0.0 {
        ExponentSolution::boundary(0.0, 0.0, BoundaryCase::AtZero)
    } else if h(1.0).0 >= 0.0 {
        ExponentSolution::boundary(1.0, f(1.0)?, BoundaryCase::AtOne)
    } else {
        let root = decreasing_root(h, 0.0, 1.0)?;
        ExponentSolution {
            argmax: root.x,
            value: f(root.x)?,
            stationarity_residual: root.residual,
            iterations: root.iterations,
            boundary_case: BoundaryCase::Interior,
        }
    };
    Ok(AlphaBounds { solution, chernoff: (-solution.value).exp().min(1.0), simple: (-0.5 * level).exp().min(1.0) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionMode {
    /// `Σ ln[1 + u₀σ_i²(λ_i²−σ_i²)/((1+σ_i²)(1+u₀σ_i²))]` against `g_σ(u₀)`.
    ExactU0,
    /// The same sum with `u₀ = 1`, against `|g_σ(1)| = |A|/2`.
    U0EqualsOne,
    /// `g_σ(u₀) − max{g_σ(u₀, λ), g_σ(1, λ)}` against `g_σ(u₀)`.
    Asymp1a,
}

/// Smallness measure for replacing σ by λ without changing the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub mode: ConditionMode,
    pub lhs: f64,
    pub g_ref: f64,
    /// `lhs / g_ref`; compare against a caller-chosen tolerance.
    pub ratio: f64,
    /// Set when a log argument is not positive; `lhs` is then NaN.
    pub violated: bool,
}

fn log_bracket_sum(sigma: &IntensityVector, lambda: &IntensityVector, u: f64) -> Option<f64> {
    let mut total = 0.0;
    for (s2, l2) in sigma.squares().zip(lambda.squares()) {
        let arg = 1.0 + u * s2 * (l2 - s2) / ((1.0 + s2) * (1.0 + u * s2));
        if arg <= 0.0 {
            return None;
        }
        total += arg.ln();
    }
    Some(total)
}

pub fn sufficient_condition_check(
    sigma: &IntensityVector,
    lambda: &IntensityVector,
    level: f64,
    mode: ConditionMode,
) -> Result<ConditionCheck> {
    DetectError::check_len(sigma.len(), lambda.len())?;
    let finish = |lhs: Option<f64>, g_ref: f64| ConditionCheck {
        mode,
        lhs: lhs.unwrap_or(f64::NAN),
        g_ref,
        ratio: lhs.map_or(f64::NAN, |l| l / g_ref),
        violated: lhs.is_none(),
    };
    match mode {
        ConditionMode::ExactU0 => {
            let u0 = solve_u0(sigma, level)?;
            if u0.boundary_case != BoundaryCase::Interior {
                return Err(DetectError::regime("level A outside the window T − D < A < Σσ² − D"));
            }
            Ok(finish(log_bracket_sum(sigma, lambda, u0.argmax), u0.value))
        }
        ConditionMode::U0EqualsOne => Ok(finish(log_bracket_sum(sigma, lambda, 1.0), 0.5 * level.abs())),
        ConditionMode::Asymp1a => {
            let u0 = solve_u0(sigma, level)?;
            let (at_u0, _) = mismatch_g_eval(sigma, lambda, level, u0.argmax)?;
            let (at_one, _) = mismatch_g_eval(sigma, lambda, level, 1.0)?;
            Ok(finish(Some(u0.value - at_u0.max(at_one)), u0.value))
        }
    }
}

/// Window statistics helper shared by reports: `(T − D, Σσ² − D)`.
pub fn level_window(sigma: &IntensityVector) -> (f64, f64) {
    signal_statistics(sigma).window
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn iv(v: &[f64]) -> IntensityVector {
        IntensityVector::new(v.to_vec()).unwrap()
    }

    fn unit_pair() -> (IntensityVector, f64) {
        let s = iv(&[1.0, 1.0]);
        let level = 1.5 - s.log_det();
        (s, level)
    }

    #[test]
    fn g_at_endpoints() {
        let s = iv(&[0.3, 1.2, 2.5]);
        let a = 0.4;
        let (g0, dg0) = g_eval(&s, a, 0.0).unwrap();
        assert_eq!(g0, 0.0);
        assert_relative_eq!(2.0 * dg0, s.sum_squares() - s.log_det() - a, max_relative = 1e-14);
        let (g1, _) = g_eval(&s, a, 1.0).unwrap();
        assert_relative_eq!(g1, -a / 2.0, max_relative = 1e-13);
        assert!(g_eval(&s, a, -0.1).is_err());
    }

    #[test]
    fn g_closed_form_equal_sigma() {
        let (s, a) = unit_pair();
        let (g, dg) = g_eval(&s, a, 1.0 / 3.0).unwrap();
        assert_relative_eq!(2.0 * g, 0.075_364_144_903_561_85, max_relative = 1e-13);
        assert!(dg.abs() < 1e-15);
    }

    #[test]
    fn u0_equal_sigma_closed_form() {
        let (s, a) = unit_pair();
        let sol = solve_u0(&s, a).unwrap();
        assert_eq!(sol.boundary_case, BoundaryCase::Interior);
        assert_relative_eq!(sol.argmax, 1.0 / 3.0, epsilon = 1e-12);
        assert!(sol.stationarity_residual <= 1e-10 * 2.5);
        assert_relative_eq!(beta_upper_bound(&s, a).unwrap(), 0.963_019_062_515_806_1, max_relative = 1e-12);
    }

    #[test]
    fn u0_window_edges() {
        let s = iv(&[0.5, 1.0, 2.0]);
        let st = signal_statistics(&s);
        let left = solve_u0(&s, st.t - st.d).unwrap();
        assert_eq!(left.boundary_case, BoundaryCase::AtOne);
        assert_eq!(left.argmax, 1.0);
        let right = solve_u0(&s, st.sum_squares - st.d).unwrap();
        assert_eq!(right.boundary_case, BoundaryCase::AtZero);
        assert_eq!(right.argmax, 0.0);
        // below the window: bound is e^{A/2} with A < 0
        let a = st.t - st.d - 0.3;
        assert_relative_eq!(beta_upper_bound(&s, a).unwrap(), (a / 2.0).exp(), max_relative = 1e-13);
    }

    #[test]
    fn mismatch_profile_examples() {
        let s = iv(&[0.7, 1.3]);
        let p = mismatch_profile(&s, &s).unwrap();
        for (nu2, s2) in p.nu_squared.iter().zip(s.squares()) {
            assert_relative_eq!(*nu2, s2, max_relative = 1e-15);
        }
        let p = mismatch_profile(&iv(&[1.0]), &iv(&[3f64.sqrt()])).unwrap();
        assert_relative_eq!(p.nu_squared[0], 2.0, max_relative = 1e-15);
        let p = mismatch_profile(&iv(&[0.0, 0.0]), &iv(&[5.0, 1.0])).unwrap();
        assert_eq!(p.nu_squared, vec![0.0, 0.0]);
        assert!(mismatch_profile(&iv(&[1.0]), &iv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn mismatch_bound_examples() {
        let (s, a) = unit_pair();
        let lam = iv(&[3f64.sqrt(), 3f64.sqrt()]);
        let (sol, bound) = beta_mismatch_upper(&s, &lam, a).unwrap();
        assert_relative_eq!(sol.argmax, 5.0 / 6.0, epsilon = 1e-12);
        assert_relative_eq!(2.0 * sol.value, 0.711_658_506_023_452_5, max_relative = 1e-12);
        assert_relative_eq!(bound, 0.700_592_234_037_083_4, max_relative = 1e-12);

        let (same, b_same) = beta_mismatch_upper(&s, &s, a).unwrap();
        assert_relative_eq!(b_same, beta_upper_bound(&s, a).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(same.argmax, 1.0 / 3.0, epsilon = 1e-12);

        // Σν² ≤ D + A
        let (sol, bound) = beta_mismatch_upper(&s, &iv(&[0.0, 0.0]), 2.0).unwrap();
        assert_eq!(sol.boundary_case, BoundaryCase::AtZero);
        assert_eq!(bound, 1.0);
    }

    #[test]
    fn alpha_bound_examples() {
        let (s, a) = unit_pair();
        let bounds = alpha_upper_bound(&s, a).unwrap();
        assert_relative_eq!(bounds.solution.argmax, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(2.0 * bounds.solution.value, 0.189_069_783_783_671_24, max_relative = 1e-12);
        assert_relative_eq!(bounds.chernoff, 0.909_795_989_568_950_1, max_relative = 1e-12);
        assert_relative_eq!(bounds.simple, (-a / 2.0).exp().min(1.0));

        let (f1, _) = f_eval(&s, a, 1.0).unwrap();
        assert_relative_eq!(f1, a / 2.0, max_relative = 1e-12);

        let st = signal_statistics(&s);
        let edge = alpha_upper_bound(&s, st.t - st.d).unwrap();
        assert_eq!(edge.solution.argmax, 0.0);
        assert_eq!(edge.chernoff, 1.0);
    }

    #[test]
    fn condition_examples() {
        let (s, a) = unit_pair();
        let lam = iv(&[3f64.sqrt(), 3f64.sqrt()]);
        let exact = sufficient_condition_check(&s, &lam, a, ConditionMode::ExactU0).unwrap();
        assert_relative_eq!(exact.lhs, 0.446_287_102_628_419_5, max_relative = 1e-11);
        let one = sufficient_condition_check(&s, &lam, a, ConditionMode::U0EqualsOne).unwrap();
        assert_relative_eq!(one.lhs, 0.810_930_216_216_328_8, max_relative = 1e-14);
        for mode in [ConditionMode::ExactU0, ConditionMode::U0EqualsOne, ConditionMode::Asymp1a] {
            let c = sufficient_condition_check(&s, &s, a, mode).unwrap();
            assert!(c.lhs.abs() < 1e-14, "{mode:?}: {}", c.lhs);
            assert!(!c.violated);
        }
        // outside the window the exact mode is out of regime
        assert!(matches!(
            sufficient_condition_check(&s, &lam, 5.0, ConditionMode::ExactU0),
            Err(DetectError::OutOfRegime(_))
        ));
    }

    fn sigma_strategy() -> impl Strategy<Value = IntensityVector> {
        proptest::collection::vec(0.05f64..3.0, 1..12).prop_map(|v| IntensityVector::new(v).unwrap())
    }

    /// Level strictly inside the window, at fraction `frac` of its width.
    fn window_level(s: &IntensityVector, frac: f64) -> f64 {
        let (lo, hi) = level_window(s);
        lo + frac * (hi - lo)
    }

    proptest! {
        #[test]
        fn g_is_concave(s in sigma_strategy(), frac in 0.05f64..0.95, u in proptest::collection::vec(0.0f64..1.0, 3)) {
            let a = window_level(&s, frac);
            let mut u = u;
            u.sort_by(f64::total_cmp);
            prop_assume!(u[2] - u[0] > 1e-3 && u[1] - u[0] > 1e-4 && u[2] - u[1] > 1e-4);
            let g = |x| g_eval(&s, a, x).unwrap().0;
            let w = (u[1] - u[0]) / (u[2] - u[0]);
            let chord = (1.0 - w) * g(u[0]) + w * g(u[2]);
            prop_assert!(g(u[1]) >= chord - 1e-12);
        }

        #[test]
        fn u0_is_stationary_and_maximal(s in sigma_strategy(), frac in 0.02f64..0.98, probes in proptest::collection::vec(0.0f64..1.0, 100)) {
            let a = window_level(&s, frac);
            let sol = solve_u0(&s, a).unwrap();
            prop_assert_eq!(sol.boundary_case, BoundaryCase::Interior);
            let c = s.log_det() + a;
            prop_assert!(sol.stationarity_residual <= 1e-10 * (1.0 + c.abs()));
            for u in probes {
                prop_assert!(sol.value >= g_eval(&s, a, u).unwrap().0 - 1e-12);
            }
            let (g0, _) = g_eval(&s, a, 0.0).unwrap();
            let (g1, _) = g_eval(&s, a, 1.0).unwrap();
            prop_assert!(sol.value >= g0.max(g1) - 1e-12);
        }

        #[test]
        fn mismatch_with_same_lambda_matches(s in sigma_strategy(), frac in 0.02f64..0.98) {
            let a = window_level(&s, frac);
            let (_, b) = beta_mismatch_upper(&s, &s, a).unwrap();
            let direct = beta_upper_bound(&s, a).unwrap();
            prop_assert!((b - direct).abs() <= 1e-12 * direct);
        }

        #[test]
        fn condition_lhs_nonnegative_when_lambda_dominates(s in sigma_strategy(), frac in 0.05f64..0.95, bumps in proptest::collection::vec(0.0f64..2.0, 12)) {
            let a = window_level(&s, frac);
            let lam = IntensityVector::new(s.values().iter().zip(&bumps).map(|(v, b)| v + b).collect()).unwrap();
            for mode in [ConditionMode::ExactU0, ConditionMode::U0EqualsOne] {
                let c = sufficient_condition_check(&s, &lam, a, mode).unwrap();
                prop_assert!(c.lhs >= 0.0);
            }
        }

        #[test]
        fn exponent_identities_at_one(s in sigma_strategy(), a in -3.0f64..3.0) {
            prop_assume!(s.log_det() + a > 0.0);
            let (g1, _) = g_eval(&s, a, 1.0).unwrap();
            let (f1, _) = f_eval(&s, a, 1.0).unwrap();
            let scale = a.abs().max(1e-3);
            prop_assert!((g1 + a / 2.0).abs() <= 1e-12 * scale + 1e-13 * s.log_det());
            prop_assert!((f1 - a / 2.0).abs() <= 1e-12 * scale + 1e-13 * s.log_det());
        }
    }
}
