//! Dispatch from a validated config to the library, collecting labelled outputs.

use std::time::Instant;

use gausdet_core::exponents::{
    alpha_upper_bound, beta_lower_bound, beta_mismatch_upper, beta_upper_bound, bound_transfer, mismatch_profile,
    solve_u0, sufficient_condition_check, ConditionMode,
};
use gausdet_core::model::{signal_statistics, BayesTest};
use gausdet_core::reduction::{
    canonical_reduction, dominance_check, find_lemma2_certificate, lemma2_certificate, reduce_to_minimal,
    PartitionCertificate, MAX_ENUMERATION_DIM,
};
use gausdet_core::simulate::{
    estimate_error_probs, example3_experiment, weighted_chi2_cdf, Detector, MonteCarloEstimate, TrueState,
};
use gausdet_core::special::{ln_gamma_p, ln_gamma_q, normal_sf};
use gausdet_core::tails::{
    berry_esseen_alpha, chi2_lower_tail_sandwich, chi2_upper_tail_sandwich, normal_tail_bounds, prop4_threshold,
};
use gausdet_core::{CandidateSet, DetectError, DiscretePrior, Glrt, IntensityVector, NpTest};
use serde::Serialize;
use serde_json::Value;

use crate::config::{intensity, Command, DetectorKind, LevelRule, RunConfig, Truth};
use crate::error::{CliError, CliResult};
use crate::report::{Output, Report};

/// Accumulates outputs. Optional parts of a command run as sections: a
/// section whose formula does not apply is skipped with a note.
#[derive(Default)]
struct Builder {
    outputs: Vec<Output>,
    notes: Vec<String>,
    sections: usize,
    skipped: usize,
}

impl Builder {
    fn put(&mut self, quantity: &str, value: impl Serialize, formula: &str) {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.outputs.push(Output { quantity: quantity.into(), value, formula: formula.into() });
    }

    fn estimate(&mut self, prefix: &str, est: &MonteCarloEstimate, formula: &str) {
        self.put(prefix, est.p_hat, formula);
        self.put(&format!("{prefix}_stderr"), est.stderr, "√(p̂(1 − p̂)/samples)");
    }

    fn section<T>(&mut self, name: &str, r: gausdet_core::Result<T>) -> CliResult<Option<T>> {
        self.sections += 1;
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e @ (DetectError::OutOfRegime(_) | DetectError::NotApplicable(_))) => {
                self.skipped += 1;
                self.notes.push(format!("{name} skipped: {e}"));
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Fails as out-of-regime when every section was skipped.
    fn finish(self) -> CliResult<(Vec<Output>, Vec<String>)> {
        if self.sections > 0 && self.skipped == self.sections {
            return Err(CliError::OutOfRegime(self.notes.join("; ")));
        }
        Ok((self.outputs, self.notes))
    }
}

/// Runs `cfg`, which must have passed `RunConfig::finalize`.
pub fn run_command(cfg: &RunConfig) -> CliResult<Report> {
    let start = Instant::now();
    cfg.validate()?;
    let command = cfg.command.expect("validated config has a command");
    let mut b = Builder::default();
    match command {
        Command::Stats => stats(cfg, &mut b)?,
        Command::BoundsBeta => bounds_beta(cfg, &mut b)?,
        Command::BoundsAlpha => bounds_alpha(cfg, &mut b)?,
        Command::Mismatch => mismatch(cfg, &mut b)?,
        Command::Reduce => reduce(cfg, &mut b)?,
        Command::Simulate => simulate(cfg, &mut b)?,
        Command::Example1 => example1(cfg, &mut b)?,
        Command::Example3 => example3(cfg, &mut b)?,
        Command::Tails => tails(cfg, &mut b)?,
    }
    let (outputs, notes) = b.finish()?;
    Ok(Report { command, inputs: cfg.clone(), outputs, notes, wall_time_s: start.elapsed().as_secs_f64() })
}

fn sigma(cfg: &RunConfig) -> CliResult<IntensityVector> {
    intensity("sigma", cfg.sigma.as_deref().ok_or_else(|| CliError::Invalid("sigma is required".into()))?)
}

fn lambda(cfg: &RunConfig) -> CliResult<Option<IntensityVector>> {
    cfg.lambda.as_deref().map(|l| intensity("lambda", l)).transpose()
}

/// The level A from whichever of `A`, `d_plus_a`, `a_rule` is set.
fn level(cfg: &RunConfig, sigma: &IntensityVector) -> CliResult<f64> {
    if let Some(a) = cfg.a {
        return Ok(a);
    }
    if let Some(c) = cfg.d_plus_a {
        return Ok(c - sigma.log_det());
    }
    match cfg.a_rule {
        Some(LevelRule::WindowMidpoint) => {
            let (lo, hi) = signal_statistics(sigma).window;
            Ok(0.5 * (lo + hi))
        }
        Some(LevelRule::ThresholdRule) => Ok(prop4_threshold(sigma)?.a_star),
        None => Err(CliError::Invalid("one of A, d_plus_a, a_rule is required".into())),
    }
}

fn put_level(b: &mut Builder, sigma: &IntensityVector, a: f64) {
    b.put("A", a, "test level: H0 iff Σ σ_i²y_i²/(1 + σ_i²) ≤ D(σ) + A");
    b.put("D_plus_A", sigma.log_det() + a, "D(σ) + A, D(σ) = Σ ln(1 + σ_i²)");
}

fn stats(cfg: &RunConfig, b: &mut Builder) -> CliResult<()> {
    let s = sigma(cfg)?;
    let st = signal_statistics(&s);
    b.put("n", s.len(), "dimension");
    b.put("D", st.d, "Σ ln(1 + σ_i²)");
    b.put("T", st.t, "Σ σ_i²/(1 + σ_i²)");
    b.put("B", st.b, "2 Σ σ_i⁴/(1 + σ_i²)²");
    b.put("sum_sigma_sq", st.sum_squares, "Σ σ_i²");
    b.put("delta", st.delta, "ln(max σ_i² / min σ_i²), null if some σ_i = 0");
    b.put("window_lower", st.window.0, "T − D");
    b.put("window_upper", st.window.1, "Σ σ_i² − D");
    Ok(())
}

fn bounds_beta(cfg: &RunConfig, b: &mut Builder) -> CliResult<()> {
    let s = sigma(cfg)?;
    let a = level(cfg, &s)?;
    let c = s.log_det() + a;
    put_level(b, &s, a);
    let u0 = solve_u0(&s, a)?;
    b.put("u0", u0.argmax, "maximizer on [0, 1] of 2g(u) = Σ ln(1 + uσ_i²) − u(D + A)");
    b.put("u0_boundary", u0.boundary_case, "interior, at_zero or at_one");
    b.put("u0_residual", u0.stationarity_residual, "Σ σ_i²/(1 + u₀σ_i²) − (D + A)");
    b.put("g_u0", u0.value, "g(u₀)");
    let upper = beta_upper_bound(&s, a)?;
    b.put("beta_upper", upper, "min(1, e^{−g(u₀)})");
    b.put("ln_beta_upper", upper.ln(), "ln of beta_upper");
    let exact = weighted_chi2_cdf(&s.squares().collect::<Vec<_>>(), c)?;
    b.put("beta_exact", exact, "P(Σ σ_i² ξ_i² ≤ D + A), chi-square mixture series");
    b.put("ln_beta_exact", exact.ln(), "ln of beta_exact");
    if let Some(lb) = b.section("lower bound", beta_lower_bound(&s, a, cfg.blocks))? {
        b.put("ln_beta_interval_lower", lb.interval.lower, &lb.interval.lower_provenance);
        b.put("ln_beta_interval_upper", lb.interval.upper, &lb.interval.upper_provenance);
        b.put(
            "ln_beta_exact_in_interval",
            lb.interval.contains(exact.ln()),
            "interval lower ≤ ln beta_exact ≤ interval upper",
        );
        b.put("K", lb.blocks, "number of contiguous blocks of σ sorted descending");
        b.put("block_sizes", &lb.block_sizes, "m_k");
        b.put("block_heads", &lb.block_heads, "b_k = largest σ_i² in block k");
        b.put("u1", lb.u1, "root of Σ m_k b_k/(1 + u b_k) = D + A");
        b.put("ln_beta_constructive", lb.constructive, "Σ_k lower side of the chi-square lower-tail sandwich");
        b.put("ln_beta_constructive_exact", lb.constructive_exact, "Σ_k ln P(m_k/2, x_k/2), x_k = m_k/(1 + u₁b_k)");
    }
    if let Some(l) = lambda(cfg)? {
        if let Some(t) = b.section("bound transfer", bound_transfer(&s, &l, a))? {
            b.put("transfer_raw", t.raw, "−g_σ(u₀) + ln(2π), valid for β(A, λ) when g_σ(u₀) ≤ g_λ(u₀)");
            b.put("transfer_clipped", t.clipped, "min(transfer_raw, 0)");
            b.put("transfer_g_sigma", t.g_sigma, "g_σ(u₀)");
            b.put("transfer_g_lambda", t.g_lambda, "g_λ(u₀) with D(λ)");
        }
    }
    Ok(())
}

fn bounds_alpha(cfg: &RunConfig, b: &mut Builder) -> CliResult<()> {
    let s = sigma(cfg)?;
    let a = level(cfg, &s)?;
    put_level(b, &s, a);
    let ab = alpha_upper_bound(&s, a)?;
    b.put(
        "t0",
        ab.solution.argmax,
        "maximizer on [0, 1] of 2f(t) = t(D + A) + Σ ln(1 − t r_i²), r_i² = σ_i²/(1 + σ_i²)",
    );
    b.put("t0_boundary", ab.solution.boundary_case, "interior, at_zero or at_one");
    b.put("t0_residual", ab.solution.stationarity_residual, "Σ r_i²/(1 − t₀r_i²) − (D + A)");
    b.put("f_t0", ab.solution.value, "f(t₀)");
    b.put("alpha_chernoff", ab.chernoff, "min(1, e^{−f(t₀)})");
    b.put("alpha_simple", ab.simple, "min(1, e^{−A/2})");
    let r2 = s.r_squared();
    let alpha = 1.0 - weighted_chi2_cdf(&r2, s.log_det() + a)?;
    b.put("alpha_exact", alpha, "P(Σ r_i² ξ_i² > D + A), chi-square mixture series");
    if let Some(be) = b.section("normal approximation", berry_esseen_alpha(&s, a))? {
        b.put("be_x", be.x, "(D + A − T)/√B");
        b.put("alpha_normal_approx", be.approx, "Q(x), standard normal upper tail");
        b.put("alpha_normal_error_bound", be.guarantee, "5/√B ≥ |α − Q(x)|");
    }
    if let Some(p) = b.section("threshold rule", prop4_threshold(&s))? {
        b.put("A_star", p.a_star, "T − D + √(B(ln B − ln ln B))");
        b.put("alpha_cap", p.alpha_cap, "6/√B ≥ α for every A ≥ A_star");
        b.put("level_at_least_A_star", a >= p.a_star, "A ≥ A_star");
    }
    Ok(())
}

fn mismatch(cfg: &RunConfig, b: &mut Builder) -> CliResult<()> {
    let s = sigma(cfg)?;
    let l = lambda(cfg)?.expect("validated: lambda present");
    let a = level(cfg, &s)?;
    put_level(b, &s, a);
    let profile = mismatch_profile(&s, &l)?;
    b.put("nu_squared", &profile.nu_squared, "ν_i² = σ_i²(1 + λ_i²)/(1 + σ_i²)");
    let exact = weighted_chi2_cdf(&profile.nu_squared, s.log_det() + a)?;
    b.put("beta_mismatch_exact", exact, "P(Σ ν_i² ξ_i² ≤ D(σ) + A), chi-square mixture series");
    if let Some((sol, bound)) = b.section("mismatch bound", beta_mismatch_upper(&s, &l, a))? {
        b.put("v0", sol.argmax, "maximizer of 2g(v, λ) = Σ ln(1 + vν_i²) − v(D(σ) + A)");
        b.put("v0_boundary", sol.boundary_case, "interior, at_zero or at_one");
        b.put("g_v0", sol.value, "g(v₀, λ)");
        b.put("beta_mismatch_upper", bound, "min(1, e^{−g(v₀, λ)})");
    }
    let modes = [
        (ConditionMode::ExactU0, "exact_u0", "Σ ln[1 + u₀σ_i²(λ_i² − σ_i²)/((1 + σ_i²)(1 + u₀σ_i²))]", "g_σ(u₀)"),
        (ConditionMode::U0EqualsOne, "u0_equals_1", "Σ ln[1 + σ_i²(λ_i² − σ_i²)/(1 + σ_i²)²]", "|A|/2"),
        (ConditionMode::Asymp1a, "exponent_gap", "g_σ(u₀) − max(g_σ(u₀, λ), g_σ(1, λ))", "g_σ(u₀)"),
    ];
    let tol = cfg.tolerance.replace_ratio;
    for (mode, tag, lhs, reference) in modes {
        if let Some(ck) = b.section(&format!("condition {tag}"), sufficient_condition_check(&s, &l, a, mode))? {
            b.put(&format!("cond_{tag}_lhs"), ck.lhs, lhs);
            b.put(&format!("cond_{tag}_g_ref"), ck.g_ref, reference);
            b.put(&format!("cond_{tag}_ratio"), ck.ratio, "lhs / g_ref");
            b.put(&format!("cond_{tag}_violated"), ck.violated, "a log argument is not positive");
            b.put(
                &format!("cond_{tag}_replaceable"),
                !ck.violated && ck.ratio.abs() <= tol,
                "|ratio| ≤ tolerance.replace_ratio",
            );
        }
    }
    Ok(())
}

fn put_certificate(b: &mut Builder, cert: &PartitionCertificate) {
    b.put("certificate_groups", &cert.groups, "partition I_1, …, I_k of the coordinates");
    b.put("certificate_geo_means", &cert.geo_means, "(Π_{i∈I_j} λ_i)^{1/|I_j|}");
    b.put("certificate_valid", cert.valid, "σ_i ≤ geometric mean of λ over the group of i, for every i");
}

fn reduce(cfg: &RunConfig, b: &mut Builder) -> CliResult<()> {
    if let Some(cc) = &cfg.candidates {
        let set = cc.to_set()?;
        if let CandidateSet::FinitePoints(_) = set {
            let red = reduce_to_minimal(&set)?;
            b.put("kept", &red.kept, "indices of componentwise-minimal candidates");
            b.put("removed_count", red.removed_count, "candidates dominated by a kept one");
            b.put("witness_map", &red.witness_map, "(removed, kept) pairs with kept ≤ removed componentwise");
        }
        let canon = canonical_reduction(&set)?;
        let points = match &canon.points {
            CandidateSet::FinitePoints(p) => p.clone(),
            other => other.witness_points()?,
        };
        b.put("reduced_points", &points, "candidate set after reduction");
        b.put("equality_notion", canon.notion, "exact: same minimax β; asymptotic: same ln β to first order");
    }
    if let (Some(s), Some(l)) = (cfg.sigma.as_ref(), cfg.lambda.as_ref()) {
        let (s, l) = (intensity("sigma", s)?, intensity("lambda", l)?);
        b.put("dominance", dominance_check(&s, &l)?, "dominates iff σ_i ≤ λ_i for all i");
        if let Some(groups) = &cfg.groups {
            put_certificate(b, &lemma2_certificate(&s, &l, groups)?);
        } else if s.len() <= MAX_ENUMERATION_DIM {
            let found = find_lemma2_certificate(&s, &l)?;
            b.put("certificate_found", found.is_some(), "some partition gives a valid certificate");
            if let Some(cert) = found {
                put_certificate(b, &cert);
            }
        } else {
            b.notes.push(format!(
                "certificate search skipped: n = {} exceeds {MAX_ENUMERATION_DIM}; give groups explicitly",
                s.len()
            ));
        }
    }
    Ok(())
}

fn only_direct_level(cfg: &RunConfig, what: &str) -> CliResult<f64> {
    if cfg.d_plus_a.is_some() || cfg.a_rule.is_some() {
        return Err(CliError::Invalid(format!("{what} takes the level as A only")));
    }
    cfg.a.ok_or_else(|| CliError::Invalid(format!("{what} needs A")))
}

fn simulate(cfg: &RunConfig, b: &mut Builder) -> CliResult<()> {
    let kind = cfg.detector.unwrap_or_default();
    let lam = lambda(cfg)?;
    let (detector, np_sigma, a) = match kind {
        DetectorKind::Np => {
            let s = sigma(cfg)?;
            let a = level(cfg, &s)?;
            (Detector::Np(NpTest::new(s.clone(), a)?), Some(s), a)
        }
        DetectorKind::Bayes => {
            let prior = cfg.prior.as_ref().expect("validated: prior present");
            let points = prior
                .points
                .iter()
                .enumerate()
                .map(|(k, p)| intensity(&format!("prior.points[{k}]"), p))
                .collect::<CliResult<Vec<_>>>()?;
            let a = only_direct_level(cfg, "bayes detector")?;
            (Detector::Bayes(BayesTest::new(DiscretePrior::new(points, prior.weights.clone())?, a)?), None, a)
        }
        DetectorKind::Glrt => {
            let set = cfg.candidates.as_ref().expect("validated: candidates present").to_set()?;
            let points = match canonical_reduction(&set)?.points {
                CandidateSet::FinitePoints(p) => p,
                other => other.witness_points()?,
            };
            let a = only_direct_level(cfg, "glrt detector")?;
            (Detector::Glrt(Glrt::with_common_level(points, a)?), None, a)
        }
    };
    b.put("detector", kind, "np, bayes or glrt");
    b.put("A", a, "test level");
    let truth = cfg.truth.unwrap_or_default();
    if matches!(truth, Truth::H0 | Truth::Both) {
        let est = estimate_error_probs(&detector, &TrueState::H0, cfg.samples, cfg.seed)?;
        b.estimate("alpha_hat", &est, "fraction of H0 draws rejected");
        if let Some(s) = &np_sigma {
            let alpha = 1.0 - weighted_chi2_cdf(&s.r_squared(), s.log_det() + a)?;
            b.put("alpha_exact", alpha, "P(Σ r_i² ξ_i² > D + A), chi-square mixture series");
        }
    }
    if matches!(truth, Truth::Signal | Truth::Both) {
        let intensity = match (&lam, &np_sigma) {
            (Some(l), _) => l.clone(),
            (None, Some(s)) => s.clone(),
            (None, None) => return Err(CliError::Invalid("a signal truth needs lambda for this detector".into())),
        };
        if intensity.len() != detector.dim() {
            return Err(CliError::Invalid(format!(
                "lambda has {} components, the detector has {}",
                intensity.len(),
                detector.dim()
            )));
        }
        let est = estimate_error_probs(
            &detector,
            &TrueState::Signal(intensity.clone()),
            cfg.samples,
            cfg.seed.wrapping_add(1),
        )?;
        b.estimate("beta_hat", &est, "fraction of signal draws accepted as H0, signal intensity lambda or sigma");
        if let Some(s) = &np_sigma {
            let w: Vec<f64> = s.r_squared().iter().zip(intensity.squares()).map(|(r2, l2)| r2 * (1.0 + l2)).collect();
            b.put(
                "beta_exact",
                weighted_chi2_cdf(&w, s.log_det() + a)?,
                "P(Σ r_i²(1 + λ_i²) ξ_i² ≤ D + A), chi-square mixture series",
            );
        }
    }
    b.put("samples", cfg.samples, "Monte Carlo draws per estimate");
    b.put("seed", cfg.seed, "seed of the H0 run; the signal run uses seed + 1");
    Ok(())
}

fn example1(cfg: &RunConfig, b: &mut Builder) -> CliResult<()> {
    let (n, d) = (cfg.n.expect("validated: n"), cfg.d.expect("validated: D"));
    let canon = canonical_reduction(&CandidateSet::ProductFloor { n, d })?;
    let sigma0 = IntensityVector::constant(n, d)?;
    b.put("sigma0", sigma0.values(), "(D, …, D)");
    b.put("equality_notion", canon.notion, "exact: same minimax β");
    let a = level(cfg, &sigma0)?;
    put_level(b, &sigma0, a);
    let c = sigma0.log_det() + a;
    let at_sigma0 = weighted_chi2_cdf(&vec![d * d; n], c)?;
    b.put("beta_exact_at_sigma0", at_sigma0, "P(D² Σ ξ_i² ≤ D(σ₀) + A)");
    let det = Detector::Np(NpTest::new(sigma0.clone(), a)?);
    let est = estimate_error_probs(&det, &TrueState::Signal(sigma0.clone()), cfg.samples, cfg.seed)?;
    b.estimate("beta_hat_at_sigma0", &est, "fraction of draws at σ₀ accepted as H0");
    if let Some(l) = lambda(cfg)? {
        if l.len() != n {
            return Err(CliError::Invalid(format!("lambda has {} components, n = {n}", l.len())));
        }
        let margin = l.log_det() - n as f64 * (d * d).ln_1p();
        if margin < -1e-12 * l.log_det().abs().max(1.0) {
            return Err(CliError::Invalid(format!(
                "lambda is outside the set: Σ ln(1 + λ_i²) − n ln(1 + D²) = {margin}"
            )));
        }
        b.put("log_product_margin", margin, "Σ ln(1 + λ_i²) − n ln(1 + D²) ≥ 0");
        let profile = mismatch_profile(&sigma0, &l)?;
        let cert = lemma2_certificate(&sigma0, &profile.nu(), &[(0..n).collect()])?;
        b.put("nu_geo_mean", cert.geo_means[0], "(Π ν_i)^{1/n}, ν_i² = D²(1 + λ_i²)/(1 + D²)");
        b.put("certificate_valid", cert.valid, "D ≤ (Π ν_i)^{1/n}");
        let at_lambda = weighted_chi2_cdf(&profile.nu_squared, c)?;
        b.put("beta_exact_at_lambda", at_lambda, "P(Σ ν_i² ξ_i² ≤ D(σ₀) + A)");
        b.put("lambda_no_worse", at_lambda <= at_sigma0, "beta_exact_at_lambda ≤ beta_exact_at_sigma0");
        let est = estimate_error_probs(&det, &TrueState::Signal(l), cfg.samples, cfg.seed.wrapping_add(1))?;
        b.estimate("beta_hat_at_lambda", &est, "fraction of draws at λ accepted as H0 by the σ₀-test");
    }
    Ok(())
}

fn example3(cfg: &RunConfig, b: &mut Builder) -> CliResult<()> {
    let (n, r) = (cfg.n.expect("validated: n"), cfg.r.expect("validated: R"));
    let l = lambda(cfg)?;
    let rep = example3_experiment(n, r, cfg.samples, cfg.seed, l.as_ref())?;
    b.put("A", rep.a, "2 ln n − ln(1 + nR²)");
    b.put("z_squared", rep.z_squared, "(1 + nR²)·2 ln n/(nR²), per-coordinate threshold on y_i²");
    b.estimate("alpha_hat", &rep.alpha_hat, "fraction of H0 draws with max y_i² > z²");
    b.put("alpha_exact", rep.alpha_exact, "1 − P(|ξ| ≤ z)ⁿ");
    b.put("alpha_bound", rep.alpha_bound, "1/√(2 ln n)");
    b.put("alpha_within_bound", rep.alpha_hat.p_hat <= rep.alpha_bound, "alpha_hat ≤ alpha_bound");
    b.estimate(
        "beta_hat_at_sigma1",
        &rep.beta_hat_at_sigma1,
        "fraction of draws at σ₁ = (R√n, 0, …, 0) accepted as H0",
    );
    b.put("beta_exact_at_sigma1", rep.beta_exact_at_sigma1, "P(η² ≤ 2 ln n/(nR²))·P(|ξ| ≤ z)^{n−1}");
    b.put("beta_bound", rep.beta_bound, "√(2 ln n)/(R√n)");
    b.put("beta_within_bound", rep.beta_hat_at_sigma1.p_hat <= rep.beta_bound, "beta_hat_at_sigma1 ≤ beta_bound");
    if let Some(p) = rep.lambda {
        b.estimate("beta_hat_at_lambda", &p.beta_hat, "fraction of draws at λ accepted as H0");
        b.put("beta_exact_at_lambda", p.beta_exact, "Π_i P(|ξ| ≤ z/√(1 + λ_i²))");
        b.put("log_ratio_exact", p.log_ratio_exact, "ln β(λ)/ln β(σ₁), exact; diagnostic");
        b.put("log_ratio_mc", p.log_ratio_mc, "ln β̂(λ)/ln β̂(σ₁); diagnostic");
    }
    Ok(())
}

fn tails(cfg: &RunConfig, b: &mut Builder) -> CliResult<()> {
    if let Some(z) = cfg.z {
        let t = normal_tail_bounds(z)?;
        b.put("Q_lower", t.lower, "z e^{−z²/2}/((z² + 1)√(2π))");
        b.put("Q_upper", t.upper, "e^{−z²/2}/(z√(2π))");
        b.put("Q_exact", normal_sf(z), "P(ξ ≥ z)");
    }
    if let (Some(n), Some(a)) = (cfg.n, cfg.a) {
        let half_n = 0.5 * n as f64;
        if let Some(t) = b.section("chi-square lower tail", chi2_lower_tail_sandwich(a, n))? {
            b.put("ln_chi2_below_lower", t.lower, "p − ½ ln(πn) − 1/(3n), p = −½(n ln(n/(eA)) + A)");
            b.put("ln_chi2_below_upper", t.upper, "p = −½(n ln(n/(eA)) + A)");
            b.put("ln_chi2_below_exact", ln_gamma_p(half_n, 0.5 * a)?, "ln P(χ²_n < A)");
        }
        if let Some(t) = b.section("chi-square upper tail", chi2_upper_tail_sandwich(a, n))? {
            b.put("ln_chi2_above_lower", t.lower, "p − 1/(3n) − ½ ln(πA²/n)");
            b.put("ln_chi2_above_upper", t.upper, "p = −½(n ln(n/(eA)) + A)");
            b.put("ln_chi2_above_exact", ln_gamma_q(half_n, 0.5 * a)?, "ln P(χ²_n > A)");
        }
    }
    Ok(())
}
