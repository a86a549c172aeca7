//! Run configuration: JSON text from a file or stdin.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use gausdet_core::{CandidateSet, IntensityVector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REPLACE_RATIO: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Signal statistics D, T, B, δ and the level window.
    Stats,
    /// Upper bound and lower-bound interval on the miss probability.
    #[serde(alias = "bounds")]
    BoundsBeta,
    /// Upper bounds and normal approximation of the false-alarm probability.
    BoundsAlpha,
    /// Miss probability of the σ-test when the true intensity is λ.
    Mismatch,
    /// Set reduction, dominance and partition certificates.
    Reduce,
    /// Monte Carlo error probabilities of an NP, Bayes or GLRT detector.
    Simulate,
    /// Product-floor set reduced to its symmetric point.
    Example1,
    /// Max-coordinate GLRT over the sum-floor set.
    Example3,
    /// Gaussian and chi-square tail sandwiches.
    Tails,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stats => "stats",
            Command::BoundsBeta => "bounds-beta",
            Command::BoundsAlpha => "bounds-alpha",
            Command::Mismatch => "mismatch",
            Command::Reduce => "reduce",
            Command::Simulate => "simulate",
            Command::Example1 => "example1",
            Command::Example3 => "example3",
            Command::Tails => "tails",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// How to pick the level A when it is not given directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelRule {
    /// Midpoint of the window `(T − D, Σσ² − D)`.
    WindowMidpoint,
    /// `A* = T − D + √(B(ln B − ln ln B))`.
    ThresholdRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    #[default]
    Np,
    Bayes,
    Glrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    H0,
    Signal,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidatesConfig {
    FinitePoints(Vec<Vec<f64>>),
    ProductFloor {
        n: usize,
        #[serde(rename = "D")]
        d: f64,
    },
    SumFloor {
        n: usize,
        #[serde(rename = "R")]
        r: f64,
    },
}

impl CandidatesConfig {
    pub fn to_set(&self) -> CliResult<CandidateSet> {
        let set = match self {
            CandidatesConfig::FinitePoints(points) => CandidateSet::FinitePoints(
                points
                    .iter()
                    .enumerate()
                    .map(|(k, p)| intensity(&format!("candidates[{k}]"), p))
                    .collect::<CliResult<_>>()?,
            ),
            CandidatesConfig::ProductFloor { n, d } => CandidateSet::ProductFloor { n: *n, d: *d },
            CandidatesConfig::SumFloor { n, r } => CandidateSet::SumFloor { n: *n, r: *r },
        };
        set.validate()?;
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    /// Largest condition ratio at which replacing σ by λ is flagged acceptable.
    #[serde(default = "default_replace_ratio")]
    pub replace_ratio: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { replace_ratio: DEFAULT_REPLACE_RATIO }
    }
}

fn default_replace_ratio() -> f64 {
    DEFAULT_REPLACE_RATIO
}

fn default_samples() -> u64 {
    DEFAULT_SAMPLES
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_file: Option<PathBuf>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_plus_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_rule: Option<LevelRule>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<CandidatesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Truth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub tolerance: Tolerance,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub format: Option<Format>,
}

/// Reads config text from `path`, or from stdin when `path` is `None` or `-`.
pub fn read_config_text(path: Option<&Path>) -> CliResult<String> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", p.display())))
        }
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::Parse(format!("cannot read stdin: {e}")))?;
            Ok(text)
        }
    }
}

/// Parses config text. Vector files are resolved relative to `base_dir`
/// and inlined, so the returned config is self-contained.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> CliResult<RunConfig> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))?;
    inline_file(&mut cfg.sigma, &mut cfg.sigma_file, "sigma", base_dir)?;
    inline_file(&mut cfg.lambda, &mut cfg.lambda_file, "lambda", base_dir)?;
    Ok(cfg)
}

fn inline_file(
    values: &mut Option<Vec<f64>>,
    file: &mut Option<PathBuf>,
    name: &str,
    base_dir: Option<&Path>,
) -> CliResult<()> {
    let Some(path) = file.take() else {
        return Ok(());
    };
    if values.is_some() {
        return Err(CliError::Invalid(format!("give either {name} or {name}_file, not both")));
    }
    let full = match base_dir {
        Some(dir) if path.is_relative() => dir.join(&path),
        _ => path,
    };
    let text =
        fs::read_to_string(&full).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", full.display())))?;
    *values = Some(parse_vector_text(&text).map_err(|m| CliError::Parse(format!("{}: {m}", full.display())))?);
    Ok(())
}

/// Numbers separated by whitespace or commas; `#` starts a comment.
pub fn parse_vector_text(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v = tok.parse().map_err(|_| format!("line {}: not a number: {tok:?}", line_no + 1))?;
            out.push(v);
        }
    }
    Ok(out)
}

/// Validates `values` as an intensity vector, naming the field in errors.
pub fn intensity(name: &str, values: &[f64]) -> CliResult<IntensityVector> {
    if values.is_empty() {
        return Err(CliError::Invalid(format!("{name} is empty")));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(CliError::Invalid(format!("{name}[{i}] not finite")));
    }
    if let Some(i) = values.iter().position(|v| *v < 0.0) {
        return Err(CliError::Invalid(format!("{name}[{i}] negative")));
    }
    Ok(IntensityVector::new(values.to_vec())?)
}

impl RunConfig {
    /// Applies overrides and the command, then checks that every field
    /// present is one the command reads and that required fields are set.
    pub fn finalize(mut self, command: Command, over: Overrides) -> CliResult<RunConfig> {
        if let Some(c) = self.command {
            if c != command {
                return Err(CliError::Invalid(format!(
                    "config command {:?} does not match subcommand {:?}",
                    c.name(),
                    command.name()
                )));
            }
        }
        self.command = Some(command);
        if let Some(s) = over.seed {
            self.seed = s;
        }
        if let Some(s) = over.samples {
            self.samples = s;
        }
        if let Some(f) = over.format {
            self.format = f;
        }
        self.validate()?;
        Ok(self)
    }

    fn present(&self) -> Vec<&'static str> {
        let flags = [
            ("sigma", self.sigma.is_some()),
            ("lambda", self.lambda.is_some()),
            ("A", self.a.is_some()),
            ("d_plus_a", self.d_plus_a.is_some()),
            ("a_rule", self.a_rule.is_some()),
            ("K", self.blocks.is_some()),
            ("candidates", self.candidates.is_some()),
            ("groups", self.groups.is_some()),
            ("prior", self.prior.is_some()),
            ("detector", self.detector.is_some()),
            ("truth", self.truth.is_some()),
            ("n", self.n.is_some()),
            ("D", self.d.is_some()),
            ("R", self.r.is_some()),
            ("z", self.z.is_some()),
        ];
        flags.iter().filter(|(_, on)| *on).map(|(name, _)| *name).collect()
    }

    pub fn validate(&self) -> CliResult<()> {
        let command = self.command.ok_or_else(|| CliError::Invalid("no command given".into()))?;
        const LEVEL: [&str; 3] = ["A", "d_plus_a", "a_rule"];
        let allowed: Vec<&str> = match command {
            Command::Stats => vec!["sigma"],
            Command::BoundsBeta => [&["sigma", "lambda", "K"][..], &LEVEL].concat(),
            Command::BoundsAlpha => [&["sigma"][..], &LEVEL].concat(),
            Command::Mismatch => [&["sigma", "lambda"][..], &LEVEL].concat(),
            Command::Reduce => vec!["candidates", "sigma", "lambda", "groups"],
            Command::Simulate => {
                [&["detector", "truth", "sigma", "lambda", "prior", "candidates"][..], &LEVEL].concat()
            }
            Command::Example1 => [&["n", "D", "lambda"][..], &LEVEL].concat(),
            Command::Example3 => vec!["n", "R", "lambda"],
            Command::Tails => vec!["z", "n", "A"],
        };
        if let Some(extra) = self.present().into_iter().find(|f| !allowed.contains(f)) {
            return Err(CliError::Invalid(format!("field {extra:?} is not used by {}", command.name())));
        }
        if let Some(s) = &self.sigma {
            intensity("sigma", s)?;
        }
        if let Some(l) = &self.lambda {
            intensity("lambda", l)?;
        }
        if let (Some(s), Some(l)) = (&self.sigma, &self.lambda) {
            if s.len() != l.len() {
                return Err(CliError::Invalid(format!("sigma has {} components, lambda has {}", s.len(), l.len())));
            }
        }
        if let Some(c) = &self.candidates {
            c.to_set()?;
        }
        let levels = LEVEL.iter().filter(|f| self.present().contains(f)).count();
        if levels > 1 {
            return Err(CliError::Invalid("give at most one of A, d_plus_a, a_rule".into()));
        }
        if !(self.tolerance.replace_ratio.is_finite() && self.tolerance.replace_ratio >= 0.0) {
            return Err(CliError::Invalid("tolerance.replace_ratio must be finite and nonnegative".into()));
        }
        let need = |field: &str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Invalid(format!("{} needs field {field:?}", command.name())))
            }
        };
        match command {
            Command::Stats | Command::BoundsAlpha => need("sigma", self.sigma.is_some())?,
            Command::BoundsBeta => need("sigma", self.sigma.is_some())?,
            Command::Mismatch => {
                need("sigma", self.sigma.is_some())?;
                need("lambda", self.lambda.is_some())?;
            }
            Command::Reduce => need(
                "candidates (or sigma and lambda)",
                self.candidates.is_some() || (self.sigma.is_some() && self.lambda.is_some()),
            )?,
            Command::Simulate => match self.detector.unwrap_or_default() {
                DetectorKind::Np => need("sigma", self.sigma.is_some())?,
                DetectorKind::Bayes => need("prior", self.prior.is_some())?,
                DetectorKind::Glrt => need("candidates", self.candidates.is_some())?,
            },
            Command::Example1 => {
                need("n", self.n.is_some())?;
                need("D", self.d.is_some())?;
            }
            Command::Example3 => {
                need("n", self.n.is_some())?;
                need("R", self.r.is_some())?;
            }
            Command::Tails => need("z or n and A", self.z.is_some() || (self.n.is_some() && self.a.is_some()))?,
        }
        if matches!(command, Command::BoundsBeta | Command::BoundsAlpha | Command::Mismatch | Command::Example1)
            && levels == 0
        {
            return Err(CliError::Invalid(format!("{} needs one of A, d_plus_a, a_rule", command.name())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        parse_config(text, None).unwrap()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = cfg(r#"{"command": "stats", "sigma": [1, 1]}"#);
        assert_eq!(c.samples, 100_000);
        assert_eq!(c.seed, 1);
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.tolerance.replace_ratio, 0.05);
        assert!(c.finalize(Command::Stats, Overrides::default()).is_ok());
    }

    #[test]
    fn example3_schema() {
        let c = cfg(r#"{"command": "example3", "n": 10000, "R": 1.0, "samples": 100000, "seed": 7}"#);
        let c = c.finalize(Command::Example3, Overrides::default()).unwrap();
        assert_eq!((c.n, c.r, c.seed), (Some(10_000), Some(1.0), 7));
    }

    #[test]
    fn negative_sigma_rejected() {
        let c = cfg(r#"{"command": "bounds", "sigma": [1, -1], "A": 0.1}"#);
        let err = c.finalize(Command::BoundsBeta, Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("sigma[1] negative"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_field_rejected_with_position() {
        let err = parse_config("{\n  \"sigma\": [1],\n  \"sigmaa\": 2\n}", None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown field `sigmaa`") && msg.contains("line 3"), "{msg}");
        assert!(parse_config(r#"{"tolerance": {"ratio": 1}}"#, None).is_err());
        assert!(parse_config(r#"{"candidates": {"sum_floor": {"n": 2, "R": 1, "x": 0}}}"#, None).is_err());
    }

    #[test]
    fn seed_flag_overrides_config() {
        let c = cfg(r#"{"sigma": [1], "seed": 9}"#);
        let over = Overrides { seed: Some(3), ..Default::default() };
        assert_eq!(c.finalize(Command::Stats, over).unwrap().seed, 3);
    }

    #[test]
    fn command_mismatch_and_unused_fields() {
        assert!(cfg(r#"{"command": "tails", "z": 1}"#).finalize(Command::Stats, Overrides::default()).is_err());
        let err = cfg(r#"{"sigma": [1], "z": 1}"#).finalize(Command::Stats, Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("\"z\""));
        let two_levels = cfg(r#"{"sigma": [1], "A": 1, "a_rule": "threshold-rule"}"#);
        assert!(two_levels.finalize(Command::BoundsAlpha, Overrides::default()).is_err());
    }

    #[test]
    fn vector_text() {
        assert_eq!(parse_vector_text("1, 2\n# c\n3 4.5 # tail\n").unwrap(), vec![1.0, 2.0, 3.0, 4.5]);
        assert!(parse_vector_text("1 x").unwrap_err().contains("line 1"));
    }

    #[test]
    fn sigma_file_is_inlined() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        fs::write(dir.join("s.txt"), "1 2\n").unwrap();
        let c = parse_config(r#"{"sigma_file": "s.txt"}"#, Some(dir)).unwrap();
        assert_eq!((c.sigma, c.sigma_file), (Some(vec![1.0, 2.0]), None));
        assert!(parse_config(r#"{"sigma": [1], "sigma_file": "s.txt"}"#, Some(dir)).is_err());
    }
}
