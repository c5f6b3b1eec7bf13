//! Command-line options, the JSON config file, and their merge.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pulsechain::noise::{SamplingMode, Target};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "pulsechain",
    version,
    about = "Pulsed state transfer through noisy diamond chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Averaged fidelity against chain length for several noise strengths.
    SweepLength(Options),
    /// Averaged fidelity against error probability for correlated noise.
    SweepCorrelation(Options),
    /// Run the oracle cross-checks and report deviations.
    Validate(Options),
    /// Final amplitudes of one noise realization.
    Propagate(Options),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SweepLength(_) => "sweep-length",
            Command::SweepCorrelation(_) => "sweep-correlation",
            Command::Validate(_) => "validate",
            Command::Propagate(_) => "propagate",
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Command::SweepLength(o)
            | Command::SweepCorrelation(o)
            | Command::Validate(o)
            | Command::Propagate(o) => o,
        }
    }
}

fn parse_mode(s: &str) -> std::result::Result<SamplingMode, String> {
    match s {
        "tau-exact" => Ok(SamplingMode::TauExact),
        "delta-independent" => Ok(SamplingMode::DeltaIndependent),
        _ => Err(format!(
            "unknown mode '{s}' (expected tau-exact or delta-independent)"
        )),
    }
}

fn parse_target(s: &str) -> std::result::Result<Target, String> {
    match s {
        "pulses" => Ok(Target::Pulses),
        "times" => Ok(Target::Times),
        _ => Err(format!("unknown target '{s}' (expected pulses or times)")),
    }
}

/// Flags shared by all subcommands. Lists are comma separated.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Number of three-site sub-chains (first K of a length sweep).
    #[arg(long)]
    pub k: Option<usize>,
    /// Last K of a length sweep.
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Noise strengths.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps: Option<Vec<f64>>,
    /// Pulse-angle noise half-width.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_theta: Option<f64>,
    /// Timing noise half-width.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_tau: Option<f64>,
    /// Error probabilities of the three-value model.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    /// One-step correlations of the three-value model.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Timing sampling mode: tau-exact or delta-independent.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<SamplingMode>,
    /// Noisy process of the three-value model: pulses or times.
    #[arg(long, value_parser = parse_target)]
    pub target: Option<Target>,
    /// Add Monte Carlo columns.
    #[arg(long, overrides_with = "no_mc")]
    pub mc: bool,
    /// Analytic columns only.
    #[arg(long, overrides_with = "mc")]
    pub no_mc: bool,
    /// Output file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags take precedence over its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Emit the printed forms of the closed formulas alongside.
    #[arg(long)]
    pub paper_verbatim: bool,
    /// Explicit pulse angles for `propagate`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Explicit timing offsets for `propagate`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tau: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl From<OneOrMany> for Vec<f64> {
    fn from(v: OneOrMany) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

/// Flat JSON config: the flag names with dashes replaced by underscores.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub eps: Option<OneOrMany>,
    pub eps_theta: Option<f64>,
    pub eps_tau: Option<f64>,
    pub p: Option<OneOrMany>,
    pub q: Option<OneOrMany>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub mode: Option<SamplingMode>,
    pub target: Option<Target>,
    pub mc: Option<bool>,
    pub out: Option<PathBuf>,
    pub paper_verbatim: Option<bool>,
    pub theta: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Options after layering flags over the config file. Unset fields fall back
/// to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub eps_theta: Option<f64>,
    pub eps_tau: Option<f64>,
    pub p: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub mode: Option<SamplingMode>,
    pub target: Option<Target>,
    pub mc: Option<bool>,
    pub out: Option<PathBuf>,
    pub paper_verbatim: Option<bool>,
    pub theta: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
}

impl Settings {
    pub fn merge(file: FileConfig, flags: &Options) -> Self {
        let mc = match (flags.mc, flags.no_mc) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => file.mc,
        };
        Settings {
            k: flags.k.or(file.k),
            k_max: flags.k_max.or(file.k_max),
            eps: flags.eps.clone().or(file.eps.map(Into::into)),
            eps_theta: flags.eps_theta.or(file.eps_theta),
            eps_tau: flags.eps_tau.or(file.eps_tau),
            p: flags.p.clone().or(file.p.map(Into::into)),
            q: flags.q.clone().or(file.q.map(Into::into)),
            samples: flags.samples.or(file.samples),
            seed: flags.seed.or(file.seed),
            mode: flags.mode.or(file.mode),
            target: flags.target.or(file.target),
            mc,
            out: flags.out.clone().or(file.out),
            paper_verbatim: if flags.paper_verbatim {
                Some(true)
            } else {
                file.paper_verbatim
            },
            theta: flags.theta.clone().or(file.theta),
            tau: flags.tau.clone().or(file.tau),
        }
    }

    /// Reads `--config` if given and layers the flags on top.
    pub fn from_options(flags: &Options) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Ok(Self::merge(file, flags))
    }
}

pub const DEFAULT_SAMPLES: u64 = 10_000;
pub const DEFAULT_VALIDATE_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

pub(crate) fn check(name: &str, value: f64, ok: bool, expected: &str) -> Result<()> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{name} = {value} must be {expected}"
        )))
    }
}

pub(crate) fn check_eps(name: &str, value: f64) -> Result<()> {
    check(name, value, value >= 0.0, "finite and >= 0")
}

pub(crate) fn check_p(value: f64) -> Result<()> {
    check("p", value, (0.0..=0.5).contains(&value), "in [0, 0.5]")
}

pub(crate) fn check_q(value: f64) -> Result<()> {
    check("q", value, (0.0..=1.0).contains(&value), "in [0, 1]")
}

pub(crate) fn non_empty<T>(name: &str, values: &[T]) -> Result<()> {
    if values.is_empty() {
        Err(CliError::Config(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

/// Effective parameters of `sweep-length`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepLengthConfig {
    pub command: &'static str,
    pub eps: Vec<f64>,
    pub k: usize,
    pub k_max: usize,
    pub mc: bool,
    pub samples: u64,
    pub seed: u64,
}

impl SweepLengthConfig {
    pub fn resolve(s: &Settings) -> Result<Self> {
        let cfg = Self {
            command: "sweep-length",
            eps: s
                .eps
                .clone()
                .unwrap_or_else(|| vec![0.01, 0.02, 0.04, 0.06]),
            k: s.k.unwrap_or(0),
            k_max: s.k_max.unwrap_or(400),
            mc: s.mc.unwrap_or(false),
            samples: s.samples.unwrap_or(DEFAULT_SAMPLES),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
        };
        non_empty("eps", &cfg.eps)?;
        for &e in &cfg.eps {
            check_eps("eps", e)?;
        }
        if cfg.k > cfg.k_max {
            return Err(CliError::Config(format!(
                "k = {} exceeds k_max = {}",
                cfg.k, cfg.k_max
            )));
        }
        if cfg.mc && cfg.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        Ok(cfg)
    }
}

/// Effective parameters of `sweep-correlation`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCorrelationConfig {
    pub command: &'static str,
    pub eps: f64,
    pub k: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub target: Target,
    pub mc: bool,
    pub samples: u64,
    pub seed: u64,
    pub paper_verbatim: bool,
}

/// `0, 0.01, ..., 0.5`.
pub fn default_p_grid() -> Vec<f64> {
    (0..=50).map(|i| i as f64 / 100.0).collect()
}

impl SweepCorrelationConfig {
    pub fn resolve(s: &Settings) -> Result<Self> {
        let eps = match s.eps.as_deref() {
            None => 0.5,
            Some([e]) => *e,
            Some(list) => {
                return Err(CliError::Config(format!(
                    "sweep-correlation takes a single eps, got {}",
                    list.len()
                )))
            }
        };
        let cfg = Self {
            command: "sweep-correlation",
            eps,
            k: s.k.unwrap_or(100),
            p: s.p.clone().unwrap_or_else(default_p_grid),
            q: s.q.clone().unwrap_or_else(|| vec![0.0, 0.9, 1.0]),
            target: s.target.unwrap_or(Target::Pulses),
            mc: s.mc.unwrap_or(false),
            samples: s.samples.unwrap_or(DEFAULT_SAMPLES),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            paper_verbatim: s.paper_verbatim.unwrap_or(false),
        };
        check_eps("eps", cfg.eps)?;
        non_empty("p", &cfg.p)?;
        non_empty("q", &cfg.q)?;
        cfg.p.iter().try_for_each(|&p| check_p(p))?;
        cfg.q.iter().try_for_each(|&q| check_q(q))?;
        if cfg.mc && cfg.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        Ok(cfg)
    }
}

/// Effective parameters of `validate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidateConfig {
    pub command: &'static str,
    pub samples: u64,
    pub seed: u64,
}

impl ValidateConfig {
    pub fn resolve(s: &Settings) -> Result<Self> {
        let cfg = Self {
            command: "validate",
            samples: s.samples.unwrap_or(DEFAULT_VALIDATE_SAMPLES),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
        };
        if cfg.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        Ok(cfg)
    }
}

/// Effective parameters of `propagate`. Explicit `theta`/`tau` win over
/// sampling; a missing list is taken as zeros.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagateConfig {
    pub command: &'static str,
    pub k: usize,
    pub theta: Option<Vec<f64>>,
    pub tau: Option<Vec<f64>>,
    pub eps_theta: f64,
    pub eps_tau: f64,
    pub mode: SamplingMode,
    pub seed: u64,
}

impl PropagateConfig {
    pub fn resolve(s: &Settings) -> Result<Self> {
        let cfg = Self {
            command: "propagate",
            k: s.k.unwrap_or(0),
            theta: s.theta.clone(),
            tau: s.tau.clone(),
            eps_theta: s.eps_theta.unwrap_or(0.0),
            eps_tau: s.eps_tau.unwrap_or(0.0),
            mode: s.mode.unwrap_or(SamplingMode::TauExact),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
        };
        check_eps("eps_theta", cfg.eps_theta)?;
        check_eps("eps_tau", cfg.eps_tau)?;
        let lists = [
            ("theta", &cfg.theta, cfg.k + 1),
            ("tau", &cfg.tau, cfg.k + 2),
        ];
        for (name, list, len) in lists {
            if let Some(values) = list {
                if values.len() != len {
                    return Err(CliError::Config(format!(
                        "{name} needs {len} values for k = {}, got {}",
                        cfg.k,
                        values.len()
                    )));
                }
                for &v in values {
                    check(name, v, true, "finite")?;
                }
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = FileConfig::parse(
            r#"{"k": 3, "eps": 0.2, "q": [0, 1], "mc": true, "mode": "delta-independent"}"#,
        )
        .unwrap();
        let flags = Options {
            k: Some(5),
            no_mc: true,
            ..Default::default()
        };
        let s = Settings::merge(file, &flags);
        assert_eq!(s.k, Some(5));
        assert_eq!(s.eps, Some(vec![0.2]));
        assert_eq!(s.q, Some(vec![0.0, 1.0]));
        assert_eq!(s.mc, Some(false));
        assert_eq!(s.mode, Some(SamplingMode::DeltaIndependent));
    }

    #[test]
    fn unknown_and_dashed_keys_rejected() {
        assert!(FileConfig::parse(r#"{"samples": 10, "bogus": 1}"#).is_err());
        assert!(FileConfig::parse(r#"{"k-max": 10}"#).is_err());
        assert!(FileConfig::parse(r#"{"config": "x.json"}"#).is_err());
        assert!(FileConfig::parse(r#"{"mode": "exact"}"#).is_err());
    }

    #[test]
    fn defaults_and_ranges() {
        let s = Settings::default();
        let cfg = SweepCorrelationConfig::resolve(&s).unwrap();
        assert_eq!(cfg.p.len(), 51);
        assert_eq!(cfg.p[50], 0.5);
        assert_eq!(cfg.q, vec![0.0, 0.9, 1.0]);

        let bad_p = Settings {
            p: Some(vec![0.6]),
            ..Default::default()
        };
        assert!(SweepCorrelationConfig::resolve(&bad_p).is_err());
        let two_eps = Settings {
            eps: Some(vec![0.1, 0.2]),
            ..Default::default()
        };
        assert!(SweepCorrelationConfig::resolve(&two_eps).is_err());
        let inverted = Settings {
            k: Some(5),
            k_max: Some(2),
            ..Default::default()
        };
        assert!(SweepLengthConfig::resolve(&inverted).is_err());
        let negative = Settings {
            eps: Some(vec![-0.1]),
            ..Default::default()
        };
        assert!(SweepLengthConfig::resolve(&negative).is_err());
        let short = Settings {
            k: Some(2),
            theta: Some(vec![0.0]),
            ..Default::default()
        };
        assert!(PropagateConfig::resolve(&short).is_err());
    }
}
