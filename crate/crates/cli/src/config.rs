//! Run configuration shared by the command line and JSON config files.
//!
//! Every field is optional in both sources. A value given on the command
//! line replaces the one from the file.

use std::path::{Path, PathBuf};

use aircomp_core::{snr_from_db, DecoderKind, Design, NoiseModel, SystemConfig};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "AIRCOMP_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    Cauchy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ml,
    Map,
    Lambert,
    Cauchy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn parse_design(s: &str) -> Result<Design, String> {
    match s.to_ascii_lowercase().as_str() {
        "optimal" => Ok(Design::Optimal),
        "equal-distance" | "equal" => Ok(Design::EqualDistance),
        "closed-form-lambert" | "lambert" => Ok(Design::ClosedFormLambert),
        other => Err(format!("unknown design '{other}' (optimal, equal-distance, closed-form-lambert)")),
    }
}

fn parse_decoder(s: &str) -> Result<DecoderKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "ml" => Ok(DecoderKind::Ml),
        "map" => Ok(DecoderKind::Map),
        other => Err(format!("unknown decoder '{other}' (ml, map)")),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// In-phase base
    #[arg(long, help_heading = "System")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    /// Quadrature base
    #[arg(long, help_heading = "System")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Number of transmitting nodes
    #[arg(long = "K", help_heading = "System")]
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// SNR P/σ² (Gaussian) or P/γ² (Cauchy) in dB
    #[arg(long, allow_hyphen_values = true, help_heading = "System")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    /// Average power budget per node [default: 1]
    #[arg(long, help_heading = "System")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    /// Complex Gaussian noise variance, instead of --snr-db
    #[arg(long, help_heading = "System")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    /// Cauchy noise scale, instead of --snr-db
    #[arg(long, help_heading = "System")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Noise family [default: gaussian]
    #[arg(long, value_enum, help_heading = "System")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseKind>,

    /// Solver for `optimize` [default: ml, or cauchy under Cauchy noise]
    #[arg(long, value_enum, help_heading = "Optimize")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,

    /// In-phase spacing for `evaluate`
    #[arg(long, help_heading = "Evaluate")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    /// Quadrature spacing for `evaluate`
    #[arg(long, help_heading = "Evaluate")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    /// Receiver for `evaluate`: ml or map [default: ml]
    #[arg(long, value_parser = parse_decoder, help_heading = "Evaluate")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoder: Option<DecoderKind>,
    /// Pair the analytic MSE with a Monte Carlo estimate of this many trials
    #[arg(long, help_heading = "Evaluate")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_trials: Option<usize>,

    /// First SNR of the sweep in dB
    #[arg(long, allow_hyphen_values = true, help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db_from: Option<f64>,
    /// Last SNR of the sweep in dB (inclusive)
    #[arg(long, allow_hyphen_values = true, help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db_to: Option<f64>,
    /// SNR step in dB [default: 1]
    #[arg(long, help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db_step: Option<f64>,
    /// Comma-separated designs [default: optimal,equal-distance]
    #[arg(long, value_parser = parse_design, value_delimiter = ',', help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub designs: Option<Vec<Design>>,
    /// Comma-separated receivers [default: ml]
    #[arg(long, value_parser = parse_decoder, value_delimiter = ',', help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoders: Option<Vec<DecoderKind>>,
    /// Monte Carlo trials per sweep cell [default: 10000]
    #[arg(long, help_heading = "Sweep")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,

    /// Number of superimposed levels for `roots`
    #[arg(long = "N", help_heading = "Roots")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,

    /// Random seed [default: $AIRCOMP_SEED, else 0]
    #[arg(long, help_heading = "Output")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output format [default: csv]
    #[arg(long, value_enum, help_heading = "Output")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Write to this file instead of stdout
    #[arg(long, help_heading = "Output")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($field:ident),+) => {
        RunConfig { $($field: $top.$field.or($base.$field)),+ }
    };
}

fn missing(flag: &str, key: &str) -> CliError {
    CliError::Usage(format!("missing required value: --{flag} (or \"{key}\" in the config file)"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// `self` with gaps filled from `base`.
    pub fn overlay(self, base: RunConfig) -> RunConfig {
        overlay!(
            self,
            base,
            q,
            n,
            k,
            snr_db,
            power,
            sigma2,
            gamma,
            noise,
            method,
            d1,
            d2,
            decoder,
            mc_trials,
            snr_db_from,
            snr_db_to,
            snr_db_step,
            designs,
            decoders,
            trials,
            levels,
            seed,
            format,
            out
        )
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}={v} is not a seed"))),
            Err(_) => Ok(0),
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise.unwrap_or(NoiseKind::Gaussian)
    }

    pub fn sizes(&self) -> Result<(usize, usize, usize), CliError> {
        Ok((
            self.q.ok_or_else(|| missing("q", "q"))?,
            self.n.ok_or_else(|| missing("n", "n"))?,
            self.k.ok_or_else(|| missing("K", "K"))?,
        ))
    }

    /// System at the configured noise level.
    pub fn system(&self) -> Result<SystemConfig, CliError> {
        let (q, n, k) = self.sizes()?;
        let power = self.power.unwrap_or(1.0);
        let kind = self.noise_kind();
        let direct = match kind {
            NoiseKind::Gaussian if self.gamma.is_some() => {
                return Err(CliError::Usage("--gamma applies to Cauchy noise; use --sigma2".into()))
            }
            NoiseKind::Cauchy if self.sigma2.is_some() => {
                return Err(CliError::Usage("--sigma2 applies to Gaussian noise; use --gamma".into()))
            }
            NoiseKind::Gaussian => self.sigma2,
            NoiseKind::Cauchy => self.gamma,
        };
        let noise = match (self.snr_db, direct, kind) {
            (Some(_), Some(_), _) => {
                return Err(CliError::Usage("give either --snr-db or a noise level, not both".into()))
            }
            (None, None, _) => return Err(missing("snr-db", "snr_db")),
            (Some(db), None, NoiseKind::Gaussian) => NoiseModel::Gaussian { sigma2: power / snr_from_db(db) },
            (Some(db), None, NoiseKind::Cauchy) => NoiseModel::Cauchy { gamma: (power / snr_from_db(db)).sqrt() },
            (None, Some(sigma2), NoiseKind::Gaussian) => NoiseModel::Gaussian { sigma2 },
            (None, Some(gamma), NoiseKind::Cauchy) => NoiseModel::Cauchy { gamma },
        };
        SystemConfig::new(q, n, k, power, noise).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// System whose noise level is set later from an SNR.
    pub fn template(&self) -> Result<SystemConfig, CliError> {
        let (q, n, k) = self.sizes()?;
        let power = self.power.unwrap_or(1.0);
        let noise = match self.noise_kind() {
            NoiseKind::Gaussian => NoiseModel::Gaussian { sigma2: power },
            NoiseKind::Cauchy => NoiseModel::Cauchy { gamma: power.sqrt() },
        };
        SystemConfig::new(q, n, k, power, noise).map_err(|e| CliError::Usage(e.to_string()))
    }
}
