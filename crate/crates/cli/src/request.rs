use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use serde::Serialize;
use v2x_core::config::FIELD_NAMES;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Analytic,
    Montecarlo,
    /// Both pipelines, compared row by row.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Sidelink association probability.
    Assoc,
    #[value(name = "dl_cov")]
    DlCov,
    #[value(name = "sl_cov")]
    SlCov,
    #[value(name = "total_cov")]
    TotalCov,
    /// Effective downlink rate per user.
    #[value(name = "eff_rate")]
    EffRate,
    /// Network utility with the config's weights.
    Utility,
    #[value(name = "total_rate")]
    TotalRate,
    /// Normalized second moment of the Voronoi cell area.
    Nu,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Assoc => "assoc",
            Metric::DlCov => "dl_cov",
            Metric::SlCov => "sl_cov",
            Metric::TotalCov => "total_cov",
            Metric::EffRate => "eff_rate",
            Metric::Utility => "utility",
            Metric::TotalRate => "total_rate",
            Metric::Nu => "nu",
        }
    }

    /// Whether the metric is evaluated on the SIR threshold grid.
    pub fn uses_tau(self) -> bool {
        matches!(self, Metric::DlCov | Metric::SlCov | Metric::TotalCov)
    }

    /// Whether the metric depends on the sidelink rate `epsilon`.
    pub fn uses_epsilon(self) -> bool {
        matches!(self, Metric::Utility | Metric::TotalRate)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One config field and the values it takes, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = CliError;

    /// Parses `name=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, list) = s.split_once('=').ok_or_else(|| {
            CliError::Request(format!("sweep must look like name=v1,v2,...: {s:?}"))
        })?;
        let parameter = name.trim();
        if !FIELD_NAMES.contains(&parameter) {
            return Err(CliError::Request(format!(
                "unknown sweep parameter {parameter:?}; expected one of {}",
                FIELD_NAMES.join(", ")
            )));
        }
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Request(format!("bad sweep value {v:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Request("sweep values must be finite".into()));
        }
        Ok(Sweep {
            parameter: parameter.to_string(),
            values,
        })
    }
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRequest {
    pub config_path: PathBuf,
    pub mode: Mode,
    pub metric: Metric,
    /// SIR thresholds as linear ratios.
    pub tau_grid: Vec<f64>,
    pub sweep: Option<Sweep>,
    pub seed: Option<u64>,
    pub n_samples: u64,
    /// `None` writes CSV to stdout; a `.json` extension selects JSON.
    pub output_path: Option<PathBuf>,
    /// Write a generation-time header line.
    pub timestamp: bool,
}

impl RunRequest {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Request(m));
        if self.metric.uses_tau() {
            if self.tau_grid.is_empty() {
                return bad(format!("metric {} needs --tau", self.metric));
            }
            if let Some(t) = self.tau_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                return bad(format!("tau values must be positive and finite, got {t}"));
            }
        } else if !self.tau_grid.is_empty() {
            return bad(format!("metric {} does not take --tau", self.metric));
        }
        if self.mode != Mode::Analytic {
            if self.seed.is_none() {
                return bad(format!(
                    "{} mode needs a seed: pass --seed or set VANET_SEED",
                    self.mode_name()
                ));
            }
            if self.n_samples < 1 {
                return bad("n_samples must be ≥ 1".into());
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep list is empty".into());
            }
        }
        Ok(())
    }

    fn mode_name(&self) -> &'static str {
        match self.mode {
            Mode::Analytic => "analytic",
            Mode::Montecarlo => "montecarlo",
            Mode::Validate => "validate",
        }
    }

    pub fn wants_json(&self) -> bool {
        self.output_path
            .as_ref()
            .and_then(|p| p.extension())
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    }
}
