//! Batch driver: loads a config, runs the quadrature and/or Monte Carlo
//! pipelines over an optional parameter sweep, and writes CSV or JSON.

use std::fs::File;
use std::io::{self, BufWriter};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;
use v2x_core::{ConfigError, NetworkConfig};

pub mod evaluate;
pub mod output;
pub mod request;

pub use evaluate::{Row, ValidationRow, Verdict};
pub use request::{db_to_linear, Metric, Mode, RunRequest, Sweep};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Request(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn errors(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// `(passed, validated)` over rows with a verdict.
    pub fn verdicts(&self) -> (usize, usize) {
        let judged = self.rows.iter().filter_map(|r| r.verdict);
        judged.fold((0, 0), |(p, n), v| {
            (p + usize::from(v == Verdict::Pass), n + 1)
        })
    }
}

/// Rows for every sweep value in request order. A value that makes the config
/// invalid, or a failing evaluation, yields rows with the error column set; the
/// remaining values still run.
pub fn sweep(base: &NetworkConfig, req: &RunRequest) -> Vec<Row> {
    let Some(sw) = &req.sweep else {
        return evaluate::evaluate(base, req);
    };
    sw.values
        .iter()
        .flat_map(|&v| {
            let cfg = base
                .with(&sw.parameter, v)
                .expect("sweep parameter was checked against the field list");
            match cfg.validate() {
                Ok(cfg) => evaluate::evaluate(&cfg, req),
                Err(e) => evaluate::points(&cfg, req.metric, &req.tau_grid)
                    .into_iter()
                    .map(|p| Row::failed(cfg, req.metric, p, format!("{}={v}: {e}", sw.parameter)))
                    .collect(),
            }
        })
        .collect()
}

/// Validates the request, loads the config, evaluates and writes the output.
pub fn run(req: &RunRequest) -> Result<Report, CliError> {
    req.validate()?;
    let cfg = NetworkConfig::load(&req.config_path)?;
    let rows = sweep(&cfg, req);
    let timestamp = req.timestamp.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let write = |w: Box<dyn io::Write>| {
        if req.wants_json() {
            output::write_json(w, &rows, timestamp)
        } else {
            output::write_csv(w, &rows, timestamp)
        }
    };
    match &req.output_path {
        Some(path) => write(Box::new(BufWriter::new(File::create(path)?)))?,
        None => write(Box::new(io::stdout().lock()))?,
    }
    Ok(Report { rows })
}
