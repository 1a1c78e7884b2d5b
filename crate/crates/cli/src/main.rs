use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use v2x_cli::{db_to_linear, run, Metric, Mode, RunRequest, Sweep};

/// Coverage, rate and association of a V2X sidelink / cellular downlink network,
/// by quadrature, by simulation, or both side by side.
///
/// Exit status: 0 on success, 1 if the run could not start or the output could
/// not be written, 2 if any row carries an error or a failed verdict.
#[derive(Debug, Parser)]
#[command(name = "v2x", version)]
struct Args {
    /// Flat TOML file with every NetworkConfig field.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, value_enum)]
    metric: Metric,
    /// SIR thresholds, comma separated or repeated; linear ratios unless
    /// --db-thresholds.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    tau: Vec<f64>,
    /// Config field and its values: name=v1,v2,...
    #[arg(long)]
    sweep: Option<Sweep>,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Master seed (required in montecarlo and validate modes).
    #[arg(long, env = "VANET_SEED")]
    seed: Option<u64>,
    /// Output file; `.json` selects JSON. Defaults to CSV on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Read --tau values as dB.
    #[arg(long)]
    db_thresholds: bool,
    /// Omit the generation-time header line.
    #[arg(long)]
    no_timestamp: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let tau_grid = if args.db_thresholds {
        args.tau.iter().copied().map(db_to_linear).collect()
    } else {
        args.tau
    };
    let req = RunRequest {
        config_path: args.config,
        mode: args.mode,
        metric: args.metric,
        tau_grid,
        sweep: args.sweep,
        seed: args.seed,
        n_samples: args.samples,
        output_path: args.out,
        timestamp: !args.no_timestamp,
    };
    let report = match run(&req) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for row in &report.rows {
        if let Some(e) = &row.error {
            eprintln!("row error: {e}");
        }
    }
    let (passed, judged) = report.verdicts();
    eprintln!(
        "{} rows, {} errors{}",
        report.rows.len(),
        report.errors(),
        if judged > 0 {
            format!(", {passed}/{judged} validation rows pass")
        } else {
            String::new()
        }
    );
    if report.errors() > 0 || passed < judged {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
