//! CSV and JSON writers. Numbers use the shortest representation that round-trips
//! (with an exponent for very large or small magnitudes), so identical rows
//! always produce identical bytes.

use std::io::Write;

use serde::Serialize;
use v2x_core::config::FIELD_NAMES;

use crate::evaluate::{Row, Verdict};
use crate::CliError;

/// Columns after the config fields, in order.
pub const RESULT_COLUMNS: [&str; 12] = [
    "metric",
    "tau_or_epsilon",
    "value",
    "std_error_or_quad_error",
    "n_samples",
    "seed",
    "window_radius",
    "mc_mean",
    "mc_std_error",
    "z_score",
    "verdict",
    "error",
];

pub fn header() -> Vec<&'static str> {
    FIELD_NAMES
        .iter()
        .chain(RESULT_COLUMNS.iter())
        .copied()
        .collect()
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn num(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn record(row: &Row) -> Vec<String> {
    let mut out: Vec<String> = row.config.values().into_iter().map(fmt_f64).collect();
    out.extend([
        row.metric.name().to_string(),
        num(row.tau_or_epsilon),
        num(row.value),
        num(row.std_error_or_quad_error),
        row.n_samples.map(|n| n.to_string()).unwrap_or_default(),
        row.seed.map(|n| n.to_string()).unwrap_or_default(),
        num(row.window_radius),
        num(row.mc_mean),
        num(row.mc_std_error),
        num(row.z_score),
        match row.verdict {
            Some(Verdict::Pass) => "pass".into(),
            Some(Verdict::Fail) => "fail".into(),
            None => String::new(),
        },
        row.error.clone().unwrap_or_default(),
    ]);
    out
}

/// CSV with an optional `# generated_at_unix=...` first line.
pub fn write_csv<W: Write>(mut w: W, rows: &[Row], timestamp: Option<u64>) -> Result<(), CliError> {
    if let Some(t) = timestamp {
        writeln!(w, "# generated_at_unix={t}")?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header())?;
    for row in rows {
        csv.write_record(record(row))?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Document<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
    columns: Vec<&'static str>,
    rows: &'a [Row],
}

/// JSON mirror of the CSV: the same columns, one object per row, `null` for
/// empty cells.
pub fn write_json<W: Write>(
    mut w: W,
    rows: &[Row],
    timestamp: Option<u64>,
) -> Result<(), CliError> {
    let doc = Document {
        generated_at_unix: timestamp,
        columns: header(),
        rows,
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}
