//! Record emission: CSV or JSON records, a fit sidecar and a run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use estkit_core::experiments::{ScalingFit, SweepRecord};
use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str = "experiment,n,m,s,r,eps,trial_count,err_mean,err_median,err_q90,bound_value,seed";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.n,
            r.m,
            opt(r.s),
            opt(r.r),
            fmt_float(r.eps),
            r.trials,
            fmt_float(r.err_mean),
            fmt_float(r.err_median),
            fmt_float(r.err_q90),
            fmt_float(r.bound_value),
            r.seed
        )
        .expect("writing to a string");
    }
    out
}

pub fn to_json(records: &[SweepRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    s.push('\n');
    s
}

/// Parse records written by [`emit`] in JSON format.
pub fn load_records(path: &Path) -> CliResult<Vec<SweepRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// `<output>` with `suffix` appended to its file name.
pub fn sidecar_path(output: &Path, suffix: &str) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    output.with_file_name(name)
}

/// Write `records` to `path`, and the fit (or `null`) beside it as
/// `<path>.fit.json`. Nothing is written when `records` is empty.
pub fn emit(records: &[SweepRecord], fit: Option<&ScalingFit>, format: OutputFormat, path: &Path) -> CliResult<()> {
    if records.is_empty() {
        return Err(CliError::Config("no records to emit".into()));
    }
    let body = match format {
        OutputFormat::Csv => to_csv(records),
        OutputFormat::Json => to_json(records),
    };
    write(path, &body)?;
    let fit = serde_json::to_string_pretty(&fit).expect("fit serializes");
    write(&sidecar_path(path, ".fit.json"), &(fit + "\n"))
}

#[derive(Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a C,
}

/// Write the resolved configuration beside `output` as `<output>.manifest.json`.
pub fn write_manifest<C: Serialize>(output: &Path, command: &str, seed: u64, config: &C) -> CliResult<PathBuf> {
    let manifest = Manifest { tool: "estkit", version: estkit_core::VERSION, command, seed, config };
    let path = sidecar_path(output, ".manifest.json");
    write(&path, &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"))?;
    Ok(path)
}
