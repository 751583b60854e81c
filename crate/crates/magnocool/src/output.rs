//! CSV and JSON writers and per-run output directories.
//!
//! Floats are written with Rust's shortest round-trip formatting so that a
//! value read back parses to the identical f64; missing values (NaN) are
//! empty fields.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use magnocool_core::spectra::SpectrumResult;
use magnocool_core::sweep_opt::{Dataset, FigureBundle, SweepTable};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            _ => Err(CliError::Config(format!("--format must be csv, json or both, got '{s}'"))),
        }
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:?}")
    }
}

/// Serializes a table as UTF-8 CSV with LF line endings.
pub fn csv_bytes<'a, I>(header: &[&str], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let wrap = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_float(*v))).map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Config(format!("csv: {}", e.error())))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_csv<'a, I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    write_bytes(path, &csv_bytes(header, rows)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("json: {e}")))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn spectrum_csv(s: &SpectrumResult) -> Result<Vec<u8>, CliError> {
    let rows: Vec<[f64; 2]> = s
        .frequencies
        .iter()
        .zip(&s.values)
        .map(|(w, v)| [*w, *v])
        .collect();
    csv_bytes(&["omega_over_wc", "S_F"], rows.iter().map(|r| &r[..]))
}

pub fn dataset_csv(d: &Dataset) -> Result<Vec<u8>, CliError> {
    let header: Vec<&str> = d.columns.iter().map(String::as_str).collect();
    csv_bytes(&header, d.rows.iter().map(Vec::as_slice))
}

/// Observables present in at least one row of a sweep, in column order.
pub fn sweep_observables(t: &SweepTable) -> Vec<&'static str> {
    let mut out = Vec::new();
    let has = |f: fn(&magnocool_core::sweep_opt::SweepRow) -> bool| t.rows.iter().any(f);
    if has(|r| r.gamma_minus.is_some()) {
        out.push("gamma_minus");
    }
    if has(|r| r.gamma_plus.is_some()) {
        out.push("gamma_plus");
    }
    if has(|r| r.gamma_net.is_some()) {
        out.push("gamma_net");
    }
    if has(|r| r.n_c.is_some()) {
        out.push("n_c");
    }
    if has(|r| r.threshold.is_some()) {
        out.push("q_threshold");
    }
    out
}

fn observable(r: &magnocool_core::sweep_opt::SweepRow, name: &str) -> f64 {
    let v = match name {
        "gamma_minus" => r.gamma_minus,
        "gamma_plus" => r.gamma_plus,
        "gamma_net" => r.gamma_net,
        "n_c" => r.n_c,
        "q_threshold" => r.threshold,
        _ => None,
    };
    v.unwrap_or(f64::NAN)
}

/// One CSV per observable with columns `<key>,<observable>`, plus the
/// stability flag table, keyed by file stem.
pub fn sweep_csvs(t: &SweepTable) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let key = t.key.as_str();
    let mut files = Vec::new();
    for name in sweep_observables(t) {
        let rows: Vec<[f64; 2]> = t.rows.iter().map(|r| [r.value, observable(r, name)]).collect();
        files.push((
            format!("sweep_{name}"),
            csv_bytes(&[key, name], rows.iter().map(|r| &r[..]))?,
        ));
    }
    let rows: Vec<[f64; 2]> = t
        .rows
        .iter()
        .map(|r| [r.value, if r.stable { 1.0 } else { 0.0 }])
        .collect();
    files.push((
        "sweep_stable".to_string(),
        csv_bytes(&[key, "stable"], rows.iter().map(|r| &r[..]))?,
    ));
    for r in &t.rows {
        if let Some(s) = &r.spectrum {
            files.push((format!("spectrum_{key}_{}", format_float(r.value)), spectrum_csv(s)?));
        }
    }
    Ok(files)
}

/// Writes every dataset of a bundle plus `manifest.json` into `dir`.
pub fn write_bundle(dir: &Path, bundle: &FigureBundle) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for d in &bundle.datasets {
        let path = dir.join(format!("{}.csv", d.name));
        write_bytes(&path, &dataset_csv(d)?)?;
        written.push(path);
    }
    let path = dir.join("manifest.json");
    write_json(&path, &bundle.manifest)?;
    written.push(path);
    Ok(written)
}

/// Short digest of a config's canonical text.
pub fn config_hash(command: &str, config_text: &str) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(config_text.as_bytes());
    hex::encode(&h.finalize()[..6])
}

/// `<out>/<hash>-<UTC timestamp>`, suffixed with a counter when a run with
/// the same hash already claimed that second.
pub fn create_run_dir(out: &Path, hash: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    let base = format!("{hash}-{stamp}");
    for k in 0.. {
        let name = if k == 0 { base.clone() } else { format!("{base}-{k}") };
        let dir = out.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::io(&dir, e)),
        }
    }
    unreachable!()
}
