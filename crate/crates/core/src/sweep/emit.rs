//! CSV output and the JSON metadata sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::SweepConfig;
use super::run::{value_columns, SweepRecord};
use crate::error::{Error, Result};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header row: axes, observables, `converged_N`, `residual`, `status`.
pub fn csv_header(cfg: &SweepConfig) -> Vec<String> {
    let mut h: Vec<String> = cfg
        .axes()
        .iter()
        .map(|(n, _)| format!("{}[omega_a]", n.as_str()))
        .collect();
    h.extend(value_columns(cfg));
    h.extend(["converged_N".into(), "residual".into(), "status".into()]);
    h
}

/// Writes the CSV table. Wall times are kept out of it so reruns are
/// byte-identical; they go to the sidecar.
pub fn write_csv<W: Write>(records: &[SweepRecord], cfg: &SweepConfig, w: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to emit".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    out.write_record(csv_header(cfg)).map_err(io)?;
    for r in records {
        let mut row: Vec<String> = r.axes.iter().map(|&x| num(x)).collect();
        row.extend(r.values.iter().map(|&x| num(x)));
        row.push(r.converged_n.map_or_else(String::new, |n| n.to_string()));
        row.push(num(r.residual));
        row.push(match &r.error {
            None => "ok".into(),
            Some(e) => format!("error: {}", e.replace('\n', " ")),
        });
        out.write_record(&row).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// `<out>.json` next to the CSV.
pub fn sidecar_path(destination: &Path) -> PathBuf {
    destination.with_extension("json")
}

pub fn sidecar(records: &[SweepRecord], cfg: &SweepConfig, total_wall_ms: f64) -> serde_json::Value {
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "records": records.len(),
        "failed": failed,
        "total_wall_time_ms": total_wall_ms,
        "points": records.iter().enumerate().map(|(i, r)| json!({
            "index": i,
            "axes": r.axes,
            "wall_time_ms": r.wall_time_ms,
            "converged_N": r.converged_n,
            "error": r.error,
        })).collect::<Vec<_>>(),
    })
}

/// Writes `destination` (CSV) and its JSON sidecar.
pub fn emit_csv(records: &[SweepRecord], cfg: &SweepConfig, destination: &Path, total_wall_ms: f64) -> Result<()> {
    let file = File::create(destination)?;
    write_csv(records, cfg, BufWriter::new(file))?;
    let meta = sidecar(records, cfg, total_wall_ms);
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(sidecar_path(destination), text + "\n")?;
    Ok(())
}
