use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use fom_core::{Trace, Violation};
use serde::{Deserialize, Serialize};

pub const TRACE_HEADER: [&str; 11] = [
    "k",
    "t",
    "theta",
    "primal",
    "dual_surrogate",
    "gap",
    "delta",
    "thm1_residual",
    "thm2_residual",
    "bound",
    "cggap",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub final_gap: f64,
    pub final_primal: f64,
    pub iterations: usize,
    pub wall_time_ms: f64,
    pub violations: Vec<Violation>,
    pub reference_value: Option<f64>,
    pub theoretical_exponent: Option<f64>,
    pub method: String,
    pub instance: String,
}

// `Display` for f64 prints the shortest string that round-trips.
fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(TRACE_HEADER)?;
    for r in &trace.rows {
        w.write_record([
            r.k.to_string(),
            num(r.t),
            num(r.theta),
            num(r.primal),
            num(r.dual_surrogate),
            num(r.gap),
            num(r.delta),
            num(r.thm1_residual),
            num(r.thm2_residual),
            opt(r.bound),
            opt(r.cggap),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `(k, primal)` pairs from a trace file.
pub fn read_primal_column(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{} has no `{name}` column", path.display()))
    };
    let (ki, pi) = (col("k")?, col("primal")?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let k: usize = rec[ki]
            .parse()
            .with_context(|| format!("bad k {:?}", &rec[ki]))?;
        let p: f64 = rec[pi]
            .parse()
            .with_context(|| format!("bad primal {:?}", &rec[pi]))?;
        out.push((k, p));
    }
    Ok(out)
}
