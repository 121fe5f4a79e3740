use std::path::{Path, PathBuf};

use extsob::spectral::{io, SpectralField};
use serde::Serialize;
use serde_json::{json, Value};

/// One suite's verdict. Field order is the on-disk key order.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    pub inputs: Value,
    pub values: Value,
    pub tolerances: Value,
    pub pass: bool,
}

/// Side outputs written next to a report.
#[derive(Debug, Clone)]
pub enum Artifact {
    Csv(String),
    Field(SpectralField),
}

/// JSON has no infinities; those become strings.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("report values are plain JSON") + "\n"
}

/// Writes `<stem>.json` plus any artifacts (`<stem>.csv`, `<stem>.field`)
/// and returns the paths written.
pub fn write(dir: &Path, stem: &Path, report: &Report, artifacts: &[Artifact]) -> std::io::Result<Vec<PathBuf>> {
    let base = dir.join(stem);
    if let Some(parent) = base.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut written = Vec::new();
    let json_path = base.with_extension("json");
    std::fs::write(&json_path, to_json(report))?;
    written.push(json_path);
    for a in artifacts {
        match a {
            Artifact::Csv(text) => {
                let p = base.with_extension("csv");
                std::fs::write(&p, text)?;
                written.push(p);
            }
            Artifact::Field(u) => {
                let p = base.with_extension("field");
                io::write_field(u, &p).map_err(|e| std::io::Error::other(e.to_string()))?;
                written.push(p);
            }
        }
    }
    Ok(written)
}

/// `summary.json`: per-suite verdicts plus a metadata block that alone
/// carries run-specific data such as the timestamp.
pub fn summary(entries: &[(String, String, bool)], config: Option<&Path>) -> Value {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "suites": entries
            .iter()
            .map(|(name, suite, pass)| json!({ "name": name, "suite": suite, "pass": pass }))
            .collect::<Vec<_>>(),
        "pass": entries.iter().all(|e| e.2),
        "metadata": {
            "timestamp_unix": stamp,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config.map(|p| p.display().to_string()),
        },
    })
}
