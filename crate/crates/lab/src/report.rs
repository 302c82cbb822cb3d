//! Result rows and their writers.
//!
//! Rows are flat on purpose: `experiment,instance,params,metric,value`,
//! one measurement per row, so different runs diff cleanly. Anything a
//! flat row cannot hold (per-level domination audits) goes into the
//! JSON writer's `audits` array. Timestamps never enter the rows — a
//! fixed seed must reproduce the table byte for byte — and live in the
//! `.meta.json` sidecar instead.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// One measurement. `instance` is empty for aggregate rows (slope fits,
/// analytic probes); `params` pins the knobs the value depends on as a
/// space-separated `key=value` list.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub instance: Option<u64>,
    pub params: String,
    pub metric: String,
    pub value: f64,
}

pub fn row(
    experiment: &str,
    instance: Option<u64>,
    params: impl Into<String>,
    metric: &str,
    value: f64,
) -> ResultRow {
    ResultRow {
        experiment: experiment.to_string(),
        instance,
        params: params.into(),
        metric: metric.to_string(),
        value,
    }
}

/// What a runner hands back: rows in deterministic order, hard-invariant
/// violations (nonempty ⇒ exit code 1), a human summary, and optional
/// nested audits that only the JSON writer can represent.
#[derive(Debug, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub violations: Vec<String>,
    pub summary: String,
    pub audits: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutFormat {
    Csv,
    Json,
}

/// Render the rows (and, for JSON, the audits) to a string.
pub fn render(outcome: &Outcome, format: OutFormat) -> Result<String> {
    match format {
        OutFormat::Csv => {
            let mut wtr = csv::Writer::from_writer(Vec::new());
            for r in &outcome.rows {
                wtr.serialize(r)?;
            }
            let bytes = wtr.into_inner().context("csv flush")?;
            Ok(String::from_utf8(bytes)?)
        }
        OutFormat::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("rows".into(), serde_json::to_value(&outcome.rows)?);
            if !outcome.audits.is_empty() {
                doc.insert("audits".into(), serde_json::Value::Array(outcome.audits.clone()));
            }
            let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(doc))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// `BLOOMLAB_OUT_DIR` overrides the output *directory* only: the file
/// name from `--out` is kept.
pub fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os("BLOOMLAB_OUT_DIR") {
        Some(dir) if !dir.is_empty() => {
            let name = path.file_name().unwrap_or(path.as_os_str());
            PathBuf::from(dir).join(name)
        }
        _ => path.to_path_buf(),
    }
}

/// Run provenance for the `<out>.meta.json` sidecar. This is the only
/// place timestamps appear.
#[derive(Debug, Serialize)]
pub struct Meta {
    pub experiment: String,
    pub seed: u64,
    pub format: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub created_unix_ms: u64,
}

pub fn write_outputs(outcome: &Outcome, format: OutFormat, out: &Path, meta: &Meta) -> Result<PathBuf> {
    let path = resolve_out(out);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let text = render(outcome, format)?;
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    let meta_path = PathBuf::from(format!("{}.meta.json", path.display()));
    let mut meta_text = serde_json::to_string_pretty(meta)?;
    meta_text.push('\n');
    std::fs::write(&meta_path, meta_text)
        .with_context(|| format!("writing {}", meta_path.display()))?;
    Ok(path)
}
