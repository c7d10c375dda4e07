//! Report rows and their CSV/JSON serialization. Column meanings are
//! documented in `docs/reports.md`.

use std::env;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use madc_core::Exact;
use serde::Serialize;

use crate::config::Format;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MADC_OUT_DIR";

/// Row of `simulate`: one seeded round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRow {
    pub model: String,
    pub k: usize,
    pub inner: usize,
    pub alpha: usize,
    pub q: usize,
    pub eta: usize,
    pub beta: usize,
    pub trial: u64,
    pub seed: u64,
    pub s: u32,
    pub total_bits: Option<u64>,
    pub l_measured: Option<String>,
    pub l_measured_decimal: Option<f64>,
    pub l_formula: String,
    pub l_formula_decimal: f64,
    pub r: Option<String>,
    pub status: String,
}

/// Row of `sweep --task simulate`: all trials at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub model: String,
    pub k: usize,
    pub inner: usize,
    pub alpha: usize,
    pub q: usize,
    pub eta: usize,
    pub beta: usize,
    pub seed: u64,
    pub trials: u64,
    pub s: u32,
    pub total_bits: Option<u64>,
    pub l_measured: Option<String>,
    pub l_measured_decimal: Option<f64>,
    pub l_formula: String,
    pub l_formula_decimal: f64,
    pub r: Option<String>,
    pub decode_failures: u64,
    pub status: String,
}

/// Row of `sweep --task construct`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructRow {
    pub model: String,
    /// Empty for the inner (unextended) PDA.
    pub k: Option<usize>,
    pub inner: usize,
    pub alpha: usize,
    pub params: String,
    pub expected: String,
    pub status: String,
}

/// Row of `audit`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub q: usize,
    pub k: usize,
    /// Empty on the cross-demand summary row.
    pub d: Option<usize>,
    pub mode: String,
    /// Exact TV distance as a fraction, or the Pearson statistic.
    pub statistic: String,
    pub threshold: String,
    pub dof: Option<u64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub pass: bool,
}

pub fn fraction(x: Exact) -> String {
    x.to_string()
}

pub fn decimal(x: Exact) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn render<T: Serialize>(rows: &[T], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Where a report goes: explicit path, `$MADC_OUT_DIR/<default_name>`, or
/// stdout (`None`).
pub fn destination(explicit: Option<&PathBuf>, default_name: &str) -> Option<PathBuf> {
    explicit.cloned().or_else(|| {
        env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(default_name))
    })
}

pub fn emit(text: &str, dest: Option<&PathBuf>) -> Result<()> {
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
