//! Artifact writers: diagnostics JSON and comma-separated field tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use poincare_core::sie::NoetherDiagnostics;
use serde::{Deserialize, Serialize};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";
pub const FIELD_FILE: &str = "field.csv";
pub const DENSITY_FILE: &str = "density.csv";
pub const CERTIFICATES_FILE: &str = "certificates.json";
pub const NULL_FAMILY_FILE: &str = "null_family.csv";
pub const PROBLEM_FILE: &str = "problem.json";

/// The diagnostics record; the key set is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsRecord {
    pub normal: bool,
    pub kappa: Option<i64>,
    pub l: Option<usize>,
    pub l_prime: Option<usize>,
    pub residuals: Vec<f64>,
    pub moments: Vec<f64>,
}

impl From<&NoetherDiagnostics> for DiagnosticsRecord {
    fn from(d: &NoetherDiagnostics) -> Self {
        let counted = d.normal;
        DiagnosticsRecord {
            normal: d.normal,
            kappa: d.kappa,
            l: counted.then_some(d.l),
            l_prime: counted.then_some(d.l_prime),
            residuals: d.residuals.clone(),
            moments: d.moments.clone(),
        }
    }
}

pub struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_text(&self, name: &str, text: &str) -> std::io::Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, text)?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_csv(&self, name: &str, header: &[String], rows: &[Vec<f64>]) -> std::io::Result<PathBuf> {
        self.write_text(name, &csv(header, rows))
    }
}

/// Header row plus one line per row; non-finite values are written as `nan`.
pub fn csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            if v.is_finite() {
                write!(out, "{v:e}").expect("writing to a string");
            } else {
                out.push_str("nan");
            }
        }
        out.push('\n');
    }
    out
}

/// `prefix_1, …, prefix_n`.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("{prefix}_{j}")).collect()
}
