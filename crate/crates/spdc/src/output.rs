//! CSV files with a config-hash comment line and deterministic number
//! formatting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Shortest round-trip representation, in exponent form outside
/// `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub struct Csv {
    text: String,
    columns: usize,
    rows: usize,
}

impl Csv {
    pub fn new(hash: &str, header: &[&str]) -> Self {
        let mut text = String::new();
        writeln!(text, "# config_hash={hash}").unwrap();
        writeln!(text, "{}", header.join(",")).unwrap();
        Csv {
            text,
            columns: header.len(),
            rows: 0,
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "CSV row width");
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// `<command>_<model>_<hash12>.<ext>` inside `dir`.
pub fn artifact_path(dir: &Path, command: &str, model: &str, hash: &str, ext: &str) -> PathBuf {
    dir.join(format!("{command}_{model}_{}.{ext}", &hash[..12]))
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
