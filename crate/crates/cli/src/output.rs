//! Versioned CSV tables and the run manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Shortest round-trip scientific form.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| CliError::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        let body = String::from_utf8(body).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(format!("# lamegap {} csv schema {CSV_SCHEMA_VERSION}\n{body}", self.name))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct OutputEntry {
    file: String,
    sha256: String,
    rows: Option<usize>,
}

/// Collects the files of one run and writes them with a manifest.
pub struct Artifacts {
    dir: PathBuf,
    subcommand: String,
    files: Vec<(String, String, Option<usize>)>,
}

impl Artifacts {
    pub fn new(dir: &Path, subcommand: &str) -> Self {
        Self { dir: dir.to_path_buf(), subcommand: subcommand.into(), files: Vec::new() }
    }

    pub fn table(&mut self, t: &Table) -> Result<String, CliError> {
        let text = t.to_csv()?;
        self.files.push((format!("{}.csv", t.name), text.clone(), Some(t.rows.len())));
        Ok(text)
    }

    pub fn text(&mut self, file: &str, content: String) {
        self.files.push((file.into(), content, None));
    }

    /// Writes every file, the resolved config and the manifest. The output directory
    /// is left out of the recorded config and its hash.
    pub fn write(mut self, cfg: &RunConfig, arguments: &serde_json::Value, argv: &[String]) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.dir)?;
        let mut cfg = cfg.clone();
        cfg.execution.out = None;
        let cfg = &cfg;
        let canonical = serde_json::to_string(&json!({
            "subcommand": self.subcommand,
            "arguments": arguments,
            "config": cfg,
        }))
        .map_err(|e| CliError::Io(e.to_string()))?;
        let config_file = format!("{}.config.toml", self.subcommand);
        self.files.push((config_file.clone(), cfg.to_toml(), None));
        let mut outputs = Vec::new();
        for (name, content, rows) in &self.files {
            std::fs::write(self.dir.join(name), content)?;
            outputs.push(OutputEntry { file: name.clone(), sha256: sha256_hex(content.as_bytes()), rows: *rows });
        }
        let e = &cfg.execution;
        let manifest = json!({
            "manifest_version": 1,
            "csv_schema_version": CSV_SCHEMA_VERSION,
            "tool": "lamegap",
            "versions": {
                "lamegap-cli": env!("CARGO_PKG_VERSION"),
                "lamegap-core": lamegap::VERSION,
            },
            "subcommand": self.subcommand,
            "command_line": argv,
            "replay": format!("pass --config {config_file} with the same subcommand arguments"),
            "arguments": arguments,
            "config_hash": sha256_hex(canonical.as_bytes()),
            "config": cfg,
            "tolerances": {
                "abs_tol": e.abs_tol,
                "rel_tol": e.rel_tol,
                "max_evals": e.max_evals,
            },
            "seed": e.seed,
            "outputs": outputs,
        });
        let path = self.dir.join(format!("{}.manifest.json", self.subcommand));
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_schema_comment_and_quotes_commas() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec!["x, y".into(), num(0.5)]);
        let s = t.to_csv().unwrap();
        assert_eq!(s, "# lamegap demo csv schema 1\na,b\n\"x, y\",5e-1\n");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [312.159, 1e-4, -2.0 / 3.0, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }
}
