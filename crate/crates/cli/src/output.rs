//! Artifact writing: JSON reports, CSV traces, SVG plots and the manifest.
//!
//! Files are written in call order and recorded with their SHA-256, so the
//! manifest lists exactly what a run produced. Floats use Rust's shortest
//! round-trip formatting, which keeps CSV output byte-identical across runs.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RawConfig;
use crate::error::{CliError, Result};

/// Version of the JSON report and manifest layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
}

pub struct OutputDir {
    dir: PathBuf,
    written: Vec<Artifact>,
    pub plot: bool,
}

impl OutputDir {
    pub fn create(dir: &Path, plot: bool) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            plot,
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(CliError::io(&path))?;
        self.written.push(Artifact {
            file: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    /// `report.json`: `{schema_version, command, result}`.
    pub fn report<T: Serialize>(&mut self, command: &str, result: &T) -> Result<()> {
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "result": result,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("report serializes");
        bytes.push(b'\n');
        self.write("report.json", &bytes)
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Usage(format!("{name}: {e}"));
        w.write_record(&table.header).map_err(io)?;
        for row in &table.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
        self.write(name, &bytes)
    }

    pub fn svg(&mut self, name: &str, svg: &str) -> Result<()> {
        if self.plot {
            self.write(name, svg.as_bytes())?;
        }
        Ok(())
    }

    /// Writes `manifest.json` last; it lists every other artifact.
    pub fn finish(mut self, manifest: Manifest<'_>) -> Result<PathBuf> {
        let written = std::mem::take(&mut self.written);
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "command": manifest.command,
            "config": {
                "path": manifest.config.path.as_ref().map(|p| p.display().to_string()),
                "file_sha256": manifest.config.file_sha256,
                "resolved_sha256": manifest.config.resolved_sha256(),
                "resolved": manifest.config.value,
            },
            "tolerances": manifest.tolerances,
            "versions": {
                "bergman-cli": env!("CARGO_PKG_VERSION"),
                "bergman-core": bergman::VERSION,
            },
            "execution": {
                "parallel_feature": cfg!(feature = "parallel"),
                "threads": manifest.threads,
            },
            "status": manifest.status,
            "artifacts": written,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("manifest serializes");
        bytes.push(b'\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, bytes).map_err(CliError::io(&path))?;
        Ok(path)
    }
}

pub struct Manifest<'a> {
    pub command: &'a str,
    pub config: &'a RawConfig,
    pub tolerances: Value,
    /// `None` means the rayon default.
    pub threads: Option<usize>,
    pub status: &'a str,
}

/// A CSV table with string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Cell formatting shared by every table.
pub fn f(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::INFINITY] {
            assert_eq!(f(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn manifest_lists_artifacts() {
        let dir = std::env::temp_dir().join(format!("bergman-out-{}", std::process::id()));
        let mut out = OutputDir::create(&dir, false).unwrap();
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![f(1.0), f(0.5)]);
        out.csv("t.csv", &t).unwrap();
        out.svg("t.svg", "<svg/>").unwrap();
        let cfg = RawConfig::empty();
        let path = out
            .finish(Manifest {
                command: "test",
                config: &cfg,
                tolerances: Value::Null,
                threads: None,
                status: "ok",
            })
            .unwrap();
        let m: Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
        assert_eq!(m["artifacts"].as_array().unwrap().len(), 1);
        assert_eq!(std::fs::read_to_string(dir.join("t.csv")).unwrap(), "a,b\n1,0.5\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
