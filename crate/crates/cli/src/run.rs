//! Run directories: output files, the input snapshot and the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use iongate::config::Config;
use iongate::lindblad::IntegrationStats;
use serde::Serialize;

use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.toml";
pub const INPUT: &str = "input.toml";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub code_version: String,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub started: String,
    pub finished: String,
    /// Input snapshot, relative to the run directory.
    pub config: String,
    /// Every file written, relative to the run directory.
    pub outputs: Vec<String>,
    pub summary: BTreeMap<String, toml::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub integrator: Vec<IntegrationStats>,
}

/// Collects outputs of one subcommand under `dir`.
pub struct RunDir {
    dir: PathBuf,
    manifest: RunManifest,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunDir {
    pub fn create(dir: &Path, subcommand: &str, config: &Config, seed: Option<u64>, workers: Option<usize>) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut run = Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                workers,
                started: now(),
                finished: String::new(),
                config: INPUT.to_string(),
                outputs: Vec::new(),
                summary: BTreeMap::new(),
                integrator: Vec::new(),
            },
        };
        run.write_text(INPUT, &config.to_toml()?)?;
        Ok(run)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes a CSV with `header` and one record per row.
    pub fn write_csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).map_err(|e| CliError::csv(&p, e))?;
        w.write_record(header).map_err(|e| CliError::csv(&p, e))?;
        for row in rows {
            w.write_record(row).map_err(|e| CliError::csv(&p, e))?;
        }
        w.flush().map_err(|e| CliError::io(&p, e))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    pub fn summary(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.manifest.summary.insert(key.to_string(), value.into());
    }

    pub fn stats(&mut self, stats: IntegrationStats) {
        self.manifest.integrator.push(stats);
    }

    /// Writes the manifest last, once every output exists.
    pub fn finish(mut self) -> Result<PathBuf> {
        self.manifest.finished = now();
        self.manifest.outputs.push(MANIFEST.to_string());
        let text = toml::to_string(&self.manifest).map_err(|e| CliError::Serialize(e.to_string()))?;
        let p = self.path(MANIFEST);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
        Ok(self.dir)
    }
}

/// Shortest round-trip text of a float.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
