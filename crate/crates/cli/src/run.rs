//! Output directory, warnings and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub struct Run {
    out: PathBuf,
    command: &'static str,
    args: Vec<String>,
    config: Value,
    resolved: serde_json::Map<String, Value>,
    outputs: Vec<String>,
    warnings: Vec<String>,
    summary: Option<Value>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    /// Command line without the program name; `rerun` replays it.
    args: &'a [String],
    config: &'a Value,
    /// Defaults and expansions the flags left implicit.
    resolved: &'a serde_json::Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<&'a Value>,
    outputs: &'a [String],
    warnings: &'a [String],
}

pub const MANIFEST: &str = "manifest.json";

impl Run {
    pub fn new(
        out: &Path,
        command: &'static str,
        args: Vec<String>,
        config: &impl Serialize,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(out).map_err(|e| CliError::Data(format!("cannot create {}: {e}", out.display())))?;
        Ok(Run {
            out: out.to_path_buf(),
            command,
            args,
            config: serde_json::to_value(config).expect("config serializes"),
            resolved: serde_json::Map::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            summary: None,
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn warn(&mut self, message: String) {
        eprintln!("warning: {message}");
        self.warnings.push(message);
    }

    pub fn resolve(&mut self, key: &str, value: &impl Serialize) {
        self.resolved
            .insert(key.to_string(), serde_json::to_value(value).expect("value serializes"));
    }

    pub fn summarize(&mut self, summary: &impl Serialize) {
        self.summary = Some(serde_json::to_value(summary).expect("summary serializes"));
    }

    pub fn finish(self) -> Result<(), CliError> {
        let manifest = Manifest {
            tool: "reftrade",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            args: &self.args,
            config: &self.config,
            resolved: &self.resolved,
            summary: self.summary.as_ref(),
            outputs: &self.outputs,
            warnings: &self.warnings,
        };
        let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.out.join(MANIFEST);
        fs::write(&path, body).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
    }
}

/// File-name-safe form of a metric name.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}
