//! Run manifests: a content-addressed record of every input file and the
//! full configuration of a run, written next to the outputs. Two runs with
//! identical manifests must produce byte-identical artifacts, so the
//! manifest never contains timestamps or host state.

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

#[derive(Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub config: serde_json::Value,
    /// Input path as given on the command line -> sha256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    /// File names written to the output directory, in write order.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &'static str, config: serde_json::Value) -> RunManifest {
        RunManifest { command, config, inputs: BTreeMap::new(), outputs: Vec::new() }
    }

    pub fn record_input(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes =
            fs::read(path).with_context(|| format!("reading input {}", path.display()))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn record_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    pub fn write(&self, out_dir: &Path) -> anyhow::Result<()> {
        let path = out_dir.join("run_manifest.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write;
        let _ = write!(out, "{b:02x}");
    }
    out
}
