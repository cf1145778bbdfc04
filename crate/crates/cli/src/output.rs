//! Output directory bookkeeping and the per-run manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    argv: &'a [String],
    parameters: &'a Value,
    resolved: &'a BTreeMap<String, Value>,
    inputs: &'a BTreeMap<String, String>,
    version: &'a str,
    seed: u64,
    outputs: &'a [String],
    wall_time_s: f64,
}

pub struct Run {
    dir: PathBuf,
    command: String,
    argv: Vec<String>,
    parameters: Value,
    seed: u64,
    started: Instant,
    inputs: BTreeMap<String, String>,
    resolved: BTreeMap<String, Value>,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(dir: &Path, command: &str, argv: Vec<String>, parameters: Value, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Run {
            dir: dir.to_owned(),
            command: command.to_owned(),
            argv,
            parameters,
            seed,
            started: Instant::now(),
            inputs: BTreeMap::new(),
            resolved: BTreeMap::new(),
            outputs: Vec::new(),
        })
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    /// Records a parameter value chosen at run time.
    pub fn resolve(&mut self, key: &str, value: impl Serialize) {
        self.resolved.insert(key.to_owned(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush()?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_owned());
        }
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write_with(name, |w| Ok(w.write_all(text.as_bytes())?))
    }

    pub fn finish(mut self) -> Result<()> {
        self.outputs.sort();
        let manifest = Manifest {
            command: &self.command,
            argv: &self.argv,
            parameters: &self.parameters,
            resolved: &self.resolved,
            inputs: &self.inputs,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            outputs: &self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(self.dir.join(MANIFEST), text + "\n")?;
        Ok(())
    }
}
