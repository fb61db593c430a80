//! Run manifests: what went in, what came out, with content hashes.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct Entry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
pub struct Manifest {
    command: String,
    seed: Option<u64>,
    version: &'static str,
    format_version: u32,
    inputs: Vec<Entry>,
    configs: Vec<Entry>,
    outputs: Vec<Entry>,
    parameters: Map<String, Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn entry(path: &Path) -> Result<Entry> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {} for its hash", path.display()))?;
    Ok(Entry {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Manifest {
            command: command.into(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            format_version: trxcat::artifact::FORMAT_VERSION,
            inputs: Vec::new(),
            configs: Vec::new(),
            outputs: Vec::new(),
            parameters: Map::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        self.inputs.push(entry(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> Result<&mut Self> {
        self.outputs.push(entry(path)?);
        Ok(self)
    }

    /// A config file, or the shipped default (`name`, `text`) when no path was given.
    pub fn config(&mut self, source: &ConfigSource) -> &mut Self {
        self.configs.push(Entry {
            path: source.label.clone(),
            sha256: sha256_hex(source.text.as_bytes()),
        });
        self
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters
            .insert(key.into(), serde_json::to_value(value).expect("parameters serialize"));
        self
    }

    /// Write next to `main_output` as `<main_output>.manifest.json`, or as
    /// `manifest.json` inside it when it is a directory.
    pub fn write_for(&self, main_output: &Path) -> Result<PathBuf> {
        let path = if main_output.is_dir() {
            main_output.join("manifest.json")
        } else {
            let mut name = main_output.as_os_str().to_owned();
            name.push(".manifest.json");
            PathBuf::from(name)
        };
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Text of a config, and where it came from.
pub struct ConfigSource {
    pub label: String,
    pub text: String,
    /// Directory for resolving paths the config mentions.
    pub dir: Option<PathBuf>,
}

impl ConfigSource {
    pub fn load(path: Option<&Path>, default_name: &str, default_text: &str) -> Result<Self> {
        match path {
            Some(p) => Ok(ConfigSource {
                label: p.display().to_string(),
                text: std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
                dir: p.parent().map(Path::to_path_buf),
            }),
            None => Ok(ConfigSource {
                label: format!("<shipped>/{default_name}"),
                text: default_text.to_string(),
                dir: None,
            }),
        }
    }
}
