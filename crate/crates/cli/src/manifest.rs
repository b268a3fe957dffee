//! Run manifests. The digest covers everything that determines the analytical
//! output (command, parameters, seed, input digests, tool version), so it is
//! stable across reruns and can be embedded in the outputs themselves.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = concat!("anchored ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub input_digests: BTreeMap<String, String>,
    pub tool_version: String,
    pub digest: String,
    pub outputs: Vec<PathBuf>,
    pub wall_time_seconds: f64,
}

#[derive(Serialize)]
struct Digested<'a> {
    command: &'a str,
    parameters: &'a BTreeMap<String, Value>,
    seed: Option<u64>,
    input_digests: &'a BTreeMap<String, String>,
    tool_version: &'a str,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed,
            input_digests: BTreeMap::new(),
            tool_version: TOOL_VERSION.to_string(),
            digest: String::new(),
            outputs: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("plain data"),
        );
        self.refresh();
        self
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) -> &mut Self {
        self.input_digests
            .insert(path.display().to_string(), sha256_hex(bytes));
        self.refresh();
        self
    }

    fn refresh(&mut self) {
        let core = Digested {
            command: &self.command,
            parameters: &self.parameters,
            seed: self.seed,
            input_digests: &self.input_digests,
            tool_version: &self.tool_version,
        };
        self.digest = sha256_hex(&serde_json::to_vec(&core).expect("plain data"));
    }

    /// Header lines for `.wg` and CSV outputs.
    pub fn header(&self) -> Vec<String> {
        let mut lines = vec![format!("{} {}", self.tool_version, self.command)];
        for (k, v) in &self.parameters {
            lines.push(format!("{k}={v}"));
        }
        if let Some(seed) = self.seed {
            lines.push(format!("seed={seed}"));
        }
        lines.push(format!("manifest sha256={}", self.digest));
        lines
    }
}

/// Sidecar path for an output file: `<out>.manifest.json`.
pub fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
