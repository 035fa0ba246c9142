// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::time::Instant;

use bsdsynth::LearnConfig;
use serde::Serialize;

/// Record of one run, written next to its outputs.
///
/// Everything except `elapsed_ms` is determined by the command line, so two
/// runs with equal `run` sections write byte-identical outputs.
#[derive(Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub run: RunSpec,
    pub exit_status: u8,
    pub elapsed_ms: u128,
}

#[derive(Serialize)]
pub struct RunSpec {
    pub subcommand: String,
    pub args: serde_json::Value,
    pub config: Option<LearnConfig>,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

pub struct Recorder {
    start: Instant,
    spec: RunSpec,
}

impl Recorder {
    pub fn new(subcommand: &str, args: &impl Serialize) -> Self {
        Recorder {
            start: Instant::now(),
            spec: RunSpec {
                subcommand: subcommand.into(),
                args: serde_json::to_value(args).unwrap_or(serde_json::Value::Null),
                config: None,
                seed: None,
                inputs: Vec::new(),
                outputs: Vec::new(),
            },
        }
    }

    pub fn config(&mut self, cfg: &LearnConfig) {
        self.spec.seed = Some(cfg.seed);
        self.spec.config = Some(cfg.clone());
    }

    pub fn input(&mut self, p: &Path) {
        self.spec.inputs.push(p.to_path_buf());
    }

    pub fn output(&mut self, p: &Path) {
        self.spec.outputs.push(p.to_path_buf());
    }

    /// Writes `path` with the run's exit status.
    pub fn finish(self, path: &Path, exit_status: u8) -> std::io::Result<()> {
        let m = RunManifest {
            tool: "bsdsynth".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            run: self.spec,
            exit_status,
            elapsed_ms: self.start.elapsed().as_millis(),
        };
        let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text)
    }
}

/// `<prefix><suffix>`, e.g. `adder` + `.bsd.json`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
