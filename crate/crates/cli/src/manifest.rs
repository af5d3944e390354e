use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one command run, written next to its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, replayable as given.
    pub argv: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Every resolved option, defaults included.
    pub config: serde_json::Value,
    pub version: String,
    pub timings: Vec<StageTiming>,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            argv,
            inputs: Vec::new(),
            outputs: Vec::new(),
            config: serde_json::Value::Null,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timings: Vec::new(),
        }
    }

    /// Runs `f` and records its wall-clock time under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid manifest {}", path.display()))
    }
}

/// `<prefix>.<ext>`, keeping any dots already in the prefix.
pub fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
