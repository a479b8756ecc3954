use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::io::write_json;

/// `manifest.json`: what produced an output directory. Everything except
/// `timing` is a function of the command line and the input file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Option<String>,
    /// Flags given on the command line, by long name.
    pub overrides: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub out_dir: String,
    pub version: String,
    pub timing: Timing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, input: Option<&Path>, overrides: BTreeMap<String, String>, seed: Option<u64>, out_dir: &Path) -> Self {
        RunManifest {
            command: command.to_string(),
            input: input.map(|p| p.display().to_string()),
            overrides,
            seed,
            out_dir: out_dir.display().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timing: Timing { wall_seconds: 0.0 },
        }
    }

    pub fn write(&mut self, out_dir: &Path, elapsed: Duration) -> CliResult<()> {
        self.timing.wall_seconds = elapsed.as_secs_f64();
        write_json(&out_dir.join("manifest.json"), self)
    }
}
