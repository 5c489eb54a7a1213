//! Command-line surface and the library functions behind each subcommand.

mod args;
mod commands;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::event::{EventStream, SensorGeometry};
use crate::io::{decode, encode, FormatTag};
use crate::transform::sample::{CenterPolicy, PlanePolicy, SamplingConfig, Strategy, TauPolicy};
use crate::{Error, Result};

pub use args::{run, Cli};
pub use commands::{
    cmd_augment, cmd_perturb, cmd_repr, cmd_sweep, cmd_synth, parse_grid, render_perturb_grid, FileEntry,
    GridPoint, PerturbCell, PerturbReport, RunReport, SweepReport, SweepRow, SynthSummary,
};

pub const REPORT_SCHEMA: u32 = 1;
/// Environment variable capping the worker pool width.
pub const THREADS_ENV: &str = "EVT_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FILE_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub strategy: Strategy,
    pub theta_max: f64,
    pub tau: TauPolicy,
    pub center: CenterPolicy,
    pub plane: PlanePolicy,
    pub seed: u64,
    pub probability: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        let s = SamplingConfig::default();
        Self {
            strategy: s.strategy,
            theta_max: s.theta_max,
            tau: s.tau,
            center: s.center,
            plane: s.plane,
            seed: 0,
            probability: s.probability,
        }
    }
}

impl AugmentConfig {
    pub fn sampling(&self) -> SamplingConfig {
        SamplingConfig {
            strategy: self.strategy,
            theta_max: self.theta_max,
            tau: self.tau,
            center: self.center,
            plane: self.plane,
            probability: self.probability,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sampling()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }
}

/// How input files are interpreted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IoOptions {
    /// Overrides extension-based format inference.
    pub format: Option<FormatTag>,
    /// Sensor geometry for formats that do not store one.
    pub geometry: Option<SensorGeometry>,
}

impl IoOptions {
    pub fn format_for(&self, path: &Path) -> Result<FormatTag> {
        self.format
            .or_else(|| FormatTag::from_path(path))
            .ok_or_else(|| Error::Config(format!("cannot infer event format of {}", path.display())))
    }

    pub fn read(&self, path: &Path) -> Result<(EventStream, FormatTag)> {
        let format = self.format_for(path)?;
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok((decode(&bytes, format, self.geometry)?, format))
    }

    pub fn write(stream: &EventStream, format: FormatTag, path: &Path) -> Result<()> {
        let bytes = encode(stream, format)?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

/// Worker count: the request (or the machine's parallelism) capped by
/// `EVT_THREADS` when set.
pub fn worker_count(requested: Option<usize>) -> usize {
    let base = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    cap.map_or(base, |c| base.min(c)).max(1)
}

pub(crate) fn path_string(p: &Path) -> String {
    p.display().to_string()
}

pub(crate) fn output_path(out_dir: &Path, input: &Path) -> Option<PathBuf> {
    input.file_name().map(|name| out_dir.join(name))
}
