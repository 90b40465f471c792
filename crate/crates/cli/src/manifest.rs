//! Run manifest and atomic file output.
//!
//! A manifest carries the fully resolved configuration, the design report,
//! and the decay diagnostics. Everything needed to reproduce the run
//! bit-for-bit is inside; only the `timing` block varies between reruns.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub m: usize,
    pub n: usize,
    pub lambda: f64,
    pub shift: f64,
    pub c_lambda: f64,
    pub gamma: f64,
    pub mu: f64,
    pub sigma: f64,
    pub disturbance_bound: f64,
    pub alpha: f64,
    pub beta: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySection {
    pub fitted_rate: f64,
    pub fit_window: (f64, f64),
    pub window_len: usize,
    pub r_floor: f64,
    pub certificate_margin: f64,
    pub certificate_tol: f64,
    pub certificate_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ConfigFile,
    pub design: DesignReport,
    /// Present when the trajectory had a usable fit window.
    pub decay: Option<DecaySection>,
    /// Reason the fit was skipped, when `decay` is absent.
    pub no_fit_reason: Option<String>,
    /// Max ||y|| from the first sample with r < sigma onward, if any.
    pub floor_norm: Option<f64>,
    pub outputs: OutputPaths,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub trajectory_csv: String,
    pub field_csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_ms: u64,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))
    }
}

/// Writes through a temporary file in the target directory plus rename, so a
/// crash never leaves a partial file at the final path.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into()),
        std::process::id()
    ));
    let result = (|| -> Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
