use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use blocktri::almostnormal::ConicCoefficients;
use blocktri::generators::Family;
use blocktri::BreakdownEvent;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Relative residuals of a run. Quantities that a command does not compute
/// are reported as 0.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖U^H U − I‖_F / √n`.
    pub unitarity: f64,
    /// `‖U^H A_H U − T‖_F / ‖A‖_F`.
    pub similarity: f64,
    /// Off-profile part of `U^H A U` over `‖A‖_F`.
    pub off_profile: f64,
    /// Commutator certificate `‖Δ(A) − (CA − AC)‖_F / max(1, ‖A‖_F²)`, or the
    /// conic fit residual for curve instances.
    pub certificate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub tool_version: String,
    pub command: Vec<String>,
    pub input_digests: BTreeMap<String, String>,
    pub block_sizes: Vec<usize>,
    pub residuals: Residuals,
    pub breakdown_events: Vec<BreakdownEvent>,
    pub elapsed_ms: f64,
    pub tol: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl RunReport {
    pub fn new(tol: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            tool_version: TOOL_VERSION.into(),
            command: std::env::args().collect(),
            input_digests: BTreeMap::new(),
            block_sizes: Vec::new(),
            residuals: Residuals::default(),
            breakdown_events: Vec::new(),
            elapsed_ms: 0.0,
            tol,
            passed: false,
            details: BTreeMap::new(),
        }
    }

    pub fn digest(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.input_digests
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(
            key.into(),
            serde_json::to_value(value).expect("report details serialize"),
        );
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Names of the files written by `generate`, relative to the manifest.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ManifestFiles {
    pub matrix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<String>,
    /// `[u, v]` for curve instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<String>,
    /// Explicit starting block (Fourier sum).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: String,
    pub tool_version: String,
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub files: ManifestFiles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conic: Option<ConicCoefficients>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<[f64; 2]>>,
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}
