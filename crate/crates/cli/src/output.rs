//! Artifact schemas and writers. Every JSON artifact deserializes back into
//! the type that produced it.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rydberg_zeno::kinetics::DominanceReport;
use rydberg_zeno::zeno_cycle::{CycleRecord, ScalingFit, SweepPoint};
use rydberg_zeno::{KineticsState, Operator};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MODEL_FILE: &str = "model.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const CODING_FILE: &str = "coding_report.json";
pub const VERIFY_FILE: &str = "verify_report.json";
pub const TRACE_PROTECTED_FILE: &str = "trace_protected.csv";
pub const TRACE_UNPROTECTED_FILE: &str = "trace_unprotected.csv";
pub const SWEEP_FILE: &str = "sweep.json";
pub const KINETICS_FILE: &str = "kinetics.csv";
pub const ETA_FILE: &str = "eta.json";
pub const CONFIG_FILE: &str = "config.json";
pub const META_FILE: &str = "meta.json";

/// Relative Hermiticity tolerance of the model dump.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisLabel {
    pub j: String,
    pub m_j: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDump {
    pub name: String,
    /// rad/ns for the Hamiltonians; generators are dimensionless.
    pub unit: String,
    pub hermitian: bool,
    pub hermiticity_defect: f64,
    pub spectral_norm: f64,
    pub frobenius_norm: f64,
    /// Row-major, complex entries as `[re, im]`.
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixDump {
    pub fn new(name: &str, unit: &str, op: &Operator) -> Self {
        let m = op.matrix();
        let spectral_norm = op.spectral_norm();
        let defect = op.hermiticity_defect();
        MatrixDump {
            name: name.to_string(),
            unit: unit.to_string(),
            hermitian: defect <= HERMITIAN_TOL * spectral_norm.max(1.0),
            hermiticity_defect: defect,
            spectral_norm,
            frobenius_norm: op.frobenius_norm(),
            entries: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDump {
    pub dimension: usize,
    pub basis: Vec<BasisLabel>,
    pub code_indices: [usize; 2],
    pub matrices: Vec<MatrixDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingOutput {
    pub n_pulses: usize,
    /// ns
    pub total_duration: f64,
    pub residual: f64,
    pub error_names: Vec<String>,
    pub condition_norms: Vec<f64>,
    pub unitarity_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeOutput {
    pub converged: bool,
    pub tolerance: f64,
    /// Accepted restart; absent without convergence.
    pub restart: Option<usize>,
    pub restarts_evaluated: usize,
    pub iterations: usize,
    pub coding: CodingOutput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSeries {
    pub protected: bool,
    pub points: Vec<SweepPoint>,
    pub fit: Option<ScalingFit>,
    pub fit_refused: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOutput {
    pub n_cycles: usize,
    pub trajectories: usize,
    pub fine_structure_period: Option<f64>,
    pub series: Vec<SweepSeries>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticsRow {
    pub t: f64,
    pub rho_g1g1: f64,
    pub rho_g2g2: f64,
    pub rho_n1n1: f64,
    pub rho_n2n2: f64,
    pub rho_g1g2_re: f64,
    pub rho_g1g2_im: f64,
    pub rho_n1n2_re: f64,
    pub rho_n1n2_im: f64,
}

impl KineticsRow {
    pub fn new(t: f64, s: &KineticsState) -> Self {
        KineticsRow {
            t,
            rho_g1g1: s.rho_g1g1,
            rho_g2g2: s.rho_g2g2,
            rho_n1n1: s.rho_n1n1,
            rho_n2n2: s.rho_n2n2,
            rho_g1g2_re: s.rho_g1g2.re,
            rho_g1g2_im: s.rho_g1g2.im,
            rho_n1n2_re: s.rho_n1n2.re,
            rho_n1n2_im: s.rho_n1n2.im,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaOutput {
    /// Exact `Γ₁/Γ₂` as a reduced fraction.
    pub rate_ratio: String,
    pub rate_ratio_value: f64,
    pub eta: f64,
    pub one_minus_eta: f64,
    pub path_1_cg_product: f64,
    pub path_2_cg_product: f64,
    /// 1/ns
    pub gamma: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
    /// `|ρ_ν₁ν₂(t_max)| / |ρ_γ₁γ₂(0)|`.
    pub transferred_coherence: f64,
    pub max_ode_closed_form_distance: f64,
    pub dominance: DominanceReport<f64>,
}

/// Run metadata; the only artifact that differs between identical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub unix_time: u64,
    pub elapsed_s: f64,
}

impl Meta {
    pub fn new(command: &str, seed: u64, elapsed_s: f64) -> Self {
        let unix_time = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Meta {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            unix_time,
            elapsed_s,
        }
    }
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(e) => CliError::io(&path, e),
            other => CliError::io(&path, std::io::Error::other(format!("{other:?}"))),
        };
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        for r in rows {
            w.serialize(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn read_trace(path: &Path) -> Result<Vec<CycleRecord>, CliError> {
    read_csv(path)
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    r.deserialize().collect::<Result<_, _>>().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
