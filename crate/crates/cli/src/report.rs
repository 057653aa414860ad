//! JSON run reports.

use nonlocality_core::lp::CertificateCheck;
use nonlocality_core::{
    CorrelationTensor, OptimizationResult, PhaseSettings, PureState, RestartLog, StartKind, ThresholdResult,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::scenario::ScenarioFile;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: Tool,
    pub command: CommandEcho,
    pub scenario: ScenarioEcho,
    pub tolerances: Tolerances,
    pub result: ThresholdSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_query: Option<NoiseQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSection>,
    pub wall_clock_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Tool {
    pub fn current() -> Self {
        Self {
            name: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub argv: Vec<String>,
    pub subcommand: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEcho {
    pub parties: usize,
    pub dim: usize,
    pub settings_per_party: usize,
    /// The scenario file as parsed.
    pub file: ScenarioFile,
    pub file_sha256: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub feasibility: f64,
    pub optimality: f64,
}

/// The evaluated point and the evidence for its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSection {
    pub f_thr: f64,
    pub iterations: usize,
    pub state: Vec<f64>,
    /// Radians, parties x settings x beams, first beam of each setting zero.
    pub settings: Vec<Vec<Vec<f64>>>,
    pub witness: Vec<f64>,
    pub witness_sha256: String,
    /// Multipliers of the marginal rows followed by the normalization row.
    pub certificate: Vec<f64>,
    pub certificate_sha256: String,
    pub check: CheckSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSection {
    pub dual_value: f64,
    pub lower_bound: f64,
    pub worst_atom_reduced_cost: f64,
    pub witness_marginal_error: f64,
    pub witness_min_weight: f64,
    pub witness_normalization_error: f64,
}

impl From<CertificateCheck> for CheckSection {
    fn from(c: CertificateCheck) -> Self {
        Self {
            dual_value: c.dual_value,
            lower_bound: c.lower_bound,
            worst_atom_reduced_cost: c.worst_atom_reduced_cost,
            witness_marginal_error: c.witness_marginal_error,
            witness_min_weight: c.witness_min_weight,
            witness_normalization_error: c.witness_normalization_error,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseQuery {
    pub noise: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSection {
    pub mode: String,
    pub restarts: usize,
    pub rng_seed: u64,
    pub max_evals_per_restart: usize,
    pub simplex_spread: f64,
    pub convergence_tol: f64,
    pub workers: Option<usize>,
    pub best_f_thr: f64,
    pub evals: usize,
    pub log: Vec<RestartEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartEntry {
    pub index: usize,
    /// `random` or `reference`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Absent when the objective could not be evaluated.
    pub start_value: Option<f64>,
    pub best_value: Option<f64>,
    pub evals: usize,
}

impl From<&RestartLog> for RestartEntry {
    fn from(l: &RestartLog) -> Self {
        let (kind, stream, label) = match &l.kind {
            StartKind::Random { stream } => ("random", Some(*stream), None),
            StartKind::Reference(name) => ("reference", None, Some(name.to_string())),
        };
        Self {
            index: l.index,
            kind: kind.into(),
            stream,
            label,
            start_value: l.start_value.is_finite().then_some(l.start_value),
            best_value: l.best_value.is_finite().then_some(l.best_value),
            evals: l.evals,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a float vector over its little-endian IEEE-754 encoding.
pub fn digest_f64s(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

impl ThresholdSection {
    pub fn new(
        state: &PureState,
        settings: &PhaseSettings,
        tensor: &CorrelationTensor,
        result: &ThresholdResult,
    ) -> nonlocality_core::Result<Self> {
        let check = CertificateCheck::for_result(tensor, result)?;
        let witness = result.witness.values().to_vec();
        Ok(Self {
            f_thr: result.f_thr.value(),
            iterations: result.iterations,
            state: state.coeffs().to_vec(),
            settings: settings.to_radians(),
            witness_sha256: digest_f64s(&witness),
            witness,
            certificate_sha256: digest_f64s(&result.certificate),
            certificate: result.certificate.clone(),
            check: check.into(),
        })
    }
}

impl OptimizerSection {
    pub fn new(config: &nonlocality_core::OptimizationConfig, result: &OptimizationResult) -> Self {
        Self {
            mode: config.mode.as_str().into(),
            restarts: config.restarts,
            rng_seed: config.rng_seed,
            max_evals_per_restart: config.max_evals_per_restart,
            simplex_spread: config.simplex_spread,
            convergence_tol: config.convergence_tol,
            workers: config.workers,
            best_f_thr: result.best_f_thr.value(),
            evals: result.evals,
            log: result.per_restart_log.iter().map(RestartEntry::from).collect(),
        }
    }
}
