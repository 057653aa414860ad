//! Noise thresholds for local-realistic descriptions of multiparty qudit
//! correlations measured with unbiased multiport beamsplitters.
//!
//! The pipeline is: a real pure state and a table of beam phases
//! ([`qstate`]) give outcome probabilities for every setting combination
//! ([`born`]); mixing in white noise and asking for a joint distribution
//! that reproduces them as marginals is a linear program whose optimum is
//! the threshold `F_thr` ([`lp`]); [`optimize`] searches phases and states
//! for the largest threshold.

pub mod born;
pub mod error;
pub mod lp;
pub mod optimize;
pub mod qstate;

pub use born::{closed_form_probability, correlation_tensor, noisy_tensor, CorrelationTensor, NoiseFraction};
pub use error::{Error, Result};
pub use lp::{
    build_threshold_lp, feasible_at, solve_lp, threshold, threshold_with, JointDistribution, LinearProgram, LpSolution,
    LpSolver, LpStatus, SimplexSolver, ThresholdResult,
};
pub use optimize::{
    optimize_phases, optimize_state_and_phases, OptimizationConfig, OptimizationResult, ParameterVector, RestartLog,
    SearchMode, StartKind,
};
pub use qstate::{
    ghz_state, product_state, reference_optimal_state, reference_settings, tritter_unitary, PhaseSettings, PhaseVector,
    PureState, ReferenceSettings, Scenario, UnitaryMatrix,
};
