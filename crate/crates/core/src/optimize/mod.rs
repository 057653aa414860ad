//! Multi-start maximization of the threshold over phases and, optionally,
//! real state coefficients.

mod nelder_mead;
mod params;

pub use nelder_mead::{nelder_mead, NelderMeadResult};
pub use params::{phase_len, ParameterVector};

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::born::{correlation_tensor, NoiseFraction};
use crate::error::{invalid, Error, Result};
use crate::lp::{threshold_of_tensor, LpSolver, SimplexOptions, SimplexSolver};
use crate::qstate::{
    ghz_state, reference_optimal_state, reference_settings, PhaseSettings, PureState, ReferenceSettings, Scenario,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SearchMode {
    PhasesOnly,
    PhasesAndState,
}

impl SearchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchMode::PhasesOnly => "phases_only",
            SearchMode::PhasesAndState => "phases_and_state",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationConfig {
    /// Random restarts, in addition to any injected reference starts.
    pub restarts: usize,
    pub rng_seed: u64,
    pub max_evals_per_restart: usize,
    pub simplex_spread: f64,
    pub convergence_tol: f64,
    pub mode: SearchMode,
    /// Thread count for concurrent restarts; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Seed the search with the tabulated three-qutrit state and phase lists.
    pub inject_reference: bool,
    /// Tolerances of the inner threshold solves.
    pub lp_options: SimplexOptions,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            rng_seed: 0,
            max_evals_per_restart: 2000,
            simplex_spread: 0.3,
            convergence_tol: 1e-4,
            mode: SearchMode::PhasesOnly,
            workers: None,
            inject_reference: true,
            lp_options: SimplexOptions::default(),
        }
    }
}

impl OptimizationConfig {
    pub fn with_mode(mode: SearchMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_evals_per_restart == 0 {
            return Err(invalid("max_evals_per_restart must be positive"));
        }
        if !(self.simplex_spread.is_finite() && self.simplex_spread > 0.0) {
            return Err(invalid(format!(
                "simplex_spread {} must be positive",
                self.simplex_spread
            )));
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol < 1.0) {
            return Err(invalid(format!(
                "convergence_tol {} must lie in (0, 1)",
                self.convergence_tol
            )));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be positive"));
        }
        Ok(())
    }
}

/// Where a restart's starting point came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StartKind {
    /// Drawn from stream `stream` of the seeded generator.
    Random {
        stream: u64,
    },
    Reference(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartLog {
    pub index: usize,
    pub kind: StartKind,
    pub start_value: f64,
    pub best_value: f64,
    pub evals: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub best_f_thr: NoiseFraction,
    pub best_settings: PhaseSettings,
    pub best_state: PureState,
    pub evals: usize,
    pub per_restart_log: Vec<RestartLog>,
}

/// Threshold at the decoded point. Uses the encoded state when present,
/// otherwise `state`.
pub fn objective(params: &ParameterVector, scenario: Scenario, state: Option<&PureState>) -> Result<f64> {
    objective_with(&SimplexSolver::default(), params, scenario, state)
}

pub fn objective_with(
    solver: &dyn LpSolver,
    params: &ParameterVector,
    scenario: Scenario,
    state: Option<&PureState>,
) -> Result<f64> {
    let settings = params.decode_settings(scenario)?;
    let decoded = params.decode_state(scenario)?;
    let state = match (&decoded, state) {
        (Some(s), _) => s,
        (None, Some(s)) => s,
        (None, None) => return Err(invalid("no state to evaluate")),
    };
    if state.scenario() != scenario {
        return Err(invalid("state belongs to a different scenario"));
    }
    let tensor = correlation_tensor(state, &settings)?;
    Ok(threshold_of_tensor(solver, &tensor)?.f_thr.value())
}

/// Maximizes over the measurement phases for a fixed state.
pub fn optimize_phases(state: &PureState, config: &OptimizationConfig) -> Result<OptimizationResult> {
    if config.mode != SearchMode::PhasesOnly {
        return Err(invalid("optimize_phases requires mode phases_only"));
    }
    search(state.scenario(), Some(state), config)
}

/// Maximizes jointly over phases and real state coefficients.
pub fn optimize_state_and_phases(scenario: Scenario, config: &OptimizationConfig) -> Result<OptimizationResult> {
    if config.mode != SearchMode::PhasesAndState {
        return Err(invalid("optimize_state_and_phases requires mode phases_and_state"));
    }
    search(scenario, None, config)
}

struct Start {
    kind: StartKind,
    params: ParameterVector,
}

fn is_three_qutrit(sc: Scenario) -> bool {
    sc.parties() == 3 && sc.dim() == 3 && sc.settings_per_party() == 2
}

fn starts(scenario: Scenario, fixed: Option<&PureState>, config: &OptimizationConfig) -> Vec<Start> {
    let with_state = fixed.is_none();
    let mut out = Vec::with_capacity(config.restarts + 2);
    if config.inject_reference && is_three_qutrit(scenario) {
        let maxent = reference_settings(ReferenceSettings::MaxEntangled3Qutrit);
        let near = reference_settings(ReferenceSettings::NearOptimal3Qutrit);
        if with_state {
            let table = reference_optimal_state();
            let ghz = ghz_state(scenario);
            out.push(Start {
                kind: StartKind::Reference("tabulated state, near-optimal phases"),
                params: ParameterVector::encode(&near, Some(&table)),
            });
            out.push(Start {
                kind: StartKind::Reference("ghz state, maxent phases"),
                params: ParameterVector::encode(&maxent, Some(&ghz)),
            });
        } else {
            out.push(Start {
                kind: StartKind::Reference("maxent phases"),
                params: ParameterVector::encode(&maxent, None),
            });
            out.push(Start {
                kind: StartKind::Reference("near-optimal phases"),
                params: ParameterVector::encode(&near, None),
            });
        }
    }
    for r in 0..config.restarts {
        let stream = r as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        rng.set_stream(stream);
        let phase_params = (0..phase_len(scenario)).map(|_| rng.gen_range(0.0..TAU)).collect();
        let state_params = with_state.then(|| {
            let raw: Vec<f64> = (0..scenario.state_len()).map(|_| rng.sample(StandardNormal)).collect();
            let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
            raw.into_iter().map(|c| c / norm).collect()
        });
        out.push(Start {
            kind: StartKind::Random { stream },
            params: ParameterVector {
                phase_params,
                state_params,
            },
        });
    }
    out
}

struct RestartOutcome {
    log: RestartLog,
    best: Vec<f64>,
}

fn run_restart(
    index: usize,
    start: &Start,
    scenario: Scenario,
    fixed: Option<&PureState>,
    config: &OptimizationConfig,
) -> RestartOutcome {
    let solver = SimplexSolver::new(config.lp_options.clone());
    let with_state = start.params.state_params.is_some();
    let f = |x: &[f64]| -> f64 {
        ParameterVector::from_flat(scenario, with_state, x)
            .and_then(|p| objective_with(&solver, &p, scenario, fixed))
            .unwrap_or(f64::NEG_INFINITY)
    };

    let budget = config.max_evals_per_restart;
    let mut x = start.params.to_flat();
    let start_value = f(&x);
    let mut best = start_value;
    let mut evals = 1;
    // Restarting the simplex at the incumbent escapes premature collapse.
    while evals < budget {
        let r = nelder_mead(f, &x, config.simplex_spread, config.convergence_tol, budget - evals);
        evals += r.evals;
        let improved = r.value > best + config.convergence_tol;
        if r.value > best {
            best = r.value;
            x = r.best;
        }
        if !improved {
            break;
        }
    }
    RestartOutcome {
        log: RestartLog {
            index,
            kind: start.kind.clone(),
            start_value,
            best_value: best,
            evals,
        },
        best: x,
    }
}

fn search(scenario: Scenario, fixed: Option<&PureState>, config: &OptimizationConfig) -> Result<OptimizationResult> {
    config.validate()?;
    let starts = starts(scenario, fixed, config);
    if starts.is_empty() {
        return Err(invalid("no restarts requested"));
    }
    let work = || -> Vec<RestartOutcome> {
        starts
            .par_iter()
            .enumerate()
            .map(|(i, s)| run_restart(i, s, scenario, fixed, config))
            .collect()
    };
    let outcomes = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InternalConsistency(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    };

    let winner = outcomes.iter().fold(&outcomes[0], |acc, o| {
        if o.log.best_value > acc.log.best_value {
            o
        } else {
            acc
        }
    });
    if !winner.log.best_value.is_finite() {
        return Err(Error::InternalConsistency("every restart failed to evaluate".into()));
    }
    let params = ParameterVector::from_flat(scenario, fixed.is_none(), &winner.best)?;
    let best_settings = params.decode_settings(scenario)?;
    let best_state = match params.decode_state(scenario)? {
        Some(s) => s,
        None => fixed.expect("phases-only search has a fixed state").clone(),
    }
    .canonical_sign();
    let value = objective_with(
        &SimplexSolver::new(config.lp_options.clone()),
        &ParameterVector::encode(&best_settings, Some(&best_state)),
        scenario,
        None,
    )?;
    if (value - winner.log.best_value).abs() > 1e-6 {
        return Err(Error::InternalConsistency(format!(
            "re-evaluated optimum {value} differs from search value {}",
            winner.log.best_value
        )));
    }
    Ok(OptimizationResult {
        best_f_thr: NoiseFraction::saturating(value),
        best_settings,
        best_state,
        evals: outcomes.iter().map(|o| o.log.evals).sum(),
        per_restart_log: outcomes.into_iter().map(|o| o.log).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{product_state, PhaseVector};

    fn small(mode: SearchMode, restarts: usize, evals: usize) -> OptimizationConfig {
        OptimizationConfig {
            restarts,
            rng_seed: 7,
            max_evals_per_restart: evals,
            mode,
            workers: Some(1),
            ..OptimizationConfig::default()
        }
    }

    #[test]
    fn objective_at_reference_points() {
        let sc = Scenario::new(3, 3).unwrap();
        let maxent = reference_settings(ReferenceSettings::MaxEntangled3Qutrit);
        let v = objective(&ParameterVector::encode(&maxent, None), sc, Some(&ghz_state(sc))).unwrap();
        assert!((v - 0.4).abs() < 1e-3);

        let sc2 = Scenario::new(2, 2).unwrap();
        let prod = product_state(sc2, &[vec![1.0, 0.0], vec![0.6, 0.8]]).unwrap();
        let zeros = ParameterVector::encode(&PhaseSettings::zeros(sc2), None);
        assert!(objective(&zeros, sc2, Some(&prod)).unwrap().abs() < 1e-9);
        assert!(objective(&zeros, sc2, None).is_err());
    }

    #[test]
    fn objective_is_gauge_invariant() {
        let sc = Scenario::new(2, 3).unwrap();
        let state = ghz_state(sc);
        let base = [[[0.0, 0.4, 1.9], [0.0, 2.2, 0.3]], [[0.0, 1.1, 5.0], [0.0, 0.7, 2.6]]];
        let table = |shift: f64| -> Vec<Vec<Vec<f64>>> {
            base.iter()
                .map(|p| p.iter().map(|v| v.iter().map(|x| x + shift).collect()).collect())
                .collect()
        };
        let a = PhaseSettings::from_radians(sc, &table(0.0)).unwrap();
        let b = PhaseSettings::from_radians(sc, &table(1.234)).unwrap();
        let va = objective(&ParameterVector::encode(&a, None), sc, Some(&state)).unwrap();
        let vb = objective(&ParameterVector::encode(&b, None), sc, Some(&state)).unwrap();
        assert!((va - vb).abs() < 1e-9, "{va} vs {vb}");
        assert!(PhaseVector::new(vec![0.1, 0.2, 0.3])
            .unwrap()
            .canonical()
            .is_canonical());
    }

    #[test]
    fn search_is_deterministic_across_worker_counts() {
        let sc = Scenario::new(2, 2).unwrap();
        let state = ghz_state(sc);
        let mut cfg = small(SearchMode::PhasesOnly, 4, 150);
        let a = optimize_phases(&state, &cfg).unwrap();
        cfg.workers = Some(3);
        let b = optimize_phases(&state, &cfg).unwrap();
        assert_eq!(a, b);
        cfg.rng_seed = 8;
        let c = optimize_phases(&state, &cfg).unwrap();
        assert_ne!(a.per_restart_log, c.per_restart_log);
    }

    #[test]
    fn best_is_max_over_restarts_and_monotone() {
        let sc = Scenario::new(2, 2).unwrap();
        let state = ghz_state(sc);
        let mut prev = f64::NEG_INFINITY;
        for restarts in 1..=3 {
            let r = optimize_phases(&state, &small(SearchMode::PhasesOnly, restarts, 80)).unwrap();
            let max = r
                .per_restart_log
                .iter()
                .map(|l| l.best_value)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((r.best_f_thr.value() - max).abs() < 1e-6);
            assert!(r.best_f_thr.value() >= prev - 1e-12);
            assert!(r.per_restart_log.iter().all(|l| l.best_value >= l.start_value));
            prev = r.best_f_thr.value();
        }
    }

    #[test]
    fn rejects_mismatched_mode() {
        let sc = Scenario::new(2, 2).unwrap();
        assert!(optimize_phases(&ghz_state(sc), &small(SearchMode::PhasesAndState, 1, 10)).is_err());
        assert!(optimize_state_and_phases(sc, &small(SearchMode::PhasesOnly, 1, 10)).is_err());
        let mut bad = small(SearchMode::PhasesAndState, 1, 10);
        bad.convergence_tol = 2.0;
        assert!(optimize_state_and_phases(sc, &bad).is_err());
    }

    #[test]
    fn joint_search_returns_canonical_unit_state() {
        let sc = Scenario::new(2, 2).unwrap();
        let r = optimize_state_and_phases(sc, &small(SearchMode::PhasesAndState, 2, 120)).unwrap();
        assert!((r.best_state.norm() - 1.0).abs() < 1e-12);
        assert_eq!(r.best_state, r.best_state.canonical_sign());
        assert_eq!(r.per_restart_log.len(), 2);
    }
}
