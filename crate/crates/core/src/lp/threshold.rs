//! The local-realism threshold program.
//!
//! Variables are the atoms of a joint distribution over one outcome per
//! party per setting, followed by the noise fraction `F`. Each marginal
//! condition
//!
//! ```text
//! sum_{atoms consistent with (s, a)} P_LR + F * (P_QM(a|s) - 1/d^N) = P_QM(a|s)
//! ```
//!
//! is linear in `(P_LR, F)`; one extra row fixes `sum P_LR = 1`. Minimizing
//! `F` gives the smallest admixture of white noise for which a local model
//! exists.

use std::time::Instant;

use crate::born::{correlation_tensor, noisy_tensor, CorrelationTensor, NoiseFraction};
use crate::error::{invalid, Error, Result};
use crate::qstate::{PhaseSettings, PureState, Scenario};

use super::program::{dot, LinearProgram};
use super::simplex::{LpSolver, LpStatus, SimplexSolver};

/// Joint outcome distribution over all settings of all parties.
///
/// Atom index: the tuple `(a_0^0, a_0^1, a_1^0, a_1^1, ...)` (party-major,
/// setting-minor) read as a base-`d` number.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    scenario: Scenario,
    values: Vec<f64>,
}

impl JointDistribution {
    pub const TOL: f64 = 1e-9;

    pub fn new(scenario: Scenario, values: Vec<f64>) -> Result<Self> {
        if values.len() != scenario.joint_len() {
            return Err(invalid(format!(
                "joint distribution has {} atoms, expected {}",
                values.len(),
                scenario.joint_len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
            return Err(invalid(format!("atom {i} has negative weight {v}")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > Self::TOL {
            return Err(invalid(format!("atoms sum to {total}")));
        }
        Ok(Self { scenario, values })
    }

    /// Weight `1/d^N` on each atom where every party answers `t_p` for both
    /// settings; reproduces the fully mixed statistics.
    pub fn uniform_diagonal(scenario: Scenario) -> Self {
        let mut values = vec![0.0; scenario.joint_len()];
        let weight = 1.0 / scenario.state_len() as f64;
        let (n, m, d) = (scenario.parties(), scenario.settings_per_party(), scenario.dim());
        for outcome in 0..scenario.state_len() {
            let local = Scenario::digits(outcome, d, n);
            let digits: Vec<usize> = local.iter().flat_map(|&t| std::iter::repeat_n(t, m)).collect();
            values[Scenario::undigits(&digits, d)] = weight;
        }
        Self { scenario, values }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Marginal probabilities in [`CorrelationTensor`] layout.
    pub fn marginals(&self) -> Vec<f64> {
        let sc = self.scenario;
        let (n, m, d) = (sc.parties(), sc.settings_per_party(), sc.dim());
        let mut out = vec![0.0; sc.marginal_rows()];
        for (atom, &w) in self.values.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let digits = Scenario::digits(atom, d, n * m);
            for combo in 0..sc.setting_combos() {
                let settings = Scenario::digits(combo, m, n);
                let outcome = settings
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (p, &s)| acc * d + digits[p * m + s]);
                out[combo * sc.state_len() + outcome] += w;
            }
        }
        out
    }
}

/// Threshold noise fraction together with the primal and dual evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdResult {
    pub f_thr: NoiseFraction,
    /// Local model reproducing the noisy statistics at `f_thr`.
    pub witness: JointDistribution,
    /// Optimal row multipliers of the threshold program (marginal rows, then
    /// normalization); a Bell-type functional bounding `F` from below.
    pub certificate: Vec<f64>,
    pub iterations: usize,
    pub runtime_secs: f64,
}

/// Builds `min F` over `(P_LR, F)` for the given noiseless statistics.
pub fn build_threshold_lp(tensor: &CorrelationTensor) -> LinearProgram {
    let sc = tensor.scenario();
    let joint = sc.joint_len();
    let (n, m, d) = (sc.parties(), sc.settings_per_party(), sc.dim());
    let block = sc.state_len();
    let floor = 1.0 / block as f64;
    let f_col = joint;

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(joint / block + 1); sc.marginal_rows()];
    let combos: Vec<Vec<usize>> = (0..sc.setting_combos()).map(|c| Scenario::digits(c, m, n)).collect();
    for atom in 0..joint {
        let digits = Scenario::digits(atom, d, n * m);
        for (c, settings) in combos.iter().enumerate() {
            let outcome = settings
                .iter()
                .enumerate()
                .fold(0, |acc, (p, &s)| acc * d + digits[p * m + s]);
            rows[c * block + outcome].push((atom, 1.0));
        }
    }
    let mut rhs = Vec::with_capacity(rows.len() + 1);
    for (row, &p) in rows.iter_mut().zip(tensor.probs()) {
        let coef = p - floor;
        if coef != 0.0 {
            row.push((f_col, coef));
        }
        rhs.push(p);
    }
    rows.push((0..joint).map(|j| (j, 1.0)).collect());
    rhs.push(1.0);

    let mut objective = vec![0.0; joint + 1];
    objective[f_col] = 1.0;
    let bounds = vec![(0.0, 1.0); joint + 1];
    LinearProgram::new(objective, rows, rhs, bounds).expect("threshold program is well formed")
}

/// The vertex `(uniform diagonal distribution, F = 1)`.
pub fn analytic_start(scenario: Scenario) -> Vec<f64> {
    let mut x = JointDistribution::uniform_diagonal(scenario).values;
    x.push(1.0);
    x
}

fn witness_from(scenario: Scenario, primal: &[f64]) -> Result<JointDistribution> {
    let atoms = &primal[..scenario.joint_len()];
    if let Some(v) = atoms.iter().find(|v| **v < -JointDistribution::TOL) {
        return Err(Error::InternalConsistency(format!("solver returned atom weight {v}")));
    }
    JointDistribution::new(scenario, atoms.iter().map(|v| v.max(0.0)).collect())
}

/// Threshold for noiseless statistics `tensor`.
pub fn threshold_of_tensor(solver: &dyn LpSolver, tensor: &CorrelationTensor) -> Result<ThresholdResult> {
    let clock = Instant::now();
    let sc = tensor.scenario();
    let lp = build_threshold_lp(tensor);
    let start = analytic_start(sc);
    let sol = solver.solve(&lp, Some(&start));
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let f = sol.primal[sc.joint_len()];
    if !(-1e-9..=1.0 + 1e-9).contains(&f) {
        return Err(Error::InternalConsistency(format!("threshold {f} outside [0, 1]")));
    }
    Ok(ThresholdResult {
        f_thr: NoiseFraction::saturating(f),
        witness: witness_from(sc, &sol.primal)?,
        certificate: sol.dual,
        iterations: sol.iterations,
        runtime_secs: clock.elapsed().as_secs_f64(),
    })
}

pub fn threshold_with(solver: &dyn LpSolver, state: &PureState, settings: &PhaseSettings) -> Result<ThresholdResult> {
    threshold_of_tensor(solver, &correlation_tensor(state, settings)?)
}

/// Minimal noise fraction admitting a local-realistic model, solved with the
/// built-in simplex.
pub fn threshold(state: &PureState, settings: &PhaseSettings) -> Result<ThresholdResult> {
    threshold_with(&SimplexSolver::default(), state, settings)
}

/// Whether the statistics mixed with noise fraction `noise` admit a local
/// model, and one such model when they do.
pub fn feasible_at(tensor: &CorrelationTensor, noise: NoiseFraction) -> (bool, Option<JointDistribution>) {
    feasible_at_with(&SimplexSolver::default(), tensor, noise)
}

pub fn feasible_at_with(
    solver: &dyn LpSolver,
    tensor: &CorrelationTensor,
    noise: NoiseFraction,
) -> (bool, Option<JointDistribution>) {
    let sc = tensor.scenario();
    let lp = build_threshold_lp(tensor);
    let f = noise.value();
    let mut bounds = lp.bounds().to_vec();
    bounds[sc.joint_len()] = (f, f);
    let fixed = LinearProgram::new(vec![0.0; lp.num_vars()], lp.rows().to_vec(), lp.rhs().to_vec(), bounds)
        .expect("fixed-noise program is well formed");
    let start = (f == 1.0).then(|| analytic_start(sc));
    let sol = solver.solve(&fixed, start.as_deref());
    match sol.status {
        LpStatus::Optimal => (true, witness_from(sc, &sol.primal).ok()),
        _ => (false, None),
    }
}

/// Independent re-check of a threshold claim against the noiseless statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCheck {
    /// `y . b` for the claimed multipliers.
    pub dual_value: f64,
    /// `y . b` plus the contributions of variables with nonzero reduced
    /// cost at their bounds; a valid lower bound on `F` for any `y`.
    pub lower_bound: f64,
    /// Most negative reduced cost among the joint-distribution atoms
    /// (zero or positive for a proper certificate).
    pub worst_atom_reduced_cost: f64,
    /// Largest `|marginal(witness) - P_QM^F|` at the claimed threshold.
    pub witness_marginal_error: f64,
    /// Smallest atom weight of the witness.
    pub witness_min_weight: f64,
    /// `|sum of witness atoms - 1|`
    pub witness_normalization_error: f64,
}

impl CertificateCheck {
    pub fn run(tensor: &CorrelationTensor, f_thr: f64, witness: &[f64], certificate: &[f64]) -> Result<Self> {
        let sc = tensor.scenario();
        if witness.len() != sc.joint_len() {
            return Err(invalid(format!(
                "witness has {} atoms, expected {}",
                witness.len(),
                sc.joint_len()
            )));
        }
        if certificate.len() != sc.marginal_rows() + 1 {
            return Err(invalid(format!(
                "certificate has {} entries, expected {}",
                certificate.len(),
                sc.marginal_rows() + 1
            )));
        }
        let lp = build_threshold_lp(tensor);
        let dual_value = dot(lp.rhs(), certificate);
        let (lower_bound, _) = lp.dual_bound(certificate);
        let z = lp.reduced_costs(certificate);
        let worst_atom_reduced_cost = z[..sc.joint_len()].iter().copied().fold(f64::INFINITY, f64::min);

        let dist = JointDistribution {
            scenario: sc,
            values: witness.to_vec(),
        };
        let noisy = noisy_tensor(tensor, NoiseFraction::saturating(f_thr));
        let witness_marginal_error = dist
            .marginals()
            .iter()
            .zip(noisy.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let witness_min_weight = witness.iter().copied().fold(f64::INFINITY, f64::min);
        let witness_normalization_error = (witness.iter().sum::<f64>() - 1.0).abs();
        Ok(Self {
            dual_value,
            lower_bound,
            worst_atom_reduced_cost,
            witness_marginal_error,
            witness_min_weight,
            witness_normalization_error,
        })
    }

    pub fn for_result(tensor: &CorrelationTensor, result: &ThresholdResult) -> Result<Self> {
        Self::run(
            tensor,
            result.f_thr.value(),
            result.witness.values(),
            &result.certificate,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{ghz_state, product_state, reference_settings, ReferenceSettings};

    #[test]
    fn program_sizes() {
        let sc = Scenario::new(3, 3).unwrap();
        let t = correlation_tensor(&ghz_state(sc), &PhaseSettings::zeros(sc)).unwrap();
        let lp = build_threshold_lp(&t);
        assert_eq!(lp.num_vars(), 730);
        assert_eq!(lp.num_rows(), 217);
        // row (0,0,0 | a0,b0,c0): 27 atoms plus F
        for row in &lp.rows()[..27] {
            assert_eq!(row.iter().filter(|(j, _)| *j < 729).count(), 27);
        }

        let sc = Scenario::new(2, 2).unwrap();
        let t = correlation_tensor(&ghz_state(sc), &PhaseSettings::zeros(sc)).unwrap();
        let lp = build_threshold_lp(&t);
        // 2^4 + 1 variables, 4 * 4 + 1 rows
        assert_eq!((lp.num_vars(), lp.num_rows()), (17, 17));
    }

    #[test]
    fn uniform_diagonal_reproduces_white_noise() {
        let sc = Scenario::new(3, 3).unwrap();
        let d = JointDistribution::uniform_diagonal(sc);
        assert!(d.marginals().iter().all(|p| (p - 1.0 / 27.0).abs() < 1e-15));
        assert!(JointDistribution::new(sc, d.values().to_vec()).is_ok());
    }

    #[test]
    fn ghz_reference_threshold() {
        let sc = Scenario::new(3, 3).unwrap();
        let r = threshold(
            &ghz_state(sc),
            &reference_settings(ReferenceSettings::MaxEntangled3Qutrit),
        )
        .unwrap();
        assert!((r.f_thr.value() - 0.4).abs() < 1e-3, "{}", r.f_thr.value());
    }

    #[test]
    fn product_state_is_local() {
        let sc = Scenario::new(2, 3).unwrap();
        let v = vec![0.6, 0.0, 0.8];
        let s = product_state(sc, &[v.clone(), v]).unwrap();
        let settings = reference_like(sc);
        let r = threshold(&s, &settings).unwrap();
        assert!(r.f_thr.value().abs() < 1e-9);
    }

    fn reference_like(sc: Scenario) -> PhaseSettings {
        let table: Vec<Vec<Vec<f64>>> = (0..sc.parties())
            .map(|p| {
                (0..2)
                    .map(|s| {
                        (0..sc.dim())
                            .map(|j| 0.3 * (p + 1) as f64 * (j * (s + 1)) as f64)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        PhaseSettings::from_radians(sc, &table).unwrap()
    }

    #[test]
    fn fully_mixed_is_feasible() {
        let sc = Scenario::new(2, 2).unwrap();
        let t = correlation_tensor(&ghz_state(sc), &reference_like(sc)).unwrap();
        let (ok, witness) = feasible_at(&t, NoiseFraction::new(1.0).unwrap());
        assert!(ok);
        assert!(witness.is_some());
    }

    #[test]
    fn certificate_check_flags_tampering() {
        let sc = Scenario::new(2, 2).unwrap();
        let state = ghz_state(sc);
        let settings = PhaseSettings::from_radians(
            sc,
            &[
                vec![vec![0.0, 0.0], vec![0.0, std::f64::consts::FRAC_PI_2]],
                vec![
                    vec![0.0, std::f64::consts::FRAC_PI_4],
                    vec![0.0, -std::f64::consts::FRAC_PI_4],
                ],
            ],
        )
        .unwrap();
        let t = correlation_tensor(&state, &settings).unwrap();
        let r = threshold_of_tensor(&SimplexSolver::default(), &t).unwrap();
        let good = CertificateCheck::for_result(&t, &r).unwrap();
        assert!((good.dual_value - r.f_thr.value()).abs() < 1e-8);
        assert!(good.worst_atom_reduced_cost > -1e-9);
        assert!(good.witness_marginal_error < 1e-8);

        let bad = CertificateCheck::run(&t, r.f_thr.value() + 0.01, r.witness.values(), &r.certificate).unwrap();
        assert!(bad.witness_marginal_error > 1e-4);
    }
}
