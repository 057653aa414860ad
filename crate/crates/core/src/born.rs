//! Outcome probabilities of multiport measurements on a pure state, and the
//! isotropic noise admixture.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::qstate::{check_permutation, tritter_unitary, PhaseSettings, PureState, Scenario};

/// Entries below `-NEGATIVE_TOL` are reported instead of clamped.
pub const NEGATIVE_TOL: f64 = 1e-12;
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Fraction `F` of white noise mixed into the state.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct NoiseFraction(f64);

impl NoiseFraction {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(invalid(format!("noise fraction {value} outside [0, 1]")));
        }
        Ok(Self(value))
    }

    /// Clamps into `[0, 1]`; for values coming out of a solver.
    pub(crate) fn saturating(value: f64) -> Self {
        Self(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Probabilities `P(a_1..a_N | s_1..s_N)`.
///
/// Flat layout: `combo * d^N + outcome`, where `combo` is the settings tuple
/// read as a base-`m` number and `outcome` the outcome tuple read in base
/// `d`, first party most significant in both.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTensor {
    scenario: Scenario,
    probs: Vec<f64>,
}

impl CorrelationTensor {
    /// Validates and clamps raw probabilities.
    pub fn from_probs(scenario: Scenario, mut probs: Vec<f64>) -> Result<Self> {
        let block = scenario.state_len();
        if probs.len() != scenario.marginal_rows() {
            return Err(invalid(format!(
                "tensor has {} entries, expected {}",
                probs.len(),
                scenario.marginal_rows()
            )));
        }
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -NEGATIVE_TOL {
                return Err(Error::InternalConsistency(format!("probability {p} at entry {i}")));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        for (combo, chunk) in probs.chunks(block).enumerate() {
            let total: f64 = chunk.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InternalConsistency(format!(
                    "setting combination {combo} sums to {total}"
                )));
            }
        }
        Ok(Self { scenario, probs })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index(&self, settings: &[usize], outcomes: &[usize]) -> usize {
        let sc = self.scenario;
        Scenario::undigits(settings, sc.settings_per_party()) * sc.state_len() + Scenario::undigits(outcomes, sc.dim())
    }

    pub fn get(&self, settings: &[usize], outcomes: &[usize]) -> f64 {
        self.probs[self.index(settings, outcomes)]
    }

    /// All outcome probabilities of one setting combination.
    pub fn block(&self, combo: usize) -> &[f64] {
        let len = self.scenario.state_len();
        &self.probs[combo * len..(combo + 1) * len]
    }

    /// Renames outcome `a` of `party` to `perm[a]`, for both settings.
    pub fn permute_outcomes(&self, party: usize, perm: &[usize]) -> Result<Self> {
        let sc = self.scenario;
        check_permutation(perm, sc.dim())?;
        self.remap(
            |settings, outcomes| {
                let mut o = outcomes.to_vec();
                o[party] = perm[outcomes[party]];
                (settings.to_vec(), o)
            },
            party,
        )
    }

    /// Exchanges the labels of the two settings of `party`.
    pub fn swap_settings(&self, party: usize) -> Result<Self> {
        self.remap(
            |settings, outcomes| {
                let mut s = settings.to_vec();
                s[party] = 1 - settings[party];
                (s, outcomes.to_vec())
            },
            party,
        )
    }

    /// Party `p` of the result is party `perm[p]` of `self`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let n = self.scenario.parties();
        check_permutation(perm, n)?;
        // old -> new: new position p holds old party perm[p]
        let mut inverse = vec![0; n];
        for (p, &src) in perm.iter().enumerate() {
            inverse[src] = p;
        }
        self.remap(
            |settings, outcomes| {
                let mut s = vec![0; n];
                let mut o = vec![0; n];
                for old in 0..n {
                    s[inverse[old]] = settings[old];
                    o[inverse[old]] = outcomes[old];
                }
                (s, o)
            },
            0,
        )
    }

    fn remap<F>(&self, f: F, party: usize) -> Result<Self>
    where
        F: Fn(&[usize], &[usize]) -> (Vec<usize>, Vec<usize>),
    {
        let sc = self.scenario;
        let n = sc.parties();
        if party >= n {
            return Err(invalid(format!("party {party} out of range")));
        }
        let mut out = vec![0.0; self.probs.len()];
        for combo in 0..sc.setting_combos() {
            let settings = Scenario::digits(combo, sc.settings_per_party(), n);
            for outcome in 0..sc.state_len() {
                let outcomes = Scenario::digits(outcome, sc.dim(), n);
                let (s, o) = f(&settings, &outcomes);
                out[self.index(&s, &o)] = self.probs[combo * sc.state_len() + outcome];
            }
        }
        Ok(Self {
            scenario: sc,
            probs: out,
        })
    }
}

/// Quantum probabilities for every setting combination, by contracting each
/// party's multiport unitary into the coefficient tensor.
pub fn correlation_tensor(state: &PureState, settings: &PhaseSettings) -> Result<CorrelationTensor> {
    let sc = state.scenario();
    if settings.scenario() != sc {
        return Err(invalid(format!(
            "state scenario {:?} does not match settings scenario {:?}",
            sc,
            settings.scenario()
        )));
    }
    let n = sc.parties();
    let d = sc.dim();
    let m = sc.settings_per_party();
    let len = sc.state_len();

    let unitaries = (0..n)
        .map(|p| {
            (0..m)
                .map(|s| tritter_unitary(d, settings.get(p, s)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let initial: Vec<Complex64> = state.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect();

    // Walk the setting tree party by party so combos sharing a prefix share work.
    let mut layer = vec![initial];
    for (p, party_unitaries) in unitaries.iter().enumerate() {
        let stride = d.pow((n - 1 - p) as u32);
        let mut next = Vec::with_capacity(layer.len() * m);
        for amps in &layer {
            for u in party_unitaries {
                next.push(apply_local(amps, u.entries(), d, stride));
            }
        }
        layer = next;
    }

    let mut probs = Vec::with_capacity(sc.marginal_rows());
    for amps in &layer {
        debug_assert_eq!(amps.len(), len);
        probs.extend(amps.iter().map(|z| z.norm_sqr()));
    }
    CorrelationTensor::from_probs(sc, probs)
}

/// Applies a `d x d` matrix to the tensor axis with the given stride.
fn apply_local(amps: &[Complex64], u: &[Complex64], d: usize, stride: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    let block = stride * d;
    for base in (0..amps.len()).step_by(block) {
        for inner in 0..stride {
            let at = |k: usize| base + k * stride + inner;
            for row in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for col in 0..d {
                    acc += u[row * d + col] * amps[at(col)];
                }
                out[at(row)] = acc;
            }
        }
    }
    out
}

/// Three-qutrit probability written as a double sum of cosines over pairs of
/// kets. Only used to cross-check [`correlation_tensor`].
pub fn closed_form_probability(
    state: &PureState,
    settings: &PhaseSettings,
    setting_combo: [usize; 3],
    outcomes: [usize; 3],
) -> Result<f64> {
    let sc = state.scenario();
    if sc.parties() != 3 || sc.dim() != 3 {
        return Err(Error::UnsupportedScenario(format!(
            "closed form needs 3 parties of dimension 3, got {} of {}",
            sc.parties(),
            sc.dim()
        )));
    }
    if settings.scenario() != sc {
        return Err(invalid("state and settings disagree on the scenario"));
    }
    if setting_combo.iter().any(|&s| s >= 2) || outcomes.iter().any(|&a| a >= 3) {
        return Err(invalid("setting or outcome label out of range"));
    }
    let [k, l, m] = setting_combo;
    let [a, b, c] = outcomes;
    let phi = settings.get(0, k).phases();
    let chi = settings.get(1, l).phases();
    let delta = settings.get(2, m).phases();
    let coeff = |g: usize, i: usize, j: usize| state.coeffs()[9 * g + 3 * i + j];

    let mut total = 1.0 / 27.0;
    for g in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                for gp in 0..3 {
                    for ip in 0..3 {
                        for jp in 0..3 {
                            if (g, i, j) == (gp, ip, jp) {
                                continue;
                            }
                            let diff = |x: usize, y: usize| x as f64 - y as f64;
                            let arg = TAU / 3.0
                                * (a as f64 * diff(g, gp) + b as f64 * diff(i, ip) + c as f64 * diff(j, jp))
                                + phi[g]
                                - phi[gp]
                                + chi[i]
                                - chi[ip]
                                + delta[j]
                                - delta[jp];
                            total += coeff(gp, ip, jp) * coeff(g, i, j) * arg.cos() / 27.0;
                        }
                    }
                }
            }
        }
    }
    Ok(total)
}

/// `(1 - F) p + F / d^N`, entrywise.
pub fn noisy_tensor(tensor: &CorrelationTensor, noise: NoiseFraction) -> CorrelationTensor {
    let f = noise.value();
    let floor = 1.0 / tensor.scenario.state_len() as f64;
    CorrelationTensor {
        scenario: tensor.scenario,
        probs: tensor.probs.iter().map(|p| (1.0 - f) * p + f * floor).collect(),
    }
}
