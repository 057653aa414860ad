//! Scenarios, real pure states and unbiased multiport observables.
//!
//! Everything is 0-based: kets `|0>..|d-1>`, outcomes `0..d`, settings
//! `0..m`. A ket `|g i j>` of three parties sits at flat index
//! `g*d^2 + i*d + j` (first party slowest). Published tables that label
//! kets and outcomes `1..d` map onto this by subtracting one.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub const NORM_TOL: f64 = 1e-12;

/// Number of parties, local dimension and settings per party.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scenario {
    parties: usize,
    dim: usize,
    settings: usize,
}

impl Scenario {
    /// Two settings per party; the only supported choice.
    pub fn new(parties: usize, dim: usize) -> Result<Self> {
        Self::with_settings(parties, dim, 2)
    }

    pub fn with_settings(parties: usize, dim: usize, settings: usize) -> Result<Self> {
        if parties < 2 {
            return Err(invalid(format!("need at least 2 parties, got {parties}")));
        }
        if dim < 2 {
            return Err(invalid(format!("need local dimension >= 2, got {dim}")));
        }
        if settings != 2 {
            return Err(Error::UnsupportedScenario(format!(
                "{settings} settings per party (only 2 are supported)"
            )));
        }
        // d^(mN) must stay addressable.
        let joint_bits = (dim as f64).log2() * (settings * parties) as f64;
        if joint_bits > 40.0 {
            return Err(Error::UnsupportedScenario(format!(
                "{parties} parties of dimension {dim} give a joint distribution too large to enumerate"
            )));
        }
        Ok(Self { parties, dim, settings })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn settings_per_party(&self) -> usize {
        self.settings
    }

    /// `d^N`: kets of the product basis, also outcome tuples per setting combination.
    pub fn state_len(&self) -> usize {
        self.dim.pow(self.parties as u32)
    }

    /// `m^N`
    pub fn setting_combos(&self) -> usize {
        self.settings.pow(self.parties as u32)
    }

    /// `d^(mN)`: atoms of a local-realistic joint distribution.
    pub fn joint_len(&self) -> usize {
        self.dim.pow((self.settings * self.parties) as u32)
    }

    /// `m^N * d^N`
    pub fn marginal_rows(&self) -> usize {
        self.setting_combos() * self.state_len()
    }

    /// Digits of `index` in base `radix`, `len` of them, most significant first.
    pub(crate) fn digits(mut index: usize, radix: usize, len: usize) -> Vec<usize> {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = index % radix;
            index /= radix;
        }
        out
    }

    pub(crate) fn undigits(digits: &[usize], radix: usize) -> usize {
        digits.iter().fold(0, |acc, &x| acc * radix + x)
    }
}

/// Real pure state over the `N`-party product basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    scenario: Scenario,
    coeffs: Vec<f64>,
}

impl PureState {
    pub fn new(scenario: Scenario, coeffs: Vec<f64>) -> Result<Self> {
        check_len(&scenario, &coeffs)?;
        let norm = euclidean_norm(&coeffs);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { scenario, coeffs })
    }

    /// Projects `coeffs` onto the unit sphere, returning the state and the
    /// factor that was applied.
    pub fn normalized(scenario: Scenario, coeffs: Vec<f64>) -> Result<(Self, f64)> {
        check_len(&scenario, &coeffs)?;
        let norm = euclidean_norm(&coeffs);
        if !norm.is_finite() || norm < 1e-300 {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        let factor = 1.0 / norm;
        let coeffs = coeffs.into_iter().map(|c| c * factor).collect();
        Ok((Self { scenario, coeffs }, factor))
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        euclidean_norm(&self.coeffs)
    }

    /// `c` and `-c` describe the same state; pick the sign that makes the
    /// largest-magnitude coefficient positive (first one on ties).
    pub fn canonical_sign(&self) -> Self {
        let mut best = 0usize;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.abs() > self.coeffs[best].abs() {
                best = i;
            }
        }
        let sign = if self.coeffs[best] < 0.0 { -1.0 } else { 1.0 };
        Self {
            scenario: self.scenario,
            coeffs: self.coeffs.iter().map(|c| c * sign).collect(),
        }
    }

    /// Reorders the tensor factors: party `p` of the result is party `perm[p]` of `self`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let n = self.scenario.parties;
        check_permutation(perm, n)?;
        let d = self.scenario.dim;
        let mut out = vec![0.0; self.coeffs.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let new_digits = Scenario::digits(idx, d, n);
            let mut old_digits = vec![0; n];
            for (p, &src) in perm.iter().enumerate() {
                old_digits[src] = new_digits[p];
            }
            *slot = self.coeffs[Scenario::undigits(&old_digits, d)];
        }
        Ok(Self {
            scenario: self.scenario,
            coeffs: out,
        })
    }
}

fn check_len(scenario: &Scenario, coeffs: &[f64]) -> Result<()> {
    if coeffs.len() != scenario.state_len() {
        return Err(invalid(format!(
            "state has {} coefficients, scenario needs {}",
            coeffs.len(),
            scenario.state_len()
        )));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(invalid("state coefficients must be finite"));
    }
    Ok(())
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(invalid(format!("permutation has length {}, expected {n}", perm.len())));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(invalid(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Phases (radians) applied to the `d` input beams of one multiport.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector {
    phases: Vec<f64>,
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(invalid("phase vector is empty"));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(invalid("phases must be finite"));
        }
        Ok(Self { phases })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { phases: vec![0.0; dim] }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Gauge-fixed form: `phases[0] = 0`, everything wrapped into `[0, 2pi)`.
    pub fn canonical(&self) -> Self {
        let offset = self.phases[0];
        Self {
            phases: self.phases.iter().map(|p| wrap_angle(p - offset)).collect(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.phases[0] == 0.0 && self.phases.iter().all(|p| (0.0..TAU).contains(p))
    }
}

pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// One canonical [`PhaseVector`] per party and setting.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSettings {
    scenario: Scenario,
    // party-major: table[p * m + s]
    table: Vec<PhaseVector>,
}

impl PhaseSettings {
    /// `table[p][s]` holds the phases of party `p`, setting `s`.
    pub fn new(scenario: Scenario, table: Vec<Vec<PhaseVector>>) -> Result<Self> {
        if table.len() != scenario.parties {
            return Err(invalid(format!(
                "phase table has {} parties, scenario has {}",
                table.len(),
                scenario.parties
            )));
        }
        let mut flat = Vec::with_capacity(scenario.parties * scenario.settings);
        for (p, row) in table.into_iter().enumerate() {
            if row.len() != scenario.settings {
                return Err(invalid(format!(
                    "party {p} has {} settings, expected {}",
                    row.len(),
                    scenario.settings
                )));
            }
            for (s, pv) in row.into_iter().enumerate() {
                if pv.len() != scenario.dim {
                    return Err(invalid(format!(
                        "party {p} setting {s} has {} phases, expected {}",
                        pv.len(),
                        scenario.dim
                    )));
                }
                flat.push(pv.canonical());
            }
        }
        Ok(Self { scenario, table: flat })
    }

    pub fn from_radians(scenario: Scenario, table: &[Vec<Vec<f64>>]) -> Result<Self> {
        let rows = table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| PhaseVector::new(v.clone()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(scenario, rows)
    }

    pub fn zeros(scenario: Scenario) -> Self {
        Self {
            scenario,
            table: vec![PhaseVector::zeros(scenario.dim); scenario.parties * scenario.settings],
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn get(&self, party: usize, setting: usize) -> &PhaseVector {
        &self.table[party * self.scenario.settings + setting]
    }

    /// Nested `[party][setting][beam]` radians.
    pub fn to_radians(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.scenario.parties)
            .map(|p| {
                (0..self.scenario.settings)
                    .map(|s| self.get(p, s).phases().to_vec())
                    .collect()
            })
            .collect()
    }

    /// Settings matching [`PureState::permute_parties`] with the same `perm`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.scenario.parties)?;
        let m = self.scenario.settings;
        let mut table = Vec::with_capacity(self.table.len());
        for &src in perm {
            table.extend_from_slice(&self.table[src * m..(src + 1) * m]);
        }
        Ok(Self {
            scenario: self.scenario,
            table,
        })
    }

    /// Exchanges the two settings of one party.
    pub fn swap_settings(&self, party: usize) -> Self {
        let m = self.scenario.settings;
        let mut table = self.table.clone();
        table[party * m..(party + 1) * m].reverse();
        Self {
            scenario: self.scenario,
            table,
        }
    }
}

/// Dense `d x d` complex matrix, row-major (`entries[row * d + col]`).
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Largest elementwise deviation of `U U^dagger` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.get(r, k) * self.get(c, k).conj();
                }
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// Largest deviation of `|U_{rc}|^2` from `1/d`.
    pub fn bias(&self) -> f64 {
        let target = 1.0 / self.dim as f64;
        self.entries
            .iter()
            .map(|z| (z.norm_sqr() - target).abs())
            .fold(0.0, f64::max)
    }
}

/// Unbiased symmetric multiport with input phases:
/// `U[j'][j] = exp(2 pi i j' j / d) * exp(i phases[j]) / sqrt(d)`.
pub fn tritter_unitary(dim: usize, phases: &PhaseVector) -> Result<UnitaryMatrix> {
    if dim < 2 {
        return Err(invalid(format!("multiport dimension must be >= 2, got {dim}")));
    }
    if phases.len() != dim {
        return Err(invalid(format!("{} phases given for a {dim}-port", phases.len())));
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let mut entries = Vec::with_capacity(dim * dim);
    for out in 0..dim {
        for inp in 0..dim {
            let k = (out * inp) % dim;
            let angle = TAU * k as f64 / dim as f64 + phases.phases()[inp];
            entries.push(Complex64::from_polar(scale, angle));
        }
    }
    Ok(UnitaryMatrix { dim, entries })
}

/// `1/sqrt(d)` on every ket with all parties in the same basis state.
pub fn ghz_state(scenario: Scenario) -> PureState {
    let d = scenario.dim;
    let amp = 1.0 / (d as f64).sqrt();
    let mut coeffs = vec![0.0; scenario.state_len()];
    for k in 0..d {
        let idx = Scenario::undigits(&vec![k; scenario.parties], d);
        coeffs[idx] = amp;
    }
    PureState { scenario, coeffs }
}

/// Tensor product of real unit vectors, one per party.
pub fn product_state(scenario: Scenario, local_vectors: &[Vec<f64>]) -> Result<PureState> {
    if local_vectors.len() != scenario.parties {
        return Err(invalid(format!(
            "{} local vectors for {} parties",
            local_vectors.len(),
            scenario.parties
        )));
    }
    for (p, v) in local_vectors.iter().enumerate() {
        if v.len() != scenario.dim {
            return Err(invalid(format!(
                "local vector of party {p} has length {}, expected {}",
                v.len(),
                scenario.dim
            )));
        }
        let norm = euclidean_norm(v);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!(
                "local vector of party {p} has norm {norm}, expected 1"
            )));
        }
    }
    let mut coeffs = vec![1.0];
    for v in local_vectors {
        coeffs = coeffs.iter().flat_map(|&c| v.iter().map(move |&x| c * x)).collect();
    }
    PureState::new(scenario, coeffs)
}

/// Three-qutrit state with a high noise threshold, in ket order
/// `|000>, |001>, ..., |222>`, three decimals, not normalized.
pub const REFERENCE_STATE_TABLE: [f64; 27] = [
    0.186, 0.076, 0.230, 0.218, 0.046, 0.112, 0.172, 0.033, 0.247, //
    0.216, 0.050, 0.110, 0.160, 0.049, 0.236, 0.204, 0.055, 0.235, //
    -0.078, 0.406, -0.029, -0.023, 0.385, 0.035, -0.123, 0.393, -0.128,
];

/// [`REFERENCE_STATE_TABLE`] projected to unit norm.
pub fn reference_optimal_state() -> PureState {
    reference_optimal_state_with_factor().0
}

/// Same as [`reference_optimal_state`], with the renormalization factor applied.
pub fn reference_optimal_state_with_factor() -> (PureState, f64) {
    let scenario = Scenario::new(3, 3).expect("3x3 scenario is valid");
    PureState::normalized(scenario, REFERENCE_STATE_TABLE.to_vec()).expect("tabulated state is nonzero")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceSettings {
    /// Optimal phases for the three-qutrit GHZ state.
    MaxEntangled3Qutrit,
    /// Phases close to the optimum for the tabulated non-maximally entangled state.
    NearOptimal3Qutrit,
}

/// Published phase tables in units of pi, `[party][setting][beam]`.
fn reference_table_pi(which: ReferenceSettings) -> [[[f64; 3]; 2]; 3] {
    match which {
        ReferenceSettings::MaxEntangled3Qutrit => [
            [[0.0, 0.0, 2.0 / 3.0], [0.0, 0.0, 0.0]],
            [[0.0, 0.0, 1.0], [0.0, 0.0, 5.0 / 3.0]],
            [[0.0, 1.0 / 3.0, 0.0], [0.0, 1.0, 0.0]],
        ],
        ReferenceSettings::NearOptimal3Qutrit => [
            [[0.0, 2.0 / 3.0, -5.0 / 9.0], [0.0, 2.0 / 3.0, 0.0]],
            [[0.0, 17.0 / 18.0, -1.0 / 18.0], [0.0, 0.0, 0.0]],
            [[0.0, 1.0, 23.0 / 36.0], [0.0, 7.0 / 36.0, -2.0 / 3.0]],
        ],
    }
}

pub fn reference_settings(which: ReferenceSettings) -> PhaseSettings {
    let scenario = Scenario::new(3, 3).expect("3x3 scenario is valid");
    let table: Vec<Vec<Vec<f64>>> = reference_table_pi(which)
        .iter()
        .map(|party| party.iter().map(|v| v.iter().map(|x| x * PI).collect()).collect())
        .collect();
    PhaseSettings::from_radians(scenario, &table).expect("reference table is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn scenario_sizes() {
        let s = Scenario::new(3, 3).unwrap();
        assert_eq!(s.state_len(), 27);
        assert_eq!(s.joint_len(), 729);
        assert_eq!(s.marginal_rows(), 216);
        let s = Scenario::new(2, 2).unwrap();
        assert_eq!((s.state_len(), s.joint_len(), s.marginal_rows()), (4, 16, 16));
        assert!(Scenario::new(1, 3).is_err());
        assert!(Scenario::new(3, 1).is_err());
        assert!(matches!(
            Scenario::with_settings(3, 3, 3),
            Err(Error::UnsupportedScenario(_))
        ));
    }

    #[test]
    fn zero_phase_tritter_is_dft() {
        let u = tritter_unitary(3, &PhaseVector::zeros(3)).unwrap();
        let s = 1.0 / 3f64.sqrt();
        for r in 0..3 {
            for c in 0..3 {
                let expect = Complex64::from_polar(s, TAU * (r * c) as f64 / 3.0);
                assert!((u.get(r, c) - expect).norm() < 1e-15);
            }
        }
        let u2 = tritter_unitary(2, &PhaseVector::zeros(2)).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let expect = [h, h, h, -h];
        for (z, e) in u2.entries().iter().zip(expect) {
            assert!((z - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn phase_multiplies_one_column() {
        let zero = tritter_unitary(3, &PhaseVector::zeros(3)).unwrap();
        let pv = PhaseVector::new(vec![0.0, TAU / 3.0, 0.0]).unwrap();
        let u = tritter_unitary(3, &pv).unwrap();
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        for r in 0..3 {
            for c in 0..3 {
                let expect = if c == 1 { zero.get(r, c) * w } else { zero.get(r, c) };
                assert!((u.get(r, c) - expect).norm() < 1e-15);
            }
        }
        assert!(u.unitarity_defect() < 1e-12);
        assert!(u.bias() < 1e-12);
    }

    #[test]
    fn tritter_rejects_length_mismatch() {
        let pv = PhaseVector::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(tritter_unitary(3, &pv), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ghz_support() {
        let s = ghz_state(Scenario::new(3, 3).unwrap());
        for (i, c) in s.coeffs().iter().enumerate() {
            let expect = if [0, 13, 26].contains(&i) {
                1.0 / 3f64.sqrt()
            } else {
                0.0
            };
            assert!(close(*c, expect));
        }
        let s = ghz_state(Scenario::new(3, 2).unwrap());
        assert_eq!(s.coeffs().iter().filter(|c| **c != 0.0).count(), 2);
        assert!(close(s.coeffs()[0], 0.5f64.sqrt()) && close(s.coeffs()[7], 0.5f64.sqrt()));
        let s = ghz_state(Scenario::new(2, 3).unwrap());
        for i in [0, 4, 8] {
            assert!(close(s.coeffs()[i], 1.0 / 3f64.sqrt()));
        }
        assert!(close(s.norm(), 1.0));
    }

    #[test]
    fn product_states() {
        let sc = Scenario::new(3, 3).unwrap();
        let e0 = vec![1.0, 0.0, 0.0];
        let s = product_state(sc, &[e0.clone(), e0.clone(), e0]).unwrap();
        assert_eq!(s.coeffs()[0], 1.0);
        assert_eq!(s.coeffs().iter().filter(|c| **c != 0.0).count(), 1);

        let sc2 = Scenario::new(2, 2).unwrap();
        let s = product_state(sc2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(s.coeffs(), &[0.0, 1.0, 0.0, 0.0]);

        let u = vec![1.0 / 3f64.sqrt(); 3];
        let s = product_state(sc, &[u.clone(), u.clone(), u]).unwrap();
        assert!(s.coeffs().iter().all(|c| close(*c, 1.0 / (3.0 * 3f64.sqrt()))));
        assert!(close(s.norm(), 1.0));

        let bad = product_state(sc2, &[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert!(matches!(bad, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn reference_state_table() {
        assert_eq!(REFERENCE_STATE_TABLE[0], 0.186);
        // |201> = 2*9 + 0*3 + 1
        assert_eq!(REFERENCE_STATE_TABLE[19], 0.406);
        assert_eq!(REFERENCE_STATE_TABLE[26], -0.128);
        let (s, factor) = reference_optimal_state_with_factor();
        assert!(close(s.norm(), 1.0));
        assert!(close(s.coeffs()[19], 0.406 * factor));
    }

    #[test]
    fn reference_phase_tables() {
        let max = reference_settings(ReferenceSettings::MaxEntangled3Qutrit);
        let a0 = max.get(0, 0).phases();
        assert!(close(a0[0], 0.0) && close(a0[1], 0.0) && close(a0[2], 2.0 * PI / 3.0));
        let c1 = max.get(2, 1).phases();
        assert!(close(c1[0], 0.0) && close(c1[1], PI) && close(c1[2], 0.0));

        let near = reference_settings(ReferenceSettings::NearOptimal3Qutrit);
        let b0 = near.get(1, 0).phases();
        assert!(close(b0[1], 17.0 * PI / 18.0));
        assert!(close(b0[2], TAU - PI / 18.0));
        let a0 = near.get(0, 0).phases();
        assert!(close(a0[2], TAU - 5.0 * PI / 9.0));
    }

    #[test]
    fn canonical_sign_flips_negative_peak() {
        let sc = Scenario::new(2, 2).unwrap();
        let s = PureState::new(sc, vec![0.6, -0.8, 0.0, 0.0]).unwrap();
        assert_eq!(s.canonical_sign().coeffs(), &[-0.6, 0.8, 0.0, 0.0]);
    }

    #[test]
    fn party_permutation_roundtrip() {
        let sc = Scenario::new(3, 2).unwrap();
        let (s, _) = PureState::normalized(sc, (1..=8).map(|x| x as f64).collect()).unwrap();
        let p = s.permute_parties(&[2, 0, 1]).unwrap();
        // new party 2 is old party 1, so new |001> is old |010>
        assert_eq!(p.coeffs()[1], s.coeffs()[2]);
        let back = p.permute_parties(&[1, 2, 0]).unwrap();
        assert_eq!(back, s);
        assert!(s.permute_parties(&[0, 0, 1]).is_err());
    }

    proptest! {
        #[test]
        fn tritter_is_unitary_and_unbiased(
            dim in 2usize..7,
            raw in proptest::collection::vec(-20.0f64..20.0, 7),
        ) {
            let pv = PhaseVector::new(raw[..dim].to_vec()).unwrap();
            let u = tritter_unitary(dim, &pv).unwrap();
            prop_assert!(u.unitarity_defect() < 1e-12);
            prop_assert!(u.bias() < 1e-12);
        }

        #[test]
        fn canonicalization_is_idempotent(raw in proptest::collection::vec(-50.0f64..50.0, 1..8)) {
            let once = PhaseVector::new(raw).unwrap().canonical();
            prop_assert!(once.is_canonical());
            prop_assert_eq!(once.canonical(), once);
        }

        #[test]
        fn uniform_shift_is_global_phase(
            raw in proptest::collection::vec(-10.0f64..10.0, 3),
            shift in -10.0f64..10.0,
        ) {
            let base = tritter_unitary(3, &PhaseVector::new(raw.clone()).unwrap()).unwrap();
            let moved: Vec<f64> = raw.iter().map(|p| p + shift).collect();
            let shifted = tritter_unitary(3, &PhaseVector::new(moved).unwrap()).unwrap();
            let g = Complex64::from_polar(1.0, shift);
            for (a, b) in shifted.entries().iter().zip(base.entries()) {
                prop_assert!((a - g * b).norm() < 1e-12);
            }
        }

        #[test]
        fn ghz_and_product_have_unit_norm(
            n in 2usize..4,
            d in 2usize..4,
            raw in proptest::collection::vec(-1.0f64..1.0, 9),
        ) {
            let sc = Scenario::new(n, d).unwrap();
            prop_assert!((ghz_state(sc).norm() - 1.0).abs() < 1e-12);
            let vecs: Vec<Vec<f64>> = (0..n)
                .map(|p| {
                    let v: Vec<f64> = (0..d).map(|k| raw[(p * d + k) % 9] + 1.5).collect();
                    let nrm = euclidean_norm(&v);
                    v.iter().map(|x| x / nrm).collect()
                })
                .collect();
            let s = product_state(sc, &vecs).unwrap();
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }
}
