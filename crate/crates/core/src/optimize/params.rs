use crate::error::{invalid, Result};
use crate::qstate::{PhaseSettings, PhaseVector, PureState, Scenario};

/// Search coordinates: gauge-fixed phases (the first beam of every
/// multiport is pinned to zero and omitted) and, optionally, unnormalized
/// state coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterVector {
    /// `N * m * (d - 1)` phases, party-major, then setting, then beam `1..d`.
    pub phase_params: Vec<f64>,
    /// `d^N` coefficients, projected onto the unit sphere when decoded.
    pub state_params: Option<Vec<f64>>,
}

impl ParameterVector {
    pub fn encode(settings: &PhaseSettings, state: Option<&PureState>) -> Self {
        let sc = settings.scenario();
        let mut phase_params = Vec::with_capacity(phase_len(sc));
        for p in 0..sc.parties() {
            for s in 0..sc.settings_per_party() {
                phase_params.extend_from_slice(&settings.get(p, s).phases()[1..]);
            }
        }
        Self {
            phase_params,
            state_params: state.map(|s| s.coeffs().to_vec()),
        }
    }

    pub fn decode_settings(&self, scenario: Scenario) -> Result<PhaseSettings> {
        if self.phase_params.len() != phase_len(scenario) {
            return Err(invalid(format!(
                "{} phase parameters, scenario needs {}",
                self.phase_params.len(),
                phase_len(scenario)
            )));
        }
        let free = scenario.dim() - 1;
        let mut chunks = self.phase_params.chunks_exact(free);
        let mut table = Vec::with_capacity(scenario.parties());
        for _ in 0..scenario.parties() {
            let mut row = Vec::with_capacity(scenario.settings_per_party());
            for _ in 0..scenario.settings_per_party() {
                let chunk = chunks.next().expect("length checked above");
                let mut phases = Vec::with_capacity(scenario.dim());
                phases.push(0.0);
                phases.extend_from_slice(chunk);
                row.push(PhaseVector::new(phases)?);
            }
            table.push(row);
        }
        PhaseSettings::new(scenario, table)
    }

    /// The encoded state, if any, normalized.
    pub fn decode_state(&self, scenario: Scenario) -> Result<Option<PureState>> {
        self.state_params
            .as_ref()
            .map(|c| PureState::normalized(scenario, c.clone()).map(|(s, _)| s))
            .transpose()
    }

    pub fn len(&self) -> usize {
        self.phase_params.len() + self.state_params.as_ref().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Phases followed by state coefficients.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.phase_params.clone();
        if let Some(s) = &self.state_params {
            v.extend_from_slice(s);
        }
        v
    }

    pub fn from_flat(scenario: Scenario, with_state: bool, flat: &[f64]) -> Result<Self> {
        let np = phase_len(scenario);
        let expect = np + if with_state { scenario.state_len() } else { 0 };
        if flat.len() != expect {
            return Err(invalid(format!("{} parameters, expected {expect}", flat.len())));
        }
        Ok(Self {
            phase_params: flat[..np].to_vec(),
            state_params: with_state.then(|| flat[np..].to_vec()),
        })
    }
}

pub fn phase_len(scenario: Scenario) -> usize {
    scenario.parties() * scenario.settings_per_party() * (scenario.dim() - 1)
}
