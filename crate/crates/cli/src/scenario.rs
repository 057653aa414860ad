//! TOML scenario files.

use std::f64::consts::PI;
use std::fmt;

use anyhow::{anyhow, bail, Context, Result};
use nonlocality_core::{
    ghz_state, product_state, reference_optimal_state, reference_settings, NoiseFraction, PhaseSettings, PureState,
    ReferenceSettings, Scenario,
};
use serde::{Deserialize, Serialize};

/// An angle in radians, or a rational multiple of pi written as text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Radians(f64),
    Text(String),
}

impl Angle {
    pub fn radians(&self) -> Result<f64> {
        match self {
            Angle::Radians(v) => Ok(*v),
            Angle::Text(s) => parse_angle(s),
        }
    }
}

/// Accepts `1.25`, `pi`, `-pi`, `2/3 pi`, `5/3*pi`, `0.5π`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim();
    let coef_text = if let Some(rest) = t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        rest.trim().trim_end_matches('*').trim()
    } else {
        return t
            .parse::<f64>()
            .with_context(|| format!("angle {text:?} is neither a number nor a multiple of pi"));
    };
    let coef = match coef_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => match c.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num
                    .trim()
                    .parse()
                    .with_context(|| format!("bad numerator in angle {text:?}"))?;
                let den: f64 = den
                    .trim()
                    .parse()
                    .with_context(|| format!("bad denominator in angle {text:?}"))?;
                if den == 0.0 {
                    bail!("zero denominator in angle {text:?}");
                }
                num / den
            }
            None => c
                .parse()
                .with_context(|| format!("bad coefficient in angle {text:?}"))?,
        },
    };
    Ok(coef * PI)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    /// `ghz`, `reference-table` or `product` (all parties in `|0>`).
    Keyword(String),
    Coefficients(Vec<f64>),
    /// One real local vector per party.
    Product {
        product: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SettingsSpec {
    /// `reference-maxent`, `reference-near-optimal` or `zero`.
    Keyword(String),
    /// Parties x settings x beams.
    Table(Vec<Vec<Vec<Angle>>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub parties: usize,
    pub dim: usize,
    pub state: StateSpec,
    pub settings: SettingsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
}

/// A scenario file with every keyword expanded.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub state: PureState,
    pub settings: PhaseSettings,
    pub noise: Option<NoiseFraction>,
}

impl fmt::Display for ScenarioFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&toml::to_string(self).map_err(|_| fmt::Error)?)
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow!("{e}"))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(self.parties, self.dim).map_err(|e| anyhow!("fields `parties`/`dim`: {e}"))
    }

    pub fn resolve_state(&self) -> Result<PureState> {
        let sc = self.scenario()?;
        let state = match &self.state {
            StateSpec::Keyword(k) => match k.as_str() {
                "ghz" => ghz_state(sc),
                "reference-table" => {
                    if (self.parties, self.dim) != (3, 3) {
                        bail!("field `state`: reference-table needs parties = 3, dim = 3");
                    }
                    reference_optimal_state()
                }
                "product" => {
                    let mut e0 = vec![0.0; self.dim];
                    e0[0] = 1.0;
                    product_state(sc, &vec![e0; self.parties]).map_err(|e| anyhow!("field `state`: {e}"))?
                }
                other => bail!("field `state`: unknown keyword {other:?} (expected ghz, reference-table, product)"),
            },
            StateSpec::Coefficients(c) => {
                if c.len() != sc.state_len() {
                    bail!(
                        "field `state`: {} coefficients given, dim^parties = {}",
                        c.len(),
                        sc.state_len()
                    );
                }
                PureState::normalized(sc, c.clone())
                    .map(|(s, _)| s)
                    .map_err(|e| anyhow!("field `state`: {e}"))?
            }
            StateSpec::Product { product } => {
                product_state(sc, product).map_err(|e| anyhow!("field `state.product`: {e}"))?
            }
        };
        Ok(state)
    }

    pub fn resolve_settings(&self) -> Result<PhaseSettings> {
        let sc = self.scenario()?;
        match &self.settings {
            SettingsSpec::Keyword(k) => match k.as_str() {
                "zero" => Ok(PhaseSettings::zeros(sc)),
                "reference-maxent" | "reference-near-optimal" => {
                    if (self.parties, self.dim) != (3, 3) {
                        bail!("field `settings`: {k} needs parties = 3, dim = 3");
                    }
                    Ok(reference_settings(if k == "reference-maxent" {
                        ReferenceSettings::MaxEntangled3Qutrit
                    } else {
                        ReferenceSettings::NearOptimal3Qutrit
                    }))
                }
                other => bail!(
                    "field `settings`: unknown keyword {other:?} (expected reference-maxent, reference-near-optimal, zero)"
                ),
            },
            SettingsSpec::Table(table) => {
                let m = sc.settings_per_party();
                if table.len() != self.parties {
                    bail!(
                        "field `settings`: {} parties given, expected {}",
                        table.len(),
                        self.parties
                    );
                }
                let mut radians = Vec::with_capacity(table.len());
                for (p, party) in table.iter().enumerate() {
                    if party.len() != m {
                        bail!("field `settings[{p}]`: {} settings given, expected {m}", party.len());
                    }
                    let mut row = Vec::with_capacity(m);
                    for (s, phases) in party.iter().enumerate() {
                        if phases.len() != self.dim {
                            bail!(
                                "field `settings[{p}][{s}]`: {} phases given, expected {}",
                                phases.len(),
                                self.dim
                            );
                        }
                        let v = phases
                            .iter()
                            .enumerate()
                            .map(|(k, a)| a.radians().with_context(|| format!("field `settings[{p}][{s}][{k}]`")))
                            .collect::<Result<Vec<f64>>>()?;
                        row.push(v);
                    }
                    radians.push(row);
                }
                PhaseSettings::from_radians(sc, &radians).map_err(|e| anyhow!("field `settings`: {e}"))
            }
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let noise = self
            .noise
            .map(|f| NoiseFraction::new(f).map_err(|e| anyhow!("field `noise`: {e}")))
            .transpose()?;
        Ok(Resolved {
            scenario: self.scenario()?,
            state: self.resolve_state()?,
            settings: self.resolve_settings()?,
            noise,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert!((parse_angle("2/3 pi").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((parse_angle("5/3*pi").unwrap() - 5.0 * PI / 3.0).abs() < 1e-15);
        assert!((parse_angle("0.5π").unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(parse_angle(" 1.25 ").unwrap(), 1.25);
        assert!(parse_angle("2/0 pi").is_err());
        assert!(parse_angle("two pi").is_err());
    }

    #[test]
    fn keyword_file_roundtrips() {
        let text = "parties = 3\ndim = 3\nstate = \"ghz\"\nsettings = \"reference-maxent\"\nnoise = 0.25\n";
        let file = ScenarioFile::parse(text).unwrap();
        assert_eq!(ScenarioFile::parse(&file.to_string()).unwrap(), file);
        let r = file.resolve().unwrap();
        assert_eq!(r.scenario, Scenario::new(3, 3).unwrap());
        assert_eq!(r.noise.unwrap().value(), 0.25);
    }

    #[test]
    fn explicit_file_roundtrips() {
        let text = r#"
parties = 2
dim = 2
state = [1.0, 0.0, 0.0, 1.0]
settings = [[[0, "1/2 pi"], [0, 0]], [[0, "1/4 pi"], [0, -0.785]]]
"#;
        let file = ScenarioFile::parse(text).unwrap();
        assert_eq!(ScenarioFile::parse(&file.to_string()).unwrap(), file);
        let r = file.resolve().unwrap();
        assert!((r.state.coeffs()[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((r.settings.get(0, 0).phases()[1] - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn product_arguments() {
        let text = "parties = 2\ndim = 2\nstate = { product = [[1, 0], [0.6, 0.8]] }\nsettings = \"zero\"\n";
        let file = ScenarioFile::parse(text).unwrap();
        assert_eq!(ScenarioFile::parse(&file.to_string()).unwrap(), file);
        let st = file.resolve_state().unwrap();
        assert!((st.coeffs()[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let wrong_len = "parties = 2\ndim = 3\nstate = [1.0, 0.0]\nsettings = \"zero\"\n";
        let e = ScenarioFile::parse(wrong_len).unwrap().resolve().unwrap_err();
        assert!(e.to_string().contains("field `state`"), "{e}");

        let wrong_shape = "parties = 2\ndim = 2\nstate = \"ghz\"\nsettings = [[[0, 0]], [[0, 0], [0, 0]]]\n";
        let e = ScenarioFile::parse(wrong_shape).unwrap().resolve().unwrap_err();
        assert!(e.to_string().contains("settings[0]"), "{e}");

        let e =
            ScenarioFile::parse("parties = 2\ndim = 2\nstate = \"ghz\"\nsettings = \"zero\"\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("line 5"), "{e}");

        let e = ScenarioFile::parse("parties = 2\ndim = 2\nstate = \"ghz\"\nsettings = \"reference-maxent\"\n")
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(e.to_string().contains("reference-maxent"), "{e}");
    }
}
