//! Scenario files.
//!
//! A scenario is a TOML document with three tables:
//!
//! ```toml
//! label = "reference"
//!
//! [system]            # any SystemConfig field; omitted fields take the defaults
//! n_devices = 10
//!
//! [devices]           # either a template repeated `count` times ...
//! count = 10
//! [devices.uniform]
//! energy_budget = 0.5
//! # ... or an explicit [[devices.list]] array, one table per device
//!
//! [channel]           # exactly one of gains, distances_m, distance_range_m
//! distance_range_m = [120.0, 255.0]
//! # fading_seed = 7   # unit-mean exponential fading on top of path loss
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{
    generate_channel_gains, linspace, validate_inputs, ModelError, SemanticParams, SystemConfig,
    TerminalDevice,
};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Per-device parameters without the channel. Omitted fields take the
/// reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSpec {
    pub task_bits: f64,
    pub intensity: f64,
    pub energy_coeff: f64,
    pub f_local_max: f64,
    pub p_tx_max: f64,
    pub beta_min: f64,
    pub energy_budget: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semantics: Option<SemanticParams>,
}

impl Default for DeviceSpec {
    fn default() -> Self {
        Self {
            task_bits: 3e6,
            intensity: 70.0,
            energy_coeff: 1e-26,
            f_local_max: 1e9,
            p_tx_max: 1.0,
            beta_min: 0.6,
            energy_budget: 0.5,
            semantics: None,
        }
    }
}

impl DeviceSpec {
    fn with_channel(&self, channel_gain: f64, distance: Option<f64>) -> TerminalDevice {
        TerminalDevice {
            task_bits: self.task_bits,
            intensity: self.intensity,
            energy_coeff: self.energy_coeff,
            f_local_max: self.f_local_max,
            p_tx_max: self.p_tx_max,
            beta_min: self.beta_min,
            energy_budget: self.energy_budget,
            channel_gain,
            distance,
            semantics: self.semantics,
        }
    }

    fn of(td: &TerminalDevice) -> Self {
        Self {
            task_bits: td.task_bits,
            intensity: td.intensity,
            energy_coeff: td.energy_coeff,
            f_local_max: td.f_local_max,
            p_tx_max: td.p_tx_max,
            beta_min: td.beta_min,
            energy_budget: td.energy_budget,
            semantics: td.semantics,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Gains(Vec<f64>),
    Distances {
        distances_m: Vec<f64>,
        fading_seed: Option<u64>,
    },
}

/// A validated scenario. Device channel gains are already resolved from
/// the channel specification.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub system: SystemConfig,
    pub devices: Vec<TerminalDevice>,
    pub channel: ChannelSpec,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    label: String,
    #[serde(default)]
    system: SystemConfig,
    #[serde(default)]
    devices: DevicesSection,
    channel: ChannelSection,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DevicesSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uniform: Option<DeviceSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    list: Option<Vec<DeviceSpec>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    gains: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distances_m: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance_range_m: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fading_seed: Option<u64>,
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_toml_str(&text)
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text)?;
        let n = file.system.n_devices;

        let specs = match (file.devices.uniform, file.devices.list) {
            (Some(_), Some(_)) => {
                return Err(invalid("devices: give either `uniform` or `list`, not both"))
            }
            (None, Some(list)) => {
                if file.devices.count.is_some() {
                    return Err(invalid("devices: `count` only applies to a `uniform` template"));
                }
                list
            }
            (uniform, None) => {
                let count = file.devices.count.unwrap_or(n);
                vec![uniform.unwrap_or_default(); count]
            }
        };
        if specs.len() != n {
            return Err(invalid(format!(
                "device count {} does not match system.n_devices = {n}",
                specs.len()
            )));
        }

        let ch = file.channel;
        let modes = [ch.gains.is_some(), ch.distances_m.is_some(), ch.distance_range_m.is_some()];
        if modes.iter().filter(|&&m| m).count() != 1 {
            return Err(invalid(
                "channel: exactly one of `gains`, `distances_m`, `distance_range_m` is required",
            ));
        }
        let channel = if let Some(gains) = ch.gains {
            if ch.fading_seed.is_some() {
                return Err(invalid("channel: `fading_seed` needs distances, not explicit gains"));
            }
            ChannelSpec::Gains(gains)
        } else {
            let distances_m = match (ch.distances_m, ch.distance_range_m) {
                (Some(d), _) => d,
                (None, Some([lo, hi])) => {
                    if !(lo <= hi) {
                        return Err(invalid(format!(
                            "channel: distance_range_m [{lo}, {hi}] must be ordered"
                        )));
                    }
                    linspace(lo, hi, n)
                }
                (None, None) => unreachable!(),
            };
            ChannelSpec::Distances {
                distances_m,
                fading_seed: ch.fading_seed,
            }
        };

        Self::build(file.label, file.system, &specs, channel)
    }

    fn build(
        label: String,
        system: SystemConfig,
        specs: &[DeviceSpec],
        channel: ChannelSpec,
    ) -> Result<Self, ScenarioError> {
        let (gains, distances): (Vec<f64>, Vec<Option<f64>>) = match &channel {
            ChannelSpec::Gains(g) => (g.clone(), vec![None; g.len()]),
            ChannelSpec::Distances {
                distances_m,
                fading_seed,
            } => (
                generate_channel_gains(distances_m, *fading_seed)?,
                distances_m.iter().copied().map(Some).collect(),
            ),
        };
        if gains.len() != specs.len() {
            return Err(invalid(format!(
                "channel: {} entries for {} devices",
                gains.len(),
                specs.len()
            )));
        }
        let devices: Vec<TerminalDevice> = specs
            .iter()
            .zip(gains.iter().zip(&distances))
            .map(|(spec, (&g, &d))| spec.with_channel(g, d))
            .collect();
        validate_inputs(&devices, &system)?;
        Ok(Self {
            label,
            system,
            devices,
            channel,
        })
    }

    /// Recomputes channel gains, e.g. after the fading seed changed.
    pub fn with_fading_seed(&self, seed: u64) -> Result<Self, ScenarioError> {
        match &self.channel {
            ChannelSpec::Distances {
                distances_m,
                fading_seed: Some(_),
            } => {
                let specs: Vec<_> = self.devices.iter().map(DeviceSpec::of).collect();
                let channel = ChannelSpec::Distances {
                    distances_m: distances_m.clone(),
                    fading_seed: Some(seed),
                };
                Self::build(self.label.clone(), self.system.clone(), &specs, channel)
            }
            _ => Ok(self.clone()),
        }
    }

    /// Canonical dump: every system field, an explicit device list and the
    /// channel in the mode it was given (ranges become explicit distances).
    pub fn to_toml(&self) -> String {
        let (gains, distances_m, fading_seed) = match &self.channel {
            ChannelSpec::Gains(g) => (Some(g.clone()), None, None),
            ChannelSpec::Distances {
                distances_m,
                fading_seed,
            } => (None, Some(distances_m.clone()), *fading_seed),
        };
        let file = ScenarioFile {
            label: self.label.clone(),
            system: self.system.clone(),
            devices: DevicesSection {
                count: None,
                uniform: None,
                list: Some(self.devices.iter().map(DeviceSpec::of).collect()),
            },
            channel: ChannelSection {
                gains,
                distances_m,
                distance_range_m: None,
                fading_seed,
            },
        };
        toml::to_string(&file).expect("scenario serializes to TOML")
    }
}
