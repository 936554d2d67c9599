//! Run and sweep configuration: the JSON contract of the CLI.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::GateKind;
use crate::schedule::{CalibrationMap, Ramp};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("lattice needs at least one site")]
    NoSites,
    #[error("occupations {got} entries for {sites} sites")]
    OccupationLength { sites: usize, got: usize },
    #[error("every site needs at least one atom")]
    EmptySite,
    #[error("phase gate needs gate.theta")]
    MissingTheta,
    #[error("gate.theta must lie in (-2pi, 2pi)")]
    ThetaRange,
    #[error("gate.omega_m must be positive")]
    OmegaM,
    #[error("hadamard needs a positive gate.delta_m")]
    DeltaM,
    #[error("cnot needs a nonzero gate.delta_tilde_m")]
    DeltaTildeM,
    #[error("schedule.total_time must be positive")]
    TotalTime,
    #[error("schedule.steps_per_segment must be at least 1")]
    Steps,
    #[error("{model} models need u_bb > 0 (the computation sector is gapped by u_bb)")]
    UbbGap { model: String },
    #[error("hopping amplitudes j_a, j_m must be nonnegative")]
    NegativeHopping,
    #[error("cnot on the lattice needs exactly 2 sites")]
    CnotSites,
    #[error("cnot on the lattice needs j_m > 0")]
    CnotJm,
    #[error("tilt is resonant (g = u_bb); the conditional shift diverges")]
    ResonantTilt,
    #[error("delta_tilde_m and (g - u_bb) must have the same sign to realize the shift ramp")]
    ShiftSign,
    #[error("calibration scale and exponent must be positive")]
    Calibration,
    #[error("the 'not' target is a composition, not a runnable protocol; run phase/hadamard/cnot")]
    NotGate,
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("sweep needs min < max")]
    SweepRange,
    #[error("sweep needs at least 2 points")]
    SweepPoints,
    #[error("occupation-imbalance sweeps need integer bounds >= 0 and 2 sites")]
    SweepImbalance,
    #[error("failed to parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ideal,
    Effective,
    Exact,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Model::Ideal => "ideal",
            Model::Effective => "effective",
            Model::Exact => "exact",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub sites: usize,
    pub occupations: Vec<u8>,
}

/// Physical constants. `j_m` is the hopping maximum reached by the
/// conditional-shift ramp; local gates run with the b hopping off.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub u_bb: f64,
    pub u_ab: f64,
    pub u_aa: f64,
    pub j_a: f64,
    pub j_m: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    #[serde(rename = "type")]
    pub kind: GateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub omega_m: f64,
    pub delta_m: f64,
    pub delta_tilde_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub total_time: f64,
    pub ramp: Ramp,
    pub steps_per_segment: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub params: ParamsConfig,
    pub gate: GateConfig,
    pub schedule: ScheduleConfig,
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationMap>,
    #[serde(default)]
    pub seed: u64,
    /// Declares which quantity the config's energy unit is anchored to
    /// ("omega_m" for local gates, "j_m" for the nonlocal one).
    #[serde(default = "default_anchor")]
    pub unit_anchor: String,
    /// Override of the propagator's step-halving tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

fn default_anchor() -> String {
    "omega_m".to_string()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lattice.sites == 0 {
            return Err(ConfigError::NoSites);
        }
        if self.lattice.occupations.len() != self.lattice.sites {
            return Err(ConfigError::OccupationLength {
                sites: self.lattice.sites,
                got: self.lattice.occupations.len(),
            });
        }
        if self.lattice.occupations.iter().any(|&n| n == 0) {
            return Err(ConfigError::EmptySite);
        }
        match self.gate.kind {
            GateKind::Phase => {
                let th = self.gate.theta.ok_or(ConfigError::MissingTheta)?;
                if th.abs() >= 2.0 * std::f64::consts::PI {
                    return Err(ConfigError::ThetaRange);
                }
            }
            GateKind::Hadamard => {
                if self.gate.delta_m <= 0.0 {
                    return Err(ConfigError::DeltaM);
                }
            }
            GateKind::Cnot => {
                if self.gate.delta_tilde_m == 0.0 {
                    return Err(ConfigError::DeltaTildeM);
                }
            }
            GateKind::Not => return Err(ConfigError::NotGate),
        }
        if self.gate.omega_m <= 0.0 {
            return Err(ConfigError::OmegaM);
        }
        if self.schedule.total_time <= 0.0 {
            return Err(ConfigError::TotalTime);
        }
        if self.schedule.steps_per_segment == 0 {
            return Err(ConfigError::Steps);
        }
        if self.params.j_a < 0.0 || self.params.j_m < 0.0 {
            return Err(ConfigError::NegativeHopping);
        }
        if let Some(cal) = &self.calibration {
            if cal.scale <= 0.0 || cal.exponent <= 0.0 {
                return Err(ConfigError::Calibration);
            }
        }
        if matches!(self.model, Model::Exact | Model::Effective) {
            if self.params.u_bb <= 0.0 {
                return Err(ConfigError::UbbGap {
                    model: self.model.to_string(),
                });
            }
            if self.gate.kind == GateKind::Cnot {
                if self.lattice.sites != 2 {
                    return Err(ConfigError::CnotSites);
                }
                if self.params.j_m <= 0.0 {
                    return Err(ConfigError::CnotJm);
                }
                if self.params.g == self.params.u_bb {
                    return Err(ConfigError::ResonantTilt);
                }
                if self.gate.delta_tilde_m * (self.params.g - self.params.u_bb) <= 0.0 {
                    return Err(ConfigError::ShiftSign);
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    TotalTime,
    UBb,
    OccupationImbalance,
}

impl std::str::FromStr for SweepVariable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "total_time" => Ok(Self::TotalTime),
            "u_bb" => Ok(Self::UBb),
            "occupation_imbalance" => Ok(Self::OccupationImbalance),
            other => Err(format!(
                "unknown sweep variable '{other}' (total_time | u_bb | occupation_imbalance)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
    pub base: RunConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.base.validate()?;
        if !(self.min < self.max) {
            return Err(ConfigError::SweepRange);
        }
        if self.points < 2 {
            return Err(ConfigError::SweepPoints);
        }
        if self.variable == SweepVariable::OccupationImbalance {
            let ok = self.min >= 0.0
                && self.min.fract() == 0.0
                && self.max.fract() == 0.0
                && self.base.lattice.sites == 2;
            if !ok {
                return Err(ConfigError::SweepImbalance);
            }
        }
        Ok(())
    }

    /// The x grid, ascending.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                if self.log {
                    (self.min.ln() + (self.max.ln() - self.min.ln()) * s).exp()
                } else {
                    self.min + (self.max - self.min) * s
                }
            })
            .collect()
    }
}
