//! Named parameter sets for the two gate-error studies.

use super::config::{
    GateConfig, LatticeConfig, Model, ParamsConfig, RunConfig, ScheduleConfig,
};
use crate::gates::GateKind;
use crate::schedule::Ramp;

pub const PRESET_NAMES: &[&str] = &["fig2", "fig3-local", "fig3-cnot"];

/// Drive maximum of the local gates in their own energy unit
/// (`delta_m = 6 omega_m = 1`).
pub const LOCAL_OMEGA_M: f64 = 1.0 / 6.0;
/// Interaction scale of the local-gate study: `u_aa = u_ab = j_m`, sized so
/// the occupation-dependent virtual shifts dominate the error at
/// `u_bb = 1e3 u_ab` without drowning the adiabatic floor.
pub const LOCAL_J_M: f64 = LOCAL_OMEGA_M / 12.0;
/// Hopping maximum of the nonlocal study.
pub const CNOT_J_M: f64 = 1.0 / 6.0;
/// Nonlocal drive maximum, `j_m^2 / 6`.
pub const CNOT_OMEGA_M: f64 = CNOT_J_M * CNOT_J_M / 6.0;

pub fn preset(name: &str) -> Option<RunConfig> {
    match name {
        "fig2" => Some(ideal_study()),
        "fig3-local" => Some(lattice_local()),
        "fig3-cnot" => Some(lattice_cnot()),
        _ => None,
    }
}

/// Ideal-model study: all three protocols share `delta_m = delta_tilde_m =
/// 6 omega_m` and the phase angle `theta = pi/2` (`phi_m = pi/4`).
fn ideal_study() -> RunConfig {
    RunConfig {
        lattice: LatticeConfig {
            sites: 2,
            occupations: vec![1, 1],
        },
        params: ParamsConfig {
            u_bb: 0.0,
            u_ab: 0.0,
            u_aa: 0.0,
            j_a: 0.0,
            j_m: 0.0,
            g: 0.0,
        },
        gate: GateConfig {
            kind: GateKind::Phase,
            theta: Some(std::f64::consts::FRAC_PI_2),
            omega_m: 1.0,
            delta_m: 6.0,
            delta_tilde_m: 6.0,
            phi_m: Some(std::f64::consts::FRAC_PI_4),
        },
        schedule: ScheduleConfig {
            total_time: 300.0,
            ramp: Ramp::Sin2,
            steps_per_segment: 64,
        },
        model: Model::Ideal,
        calibration: None,
        seed: 0,
        unit_anchor: "omega_m".to_string(),
        tolerance: None,
    }
}

/// Exact-model local-gate study on two sites:
/// `u_aa = u_ab = j_m`, `g = u_bb + u_ab/2`, `T = 100/omega_m`, b hopping off
/// during the operation, laser on the gate site only.
fn lattice_local() -> RunConfig {
    let u_ab = LOCAL_J_M;
    let u_bb = 1.0e4 * u_ab;
    RunConfig {
        lattice: LatticeConfig {
            sites: 2,
            occupations: vec![1, 1],
        },
        params: ParamsConfig {
            u_bb,
            u_ab,
            u_aa: u_ab,
            j_a: 0.0,
            j_m: LOCAL_J_M,
            g: u_bb + 0.5 * u_ab,
        },
        gate: GateConfig {
            kind: GateKind::Phase,
            theta: Some(std::f64::consts::FRAC_PI_2),
            omega_m: LOCAL_OMEGA_M,
            delta_m: 1.0,
            delta_tilde_m: 6.0 * LOCAL_OMEGA_M,
            phi_m: Some(std::f64::consts::FRAC_PI_4),
        },
        schedule: ScheduleConfig {
            total_time: 100.0 / LOCAL_OMEGA_M,
            ramp: Ramp::Sin2,
            steps_per_segment: 1024,
        },
        model: Model::Exact,
        calibration: None,
        seed: 0,
        unit_anchor: "omega_m".to_string(),
        tolerance: Some(1e-6),
    }
}

/// Exact-model nonlocal study: the conditional-shift ramp reaches
/// `delta_tilde_m = 6 omega_m` with `omega_m = j_m^2/6`, `u_aa = u_ab = j_m`,
/// `g = u_bb + u_ab/2` and `T = 100/omega_m`; the a hopping tracks the b
/// hopping.
fn lattice_cnot() -> RunConfig {
    let j_m = CNOT_J_M;
    let u_ab = j_m;
    let u_bb = 1.0e3 * u_ab;
    RunConfig {
        lattice: LatticeConfig {
            sites: 2,
            occupations: vec![1, 1],
        },
        params: ParamsConfig {
            u_bb,
            u_ab,
            u_aa: u_ab,
            j_a: j_m,
            j_m,
            g: u_bb + 0.5 * u_ab,
        },
        gate: GateConfig {
            kind: GateKind::Cnot,
            theta: None,
            omega_m: CNOT_OMEGA_M,
            delta_m: 6.0 * CNOT_OMEGA_M,
            delta_tilde_m: 6.0 * CNOT_OMEGA_M,
            phi_m: Some(std::f64::consts::FRAC_PI_4),
        },
        schedule: ScheduleConfig {
            total_time: 100.0 / CNOT_OMEGA_M,
            ramp: Ramp::Sin2,
            steps_per_segment: 2048,
        },
        model: Model::Exact,
        calibration: None,
        seed: 0,
        unit_anchor: "j_m".to_string(),
        tolerance: Some(1e-6),
    }
}
