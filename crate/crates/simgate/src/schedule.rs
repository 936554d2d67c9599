//! Piecewise control paths for the adiabatic gate protocols, with sudden
//! jumps, ramp shapes, calibration distortion and symmetry validation.
//!
//! Timing conventions pinned here (and checked by `validate_symmetry`):
//! - phase gate: four adiabatic segments of equal duration with the phase
//!   flip at the midpoint, so `Omega(t) = Omega(T_tot - t)` and
//!   `phi(t) + phi(T_tot - t) = pi + theta`;
//! - Hadamard: the first half `[0, T1]` is mirror symmetric; after the drive
//!   flip each remaining step runs at half speed, covering the first half of
//!   the mirror path: `Delta(T1 + t) = Delta(t/2)`,
//!   `Omega_x(T1 + t) = -Omega_x(t/2)`. Total duration `2 T1`.
//! - conditional-shift process: mirror symmetric about the sudden drive flip,
//!   so the signed drive integrates to zero.

use rand::Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("time {t} outside the schedule range [0, {total}]")]
    OutOfRange { t: f64, total: f64 },
    #[error("segment {index} starts at {got:?} but the previous one ends at {expected:?}")]
    Discontinuous {
        index: usize,
        expected: [f64; 2],
        got: [f64; 2],
    },
    #[error("sudden jump at segment {0} has equal endpoints")]
    TrivialJump(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ramp {
    Linear,
    Sin2,
}

impl Ramp {
    /// Normalized ramp shape on [0, 1].
    pub fn shape(self, s: f64) -> f64 {
        match self {
            Ramp::Linear => s,
            Ramp::Sin2 => {
                let x = (0.5 * std::f64::consts::PI * s).sin();
                x * x
            }
        }
    }
}

/// One piece of a control path. `duration == 0` marks a sudden jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub duration: f64,
    pub ramp: Ramp,
}

impl Segment {
    pub fn is_sudden(&self) -> bool {
        self.duration == 0.0
    }
}

/// Which pair of controls a schedule sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamSpace {
    /// (Omega, phi): drive amplitude and laser phase.
    OmegaPhi,
    /// (Delta, Omega_x): detuning and signed drive.
    DeltaOmegaX,
    /// (Delta_tilde, Omega_x): conditional shift and signed drive.
    DeltaTildeOmegaX,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub space: ParamSpace,
    pub segments: Vec<Segment>,
}

impl Schedule {
    pub fn new(space: ParamSpace, segments: Vec<Segment>) -> Self {
        Self { space, segments }
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Continuity check: every segment starts where the previous one ends,
    /// except across declared sudden jumps.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        let mut prev_end: Option<[f64; 2]> = None;
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.is_sudden() && seg.start == seg.end {
                return Err(ScheduleError::TrivialJump(i));
            }
            if let Some(pe) = prev_end {
                if seg.start != pe {
                    return Err(ScheduleError::Discontinuous {
                        index: i,
                        expected: pe,
                        got: seg.start,
                    });
                }
            }
            prev_end = Some(seg.end);
        }
        Ok(())
    }

    /// Piecewise evaluation at time `t`. Exactly at a sudden jump the
    /// post-jump value applies.
    pub fn sample(&self, t: f64) -> Result<[f64; 2], ScheduleError> {
        let total = self.total_time();
        if !(0.0..=total * (1.0 + 1e-12)).contains(&t) {
            return Err(ScheduleError::OutOfRange { t, total });
        }
        let t = t.min(total);
        let mut t0 = 0.0;
        let mut value = self.segments.first().map(|s| s.start).unwrap_or([0.0; 2]);
        for seg in &self.segments {
            if seg.is_sudden() {
                if t >= t0 {
                    value = seg.end;
                }
                continue;
            }
            if t <= t0 + seg.duration {
                let s = ((t - t0) / seg.duration).clamp(0.0, 1.0);
                let w = seg.ramp.shape(s);
                return Ok([
                    seg.start[0] + (seg.end[0] - seg.start[0]) * w,
                    seg.start[1] + (seg.end[1] - seg.start[1]) * w,
                ]);
            }
            t0 += seg.duration;
            value = seg.end;
        }
        Ok(value)
    }

    /// Evaluation through a calibration map: amplitude-type coordinates pass
    /// through the distortion, the laser phase stays exact.
    pub fn sample_calibrated(
        &self,
        t: f64,
        cal: &CalibrationMap,
    ) -> Result<[f64; 2], ScheduleError> {
        let raw = self.sample(t)?;
        let refs = self.amplitude_refs();
        let mut out = raw;
        for coord in 0..2 {
            if self.space == ParamSpace::OmegaPhi && coord == 1 {
                continue; // phase is exactly controlled
            }
            out[coord] = cal.apply(raw[coord], refs[coord]);
        }
        Ok(out)
    }

    /// Largest coordinate magnitudes over the path (segment endpoints; both
    /// ramp shapes are monotone within a segment).
    pub fn amplitude_refs(&self) -> [f64; 2] {
        let mut refs = [0.0_f64; 2];
        for seg in &self.segments {
            for coord in 0..2 {
                refs[coord] = refs[coord]
                    .max(seg.start[coord].abs())
                    .max(seg.end[coord].abs());
            }
        }
        refs
    }
}

/// Monotone control-to-physical distortion `f(p) = c * ref * (|p|/ref)^gamma`
/// with the sign of `p`, so `f(0) = 0` and `f` is single valued.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMap {
    pub scale: f64,
    pub exponent: f64,
}

impl CalibrationMap {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            exponent: 1.0,
        }
    }

    /// Deterministic draw: scale in [0.5, 2], exponent in [0.8, 1.25].
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self {
            scale: rng.gen_range(0.5..=2.0),
            exponent: rng.gen_range(0.8..=1.25),
        }
    }

    pub fn apply(&self, p: f64, reference: f64) -> f64 {
        if reference == 0.0 || p == 0.0 {
            return 0.0;
        }
        p.signum() * self.scale * reference * (p.abs() / reference).powf(self.exponent)
    }
}

/// Reachable maxima, phase-gate angle and timing of one protocol run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub omega_m: f64,
    pub delta_m: f64,
    pub delta_tilde_m: f64,
    pub theta: f64,
    /// Full protocol duration.
    pub total_time: f64,
    pub ramp: Ramp,
}

/// Fraction of each mirror half of the Hadamard path spent on the
/// detuning ramps (the slow-gap corners); the drive ramps share the rest.
const HADAMARD_RAMP_FRACTION: f64 = 0.7;

/// Phase-gate path in `(Omega, phi)`:
/// `(0,0) -> (Om,0) -> (Om,th/2) => (Om,th/2+pi) -> (Om,th+pi) -> (0,th+pi)`,
/// four equal adiabatic segments around the sudden phase flip.
pub fn protocol_phase(cfg: &ProtocolConfig) -> Schedule {
    assert!(
        cfg.theta > -2.0 * std::f64::consts::PI && cfg.theta < 2.0 * std::f64::consts::PI,
        "phase-gate angle out of (-2pi, 2pi)"
    );
    assert!(cfg.omega_m > 0.0 && cfg.total_time > 0.0);
    let om = cfg.omega_m;
    let th = cfg.theta;
    let pi = std::f64::consts::PI;
    let q = cfg.total_time / 4.0;
    let seg = |a: [f64; 2], b: [f64; 2], d: f64| Segment {
        start: a,
        end: b,
        duration: d,
        ramp: cfg.ramp,
    };
    Schedule::new(
        ParamSpace::OmegaPhi,
        vec![
            seg([0.0, 0.0], [om, 0.0], q),
            seg([om, 0.0], [om, th / 2.0], q),
            seg([om, th / 2.0], [om, th / 2.0 + pi], 0.0),
            seg([om, th / 2.0 + pi], [om, th + pi], q),
            seg([om, th + pi], [0.0, th + pi], q),
        ],
    )
}

/// Hadamard path in `(Delta, Omega_x)`. The drive runs with the opposite sign
/// to the printed listing (phase `pi` first, `0` after the flip); that is the
/// variant that lands on the mapping `|0>+|1> -> sqrt(2)|0>`,
/// `|0>-|1> -> -sqrt(2)|1>` under this crate's sign conventions.
pub fn protocol_hadamard(cfg: &ProtocolConfig) -> Schedule {
    assert!(cfg.delta_m > 0.0, "hadamard needs a positive detuning maximum");
    assert!(cfg.omega_m > 0.0 && cfg.total_time > 0.0);
    let om = -cfg.omega_m;
    let dm = cfg.delta_m;
    let t1 = cfg.total_time / 2.0;
    let d_ramp = HADAMARD_RAMP_FRACTION * t1 / 2.0;
    let d_drive = (1.0 - HADAMARD_RAMP_FRACTION) * t1 / 2.0;
    let seg = |a: [f64; 2], b: [f64; 2], d: f64| Segment {
        start: a,
        end: b,
        duration: d,
        ramp: cfg.ramp,
    };
    Schedule::new(
        ParamSpace::DeltaOmegaX,
        vec![
            seg([0.0, om], [dm, om], d_ramp),
            seg([dm, om], [dm, 0.0], d_drive),
            seg([dm, 0.0], [dm, om], d_drive),
            seg([dm, om], [0.0, om], d_ramp),
            seg([0.0, om], [0.0, -om], 0.0),
            seg([0.0, -om], [dm, -om], 2.0 * d_ramp),
            seg([dm, -om], [dm, 0.0], 2.0 * d_drive),
        ],
    )
}

/// First conditional process of the CNOT in `(Delta_tilde, Omega_x)`:
/// mirror symmetric about the sudden drive flip, so the signed drive
/// integrates to zero. Drive signs follow the same convention as the
/// Hadamard (negative first).
pub fn protocol_cnot_u1(cfg: &ProtocolConfig) -> Schedule {
    assert!(cfg.delta_tilde_m != 0.0, "conditional shift maximum must be nonzero");
    assert!(cfg.omega_m > 0.0 && cfg.total_time > 0.0);
    let om = -cfg.omega_m;
    let dt = cfg.delta_tilde_m;
    let q = cfg.total_time / 4.0;
    let seg = |a: [f64; 2], b: [f64; 2], d: f64| Segment {
        start: a,
        end: b,
        duration: d,
        ramp: cfg.ramp,
    };
    Schedule::new(
        ParamSpace::DeltaTildeOmegaX,
        vec![
            seg([dt, 0.0], [dt, om], q),
            seg([dt, om], [0.0, om], q),
            seg([0.0, om], [0.0, -om], 0.0),
            seg([0.0, -om], [dt, -om], q),
            seg([dt, -om], [dt, 0.0], q),
        ],
    )
}

/// Second conditional process: the identical shift trace with the drive off,
/// over the identical total time.
pub fn protocol_cnot_u3(u1: &Schedule) -> Schedule {
    let segments = u1
        .segments
        .iter()
        .filter(|s| !(s.is_sudden() && s.start[0] == s.end[0]))
        .map(|s| Segment {
            start: [s.start[0], 0.0],
            end: [s.end[0], 0.0],
            duration: s.duration,
            ramp: s.ramp,
        })
        .collect();
    Schedule::new(ParamSpace::DeltaTildeOmegaX, segments)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Phase,
    Hadamard,
    CnotU1,
    CnotU3,
}

/// Residuals of the protocol's stated constraint equations on a dense grid.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub max_residual: f64,
    pub relations: Vec<(String, f64)>,
}

const SYMMETRY_GRID: usize = 2048;

/// Numerically check the protocol constraints. Sampling happens at grid-cell
/// midpoints so the report is not polluted by the one-sided convention at
/// sudden-jump instants.
pub fn validate_symmetry(schedule: &Schedule, kind: ProtocolKind) -> SymmetryReport {
    let total = schedule.total_time();
    let mut relations: Vec<(String, f64)> = Vec::new();
    let mut push = |name: &str, r: f64| relations.push((name.to_string(), r));
    let grid = |span: f64| (0..SYMMETRY_GRID).map(move |k| (k as f64 + 0.5) / SYMMETRY_GRID as f64 * span);
    let at = |t: f64| schedule.sample(t).expect("in-range sample");

    match kind {
        ProtocolKind::Phase => {
            let theta = at(total)[1] - std::f64::consts::PI;
            let mut r_om = 0.0_f64;
            let mut r_phi = 0.0_f64;
            for t in grid(total) {
                let a = at(t);
                let b = at(total - t);
                r_om = r_om.max((a[0] - b[0]).abs());
                r_phi = r_phi.max((a[1] + b[1] - (std::f64::consts::PI + theta)).abs());
            }
            push("omega mirror", r_om);
            push("phi reflection", r_phi);
        }
        ProtocolKind::Hadamard => {
            let t1 = total / 2.0;
            let (mut r_d, mut r_o, mut r_dh, mut r_oh) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
            for t in grid(t1) {
                let a = at(t);
                let b = at(t1 - t);
                r_d = r_d.max((a[0] - b[0]).abs());
                r_o = r_o.max((a[1] - b[1]).abs());
                let c = at(t1 + t);
                let d = at(t / 2.0);
                r_dh = r_dh.max((c[0] - d[0]).abs());
                r_oh = r_oh.max((c[1] + d[1]).abs());
            }
            push("delta mirror", r_d);
            push("drive mirror", r_o);
            push("delta half-speed", r_dh);
            push("drive half-speed", r_oh);
        }
        ProtocolKind::CnotU1 => {
            let (mut r_d, mut r_o) = (0.0_f64, 0.0_f64);
            for t in grid(total) {
                let a = at(t);
                let b = at(total - t);
                r_d = r_d.max((a[0] - b[0]).abs());
                r_o = r_o.max((a[1] + b[1]).abs());
            }
            push("shift mirror", r_d);
            push("drive antisymmetry", r_o);
        }
        ProtocolKind::CnotU3 => {
            let (mut r_d, mut r_o) = (0.0_f64, 0.0_f64);
            for t in grid(total) {
                let a = at(t);
                let b = at(total - t);
                r_d = r_d.max((a[0] - b[0]).abs());
                r_o = r_o.max(a[1].abs());
            }
            push("shift mirror", r_d);
            push("drive off", r_o);
        }
    }
    let max_residual = relations.iter().fold(0.0_f64, |m, (_, r)| m.max(*r));
    SymmetryReport {
        max_residual,
        relations,
    }
}
