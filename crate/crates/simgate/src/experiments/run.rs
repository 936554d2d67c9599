//! Gate runner: builds the Hamiltonian driver for the configured model tier,
//! runs the protocol schedule and scores the final unitary.
//!
//! Model tiers:
//! - `ideal`: the two- and four-dimensional qubit Hamiltonians driven
//!   directly by the protocol controls;
//! - `exact`: the full two-species Fock-space lattice model;
//! - `effective`: the second-order effective Hamiltonian of the lattice on
//!   the computation sector, rebuilt at every time step.

use num_complex::Complex64 as C64;
use thiserror::Error;

use super::config::{ConfigError, Model, RunConfig};
use crate::evolve::{self, gap_profile, propagate, EvolveError, PropagatorResult};
use crate::fock::{sector_indices, FockBasis, FockError, SectorSpec, Species};
use crate::gates::{
    compose_cnot, embed_gate, extracted_phase, gate_fidelity, sector_fidelity, target, GateError,
    GateKind, GateReport, NotMode, SectorReport,
};
use crate::hamiltonians::{
    hopping_structure, ideal_h1, ideal_h2, laser_structure, lattice_hamiltonian,
    effective_hamiltonian, HamiltonianError, LatticeParams, QubitControls, TwoQubitControls,
};
use crate::linalg::{identity, CMat};
use crate::schedule::{
    protocol_cnot_u1, protocol_cnot_u3, protocol_hadamard, protocol_phase, CalibrationMap,
    ProtocolConfig, Ramp, Schedule, Segment,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

impl RunError {
    /// CLI exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 3,
        }
    }
}

const IDEAL_TOL: f64 = 1e-8;
const LATTICE_TOL: f64 = 1e-6;
const GAP_SAMPLES: usize = 384;

fn protocol_config(cfg: &RunConfig) -> ProtocolConfig {
    ProtocolConfig {
        omega_m: cfg.gate.omega_m,
        delta_m: cfg.gate.delta_m,
        delta_tilde_m: cfg.gate.delta_tilde_m,
        theta: cfg.gate.theta.unwrap_or(std::f64::consts::FRAC_PI_2),
        total_time: cfg.schedule.total_time,
        ramp: cfg.schedule.ramp,
    }
}

fn tolerance(cfg: &RunConfig) -> f64 {
    cfg.tolerance.unwrap_or(match cfg.model {
        Model::Ideal => IDEAL_TOL,
        _ => LATTICE_TOL,
    })
}

fn adiabatic_segments(s: &Schedule) -> usize {
    s.segments.iter().filter(|seg| !seg.is_sudden()).count()
}

fn sample(s: &Schedule, t: f64, cal: Option<&CalibrationMap>) -> [f64; 2] {
    match cal {
        Some(c) => s.sample_calibrated(t, c),
        None => s.sample(t),
    }
    .expect("propagation samples stay inside the schedule")
}

/// Run one configured gate simulation and score it.
pub fn run_gate(cfg: &RunConfig) -> Result<GateReport, RunError> {
    cfg.validate()?;
    match (cfg.model, cfg.gate.kind) {
        (Model::Ideal, GateKind::Cnot) => ideal_cnot(cfg),
        (Model::Ideal, _) => ideal_local(cfg),
        (_, GateKind::Cnot) => lattice_cnot(cfg),
        (_, _) => lattice_local(cfg),
    }
}

/// The unitary of one ideal local protocol, used both by `run_gate` and by
/// the composed-NOT helper.
fn ideal_local_unitary(
    cfg: &RunConfig,
    kind: GateKind,
    tol: f64,
) -> Result<(PropagatorResult, Schedule), RunError> {
    let pc = protocol_config(cfg);
    let cal = cfg.calibration;
    let sched = match kind {
        GateKind::Phase => protocol_phase(&pc),
        GateKind::Hadamard => protocol_hadamard(&pc),
        _ => unreachable!("local protocols are phase and hadamard"),
    };
    let s = sched.clone();
    let h = move |t: f64| -> CMat {
        let p = sample(&s, t, cal.as_ref());
        match kind {
            GateKind::Phase => ideal_h1(&QubitControls {
                delta: 0.0,
                omega: p[0],
                phi: p[1],
            }),
            _ => ideal_h1(&QubitControls {
                delta: p[0],
                omega: p[1].abs(),
                phi: if p[1] >= 0.0 { 0.0 } else { std::f64::consts::PI },
            }),
        }
    };
    let steps = cfg.schedule.steps_per_segment * adiabatic_segments(&sched);
    let res = propagate(&h, sched.total_time(), steps, tol)?;
    Ok((res, sched))
}

fn ideal_local(cfg: &RunConfig) -> Result<GateReport, RunError> {
    let res = ideal_local_unitary(cfg, cfg.gate.kind, tolerance(cfg))?.0;
    let tgt = target(cfg.gate.kind, cfg.gate.theta)?;
    let fidelity = gate_fidelity(&tgt.matrix, &res.u_final)?;
    Ok(report(cfg, fidelity, 0.0, &res, extracted_phase(&tgt.matrix, &res.u_final), vec![]))
}

/// Composite CNOT at the ideal tier. The second conditional process runs as
/// two half-traces with a NOT on the target interleaved, which hands the
/// conditional phase to both target states and lets the composite cancel the
/// unknown dynamical phase of the first process.
fn ideal_cnot(cfg: &RunConfig) -> Result<GateReport, RunError> {
    let pc = protocol_config(cfg);
    let tol = tolerance(cfg);
    let cal = cfg.calibration;
    let u1s = protocol_cnot_u1(&pc);
    let u3s = protocol_cnot_u3(&u1s);
    let h2_of = |sched: Schedule| {
        move |t: f64| -> CMat {
            let p = sample(&sched, t, cal.as_ref());
            ideal_h2(&TwoQubitControls {
                delta_tilde: p[0],
                omega_x: p[1],
            })
        }
    };
    let steps = cfg.schedule.steps_per_segment * adiabatic_segments(&u1s);
    let total = u1s.total_time();
    let r1 = propagate(&h2_of(u1s.clone()), total, steps, tol)?;
    let h3 = h2_of(u3s);
    let ra = propagate(&|t| h3(t), total / 2.0, steps / 2, tol)?;
    let rb = propagate(&|t| h3(total / 2.0 + t), total / 2.0, steps / 2, tol)?;
    let x_t = embed_gate(
        &target(GateKind::Not, None)?.matrix.slice(ndarray::s![0..2, 0..2]).to_owned(),
        2,
        &[1],
    );
    // NOT on the target at the midpoint and the end of process 3
    let u3 = x_t.dot(&rb.u_final).dot(&x_t).dot(&ra.u_final);
    let composite = compose_cnot(&r1.u_final, &u3, NotMode::Ideal);
    let tgt = target(GateKind::Cnot, None)?;
    let fidelity = gate_fidelity(&tgt.matrix, &composite)?;
    let phase = extracted_phase(&tgt.matrix, &composite);
    let merged = PropagatorResult {
        unitarity_residual: r1
            .unitarity_residual
            .max(ra.unitarity_residual)
            .max(rb.unitarity_residual),
        min_gap: r1.min_gap.min(ra.min_gap).min(rb.min_gap),
        step_count: r1.step_count + ra.step_count + rb.step_count,
        converged: r1.converged && ra.converged && rb.converged,
        u_final: composite,
    };
    Ok(report(cfg, fidelity, 0.0, &merged, phase, vec![]))
}

/// A NOT built from simulated protocol runs: two Hadamard passages followed
/// by a pi phase gate, equal to `sigma_x` up to a global phase.
pub fn simulated_not(cfg: &RunConfig) -> Result<CMat, RunError> {
    let mut hc = cfg.clone();
    hc.gate.kind = GateKind::Hadamard;
    hc.model = Model::Ideal;
    let h = ideal_local_unitary(&hc, GateKind::Hadamard, tolerance(&hc))?.0;
    let mut pcfg = cfg.clone();
    pcfg.gate.kind = GateKind::Phase;
    pcfg.gate.theta = Some(std::f64::consts::PI);
    pcfg.model = Model::Ideal;
    let p = ideal_local_unitary(&pcfg, GateKind::Phase, tolerance(&pcfg))?.0;
    Ok(p.u_final.dot(&h.u_final).dot(&h.u_final))
}

/// Cached structure matrices of the lattice model.
struct LatticeDriver {
    basis: FockBasis,
    sector: Vec<usize>,
    /// Static part: interactions + tilt + static a hopping, sector-mean
    /// energy removed.
    h_static: CMat,
    /// Raising part `a† b` of the drive on the gate site.
    laser_up: CMat,
    /// Detuning structure on the gate site, `(n_a - n_b)/2`.
    detuning: Vec<f64>,
    hop_a: CMat,
    hop_b: CMat,
}

fn lattice_driver(cfg: &RunConfig, gate_site: usize, static_ja: f64) -> Result<LatticeDriver, RunError> {
    let sites = cfg.lattice.sites;
    let n_total: u32 = cfg.lattice.occupations.iter().map(|&n| n as u32).sum();
    let basis = FockBasis::new(sites, n_total)?;
    let spec = SectorSpec::new(cfg.lattice.occupations.clone());
    let sector = sector_indices(&basis, &spec)?;
    let p = LatticeParams {
        u_bb: cfg.params.u_bb,
        u_ab: cfg.params.u_ab,
        u_aa: cfg.params.u_aa,
        j_a: static_ja,
        j_b: 0.0,
        g: cfg.params.g,
    };
    let mut h_static = lattice_hamiltonian(&basis, &p, &[])?;
    let mean: f64 =
        sector.iter().map(|&i| h_static[(i, i)].re).sum::<f64>() / sector.len() as f64;
    for i in 0..basis.len() {
        h_static[(i, i)] -= C64::new(mean, 0.0);
    }
    let laser_up = laser_structure(&basis, gate_site)?;
    let detuning: Vec<f64> = basis
        .states()
        .map(|s| {
            0.5 * (s[crate::fock::mode_index(gate_site, Species::A)] as f64
                - s[crate::fock::mode_index(gate_site, Species::B)] as f64)
        })
        .collect();
    let hop_a = hopping_structure(&basis, Species::A)?;
    let hop_b = hopping_structure(&basis, Species::B)?;
    Ok(LatticeDriver {
        basis,
        sector,
        h_static,
        laser_up,
        detuning,
        hop_a,
        hop_b,
    })
}

impl LatticeDriver {
    /// `h_static + (delta) d + (omega/2)(e^{i phi} A + h.c.) + j_b (hop_b + (ja/jm) hop_a)`
    fn assemble(&self, delta: f64, omega: f64, phi: f64, j_b: f64, ja_ratio: f64) -> CMat {
        let dim = self.basis.len();
        let mut h = self.h_static.clone();
        if delta != 0.0 {
            for i in 0..dim {
                h[(i, i)] += C64::new(delta * self.detuning[i], 0.0);
            }
        }
        if omega != 0.0 {
            let amp = C64::from_polar(0.5 * omega, phi);
            for r in 0..dim {
                for c in 0..dim {
                    let v = self.laser_up[(r, c)];
                    if v != C64::new(0.0, 0.0) {
                        h[(r, c)] += amp * v;
                        h[(c, r)] += (amp * v).conj();
                    }
                }
            }
        }
        if j_b != 0.0 {
            for r in 0..dim {
                for c in 0..dim {
                    h[(r, c)] += self.hop_b[(r, c)] * j_b + self.hop_a[(r, c)] * (j_b * ja_ratio);
                }
            }
        }
        h
    }

    /// Split into diagonal energies and the off-diagonal perturbation, then
    /// project to the second-order effective Hamiltonian on the sector.
    fn effective(&self, h: &CMat) -> Result<CMat, HamiltonianError> {
        let dim = self.basis.len();
        let h0: Vec<f64> = (0..dim).map(|i| h[(i, i)].re).collect();
        let mut v = h.clone();
        for i in 0..dim {
            v[(i, i)] = C64::new(0.0, 0.0);
        }
        effective_hamiltonian(&h0, &v, &self.sector, None)
    }
}

struct LatticeOutcome {
    res: PropagatorResult,
    restricted_dim: usize,
}

fn run_lattice_protocol(
    cfg: &RunConfig,
    driver: &LatticeDriver,
    sched: &Schedule,
    controls: impl Fn([f64; 2]) -> (f64, f64, f64, f64) + Sync,
    effective: bool,
    steps: usize,
) -> Result<LatticeOutcome, RunError> {
    let cal = cfg.calibration;
    let ja_ratio = if cfg.params.j_m > 0.0 {
        cfg.params.j_a / cfg.params.j_m
    } else {
        0.0
    };
    let tol = tolerance(cfg);
    let h_full = |t: f64| -> CMat {
        let p = sample(sched, t, cal.as_ref());
        let (delta, omega, phi, j_b) = controls(p);
        driver.assemble(delta, omega, phi, j_b, ja_ratio)
    };
    let total = sched.total_time();
    if effective {
        let h_eff = |t: f64| -> CMat {
            driver
                .effective(&h_full(t))
                .expect("sector stays gapped along the path")
        };
        // probe once so a genuinely gapless configuration errors out cleanly
        driver.effective(&h_full(0.0))?;
        let res = propagate(&h_eff, total, steps, tol)?;
        let dim = res.u_final.nrows();
        Ok(LatticeOutcome {
            res,
            restricted_dim: dim,
        })
    } else {
        let res = propagate(&h_full, total, steps, tol)?;
        let dim = driver.sector.len();
        Ok(LatticeOutcome {
            res,
            restricted_dim: dim,
        })
    }
}

fn lattice_local(cfg: &RunConfig) -> Result<GateReport, RunError> {
    let gate_site = 0usize;
    let driver = lattice_driver(cfg, gate_site, cfg.params.j_a)?;
    let pc = protocol_config(cfg);
    let effective = cfg.model == Model::Effective;
    let (sched, controls): (Schedule, Box<dyn Fn([f64; 2]) -> (f64, f64, f64, f64) + Sync>) =
        match cfg.gate.kind {
            GateKind::Phase => (
                protocol_phase(&pc),
                Box::new(|p: [f64; 2]| (0.0, p[0], p[1], 0.0)),
            ),
            GateKind::Hadamard => (
                protocol_hadamard(&pc),
                Box::new(|p: [f64; 2]| {
                    (
                        p[0],
                        p[1].abs(),
                        if p[1] >= 0.0 { 0.0 } else { std::f64::consts::PI },
                        0.0,
                    )
                }),
            ),
            _ => unreachable!(),
        };
    let steps = cfg.schedule.steps_per_segment * adiabatic_segments(&sched);
    let out = run_lattice_protocol(cfg, &driver, &sched, &controls, effective, steps)?;
    let tgt = target(cfg.gate.kind, cfg.gate.theta)?;
    let spec = SectorSpec::new(cfg.lattice.occupations.clone());
    score_lattice(cfg, &driver, &sched, &controls, out, &tgt, &spec, &[gate_site], effective)
}

/// Adiabatic bracket that turns the conditional shift on before the listed
/// path and off after it; the lattice's computational basis coincides with
/// the dressed eigenbasis only at `j_b = 0`.
fn bracket_shift(s: &Schedule, ramp_time: f64, ramp: Ramp) -> Schedule {
    let first = s.segments.first().expect("nonempty schedule").start;
    let last = s.segments.last().expect("nonempty schedule").end;
    let mut segments = Vec::with_capacity(s.segments.len() + 2);
    segments.push(Segment {
        start: [0.0, first[1]],
        end: first,
        duration: ramp_time,
        ramp,
    });
    segments.extend(s.segments.iter().copied());
    segments.push(Segment {
        start: last,
        end: [0.0, last[1]],
        duration: ramp_time,
        ramp,
    });
    Schedule::new(s.space, segments)
}

/// Permutation flipping the qubit on `site` inside the computation sector and
/// acting as the identity elsewhere: the idealized interleaved NOT.
fn sector_not(dim: usize, sector: &[usize], sites: usize, site: usize) -> CMat {
    let mut u = identity(dim);
    let mask = 1usize << (sites - 1 - site);
    for z in 0..sector.len() {
        let zp = z ^ mask;
        u[(sector[z], sector[z])] = C64::new(0.0, 0.0);
        u[(sector[zp], sector[z])] = C64::new(1.0, 0.0);
    }
    u
}

fn lattice_cnot(cfg: &RunConfig) -> Result<GateReport, RunError> {
    let target_site = 1usize;
    let driver = lattice_driver(cfg, target_site, 0.0)?;
    let pc = protocol_config(cfg);
    let effective = cfg.model == Model::Effective;
    let gm = cfg.params.g - cfg.params.u_bb;
    let u1_listed = protocol_cnot_u1(&pc);
    let u1s = bracket_shift(&u1_listed, pc.total_time / 8.0, cfg.schedule.ramp);
    let u3s = protocol_cnot_u3(&u1s);
    // shift control realized by the b hopping: j_b = sqrt(dt * (g - u_bb))
    let controls = move |p: [f64; 2]| -> (f64, f64, f64, f64) {
        let j_b = (p[0] * gm).max(0.0).sqrt();
        (
            0.0,
            p[1].abs(),
            if p[1] >= 0.0 { 0.0 } else { std::f64::consts::PI },
            j_b,
        )
    };
    let steps = cfg.schedule.steps_per_segment * adiabatic_segments(&u1s);
    let out1 = run_lattice_protocol(cfg, &driver, &u1s, controls, effective, steps)?;

    // process 3: same shift trace, drive off, target NOT at midpoint and end
    let cal = cfg.calibration;
    let ja_ratio = if cfg.params.j_m > 0.0 {
        cfg.params.j_a / cfg.params.j_m
    } else {
        0.0
    };
    let tol = tolerance(cfg);
    let h3_full = |t: f64| -> CMat {
        let p = sample(&u3s, t, cal.as_ref());
        let (d, om, ph, jb) = controls(p);
        driver.assemble(d, om, ph, jb, ja_ratio)
    };
    let total = u3s.total_time();
    let sx = ndarray::array![
        [C64::new(0., 0.), C64::new(1., 0.)],
        [C64::new(1., 0.), C64::new(0., 0.)]
    ];
    let (x_t, x_c): (CMat, CMat) = if effective {
        (
            embed_gate(&sx, cfg.lattice.sites, &[target_site]),
            embed_gate(&sx, cfg.lattice.sites, &[0]),
        )
    } else {
        let d = driver.basis.len();
        (
            sector_not(d, &driver.sector, cfg.lattice.sites, target_site),
            sector_not(d, &driver.sector, cfg.lattice.sites, 0),
        )
    };
    let (ra, rb) = if effective {
        let h_eff = |t: f64| driver.effective(&h3_full(t)).expect("gapped");
        driver.effective(&h3_full(0.0))?;
        (
            propagate(&|t| h_eff(t), total / 2.0, steps / 2, tol)?,
            propagate(&|t| h_eff(total / 2.0 + t), total / 2.0, steps / 2, tol)?,
        )
    } else {
        (
            propagate(&|t| h3_full(t), total / 2.0, steps / 2, tol)?,
            propagate(&|t| h3_full(total / 2.0 + t), total / 2.0, steps / 2, tol)?,
        )
    };
    let u3 = x_t.dot(&rb.u_final).dot(&x_t).dot(&ra.u_final);
    let composite = x_c.dot(&u3).dot(&x_c).dot(&out1.res.u_final);
    let merged = PropagatorResult {
        unitarity_residual: out1
            .res
            .unitarity_residual
            .max(ra.unitarity_residual)
            .max(rb.unitarity_residual),
        min_gap: 0.0,
        step_count: out1.res.step_count + ra.step_count + rb.step_count,
        converged: out1.res.converged && ra.converged && rb.converged,
        u_final: composite,
    };
    let out = LatticeOutcome {
        res: merged,
        restricted_dim: out1.restricted_dim,
    };
    let tgt = target(GateKind::Cnot, None)?;
    let spec = SectorSpec::new(cfg.lattice.occupations.clone());
    score_lattice(
        cfg,
        &driver,
        &u1s,
        &move |p| controls(p),
        out,
        &tgt,
        &spec,
        &[0, 1],
        effective,
    )
}

#[allow(clippy::too_many_arguments)]
fn score_lattice(
    cfg: &RunConfig,
    driver: &LatticeDriver,
    sched: &Schedule,
    controls: &(dyn Fn([f64; 2]) -> (f64, f64, f64, f64) + Sync),
    out: LatticeOutcome,
    tgt: &crate::gates::GateTarget,
    spec: &SectorSpec,
    gate_sites: &[usize],
    effective: bool,
) -> Result<GateReport, RunError> {
    let cal = cfg.calibration;
    let ja_ratio = if cfg.params.j_m > 0.0 {
        cfg.params.j_a / cfg.params.j_m
    } else {
        0.0
    };
    // sector-aware gap profile along the driven path
    let h_full = |t: f64| -> CMat {
        let p = sample(sched, t, cal.as_ref());
        let (d, om, ph, jb) = controls(p);
        driver.assemble(d, om, ph, jb, ja_ratio)
    };
    let profile = gap_profile(&h_full, sched.total_time(), &driver.sector, GAP_SAMPLES);
    let min_gap = profile.gaps.iter().copied().fold(f64::INFINITY, f64::min);

    let (fidelity, phase, leak, sectors) = if effective {
        let ideal = embed_gate(&tgt.matrix, cfg.lattice.sites, gate_sites);
        let f = gate_fidelity(&ideal, &out.res.u_final)?;
        let ph = extracted_phase(&ideal, &out.res.u_final);
        let sec = SectorReport {
            occupations: spec.occupations.clone(),
            fidelity: f,
            error: 1.0 - f,
            phase: ph,
            leakage: 0.0,
            idle_ok: true,
        };
        (f, ph, 0.0, vec![sec])
    } else {
        let sf = sector_fidelity(&out.res.u_final, tgt, &driver.basis, spec, gate_sites)?;
        let sec = SectorReport {
            occupations: spec.occupations.clone(),
            fidelity: sf.fidelity,
            error: sf.error,
            phase: sf.phase,
            leakage: sf.leakage,
            idle_ok: sf.idle_ok,
        };
        (sf.fidelity, sf.phase, sf.leakage, vec![sec])
    };
    let _ = out.restricted_dim;
    let mut rep = report(cfg, fidelity, leak, &out.res, phase, sectors);
    rep.min_gap = if min_gap.is_finite() { min_gap } else { 0.0 };
    Ok(rep)
}

fn report(
    cfg: &RunConfig,
    fidelity: f64,
    leakage: f64,
    res: &PropagatorResult,
    phase: f64,
    sectors: Vec<SectorReport>,
) -> GateReport {
    GateReport {
        gate: cfg.gate.kind,
        model: cfg.model.to_string(),
        theta: cfg.gate.theta,
        fidelity,
        error: 1.0 - fidelity,
        leakage,
        min_gap: res.min_gap,
        unitarity_residual: res.unitarity_residual,
        converged: res.converged,
        step_count: res.step_count,
        total_time: cfg.schedule.total_time,
        extracted_phase: phase,
        sectors,
        seed: cfg.seed,
    }
}

/// Expose the configured model's Hamiltonian driver for spectrum dumps.
/// For the CNOT the trace of the first conditional process is used.
pub fn build_spectrum_driver(
    cfg: &RunConfig,
) -> Result<(Box<dyn Fn(f64) -> CMat + Sync + Send>, f64, Vec<usize>), RunError> {
    cfg.validate()?;
    let pc = protocol_config(cfg);
    let cal = cfg.calibration;
    match cfg.model {
        Model::Ideal => match cfg.gate.kind {
            GateKind::Phase => {
                let s = protocol_phase(&pc);
                let total = s.total_time();
                let f = move |t: f64| {
                    let p = sample(&s, t, cal.as_ref());
                    ideal_h1(&QubitControls {
                        delta: 0.0,
                        omega: p[0],
                        phi: p[1],
                    })
                };
                Ok((Box::new(f), total, vec![0, 1]))
            }
            GateKind::Hadamard => {
                let s = protocol_hadamard(&pc);
                let total = s.total_time();
                let f = move |t: f64| {
                    let p = sample(&s, t, cal.as_ref());
                    ideal_h1(&QubitControls {
                        delta: p[0],
                        omega: p[1].abs(),
                        phi: if p[1] >= 0.0 { 0.0 } else { std::f64::consts::PI },
                    })
                };
                Ok((Box::new(f), total, vec![0, 1]))
            }
            _ => {
                let s = protocol_cnot_u1(&pc);
                let total = s.total_time();
                let f = move |t: f64| {
                    let p = sample(&s, t, cal.as_ref());
                    ideal_h2(&TwoQubitControls {
                        delta_tilde: p[0],
                        omega_x: p[1],
                    })
                };
                Ok((Box::new(f), total, vec![0, 1, 2, 3]))
            }
        },
        _ => {
            let is_cnot = cfg.gate.kind == GateKind::Cnot;
            let gate_site = if is_cnot { 1 } else { 0 };
            let static_ja = if is_cnot { 0.0 } else { cfg.params.j_a };
            let driver = lattice_driver(cfg, gate_site, static_ja)?;
            let sector = driver.sector.clone();
            let gm = cfg.params.g - cfg.params.u_bb;
            let ja_ratio = if cfg.params.j_m > 0.0 {
                cfg.params.j_a / cfg.params.j_m
            } else {
                0.0
            };
            let sched = match cfg.gate.kind {
                GateKind::Phase => protocol_phase(&pc),
                GateKind::Hadamard => protocol_hadamard(&pc),
                _ => bracket_shift(
                    &protocol_cnot_u1(&pc),
                    pc.total_time / 8.0,
                    cfg.schedule.ramp,
                ),
            };
            let total = sched.total_time();
            let kind = cfg.gate.kind;
            let f = move |t: f64| {
                let p = sample(&sched, t, cal.as_ref());
                let (d, om, ph, jb) = match kind {
                    GateKind::Phase => (0.0, p[0], p[1], 0.0),
                    GateKind::Hadamard => (
                        p[0],
                        p[1].abs(),
                        if p[1] >= 0.0 { 0.0 } else { std::f64::consts::PI },
                        0.0,
                    ),
                    _ => {
                        let jb = (p[0] * gm).max(0.0).sqrt();
                        (
                            0.0,
                            p[1].abs(),
                            if p[1] >= 0.0 { 0.0 } else { std::f64::consts::PI },
                            jb,
                        )
                    }
                };
                driver.assemble(d, om, ph, jb, ja_ratio)
            };
            Ok((Box::new(f), total, sector))
        }
    }
}

/// Run the protocol at the ideal tier and compare against the
/// adiabatic-transport prediction; returns (propagated, predicted) fidelity.
pub fn transport_consistency(cfg: &RunConfig, samples: usize) -> Result<f64, RunError> {
    let (h, total, tracked) = build_spectrum_driver(cfg)?;
    let steps = cfg.schedule.steps_per_segment * 4;
    let res = propagate(h.as_ref(), total, steps, tolerance(cfg))?;
    let tr = evolve::adiabatic_transport(h.as_ref(), total, &tracked, samples)?;
    Ok(gate_fidelity(&tr.predicted, &res.u_final)?)
}
