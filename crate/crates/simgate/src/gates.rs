//! Ideal gate targets, fidelities modulo global phase, per-sector fidelity on
//! the Fock space and the CNOT composite.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{sector_indices, FockBasis, FockError, SectorSpec};
use crate::linalg::{identity, kron, unitarity_residual, CMat};

#[derive(Debug, Error)]
pub enum GateError {
    #[error("phase gate needs an angle")]
    MissingAngle,
    #[error("matrix dimensions {0} and {1} differ")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} is not a power of two")]
    NotQubitSized(usize),
    #[error("gate acts on {gate} qubits but {given} sites were named")]
    GateSiteCount { gate: usize, given: usize },
    #[error(transparent)]
    Fock(#[from] FockError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Phase,
    Hadamard,
    Cnot,
    Not,
}

/// An ideal target unitary.
#[derive(Debug, Clone)]
pub struct GateTarget {
    pub kind: GateKind,
    pub matrix: CMat,
    pub qubits: usize,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Build a named target.
///
/// - phase: `diag(e^{i theta/2}, e^{-i theta/2})`
/// - hadamard: the mapping `|0>+|1> -> sqrt(2)|0>`, `|0>-|1> -> -sqrt(2)|1>`
/// - cnot: `|10> -> |11>`, `|11> -> -|10>`, identity on the control-0 block
/// - not: `sigma_x` on the first qubit of a two-qubit register
pub fn target(kind: GateKind, theta: Option<f64>) -> Result<GateTarget, GateError> {
    let (matrix, qubits) = match kind {
        GateKind::Phase => {
            let th = theta.ok_or(GateError::MissingAngle)?;
            let mut m = Array2::from_elem((2, 2), c(0.0, 0.0));
            m[(0, 0)] = C64::from_polar(1.0, 0.5 * th);
            m[(1, 1)] = C64::from_polar(1.0, -0.5 * th);
            (m, 1)
        }
        GateKind::Hadamard => {
            let s = 1.0 / 2.0_f64.sqrt();
            let m = ndarray::array![[c(s, 0.), c(s, 0.)], [c(-s, 0.), c(s, 0.)]];
            (m, 1)
        }
        GateKind::Cnot => {
            let mut m = identity(4);
            m[(2, 2)] = c(0.0, 0.0);
            m[(3, 3)] = c(0.0, 0.0);
            m[(3, 2)] = c(1.0, 0.0);
            m[(2, 3)] = c(-1.0, 0.0);
            (m, 2)
        }
        GateKind::Not => {
            let sx = ndarray::array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
            (kron(&sx, &identity(2)), 2)
        }
    };
    Ok(GateTarget {
        kind,
        matrix,
        qubits,
    })
}

fn qubit_count(dim: usize) -> Result<usize, GateError> {
    if !dim.is_power_of_two() {
        return Err(GateError::NotQubitSized(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Gate fidelity `|Tr(U_ideal† U_real)|^2 / 4^n`, invariant under a global
/// phase and normalized so identical unitaries score 1.
pub fn gate_fidelity(u_ideal: &CMat, u_real: &CMat) -> Result<f64, GateError> {
    if u_ideal.nrows() != u_real.nrows() {
        return Err(GateError::DimensionMismatch(u_ideal.nrows(), u_real.nrows()));
    }
    let n = qubit_count(u_ideal.nrows())?;
    let tr = trace_product(u_ideal, u_real);
    Ok(tr.norm_sqr() / 4.0_f64.powi(n as i32))
}

/// `arg Tr(U_ideal† U_real)`: the global phase by which the realized gate
/// differs from the target.
pub fn extracted_phase(u_ideal: &CMat, u_real: &CMat) -> f64 {
    trace_product(u_ideal, u_real).arg()
}

fn trace_product(u_ideal: &CMat, u_real: &CMat) -> C64 {
    let n = u_ideal.nrows();
    let mut tr = c(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += u_ideal[(k, i)].conj() * u_real[(k, i)];
        }
    }
    tr
}

/// Embed a gate acting on `gate_qubits` (positions in a register of
/// `qubits`, most significant first) into the full `2^qubits` space.
pub fn embed_gate(gate: &CMat, qubits: usize, gate_qubits: &[usize]) -> CMat {
    let dim = 1usize << qubits;
    let gq = gate_qubits;
    let mut m = Array2::from_elem((dim, dim), c(0.0, 0.0));
    let idle: Vec<usize> = (0..qubits).filter(|q| !gq.contains(q)).collect();
    for col in 0..dim {
        let bit = |state: usize, q: usize| (state >> (qubits - 1 - q)) & 1;
        let gcol: usize = gq.iter().fold(0, |acc, &q| (acc << 1) | bit(col, q));
        for (grow, _) in (0..(1 << gq.len())).map(|r| (r, ())) {
            let amp = gate[(grow, gcol)];
            if amp == c(0.0, 0.0) {
                continue;
            }
            let mut row = 0usize;
            for q in 0..qubits {
                let b = if let Some(pos) = gq.iter().position(|&x| x == q) {
                    (grow >> (gq.len() - 1 - pos)) & 1
                } else {
                    bit(col, q)
                };
                row = (row << 1) | b;
            }
            let _ = &idle;
            m[(row, col)] = amp;
        }
    }
    m
}

/// Per-sector gate quality: fidelity, the irrelevant sector phase, leakage of
/// the restriction, and how far idle sites are from acting as the identity.
#[derive(Debug, Clone, Serialize)]
pub struct SectorFidelity {
    pub fidelity: f64,
    pub error: f64,
    pub phase: f64,
    pub leakage: f64,
    /// Residual of the idle-site identity check; flagged against 1e-6.
    pub idle_residual: f64,
    pub idle_ok: bool,
}

const IDLE_TOLERANCE: f64 = 1e-6;

/// Restrict a full-space unitary to one computation sector and compare it to
/// a gate on `gate_sites` (identity elsewhere).
pub fn sector_fidelity(
    u_full: &CMat,
    gate: &GateTarget,
    basis: &FockBasis,
    spec: &SectorSpec,
    gate_sites: &[usize],
) -> Result<SectorFidelity, GateError> {
    if gate_sites.len() != gate.qubits {
        return Err(GateError::GateSiteCount {
            gate: gate.qubits,
            given: gate_sites.len(),
        });
    }
    let idx = sector_indices(basis, spec)?;
    let n = idx.len();
    let mut restricted = Array2::from_elem((n, n), c(0.0, 0.0));
    for (r, &ir) in idx.iter().enumerate() {
        for (cc, &ic) in idx.iter().enumerate() {
            restricted[(r, cc)] = u_full[(ir, ic)];
        }
    }
    let leakage = crate::evolve::leakage(u_full, &idx);
    let qubits = basis.sites();
    let ideal = embed_gate(&gate.matrix, qubits, gate_sites);
    let fidelity = gate_fidelity(&ideal, &restricted)?;
    let phase = extracted_phase(&ideal, &restricted);
    let idle_residual = idle_identity_residual(&restricted, qubits, gate_sites);
    Ok(SectorFidelity {
        fidelity,
        error: 1.0 - fidelity,
        phase,
        leakage,
        idle_residual,
        idle_ok: idle_residual <= IDLE_TOLERANCE + leakage.sqrt(),
    })
}

/// How far the restricted unitary is from `A (x) I` on the idle qubits:
/// the maximum difference between idle-diagonal blocks plus the largest
/// idle-off-diagonal element.
fn idle_identity_residual(restricted: &CMat, qubits: usize, gate_sites: &[usize]) -> f64 {
    let idle: Vec<usize> = (0..qubits).filter(|q| !gate_sites.contains(q)).collect();
    if idle.is_empty() {
        return 0.0;
    }
    let dim = restricted.nrows();
    let idle_bits = |s: usize| -> usize {
        idle.iter()
            .fold(0, |acc, &q| (acc << 1) | ((s >> (qubits - 1 - q)) & 1))
    };
    let gate_bits = |s: usize| -> usize {
        gate_sites
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((s >> (qubits - 1 - q)) & 1))
    };
    let mut worst_off = 0.0_f64;
    let mut blocks: std::collections::HashMap<usize, Vec<C64>> = std::collections::HashMap::new();
    let gdim = 1usize << gate_sites.len();
    for r in 0..dim {
        for col in 0..dim {
            let z = restricted[(r, col)];
            if idle_bits(r) != idle_bits(col) {
                worst_off = worst_off.max(z.norm());
            } else {
                let key = idle_bits(r);
                let e = blocks.entry(key).or_insert_with(|| vec![c(0.0, 0.0); gdim * gdim]);
                e[gate_bits(r) * gdim + gate_bits(col)] = z;
            }
        }
    }
    let mut worst_diff = 0.0_f64;
    let keys: Vec<usize> = blocks.keys().copied().collect();
    for w in keys.windows(2) {
        let a = &blocks[&w[0]];
        let b = &blocks[&w[1]];
        for k in 0..a.len() {
            worst_diff = worst_diff.max((a[k] - b[k]).norm());
        }
    }
    worst_off.max(worst_diff)
}

/// How the local NOT in the CNOT composite is realized.
pub enum NotMode {
    /// Exact `sigma_x (x) I`.
    Ideal,
    /// A caller-supplied unitary, e.g. a NOT composed from simulated
    /// phase/Hadamard protocol runs.
    Custom(CMat),
}

/// `U2 U3 U2 U1`: the conditional process, the control NOT, the second
/// conditional process and the control NOT again. The leftover global phase
/// stays in place; fidelity is phase invariant.
pub fn compose_cnot(u1: &CMat, u3: &CMat, u2_mode: NotMode) -> CMat {
    let u2 = match u2_mode {
        NotMode::Ideal => target(GateKind::Not, None).unwrap().matrix,
        NotMode::Custom(m) => m,
    };
    u2.dot(u3).dot(&u2).dot(u1)
}

/// Report for one simulated gate; the JSON contract of `simgate run`.
#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub gate: GateKind,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub fidelity: f64,
    pub error: f64,
    pub leakage: f64,
    pub min_gap: f64,
    pub unitarity_residual: f64,
    pub converged: bool,
    pub step_count: usize,
    pub total_time: f64,
    pub extracted_phase: f64,
    pub sectors: Vec<SectorReport>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub occupations: Vec<u8>,
    pub fidelity: f64,
    pub error: f64,
    pub phase: f64,
    pub leakage: f64,
    pub idle_ok: bool,
}

impl GateReport {
    pub fn unitarity_ok(&self) -> bool {
        self.unitarity_residual <= 1e-10
    }
}

pub use crate::linalg::CMat as Unitary;

#[allow(dead_code)]
fn _assert_unitary(u: &CMat) {
    debug_assert!(unitarity_residual(u) < 1e-8);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use ndarray::array;

    #[test]
    fn phase_target_pi() {
        let t = target(GateKind::Phase, Some(std::f64::consts::PI)).unwrap();
        assert!((t.matrix[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((t.matrix[(1, 1)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(target(GateKind::Phase, None).is_err());
    }

    #[test]
    fn hadamard_maps_plus_to_zero() {
        let t = target(GateKind::Hadamard, None).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        let plus = [c(s, 0.0), c(s, 0.0)];
        let out: Vec<C64> = (0..2)
            .map(|r| t.matrix[(r, 0)] * plus[0] + t.matrix[(r, 1)] * plus[1])
            .collect();
        assert!((out[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15);
        // |-> -> -|1>
        let minus = [c(s, 0.0), c(-s, 0.0)];
        let out: Vec<C64> = (0..2)
            .map(|r| t.matrix[(r, 0)] * minus[0] + t.matrix[(r, 1)] * minus[1])
            .collect();
        assert!(out[0].norm() < 1e-15);
        assert!((out[1] + c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cnot_target_columns() {
        let t = target(GateKind::Cnot, None).unwrap();
        // |10> -> |11>, |11> -> -|10>
        assert!((t.matrix[(3, 2)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((t.matrix[(2, 3)] + c(1.0, 0.0)).norm() < 1e-15);
        assert!(unitarity_residual(&t.matrix) < 1e-12);
    }

    #[test]
    fn fidelity_basics() {
        let t = target(GateKind::Hadamard, None).unwrap().matrix;
        assert!((gate_fidelity(&t, &t).unwrap() - 1.0).abs() < 1e-14);
        let phased = t.mapv(|z| z * C64::from_polar(1.0, 0.7));
        assert!((gate_fidelity(&t, &phased).unwrap() - 1.0).abs() < 1e-14);
        let sx = target(GateKind::Not, None).unwrap().matrix;
        let id = identity(4);
        assert!(gate_fidelity(&id, &sx).unwrap() < 1e-14);
    }

    #[test]
    fn fidelity_invariances_on_random_unitaries() {
        // left invariance F(WU, WV) = F(U, V) and symmetry, on a seeded family
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut random_unitary = |n: usize| -> CMat {
            let mut h = Array2::from_elem((n, n), c(0.0, 0.0));
            for i in 0..n {
                h[(i, i)] = c(rng.gen_range(-1.0..1.0), 0.0);
                for j in (i + 1)..n {
                    let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    h[(i, j)] = z;
                    h[(j, i)] = z.conj();
                }
            }
            crate::linalg::expm_ih(&h, 1.0)
        };
        for _ in 0..4 {
            let u = random_unitary(4);
            let v = random_unitary(4);
            let w = random_unitary(4);
            let f_uv = gate_fidelity(&u, &v).unwrap();
            let f_vu = gate_fidelity(&v, &u).unwrap();
            let f_wuv = gate_fidelity(&w.dot(&u), &w.dot(&v)).unwrap();
            assert!((f_uv - f_vu).abs() < 1e-12);
            assert!((f_uv - f_wuv).abs() < 1e-12);
            assert!((0.0..=1.0 + 1e-12).contains(&f_uv));
        }
    }

    #[test]
    fn embed_on_first_of_two() {
        let p = target(GateKind::Phase, Some(1.0)).unwrap();
        let e = embed_gate(&p.matrix, 2, &[0]);
        let expect = kron(&p.matrix, &identity(2));
        assert!(max_abs_diff(&e, &expect) < 1e-15);
        let e1 = embed_gate(&p.matrix, 2, &[1]);
        let expect1 = kron(&identity(2), &p.matrix);
        assert!(max_abs_diff(&e1, &expect1) < 1e-15);
    }

    #[test]
    fn sector_fidelity_exact_embedding() {
        let basis = FockBasis::new(2, 3).unwrap();
        let spec = SectorSpec::new(vec![2, 1]);
        let idx = sector_indices(&basis, &spec).unwrap();
        let gate = target(GateKind::Phase, Some(0.9)).unwrap();
        let ideal = embed_gate(&gate.matrix, 2, &[0]);
        let mut u = identity(basis.len());
        for (r, &ir) in idx.iter().enumerate() {
            for (cc, &ic) in idx.iter().enumerate() {
                u[(ir, ic)] = ideal[(r, cc)];
            }
        }
        let sf = sector_fidelity(&u, &gate, &basis, &spec, &[0]).unwrap();
        assert!((sf.fidelity - 1.0).abs() < 1e-12);
        assert!(sf.leakage < 1e-12);
        assert!(sf.idle_ok);
    }

    #[test]
    fn sector_fidelity_identity_vs_pi_phase() {
        let basis = FockBasis::new(1, 2).unwrap();
        let spec = SectorSpec::new(vec![2]);
        let gate = target(GateKind::Phase, Some(std::f64::consts::PI)).unwrap();
        let u = identity(basis.len());
        let sf = sector_fidelity(&u, &gate, &basis, &spec, &[0]).unwrap();
        assert!(sf.fidelity < 1e-14);
    }

    #[test]
    fn sector_phase_invariance() {
        // multiplying by a sector-constant phase shifts phi, not F
        let basis = FockBasis::new(2, 2).unwrap();
        let spec = SectorSpec::new(vec![1, 1]);
        let idx = sector_indices(&basis, &spec).unwrap();
        let gate = target(GateKind::Phase, Some(0.6)).unwrap();
        let ideal = embed_gate(&gate.matrix, 2, &[0]);
        let mut u = identity(basis.len());
        for (r, &ir) in idx.iter().enumerate() {
            for (cc, &ic) in idx.iter().enumerate() {
                u[(ir, ic)] = ideal[(r, cc)];
            }
        }
        let before = sector_fidelity(&u, &gate, &basis, &spec, &[0]).unwrap();
        let phased = u.mapv(|z| z * C64::from_polar(1.0, 1.234));
        let after = sector_fidelity(&phased, &gate, &basis, &spec, &[0]).unwrap();
        assert!((before.fidelity - after.fidelity).abs() < 1e-12);
        let dphi = (after.phase - before.phase - 1.234).rem_euclid(2.0 * std::f64::consts::PI);
        assert!(dphi.min(2.0 * std::f64::consts::PI - dphi) < 1e-9);
    }

    #[test]
    fn compose_cnot_examples() {
        let cnot = target(GateKind::Cnot, None).unwrap().matrix;
        let id = identity(4);
        // u1 = cnot target, u3 = I: the two NOTs cancel
        let u = compose_cnot(&cnot, &id, NotMode::Ideal);
        assert!((gate_fidelity(&cnot, &u).unwrap() - 1.0).abs() < 1e-12);
        // u1 = u3 = I: composite is I, F = |Tr cnot|^2/16 = 1/4
        let u = compose_cnot(&id, &id, NotMode::Ideal);
        assert!(max_abs_diff(&u, &id) < 1e-14);
        assert!((gate_fidelity(&cnot, &u).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn simulated_not_composition() {
        // phase(pi) after two paper Hadamards equals sigma_x up to a phase
        let h = target(GateKind::Hadamard, None).unwrap().matrix;
        let p = target(GateKind::Phase, Some(std::f64::consts::PI)).unwrap().matrix;
        let m = p.dot(&h).dot(&h);
        let sx = array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
        assert!((gate_fidelity(&sx, &m).unwrap() - 1.0).abs() < 1e-12);
    }
}
