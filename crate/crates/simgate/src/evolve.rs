//! Time-ordered propagation, adiabatic-transport prediction and spectral
//! diagnostics.
//!
//! The propagator evaluates the Hamiltonian at step midpoints and applies the
//! exact step exponential through a Hermitian eigendecomposition, so unitarity
//! holds to rounding at any step size; accuracy in the time dependence is
//! second order and is verified by step doubling.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{
    dagger, eigh, eigh_preconditioned, hermiticity_residual, max_abs, max_abs_diff,
    unitarity_residual, CMat, Eigh,
};

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("Hamiltonian is not Hermitian at t = {t}: residual {residual:.3e}")]
    NonHermitian { t: f64, residual: f64 },
    #[error(
        "propagation did not converge: |U_n - U_2n| = {distance:.3e} > {tol:.3e} at {steps} steps"
    )]
    NotConverged {
        distance: f64,
        tol: f64,
        steps: usize,
        coarse: Box<CMat>,
        fine: Box<CMat>,
    },
    #[error("eigenstate tracking ambiguous: gap {gap:.3e} below {threshold:.3e} at t = {t}")]
    GapCollapse { gap: f64, threshold: f64, t: f64 },
    #[error("tracked index {0} out of range for dimension {1}")]
    TrackedOutOfRange(usize, usize),
}

/// Final unitary of one propagation plus its health diagnostics.
#[derive(Debug, Clone)]
pub struct PropagatorResult {
    pub u_final: CMat,
    pub unitarity_residual: f64,
    /// Smallest adjacent spectral gap seen over the path.
    pub min_gap: f64,
    pub step_count: usize,
    pub converged: bool,
}

pub const DEFAULT_PROPAGATE_TOL: f64 = 1e-8;
const MAX_DOUBLINGS: usize = 14;

/// Single propagation at a fixed step count. No convergence check.
pub fn propagate_fixed<H>(h_of_t: &H, t_total: f64, steps: usize) -> Result<PropagatorResult, EvolveError>
where
    H: Fn(f64) -> CMat + ?Sized,
{
    assert!(steps >= 1, "need at least one step");
    let dt = t_total / steps as f64;
    let probe = h_of_t(0.5 * dt);
    let dim = probe.nrows();
    let mut u = crate::linalg::identity(dim);
    let mut basis: Option<CMat> = None;
    let mut min_gap = f64::INFINITY;
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let h = h_of_t(t_mid);
        let scale = max_abs(&h).max(1.0);
        let herm = hermiticity_residual(&h);
        if herm > 1e-10 * scale {
            return Err(EvolveError::NonHermitian {
                t: t_mid,
                residual: herm,
            });
        }
        let e = match &basis {
            Some(v) => eigh_preconditioned(&h, v),
            None => eigh(&h),
        };
        for j in 1..dim {
            min_gap = min_gap.min(e.values[j] - e.values[j - 1]);
        }
        u = apply_step(&e, dt, &u);
        basis = Some(e.vectors);
    }
    if dim == 1 {
        min_gap = 0.0;
    }
    let res = unitarity_residual(&u);
    Ok(PropagatorResult {
        u_final: u,
        unitarity_residual: res,
        min_gap,
        step_count: steps,
        converged: false,
    })
}

/// exp(-i H dt) U with H given by its eigendecomposition.
fn apply_step(e: &Eigh, dt: f64, u: &CMat) -> CMat {
    let w = dagger(&e.vectors).dot(u);
    let dim = w.nrows();
    let mut w = w;
    for (j, &lam) in e.values.iter().enumerate() {
        let ph = C64::from_polar(1.0, -lam * dt);
        for c in 0..dim {
            w[(j, c)] *= ph;
        }
    }
    e.vectors.dot(&w)
}

/// Time-ordered propagator with step-halving verification.
///
/// Starts at `steps`, doubles until two consecutive resolutions agree to
/// `tol` in max norm, and returns the finer run. Sudden jumps in the
/// schedule show up here only through the sampled Hamiltonian: they consume
/// no evolution of their own.
pub fn propagate<H>(
    h_of_t: &H,
    t_total: f64,
    steps: usize,
    tol: f64,
) -> Result<PropagatorResult, EvolveError>
where
    H: Fn(f64) -> CMat + ?Sized,
{
    let mut coarse = propagate_fixed(h_of_t, t_total, steps)?;
    let mut n = steps;
    for _ in 0..MAX_DOUBLINGS {
        let fine = propagate_fixed(h_of_t, t_total, 2 * n)?;
        let distance = max_abs_diff(&coarse.u_final, &fine.u_final);
        if distance <= tol {
            return Ok(PropagatorResult {
                converged: true,
                ..fine
            });
        }
        n *= 2;
        coarse = fine;
    }
    let fine = propagate_fixed(h_of_t, t_total, 2 * n)?;
    let distance = max_abs_diff(&coarse.u_final, &fine.u_final);
    if distance <= tol {
        return Ok(PropagatorResult {
            converged: true,
            ..fine
        });
    }
    Err(EvolveError::NotConverged {
        distance,
        tol,
        steps: 2 * n,
        coarse: Box::new(coarse.u_final),
        fine: Box::new(fine.u_final),
    })
}

/// Adiabatic-theorem prediction for the evolution of tracked eigenstates.
#[derive(Debug, Clone)]
pub struct TransportResult {
    /// `sum_a e^{i phi_a} |v_a(T)><v_a(0)|` with parallel-transported frames;
    /// the geometric phase is carried by the frames themselves.
    pub predicted: CMat,
    /// Dynamical phases `-integral E_a dt` per tracked branch.
    pub dynamical_phases: Vec<f64>,
    /// Geometric phases: argument of the overlap between the transported
    /// frame at `T` and a deterministic-gauge eigenframe at `T`.
    pub geometric_phases: Vec<f64>,
    /// Starting eigenframe (directional limit at a degenerate start).
    pub start_frame: CMat,
    /// Transported frame at the final time.
    pub end_frame: CMat,
}

/// Track eigenstates of a slowly driven Hamiltonian across `samples` time
/// slices, matching consecutive frames by maximal overlap and fixing the
/// gauge by discrete parallel transport.
///
/// `tracked` selects positions in the ascending eigenvalue order of the
/// starting frame. At a degenerate start (H = 0) the frame comes from the
/// first sample along the path with a nonzero Hamiltonian.
pub fn adiabatic_transport<H>(
    h_of_t: &H,
    t_total: f64,
    tracked: &[usize],
    samples: usize,
) -> Result<TransportResult, EvolveError>
where
    H: Fn(f64) -> CMat + ?Sized,
{
    assert!(samples >= 2);
    let dt = t_total / samples as f64;
    let hs: Vec<CMat> = (0..=samples).map(|k| h_of_t(k as f64 * dt)).collect();
    let dim = hs[0].nrows();
    for &a in tracked {
        if a >= dim {
            return Err(EvolveError::TrackedOutOfRange(a, dim));
        }
    }
    let scale = hs.iter().map(max_abs).fold(0.0_f64, f64::max);
    let eps_track = 1e-8 * scale;
    // directional limit: first sample where H is meaningfully nonzero
    let k0 = hs
        .iter()
        .position(|h| max_abs(h) > 1e-12 * scale)
        .unwrap_or(0);
    let e0 = eigh(&hs[k0]);
    let start_frame = e0.vectors.clone();
    let nt = tracked.len();
    // tracked columns
    let mut frames: Vec<Vec<C64>> = tracked
        .iter()
        .map(|&a| (0..dim).map(|r| e0.vectors[(r, a)]).collect())
        .collect();
    let mut energies: Vec<f64> = tracked.iter().map(|&a| e0.values[a]).collect();
    let mut phases = vec![0.0_f64; nt];
    let mut basis = e0.vectors.clone();
    for (k, h) in hs.iter().enumerate().skip(k0 + 1) {
        let e = eigh_preconditioned(h, &basis);
        // greedy maximal-overlap assignment, ties broken by energy proximity
        let mut cands: Vec<(f64, usize, usize)> = Vec::with_capacity(nt * dim);
        for (a, frame) in frames.iter().enumerate() {
            for j in 0..dim {
                let mut ov = C64::new(0.0, 0.0);
                for r in 0..dim {
                    ov += frame[r].conj() * e.vectors[(r, j)];
                }
                let score = ov.norm()
                    + 1e-12 / (1.0 + (e.values[j] - energies[a]).abs() / scale.max(1e-300));
                cands.push((score, a, j));
            }
        }
        cands.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        let mut taken_branch = vec![false; nt];
        let mut taken_col = vec![false; dim];
        let mut assign = vec![usize::MAX; nt];
        for (_, a, j) in cands {
            if !taken_branch[a] && !taken_col[j] {
                taken_branch[a] = true;
                taken_col[j] = true;
                assign[a] = j;
            }
        }
        // interior gap check between tracked and untracked levels
        if k < hs.len() - 1 && nt < dim {
            for &j in assign.iter() {
                for jp in 0..dim {
                    if !taken_col[jp] {
                        let gap = (e.values[j] - e.values[jp]).abs();
                        if gap < eps_track {
                            return Err(EvolveError::GapCollapse {
                                gap,
                                threshold: eps_track,
                                t: k as f64 * dt,
                            });
                        }
                    }
                }
            }
        }
        for (a, &j) in assign.iter().enumerate() {
            let mut ov = C64::new(0.0, 0.0);
            for r in 0..dim {
                ov += frames[a][r].conj() * e.vectors[(r, j)];
            }
            let norm = ov.norm();
            // parallel transport: make the overlap real and positive
            let gauge = if norm > 0.0 {
                (ov / norm).conj()
            } else {
                C64::new(1.0, 0.0)
            };
            for r in 0..dim {
                frames[a][r] = e.vectors[(r, j)] * gauge;
            }
            // trapezoid for the dynamical phase
            phases[a] -= 0.5 * (energies[a] + e.values[j]) * dt;
            energies[a] = e.values[j];
        }
        basis = e.vectors;
    }
    // deterministic reference gauge at T for reporting the geometric phase
    let e_end = eigh(hs.last().unwrap());
    let mut geometric = vec![0.0_f64; nt];
    for (a, frame) in frames.iter().enumerate() {
        let mut best = (0usize, 0.0_f64);
        for j in 0..dim {
            let mut ov = C64::new(0.0, 0.0);
            for r in 0..dim {
                ov += e_end.vectors[(r, j)].conj() * frame[r];
            }
            if ov.norm() > best.1 {
                best = (j, ov.norm());
            }
        }
        let j = best.0;
        let refv: Vec<C64> = (0..dim).map(|r| e_end.vectors[(r, j)]).collect();
        let refv = deterministic_gauge(refv);
        let mut ov = C64::new(0.0, 0.0);
        for r in 0..dim {
            ov += refv[r].conj() * frame[r];
        }
        geometric[a] = ov.arg();
    }
    let mut predicted = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
    let mut end_frame = Array2::from_elem((dim, nt), C64::new(0.0, 0.0));
    for (a, &col) in tracked.iter().enumerate() {
        let ph = C64::from_polar(1.0, phases[a]);
        for r in 0..dim {
            end_frame[(r, a)] = frames[a][r];
            for c in 0..dim {
                predicted[(r, c)] += ph * frames[a][r] * start_frame[(c, col)].conj();
            }
        }
    }
    Ok(TransportResult {
        predicted,
        dynamical_phases: phases,
        geometric_phases: geometric,
        start_frame,
        end_frame,
    })
}

/// Fix an eigenvector's arbitrary phase: largest-magnitude component made
/// real and positive.
fn deterministic_gauge(mut v: Vec<C64>) -> Vec<C64> {
    let mut imax = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[imax].norm() {
            imax = i;
        }
    }
    let z = v[imax];
    if z.norm() > 0.0 {
        let gauge = (z / z.norm()).conj();
        for x in v.iter_mut() {
            *x *= gauge;
        }
    }
    v
}

/// Instantaneous spectrum along the path plus the gap between the levels
/// carrying the computation sector and everything else.
#[derive(Debug, Clone)]
pub struct GapProfile {
    pub times: Vec<f64>,
    pub eigenvalues: Vec<Vec<f64>>,
    /// Gap between tracked and nearest untracked level; adjacent-level gap
    /// when the sector spans the whole space.
    pub gaps: Vec<f64>,
    /// Continuity of the tracked eigenvectors between consecutive samples.
    pub overlaps: Vec<f64>,
}

/// Sample the instantaneous spectrum. `sector` holds basis indices; the
/// tracked levels at each time are the eigenvectors with the largest weight
/// on each sector basis state.
pub fn gap_profile<H>(h_of_t: &H, t_total: f64, sector: &[usize], samples: usize) -> GapProfile
where
    H: Fn(f64) -> CMat + ?Sized,
{
    let mut times = Vec::with_capacity(samples + 1);
    let mut eigenvalues = Vec::with_capacity(samples + 1);
    let mut gaps = Vec::with_capacity(samples + 1);
    let mut overlaps = Vec::with_capacity(samples + 1);
    let mut prev_vectors: Option<(CMat, Vec<usize>)> = None;
    for k in 0..=samples {
        let t = t_total * k as f64 / samples as f64;
        let h = h_of_t(t);
        let dim = h.nrows();
        let e = match &prev_vectors {
            Some((v, _)) => eigh_preconditioned(&h, v),
            None => eigh(&h),
        };
        let tracked: Vec<usize> = if sector.is_empty() || sector.len() >= dim {
            (0..dim).collect()
        } else {
            sector
                .iter()
                .map(|&s| {
                    (0..dim)
                        .max_by(|&a, &b| {
                            e.vectors[(s, a)]
                                .norm()
                                .partial_cmp(&e.vectors[(s, b)].norm())
                                .unwrap()
                        })
                        .unwrap()
                })
                .collect()
        };
        let gap = if tracked.len() >= dim {
            (1..dim)
                .map(|j| e.values[j] - e.values[j - 1])
                .fold(f64::INFINITY, f64::min)
                .max(0.0)
        } else {
            let mut g = f64::INFINITY;
            for &j in &tracked {
                for jp in 0..dim {
                    if !tracked.contains(&jp) {
                        g = g.min((e.values[j] - e.values[jp]).abs());
                    }
                }
            }
            g
        };
        let overlap = match &prev_vectors {
            Some((v, prev_tracked)) => {
                let mut worst = 1.0_f64;
                for (idx, &j) in tracked.iter().enumerate() {
                    let pj = prev_tracked.get(idx).copied().unwrap_or(j);
                    let mut ov = C64::new(0.0, 0.0);
                    for r in 0..dim {
                        ov += v[(r, pj)].conj() * e.vectors[(r, j)];
                    }
                    worst = worst.min(ov.norm());
                }
                worst
            }
            None => 1.0,
        };
        times.push(t);
        eigenvalues.push(e.values.to_vec());
        gaps.push(if gap.is_finite() { gap } else { 0.0 });
        overlaps.push(overlap);
        prev_vectors = Some((e.vectors, tracked));
    }
    GapProfile {
        times,
        eigenvalues,
        gaps,
        overlaps,
    }
}

/// Worst-case probability of leaving the computation sector:
/// `max_s (1 - sum_{s'} |<s'|U|s>|^2)` over sector columns.
pub fn leakage(u: &CMat, sector: &[usize]) -> f64 {
    let mut worst = 0.0_f64;
    for &s in sector {
        let mut kept = 0.0;
        for &sp in sector {
            kept += u[(sp, s)].norm_sqr();
        }
        worst = worst.max(1.0 - kept);
    }
    worst.clamp(0.0, 1.0)
}
