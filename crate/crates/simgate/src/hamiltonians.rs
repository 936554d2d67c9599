//! Hamiltonian assembly at the three model tiers: ideal qubit models, the
//! full two-species lattice model, and the second-order effective model on a
//! quasi-degenerate sector.
//!
//! Conventions, fixed once so tests are unambiguous:
//! - species-diagonal interactions carry the 1/2 of the standard Bose-Hubbard
//!   form, the cross term does not:
//!   `(U_bb/2) nb(nb-1) + (U_aa/2) na(na-1) + U_ab na nb`;
//! - the tilt site index is 0-based, `k g (na_k + nb_k)`;
//! - `sigma_z = |0><0| - |1><1|`: the state with no b atom sits at `+1`,
//!   matching the sign of the laser detuning term `(Delta/2)(n_a - n_b)`.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::{ladder_product, mode_index, FockBasis, FockError, LadderKind, Species};
use crate::linalg::CMat;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("resonant tilt: g equals u_bb, the conditional shift diverges")]
    ResonantTilt,
    #[error("laser site {site} out of range for {sites} sites")]
    LaserSiteOutOfRange { site: usize, sites: usize },
    #[error("negative Rabi amplitude {0}")]
    NegativeRabi(f64),
    #[error(
        "near-resonant denominator |E_p - E_q| = {gap:.3e} below threshold {threshold:.3e}; \
         second-order elimination is invalid"
    )]
    NearResonance { gap: f64, threshold: f64 },
    #[error("sector index {0} out of range")]
    SectorIndexOutOfRange(usize),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Physical constants of the lattice model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub u_bb: f64,
    pub u_ab: f64,
    pub u_aa: f64,
    pub j_a: f64,
    pub j_b: f64,
    pub g: f64,
}

/// Per-site laser controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserControls {
    pub delta: f64,
    pub omega: f64,
    pub phi: f64,
}

/// Effective single-qubit controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitControls {
    pub delta: f64,
    pub omega: f64,
    pub phi: f64,
}

/// Effective two-qubit controls: conditional shift and signed drive on the
/// target qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitControls {
    pub delta_tilde: f64,
    pub omega_x: f64,
}

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `(Delta/2) sigma_z + (Omega/2)(sigma_+ e^{i phi} + sigma_- e^{-i phi})`
/// in the basis `|0> = (1,0)`, `|1> = (0,1)`.
pub fn ideal_h1(c: &QubitControls) -> CMat {
    let mut h = Array2::from_elem((2, 2), czero());
    h[(0, 0)] = C64::new(0.5 * c.delta, 0.0);
    h[(1, 1)] = C64::new(-0.5 * c.delta, 0.0);
    let off = C64::from_polar(0.5 * c.omega, c.phi);
    h[(0, 1)] = off;
    h[(1, 0)] = off.conj();
    h
}

/// `Dt |11><11| + (Omega_x/2)(I (x) sigma_x)` in the basis
/// `|00>,|01>,|10>,|11>` with the first factor the control qubit.
pub fn ideal_h2(c: &TwoQubitControls) -> CMat {
    let mut h = Array2::from_elem((4, 4), czero());
    h[(3, 3)] = C64::new(c.delta_tilde, 0.0);
    let hx = C64::new(0.5 * c.omega_x, 0.0);
    for (p, q) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
        h[(p, q)] += hx;
    }
    h
}

/// Conditional shift of the doubly-excited two-qubit state,
/// `J_b^2 / (g - U_bb)`.
pub fn delta_tilde(j_b: f64, g: f64, u_bb: f64) -> Result<f64, HamiltonianError> {
    if g == u_bb {
        return Err(HamiltonianError::ResonantTilt);
    }
    Ok(j_b * j_b / (g - u_bb))
}

/// Full lattice Hamiltonian: hopping, on-site interactions, linear tilt and
/// the laser coupling on the given sites. Hermitian by construction.
pub fn lattice_hamiltonian(
    basis: &FockBasis,
    p: &LatticeParams,
    lasers: &[(usize, LaserControls)],
) -> Result<CMat, HamiltonianError> {
    let l = basis.sites();
    for &(site, ctl) in lasers {
        if site >= l {
            return Err(HamiltonianError::LaserSiteOutOfRange { site, sites: l });
        }
        if ctl.omega < 0.0 {
            return Err(HamiltonianError::NegativeRabi(ctl.omega));
        }
    }
    let dim = basis.len();
    let mut h = Array2::from_elem((dim, dim), czero());

    // diagonal: interactions + tilt + detunings
    for (i, s) in basis.states().enumerate() {
        let mut e = 0.0;
        for k in 0..l {
            let na = s[mode_index(k, Species::A)] as f64;
            let nb = s[mode_index(k, Species::B)] as f64;
            e += 0.5 * p.u_bb * nb * (nb - 1.0)
                + 0.5 * p.u_aa * na * (na - 1.0)
                + p.u_ab * na * nb
                + (k as f64) * p.g * (na + nb);
        }
        for &(site, ctl) in lasers {
            let na = s[mode_index(site, Species::A)] as f64;
            let nb = s[mode_index(site, Species::B)] as f64;
            e += 0.5 * ctl.delta * (na - nb);
        }
        h[(i, i)] = C64::new(e, 0.0);
    }

    // hopping: -J (x†_{k+1} x_k + x†_k x_{k+1}) for both species
    for k in 0..l.saturating_sub(1) {
        for (species, j) in [(Species::A, p.j_a), (Species::B, p.j_b)] {
            if j == 0.0 {
                continue;
            }
            let lo = mode_index(k, species);
            let hi = mode_index(k + 1, species);
            for (dst, src) in [(hi, lo), (lo, hi)] {
                let m = ladder_product(basis, &[(dst, LadderKind::Raise), (src, LadderKind::Lower)])?;
                for (r, c, v) in m.triplets {
                    h[(r, c)] += C64::new(-j * v, 0.0);
                }
            }
        }
    }

    // laser coupling: (Omega/2)(e^{i phi} a† b + e^{-i phi} b† a) per site
    for &(site, ctl) in lasers {
        if ctl.omega == 0.0 {
            continue;
        }
        let a = mode_index(site, Species::A);
        let b = mode_index(site, Species::B);
        let up = ladder_product(basis, &[(a, LadderKind::Raise), (b, LadderKind::Lower)])?;
        let amp = C64::from_polar(0.5 * ctl.omega, ctl.phi);
        for (r, c, v) in up.triplets {
            let z = amp * v;
            h[(r, c)] += z;
            h[(c, r)] += z.conj();
        }
    }
    Ok(h)
}

/// Single-site raising part of the laser coupling, `a† b` on `site`.
///
/// The full drive at amplitude `omega` and phase `phi` is
/// `(omega/2) (e^{i phi} A + e^{-i phi} A†)`; callers that sweep the controls
/// cache this structure matrix instead of reassembling the Hamiltonian.
pub fn laser_structure(basis: &FockBasis, site: usize) -> Result<CMat, HamiltonianError> {
    if site >= basis.sites() {
        return Err(HamiltonianError::LaserSiteOutOfRange {
            site,
            sites: basis.sites(),
        });
    }
    let a = mode_index(site, Species::A);
    let b = mode_index(site, Species::B);
    let m = ladder_product(basis, &[(a, LadderKind::Raise), (b, LadderKind::Lower)])?;
    let dim = basis.len();
    let mut out = Array2::from_elem((dim, dim), czero());
    for (r, c, v) in m.triplets {
        out[(r, c)] += C64::new(v, 0.0);
    }
    Ok(out)
}

/// Unit-amplitude hopping structure, `-(x†_{k+1} x_k + h.c.)` summed over
/// bonds, for one species.
pub fn hopping_structure(basis: &FockBasis, species: Species) -> Result<CMat, HamiltonianError> {
    let dim = basis.len();
    let mut out = Array2::from_elem((dim, dim), czero());
    for k in 0..basis.sites().saturating_sub(1) {
        let lo = mode_index(k, species);
        let hi = mode_index(k + 1, species);
        for (dst, src) in [(hi, lo), (lo, hi)] {
            let m = ladder_product(basis, &[(dst, LadderKind::Raise), (src, LadderKind::Lower)])?;
            for (r, c, v) in m.triplets {
                out[(r, c)] += C64::new(-v, 0.0);
            }
        }
    }
    Ok(out)
}

/// Second-order quasi-degenerate effective Hamiltonian on `sector`.
///
/// `h0` is the diagonal part (energies), `v` the off-diagonal perturbation.
/// The correction uses symmetrized energy denominators:
///
/// ```text
/// Heff[p,p'] = (h0 + v)[p,p']
///   + 1/2 sum_{q not in sector} v[p,q] v[q,p'] (1/(E_p - E_q) + 1/(E_p' - E_q))
/// ```
///
/// Errors out when any in-sector/out-of-sector energy distance falls below
/// `eps_gap` (default `1e-6 * max|E|`).
pub fn effective_hamiltonian(
    h0: &[f64],
    v: &CMat,
    sector: &[usize],
    eps_gap: Option<f64>,
) -> Result<CMat, HamiltonianError> {
    let dim = h0.len();
    for &p in sector {
        if p >= dim {
            return Err(HamiltonianError::SectorIndexOutOfRange(p));
        }
    }
    let emax = h0.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let threshold = eps_gap.unwrap_or(1e-6 * emax);
    let in_sector: Vec<bool> = {
        let mut f = vec![false; dim];
        for &p in sector {
            f[p] = true;
        }
        f
    };
    let rest: Vec<usize> = (0..dim).filter(|i| !in_sector[*i]).collect();
    for &p in sector {
        for &q in &rest {
            let gap = (h0[p] - h0[q]).abs();
            if gap < threshold {
                return Err(HamiltonianError::NearResonance { gap, threshold });
            }
        }
    }
    let n = sector.len();
    let mut out = Array2::from_elem((n, n), czero());
    for (a, &p) in sector.iter().enumerate() {
        for (b, &pp) in sector.iter().enumerate() {
            let mut x = v[(p, pp)];
            if p == pp {
                x += C64::new(h0[p], 0.0);
            }
            let mut corr = czero();
            for &q in &rest {
                let w = 1.0 / (h0[p] - h0[q]) + 1.0 / (h0[pp] - h0[q]);
                corr += v[(p, q)] * v[(q, pp)] * (0.5 * w);
            }
            out[(a, b)] = x + corr;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SectorSpec;
    use crate::linalg::{eigh, hermiticity_residual, max_abs, max_abs_diff};

    #[test]
    fn h1_pure_detuning() {
        let h = ideal_h1(&QubitControls {
            delta: 1.0,
            omega: 0.0,
            phi: 0.0,
        });
        assert_eq!(h[(0, 0)], C64::new(0.5, 0.0));
        assert_eq!(h[(1, 1)], C64::new(-0.5, 0.0));
        assert_eq!(h[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn h1_pure_drive_is_half_sigma_x() {
        let h = ideal_h1(&QubitControls {
            delta: 0.0,
            omega: 1.0,
            phi: 0.0,
        });
        assert_eq!(h[(0, 1)], C64::new(0.5, 0.0));
        assert_eq!(h[(1, 0)], C64::new(0.5, 0.0));
    }

    #[test]
    fn h1_eigenvalues() {
        for (d, om) in [(0.3, 0.7), (1.0, 0.0), (2.0, 1.5)] {
            let h = ideal_h1(&QubitControls {
                delta: d,
                omega: om,
                phi: 0.4,
            });
            let e = eigh(&h);
            let expect = 0.5 * (d * d + om * om).sqrt();
            assert!((e.values[1] - expect).abs() < 1e-14);
            assert!((e.values[0] + expect).abs() < 1e-14);
        }
    }

    #[test]
    fn h2_shapes() {
        let h = ideal_h2(&TwoQubitControls {
            delta_tilde: 1.0,
            omega_x: 0.0,
        });
        for k in 0..3 {
            assert_eq!(h[(k, k)], C64::new(0.0, 0.0));
        }
        assert_eq!(h[(3, 3)], C64::new(1.0, 0.0));

        let h = ideal_h2(&TwoQubitControls {
            delta_tilde: 0.0,
            omega_x: 2.0,
        });
        assert_eq!(h[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(h[(2, 3)], C64::new(1.0, 0.0));
        assert_eq!(h[(0, 2)], C64::new(0.0, 0.0));

        // trace = delta_tilde for any drive
        let h = ideal_h2(&TwoQubitControls {
            delta_tilde: 0.7,
            omega_x: 1.3,
        });
        let tr: C64 = (0..4).map(|k| h[(k, k)]).sum();
        assert!((tr - C64::new(0.7, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn delta_tilde_values() {
        assert!((delta_tilde(0.05, 0.5, 1.0).unwrap() + 0.005).abs() < 1e-15);
        assert_eq!(delta_tilde(0.0, 0.7, 0.2).unwrap(), 0.0);
        assert!((delta_tilde(0.1, 1.5, 1.0).unwrap() - 0.02).abs() < 1e-15);
        assert!(delta_tilde(0.1, 1.0, 1.0).is_err());
    }

    fn zero_params() -> LatticeParams {
        LatticeParams {
            u_bb: 0.0,
            u_ab: 0.0,
            u_aa: 0.0,
            j_a: 0.0,
            j_b: 0.0,
            g: 0.0,
        }
    }

    #[test]
    fn lattice_diagonal_interactions() {
        let basis = FockBasis::new(1, 2).unwrap();
        // state {2b}: energy U_bb
        let mut p = zero_params();
        p.u_bb = 0.8;
        let h = lattice_hamiltonian(&basis, &p, &[]).unwrap();
        let i = basis.index_of(&[0, 2]).unwrap();
        assert!((h[(i, i)].re - 0.8).abs() < 1e-15);
        // state {1a,1b}: energy U_ab
        let mut p = zero_params();
        p.u_ab = 0.6;
        let h = lattice_hamiltonian(&basis, &p, &[]).unwrap();
        let i = basis.index_of(&[1, 1]).unwrap();
        assert!((h[(i, i)].re - 0.6).abs() < 1e-15);
        // all couplings zero: zero matrix
        let h = lattice_hamiltonian(&basis, &zero_params(), &[]).unwrap();
        assert_eq!(max_abs(&h), 0.0);
    }

    #[test]
    fn hopping_elements_match_ladder_products() {
        // dual route: assembled Hamiltonian vs explicit ladder products
        let basis = FockBasis::new(2, 3).unwrap();
        let mut p = zero_params();
        p.j_b = 0.37;
        let h = lattice_hamiltonian(&basis, &p, &[]).unwrap();
        let hop = hopping_structure(&basis, Species::B).unwrap();
        let expect = hop.mapv(|z| z * C64::new(0.37, 0.0));
        assert!(max_abs_diff(&h, &expect) < 1e-14);
        // element value: -J sqrt(n (m+1)) for the moved boson
        let from = basis.index_of(&[0, 2, 0, 1]).unwrap();
        let to = basis.index_of(&[0, 3, 0, 0]).unwrap();
        let amp = -(0.37) * (1.0_f64 * 3.0).sqrt();
        assert!((h[(to, from)].re - amp).abs() < 1e-14);
    }

    #[test]
    fn assembled_matrices_are_hermitian() {
        let basis = FockBasis::new(2, 3).unwrap();
        let p = LatticeParams {
            u_bb: 2.0,
            u_ab: 0.3,
            u_aa: 0.4,
            j_a: 0.1,
            j_b: 0.2,
            g: 1.7,
        };
        let lasers = [(
            0usize,
            LaserControls {
                delta: 0.2,
                omega: 0.5,
                phi: 1.1,
            },
        )];
        let h = lattice_hamiltonian(&basis, &p, &lasers).unwrap();
        assert!(hermiticity_residual(&h) <= 1e-12 * max_abs(&h));
    }

    #[test]
    fn qubit_space_is_degenerate_eigenspace() {
        // J_b = 0, lasers off, U_aa = U_ab = 0, J_a = 0: every computation
        // state is an eigenstate with a z-independent eigenvalue
        let basis = FockBasis::new(2, 3).unwrap();
        let mut p = zero_params();
        p.u_bb = 2.0;
        p.g = 0.9;
        let h = lattice_hamiltonian(&basis, &p, &[]).unwrap();
        let sec = crate::fock::sector_indices(&basis, &SectorSpec::new(vec![2, 1])).unwrap();
        let e0 = h[(sec[0], sec[0])].re;
        for &i in &sec {
            // eigen-residual: H|s> - e0|s| has only the diagonal element
            for j in 0..basis.len() {
                let v = h[(j, i)];
                if j == i {
                    assert!((v.re - e0).abs() <= 1e-12);
                } else {
                    assert!(v.norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn gap_to_double_b_occupancy_is_ubb() {
        let basis = FockBasis::new(2, 2).unwrap();
        let mut p = zero_params();
        p.u_bb = 2.4;
        let h = lattice_hamiltonian(&basis, &p, &[]).unwrap();
        let sec = crate::fock::sector_indices(&basis, &SectorSpec::new(vec![1, 1])).unwrap();
        let esec = h[(sec[0], sec[0])].re;
        let i = basis.index_of(&[0, 2, 0, 0]).unwrap();
        assert!((h[(i, i)].re - esec - 2.4).abs() < 1e-14);
    }

    #[test]
    fn effective_textbook_second_order() {
        // h0 = diag(0, E), v = offdiag(v0), sector = {0}: Heff = [-v0^2/E]
        let h0 = [0.0, 2.0];
        let mut v = Array2::from_elem((2, 2), C64::new(0.0, 0.0));
        v[(0, 1)] = C64::new(0.3, 0.0);
        v[(1, 0)] = C64::new(0.3, 0.0);
        let heff = effective_hamiltonian(&h0, &v, &[0], None).unwrap();
        assert!((heff[(0, 0)].re + 0.09 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn effective_zero_perturbation() {
        let h0 = [0.1, -0.4, 3.0];
        let v = Array2::from_elem((3, 3), C64::new(0.0, 0.0));
        let heff = effective_hamiltonian(&h0, &v, &[0, 1], None).unwrap();
        assert!((heff[(0, 0)].re - 0.1).abs() < 1e-15);
        assert!((heff[(1, 1)].re + 0.4).abs() < 1e-15);
        assert!(heff[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn effective_near_resonance_rejected() {
        let h0 = [0.0, 1e-9];
        let mut v = Array2::from_elem((2, 2), C64::new(0.0, 0.0));
        v[(0, 1)] = C64::new(0.1, 0.0);
        v[(1, 0)] = C64::new(0.1, 0.0);
        assert!(matches!(
            effective_hamiltonian(&h0, &v, &[0], None),
            Err(HamiltonianError::NearResonance { .. })
        ));
    }

    #[test]
    fn conditional_shift_matches_two_channel_oracle() {
        // Second-order shift of |11> in the tilted two-site model. The
        // independent oracle keeps both virtual channels:
        //   2 J^2/(g - U) - 2 J^2/(g + U)
        // (bosonic sqrt(2) on the doubly-occupied intermediate). The one-line
        // estimate J^2/(g - U) reproduces it only at g = 3U.
        let basis = FockBasis::new(2, 2).unwrap();
        let sec = crate::fock::sector_indices(&basis, &SectorSpec::new(vec![1, 1])).unwrap();
        let (g, u_bb) = (1.5, 1.0);
        for jb in [0.02, 0.01, 0.005] {
            let mut p = zero_params();
            p.u_bb = u_bb;
            p.g = g;
            let diag = lattice_hamiltonian(&basis, &p, &[]).unwrap();
            let h0: Vec<f64> = (0..basis.len()).map(|i| diag[(i, i)].re).collect();
            p.j_b = jb;
            let full = lattice_hamiltonian(&basis, &p, &[]).unwrap();
            let v = &full - &diag;
            let heff = effective_hamiltonian(&h0, &v, &sec, None).unwrap();
            let shift = heff[(3, 3)].re - h0[sec[3]];
            let oracle = 2.0 * jb * jb / (g - u_bb) - 2.0 * jb * jb / (g + u_bb);
            assert!(
                (shift - oracle).abs() < 20.0 * jb.powi(4),
                "jb={jb}: shift={shift:.6e} oracle={oracle:.6e}"
            );
        }
    }

    #[test]
    fn effective_matches_exact_eigenvalues_to_third_order() {
        // |eig(Heff) - low eig(h0+v)| <= C |v|^3 / gap^2
        let h0 = [0.0, 0.05, 3.0, 4.0];
        let sector = [0usize, 1];
        let gap = 2.95_f64;
        for scale in [0.05, 0.1, 0.2] {
            let mut v = Array2::from_elem((4, 4), C64::new(0.0, 0.0));
            let pairs = [(0, 2, 0.9), (0, 3, -0.4), (1, 2, 0.7), (1, 3, 0.5), (0, 1, 0.3)];
            for &(i, j, x) in &pairs {
                v[(i, j)] = C64::new(scale * x, 0.0);
                v[(j, i)] = C64::new(scale * x, 0.0);
            }
            let mut full = v.clone();
            for k in 0..4 {
                full[(k, k)] += C64::new(h0[k], 0.0);
            }
            let exact = eigh(&full);
            let heff = effective_hamiltonian(&h0, &v, &sector, None).unwrap();
            let eff = eigh(&heff);
            let vnorm = max_abs(&v) * 2.0;
            let bound = 8.0 * vnorm.powi(3) / (gap * gap);
            for k in 0..2 {
                assert!(
                    (eff.values[k] - exact.values[k]).abs() < bound,
                    "scale {scale}: {} vs {}",
                    eff.values[k],
                    exact.values[k]
                );
            }
        }
    }
}
