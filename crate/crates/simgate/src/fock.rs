//! Two-species bosonic Fock bases and ladder-operator matrices.
//!
//! A lattice of `L` sites carries `2L` modes: species `a` and `b` on each
//! site, interleaved as `(n_a1, n_b1, n_a2, n_b2, ...)`. The basis holds every
//! distribution of a fixed total atom number over those modes, sorted
//! lexicographically so bases are reproducible bit for bit.

use std::collections::HashMap;
use thiserror::Error;

/// Occupation numbers per mode, `(n_a1, n_b1, n_a2, n_b2, ...)`.
pub type Occupations = Vec<u8>;

/// Default cap on the basis dimension. A dense propagator over anything
/// larger is out of this crate's scope.
pub const DEFAULT_DIMENSION_CAP: u128 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FockError {
    #[error("basis would hold {dim} states, above the cap of {cap}")]
    TooLarge { dim: u128, cap: u128 },
    #[error("sector occupations must sum to the basis atom number ({expected}), got {got}")]
    SectorAtomMismatch { expected: u32, got: u32 },
    #[error("sector needs at least one atom per site")]
    SectorEmptySite,
    #[error("sector has {got} sites but the basis has {expected}")]
    SectorSiteMismatch { expected: usize, got: usize },
    #[error("sector state {0:?} is absent from the basis")]
    SectorStateMissing(Occupations),
    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    A,
    B,
}

/// Flat mode index of a species on a site.
pub fn mode_index(site: usize, species: Species) -> usize {
    2 * site
        + match species {
            Species::A => 0,
            Species::B => 1,
        }
}

/// Number of states for `total_atoms` bosons in `2*sites` modes
/// (stars and bars).
pub fn dimension(sites: usize, total_atoms: u32) -> u128 {
    let modes = 2 * sites as u128;
    let n = total_atoms as u128;
    // C(n + modes - 1, modes - 1)
    let k = modes - 1;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.saturating_mul(n + i) / i;
    }
    acc
}

/// Enumerated two-species Fock basis with fixed total atom number.
#[derive(Debug, Clone)]
pub struct FockBasis {
    sites: usize,
    total_atoms: u32,
    states: Vec<Occupations>,
    index: HashMap<Occupations, usize>,
}

impl FockBasis {
    /// Build the basis for `sites` lattice sites and `total_atoms` atoms,
    /// with the default dimension cap.
    pub fn new(sites: usize, total_atoms: u32) -> Result<Self, FockError> {
        Self::with_cap(sites, total_atoms, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(sites: usize, total_atoms: u32, cap: u128) -> Result<Self, FockError> {
        assert!(sites >= 1, "need at least one site");
        let dim = dimension(sites, total_atoms);
        if dim > cap {
            return Err(FockError::TooLarge { dim, cap });
        }
        let modes = 2 * sites;
        let mut states = Vec::with_capacity(dim as usize);
        let mut current = vec![0u8; modes];
        enumerate(&mut states, &mut current, 0, total_atoms);
        states.sort();
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self {
            sites,
            total_atoms,
            states,
            index,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn modes(&self) -> usize {
        2 * self.sites
    }

    pub fn total_atoms(&self) -> u32 {
        self.total_atoms
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.states[i]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u8]> {
        self.states.iter().map(|s| s.as_slice())
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }
}

fn enumerate(out: &mut Vec<Occupations>, current: &mut Occupations, mode: usize, left: u32) {
    if mode == current.len() - 1 {
        current[mode] = left as u8;
        out.push(current.clone());
        return;
    }
    for k in 0..=left {
        current[mode] = k as u8;
        enumerate(out, current, mode + 1, left - k);
    }
    current[mode] = 0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Raise,
    Lower,
}

/// Apply a single ladder operator to an occupation state.
///
/// Returns the image state and the bosonic amplitude, or `None` when lowering
/// an empty mode (amplitude zero). `Raise` gives `sqrt(n+1)`, `Lower` gives
/// `sqrt(n)`.
pub fn ladder_apply(state: &[u8], mode: usize, kind: LadderKind) -> Option<(Occupations, f64)> {
    let n = state[mode] as f64;
    match kind {
        LadderKind::Lower => {
            if state[mode] == 0 {
                None
            } else {
                let mut s = state.to_vec();
                s[mode] -= 1;
                Some((s, n.sqrt()))
            }
        }
        LadderKind::Raise => {
            let mut s = state.to_vec();
            s[mode] += 1;
            Some((s, (n + 1.0).sqrt()))
        }
    }
}

/// Sparse real matrix in coordinate form, restricted to a fixed basis.
///
/// `truncated` is set when at least one nonzero application landed on a state
/// outside the basis and was dropped. A single ladder operator on a fixed-N
/// basis is always fully truncated; number-conserving products never are.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub dim: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    pub truncated: bool,
}

impl SparseMatrix {
    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let mut m = ndarray::Array2::zeros((self.dim, self.dim));
        for &(r, c, v) in &self.triplets {
            m[(r, c)] += v;
        }
        m
    }
}

/// Matrix of a single ladder operator restricted to `basis`.
pub fn ladder_matrix(basis: &FockBasis, mode: usize, kind: LadderKind) -> Result<SparseMatrix, FockError> {
    ladder_product(basis, &[(mode, kind)])
}

/// Matrix of a product of ladder operators, applied right to left, restricted
/// to `basis`. Intermediate states may leave the fixed-N space; only the final
/// state must land back in the basis.
pub fn ladder_product(
    basis: &FockBasis,
    factors: &[(usize, LadderKind)],
) -> Result<SparseMatrix, FockError> {
    for &(mode, _) in factors {
        if mode >= basis.modes() {
            return Err(FockError::ModeOutOfRange {
                mode,
                modes: basis.modes(),
            });
        }
    }
    let mut triplets = Vec::new();
    let mut truncated = false;
    for (col, state) in basis.states().enumerate() {
        let mut cur = state.to_vec();
        let mut amp = 1.0_f64;
        let mut dead = false;
        for &(mode, kind) in factors.iter().rev() {
            match ladder_apply(&cur, mode, kind) {
                Some((next, a)) => {
                    cur = next;
                    amp *= a;
                }
                None => {
                    dead = true;
                    break;
                }
            }
        }
        if dead {
            continue;
        }
        match basis.index_of(&cur) {
            Some(row) => triplets.push((row, col, amp)),
            None => truncated = true,
        }
    }
    Ok(SparseMatrix {
        dim: basis.len(),
        triplets,
        truncated,
    })
}

/// Per-site atom counts selecting one computation sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorSpec {
    pub occupations: Vec<u8>,
}

impl SectorSpec {
    pub fn new(occupations: Vec<u8>) -> Self {
        Self { occupations }
    }

    pub fn qubits(&self) -> usize {
        self.occupations.len()
    }
}

/// Basis indices of the computation sector, ordered by the binary value of
/// `(z_1 .. z_L)` with `z_1` the most significant bit.
///
/// Qubit value `z_i` counts b atoms on site `i`: the sector state for a bit
/// string has `z_i` atoms in mode `b_i` and `n_i - z_i` in mode `a_i`.
pub fn sector_indices(basis: &FockBasis, spec: &SectorSpec) -> Result<Vec<usize>, FockError> {
    let l = basis.sites();
    if spec.occupations.len() != l {
        return Err(FockError::SectorSiteMismatch {
            expected: l,
            got: spec.occupations.len(),
        });
    }
    if spec.occupations.iter().any(|&n| n == 0) {
        return Err(FockError::SectorEmptySite);
    }
    let total: u32 = spec.occupations.iter().map(|&n| n as u32).sum();
    if total != basis.total_atoms() {
        return Err(FockError::SectorAtomMismatch {
            expected: basis.total_atoms(),
            got: total,
        });
    }
    let mut out = Vec::with_capacity(1 << l);
    for bits in 0..(1u32 << l) {
        let mut occ = vec![0u8; 2 * l];
        for site in 0..l {
            let z = ((bits >> (l - 1 - site)) & 1) as u8;
            occ[mode_index(site, Species::A)] = spec.occupations[site] - z;
            occ[mode_index(site, Species::B)] = z;
        }
        match basis.index_of(&occ) {
            Some(i) => out.push(i),
            None => return Err(FockError::SectorStateMissing(occ)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_site_three_atoms() {
        let b = FockBasis::new(1, 3).unwrap();
        assert_eq!(b.len(), 4);
        // lexicographic on (n_a, n_b): all-b first
        assert_eq!(b.state(0), &[0, 3]);
        assert_eq!(b.state(1), &[1, 2]);
        assert_eq!(b.state(2), &[2, 1]);
        assert_eq!(b.state(3), &[3, 0]);
    }

    #[test]
    fn vacuum_basis() {
        let b = FockBasis::new(1, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.state(0), &[0, 0]);
    }

    #[test]
    fn two_sites_two_atoms_counts() {
        // brute-force oracle: enumerate multisets of 2 atoms over 4 modes
        let mut count = 0;
        for a in 0..=2u8 {
            for b in 0..=2u8 {
                for c in 0..=2u8 {
                    for d in 0..=2u8 {
                        if a + b + c + d == 2 {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 10);
        let basis = FockBasis::new(2, 2).unwrap();
        assert_eq!(basis.len(), 10);
        assert_eq!(dimension(2, 2), 10);
    }

    #[test]
    fn stars_and_bars_matches_enumeration() {
        for sites in 1..=3usize {
            for n in 0..=6u32 {
                let b = FockBasis::new(sites, n).unwrap();
                assert_eq!(b.len() as u128, dimension(sites, n));
            }
        }
    }

    #[test]
    fn index_bijection() {
        let b = FockBasis::new(3, 4).unwrap();
        for k in 0..b.len() {
            assert_eq!(b.index_of(b.state(k)), Some(k));
        }
    }

    #[test]
    fn dimension_cap_rejected() {
        let err = FockBasis::with_cap(2, 2, 5).unwrap_err();
        assert_eq!(
            err,
            FockError::TooLarge { dim: 10, cap: 5 }
        );
    }

    #[test]
    fn ladder_amplitudes() {
        // <2a|raise_a|1a> = sqrt(2)
        let (s, amp) = ladder_apply(&[1, 0], 0, LadderKind::Raise).unwrap();
        assert_eq!(s, vec![2, 0]);
        assert!((amp - 2.0_f64.sqrt()).abs() < 1e-15);
        // lowering the vacuum gives nothing
        assert!(ladder_apply(&[0, 0], 0, LadderKind::Lower).is_none());
    }

    #[test]
    fn lower_on_vacuum_column_is_zero() {
        let b = FockBasis::new(1, 0).unwrap();
        let m = ladder_matrix(&b, 0, LadderKind::Lower).unwrap();
        assert!(m.triplets.is_empty());
        assert!(!m.truncated); // nothing was dropped, the amplitude is zero
    }

    #[test]
    fn single_ladder_on_fixed_n_is_truncated() {
        let b = FockBasis::new(1, 2).unwrap();
        let m = ladder_matrix(&b, 0, LadderKind::Raise).unwrap();
        assert!(m.triplets.is_empty());
        assert!(m.truncated);
    }

    #[test]
    fn number_operator_from_product() {
        // raise . lower on a mode gives the occupation on the diagonal
        let b = FockBasis::new(1, 3).unwrap();
        let m = ladder_product(&b, &[(1, LadderKind::Raise), (1, LadderKind::Lower)]).unwrap();
        assert!(!m.truncated);
        let d = m.to_dense();
        for k in 0..b.len() {
            assert!((d[(k, k)] - b.state(k)[1] as f64).abs() < 1e-14);
            for j in 0..b.len() {
                if j != k {
                    assert_eq!(d[(j, k)], 0.0);
                }
            }
        }
    }

    #[test]
    fn number_conserving_products_do_not_truncate() {
        let b = FockBasis::new(2, 3).unwrap();
        for (i, j) in [(0usize, 2usize), (1, 3), (2, 0), (3, 1)] {
            let m = ladder_product(&b, &[(i, LadderKind::Raise), (j, LadderKind::Lower)]).unwrap();
            assert!(!m.truncated);
        }
    }

    #[test]
    fn sector_one_site() {
        // L=1, n=(2): z=0 is {2a}, z=1 is {1a,1b}
        let b = FockBasis::new(1, 2).unwrap();
        let sec = sector_indices(&b, &SectorSpec::new(vec![2])).unwrap();
        assert_eq!(b.state(sec[0]), &[2, 0]);
        assert_eq!(b.state(sec[1]), &[1, 1]);
    }

    #[test]
    fn sector_two_sites_ordering() {
        let b = FockBasis::new(2, 2).unwrap();
        let sec = sector_indices(&b, &SectorSpec::new(vec![1, 1])).unwrap();
        assert_eq!(sec.len(), 4);
        assert_eq!(b.state(sec[0]), &[1, 0, 1, 0]); // 00
        assert_eq!(b.state(sec[1]), &[1, 0, 0, 1]); // 01
        assert_eq!(b.state(sec[2]), &[0, 1, 1, 0]); // 10
        assert_eq!(b.state(sec[3]), &[0, 1, 0, 1]); // 11
    }

    #[test]
    fn sector_imbalanced() {
        // L=2, n=(3,1): the z_1=1 state holds {2a,1b} on site 1
        let b = FockBasis::new(2, 4).unwrap();
        let sec = sector_indices(&b, &SectorSpec::new(vec![3, 1])).unwrap();
        assert_eq!(sec.len(), 4);
        assert_eq!(b.state(sec[2]), &[2, 1, 1, 0]); // z = 10
        assert_eq!(b.state(sec[3]), &[2, 1, 0, 1]); // z = 11
        // every sector state: per-site totals match, b count <= 1
        for &i in &sec {
            let s = b.state(i);
            assert_eq!(s[0] + s[1], 3);
            assert_eq!(s[2] + s[3], 1);
            assert!(s[1] <= 1 && s[3] <= 1);
        }
    }

    #[test]
    fn sector_errors() {
        let b = FockBasis::new(2, 2).unwrap();
        assert_eq!(
            sector_indices(&b, &SectorSpec::new(vec![2, 1])).unwrap_err(),
            FockError::SectorAtomMismatch { expected: 2, got: 3 }
        );
        assert_eq!(
            sector_indices(&b, &SectorSpec::new(vec![2, 0])).unwrap_err(),
            FockError::SectorEmptySite
        );
    }
}
