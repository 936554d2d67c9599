//! Small dense complex linear algebra: Hermitian eigensolver, matrix
//! exponentials and norms.
//!
//! Everything here targets the desk scale of this crate (dimensions from 2 to
//! a few hundred), where a cyclic Jacobi diagonalization is simple, exactly
//! unitary to rounding and fast enough.

use ndarray::{Array1, Array2};

pub use num_complex::Complex64 as C64;

pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    let (r, c) = m.dim();
    CMat::from_shape_fn((c, r), |(i, j)| m[(j, i)].conj())
}

pub fn identity(n: usize) -> CMat {
    CMat::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Kronecker product, row-major convention (first factor = most significant).
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    CMat::from_shape_fn((ar * br, ac * bc), |(i, j)| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Largest element magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest element magnitude of the difference.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// max |H - H†|, the absolute Hermiticity defect.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// max |U†U - I|.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let p = dagger(u).dot(u);
    let n = p.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - C64::new(expect, 0.0)).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues ascending, columns of
/// `vectors` are the corresponding orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Array1<f64>,
    pub vectors: CMat,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Rotations are exactly unitary, so the returned basis is orthonormal to
/// rounding no matter how clustered the spectrum is.
pub fn eigh(h: &CMat) -> Eigh {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "eigh: matrix must be square");
    let mut a = h.clone();
    let mut v = identity(n);
    jacobi_in_place(&mut a, &mut v);
    sort_eigh(a, v)
}

/// Jacobi diagonalization preconditioned by an approximate eigenbasis.
///
/// Used by the propagator: consecutive time steps have nearly identical
/// Hamiltonians, so rotating into the previous step's basis leaves an almost
/// diagonal matrix and the sweep count drops to one or two.
pub fn eigh_preconditioned(h: &CMat, basis: &CMat) -> Eigh {
    let mut a = dagger(basis).dot(h).dot(basis);
    // rounding in the two products can leave a tiny anti-Hermitian part
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let m = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = m;
            a[(j, i)] = m.conj();
        }
    }
    let mut v = basis.clone();
    jacobi_in_place(&mut a, &mut v);
    sort_eigh(a, v)
}

fn jacobi_in_place(a: &mut CMat, v: &mut CMat) {
    let n = a.nrows();
    if n <= 1 {
        return;
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0_f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= tol * 1e-2 {
                    continue;
                }
                let phase = apq / r; // e^{i alpha}
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let se = phase * s; // s e^{i alpha}
                // columns: A <- A J, V <- V J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * se.conj();
                    a[(k, q)] = akp * se + akq * c;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * se.conj();
                    v[(k, q)] = vkp * se + vkq * c;
                }
                // rows: A <- J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * se;
                    a[(q, k)] = apk * se.conj() + aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
}

fn sort_eigh(a: CMat, v: CMat) -> Eigh {
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values = Array1::from_iter(order.iter().map(|&i| a[(i, i)].re));
    let vectors = CMat::from_shape_fn((n, n), |(r, c)| v[(r, order[c])]);
    Eigh { values, vectors }
}

/// exp(-i H s) for Hermitian `h`, via eigendecomposition.
pub fn expm_ih(h: &CMat, s: f64) -> CMat {
    let e = eigh(h);
    expm_from_eigh(&e, s)
}

/// exp(-i H s) from a precomputed eigendecomposition of H.
pub fn expm_from_eigh(e: &Eigh, s: f64) -> CMat {
    let n = e.values.len();
    let mut phased = e.vectors.clone();
    for (k, &lam) in e.values.iter().enumerate() {
        let ph = C64::from_polar(1.0, -lam * s);
        for r in 0..n {
            phased[(r, k)] *= ph;
        }
    }
    phased.dot(&dagger(&e.vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigh_pauli_x() {
        let sx = ndarray::array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
        let e = eigh(&sx);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(unitarity_residual(&e.vectors) < 1e-14);
    }

    #[test]
    fn eigh_complex_hermitian_reconstructs() {
        // deterministic pseudo-random Hermitian matrix
        let n = 7;
        let mut seed = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed as f64 / u64::MAX as f64) - 0.5
        };
        let mut h = CMat::zeros((n, n));
        for i in 0..n {
            h[(i, i)] = c(next(), 0.0);
            for j in (i + 1)..n {
                let z = c(next(), next());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let e = eigh(&h);
        assert!(unitarity_residual(&e.vectors) < 1e-13);
        // H = V diag(w) V†
        let mut rebuilt = CMat::zeros((n, n));
        for k in 0..n {
            for r in 0..n {
                for cidx in 0..n {
                    rebuilt[(r, cidx)] +=
                        e.vectors[(r, k)] * e.values[k] * e.vectors[(cidx, k)].conj();
                }
            }
        }
        assert!(max_abs_diff(&rebuilt, &h) < 1e-12);
        // ascending order
        for k in 1..n {
            assert!(e.values[k] >= e.values[k - 1]);
        }
    }

    #[test]
    fn expm_zero_is_identity() {
        let h = CMat::zeros((3, 3));
        let u = expm_ih(&h, 5.0);
        assert!(max_abs_diff(&u, &identity(3)) < 1e-14);
    }

    #[test]
    fn expm_sigma_x_half_turn() {
        // exp(-i (pi/2) sx) = -i sx
        let sx = ndarray::array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
        let u = expm_ih(&sx, std::f64::consts::FRAC_PI_2);
        let expect = ndarray::array![[c(0., 0.), c(0., -1.)], [c(0., -1.), c(0., 0.)]];
        assert!(max_abs_diff(&u, &expect) < 1e-14);
    }

    #[test]
    fn preconditioned_matches_plain() {
        let h = ndarray::array![
            [c(1.0, 0.), c(0.2, 0.1), c(0., 0.)],
            [c(0.2, -0.1), c(-0.5, 0.), c(0.3, 0.)],
            [c(0., 0.), c(0.3, 0.), c(2.0, 0.)]
        ];
        let plain = eigh(&h);
        let guided = eigh_preconditioned(&h, &plain.vectors);
        for k in 0..3 {
            assert!((plain.values[k] - guided.values[k]).abs() < 1e-13);
        }
    }
}
