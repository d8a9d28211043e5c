//! Small dense linear algebra helpers for the fixed 9-dimensional Hilbert
//! space of two three-level transmons.

use nalgebra::{Const, OMatrix, OVector};
use num_complex::Complex64 as C64;

/// Number of levels kept per transmon.
pub const LEVELS: usize = 3;
/// Dimension of the two-transmon Hilbert space.
pub const DIM: usize = 9;

pub type Matrix9 = OMatrix<C64, Const<9>, Const<9>>;
pub type Matrix3 = OMatrix<C64, Const<3>, Const<3>>;
pub type Vector9 = OVector<C64, Const<9>>;

/// Basis index of the product state |j1, j2>; row-major in (j1, j2).
#[inline]
pub fn basis_index(j1: usize, j2: usize) -> usize {
    debug_assert!(j1 < LEVELS && j2 < LEVELS);
    LEVELS * j1 + j2
}

/// Kronecker product of two single-transmon operators on the product space.
pub fn kron(a: &Matrix3, b: &Matrix3) -> Matrix9 {
    let mut out = Matrix9::zeros();
    for i1 in 0..LEVELS {
        for j1 in 0..LEVELS {
            for i2 in 0..LEVELS {
                for j2 in 0..LEVELS {
                    out[(basis_index(i1, i2), basis_index(j1, j2))] = a[(i1, j1)] * b[(i2, j2)];
                }
            }
        }
    }
    out
}

/// Largest element magnitude.
pub fn max_abs(m: &Matrix9) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-norm of H - H^dagger.
pub fn hermiticity_deviation(m: &Matrix9) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Max-norm of U^dagger U - 1.
pub fn unitarity_deviation(m: &Matrix9) -> f64 {
    max_abs(&(m.adjoint() * m - Matrix9::identity()))
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues and a unitary
/// matrix of column eigenvectors.
pub struct EigH {
    pub values: OVector<f64, Const<9>>,
    pub vectors: Matrix9,
}

/// Diagonalize a Hermitian 9x9 matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized first so that the decomposition is well defined
/// even when rounding has left tiny anti-Hermitian parts. Jacobi converges
/// to machine-precision eigenpair residuals on matrices this small, which
/// the propagator accuracy and the finite-difference gradient checks rely
/// on. Eigenvalues come out ascending with matching eigenvector columns.
pub fn eigh(h: &Matrix9) -> EigH {
    let mut a = (h + h.adjoint()).scale(0.5);
    let mut v = Matrix9::identity();
    let scale = max_abs(&a).max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;

    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for p in 0..DIM {
            for q in (p + 1)..DIM {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..DIM {
            for q in (p + 1)..DIM {
                let z = a[(p, q)];
                let r = z.norm();
                if r <= tol * 1e-2 {
                    continue;
                }
                let u = z.unscale(r);
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                // smaller-magnitude root of t^2 - 2 tau t - 1 = 0
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let su = u.scale(s);
                let subar = u.conj().scale(s);
                // A <- J^dagger A J with the unitary block
                // [[c, -s u], [s conj(u), c]] on (p, q)
                for i in 0..DIM {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip.scale(c) + aiq * subar;
                    a[(i, q)] = aiq.scale(c) - aip * su;
                }
                for i in 0..DIM {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = api.scale(c) + aqi * su;
                    a[(q, i)] = aqi.scale(c) - api * subar;
                }
                // rounding leaves ~1e-16 on the eliminated pair; keep the
                // matrix exactly Hermitian so later sweeps stay consistent
                a[(q, p)] = a[(p, q)].conj();
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for i in 0..DIM {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip.scale(c) + viq * subar;
                    v[(i, q)] = viq.scale(c) - vip * su;
                }
            }
        }
    }

    let mut order: [usize; DIM] = [0, 1, 2, 3, 4, 5, 6, 7, 8];
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let mut values = OVector::<f64, Const<9>>::zeros();
    let mut vectors = Matrix9::zeros();
    for (k, &i) in order.iter().enumerate() {
        values[k] = a[(i, i)].re;
        for row in 0..DIM {
            vectors[(row, k)] = v[(row, i)];
        }
    }
    EigH { values, vectors }
}

/// exp(-i t H) for Hermitian H, through the spectral decomposition.
pub fn expm_minus_i(h: &Matrix9, t: f64) -> Matrix9 {
    let eig = eigh(h);
    expm_from_eigh(&eig, t)
}

/// One Newton step toward the polar factor: U <- (U + (U^dagger)^-1) / 2.
///
/// Long ordered products accumulate ~1e-15 of unitarity drift per factor,
/// which crosses the 1e-10 contract around 10^5 slices; a single step from
/// there lands back at machine precision without moving the operator beyond
/// the rounding error it already carries.
pub fn polish_unitary(m: Matrix9) -> Matrix9 {
    match m.adjoint().try_inverse() {
        Some(inv) => (m + inv).scale(0.5),
        None => m,
    }
}

/// exp(-i t H) from a precomputed eigendecomposition of H.
pub fn expm_from_eigh(eig: &EigH, t: f64) -> Matrix9 {
    let phases = eig.values.map(|w| C64::from_polar(1.0, -w * t));
    let mut scaled = eig.vectors;
    for k in 0..DIM {
        let p = phases[k];
        for i in 0..DIM {
            scaled[(i, k)] *= p;
        }
    }
    scaled * eig.vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_hermitian(seed: u64) -> Matrix9 {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let mut h = Matrix9::zeros();
        for i in 0..DIM {
            for j in 0..=i {
                let v = if i == j {
                    C64::new(next(), 0.0)
                } else {
                    C64::new(next(), next())
                };
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        h
    }

    #[test]
    fn kron_index_convention() {
        let mut a = Matrix3::zeros();
        let mut b = Matrix3::zeros();
        a[(1, 0)] = C64::new(2.0, 0.0);
        b[(2, 1)] = C64::new(0.0, 3.0);
        let k = kron(&a, &b);
        assert_eq!(k[(basis_index(1, 2), basis_index(0, 1))], C64::new(0.0, 6.0));
        assert_eq!(max_abs(&k), 6.0);
    }

    #[test]
    fn eigh_residuals_are_machine_precision() {
        for seed in 1..8u64 {
            let h = sample_hermitian(seed);
            let scale = max_abs(&h);
            let eig = eigh(&h);
            // eigenpair residuals
            for k in 0..DIM {
                let vk = eig.vectors.column(k);
                let r = h * vk - vk.scale(eig.values[k]);
                let worst = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(worst < 1e-13 * scale, "residual {worst:.3e}");
            }
            // orthonormality
            assert!(unitarity_deviation(&eig.vectors) < 1e-13);
            // ascending order
            for k in 1..DIM {
                assert!(eig.values[k] >= eig.values[k - 1]);
            }
        }
    }

    #[test]
    fn expm_is_unitary_and_inverts() {
        for seed in 1..6u64 {
            let h = sample_hermitian(seed);
            let u = expm_minus_i(&h, 0.37);
            assert!(unitarity_deviation(&u) < 1e-12);
            let back = expm_minus_i(&h, -0.37);
            assert!(max_abs(&(u * back - Matrix9::identity())) < 1e-12);
        }
    }

    #[test]
    fn expm_zero_time_is_identity() {
        let h = sample_hermitian(7);
        let u = expm_minus_i(&h, 0.0);
        assert!(max_abs(&(u - Matrix9::identity())) < 1e-14);
    }

    #[test]
    fn expm_matches_series_for_small_argument() {
        let h = sample_hermitian(11);
        let t = 1e-4;
        let u = expm_minus_i(&h, t);
        let i = Matrix9::identity();
        let mi = C64::new(0.0, -t);
        let series = i + h.scale(1.0) * mi + (h * h).scale(0.5) * mi * mi;
        assert!(max_abs(&(u - series)) < 1e-11);
    }
}
