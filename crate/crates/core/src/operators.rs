//! Operator construction on the 3 (x) 3 product space: the rotating-frame
//! drift, the shared-drive quadrature generators, and the interaction-frame
//! Hamiltonian.
//!
//! Basis ordering is |j1 j2> with index 3*j1 + j2; all matrices are stored
//! in this basis.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, basis_index, kron, Matrix3, Matrix9, DIM, LEVELS};
use crate::params::SystemParams;

/// Relative tolerance on ||H - H^dagger||_max for accepting a matrix as
/// Hermitian.
pub const HERMITICITY_RTOL: f64 = 1e-12;

/// A Hermitian operator sample on the 9-dimensional product space, in rad/ns.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSample {
    matrix: Matrix9,
}

impl HamiltonianSample {
    /// Wrap a matrix, verifying Hermiticity to within [`HERMITICITY_RTOL`]
    /// relative to the largest element.
    pub fn new(matrix: Matrix9) -> Result<Self> {
        let scale = linalg::max_abs(&matrix);
        let deviation = linalg::hermiticity_deviation(&matrix);
        if deviation > HERMITICITY_RTOL * scale.max(1.0) {
            return Err(Error::NotHermitian { deviation, scale });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix9 {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix9 {
        self.matrix
    }
}

fn sigma_x(lambda: &[f64; 2]) -> Matrix3 {
    let mut m = Matrix3::zeros();
    for j in 1..LEVELS {
        m[(j, j - 1)] = C64::new(lambda[j - 1], 0.0);
        m[(j - 1, j)] = C64::new(lambda[j - 1], 0.0);
    }
    m
}

fn sigma_y(lambda: &[f64; 2]) -> Matrix3 {
    let mut m = Matrix3::zeros();
    for j in 1..LEVELS {
        m[(j, j - 1)] = C64::new(0.0, lambda[j - 1]);
        m[(j - 1, j)] = C64::new(0.0, -lambda[j - 1]);
    }
    m
}

/// Drive-free rotating-frame Hamiltonian: diagonal with the entry for
/// |j1 j2> equal to E1(j1) + E2(j2), where each transmon's level energies
/// are the prefix sums of its transition detunings.
///
/// For the crowded pair this gives E1 = [0, 0, anharm] and
/// E2 = [0, delta - anharm, 2*delta - anharm], so that qubit 2's 1<->2
/// transition sits at the crowding detuning delta from the drive.
pub fn build_drift(params: &SystemParams) -> HamiltonianSample {
    let det = params.detunings();
    let e1 = det.level_energies(0);
    let e2 = det.level_energies(1);
    let mut m = Matrix9::zeros();
    for j1 in 0..LEVELS {
        for j2 in 0..LEVELS {
            let idx = basis_index(j1, j2);
            m[(idx, idx)] = C64::new(e1[j1] + e2[j2], 0.0);
        }
    }
    HamiltonianSample { matrix: m }
}

/// The two quadrature generators Hx, Hy of the shared drive, including the
/// 1/2 prefactor, so the full Hamiltonian is
/// `drift + omega_x * Hx + omega_y * Hy`.
pub fn build_control_generators(params: &SystemParams) -> (HamiltonianSample, HamiltonianSample) {
    let id = Matrix3::identity();
    let lam = params.lambda();
    let hx = (kron(&sigma_x(&lam[0]), &id) + kron(&id, &sigma_x(&lam[1]))).scale(0.5);
    let hy = (kron(&sigma_y(&lam[0]), &id) + kron(&id, &sigma_y(&lam[1]))).scale(0.5);
    (HamiltonianSample { matrix: hx }, HamiltonianSample { matrix: hy })
}

/// Interaction-frame Hamiltonian at time `t` for combined drive amplitude
/// `omega_c`: purely off-diagonal, with `(omega_c/2) * lambda_j * exp(-i
/// detuning_j * t)` on each lowering element |j-1><j| plus the Hermitian
/// conjugate.
///
/// For propagation consistent with the rotating-frame generators (where the
/// raising element of the y quadrature carries +i), the combined amplitude
/// of a pulse with quadratures (x, y) is `omega_c = x - i y`.
pub fn build_interaction_hamiltonian(
    params: &SystemParams,
    omega_c: C64,
    t: f64,
) -> Result<HamiltonianSample> {
    if !t.is_finite() || !omega_c.re.is_finite() || !omega_c.im.is_finite() {
        return Err(Error::InvalidParams(
            "interaction Hamiltonian needs finite time and amplitude".into(),
        ));
    }
    let det = params.detunings();
    let lam = params.lambda();
    let mut m = Matrix9::zeros();
    for qubit in 0..2 {
        for j in 1..LEVELS {
            let coeff = omega_c * 0.5 * lam[qubit][j - 1]
                * C64::from_polar(1.0, -det.of(qubit, j) * t);
            for other in 0..LEVELS {
                let (row, col) = if qubit == 0 {
                    (basis_index(j - 1, other), basis_index(j, other))
                } else {
                    (basis_index(other, j - 1), basis_index(other, j))
                };
                m[(row, col)] += coeff;
                m[(col, row)] += coeff.conj();
            }
        }
    }
    Ok(HamiltonianSample { matrix: m })
}

/// Rotating-frame Hamiltonian slice `drift + x*Hx + y*Hy` as a bare matrix.
pub(crate) fn rotating_frame_slice(
    drift: &Matrix9,
    hx: &Matrix9,
    hy: &Matrix9,
    x: f64,
    y: f64,
) -> Matrix9 {
    let mut m = *drift;
    for i in 0..DIM {
        for j in 0..DIM {
            m[(i, j)] += hx[(i, j)].scale(x) + hy[(i, j)].scale(y);
        }
    }
    m
}
