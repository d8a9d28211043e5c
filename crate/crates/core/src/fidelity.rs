//! Gate-fidelity functionals on the computational subspace, reduced and
//! phase-insensitive variants, and phase extraction for gates that act as a
//! single-qubit flip up to phases on the second qubit.

use std::f64::consts::PI;

use nalgebra::{Const, OMatrix};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{basis_index, Matrix3, Matrix9};
use crate::propagate::UnitaryMatrix;

pub type Matrix2 = OMatrix<C64, Const<2>, Const<2>>;

/// The four computational basis states |00>, |01>, |10>, |11> by index.
pub const COMPUTATIONAL: [usize; 4] = [0, 1, 3, 4];

/// States with qubit 2 fixed in |i>: {|0,i>, |1,i>}.
pub const REDUCED_PAIRS: [[usize; 2]; 2] = [[0, 3], [1, 4]];

/// A single-qubit target acting on qubit 1, with qubit 2 untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetGate {
    u1: Matrix2,
}

impl Default for TargetGate {
    fn default() -> Self {
        Self::x()
    }
}

impl TargetGate {
    /// The X (bit-flip) gate on qubit 1.
    pub fn x() -> Self {
        let mut m = Matrix2::zeros();
        m[(0, 1)] = C64::new(1.0, 0.0);
        m[(1, 0)] = C64::new(1.0, 0.0);
        Self { u1: m }
    }

    /// Arbitrary single-qubit target; must be unitary to 1e-12.
    pub fn new(u1: Matrix2) -> Result<Self> {
        let dev = (u1.adjoint() * u1 - Matrix2::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > 1e-12 {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self { u1 })
    }

    pub fn u1(&self) -> &Matrix2 {
        &self.u1
    }

    /// The target embedded on the 9-dimensional space: the single-qubit gate
    /// on qubit 1's computational levels, identity everywhere else.
    pub fn embedded(&self) -> Matrix9 {
        let mut q1 = Matrix3::identity();
        for i in 0..2 {
            for j in 0..2 {
                q1[(i, j)] = self.u1[(i, j)];
            }
        }
        crate::linalg::kron(&q1, &Matrix3::identity())
    }
}

fn trace_over(u: &UnitaryMatrix, target: &TargetGate, states: &[usize]) -> C64 {
    let t = target.embedded();
    let m = t.adjoint() * u.matrix();
    states.iter().map(|&b| m[(b, b)]).sum()
}

/// Full gate fidelity: |trace over the computational subspace of
/// Udes^dagger U|^2 / 16. Leakage out of the subspace shrinks the projected
/// matrix elements and therefore the fidelity; the target's global phase is
/// irrelevant by the modulus.
pub fn gate_fidelity(u: &UnitaryMatrix, target: &TargetGate) -> f64 {
    let tr = trace_over(u, target, &COMPUTATIONAL);
    tr.norm_sqr() / 16.0
}

/// Reduced fidelity with qubit 2 exclusively in |i> (i = 0 or 1): the trace
/// runs over {|0,i>, |1,i>} only and is normalized by 4.
pub fn reduced_fidelity(u: &UnitaryMatrix, target: &TargetGate, i: usize) -> f64 {
    assert!(i < 2, "reduced fidelity index must be 0 or 1");
    let tr = trace_over(u, target, &REDUCED_PAIRS[i]);
    tr.norm_sqr() / 4.0
}

/// Mean of the two reduced fidelities; insensitive to a phase on qubit 2.
pub fn avg_fidelity(u: &UnitaryMatrix, target: &TargetGate) -> f64 {
    0.5 * (reduced_fidelity(u, target, 0) + reduced_fidelity(u, target, 1))
}

/// Population lost from the computational subspace, averaged over the four
/// computational initial states.
pub fn leakage(u: &UnitaryMatrix) -> f64 {
    let mut kept = 0.0;
    for &b in &COMPUTATIONAL {
        for &bp in &COMPUTATIONAL {
            kept += u.matrix()[(bp, b)].norm_sqr();
        }
    }
    1.0 - kept / 4.0
}

/// Wrap an angle to (-pi, pi].
fn wrap_phase(a: f64) -> f64 {
    let mut a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Phases of a gate of the product form
/// `exp(i alpha) X (x) diag(1, exp(i (gamma - alpha)))`
/// on the computational subspace, with the max-norm deviation of the actual
/// computational block from that form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseDecomposition {
    /// Global phase alpha, read off <1,0|U|0,0>, wrapped to (-pi, pi].
    pub alpha: f64,
    /// Qubit-2 phase gamma, read off <1,1|U|0,1>, wrapped to (-pi, pi].
    pub gamma: f64,
    /// Max-norm deviation of the computational block from the product form;
    /// large values mean the form assumption does not hold.
    pub residual: f64,
}

const PHASE_ELEMENT_MIN: f64 = 1e-6;

/// Extract the phases of an approximately X-like gate.
///
/// Fails when either phase-carrying matrix element is smaller than 1e-6 in
/// magnitude, i.e. when the gate is nowhere near a flip on qubit 1.
pub fn extract_phases(u: &UnitaryMatrix) -> Result<PhaseDecomposition> {
    let m = u.matrix();
    let a_elem = m[(basis_index(1, 0), basis_index(0, 0))];
    let g_elem = m[(basis_index(1, 1), basis_index(0, 1))];
    if a_elem.norm() < PHASE_ELEMENT_MIN || g_elem.norm() < PHASE_ELEMENT_MIN {
        return Err(Error::PhaseExtraction(format!(
            "flip matrix elements too small (|{:.3e}|, |{:.3e}|); gate is not X-like",
            a_elem.norm(),
            g_elem.norm()
        )));
    }
    let alpha = wrap_phase(a_elem.arg());
    let gamma = wrap_phase(g_elem.arg());

    let form = product_form(alpha, gamma);
    let mut residual: f64 = 0.0;
    for (bi, &b) in COMPUTATIONAL.iter().enumerate() {
        for (ci, &c) in COMPUTATIONAL.iter().enumerate() {
            residual = residual.max((m[(b, c)] - form[(bi, ci)]).norm());
        }
    }
    Ok(PhaseDecomposition { alpha, gamma, residual })
}

/// The 4x4 computational block exp(i alpha) X (x) diag(1, exp(i(gamma-alpha))),
/// rows/columns ordered |00>, |01>, |10>, |11>.
fn product_form(alpha: f64, gamma: f64) -> OMatrix<C64, Const<4>, Const<4>> {
    let ea = C64::from_polar(1.0, alpha);
    let eg = C64::from_polar(1.0, gamma);
    let mut f = OMatrix::<C64, Const<4>, Const<4>>::zeros();
    // X on qubit 1 maps |0,i> <-> |1,i>; qubit-2 |1> rows carry the extra phase
    f[(2, 0)] = ea;
    f[(0, 2)] = ea;
    f[(3, 1)] = eg;
    f[(1, 3)] = eg;
    f
}

/// Undo the qubit-2 phase of an approximately X-like gate.
///
/// Reads gamma off the gate itself, then composes the evolution with the
/// qubit-2 rotation diag(1, exp(-i(gamma - alpha)), 1) applied after it,
/// with `alpha` supplied by the caller. Phases on the leakage levels are
/// left untouched. For a gate of the exact product form the corrected gate
/// reaches full fidelity 1; in general its full fidelity approaches the
/// uncorrected gate's average reduced fidelity (they agree exactly when the
/// two reduced traces have equal magnitude).
pub fn apply_frame_correction(u: &UnitaryMatrix, alpha: f64) -> Result<UnitaryMatrix> {
    if !alpha.is_finite() {
        return Err(Error::PhaseExtraction("alpha must be finite".into()));
    }
    let phases = extract_phases(u)?;
    let mut corr = Matrix3::identity();
    corr[(1, 1)] = C64::from_polar(1.0, -(phases.gamma - alpha));
    let corr9 = crate::linalg::kron(&Matrix3::identity(), &corr);
    UnitaryMatrix::new(corr9 * u.matrix())
}

/// Full fidelity summary of one gate against one target.
#[derive(Debug, Clone, Serialize)]
pub struct FidelityReport {
    /// Full fidelity over the computational subspace.
    pub phi: f64,
    /// Reduced fidelity with qubit 2 in |0>.
    pub phi_star0: f64,
    /// Reduced fidelity with qubit 2 in |1>.
    pub phi_star1: f64,
    /// Mean of the reduced fidelities.
    pub phi_avg: f64,
    /// Global phase (rad), when the gate is X-like.
    pub alpha: Option<f64>,
    /// Qubit-2 phase (rad), when the gate is X-like.
    pub gamma: Option<f64>,
    /// Average population lost from the computational subspace.
    pub leakage: f64,
}

/// Evaluate every fidelity quantity for one evolution operator. Phase
/// extraction is attempted and reported as absent if the gate is not
/// X-like.
pub fn fidelity_report(u: &UnitaryMatrix, target: &TargetGate) -> FidelityReport {
    let phi_star0 = reduced_fidelity(u, target, 0);
    let phi_star1 = reduced_fidelity(u, target, 1);
    let phases = extract_phases(u).ok();
    FidelityReport {
        phi: gate_fidelity(u, target),
        phi_star0,
        phi_star1,
        phi_avg: 0.5 * (phi_star0 + phi_star1),
        alpha: phases.map(|p| p.alpha),
        gamma: phases.map(|p| p.gamma),
        leakage: leakage(u),
    }
}

/// Build the 9x9 unitary of the product form with the given phases:
/// exp(i alpha) X (x) diag(1, exp(i(gamma - alpha))) on the computational
/// subspace, identity on the leakage levels.
pub fn product_form_unitary(alpha: f64, gamma: f64) -> UnitaryMatrix {
    let mut m = Matrix9::identity();
    let form = product_form(alpha, gamma);
    for (bi, &b) in COMPUTATIONAL.iter().enumerate() {
        for (ci, &c) in COMPUTATIONAL.iter().enumerate() {
            m[(b, c)] = form[(bi, ci)];
        }
    }
    UnitaryMatrix::new(m).expect("product form is unitary by construction")
}
