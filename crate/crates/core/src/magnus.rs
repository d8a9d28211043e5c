//! Average-Hamiltonian diagnostics for sampled controls: the spectral
//! constraint residuals at the system detunings, the zeroth-order integral
//! of the interaction-frame Hamiltonian, and the first-order diagonal
//! element that drives the sideband design.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::analytic::AREA_TARGET;
use crate::error::Result;
use crate::linalg::Matrix9;
use crate::operators::{build_interaction_hamiltonian, HamiltonianSample};
use crate::params::SystemParams;
use crate::pulse::PulseSequence;

/// Spectral weight of the combined control at frequency `nu`:
/// (1/2) * sum_j exp(-i nu t_j) (omega_x_j + i omega_y_j) dt
/// over the pulse's midpoint grid.
pub fn control_transform(pulse: &PulseSequence, nu: f64) -> C64 {
    let dt = pulse.dt();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..pulse.len() {
        let oc = C64::new(pulse.omega_x()[j], pulse.omega_y()[j]);
        acc += oc * C64::from_polar(1.0, -nu * pulse.time_at(j));
    }
    acc * 0.5 * dt
}

/// How far a pulse is from the zeroth-order gate conditions: the resonant
/// (nu = 0) weight must equal half the area target, and the weights at the
/// three off-resonant detunings must vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintResiduals {
    /// |(1/2) integral of omega_c - pi/2|.
    pub area_error: f64,
    /// Residual weight at the anharmonicity (qubit 1's leakage transition).
    pub r_anharm: f64,
    /// Residual weight at the crowding detuning (qubit 2's leakage
    /// transition), the one the sideband family is built to suppress.
    pub r_delta: f64,
    /// Residual weight at delta - anharm (qubit 2's drive transition).
    pub r_delta_minus_anharm: f64,
}

/// Evaluate the four spectral constraints of a pulse against a system.
pub fn fourier_constraints(pulse: &PulseSequence, params: &SystemParams) -> ConstraintResiduals {
    let half_target = AREA_TARGET / 2.0;
    ConstraintResiduals {
        area_error: (control_transform(pulse, 0.0) - C64::new(half_target, 0.0)).norm(),
        r_anharm: control_transform(pulse, params.anharm()).norm(),
        r_delta: control_transform(pulse, params.delta()).norm(),
        r_delta_minus_anharm: control_transform(pulse, params.delta() - params.anharm()).norm(),
    }
}

/// Zeroth-order integral of the interaction-frame Hamiltonian over the gate,
/// by midpoint quadrature on the pulse's own grid. Dividing by the gate time
/// gives the average Hamiltonian.
pub fn magnus_theta0(pulse: &PulseSequence, params: &SystemParams) -> Result<HamiltonianSample> {
    let dt = pulse.dt();
    let mut acc = Matrix9::zeros();
    for j in 0..pulse.len() {
        // lowering-operator amplitude pairing consistent with the
        // rotating-frame generators
        let omega_c = C64::new(pulse.omega_x()[j], -pulse.omega_y()[j]);
        let h = build_interaction_hamiltonian(params, omega_c, pulse.time_at(j))?;
        acc += h.matrix().scale(dt);
    }
    HamiltonianSample::new(acc)
}

/// First-order diagonal element of the effective Hamiltonian on |0,1>:
///
/// (1/4) * double integral over 0 <= t1 < t2 <= t_g of
///   [omega_x(t2) omega_y(t1) - omega_x(t1) omega_y(t2)]
///   * [1 + cos(delta (t1 - t2)) - sin(delta (t1 - t2))],
///
/// evaluated by nested midpoint quadrature on the pulse grid.
///
/// The cost is O(N^2) in the sample count; the antisymmetric integrand
/// vanishes on the diagonal, so the strict lower triangle suffices.
pub fn magnus_theta1_diag01(pulse: &PulseSequence, params: &SystemParams) -> f64 {
    let n = pulse.len();
    let dt = pulse.dt();
    let delta = params.delta();
    let x = pulse.omega_x();
    let y = pulse.omega_y();
    // cos/sin of delta * t per sample, so the angle-difference kernel
    // becomes products instead of per-pair trig
    let mut c = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    for j in 0..n {
        let (sj, cj) = (delta * pulse.time_at(j)).sin_cos();
        c.push(cj);
        s.push(sj);
    }
    let mut total = 0.0;
    for j2 in 0..n {
        let (x2, y2, c2, s2) = (x[j2], y[j2], c[j2], s[j2]);
        let mut row = 0.0;
        for j1 in 0..j2 {
            let anti = x2 * y[j1] - x[j1] * y2;
            // cos(d(t1-t2)) = c1 c2 + s1 s2; sin(d(t1-t2)) = s1 c2 - c1 s2
            let kernel = 1.0 + (c[j1] * c2 + s[j1] * s2) - (s[j1] * c2 - c[j1] * s2);
            row += anti * kernel;
        }
        total += row;
    }
    0.25 * total * dt * dt
}
