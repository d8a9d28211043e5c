//! Time-ordered evolution operators for piecewise-constant sampled controls,
//! plus a refined-grid oracle integrator used for validation.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix9, Vector9, DIM};
use crate::operators::{
    build_control_generators, build_drift, build_interaction_hamiltonian, rotating_frame_slice,
};
use crate::params::SystemParams;
use crate::pulse::PulseSequence;

/// Max-norm tolerance on U^dagger U - 1 for accepting an evolution operator.
pub const UNITARITY_TOL: f64 = 1e-10;

/// A 9x9 evolution operator with verified unitarity.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: Matrix9,
}

impl UnitaryMatrix {
    pub fn new(matrix: Matrix9) -> Result<Self> {
        let deviation = linalg::unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self { matrix: Matrix9::identity() }
    }

    pub fn matrix(&self) -> &Matrix9 {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix9 {
        self.matrix
    }

    pub fn unitarity_deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.matrix)
    }

    /// Compose with a later operation: `later * self`.
    pub fn then(&self, later: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { matrix: later.matrix * self.matrix }
    }
}

fn check_finite(pulse: &PulseSequence) -> Result<()> {
    if pulse.has_non_finite() {
        return Err(Error::InvalidPulse(
            "pulse contains non-finite samples".into(),
        ));
    }
    Ok(())
}

/// Evolution operator of the rotating-frame Hamiltonian under the sampled
/// controls: the ordered product of exact slice exponentials
/// exp(-i (drift + x_j Hx + y_j Hy) dt), earliest slice rightmost.
pub fn propagate(params: &SystemParams, pulse: &PulseSequence) -> Result<UnitaryMatrix> {
    check_finite(pulse)?;
    let drift = build_drift(params).into_matrix();
    let (hx, hy) = build_control_generators(params);
    let (hx, hy) = (hx.into_matrix(), hy.into_matrix());
    let mut u = Matrix9::identity();
    for j in 0..pulse.len() {
        let h = rotating_frame_slice(&drift, &hx, &hy, pulse.omega_x()[j], pulse.omega_y()[j]);
        u = linalg::expm_minus_i(&h, pulse.dt()) * u;
    }
    UnitaryMatrix::new(linalg::polish_unitary(u))
}

/// Evolution operator of the interaction-frame Hamiltonian sampled on the
/// same midpoint grid.
///
/// The combined amplitude entering the lowering operators is
/// `omega_c = x - i y`, the pairing consistent with the rotating-frame
/// generators; with it, `exp(+i drift t_g) * propagate(..)` and this
/// operator agree up to the O(dt^2) discretization error.
pub fn propagate_interaction(params: &SystemParams, pulse: &PulseSequence) -> Result<UnitaryMatrix> {
    check_finite(pulse)?;
    let mut u = Matrix9::identity();
    for j in 0..pulse.len() {
        let omega_c = C64::new(pulse.omega_x()[j], -pulse.omega_y()[j]);
        let h = build_interaction_hamiltonian(params, omega_c, pulse.time_at(j))?;
        u = linalg::expm_minus_i(h.matrix(), pulse.dt()) * u;
    }
    UnitaryMatrix::new(linalg::polish_unitary(u))
}

/// Reference propagator on a grid refined by `refinement`, with the
/// envelopes linearly interpolated between the original midpoint samples
/// (clamped beyond the first and last midpoints).
pub fn oracle_propagate(
    params: &SystemParams,
    pulse: &PulseSequence,
    refinement: usize,
) -> Result<UnitaryMatrix> {
    if refinement < 2 {
        return Err(Error::InvalidPulse(format!(
            "oracle refinement must be at least 2, got {refinement}"
        )));
    }
    check_finite(pulse)?;
    let fine = refine_pulse(pulse, refinement)?;
    propagate(params, &fine)
}

/// Linear interpolation of a pulse's midpoint samples onto a grid refined
/// by the given factor.
pub(crate) fn refine_pulse(pulse: &PulseSequence, refinement: usize) -> Result<PulseSequence> {
    let n = pulse.len();
    let fine_dt = pulse.dt() / refinement as f64;
    let interp = |samples: &[f64], t: f64| -> f64 {
        // position in units of coarse samples, relative to the first midpoint
        let s = t / pulse.dt() - 0.5;
        if s <= 0.0 {
            samples[0]
        } else if s >= (n - 1) as f64 {
            samples[n - 1]
        } else {
            let k = s.floor() as usize;
            let frac = s - k as f64;
            samples[k] * (1.0 - frac) + samples[k + 1] * frac
        }
    };
    let mut x = Vec::with_capacity(n * refinement);
    let mut y = Vec::with_capacity(n * refinement);
    for m in 0..n * refinement {
        let t = (m as f64 + 0.5) * fine_dt;
        x.push(interp(pulse.omega_x(), t));
        y.push(interp(pulse.omega_y(), t));
    }
    PulseSequence::new(fine_dt, x, y)
}

/// Initial condition for a population trajectory.
#[derive(Debug, Clone)]
pub enum InitialState {
    /// One of the nine product basis states, by index 3*j1 + j2.
    Basis(usize),
    /// An arbitrary normalized state vector.
    Vector(Vector9),
}

impl From<usize> for InitialState {
    fn from(i: usize) -> Self {
        InitialState::Basis(i)
    }
}

impl From<Vector9> for InitialState {
    fn from(v: Vector9) -> Self {
        InitialState::Vector(v)
    }
}

impl InitialState {
    fn into_vector(self) -> Result<Vector9> {
        match self {
            InitialState::Basis(i) => {
                if i >= DIM {
                    return Err(Error::InvalidState(format!(
                        "basis index {i} out of range 0..{DIM}"
                    )));
                }
                let mut v = Vector9::zeros();
                v[i] = C64::new(1.0, 0.0);
                Ok(v)
            }
            InitialState::Vector(v) => {
                let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-8 {
                    return Err(Error::InvalidState(format!(
                        "initial vector norm deviates from 1 by {:.3e}",
                        (norm - 1.0).abs()
                    )));
                }
                Ok(v)
            }
        }
    }
}

/// Basis-state populations along the evolution: one row per step boundary
/// (N + 1 rows including t = 0 and t = gate time).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub populations: Vec<[f64; DIM]>,
}

impl Trajectory {
    /// Final populations, at the gate time.
    pub fn last(&self) -> &[f64; DIM] {
        self.populations.last().expect("trajectory has at least one row")
    }
}

/// Per-step populations |<b|U(t_j)|psi0>|^2 for all nine basis states.
pub fn propagate_trajectory(
    params: &SystemParams,
    pulse: &PulseSequence,
    initial: InitialState,
) -> Result<Trajectory> {
    check_finite(pulse)?;
    let mut psi = initial.into_vector()?;
    let drift = build_drift(params).into_matrix();
    let (hx, hy) = build_control_generators(params);
    let (hx, hy) = (hx.into_matrix(), hy.into_matrix());

    // readout normalization: the state accumulates ~1e-15 of norm drift per
    // slice, and rows are contracted to sum to 1
    let record = |psi: &Vector9| {
        let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let mut row = [0.0; DIM];
        for (slot, z) in row.iter_mut().zip(psi.iter()) {
            *slot = z.norm_sqr() / norm_sqr;
        }
        row
    };

    let mut times = Vec::with_capacity(pulse.len() + 1);
    let mut populations = Vec::with_capacity(pulse.len() + 1);
    times.push(0.0);
    populations.push(record(&psi));
    for j in 0..pulse.len() {
        let h = rotating_frame_slice(&drift, &hx, &hy, pulse.omega_x()[j], pulse.omega_y()[j]);
        psi = linalg::expm_minus_i(&h, pulse.dt()) * psi;
        times.push((j as f64 + 1.0) * pulse.dt());
        populations.push(record(&psi));
    }
    Ok(Trajectory { times, populations })
}
