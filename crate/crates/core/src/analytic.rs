//! Analytic control families: plain Gaussians, Gaussians with a derivative
//! quadrature, and the sideband-modulated variant that detunes its own
//! spectral weight away from the crowded leakage transition.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::pulse::PulseSequence;

/// Quadrature area `integral of (omega_x + i omega_y) dt` required for a full
/// population flip of the resonant transition (a pi rotation).
pub const AREA_TARGET: f64 = PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseFamily {
    /// Single-quadrature Gaussian envelope.
    Gaussian,
    /// Gaussian with the second quadrature set to -d(omega_x)/dt / beta.
    DragGaussian,
    /// Gaussian multiplied by (1 - A cos(w_x (t - t_g/2))), with a
    /// derivative second quadrature.
    Sideband,
}

/// Closed-form description of one analytic pulse. Which fields are read
/// depends on the family; unused ones are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPulseSpec {
    pub family: PulseFamily,
    /// Total gate time (ns).
    pub gate_time: f64,
    /// Gaussian width (ns); conventionally gate_time / 6.
    pub sigma: f64,
    /// Overall amplitude A_pi (rad/ns).
    pub amplitude: f64,
    /// Sideband modulation depth A (dimensionless).
    pub sideband_depth: f64,
    /// Sideband modulation frequency w_x (rad/ns).
    pub sideband_freq: f64,
    /// Divisor of the derivative quadrature (rad/ns).
    pub drag_beta: f64,
}

impl AnalyticPulseSpec {
    /// Plain Gaussian of width gate_time/6, unit amplitude.
    pub fn gaussian(gate_time: f64) -> Self {
        Self {
            family: PulseFamily::Gaussian,
            gate_time,
            sigma: gate_time / 6.0,
            amplitude: 1.0,
            sideband_depth: 0.0,
            sideband_freq: 0.0,
            drag_beta: 1.0,
        }
    }

    /// Gaussian with derivative quadrature -d(omega_x)/dt / beta.
    pub fn drag_gaussian(gate_time: f64, beta: f64) -> Self {
        Self {
            family: PulseFamily::DragGaussian,
            drag_beta: beta,
            ..Self::gaussian(gate_time)
        }
    }

    /// The crowding-adapted sideband preset for the given system: modulation
    /// depth 1, modulation frequency delta/2, derivative quadrature divided
    /// by twice the anharmonicity.
    pub fn sideband(params: &SystemParams, gate_time: f64) -> Self {
        Self::sideband_general(gate_time, 1.0, params.delta() / 2.0, 2.0 * params.anharm())
    }

    /// General sideband-modulated Gaussian with free depth, modulation
    /// frequency and quadrature divisor.
    pub fn sideband_general(gate_time: f64, depth: f64, freq: f64, beta: f64) -> Self {
        Self {
            family: PulseFamily::Sideband,
            sideband_depth: depth,
            sideband_freq: freq,
            drag_beta: beta,
            ..Self::gaussian(gate_time)
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Unit-amplitude envelope at centered offset u = t - gate_time/2.
    fn shape(&self, u: f64) -> f64 {
        let g = (-u * u / (2.0 * self.sigma * self.sigma)).exp();
        match self.family {
            PulseFamily::Gaussian | PulseFamily::DragGaussian => g,
            PulseFamily::Sideband => {
                g * (1.0 - self.sideband_depth * (self.sideband_freq * u).cos())
            }
        }
    }

    /// Analytic derivative of [`Self::shape`] with respect to time.
    fn shape_derivative(&self, u: f64) -> f64 {
        let g = (-u * u / (2.0 * self.sigma * self.sigma)).exp();
        let gp = -u / (self.sigma * self.sigma) * g;
        match self.family {
            PulseFamily::Gaussian | PulseFamily::DragGaussian => gp,
            PulseFamily::Sideband => {
                let c = (self.sideband_freq * u).cos();
                let s = (self.sideband_freq * u).sin();
                gp * (1.0 - self.sideband_depth * c)
                    + g * self.sideband_depth * self.sideband_freq * s
            }
        }
    }

    /// Quadrature values (omega_x, omega_y) at time `t`, from the closed
    /// form. The derivative quadrature comes from the analytic derivative,
    /// never from finite differences.
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        let u = t - self.gate_time / 2.0;
        let x = self.amplitude * self.shape(u);
        let y = match self.family {
            PulseFamily::Gaussian => 0.0,
            PulseFamily::DragGaussian | PulseFamily::Sideband => {
                -self.amplitude * self.shape_derivative(u) / self.drag_beta
            }
        };
        (x, y)
    }

    /// Sample the closed form at interval midpoints (j + 1/2) dt, with
    /// N = round(gate_time / dt) samples. Gaussian tails are cut off plainly
    /// at t = 0 and t = gate_time, without offset subtraction, so small
    /// nonzero boundary values remain and enter the area normalization.
    pub fn render(&self, dt: f64) -> Result<PulseSequence> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidPulse(format!("dt must be positive, got {dt}")));
        }
        if !(self.gate_time > 0.0) || !(self.sigma > 0.0) {
            return Err(Error::InvalidPulse(format!(
                "gate time and sigma must be positive, got {} and {}",
                self.gate_time, self.sigma
            )));
        }
        let n = (self.gate_time / dt).round() as usize;
        if n == 0 {
            return Err(Error::InvalidPulse(format!(
                "dt = {dt} is too coarse for gate time {}",
                self.gate_time
            )));
        }
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for j in 0..n {
            // centered offset written so that u_j = -u_{N-1-j} holds exactly
            let u = (j as f64 + 0.5 - 0.5 * n as f64) * dt;
            let sx = self.amplitude * self.shape(u);
            let sy = match self.family {
                PulseFamily::Gaussian => 0.0,
                PulseFamily::DragGaussian | PulseFamily::Sideband => {
                    -self.amplitude * self.shape_derivative(u) / self.drag_beta
                }
            };
            x.push(sx);
            y.push(sy);
        }
        PulseSequence::new(dt, x, y)
    }

    /// Fix the amplitude so the rendered pulse meets the area target: the
    /// real part of `integral (omega_x + i omega_y) dt`, evaluated as the
    /// midpoint sum on the rendered grid, equals [`AREA_TARGET`], with the
    /// imaginary part below 1e-9 (derivative quadratures of symmetric
    /// envelopes integrate to zero).
    ///
    /// The amplitude enters linearly, so the root is solved exactly from the
    /// unit-amplitude area; a vanishing unit area is reported as failure.
    pub fn normalize_area(&self, dt: f64) -> Result<Self> {
        let unit = Self { amplitude: 1.0, ..*self }.render(dt)?;
        let area_x: f64 = unit.omega_x().iter().sum::<f64>() * dt;
        if area_x.abs() < 1e-12 {
            return Err(Error::AreaNormalization(format!(
                "unit-amplitude quadrature area {area_x:.3e} vanishes; no amplitude can meet the target"
            )));
        }
        let amplitude = AREA_TARGET / area_x;
        let out = Self { amplitude, ..*self };
        // verify on the final rendering
        let rendered = out.render(dt)?;
        let got_x: f64 = rendered.omega_x().iter().sum::<f64>() * dt;
        let got_y: f64 = rendered.omega_y().iter().sum::<f64>() * dt;
        if (got_x - AREA_TARGET).abs() > 1e-9 * AREA_TARGET {
            return Err(Error::AreaNormalization(format!(
                "residual in-phase area error {:.3e} after normalization",
                got_x - AREA_TARGET
            )));
        }
        if got_y.abs() > 1e-9 {
            return Err(Error::AreaNormalization(format!(
                "out-of-phase area {got_y:.3e} does not vanish"
            )));
        }
        Ok(out)
    }
}

/// First-order amplitude ratios of the off-resonant transitions that survive
/// a derivative-quadrature pulse with divisor beta, plus the two second-order
/// two-photon prefactors. Entries scaling with the drive ratio
/// eta = omega_x / beta are stored per power of eta; [`DragCoefficients::at_eta`]
/// turns them into concrete numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DragCoefficients {
    /// Qubit 1's 1<->2 transition: lambda (beta - anharm) / (2 beta).
    pub q1_leakage: f64,
    /// Qubit 2's 0<->1 transition, per eta: (beta - delta + anharm) / (2 beta).
    pub q2_drive_per_eta: f64,
    /// Qubit 2's 1<->2 transition, per eta: lambda (beta - delta) / (2 beta).
    pub q2_leakage_per_eta: f64,
    /// Qubit 1's two-photon 0<->2 prefactor: lambda anharm / (8 beta^2).
    pub q1_two_photon: f64,
    /// Qubit 2's two-photon 0<->2 prefactor, per eta^2: lambda anharm / (8 beta^2).
    pub q2_two_photon_per_eta2: f64,
}

impl DragCoefficients {
    /// Concrete coefficient magnitudes at a given drive ratio eta, ordered as
    /// the struct fields. Useful for ranking which leakage channel a beta
    /// choice actually suppresses.
    pub fn at_eta(&self, eta: f64) -> [f64; 5] {
        [
            self.q1_leakage,
            self.q2_drive_per_eta * eta,
            self.q2_leakage_per_eta * eta,
            self.q1_two_photon,
            self.q2_two_photon_per_eta2 * eta * eta,
        ]
    }
}

/// First-order residual coefficients of the derivative-quadrature scheme for
/// a given beta. Fails for beta = 0.
pub fn drag_residual_coefficients(beta: f64, params: &SystemParams) -> Result<DragCoefficients> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::InvalidParams(format!(
            "derivative-quadrature divisor beta must be finite and nonzero, got {beta}"
        )));
    }
    let delta = params.delta();
    let anharm = params.anharm();
    let lam1 = params.lambda()[0][1];
    let lam2 = params.lambda()[1][1];
    Ok(DragCoefficients {
        q1_leakage: lam1 * (beta - anharm) / (2.0 * beta),
        q2_drive_per_eta: (beta - delta + anharm) / (2.0 * beta),
        q2_leakage_per_eta: lam2 * (beta - delta) / (2.0 * beta),
        q1_two_photon: lam1 * anharm / (8.0 * beta * beta),
        q2_two_photon_per_eta2: lam2 * anharm / (8.0 * beta * beta),
    })
}
