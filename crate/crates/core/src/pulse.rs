//! Uniformly sampled two-quadrature control envelopes.
//!
//! Samples live at interval midpoints (j + 1/2) * dt, which buys
//! second-order accuracy in the piecewise-constant propagator.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sampled control envelope: N samples of each quadrature (rad/ns) on a
/// uniform grid of step `dt` (ns), covering the gate time N * dt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    dt: f64,
    omega_x: Vec<f64>,
    omega_y: Vec<f64>,
}

impl PulseSequence {
    pub fn new(dt: f64, omega_x: Vec<f64>, omega_y: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidPulse(format!("dt must be positive, got {dt}")));
        }
        if omega_x.is_empty() || omega_x.len() != omega_y.len() {
            return Err(Error::InvalidPulse(format!(
                "quadratures must have equal nonzero length, got {} and {}",
                omega_x.len(),
                omega_y.len()
            )));
        }
        Ok(Self { dt, omega_x, omega_y })
    }

    /// All-zero drive of `n` samples.
    pub fn zero(dt: f64, n: usize) -> Result<Self> {
        Self::new(dt, vec![0.0; n], vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.omega_x.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Total gate time N * dt.
    pub fn gate_time(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    pub fn omega_x(&self) -> &[f64] {
        &self.omega_x
    }

    pub fn omega_y(&self) -> &[f64] {
        &self.omega_y
    }

    /// Midpoint sample time of slice `j`.
    pub fn time_at(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dt
    }

    /// True if any sample is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.omega_x
            .iter()
            .chain(self.omega_y.iter())
            .any(|v| !v.is_finite())
    }

    /// Concatenate two pulses sampled on the same step.
    pub fn concat(&self, later: &PulseSequence) -> Result<Self> {
        if (self.dt - later.dt).abs() > 0.0 {
            return Err(Error::InvalidPulse(format!(
                "cannot concatenate pulses with different steps {} and {}",
                self.dt, later.dt
            )));
        }
        let mut x = self.omega_x.clone();
        let mut y = self.omega_y.clone();
        x.extend_from_slice(&later.omega_x);
        y.extend_from_slice(&later.omega_y);
        Self::new(self.dt, x, y)
    }

    /// Render as CSV with header `t_ns,omega_x,omega_y`, one row per sample
    /// at its midpoint time, 17 significant digits throughout.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t_ns,omega_x,omega_y\n");
        for j in 0..self.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                self.time_at(j),
                self.omega_x[j],
                self.omega_y[j]
            ));
        }
        out
    }

    /// Parse the CSV form written by [`Self::to_csv_string`]. The step is
    /// recovered from the first midpoint time (t_0 = dt/2) and the grid is
    /// checked for uniformity.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidPulse("empty pulse CSV".into()))?;
        if header.trim() != "t_ns,omega_x,omega_y" {
            return Err(Error::InvalidPulse(format!(
                "unexpected pulse CSV header: {header}"
            )));
        }
        let mut times = Vec::new();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::InvalidPulse(format!(
                    "row {}: expected 3 fields, got {}",
                    i + 2,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidPulse(format!("row {}: {e}", i + 2)))
            };
            times.push(parse(fields[0])?);
            x.push(parse(fields[1])?);
            y.push(parse(fields[2])?);
        }
        if times.is_empty() {
            return Err(Error::InvalidPulse("pulse CSV has no samples".into()));
        }
        let dt = 2.0 * times[0];
        let pulse = Self::new(dt, x, y)?;
        for (j, &t) in times.iter().enumerate() {
            if (t - pulse.time_at(j)).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::InvalidPulse(format!(
                    "row {}: non-uniform time grid (got {t}, expected {})",
                    j + 2,
                    pulse.time_at(j)
                )));
            }
        }
        Ok(pulse)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}
