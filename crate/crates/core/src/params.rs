//! System parameters of the two-transmon model and the detunings derived
//! from them.
//!
//! All angular frequencies are stored in rad/ns. User-facing configuration
//! is written in ordinary MHz and converted on load; 1 MHz corresponds to
//! 2e-3*pi rad/ns.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LEVELS;

/// Conversion factor from ordinary MHz to angular rad/ns.
pub const MHZ: f64 = 2.0e-3 * PI;

/// Physics configuration of two three-level transmons under one shared drive.
///
/// `delta` is the spectral-crowding detuning between qubit 1's 0<->1
/// transition (resonant with the drive) and qubit 2's 1<->2 transition.
/// `anharm` is the shared anharmonicity of both transmons (negative).
/// `lambda[k][j-1]` scales how strongly the drive couples the j-1 <-> j
/// transition of qubit k+1; the convention is lambda = [1, sqrt(2)] on both
/// qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    delta: f64,
    anharm: f64,
    lambda: [[f64; 2]; 2],
}

impl Default for SystemParams {
    /// Reference configuration: delta/2pi = 45 MHz, anharmonicity/2pi =
    /// -350 MHz, lambda = [1, sqrt(2)] on both qubits.
    fn default() -> Self {
        Self {
            delta: 45.0 * MHZ,
            anharm: -350.0 * MHZ,
            lambda: [[1.0, std::f64::consts::SQRT_2]; 2],
        }
    }
}

impl SystemParams {
    /// Build from ordinary-frequency inputs in MHz with the conventional
    /// ladder couplings. Rejects non-negative anharmonicity.
    pub fn new(delta_mhz: f64, anharm_mhz: f64) -> Result<Self> {
        let p = Self::from_angular(
            delta_mhz * MHZ,
            anharm_mhz * MHZ,
            [[1.0, std::f64::consts::SQRT_2]; 2],
        )?;
        if p.anharm >= 0.0 {
            return Err(Error::InvalidParams(format!(
                "anharmonicity must be negative, got {anharm_mhz} MHz"
            )));
        }
        Ok(p)
    }

    /// Build directly from angular frequencies (rad/ns) and explicit ladder
    /// couplings. Only finiteness is enforced here; sign conventions are the
    /// caller's business, which keeps degenerate diagnostic configurations
    /// (zero anharmonicity, decoupled qubits) expressible.
    pub fn from_angular(delta: f64, anharm: f64, lambda: [[f64; 2]; 2]) -> Result<Self> {
        if !delta.is_finite() || !anharm.is_finite() {
            return Err(Error::InvalidParams(
                "delta and anharmonicity must be finite".into(),
            ));
        }
        for row in &lambda {
            for &l in row {
                if !l.is_finite() || l < 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "ladder couplings must be finite and non-negative, got {l}"
                    )));
                }
            }
        }
        Ok(Self { delta, anharm, lambda })
    }

    /// Replace the ladder couplings (per qubit, per transition).
    pub fn with_lambda(mut self, lambda: [[f64; 2]; 2]) -> Result<Self> {
        self = Self::from_angular(self.delta, self.anharm, lambda)?;
        Ok(self)
    }

    /// Crowding detuning (rad/ns).
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Anharmonicity (rad/ns).
    pub fn anharm(&self) -> f64 {
        self.anharm
    }

    /// Ladder couplings, indexed `[qubit][transition]`.
    pub fn lambda(&self) -> &[[f64; 2]; 2] {
        &self.lambda
    }

    /// Number of levels per transmon (fixed).
    pub fn levels(&self) -> usize {
        LEVELS
    }

    /// Non-fatal conventions this configuration violates.
    ///
    /// Spectral crowding presumes |delta| < |anharmonicity|; the whole point
    /// of the toolkit evaporates otherwise, but simulation still works, so
    /// the violation is reported rather than rejected. Likewise the
    /// normalization convention lambda_1 = 1 on qubit 1.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.delta.abs() >= self.anharm.abs() {
            out.push(format!(
                "|delta| = {:.3} rad/ns is not smaller than |anharmonicity| = {:.3} rad/ns; \
                 the configuration is not spectrally crowded",
                self.delta.abs(),
                self.anharm.abs()
            ));
        }
        if (self.lambda[0][0] - 1.0).abs() > 1e-12 {
            out.push(format!(
                "lambda_1 on qubit 1 is {}; the drive normalization convention expects 1",
                self.lambda[0][0]
            ));
        }
        out
    }

    /// Load from a JSON file with keys `delta_mhz`, `anharm_mhz`, `lambda`.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Parse from a JSON document. Missing keys fall back to the defaults.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ParamsConfig = serde_json::from_str(text)?;
        cfg.build()
    }

    /// Per-transition drive detunings implied by these parameters.
    pub fn detunings(&self) -> DetuningTable {
        DetuningTable::from_params(self)
    }
}

/// Drive detunings of the four ladder transitions, derived from
/// [`SystemParams`]: qubit 1 sees [0, anharm], qubit 2 sees
/// [delta - anharm, delta].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetuningTable {
    /// Detunings of qubit 1's 0<->1 and 1<->2 transitions (rad/ns).
    pub qubit1: [f64; 2],
    /// Detunings of qubit 2's 0<->1 and 1<->2 transitions (rad/ns).
    pub qubit2: [f64; 2],
}

impl DetuningTable {
    pub fn from_params(p: &SystemParams) -> Self {
        Self {
            qubit1: [0.0, p.anharm()],
            qubit2: [p.delta() - p.anharm(), p.delta()],
        }
    }

    /// Detuning of transition j-1 <-> j (j in 1..=2) of the given qubit
    /// (0-based).
    pub fn of(&self, qubit: usize, j: usize) -> f64 {
        debug_assert!(qubit < 2 && (1..=2).contains(&j));
        match qubit {
            0 => self.qubit1[j - 1],
            _ => self.qubit2[j - 1],
        }
    }

    /// Rotating-frame level energies of one transmon as prefix sums of its
    /// transition detunings: E_0 = 0, E_j = E_{j-1} + detuning_j.
    pub fn level_energies(&self, qubit: usize) -> [f64; LEVELS] {
        let d = if qubit == 0 { self.qubit1 } else { self.qubit2 };
        [0.0, d[0], d[0] + d[1]]
    }
}

/// On-disk JSON form of [`SystemParams`].
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsConfig {
    #[serde(default = "default_delta_mhz")]
    delta_mhz: f64,
    #[serde(default = "default_anharm_mhz")]
    anharm_mhz: f64,
    #[serde(default)]
    lambda: LambdaSpec,
}

fn default_delta_mhz() -> f64 {
    45.0
}

fn default_anharm_mhz() -> f64 {
    -350.0
}

/// Ladder couplings: either one `[l1, l2]` pair shared by both qubits or an
/// explicit per-qubit pair of pairs.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LambdaSpec {
    Shared([f64; 2]),
    PerQubit([[f64; 2]; 2]),
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec::Shared([1.0, std::f64::consts::SQRT_2])
    }
}

impl ParamsConfig {
    fn build(self) -> Result<SystemParams> {
        if self.anharm_mhz >= 0.0 {
            return Err(Error::InvalidParams(format!(
                "anharmonicity must be negative, got {} MHz",
                self.anharm_mhz
            )));
        }
        let lambda = match self.lambda {
            LambdaSpec::Shared(l) => [l, l],
            LambdaSpec::PerQubit(l) => l,
        };
        SystemParams::from_angular(self.delta_mhz * MHZ, self.anharm_mhz * MHZ, lambda)
    }
}
