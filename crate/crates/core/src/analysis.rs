//! Sweep, protocol and spectrum analyses on top of the core operations,
//! with figure-ready CSV renderings.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::AnalyticPulseSpec;
use crate::error::{Error, Result};
use crate::fidelity::{extract_phases, fidelity_report, FidelityReport, TargetGate};
use crate::linalg::DIM;
use crate::params::SystemParams;
use crate::propagate::{propagate, propagate_trajectory, InitialState, Trajectory};
use crate::pulse::PulseSequence;

/// Pulse family selector for sweeps and the calibration protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Gaussian,
    /// Gaussian with derivative quadrature divided by `beta`.
    DragGaussian { beta: f64 },
    /// The crowding-adapted sideband preset.
    Sideband,
    /// No drive at all; a diagnostic baseline.
    Zero,
}

impl Family {
    /// Area-normalized pulse of this family at the given gate time.
    pub fn build_pulse(
        &self,
        params: &SystemParams,
        gate_time: f64,
        dt: f64,
    ) -> Result<(PulseSequence, f64)> {
        let spec = match self {
            Family::Gaussian => AnalyticPulseSpec::gaussian(gate_time),
            Family::DragGaussian { beta } => AnalyticPulseSpec::drag_gaussian(gate_time, *beta),
            Family::Sideband => AnalyticPulseSpec::sideband(params, gate_time),
            Family::Zero => {
                let n = (gate_time / dt).round().max(1.0) as usize;
                return Ok((PulseSequence::zero(dt, n)?, 0.0));
            }
        };
        let normalized = spec.normalize_area(dt)?;
        Ok((normalized.render(dt)?, normalized.amplitude))
    }

    pub fn label(&self) -> String {
        match self {
            Family::Gaussian => "gaussian".into(),
            Family::DragGaussian { beta } => format!("drag(beta={beta:.6})"),
            Family::Sideband => "sideband".into(),
            Family::Zero => "zero".into(),
        }
    }
}

/// One gate time's worth of sweep output. Fidelity columns hold errors
/// (1 - fidelity); a failed point carries NaN columns and a status message.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub gate_time: f64,
    pub err_phi: f64,
    pub err_phi_star0: f64,
    pub err_phi_star1: f64,
    pub err_phi_avg: f64,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    /// None when the point evaluated cleanly.
    pub status: Option<String>,
}

impl SweepRow {
    fn from_report(gate_time: f64, r: &FidelityReport) -> Self {
        Self {
            gate_time,
            err_phi: 1.0 - r.phi,
            err_phi_star0: 1.0 - r.phi_star0,
            err_phi_star1: 1.0 - r.phi_star1,
            err_phi_avg: 1.0 - r.phi_avg,
            alpha: r.alpha,
            gamma: r.gamma,
            status: None,
        }
    }

    fn failed(gate_time: f64, message: String) -> Self {
        Self {
            gate_time,
            err_phi: f64::NAN,
            err_phi_star0: f64::NAN,
            err_phi_star1: f64::NAN,
            err_phi_avg: f64::NAN,
            alpha: None,
            gamma: None,
            status: Some(message),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status.is_none()
    }
}

/// Fidelity-error curves of one family over a grid of gate times, rows
/// strictly ascending in gate time.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub family: String,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_CSV_HEADER: &str =
    "gate_time_ns,err_phi,err_phi_star0,err_phi_star1,err_phi_avg,alpha,gamma,status";

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => "nan".into(),
    }
}

impl SweepResult {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let status = r
                .status
                .as_deref()
                .unwrap_or("ok")
                .replace([',', '\n'], ";");
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}\n",
                r.gate_time,
                r.err_phi,
                r.err_phi_star0,
                r.err_phi_star1,
                r.err_phi_avg,
                fmt_opt(r.alpha),
                fmt_opt(r.gamma),
                status
            ));
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty sweep CSV".into()))?;
        if header.trim() != SWEEP_CSV_HEADER {
            return Err(Error::Config(format!("unexpected sweep CSV header: {header}")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(Error::Config(format!(
                    "sweep CSV row {}: expected 8 fields, got {}",
                    i + 2,
                    fields.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("sweep CSV row {}: {e}", i + 2)))
            };
            let opt = |s: &str| -> Result<Option<f64>> {
                if s == "nan" {
                    Ok(None)
                } else {
                    num(s).map(Some)
                }
            };
            let status = if fields[7] == "ok" {
                None
            } else {
                Some(fields[7].to_string())
            };
            rows.push(SweepRow {
                gate_time: num(fields[0])?,
                err_phi: num(fields[1])?,
                err_phi_star0: num(fields[2])?,
                err_phi_star1: num(fields[3])?,
                err_phi_avg: num(fields[4])?,
                alpha: opt(fields[5])?,
                gamma: opt(fields[6])?,
                status,
            });
        }
        Ok(Self {
            family: String::new(),
            rows,
        })
    }

    /// The clean row with the smallest average-fidelity error.
    pub fn best_avg(&self) -> Option<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.is_ok())
            .min_by(|a, b| a.err_phi_avg.total_cmp(&b.err_phi_avg))
    }
}

fn check_ascending(gate_times: &[f64]) -> Result<()> {
    if gate_times.is_empty() {
        return Err(Error::Config("gate-time grid is empty".into()));
    }
    if gate_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("gate-time grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Evaluate one family over a grid of gate times: normalize the area, render,
/// propagate, and report every fidelity quantity per point. Failed points
/// become flagged rows rather than aborting the sweep. Points run in a
/// parallel worker pool; row order follows the input grid.
pub fn sweep_gate_time(
    family: Family,
    params: &SystemParams,
    gate_times: &[f64],
    dt: f64,
) -> Result<SweepResult> {
    check_ascending(gate_times)?;
    let target = TargetGate::default();
    let rows: Vec<SweepRow> = gate_times
        .par_iter()
        .map(|&tg| match evaluate_point(family, params, tg, dt, &target) {
            Ok((report, _amp)) => SweepRow::from_report(tg, &report),
            Err(e) => SweepRow::failed(tg, e.to_string()),
        })
        .collect();
    Ok(SweepResult {
        family: family.label(),
        rows,
    })
}

fn evaluate_point(
    family: Family,
    params: &SystemParams,
    gate_time: f64,
    dt: f64,
    target: &TargetGate,
) -> Result<(FidelityReport, f64)> {
    let (pulse, amplitude) = family.build_pulse(params, gate_time, dt)?;
    let u = propagate(params, &pulse)?;
    Ok((fidelity_report(&u, target), amplitude))
}

/// Outcome of the calibration workflow: the recommended gate time, the pulse
/// amplitude meeting the area condition there, and the phases a subsequent
/// frame change must undo.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolRecommendation {
    pub family: String,
    pub gate_time: f64,
    pub amplitude: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub report: FidelityReport,
}

/// Minimum average fidelity for a grid point to count as usable.
pub const PROTOCOL_MIN_AVG: f64 = 0.5;

/// The pulse-calibration workflow: derive the family's shape from the system
/// parameters, solve the area condition per gate time, pick the gate time
/// maximizing the average reduced fidelity on the grid, refine it by local
/// golden-section search, and extract the phase offsets for downstream
/// correction.
pub fn protocol_run(
    family: Family,
    params: &SystemParams,
    search: &[f64],
    dt: f64,
) -> Result<ProtocolRecommendation> {
    check_ascending(search)?;
    let target = TargetGate::default();
    let evals: Vec<(f64, Result<(FidelityReport, f64)>)> = search
        .par_iter()
        .map(|&tg| (tg, evaluate_point(family, params, tg, dt, &target)))
        .collect();

    let mut best: Option<(f64, FidelityReport, f64)> = None;
    for (tg, outcome) in &evals {
        if let Ok((report, amp)) = outcome {
            if best.as_ref().is_none_or(|(_, b, _)| report.phi_avg > b.phi_avg) {
                best = Some((*tg, report.clone(), *amp));
            }
        }
    }
    let (grid_tg, grid_report, grid_amp) = best.ok_or(Error::NoUsableGateTime { best: 0.0 })?;
    if grid_report.phi_avg <= PROTOCOL_MIN_AVG {
        return Err(Error::NoUsableGateTime {
            best: grid_report.phi_avg,
        });
    }

    // bracket around the best grid point for the local refinement
    let idx = search.partition_point(|&t| t < grid_tg);
    let lo = if idx == 0 { grid_tg } else { search[idx - 1] };
    let hi = if idx + 1 >= search.len() { grid_tg } else { search[idx + 1] };
    let (mut best_tg, mut best_report, mut best_amp) = (grid_tg, grid_report, grid_amp);

    if hi > lo {
        let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let mut a = lo;
        let mut b = hi;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let consider = |tg: f64,
                        best: &mut (f64, FidelityReport, f64)|
         -> f64 {
            match evaluate_point(family, params, tg, dt, &target) {
                Ok((report, amp)) => {
                    let score = report.phi_avg;
                    if score > best.1.phi_avg {
                        *best = (tg, report, amp);
                    }
                    score
                }
                Err(_) => f64::NEG_INFINITY,
            }
        };
        let mut pack = (best_tg, best_report, best_amp);
        let mut fc = consider(c, &mut pack);
        let mut fd = consider(d, &mut pack);
        for _ in 0..40 {
            if (b - a).abs() < (dt * 0.5).max(1e-4) {
                break;
            }
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = consider(c, &mut pack);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = consider(d, &mut pack);
            }
        }
        (best_tg, best_report, best_amp) = pack;
    }

    let (alpha, gamma) = match (best_report.alpha, best_report.gamma) {
        (Some(a), Some(g)) => (a, g),
        _ => {
            return Err(Error::PhaseExtraction(
                "recommended gate is not X-like enough to carry phases".into(),
            ))
        }
    };
    Ok(ProtocolRecommendation {
        family: family.label(),
        gate_time: best_tg,
        amplitude: best_amp,
        alpha,
        gamma,
        report: best_report,
    })
}

/// Discrete-time Fourier transform of both quadratures on an arbitrary
/// frequency grid (rad/ns): X(nu) = sum_j omega_j exp(-i nu t_j) dt.
/// Direct evaluation, so the grid may contain the exact system detunings.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub amp_x: Vec<C64>,
    pub amp_y: Vec<C64>,
}

pub const SPECTRUM_CSV_HEADER: &str = "nu_rad_per_ns,re_x,im_x,re_y,im_y,abs_x,abs_y";

impl Spectrum {
    /// Combined magnitude of both quadratures at grid point `i`.
    pub fn magnitude(&self, i: usize) -> f64 {
        self.amp_x[i].norm().hypot(self.amp_y[i].norm())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(SPECTRUM_CSV_HEADER);
        out.push('\n');
        for i in 0..self.frequencies.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.frequencies[i],
                self.amp_x[i].re,
                self.amp_x[i].im,
                self.amp_y[i].re,
                self.amp_y[i].im,
                self.amp_x[i].norm(),
                self.amp_y[i].norm(),
            ));
        }
        out
    }
}

pub fn dtft(pulse: &PulseSequence, freq_grid: &[f64]) -> Result<Spectrum> {
    if freq_grid.is_empty() {
        return Err(Error::Config("frequency grid is empty".into()));
    }
    let dt = pulse.dt();
    let mut amp_x = Vec::with_capacity(freq_grid.len());
    let mut amp_y = Vec::with_capacity(freq_grid.len());
    for &nu in freq_grid {
        let mut ax = C64::new(0.0, 0.0);
        let mut ay = C64::new(0.0, 0.0);
        for j in 0..pulse.len() {
            let phase = C64::from_polar(1.0, -nu * pulse.time_at(j));
            ax += phase.scale(pulse.omega_x()[j]);
            ay += phase.scale(pulse.omega_y()[j]);
        }
        amp_x.push(ax.scale(dt));
        amp_y.push(ay.scale(dt));
    }
    Ok(Spectrum {
        frequencies: freq_grid.to_vec(),
        amp_x,
        amp_y,
    })
}

pub const TRAJECTORY_CSV_HEADER: &str =
    "t_ns,p_00,p_01,p_02,p_10,p_11,p_12,p_20,p_21,p_22";

/// CSV rendering of a population trajectory, one labeled column per basis
/// state |j1 j2>.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    for (t, row) in traj.times.iter().zip(&traj.populations) {
        out.push_str(&format!("{t:.16e}"));
        for b in 0..DIM {
            out.push_str(&format!(",{:.16e}", row[b]));
        }
        out.push('\n');
    }
    out
}

/// Populations over time under a pulse, as figure-ready CSV.
pub fn trace_populations(
    params: &SystemParams,
    pulse: &PulseSequence,
    initial: InitialState,
) -> Result<(Trajectory, String)> {
    let traj = propagate_trajectory(params, pulse, initial)?;
    let csv = trajectory_csv(&traj);
    Ok((traj, csv))
}

/// Simulate a single stored pulse and report all fidelity quantities, the
/// same evaluation a single-point sweep performs.
pub fn simulate_pulse(params: &SystemParams, pulse: &PulseSequence) -> Result<FidelityReport> {
    let u = propagate(params, pulse)?;
    Ok(fidelity_report(&u, &TargetGate::default()))
}

/// Extract alpha and gamma with the residual for one pulse; convenience
/// wrapper mirroring the CLI's phase workflow.
pub fn pulse_phases(params: &SystemParams, pulse: &PulseSequence) -> Result<(f64, f64, f64)> {
    let u = propagate(params, pulse)?;
    let p = extract_phases(&u)?;
    Ok((p.alpha, p.gamma, p.residual))
}
