//! `tpulse`: command-line driver for the transmon-pulse toolkit.
//!
//! Subcommands cover single-pulse simulation, gate-time sweeps, the
//! calibration protocol, GRAPE optimization, spectral analysis, population
//! traces and the spectral-constraint table. Every frequency-like input is
//! in ordinary MHz; internal storage is angular rad/ns.
//!
//! Exit codes: 0 on success, 2 when a protocol search finds no usable gate
//! time, 1 on any other error. Sweep workers honor `RAYON_NUM_THREADS`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use transmon_pulse::{
    dtft, fourier_constraints, optimize, protocol_run, simulate_pulse, sweep_gate_time,
    trace_populations, Error, Family, GrapeConfig, InitialState, Objective, PulseSequence,
    SystemParams, MHZ,
};

#[derive(Parser)]
#[command(
    name = "tpulse",
    version,
    about = "Pulse synthesis, simulation and optimization for two frequency-crowded transmons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON file with system parameters (delta_mhz, anharm_mhz, lambda);
    /// built-in defaults when omitted.
    #[arg(long, global = true)]
    params: Option<PathBuf>,

    /// Sample step in ns.
    #[arg(long, global = true, default_value_t = 0.01)]
    dt: f64,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct FamilyOpts {
    /// Pulse family: gaussian, drag, sideband or zero.
    #[arg(long)]
    family: String,

    /// Derivative-quadrature divisor for the drag family, as a frequency in
    /// MHz or one of: anharm, delta, diff (= delta - anharm).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one pulse (analytic family or stored CSV) and report all
    /// fidelity quantities as JSON.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        family: FamilyOptsOptional,
        /// Stored pulse CSV to simulate instead of an analytic family.
        #[arg(long, conflicts_with = "family")]
        pulse: Option<PathBuf>,
        /// Gate time in ns (analytic families).
        #[arg(long, required_unless_present = "pulse")]
        gate_time: Option<f64>,
        /// Also write the rendered pulse to this CSV file.
        #[arg(long)]
        pulse_out: Option<PathBuf>,
    },
    /// Sweep a pulse family over gate times and write the error curves as CSV.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        family: FamilyOpts,
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 0.5)]
        t_step: f64,
    },
    /// Run the calibration workflow: pick the gate time maximizing the
    /// average reduced fidelity, refine it locally, and report amplitude and
    /// phase offsets as JSON.
    Protocol {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        family: FamilyOpts,
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 0.5)]
        t_step: f64,
    },
    /// Optimize a pulse by gradient ascent and write the trace as JSON.
    Optimize {
        #[command(flatten)]
        common: CommonOpts,
        /// GRAPE configuration JSON; flags below are ignored if given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Gate time in ns (when no config file is given).
        #[arg(long, required_unless_present = "config")]
        gate_time: Option<f64>,
        /// Objective: full or average.
        #[arg(long, default_value = "full")]
        objective: String,
        #[arg(long, default_value_t = 1.0)]
        step_size: f64,
        #[arg(long, default_value_t = 5000)]
        max_iterations: usize,
        #[arg(long, default_value_t = 1e-12)]
        convergence_threshold: f64,
        #[arg(long, default_value_t = 0.0)]
        penalty_weight: f64,
        /// Stop early at this fidelity, e.g. 0.99999.
        #[arg(long)]
        target_fidelity: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Starting pulse CSV; the seeded default initial pulse when omitted.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Write the optimized pulse to this CSV file.
        #[arg(long)]
        pulse_out: Option<PathBuf>,
    },
    /// Discrete-time Fourier transform of a stored pulse on a uniform
    /// frequency grid, written as CSV.
    Dtft {
        #[command(flatten)]
        common: CommonOpts,
        /// Pulse CSV to transform.
        #[arg(long)]
        pulse: PathBuf,
        /// Grid start, ordinary frequency in MHz.
        #[arg(long, default_value_t = -800.0, allow_negative_numbers = true)]
        f_min_mhz: f64,
        /// Grid end, ordinary frequency in MHz.
        #[arg(long, default_value_t = 800.0, allow_negative_numbers = true)]
        f_max_mhz: f64,
        /// Number of grid points.
        #[arg(long, default_value_t = 3201)]
        points: usize,
    },
    /// Populations of all nine basis states over time, written as CSV.
    Trace {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        family: FamilyOptsOptional,
        #[arg(long, conflicts_with = "family")]
        pulse: Option<PathBuf>,
        #[arg(long, required_unless_present = "pulse")]
        gate_time: Option<f64>,
        /// Initial basis state as "j1,j2", e.g. "0,1".
        #[arg(long, default_value = "0,0")]
        initial: String,
    },
    /// Spectral-constraint residual table of one pulse, printed and
    /// optionally written as JSON.
    Constraints {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        family: FamilyOptsOptional,
        #[arg(long, conflicts_with = "family")]
        pulse: Option<PathBuf>,
        #[arg(long, required_unless_present = "pulse")]
        gate_time: Option<f64>,
    },
}

// clap needs a separate optional flavor for subcommands where a stored pulse
// can replace the family selection.
#[derive(Args, Clone)]
struct FamilyOptsOptional {
    /// Pulse family: gaussian, drag, sideband or zero.
    #[arg(long)]
    family: Option<String>,

    /// Derivative-quadrature divisor for the drag family, as a frequency in
    /// MHz or one of: anharm, delta, diff (= delta - anharm).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
}

fn parse_beta(raw: Option<&str>, params: &SystemParams) -> Result<f64, Error> {
    let raw = raw.ok_or_else(|| {
        Error::Config("the drag family needs --beta (MHz value or anharm/delta/diff)".into())
    })?;
    match raw {
        "anharm" => Ok(params.anharm()),
        "delta" => Ok(params.delta()),
        "diff" => Ok(params.delta() - params.anharm()),
        other => other
            .parse::<f64>()
            .map(|mhz| mhz * MHZ)
            .map_err(|_| Error::Config(format!("cannot parse --beta value: {other}"))),
    }
}

fn parse_family(name: &str, beta: Option<&str>, params: &SystemParams) -> Result<Family, Error> {
    match name {
        "gaussian" => Ok(Family::Gaussian),
        "drag" => Ok(Family::DragGaussian {
            beta: parse_beta(beta, params)?,
        }),
        "sideband" => Ok(Family::Sideband),
        "zero" => Ok(Family::Zero),
        other => Err(Error::Config(format!(
            "unknown family {other}; expected gaussian, drag, sideband or zero"
        ))),
    }
}

fn load_params(path: Option<&PathBuf>) -> Result<SystemParams, Error> {
    let params = match path {
        Some(p) => SystemParams::from_json_file(p)?,
        None => SystemParams::default(),
    };
    for w in params.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(params)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn grid(t_min: f64, t_max: f64, t_step: f64) -> Result<Vec<f64>, Error> {
    if !(t_step > 0.0) || t_max < t_min {
        return Err(Error::Config(format!(
            "bad gate-time range [{t_min}, {t_max}] with step {t_step}"
        )));
    }
    let n = ((t_max - t_min) / t_step).round() as usize;
    Ok((0..=n).map(|k| t_min + k as f64 * t_step).collect())
}

fn resolve_pulse(
    params: &SystemParams,
    family: &FamilyOptsOptional,
    stored: Option<&PathBuf>,
    gate_time: Option<f64>,
    dt: f64,
) -> Result<PulseSequence, Error> {
    match (stored, &family.family) {
        (Some(path), _) => PulseSequence::read_csv(path),
        (None, Some(name)) => {
            let fam = parse_family(name, family.beta.as_deref(), params)?;
            let tg = gate_time
                .ok_or_else(|| Error::Config("--gate-time is required with --family".into()))?;
            Ok(fam.build_pulse(params, tg, dt)?.0)
        }
        (None, None) => Err(Error::Config("give either --pulse or --family".into())),
    }
}

fn parse_initial(raw: &str) -> Result<InitialState, Error> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!(
            "initial state must be \"j1,j2\" with levels 0..=2, got {raw}"
        )));
    }
    let j1: usize = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad level in initial state: {raw}")))?;
    let j2: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad level in initial state: {raw}")))?;
    if j1 > 2 || j2 > 2 {
        return Err(Error::Config(format!("levels must be 0..=2, got {raw}")));
    }
    Ok(InitialState::Basis(3 * j1 + j2))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate {
            common,
            family,
            pulse,
            gate_time,
            pulse_out,
        } => {
            let params = load_params(common.params.as_ref())?;
            let p = resolve_pulse(&params, &family, pulse.as_ref(), gate_time, common.dt)?;
            if let Some(path) = pulse_out {
                p.write_csv(&path)?;
                eprintln!("wrote {}", path.display());
            }
            let report = simulate_pulse(&params, &p)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            emit(common.out.as_ref(), &text)
        }
        Command::Sweep {
            common,
            family,
            t_min,
            t_max,
            t_step,
        } => {
            let params = load_params(common.params.as_ref())?;
            let fam = parse_family(&family.family, family.beta.as_deref(), &params)?;
            let times = grid(t_min, t_max, t_step)?;
            let sweep = sweep_gate_time(fam, &params, &times, common.dt)?;
            emit(common.out.as_ref(), &sweep.to_csv_string())
        }
        Command::Protocol {
            common,
            family,
            t_min,
            t_max,
            t_step,
        } => {
            let params = load_params(common.params.as_ref())?;
            let fam = parse_family(&family.family, family.beta.as_deref(), &params)?;
            let times = grid(t_min, t_max, t_step)?;
            let rec = protocol_run(fam, &params, &times, common.dt)?;
            let mut text = serde_json::to_string_pretty(&rec)?;
            text.push('\n');
            emit(common.out.as_ref(), &text)
        }
        Command::Optimize {
            common,
            config,
            gate_time,
            objective,
            step_size,
            max_iterations,
            convergence_threshold,
            penalty_weight,
            target_fidelity,
            seed,
            init,
            pulse_out,
        } => {
            let params = load_params(common.params.as_ref())?;
            let cfg = match config {
                Some(path) => GrapeConfig::from_json_file(path)?,
                None => {
                    let mut cfg = GrapeConfig::new(gate_time.expect("required by clap"));
                    cfg.dt = common.dt;
                    cfg.target = match objective.as_str() {
                        "full" => Objective::Full,
                        "average" | "avg" => Objective::Average,
                        other => {
                            return Err(Error::Config(format!(
                                "unknown objective {other}; expected full or average"
                            )))
                        }
                    };
                    cfg.step_size = step_size;
                    cfg.max_iterations = max_iterations;
                    cfg.convergence_threshold = convergence_threshold;
                    cfg.penalty_weight = penalty_weight;
                    cfg.target_fidelity = target_fidelity;
                    cfg.seed = seed;
                    cfg
                }
            };
            let initial = match init {
                Some(path) => PulseSequence::read_csv(path)?,
                None => transmon_pulse::default_initial_pulse(&cfg)?,
            };
            let trace = optimize(&params, &initial, &cfg)?;
            if let Some(path) = pulse_out {
                trace.pulse.write_csv(&path)?;
                eprintln!("wrote {}", path.display());
            }
            let mut text = serde_json::to_string_pretty(&trace)?;
            text.push('\n');
            emit(common.out.as_ref(), &text)
        }
        Command::Dtft {
            common,
            pulse,
            f_min_mhz,
            f_max_mhz,
            points,
        } => {
            let p = PulseSequence::read_csv(&pulse)?;
            if points < 2 || f_max_mhz <= f_min_mhz {
                return Err(Error::Config(
                    "need at least 2 grid points and f_max > f_min".into(),
                ));
            }
            let step = (f_max_mhz - f_min_mhz) / (points - 1) as f64;
            let freqs: Vec<f64> = (0..points)
                .map(|k| (f_min_mhz + k as f64 * step) * MHZ)
                .collect();
            let spectrum = dtft(&p, &freqs)?;
            emit(common.out.as_ref(), &spectrum.to_csv_string())
        }
        Command::Trace {
            common,
            family,
            pulse,
            gate_time,
            initial,
        } => {
            let params = load_params(common.params.as_ref())?;
            let p = resolve_pulse(&params, &family, pulse.as_ref(), gate_time, common.dt)?;
            let state = parse_initial(&initial)?;
            let (_, csv) = trace_populations(&params, &p, state)?;
            emit(common.out.as_ref(), &csv)
        }
        Command::Constraints {
            common,
            family,
            pulse,
            gate_time,
        } => {
            let params = load_params(common.params.as_ref())?;
            let p = resolve_pulse(&params, &family, pulse.as_ref(), gate_time, common.dt)?;
            let residuals = fourier_constraints(&p, &params);
            let mut table = String::new();
            table.push_str(&format!(
                "{:<24} {:>14}\n",
                "constraint", "residual"
            ));
            table.push_str(&format!(
                "{:<24} {:>14.6e}\n",
                "area vs target", residuals.area_error
            ));
            table.push_str(&format!(
                "{:<24} {:>14.6e}\n",
                "weight at anharm", residuals.r_anharm
            ));
            table.push_str(&format!(
                "{:<24} {:>14.6e}\n",
                "weight at delta", residuals.r_delta
            ));
            table.push_str(&format!(
                "{:<24} {:>14.6e}\n",
                "weight at delta-anharm", residuals.r_delta_minus_anharm
            ));
            match common.out.as_ref() {
                Some(path) => {
                    let mut text = serde_json::to_string_pretty(&residuals)?;
                    text.push('\n');
                    std::fs::write(path, text)?;
                    eprintln!("wrote {}", path.display());
                    print!("{table}");
                }
                None => print!("{table}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::NoUsableGateTime { best }) => {
            eprintln!("error: no usable gate time in the search range (best average fidelity {best:.6})");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
