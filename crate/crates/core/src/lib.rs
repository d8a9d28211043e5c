//! Control-pulse synthesis, simulation and optimization for single-qubit
//! gates on two frequency-crowded three-level transmons sharing one drive
//! field.
//!
//! The model is a pair of anharmonic three-level ladders in the frame
//! rotating with the drive: qubit 1's 0<->1 transition is resonant while
//! qubit 2's leakage transition sits only a small detuning delta away, so a
//! plain pulse on qubit 1 pumps qubit 2's |1> -> |2> transition. The crate
//! provides
//!
//! * the rotating- and interaction-frame Hamiltonians ([`operators`]),
//! * exact piecewise-constant propagation with a refinement oracle
//!   ([`propagate`]),
//! * the gate-fidelity functionals, reduced/average variants and the phase
//!   machinery of X-like gates ([`fidelity`]),
//! * the analytic Gaussian, derivative-quadrature and sideband-modulated
//!   pulse families with area normalization ([`analytic`]),
//! * average-Hamiltonian diagnostics: spectral constraint residuals and the
//!   leading effective-Hamiltonian terms ([`magnus`]),
//! * gradient-ascent pulse optimization with exact gradients ([`grape`]),
//! * sweeps, the calibration protocol, DTFT spectra and population traces
//!   ([`analysis`]).
//!
//! All angular frequencies are rad/ns and times are ns throughout.

pub mod analysis;
pub mod analytic;
pub mod error;
pub mod fidelity;
pub mod grape;
pub mod linalg;
pub mod magnus;
pub mod operators;
pub mod params;
pub mod propagate;
pub mod pulse;

pub use analysis::{
    dtft, protocol_run, simulate_pulse, sweep_gate_time, trace_populations, Family,
    ProtocolRecommendation, Spectrum, SweepResult, SweepRow,
};
pub use analytic::{
    drag_residual_coefficients, AnalyticPulseSpec, DragCoefficients, PulseFamily, AREA_TARGET,
};
pub use error::{Error, Result};
pub use fidelity::{
    apply_frame_correction, avg_fidelity, extract_phases, fidelity_report, gate_fidelity,
    leakage, reduced_fidelity, FidelityReport, PhaseDecomposition, TargetGate,
};
pub use grape::{
    boundary_penalty, default_initial_pulse, fidelity_gradient, optimize, GrapeConfig, Objective,
    OptimizationTrace,
};
pub use linalg::{Matrix9, Vector9, DIM, LEVELS};
pub use magnus::{
    control_transform, fourier_constraints, magnus_theta0, magnus_theta1_diag01,
    ConstraintResiduals,
};
pub use operators::{
    build_control_generators, build_drift, build_interaction_hamiltonian, HamiltonianSample,
};
pub use params::{DetuningTable, SystemParams, MHZ};
pub use propagate::{
    oracle_propagate, propagate, propagate_interaction, propagate_trajectory, InitialState,
    Trajectory, UnitaryMatrix,
};
pub use pulse::PulseSequence;
