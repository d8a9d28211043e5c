//! End-to-end acceptance checks pinning the toolkit's headline results on
//! the reference two-transmon system. Each test prints one PASS line with
//! its measured numbers (visible under `--nocapture`); tolerances are fixed
//! here, not tuned elsewhere.

use std::f64::consts::PI;
use std::time::Instant;

use transmon_pulse::linalg::{basis_index, max_abs};
use transmon_pulse::{
    apply_frame_correction, default_initial_pulse, dtft, extract_phases, fidelity_gradient,
    fidelity_report, magnus_theta1_diag01, optimize, oracle_propagate, propagate,
    propagate_interaction, propagate_trajectory, sweep_gate_time, AnalyticPulseSpec, Family,
    GrapeConfig, InitialState, Objective, PulseSequence, SystemParams, TargetGate, MHZ,
};

const TAU: f64 = 2.0 * PI;

fn reference_params() -> SystemParams {
    SystemParams::default()
}

fn sideband_pulse(params: &SystemParams, t_g: f64, dt: f64) -> PulseSequence {
    AnalyticPulseSpec::sideband(params, t_g)
        .normalize_area(dt)
        .unwrap()
        .render(dt)
        .unwrap()
}

/// Criterion 1: the sideband family over gate times 12..25 ns reaches its
/// average-fidelity optimum near 17 ns with error below 1e-3, within 30 s.
#[test]
fn acceptance_01_sideband_gate_time_optimum() {
    let started = Instant::now();
    let params = reference_params();
    let times: Vec<f64> = (0..=52).map(|k| 12.0 + 0.25 * k as f64).collect();
    let sweep = sweep_gate_time(Family::Sideband, &params, &times, 0.01).unwrap();
    let best = sweep.best_avg().expect("sweep has clean rows");
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE 1: min 1-phi_avg = {:.3e} at t_g = {:.2} ns ({elapsed:.1} s)",
        best.err_phi_avg, best.gate_time
    );
    assert!(best.err_phi_avg < 1e-3, "optimum error {:.3e}", best.err_phi_avg);
    assert!(
        (best.gate_time - 17.0).abs() <= 2.0,
        "optimum at {:.2} ns, expected 17 +- 2",
        best.gate_time
    );
    assert!(elapsed < 30.0, "sweep took {elapsed:.1} s");
}

/// Criterion 2: Gaussian and derivative-quadrature sweeps over 30..60 ns
/// both dip near 42 ns, with the two-quadrature dip at or below the plain
/// Gaussian's.
#[test]
fn acceptance_02_gaussian_drag_baseline_dip() {
    let params = reference_params();
    let times: Vec<f64> = (0..=60).map(|k| 30.0 + 0.5 * k as f64).collect();
    let deepest_interior_dip = |family: Family| {
        let sweep = sweep_gate_time(family, &params, &times, 0.01).unwrap();
        let rows = &sweep.rows;
        let mut dip: Option<(f64, f64)> = None;
        for i in 1..rows.len() - 1 {
            let here = rows[i].err_phi_avg;
            let is_dip = here < rows[i - 1].err_phi_avg && here < rows[i + 1].err_phi_avg;
            if is_dip && dip.is_none_or(|(_, v)| here < v) {
                dip = Some((rows[i].gate_time, here));
            }
        }
        dip.expect("curve has an interior local minimum")
    };
    let (t_gauss, e_gauss) = deepest_interior_dip(Family::Gaussian);
    let (t_drag, e_drag) = deepest_interior_dip(Family::DragGaussian {
        beta: params.anharm(),
    });
    println!(
        "ACCEPTANCE 2: gaussian dip {:.3e} at {:.1} ns; drag dip {:.3e} at {:.1} ns",
        e_gauss, t_gauss, e_drag, t_drag
    );
    assert!((t_gauss - 42.0).abs() <= 4.0, "gaussian dip at {t_gauss:.1} ns");
    assert!((t_drag - 42.0).abs() <= 4.0, "drag dip at {t_drag:.1} ns");
    assert!(
        e_drag <= e_gauss,
        "drag dip {e_drag:.3e} should not exceed gaussian dip {e_gauss:.3e}"
    );
}

/// Criterion 3: gradient ascent at 4 ns with 0.01 ns steps reaches full
/// fidelity 0.99999 from the default start, within five minutes.
#[test]
fn acceptance_03_fast_gate_optimization() {
    let started = Instant::now();
    let params = reference_params();
    let mut config = GrapeConfig::new(4.0);
    config.dt = 0.01;
    config.target = Objective::Full;
    config.target_fidelity = Some(0.99999);
    config.max_iterations = 20000;
    config.convergence_threshold = 0.0;
    config.seed = 0;
    let initial = default_initial_pulse(&config).unwrap();
    let trace = optimize(&params, &initial, &config).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE 3: phi = {:.7} after {} iterations ({elapsed:.1} s)",
        trace.report.phi,
        trace.iterations.len()
    );
    assert!(
        trace.report.phi >= 0.99999,
        "reached only {:.7}",
        trace.report.phi
    );
    assert!(elapsed < 300.0, "optimization took {elapsed:.1} s");
}

/// Criterion 4: with 1 ns steps, some gate time at or below 8 ns reaches
/// 0.999 while 4 ns does not.
#[test]
fn acceptance_04_coarse_step_gate_times() {
    let params = reference_params();
    let best_phi = |gate_time: f64, seeds: std::ops::Range<u64>| {
        let mut best: f64 = 0.0;
        for seed in seeds {
            let mut config = GrapeConfig::new(gate_time);
            config.dt = 1.0;
            config.target = Objective::Full;
            config.target_fidelity = Some(0.9995);
            config.max_iterations = 8000;
            config.convergence_threshold = 0.0;
            config.seed = seed;
            let initial = default_initial_pulse(&config).unwrap();
            let trace = optimize(&params, &initial, &config).unwrap();
            best = best.max(trace.report.phi);
            if best >= 0.9995 {
                break;
            }
        }
        best
    };
    let mut reachable = None;
    for tg in [8.0, 7.0, 6.0, 5.0] {
        let phi = best_phi(tg, 0..3);
        if phi >= 0.999 {
            reachable = Some((tg, phi));
            break;
        }
    }
    let phi_4 = best_phi(4.0, 0..5);
    let (tg_ok, phi_ok) = reachable.expect("no coarse-step gate time at or below 8 ns reaches 0.999");
    println!(
        "ACCEPTANCE 4: dt = 1 ns reaches phi = {:.6} at t_g = {tg_ok} ns; t_g = 4 ns best phi = {:.6}",
        phi_ok, phi_4
    );
    assert!(phi_ok >= 0.999);
    assert!(
        phi_4 < 0.999,
        "4 ns at 1 ns steps unexpectedly reached {phi_4:.6}"
    );
}

/// Criterion 5: the 17 ns sideband pulse closes qubit 2's transition cycle
/// (leakage-level population below 1e-3 at the gate end) while 20 ns leaves
/// more than five times as much behind.
#[test]
fn acceptance_05_population_cycling() {
    let params = reference_params();
    let leak_at = |t_g: f64| {
        let pulse = sideband_pulse(&params, t_g, 0.01);
        let traj =
            propagate_trajectory(&params, &pulse, InitialState::Basis(basis_index(0, 1))).unwrap();
        let last = traj.last();
        (0..3).map(|j1| last[basis_index(j1, 2)]).sum::<f64>()
    };
    let leak17 = leak_at(17.0);
    let leak20 = leak_at(20.0);
    println!(
        "ACCEPTANCE 5: qubit-2 leakage population {:.3e} at 17 ns, {:.3e} at 20 ns (ratio {:.0})",
        leak17,
        leak20,
        leak20 / leak17
    );
    assert!(leak17 < 1e-3, "17 ns leakage {leak17:.3e}");
    assert!(
        leak20 / leak17 > 5.0,
        "20 ns leakage {leak20:.3e} not clearly above 17 ns ({leak17:.3e})"
    );
}

/// Criterion 6: phase machinery of the 17 ns sideband gate. The gate is of
/// the flip-with-qubit-2-phase product form to within 1e-2 in max-norm, and
/// undoing the extracted phase restores the full fidelity to the average
/// reduced fidelity (>= 0.999, agreement within 1e-4).
#[test]
fn acceptance_06_phase_machinery() {
    let params = reference_params();
    let u = propagate(&params, &sideband_pulse(&params, 17.0, 0.01)).unwrap();
    let phases = extract_phases(&u).unwrap();
    let raw = fidelity_report(&u, &TargetGate::x());
    let corrected = apply_frame_correction(&u, phases.alpha).unwrap();
    let corrected_report = fidelity_report(&corrected, &TargetGate::x());
    let agreement = (corrected_report.phi - raw.phi_avg).abs();
    println!(
        "ACCEPTANCE 6: residual = {:.3e}; corrected phi = {:.6} vs raw phi_avg = {:.6} (|diff| = {:.1e})",
        phases.residual, corrected_report.phi, raw.phi_avg, agreement
    );
    assert!(
        corrected_report.phi >= 0.999,
        "corrected phi {:.6}",
        corrected_report.phi
    );
    assert!(agreement < 1e-4, "corrected phi vs raw phi_avg differ by {agreement:.2e}");
    assert!(
        phases.residual < 1e-2,
        "product-form residual {:.3e} exceeds 1e-2; the residual gauges every \
         computational-block element, and the surviving spectral weight at \
         delta - anharm drives |<00|U|11>| to ~1.6e-2 for this pulse family, \
         so this bound cannot be met while the corrected fidelity stays at 0.999",
        phases.residual
    );
}

/// Criterion 7: the always-on property bundle: propagator unitarity,
/// gradient-vs-finite-difference agreement on 20 random pulses, the
/// first-order diagnostic against a tenfold-refined double integral, the
/// propagator against the refinement-10 oracle, and exact average fidelity
/// of constructed product-form gates.
#[test]
fn acceptance_07_property_suites() {
    let params = reference_params();

    // unitarity across propagator entry points
    let mut s = 2024u64;
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (((s >> 33) as f64) / (u32::MAX as f64) - 0.5) * 1.2
    };
    let mut worst_unitarity: f64 = 0.0;
    for _ in 0..6 {
        let n = 60;
        let x: Vec<f64> = (0..n).map(|_| next()).collect();
        let y: Vec<f64> = (0..n).map(|_| next()).collect();
        let pulse = PulseSequence::new(0.05, x, y).unwrap();
        worst_unitarity = worst_unitarity
            .max(propagate(&params, &pulse).unwrap().unitarity_deviation())
            .max(propagate_interaction(&params, &pulse).unwrap().unitarity_deviation())
            .max(oracle_propagate(&params, &pulse, 3).unwrap().unitarity_deviation());
    }
    assert!(worst_unitarity < 1e-10, "unitarity deviation {worst_unitarity:.3e}");

    // exact gradient vs central finite differences on 20 random pulses
    let mut worst_grad: f64 = 0.0;
    for seed in 0..20u64 {
        let n = 30;
        let dt = 0.1;
        let mut config = GrapeConfig::new(n as f64 * dt);
        config.dt = dt;
        config.target = if seed % 2 == 0 { Objective::Full } else { Objective::Average };
        let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut rng = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (((s >> 33) as f64) / (u32::MAX as f64) - 0.5) * 0.8
        };
        let x: Vec<f64> = (0..n).map(|_| rng()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng()).collect();
        let dx: Vec<f64> = (0..n).map(|_| rng()).collect();
        let dy: Vec<f64> = (0..n).map(|_| rng()).collect();
        let pulse = PulseSequence::new(dt, x.clone(), y.clone()).unwrap();
        let (gx, gy) = fidelity_gradient(&params, &pulse, &config).unwrap();
        let analytic: f64 = gx.iter().zip(&dx).map(|(g, d)| g * d).sum::<f64>()
            + gy.iter().zip(&dy).map(|(g, d)| g * d).sum::<f64>();
        let h = 1e-6;
        let eval = |sign: f64| {
            let xs: Vec<f64> = x.iter().zip(&dx).map(|(v, d)| v + sign * h * d).collect();
            let ys: Vec<f64> = y.iter().zip(&dy).map(|(v, d)| v + sign * h * d).collect();
            let p = PulseSequence::new(dt, xs, ys).unwrap();
            let u = propagate(&params, &p).unwrap();
            let r = fidelity_report(&u, &TargetGate::x());
            match config.target {
                Objective::Full => r.phi,
                Objective::Average => r.phi_avg,
            }
        };
        let fd = (eval(1.0) - eval(-1.0)) / (2.0 * h);
        worst_grad = worst_grad.max((analytic - fd).abs() / fd.abs().max(1e-12));
    }
    assert!(worst_grad < 1e-5, "gradient relative error {worst_grad:.3e}");

    // first-order diagnostic against the tenfold-refined double integral
    let dt = 0.01;
    let pulse = sideband_pulse(&params, 17.0, dt);
    let coarse = magnus_theta1_diag01(&pulse, &params);
    let spec = AnalyticPulseSpec::sideband(&params, 17.0).normalize_area(dt).unwrap();
    let fine = spec.render(dt / 10.0).unwrap();
    let oracle = magnus_theta1_diag01(&fine, &params);
    assert!(
        (coarse - oracle).abs() < 1e-6,
        "theta1 diag {coarse:.8e} vs fine-grid {oracle:.8e}"
    );

    // propagator against the refinement-10 oracle on smooth pulses
    let mut worst_oracle: f64 = 0.0;
    for pulse in [
        sideband_pulse(&params, 17.0, 0.01),
        AnalyticPulseSpec::gaussian(42.0)
            .normalize_area(0.01)
            .unwrap()
            .render(0.01)
            .unwrap(),
    ] {
        let u = propagate(&params, &pulse).unwrap();
        let o = oracle_propagate(&params, &pulse, 10).unwrap();
        worst_oracle = worst_oracle.max(max_abs(&(u.matrix() - o.matrix())));
    }
    assert!(worst_oracle < 1e-6, "oracle deviation {worst_oracle:.3e}");

    // product-form gates score exactly unit average fidelity
    let mut s2 = 99u64;
    let mut angle = move || {
        s2 = s2.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (((s2 >> 33) as f64) / (u32::MAX as f64) - 0.5) * TAU
    };
    let mut worst_form: f64 = 0.0;
    for _ in 0..30 {
        let u = transmon_pulse::fidelity::product_form_unitary(angle(), angle());
        let report = fidelity_report(&u, &TargetGate::x());
        worst_form = worst_form.max((report.phi_avg - 1.0).abs());
    }
    assert!(worst_form < 1e-12, "product-form phi_avg deviation {worst_form:.3e}");

    println!(
        "ACCEPTANCE 7: unitarity {worst_unitarity:.1e}; gradient rel err {worst_grad:.1e}; \
         theta1 diff {:.1e}; oracle dev {worst_oracle:.1e}; form phi_avg dev {worst_form:.1e}",
        (coarse - oracle).abs()
    );
}

/// Criterion 8: the spectrum of a converged long optimized pulse carries
/// local maxima at all four system detunings, each above the median
/// spectral magnitude over [0, 2pi * 0.8 GHz].
#[test]
fn acceptance_08_long_pulse_spectral_signature() {
    let params = reference_params();
    let mut config = GrapeConfig::new(130.0);
    config.dt = 0.01;
    config.target = Objective::Full;
    config.target_fidelity = Some(0.99999);
    config.max_iterations = 600;
    config.convergence_threshold = 0.0;
    config.seed = 0;
    let initial = default_initial_pulse(&config).unwrap();
    let trace = optimize(&params, &initial, &config).unwrap();
    assert!(
        trace.report.phi >= 0.9999,
        "long optimization reached only {:.6}",
        trace.report.phi
    );

    let grid: Vec<f64> = (0..3201).map(|k| k as f64 / 3200.0 * TAU * 0.8).collect();
    let spectrum = dtft(&trace.pulse, &grid).unwrap();
    let mags: Vec<f64> = (0..grid.len()).map(|i| spectrum.magnitude(i)).collect();
    let median = {
        let mut sorted = mags.clone();
        sorted.sort_by(f64::total_cmp);
        sorted[sorted.len() / 2]
    };

    let marks = [
        ("delta", params.delta()),
        ("delta-anharm", params.delta() - params.anharm()),
        ("|anharm|", params.anharm().abs()),
        ("2delta-anharm", 2.0 * params.delta() - params.anharm()),
    ];
    let window = TAU * 0.010;
    let mut summary = String::new();
    for (name, nu) in marks {
        let sel: Vec<usize> = (0..grid.len())
            .filter(|&i| (grid[i] - nu).abs() < window)
            .collect();
        let (peak_at, peak) = sel
            .iter()
            .map(|&i| (i, mags[i]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("window contains grid points");
        let interior = peak_at != sel[0] && peak_at != *sel.last().unwrap();
        summary.push_str(&format!(" {name}: {:.2e}", peak));
        assert!(
            peak > median,
            "{name} peak {peak:.3e} not above median {median:.3e}"
        );
        assert!(
            interior,
            "{name}: maximum sits at the window edge, not a local peak"
        );
    }
    println!(
        "ACCEPTANCE 8: phi = {:.6}, median |S| = {median:.2e}, peaks:{summary} (nu/2pi MHz: {:.0}, {:.0}, {:.0}, {:.0})",
        trace.report.phi,
        params.delta() / MHZ,
        (params.delta() - params.anharm()) / MHZ,
        params.anharm().abs() / MHZ,
        (2.0 * params.delta() - params.anharm()) / MHZ,
    );
}
