//! Oscillator dynamics against closed-form and spectral oracles.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use std::sync::LazyLock;

use sedres_core::NaturalUnits;
use sedres_core::error::CoreError;
use sedres_core::oscillator::{
    EnsembleStats, Observable, OscillatorParams, TimeGrid, Trajectory, diffusion_estimators,
    ensemble_statistics, integrate_time_domain, integrate_time_domain_from, mean_evolution_check,
    power_balance, simulate_ensemble_spectral, simulate_ensemble_time_domain,
    spectral_ode_residual, steady_state_spectral,
};
use sedres_core::zpf::{FieldBand, FieldRealization, RealizationSeed, sample_realization};

fn units() -> NaturalUnits {
    NaturalUnits::default()
}

fn single_mode(omega: f64, amplitude: f64, phase: f64) -> FieldRealization {
    FieldRealization {
        seed: RealizationSeed::single(0),
        frequencies: vec![omega],
        amplitudes: vec![amplitude],
        phases: vec![phase],
    }
}

/// 1000-member stationary ensemble on the spectral path; shared fixture for
/// the statistics, fluctuation-dissipation and estimator tests.
static GROUND_ENSEMBLE: LazyLock<Vec<Trajectory>> = LazyLock::new(|| {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let band = FieldBand::new(0.9, 1.1, 512).unwrap();
    let grid = TimeGrid::new(0.0, 2.0, 3000).unwrap();
    simulate_ensemble_spectral(&params, &band, &units(), 1000, 2026_0001, &grid).unwrap()
});

static GROUND_STATS: LazyLock<EnsembleStats> =
    LazyLock::new(|| ensemble_statistics(&GROUND_ENSEMBLE).unwrap());

#[test]
fn undriven_damped_oscillator_decays_at_the_reduced_rate() {
    let params = OscillatorParams {
        m: 1.0,
        e: 0.0,
        omega0: 1.0,
        tau: 1e-2,
    };
    let gamma = params.gamma();
    let field = single_mode(1.0, 0.0, 0.0);
    // ten decay times
    let t_end = 10.0 / gamma;
    let traj = integrate_time_domain_from(&params, &field, 0.01, t_end, 0.0, 1.0, 0.0).unwrap();
    // least-squares slope of ln H(t)
    let log_e: Vec<f64> = (0..traj.len()).map(|k| traj.energy(k).ln()).collect();
    let n = log_e.len() as f64;
    let t_mean = 0.5 * (n - 1.0) * traj.dt;
    let y_mean = log_e.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, &y) in log_e.iter().enumerate() {
        let tc = k as f64 * traj.dt - t_mean;
        num += tc * (y - y_mean);
        den += tc * tc;
    }
    let rate = -num / den;
    assert_relative_eq!(rate, gamma, max_relative = 0.02);
}

#[test]
fn undamped_undriven_energy_is_conserved_over_1e4_periods() {
    let params = OscillatorParams {
        m: 1.0,
        e: 0.0,
        omega0: 1.0,
        tau: 0.0,
    };
    let field = single_mode(1.0, 0.0, 0.0);
    let t_end = 1.0e4 * std::f64::consts::TAU;
    let traj = integrate_time_domain_from(&params, &field, 0.01, t_end, 0.0, 1.0, 0.0).unwrap();
    let e0 = 0.5;
    let e_end = traj.energy(traj.len() - 1);
    assert!(
        ((e_end - e0) / e0).abs() < 1e-6,
        "relative energy drift {:.3e}",
        (e_end - e0) / e0
    );
}

#[test]
fn parameter_domain_is_enforced_with_a_warning_band() {
    // τω₀ above 1e-2 earns a warning; above 0.1 it is out of domain
    let fine = OscillatorParams::natural(1.0, 1e-3, &units());
    assert!(fine.validate().is_ok());
    assert!(fine.warnings().is_empty());

    let marginal = OscillatorParams::natural(1.0, 2e-2, &units());
    assert!(marginal.validate().is_ok());
    assert!(!marginal.warnings().is_empty());

    let out_of_domain = OscillatorParams::natural(1.0, 0.2, &units());
    assert!(matches!(out_of_domain.validate(), Err(CoreError::InvalidParams(_))));
    assert!(OscillatorParams { m: -1.0, ..fine }.validate().is_err());
    assert!(OscillatorParams { tau: -1e-3, ..fine }.validate().is_err());
}

#[test]
fn overly_coarse_time_step_is_rejected_by_name() {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let field = single_mode(1.0, 0.1, 0.0);
    let err = integrate_time_domain(&params, &field, 0.5, 100.0, 0.0).unwrap_err();
    match err {
        CoreError::TimeStepTooLarge { dt, .. } => assert_eq!(dt, 0.5),
        other => panic!("unexpected error: {other}"),
    }
}

#[test]
fn resonant_mode_response_has_known_amplitude_and_quadrature_phase() {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let amp = 0.01;
    let phase = 0.3;
    let field = single_mode(1.0, amp, phase);
    let grid = TimeGrid::new(0.0, 0.01, 2000).unwrap();
    let traj = steady_state_spectral(&params, &field, &grid).unwrap();
    // at resonance the response is (e/m) A/(τω₀³), lagging the drive by π/2
    let expected = params.e / params.m * amp / (params.tau * params.omega0.powi(3));
    for (k, t) in grid.times().enumerate() {
        let reference = expected * (params.omega0 * t + phase).sin();
        assert_abs_diff_eq!(traj.x[k], reference, epsilon = 1e-9 * expected);
    }
}

#[test]
fn quasi_static_mode_recovers_the_static_response() {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let amp = 0.02;
    let field = single_mode(0.05, amp, 1.1);
    let grid = TimeGrid::new(0.0, 0.5, 1000).unwrap();
    let traj = steady_state_spectral(&params, &field, &grid).unwrap();
    let static_amp = params.e / (params.m * params.omega0 * params.omega0) * amp;
    for (k, t) in grid.times().enumerate() {
        let drive_phase = (0.05 * t + 1.1).cos();
        // amplitude within 1%, phase lag indistinguishable from zero
        assert_abs_diff_eq!(
            traj.x[k],
            static_amp * drive_phase,
            epsilon = 0.011 * static_amp
        );
    }
}

#[test]
fn spectral_solution_satisfies_the_reduced_equation_identically() {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let band = FieldBand::new(0.8, 1.2, 256).unwrap();
    let field = sample_realization(&band, &units(), RealizationSeed::single(9)).unwrap();
    let times: Vec<f64> = (0..64).map(|k| 13.7 * k as f64).collect();
    let residual = spectral_ode_residual(&params, &field, &times);
    assert!(residual < 1e-8, "relative residual {residual:.3e}");
}

#[test]
fn time_domain_integrator_matches_the_spectral_oracle() {
    // post-transient RMS difference below 1% of the signal RMS
    for (tau, t_end, transient) in [(1e-3, 14_000.0, 10_000.0), (1e-2, 1_400.0, 1_000.0)] {
        let params = OscillatorParams::natural(1.0, tau, &units());
        let band = FieldBand::new(0.8, 1.2, 1024).unwrap();
        let field = sample_realization(&band, &units(), RealizationSeed::single(31)).unwrap();
        let dt = 0.1;
        let td = integrate_time_domain(&params, &field, dt, t_end, transient).unwrap();
        let grid = TimeGrid::new(td.t0, td.dt, td.len()).unwrap();
        let sp = steady_state_spectral(&params, &field, &grid).unwrap();
        let mut diff2 = 0.0;
        let mut ref2 = 0.0;
        for k in 0..td.len() {
            diff2 += (td.x[k] - sp.x[k]).powi(2);
            ref2 += sp.x[k] * sp.x[k];
        }
        let rms = (diff2 / ref2).sqrt();
        assert!(
            rms < 0.01,
            "tau {tau}: post-transient RMS mismatch {rms:.4}"
        );
    }
}

#[test]
fn stationary_variance_matches_the_ground_state() {
    let stats = &*GROUND_STATS;
    // var x = ħ/2mω₀ = 0.5 in natural units
    assert_relative_eq!(stats.var_x, 0.5, max_relative = 0.02);
    assert!(stats.mean_x.abs() < 3.0 * stats.se_mean_x.max(1e-4));
    assert!(stats.mean_p.abs() < 3.0 * stats.se_mean_p.max(1e-4));
}

#[test]
fn uncertainty_product_is_half_hbar() {
    let stats = &*GROUND_STATS;
    assert_relative_eq!(stats.uncertainty_product, 0.5, max_relative = 0.05);
}

#[test]
fn kinetic_and_potential_energy_equipartition() {
    let stats = &*GROUND_STATS;
    let params = GROUND_ENSEMBLE[0].params;
    let ratio = stats.var_p / (params.m * params.m * params.omega0 * params.omega0 * stats.var_x);
    assert_relative_eq!(ratio, 1.0, max_relative = 0.03);
}

#[test]
fn phase_average_and_time_average_variances_agree() {
    let members = &*GROUND_ENSEMBLE;
    // phase average across members at a few fixed sample indices
    let picks = [100usize, 1100, 2100];
    let mut vars = Vec::new();
    for &k in &picks {
        let xs: Vec<f64> = members.iter().map(|t| t.x[k]).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        vars.push(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0));
    }
    let phase_var = vars.iter().sum::<f64>() / vars.len() as f64;
    // summed standard errors: phase estimate has se ≈ var·sqrt(2/(n·k))
    let se_phase = phase_var * (2.0 / (members.len() as f64 * picks.len() as f64)).sqrt();
    let stats = &*GROUND_STATS;
    let combined = (se_phase * se_phase + stats.se_var_x * stats.se_var_x).sqrt();
    assert!(
        (phase_var - stats.var_x).abs() < 3.0 * combined,
        "phase {phase_var:.4} vs time {:.4} (combined se {combined:.4})",
        stats.var_x
    );
}

#[test]
fn field_rescaling_rescales_the_response_linearly() {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let band = FieldBand::new(0.8, 1.2, 128).unwrap();
    let field = sample_realization(&band, &units(), RealizationSeed::single(77)).unwrap();
    let lambda = 2.5;
    let scaled = field.scaled(lambda);

    let grid = TimeGrid::new(0.0, 0.5, 512).unwrap();
    let base = steady_state_spectral(&params, &field, &grid).unwrap();
    let resp = steady_state_spectral(&params, &scaled, &grid).unwrap();
    for k in 0..base.len() {
        assert_relative_eq!(resp.x[k], lambda * base.x[k], max_relative = 1e-12);
        assert_relative_eq!(resp.p[k], lambda * base.p[k], max_relative = 1e-12);
    }

    let td_base = integrate_time_domain(&params, &field, 0.2, 400.0, 0.0).unwrap();
    let td_scaled = integrate_time_domain(&params, &scaled, 0.2, 400.0, 0.0).unwrap();
    for k in (0..td_base.len()).step_by(37) {
        assert_abs_diff_eq!(
            td_scaled.x[k],
            lambda * td_base.x[k],
            epsilon = 1e-9 * td_base.x.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
        );
    }
}

#[test]
fn equilibrium_statistics_forget_initial_conditions() {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let band = FieldBand::new(0.8, 1.2, 512).unwrap();
    let (dt, t_end, transient) = (0.25, 11_000.0, 8_000.0);
    let run = |x0: f64, p0: f64, seed: u64| -> EnsembleStats {
        let members: Vec<Trajectory> = (0..40)
            .map(|i| {
                let field =
                    sample_realization(&band, &units(), RealizationSeed::new(seed, i)).unwrap();
                integrate_time_domain_from(&params, &field, dt, t_end, transient, x0, p0).unwrap()
            })
            .collect();
        ensemble_statistics(&members).unwrap()
    };
    let from_rest = run(0.0, 0.0, 5150);
    let from_far = run(3.0, -2.0, 5150);
    let combined = (from_rest.se_mean_energy.powi(2) + from_far.se_mean_energy.powi(2)).sqrt();
    assert!(
        (from_rest.mean_energy - from_far.mean_energy).abs() < 3.0 * combined,
        "{} vs {} (se {combined})",
        from_rest.mean_energy,
        from_far.mean_energy
    );
}

#[test]
fn ensemble_statistics_of_zero_trajectories_vanish() {
    let params = OscillatorParams {
        m: 1.0,
        e: 0.0,
        omega0: 1.0,
        tau: 1e-3,
    };
    let field = single_mode(1.0, 0.0, 0.0);
    let members: Vec<Trajectory> = (0..4)
        .map(|_| integrate_time_domain(&params, &field, 0.1, 50.0, 0.0).unwrap())
        .collect();
    let stats = ensemble_statistics(&members).unwrap();
    assert_eq!(stats.mean_x, 0.0);
    assert_eq!(stats.var_p, 0.0);
    assert_eq!(stats.mean_energy, 0.0);
    assert_eq!(stats.uncertainty_product, 0.0);
}

#[test]
fn ensemble_statistics_rejects_empty_and_mismatched_input() {
    assert!(matches!(
        ensemble_statistics(&[]),
        Err(CoreError::EmptyEnsemble)
    ));
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let field = single_mode(1.0, 0.01, 0.0);
    let a = steady_state_spectral(&params, &field, &TimeGrid::new(0.0, 0.5, 64).unwrap()).unwrap();
    let b = steady_state_spectral(&params, &field, &TimeGrid::new(0.0, 0.4, 64).unwrap()).unwrap();
    assert!(matches!(
        ensemble_statistics(&[a, b]),
        Err(CoreError::MismatchedTrajectories(_))
    ));
}

#[test]
fn jackknife_error_of_the_mean_reduces_to_the_classic_formula() {
    let members = &GROUND_ENSEMBLE[..200];
    let stats = ensemble_statistics(members).unwrap();
    let means: Vec<f64> = members
        .iter()
        .map(|t| t.x.iter().sum::<f64>() / t.len() as f64)
        .collect();
    let n = means.len() as f64;
    let grand = means.iter().sum::<f64>() / n;
    let sd = (means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert_relative_eq!(stats.se_mean_x, sd / n.sqrt(), max_relative = 1e-9);
}

#[test]
fn standard_errors_follow_the_ensemble_size_scaling() {
    let half = ensemble_statistics(&GROUND_ENSEMBLE[..250]).unwrap();
    let full = ensemble_statistics(&GROUND_ENSEMBLE[..1000]).unwrap();
    // quadrupling the ensemble should halve the error of the mean energy
    let ratio = full.se_mean_energy / half.se_mean_energy;
    assert!(
        (ratio - 0.5).abs() < 0.3 * 0.5,
        "se scaling ratio {ratio:.3} (expect 0.5 within 30%)"
    );
}

#[test]
fn absorbed_and_radiated_power_balance_in_the_steady_state() {
    let members = &*GROUND_ENSEMBLE;
    let mut absorbed = 0.0;
    let mut radiated = 0.0;
    for t in members.iter() {
        let pb = power_balance(t).unwrap();
        absorbed += pb.absorbed;
        radiated += pb.radiated;
    }
    let ratio = absorbed / radiated;
    assert_relative_eq!(ratio, 1.0, max_relative = 0.10);
    // both sides scale with tau at fixed equilibrium energy
    let scale_run = |tau: f64, seed: u64| {
        let params = OscillatorParams::natural(1.0, tau, &units());
        let band = FieldBand::new(0.8, 1.2, 512).unwrap();
        let grid = TimeGrid::new(0.0, 2.0, 3000).unwrap();
        let members =
            simulate_ensemble_spectral(&params, &band, &units(), 200, seed, &grid).unwrap();
        let mut a = 0.0;
        let mut r = 0.0;
        for t in &members {
            let pb = power_balance(t).unwrap();
            a += pb.absorbed;
            r += pb.radiated;
        }
        (a / 200.0, r / 200.0)
    };
    let (a3, r3) = scale_run(1e-3, 91);
    let (a2, r2) = scale_run(1e-2, 91);
    assert_relative_eq!(a2 / a3, 10.0, max_relative = 0.15);
    assert_relative_eq!(r2 / r3, 10.0, max_relative = 0.15);
    assert_relative_eq!(a3 / r3, 1.0, max_relative = 0.10);
    assert_relative_eq!(a2 / r2, 1.0, max_relative = 0.10);
}

#[test]
fn undriven_trajectory_has_no_power_flow() {
    let params = OscillatorParams {
        m: 1.0,
        e: 0.0,
        omega0: 1.0,
        tau: 1e-2,
    };
    let field = single_mode(1.0, 0.0, 0.0);
    // start from rest: the steady state is x ≡ 0 and both powers vanish
    let traj = integrate_time_domain(&params, &field, 0.05, 1000.0, 100.0).unwrap();
    let pb = power_balance(&traj).unwrap();
    assert_eq!(pb.absorbed, 0.0);
    assert_eq!(pb.radiated, 0.0);
    assert!(pb.ratio.is_none());
}

#[test]
fn power_balance_requires_a_long_window() {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let field = single_mode(1.0, 0.01, 0.0);
    let traj =
        steady_state_spectral(&params, &field, &TimeGrid::new(0.0, 0.5, 100).unwrap()).unwrap();
    assert!(matches!(
        power_balance(&traj),
        Err(CoreError::InvalidParams(_))
    ));
}

#[test]
fn diffusion_estimators_vanish_without_coupling() {
    let params = OscillatorParams {
        m: 1.0,
        e: 0.0,
        omega0: 1.0,
        tau: 1e-3,
    };
    let field = single_mode(1.0, 0.3, 0.2);
    let members: Vec<Trajectory> = (0..4)
        .map(|_| integrate_time_domain(&params, &field, 0.1, 100.0, 0.0).unwrap())
        .collect();
    let d = diffusion_estimators(&members).unwrap();
    assert_eq!(d.d_px, 0.0);
    assert_eq!(d.d_pp, 0.0);
}

#[test]
fn momentum_diffusion_matches_the_radiated_power() {
    let members = &*GROUND_ENSEMBLE;
    let d = diffusion_estimators(members).unwrap();
    let mut radiated = 0.0;
    for t in members.iter() {
        radiated += power_balance(t).unwrap().radiated;
    }
    radiated /= members.len() as f64;
    // D_pp = e⟨pE⟩ = m · (radiated power) at stationarity (m = 1 here)
    assert_relative_eq!(d.d_pp, radiated, max_relative = 0.10);
    // the cross estimator is strongly suppressed at sharp resonance
    assert!(
        d.d_px.abs() < 0.3 * d.d_pp / members[0].params.omega0,
        "d_px {:.3e} not small next to d_pp {:.3e}",
        d.d_px,
        d.d_pp
    );
}

#[test]
fn mean_energy_is_stationary_at_two_sigma() {
    let check = mean_evolution_check(&GROUND_ENSEMBLE[..400], Observable::Hamiltonian).unwrap();
    assert!(
        check.residual.abs() <= 2.0 * check.se,
        "residual {:.3e} vs se {:.3e}",
        check.residual,
        check.se
    );
}

#[test]
fn mean_evolution_is_identically_zero_for_the_free_undamped_case() {
    let params = OscillatorParams {
        m: 1.0,
        e: 0.0,
        omega0: 1.0,
        tau: 0.0,
    };
    let field = single_mode(1.0, 0.0, 0.0);
    let members: Vec<Trajectory> = (0..3)
        .map(|_| integrate_time_domain(&params, &field, 0.1, 100.0, 0.0).unwrap())
        .collect();
    let check = mean_evolution_check(&members, Observable::Hamiltonian).unwrap();
    assert_eq!(check.lhs_slope, 0.0);
    assert_eq!(check.rhs, 0.0);
}

#[test]
fn transient_energy_decay_follows_the_kinetic_energy_rule() {
    // e = 0, τ > 0, decaying from x0 = 1: d⟨H⟩/dt ≈ −2τω₀²⟨KE⟩
    let params = OscillatorParams {
        m: 1.0,
        e: 0.0,
        omega0: 1.0,
        tau: 1e-2,
    };
    let field = single_mode(1.0, 0.0, 0.0);
    let traj = integrate_time_domain_from(&params, &field, 0.01, 20.0, 0.0, 1.0, 0.0).unwrap();
    let check = mean_evolution_check(std::slice::from_ref(&traj), Observable::Hamiltonian).unwrap();
    let mut kinetic = 0.0;
    for k in 0..traj.len() {
        kinetic += traj.p[k] * traj.p[k] / (2.0 * params.m);
    }
    kinetic /= traj.len() as f64;
    let expected = -2.0 * params.tau * params.omega0 * params.omega0 * kinetic;
    assert_relative_eq!(check.lhs_slope, expected, max_relative = 0.05);
}

#[test]
fn mean_evolution_of_position_and_momentum_squares_is_stationary() {
    for obs in [Observable::PositionSquared, Observable::MomentumSquared] {
        let check = mean_evolution_check(&GROUND_ENSEMBLE[..400], obs).unwrap();
        assert!(
            check.residual.abs() <= 2.5 * check.se,
            "{obs:?}: residual {:.3e} vs se {:.3e}",
            check.residual,
            check.se
        );
    }
}

#[test]
fn time_domain_ensemble_reaches_the_ground_state_energy() {
    // reduced-size spot check of the stationary energy on the integrator path
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let band = FieldBand::new(0.8, 1.2, 512).unwrap();
    let members =
        simulate_ensemble_time_domain(&params, &band, &units(), 60, 404, 0.25, 12_000.0, 8_000.0)
            .unwrap();
    let stats = ensemble_statistics(&members).unwrap();
    assert!(
        (stats.mean_energy - 0.5).abs() < 0.5 * 0.10,
        "mean energy {:.3} (se {:.3})",
        stats.mean_energy,
        stats.se_mean_energy
    );
}

#[test]
fn member_errors_carry_the_member_index() {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let band = FieldBand::new(0.8, 1.2, 16).unwrap();
    // dt far above the stability bound: every member fails, index 0 reported
    let err = simulate_ensemble_time_domain(&params, &band, &units(), 3, 1, 5.0, 100.0, 10.0)
        .unwrap_err();
    match err {
        CoreError::Member { index, source } => {
            assert_eq!(index, 0);
            assert!(matches!(*source, CoreError::TimeStepTooLarge { .. }));
        }
        other => panic!("unexpected error: {other}"),
    }
}

#[test]
fn trajectory_csv_has_the_documented_layout() {
    let params = OscillatorParams::natural(1.0, 1e-3, &units());
    let field = single_mode(1.0, 0.01, 0.0);
    let traj =
        steady_state_spectral(&params, &field, &TimeGrid::new(0.0, 0.5, 4).unwrap()).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,p,E"));
    assert_eq!(text.lines().count(), 5);
    assert!(!text.contains('\r'));
    let first = lines.next().unwrap();
    assert_eq!(first.split(',').count(), 4);
}
