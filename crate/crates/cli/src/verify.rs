//! The aggregated verification suite behind `sedres verify`.
//!
//! Every check is a named [`CheckEntry`] with a declared tolerance; the
//! shipped defaults live in [`TOLERANCES`] and config overrides may only
//! loosen them. The suite is deterministic for a fixed master seed.

use anyhow::{Context, Result};
use num_complex::Complex64;

use sedres_core::brackets::{
    ResponseMatrix, SpectralResponseMap, anticommutator_matrix, build_ho_expansion,
    commutator_matrix, ordered_covariances, poisson_bracket_aa, poisson_bracket_numeric,
};
use sedres_core::oscillator::{
    OscillatorParams, TimeGrid, diffusion_estimators, ensemble_statistics, integrate_time_domain,
    power_balance, simulate_ensemble_spectral, simulate_ensemble_time_domain,
    steady_state_spectral,
};
use sedres_core::report::{CheckEntry, CheckReport, ToleranceKind};
use sedres_core::response::{
    DampingConvention, Susceptibility, WelchSettings, kramers_kronig_reconstruct,
    resonance_covariance, spectrum_decompose,
};
use sedres_core::scales::{PhysicalConstants, dispersion_estimates, markov_timescale};
use sedres_core::zpf::{FieldBand, RealizationSeed, sample_realization};

use crate::config::RunConfig;

pub struct ToleranceSpec {
    pub name: &'static str,
    pub kind: ToleranceKind,
    pub default: f64,
}

const fn abs(name: &'static str, default: f64) -> ToleranceSpec {
    ToleranceSpec {
        name,
        kind: ToleranceKind::Absolute,
        default,
    }
}

const fn rel(name: &'static str, default: f64) -> ToleranceSpec {
    ToleranceSpec {
        name,
        kind: ToleranceKind::Relative,
        default,
    }
}

/// Every named check with its shipped tolerance.
pub const TOLERANCES: &[ToleranceSpec] = &[
    rel("stationary_energy_spectral", 0.05),
    rel("stationary_energy_time_domain", 0.07),
    rel("equipartition_ratio", 0.03),
    rel("uncertainty_product", 0.05),
    rel("uncertainty_vs_coarse_grained_bound", 0.05),
    abs("sum_rule_max_deviation", 1e-12),
    abs("bracket_analytic_diagonal", 1e-12),
    abs("bracket_analytic_off_diagonal", 1e-12),
    rel("bracket_numeric", 1e-3),
    abs("commutator_interior_max_deviation", 1e-10),
    abs("commutator_edge", 1e-10),
    abs("covariance_difference", 1e-12),
    abs("covariance_sum", 1e-12),
    abs("covariance_anticommutator_max_deviation", 1e-10),
    abs("kramers_kronig_max_rel_error", 0.02),
    rel("resonance_covariance", 0.01),
    rel("resonance_covariance_scaling", 0.01),
    rel("resonance_covariance_vs_doubled_form", 0.02),
    abs("power_balance_ratio", 0.10),
    rel("diffusion_vs_radiated", 0.10),
    abs("spectrum_peak_offset_bins", 1.0),
    rel("spectrum_fwhm", 0.20),
    rel("spectrum_parseval", 0.05),
    rel("markov_timescale", 0.05),
    abs("dispersion_product_identity", 1e-12),
    abs("oracle_rms_mismatch", 0.01),
    abs("oracle_rms_mismatch_coarse_tau", 0.01),
    abs("determinism_stats_rerun", 0.0),
];

pub fn tolerance_spec(name: &str) -> Option<&'static ToleranceSpec> {
    TOLERANCES.iter().find(|s| s.name == name)
}

struct Suite<'c> {
    config: &'c RunConfig,
    report: CheckReport,
}

impl<'c> Suite<'c> {
    fn push_real(&mut self, name: &str, value: f64, reference: f64, provenance: &str) {
        let spec = tolerance_spec(name).expect("known check name");
        self.report.push(CheckEntry::new(
            name,
            value,
            reference,
            self.config.tolerance(name),
            spec.kind,
            provenance,
        ));
    }

    fn push_complex(
        &mut self,
        name: &str,
        value: Complex64,
        reference: Complex64,
        provenance: &str,
    ) {
        let spec = tolerance_spec(name).expect("known check name");
        self.report.push(CheckEntry::complex(
            name,
            value,
            reference,
            self.config.tolerance(name),
            spec.kind,
            provenance,
        ));
    }
}

/// Narrow-band stationary ensemble and its spectrum decomposition, sized to
/// resolve the configured linewidth with ~8 bins.
pub fn spectrum_run(
    config: &RunConfig,
    params: &OscillatorParams,
) -> Result<sedres_core::response::SpectrumDecomposition> {
    let omega0 = params.omega0;
    let gamma = params.gamma();
    let spec_band = FieldBand::new(omega0 - 50.0 * gamma, omega0 + 50.0 * gamma, 1024)?;
    let spec_dt = 1.6 / omega0;
    let seg = (2.0 * std::f64::consts::PI * 8.0 / (gamma * spec_dt))
        .ceil()
        .max(1.0) as usize;
    let seg = seg.next_power_of_two().clamp(4096, 32_768);
    let spec_grid = TimeGrid::new(0.0, spec_dt, 2 * seg)?;
    let members = simulate_ensemble_spectral(
        params,
        &spec_band,
        &config.units,
        100,
        config.ensemble.master_seed.wrapping_add(2),
        &spec_grid,
    )?;
    Ok(spectrum_decompose(
        &members,
        &WelchSettings {
            segment_len: seg,
            overlap: 0.5,
        },
    )?)
}

/// Run the full verification suite for the given configuration.
pub fn run_verify(config: &RunConfig) -> Result<CheckReport> {
    let mut suite = Suite {
        config,
        report: CheckReport::new(),
    };
    let units = config.units;
    let params = config.oscillator_params();
    let seed = config.ensemble.master_seed;
    let hbar = units.hbar;
    let omega0 = params.omega0;
    let ground_energy = 0.5 * hbar * omega0;

    // --- stationary ensemble, spectral path -------------------------------
    let window = config.integration.t_end - config.integration.transient;
    let spectral_dt = 0.45 * std::f64::consts::PI / config.band.omega_max;
    let spectral_grid = TimeGrid::new(0.0, spectral_dt, (window / spectral_dt).ceil() as usize)
        .context("spectral grid")?;
    let n_spectral = config.ensemble.n_members.max(400);
    let spectral = simulate_ensemble_spectral(
        &params,
        &config.band,
        &units,
        n_spectral,
        seed,
        &spectral_grid,
    )?;
    let spectral_stats = ensemble_statistics(&spectral)?;
    suite.push_real(
        "stationary_energy_spectral",
        spectral_stats.mean_energy,
        ground_energy,
        "zero-point stationary energy, exact mode response",
    );
    suite.push_real(
        "equipartition_ratio",
        spectral_stats.var_p / (params.m * params.m * omega0 * omega0 * spectral_stats.var_x),
        1.0,
        "kinetic/potential equipartition in the stationary state",
    );
    suite.push_real(
        "uncertainty_product",
        spectral_stats.uncertainty_product,
        0.5 * hbar,
        "stationary uncertainty product",
    );

    // fluctuation-dissipation balance on the same ensemble
    let mut absorbed = 0.0;
    let mut radiated = 0.0;
    for t in &spectral {
        let pb = power_balance(t)?;
        absorbed += pb.absorbed;
        radiated += pb.radiated;
    }
    suite.push_real(
        "power_balance_ratio",
        absorbed / radiated,
        1.0,
        "fluctuation-dissipation balance of absorbed vs radiated power",
    );
    let diffusion = diffusion_estimators(&spectral)?;
    suite.push_real(
        "diffusion_vs_radiated",
        diffusion.d_pp / params.m,
        radiated / spectral.len() as f64,
        "momentum diffusion estimator vs radiated power",
    );
    drop(spectral);

    // --- stationary ensemble, time-domain integrator ----------------------
    let td = simulate_ensemble_time_domain(
        &params,
        &config.band,
        &units,
        config.ensemble.n_members,
        seed.wrapping_add(1),
        config.integration.dt,
        config.integration.t_end,
        config.integration.transient,
    )?;
    let td_stats = ensemble_statistics(&td)?;
    drop(td);
    suite.push_real(
        "stationary_energy_time_domain",
        td_stats.mean_energy,
        ground_energy,
        "zero-point stationary energy, time-domain integration",
    );

    // --- integrator vs spectral oracle ------------------------------------
    for (name, tau) in [
        ("oracle_rms_mismatch", params.tau),
        ("oracle_rms_mismatch_coarse_tau", 1e-2 / omega0),
    ] {
        let p = OscillatorParams::natural(omega0, tau, &units);
        let gamma = p.gamma();
        let field = sample_realization(&config.band, &units, RealizationSeed::new(seed, 9001))?;
        let dt = 0.1 / omega0;
        let (transient, t_end) = (10.0 / gamma, 14.0 / gamma);
        let td = integrate_time_domain(&p, &field, dt, t_end, transient)?;
        let grid = TimeGrid::new(td.t0, td.dt, td.len())?;
        let sp = steady_state_spectral(&p, &field, &grid)?;
        let mut diff2 = 0.0;
        let mut ref2 = 0.0;
        for k in 0..td.len() {
            diff2 += (td.x[k] - sp.x[k]).powi(2);
            ref2 += sp.x[k] * sp.x[k];
        }
        suite.push_real(
            name,
            (diff2 / ref2).sqrt(),
            0.0,
            "post-transient RMS distance between integrator and exact stationary solution",
        );
    }

    // --- bracket algebra ---------------------------------------------------
    let n_max = config.analysis.n_max;
    let expansions: Vec<_> = (0..=n_max)
        .map(|n| build_ho_expansion(n, &units, omega0))
        .collect();
    let sum_rule_ref = hbar / (2.0 * params.m);
    let sum_rule_dev = expansions
        .iter()
        .map(|e| ((e.sum_rule() - sum_rule_ref) / sum_rule_ref).abs())
        .fold(0.0f64, f64::max);
    suite.push_real(
        "sum_rule_max_deviation",
        sum_rule_dev,
        0.0,
        "transition-weight sum rule over the first n_max states",
    );

    let i_hbar = Complex64::new(0.0, hbar);
    let mut diag_dev = 0.0f64;
    let mut off_dev = 0.0f64;
    for a in expansions.iter().take(11) {
        let b = poisson_bracket_aa(a, a)?;
        diag_dev = diag_dev.max((b - i_hbar).norm());
        for other in expansions.iter().take(11) {
            if other.state != a.state {
                off_dev = off_dev.max(poisson_bracket_aa(a, other)?.norm());
            }
        }
    }
    suite.push_real(
        "bracket_analytic_diagonal",
        diag_dev,
        0.0,
        "canonical bracket over normal amplitudes equals i hbar",
    );
    suite.push_real(
        "bracket_analytic_off_diagonal",
        off_dev,
        0.0,
        "brackets between distinct stationary states vanish",
    );

    // finite-difference bracket over a wide resonant band: ±0.4 ω₀ keeps the
    // missing Lorentzian tails and the off-resonant background below 1e-3
    let bracket_band = FieldBand::new(0.6 * omega0, 1.4 * omega0, 4096)?;
    let bracket_field =
        sample_realization(&bracket_band, &units, RealizationSeed::new(seed, 9002))?;
    let map = SpectralResponseMap::new(
        &params,
        &bracket_field,
        DampingConvention::RadiationReaction,
    )?;
    let numeric = poisson_bracket_numeric(&map, map.base_point(), 0.0, 1e-3)?;
    suite.push_complex(
        "bracket_numeric",
        numeric,
        i_hbar,
        "finite-difference bracket of the band response over normal amplitudes",
    );

    let matrices = ResponseMatrix::from_expansions(&expansions)?;
    let commutator = commutator_matrix(&matrices);
    let mut interior_dev = commutator.max_off_diagonal();
    for n in 0..n_max {
        interior_dev = interior_dev.max((commutator[(n, n)] - i_hbar).norm());
    }
    suite.push_real(
        "commutator_interior_max_deviation",
        interior_dev,
        0.0,
        "truncated matrix commutator equals i hbar on interior states",
    );
    suite.push_complex(
        "commutator_edge",
        commutator[(n_max, n_max)],
        -i_hbar * n_max as f64,
        "truncation artifact at the top state",
    );

    let anticommutator = anticommutator_matrix(&matrices);
    let mut cov_diff_dev = Complex64::ZERO;
    let mut cov_sum_dev = Complex64::ZERO;
    let mut cov_anti_dev = 0.0f64;
    for exp in expansions.iter().take(n_max.saturating_sub(1)) {
        let cov = ordered_covariances(exp);
        if (cov.difference() - i_hbar).norm() > cov_diff_dev.norm() {
            cov_diff_dev = cov.difference() - i_hbar;
        }
        if cov.symmetrized().norm() > cov_sum_dev.norm() {
            cov_sum_dev = cov.symmetrized();
        }
        let anti_ref = anticommutator[(exp.state, exp.state)]
            - Complex64::new(2.0 * exp.x_diag * exp.p_diag, 0.0);
        cov_anti_dev = cov_anti_dev.max((cov.symmetrized() - anti_ref).norm());
    }
    suite.push_complex(
        "covariance_difference",
        cov_diff_dev + i_hbar,
        i_hbar,
        "ordered covariance difference equals the bracket",
    );
    suite.push_complex(
        "covariance_sum",
        cov_sum_dev,
        Complex64::ZERO,
        "ordered covariance sum vanishes for the oscillator",
    );
    suite.push_real(
        "covariance_anticommutator_max_deviation",
        cov_anti_dev,
        0.0,
        "symmetrized covariance equals the matrix anticommutator",
    );

    // --- linear response ----------------------------------------------------
    let susc = Susceptibility::around_resonance(
        omega0,
        params.tau,
        50.0,
        4001,
        DampingConvention::Reduced,
    );
    let kk = kramers_kronig_reconstruct(&susc)?;
    suite.push_real(
        "kramers_kronig_max_rel_error",
        kk.max_rel_error,
        0.0,
        "Kramers-Kronig reconstruction of the reactive part",
    );

    let rc = resonance_covariance(omega0, params.tau, &units)?;
    suite.push_real(
        "resonance_covariance",
        rc.numeric,
        rc.delta_limit,
        "resonance covariance integral vs narrow-line closed form",
    );
    let rc2 = resonance_covariance(2.0 * omega0, params.tau, &units)?;
    suite.push_real(
        "resonance_covariance_scaling",
        rc2.numeric / rc.numeric,
        0.5,
        "inverse-frequency scaling of the resonance covariance",
    );
    suite.push_real(
        "resonance_covariance_vs_doubled_form",
        rc.ratio_to_doubled,
        0.5,
        "reported: the integral gives half of the doubled closed form hbar/(m |omega|)",
    );

    // --- spectrum decomposition --------------------------------------------
    let gamma = params.gamma();
    let decomp = spectrum_run(config, &params)?;
    let bin = decomp.spectrum.d_omega();
    suite.push_real(
        "spectrum_peak_offset_bins",
        (decomp.spectrum.peak_omega() - omega0).abs() / bin,
        0.0,
        "position spectrum peaks at the resonance",
    );
    suite.push_real(
        "spectrum_fwhm",
        decomp.spectrum.fwhm().unwrap_or(f64::INFINITY),
        gamma,
        "position spectrum linewidth equals the damping rate",
    );
    suite.push_real(
        "spectrum_parseval",
        decomp.spectrum.total_power(),
        decomp.var_x,
        "Parseval consistency of the spectrum estimator",
    );

    // --- coarse-graining scales ----------------------------------------------
    let constants = PhysicalConstants::default();
    let delta_t = markov_timescale(&constants)?;
    suite.push_real(
        "markov_timescale",
        delta_t,
        2.4e-17,
        "coarse-graining time for the electron",
    );
    let disp = dispersion_estimates(constants.hbar_si, constants.m_e_si, delta_t)?;
    suite.push_real(
        "dispersion_product_identity",
        disp.product_over_hbar_squared,
        1.0,
        "dispersion product identity of the coarse-grained estimates",
    );
    // the simulated stationary product (Δx·Δp = ħ/2) sits a factor 2 below
    // the order-of-magnitude coarse-grained product (ħ); both are reported
    suite.push_real(
        "uncertainty_vs_coarse_grained_bound",
        spectral_stats.uncertainty_product.powi(2) / (hbar * hbar),
        0.25,
        "simulated (Δx·Δp)²/ħ² = 1/4 vs the order-estimate ⟨Δx²⟩⟨Δp²⟩ ≈ ħ²",
    );

    // --- determinism ----------------------------------------------------------
    let mini_grid = TimeGrid::new(0.0, spectral_dt, 512)?;
    let run_once = || -> Result<Vec<u8>> {
        let members =
            simulate_ensemble_spectral(&params, &config.band, &units, 10, seed, &mini_grid)?;
        let stats = ensemble_statistics(&members)?;
        Ok(serde_json::to_vec(&stats)?)
    };
    let identical = run_once()? == run_once()?;
    suite.push_real(
        "determinism_stats_rerun",
        if identical { 0.0 } else { 1.0 },
        0.0,
        "plumbing",
    );

    Ok(suite.report)
}
