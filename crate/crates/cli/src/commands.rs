//! Subcommand implementations: simulate, respond, brackets, scales, verify.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;
use serde_json::json;

use sedres_core::brackets::{
    ResponseMatrix, SpectralResponseMap, build_ho_expansion, commutator_matrix,
    correspondence_check, ordered_covariances, poisson_bracket_aa, poisson_bracket_numeric,
};
use sedres_core::oscillator::{ensemble_statistics, simulate_ensemble_time_domain};
use sedres_core::report::{CheckEntry, CheckReport, ToleranceKind};
use sedres_core::response::{
    DampingConvention, Susceptibility, kramers_kronig_reconstruct, resonance_covariance,
    response_function,
};
use sedres_core::scales::{PhysicalConstants, dispersion_estimates, markov_timescale};
use sedres_core::zpf::{FieldBand, RealizationSeed, sample_realization};

use crate::config::RunConfig;
use crate::verify::run_verify;

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn ensure_out_dir(config: &RunConfig) -> Result<&Path> {
    let dir = config.output_dir.as_path();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Integrate the configured ensemble and emit `traj_<idx>.csv` + `stats.json`.
pub fn simulate(config: &RunConfig) -> Result<bool> {
    let out = ensure_out_dir(config)?;
    let params = config.oscillator_params();
    for warning in params.warnings() {
        eprintln!("warning: {warning}");
    }
    let members = simulate_ensemble_time_domain(
        &params,
        &config.band,
        &config.units,
        config.ensemble.n_members,
        config.ensemble.master_seed,
        config.integration.dt,
        config.integration.t_end,
        config.integration.transient,
    )?;
    for (i, member) in members.iter().enumerate() {
        let path = out.join(format!("traj_{i}.csv"));
        let mut w = BufWriter::new(File::create(&path)?);
        member.write_csv(&mut w)?;
        w.flush()?;
    }
    let stats = ensemble_statistics(&members)?;
    write_json(&out.join("stats.json"), &stats)?;
    println!(
        "{} members -> {}; mean energy {:.4} +/- {:.4}",
        members.len(),
        out.display(),
        stats.mean_energy,
        stats.se_mean_energy
    );
    Ok(true)
}

/// Linear-response sweeps: susceptibility, response function, spectrum, and
/// the dispersion-relation checks.
pub fn respond(config: &RunConfig) -> Result<bool> {
    let out = ensure_out_dir(config)?;
    let params = config.oscillator_params();
    let omega0 = params.omega0;

    let susc = Susceptibility::around_resonance(
        omega0,
        params.tau,
        50.0,
        4001,
        DampingConvention::RadiationReaction,
    );
    {
        let mut w = BufWriter::new(File::create(out.join("susceptibility.csv"))?);
        w.write_all(b"omega,re,im\n")?;
        for (w_k, v) in susc.grid.iter().zip(&susc.values) {
            writeln!(w, "{},{},{}", w_k, v.re, v.im)?;
        }
        w.flush()?;
    }

    let rf = response_function(
        &[omega0],
        params.tau,
        0.05 / omega0,
        1 << 18,
        DampingConvention::RadiationReaction,
    )?;
    {
        let mut w = BufWriter::new(File::create(out.join("response_function.csv"))?);
        w.write_all(b"t,chi\n")?;
        for k in (0..rf.t.len()).step_by(4) {
            writeln!(w, "{},{}", rf.t[k], rf.chi[k])?;
        }
        w.flush()?;
    }

    let mut report = CheckReport::new();
    let reduced = Susceptibility::around_resonance(
        omega0,
        params.tau,
        50.0,
        4001,
        DampingConvention::Reduced,
    );
    let kk = kramers_kronig_reconstruct(&reduced)?;
    report.push(CheckEntry::new(
        "kramers_kronig_max_rel_error",
        kk.max_rel_error,
        0.0,
        config.tolerance("kramers_kronig_max_rel_error"),
        ToleranceKind::Absolute,
        "Kramers-Kronig reconstruction of the reactive part",
    ));

    let rc = resonance_covariance(omega0, params.tau, &config.units)?;
    report.push(CheckEntry::new(
        "resonance_covariance",
        rc.numeric,
        rc.delta_limit,
        config.tolerance("resonance_covariance"),
        ToleranceKind::Relative,
        "resonance covariance integral vs narrow-line closed form",
    ));
    report.push(CheckEntry::new(
        "resonance_covariance_vs_doubled_form",
        rc.ratio_to_doubled,
        0.5,
        config.tolerance("resonance_covariance_vs_doubled_form"),
        ToleranceKind::Relative,
        "reported: the integral gives half of the doubled closed form hbar/(m |omega|)",
    ));

    let decomp = crate::verify::spectrum_run(config, &params)?;
    {
        let mut w = BufWriter::new(File::create(out.join("spectrum.csv"))?);
        w.write_all(b"omega,S\n")?;
        for (w_k, s) in decomp.spectrum.omega.iter().zip(&decomp.spectrum.s_x) {
            writeln!(w, "{},{}", w_k, s)?;
        }
        w.flush()?;
    }
    report.push(CheckEntry::new(
        "spectrum_parseval",
        decomp.spectrum.total_power(),
        decomp.var_x,
        config.tolerance("spectrum_parseval"),
        ToleranceKind::Relative,
        "Parseval consistency of the spectrum estimator",
    ));

    write_json(&out.join("respond_report.json"), &report)?;
    print!("{}", report.render_table());
    println!(
        "response function: imag residual {:.2e}, anticausal fraction {:.2e}",
        rf.imag_residual, rf.anticausal_fraction
    );
    Ok(report.all_pass())
}

/// Bracket algebra artifacts and checks.
pub fn brackets(config: &RunConfig) -> Result<bool> {
    let out = ensure_out_dir(config)?;
    let params = config.oscillator_params();
    let units = config.units;
    let n_max = config.analysis.n_max;

    let expansions: Vec<_> = (0..=n_max)
        .map(|n| build_ho_expansion(n, &units, params.omega0))
        .collect();
    let matrices = ResponseMatrix::from_expansions(&expansions)?;
    write_json(
        &out.join("response_matrix.json"),
        &json!({
            "dim": matrices.dim,
            "omega0": params.omega0,
            "hbar": units.hbar,
            "x": matrices.x.to_pairs(),
            "p": matrices.p.to_pairs(),
        }),
    )?;

    let mut report = CheckReport::new();
    report.extend(correspondence_check(&expansions, &matrices));

    let i_hbar = Complex64::new(0.0, units.hbar);
    let ground = &expansions[0];
    report.push(CheckEntry::complex(
        "bracket_ground_state",
        poisson_bracket_aa(ground, ground)?,
        i_hbar,
        config.tolerance("bracket_analytic_diagonal"),
        ToleranceKind::Absolute,
        "canonical bracket over normal amplitudes equals i hbar",
    ));
    let cov = ordered_covariances(ground);
    report.push(CheckEntry::complex(
        "covariance_difference",
        cov.difference(),
        i_hbar,
        config.tolerance("covariance_difference"),
        ToleranceKind::Absolute,
        "ordered covariance difference equals the bracket",
    ));
    let comm = commutator_matrix(&matrices);
    report.push(CheckEntry::complex(
        "commutator_edge",
        comm[(n_max, n_max)],
        -i_hbar * n_max as f64,
        config.tolerance("commutator_edge"),
        ToleranceKind::Absolute,
        "truncation artifact at the top state",
    ));

    let bracket_band = FieldBand::new(0.6 * params.omega0, 1.4 * params.omega0, 4096)?;
    let field = sample_realization(
        &bracket_band,
        &units,
        RealizationSeed::new(config.ensemble.master_seed, 9002),
    )?;
    let map = SpectralResponseMap::new(&params, &field, DampingConvention::RadiationReaction)?;
    report.push(CheckEntry::complex(
        "bracket_numeric",
        poisson_bracket_numeric(&map, map.base_point(), 0.0, 1e-3)?,
        i_hbar,
        config.tolerance("bracket_numeric"),
        ToleranceKind::Relative,
        "finite-difference bracket of the band response over normal amplitudes",
    ));

    write_json(&out.join("brackets_report.json"), &report)?;
    print!("{}", report.render_table());
    Ok(report.all_pass())
}

/// Coarse-graining scale estimates.
pub fn scales(config: &RunConfig) -> Result<bool> {
    let out = ensure_out_dir(config)?;
    let constants = PhysicalConstants::default();
    let delta_t = markov_timescale(&constants)?;
    let disp = dispersion_estimates(constants.hbar_si, constants.m_e_si, delta_t)?;

    let mut report = CheckReport::new();
    report.push(CheckEntry::new(
        "markov_timescale",
        delta_t,
        2.4e-17,
        config.tolerance("markov_timescale"),
        ToleranceKind::Relative,
        "coarse-graining time for the electron",
    ));
    report.push(CheckEntry::new(
        "dispersion_product_identity",
        disp.product_over_hbar_squared,
        1.0,
        config.tolerance("dispersion_product_identity"),
        ToleranceKind::Absolute,
        "dispersion product identity of the coarse-grained estimates",
    ));

    let summary = format!(
        "coarse-graining scales (electron, SI)\n\
         time resolution:    {delta_t:.3e} s\n\
         position variance:  {:.3e} m^2  (sigma_x = {:.3e} m)\n\
         momentum variance:  {:.3e} kg^2 m^2/s^2\n\
         variance product:   {:.3e} = hbar^2 exactly under these definitions\n\
         note: the simulated stationary state gives Delta_x Delta_p = hbar/2,\n\
         a factor 2 below the order-of-magnitude product above.\n",
        disp.var_x,
        disp.var_x.sqrt(),
        disp.var_p,
        disp.product,
    );
    fs::write(out.join("scales.txt"), &summary)?;
    write_json(&out.join("scales_report.json"), &report)?;
    print!("{summary}");
    print!("{}", report.render_table());
    Ok(report.all_pass())
}

/// Full verification suite; writes `report.json`.
pub fn verify(config: &RunConfig) -> Result<bool> {
    let out = ensure_out_dir(config)?;
    let report = run_verify(config)?;
    write_json(&out.join("report.json"), &report)?;
    print!("{}", report.render_table());
    Ok(report.all_pass())
}
