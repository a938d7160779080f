//! Band-limited sampling of the zero-point radiation field.
//!
//! The zero-point field has spectral energy density ρ₀(ω) = ħω³ / 2π²c³
//! (isotropic, both polarizations, Gaussian units). With ⟨E²⟩ = ⟨B²⟩ the
//! total electric mean square is ⟨E²⟩ = 4π ∫ ρ₀ dω, so one Cartesian
//! component has the autocorrelation
//!
//! ⟨Eₓ(t) Eₓ(t + Δ)⟩ = (4π/3) ∫ ρ₀(ω) cos(ωΔ) dω
//!
//! over the sampled band. A realization is a discrete superposition
//! E(t) = Σ E_α cos(ω_α t + φ_α) with independent uniform phases; matching
//! the autocorrelation at every lag fixes E_α² = (8π/3) ρ₀(ω_α) Δω_α.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{CoreError, Result};
use crate::harmonics::CosineSum;
use crate::quadrature::{self, QuadratureOptions};
use crate::units::NaturalUnits;

/// Fixed seed for the frequency-grid jitter stream. The jitter breaks grid
/// commensurability but must be identical for every realization of a band,
/// so it cannot depend on the phase seed.
const JITTER_SEED: u64 = 0x5ed0_f1e1_d000_0001;

/// Fraction of the grid step used as jitter width.
const JITTER_FRACTION: f64 = 0.1;

/// Zero-point spectral energy density ρ₀(ω) = ħω³ / 2π²c³.
pub fn spectral_density(omega: f64, units: &NaturalUnits) -> Result<f64> {
    if omega < 0.0 {
        return Err(CoreError::NegativeFrequency(omega));
    }
    Ok(units.hbar * omega.powi(3) / (2.0 * PI * PI * units.c.powi(3)))
}

/// Frequency grid layout for a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpacing {
    Uniform,
    UniformInCube,
}

/// A finite band of field modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldBand {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_modes: usize,
    pub spacing: ModeSpacing,
}

impl FieldBand {
    pub fn new(omega_min: f64, omega_max: f64, n_modes: usize) -> Result<Self> {
        let band = Self {
            omega_min,
            omega_max,
            n_modes,
            spacing: ModeSpacing::Uniform,
        };
        band.validate()?;
        Ok(band)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega_min <= 0.0 || !self.omega_min.is_finite() {
            return Err(CoreError::InvalidBand(format!(
                "omega_min must be strictly positive, got {}",
                self.omega_min
            )));
        }
        if self.omega_max <= self.omega_min || !self.omega_max.is_finite() {
            return Err(CoreError::InvalidBand(format!(
                "omega_max must exceed omega_min, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if self.n_modes < 2 {
            return Err(CoreError::InvalidBand(format!(
                "n_modes must be at least 2, got {}",
                self.n_modes
            )));
        }
        Ok(())
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega > self.omega_min && omega < self.omega_max
    }

    /// Mode frequencies and per-mode widths Δω_α. Midpoint grid with a fixed
    /// seeded sub-spacing jitter; identical for every realization of the band.
    pub fn mode_grid(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let n = self.n_modes;
        let mut jitter_rng = ChaCha12Rng::seed_from_u64(JITTER_SEED);
        let mut freqs = Vec::with_capacity(n);
        let mut widths = Vec::with_capacity(n);
        match self.spacing {
            ModeSpacing::Uniform => {
                let h = (self.omega_max - self.omega_min) / n as f64;
                for k in 0..n {
                    let u: f64 = jitter_rng.random::<f64>() - 0.5;
                    freqs.push(self.omega_min + (k as f64 + 0.5 + JITTER_FRACTION * u) * h);
                    widths.push(h);
                }
            }
            ModeSpacing::UniformInCube => {
                let c_min = self.omega_min.powi(3);
                let h3 = (self.omega_max.powi(3) - c_min) / n as f64;
                for k in 0..n {
                    let u: f64 = jitter_rng.random::<f64>() - 0.5;
                    let cube = c_min + (k as f64 + 0.5 + JITTER_FRACTION * u) * h3;
                    let w = cube.cbrt();
                    freqs.push(w);
                    widths.push(h3 / (3.0 * w * w));
                }
            }
        }
        Ok((freqs, widths))
    }
}

/// Identifies the random stream a realization was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationSeed {
    pub master: u64,
    pub stream: u64,
}

impl RealizationSeed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    pub fn single(master: u64) -> Self {
        Self { master, stream: 0 }
    }

    fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// One sampled member of the zero-point field ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRealization {
    pub seed: RealizationSeed,
    #[serde(rename = "omega")]
    pub frequencies: Vec<f64>,
    #[serde(rename = "amplitude")]
    pub amplitudes: Vec<f64>,
    #[serde(rename = "phase")]
    pub phases: Vec<f64>,
}

impl FieldRealization {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn omega_max(&self) -> f64 {
        self.frequencies.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Electric field at time t (exact cosine superposition).
    pub fn field_at(&self, t: f64) -> f64 {
        self.cosine_sum().eval(t)
    }

    /// Field sampled on a uniform grid.
    pub fn sample_series(&self, t0: f64, dt: f64, n: usize) -> Vec<f64> {
        self.cosine_sum().sample(t0, dt, n)
    }

    pub fn cosine_sum(&self) -> CosineSum {
        CosineSum::new(
            self.amplitudes.clone(),
            self.frequencies.clone(),
            self.phases.clone(),
        )
    }

    /// All amplitudes scaled by λ (linearity probes).
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            seed: self.seed,
            frequencies: self.frequencies.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * lambda).collect(),
            phases: self.phases.clone(),
        }
    }

    /// Normal-mode amplitudes of this realization in the canonical
    /// normalization (a mode of frequency ω carries energy ħω|a|²). The
    /// zero-point realization sits at |a| = 1/√2, i.e. energy ħω/2 per mode.
    pub fn normal_amplitudes(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .map(|&phi| Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phi))
            .collect()
    }
}

/// Draw one field realization: deterministic frequencies and amplitudes from
/// the band, independent uniform phases from the seeded stream.
pub fn sample_realization(
    band: &FieldBand,
    units: &NaturalUnits,
    seed: RealizationSeed,
) -> Result<FieldRealization> {
    units.validate()?;
    let (frequencies, widths) = band.mode_grid()?;
    let amplitudes = frequencies
        .iter()
        .zip(&widths)
        .map(|(&w, &dw)| {
            let rho = spectral_density(w, units).expect("grid frequencies are positive");
            (8.0 * PI / 3.0 * rho * dw).sqrt()
        })
        .collect();
    let mut rng = seed.rng();
    let phases = (0..band.n_modes)
        .map(|_| rng.random::<f64>() * TAU)
        .collect();
    Ok(FieldRealization {
        seed,
        frequencies,
        amplitudes,
        phases,
    })
}

/// Band-limited autocorrelation of one electric-field component,
/// φ(Δ) = (4π/3) ∫ ρ₀(ω) cos(ωΔ) dω over the band, by adaptive quadrature.
pub fn autocorrelation_analytic(band: &FieldBand, units: &NaturalUnits, lag: f64) -> Result<f64> {
    band.validate()?;
    units.validate()?;
    let u = *units;
    let q = quadrature::integrate(
        move |w| spectral_density(w, &u).expect("band frequencies are positive") * (w * lag).cos(),
        band.omega_min,
        band.omega_max,
        QuadratureOptions::default(),
    )?;
    Ok(4.0 * PI / 3.0 * q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn natural() -> NaturalUnits {
        NaturalUnits::default()
    }

    /// Closed-form band autocorrelation at lag 0:
    /// (4π/3)(ħ/2π²c³) (ω_max⁴ − ω_min⁴)/4 = (2ħ/3πc³)(ω_max⁴ − ω_min⁴)/4.
    fn lag0_closed_form(band: &FieldBand, units: &NaturalUnits) -> f64 {
        2.0 * units.hbar / (3.0 * PI * units.c.powi(3))
            * (band.omega_max.powi(4) - band.omega_min.powi(4))
            / 4.0
    }

    #[test]
    fn spectral_density_reference_values() {
        let u = natural();
        assert_eq!(spectral_density(0.0, &u).unwrap(), 0.0);
        assert_relative_eq!(
            spectral_density(1.0, &u).unwrap(),
            1.0 / (2.0 * PI * PI),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            spectral_density(2.0, &u).unwrap(),
            8.0 / (2.0 * PI * PI),
            max_relative = 1e-15
        );
        assert!(matches!(
            spectral_density(-0.5, &u),
            Err(CoreError::NegativeFrequency(_))
        ));
    }

    #[test]
    fn cubic_scaling_is_exact() {
        let u = natural();
        for w in [0.3, 1.0, 4.7, 100.0] {
            let r = spectral_density(2.0 * w, &u).unwrap() / spectral_density(w, &u).unwrap();
            assert_relative_eq!(r, 8.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn band_validation() {
        assert!(FieldBand::new(0.0, 1.0, 8).is_err());
        assert!(FieldBand::new(1.0, 0.5, 8).is_err());
        assert!(FieldBand::new(0.5, 1.0, 1).is_err());
        assert!(FieldBand::new(0.5, 1.0, 2).is_ok());
    }

    #[test]
    fn autocorrelation_matches_closed_form_at_zero_lag() {
        let band = FieldBand::new(0.9, 1.1, 64).unwrap();
        let u = natural();
        let value = autocorrelation_analytic(&band, &u, 0.0).unwrap();
        assert_relative_eq!(value, lag0_closed_form(&band, &u), max_relative = 1e-11);
    }

    #[test]
    fn autocorrelation_decays_at_large_lag() {
        let band = FieldBand::new(0.9, 1.1, 64).unwrap();
        let u = natural();
        let phi0 = autocorrelation_analytic(&band, &u, 0.0).unwrap();
        for lag in [60.0, 150.0, 400.0] {
            let phi = autocorrelation_analytic(&band, &u, lag).unwrap();
            assert!(phi.abs() < phi0, "lag {lag}: {phi} vs {phi0}");
        }
    }

    #[test]
    fn realizations_are_deterministic_and_well_formed() {
        let band = FieldBand::new(0.8, 1.2, 128).unwrap();
        let u = natural();
        let a = sample_realization(&band, &u, RealizationSeed::new(42, 3)).unwrap();
        let b = sample_realization(&band, &u, RealizationSeed::new(42, 3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_modes(), 128);
        assert!(a.phases.iter().all(|&p| (0.0..TAU).contains(&p)));
        assert!(a.frequencies.iter().all(|&w| band.contains(w)));
        assert!(a.amplitudes.iter().all(|&e| e >= 0.0));

        let c = sample_realization(&band, &u, RealizationSeed::new(42, 4)).unwrap();
        assert_eq!(a.frequencies, c.frequencies);
        assert_eq!(a.amplitudes, c.amplitudes);
        assert_ne!(a.phases, c.phases);
    }

    #[test]
    fn single_mode_field_evaluation() {
        let mk = |phase: f64| FieldRealization {
            seed: RealizationSeed::single(0),
            frequencies: vec![1.3],
            amplitudes: vec![0.7],
            phases: vec![phase],
        };
        assert_relative_eq!(mk(0.0).field_at(0.0), 0.7, max_relative = 1e-15);
        assert_abs_diff_eq!(mk(PI / 2.0).field_at(0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn two_modes_superpose_linearly() {
        let seed = RealizationSeed::single(0);
        let one = FieldRealization {
            seed,
            frequencies: vec![0.9],
            amplitudes: vec![0.4],
            phases: vec![0.2],
        };
        let two = FieldRealization {
            seed,
            frequencies: vec![1.7],
            amplitudes: vec![0.9],
            phases: vec![5.0],
        };
        let both = FieldRealization {
            seed,
            frequencies: vec![0.9, 1.7],
            amplitudes: vec![0.4, 0.9],
            phases: vec![0.2, 5.0],
        };
        for t in [0.0, 0.37, 12.1] {
            assert_relative_eq!(
                both.field_at(t),
                one.field_at(t) + two.field_at(t),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn ensemble_mean_field_vanishes() {
        let band = FieldBand::new(0.8, 1.2, 512).unwrap();
        let u = natural();
        let n_seeds = 10_000;
        let t = 3.21;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for s in 0..n_seeds {
            let r = sample_realization(&band, &u, RealizationSeed::new(7, s)).unwrap();
            let e = r.field_at(t);
            sum += e;
            sum2 += e * e;
        }
        let n = n_seeds as f64;
        let mean = sum / n;
        let se = ((sum2 / n - mean * mean) / n).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean} exceeds 3 se {se}");
    }

    #[test]
    fn ensemble_variance_matches_band_autocorrelation() {
        let band = FieldBand::new(0.8, 1.2, 512).unwrap();
        let u = natural();
        let phi0 = autocorrelation_analytic(&band, &u, 0.0).unwrap();
        // average E(t)^2 over seeds and well-separated base times
        let n_seeds = 1000;
        let times: Vec<f64> = (0..20).map(|k| 10.0 * k as f64).collect();
        let mut acc = 0.0;
        for s in 0..n_seeds {
            let r = sample_realization(&band, &u, RealizationSeed::new(11, s)).unwrap();
            for &t in &times {
                let e = r.field_at(t);
                acc += e * e;
            }
        }
        let est = acc / (n_seeds as f64 * times.len() as f64);
        assert_relative_eq!(est, phi0, max_relative = 0.05);
    }

    #[test]
    fn ensemble_autocorrelation_tracks_analytic_over_ten_periods() {
        let band = FieldBand::new(0.8, 1.2, 512).unwrap();
        let u = natural();
        let phi0 = autocorrelation_analytic(&band, &u, 0.0).unwrap();
        let n_seeds = 1500;
        let period = TAU / (0.5 * (band.omega_min + band.omega_max));
        let base_times: Vec<f64> = (0..12).map(|k| 17.0 * k as f64).collect();
        for lag in [0.5 * period, 2.0 * period, 10.0 * period] {
            let analytic = autocorrelation_analytic(&band, &u, lag).unwrap();
            let mut acc = 0.0;
            for s in 0..n_seeds {
                let r = sample_realization(&band, &u, RealizationSeed::new(23, s)).unwrap();
                for &t in &base_times {
                    acc += r.field_at(t) * r.field_at(t + lag);
                }
            }
            let est = acc / (n_seeds as f64 * base_times.len() as f64);
            assert!(
                (est - analytic).abs() < 0.05 * phi0,
                "lag {lag}: estimated {est}, analytic {analytic}, scale {phi0}"
            );
        }
    }

    #[test]
    fn phases_of_distinct_modes_are_uncorrelated() {
        let band = FieldBand::new(0.8, 1.2, 16).unwrap();
        let u = natural();
        let n_seeds = 10_000usize;
        let mut phases: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n_seeds)).collect();
        for s in 0..n_seeds {
            let r = sample_realization(&band, &u, RealizationSeed::new(5, s as u64)).unwrap();
            for (store, &idx) in phases.iter_mut().zip(&[0usize, 7, 15]) {
                store.push(r.phases[idx]);
            }
        }
        let corr = |a: &[f64], b: &[f64]| {
            let n = a.len() as f64;
            let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
            let (mut num, mut va, mut vb) = (0.0, 0.0, 0.0);
            for i in 0..a.len() {
                num += (a[i] - ma) * (b[i] - mb);
                va += (a[i] - ma).powi(2);
                vb += (b[i] - mb).powi(2);
            }
            num / (va * vb).sqrt()
        };
        let bound = 3.0 / (n_seeds as f64).sqrt();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let c = corr(&phases[i], &phases[j]);
            assert!(
                c.abs() < bound,
                "modes {i},{j}: correlation {c} over bound {bound}"
            );
        }
    }

    #[test]
    fn realization_serializes_with_the_documented_keys() {
        let band = FieldBand::new(0.9, 1.1, 2).unwrap();
        let r = sample_realization(&band, &natural(), RealizationSeed::new(5, 1)).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["seed"]["master"], 5);
        assert_eq!(json["seed"]["stream"], 1);
        assert_eq!(json["omega"].as_array().unwrap().len(), 2);
        assert_eq!(json["amplitude"].as_array().unwrap().len(), 2);
        assert_eq!(json["phase"].as_array().unwrap().len(), 2);
        let back: FieldRealization = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn uniform_in_cube_grid_weights_reproduce_band_energy() {
        let band = FieldBand {
            omega_min: 0.8,
            omega_max: 1.2,
            n_modes: 512,
            spacing: ModeSpacing::UniformInCube,
        };
        let u = natural();
        let phi0 = autocorrelation_analytic(&band, &u, 0.0).unwrap();
        let r = sample_realization(&band, &u, RealizationSeed::single(1)).unwrap();
        let sum: f64 = r.amplitudes.iter().map(|a| 0.5 * a * a).sum();
        assert_relative_eq!(sum, phi0, max_relative = 1e-3);
    }
}
