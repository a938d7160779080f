//! Linear-response machinery: susceptibility, response function,
//! Kramers–Kronig consistency, the resonance covariance integral, and
//! spectrum estimation/decomposition.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{CoreError, Result};
use crate::oscillator::Trajectory;
use crate::quadrature::{self, QuadratureOptions};
use crate::units::NaturalUnits;

/// Damping term convention in the susceptibility denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampingConvention {
    /// −iτω³: the frequency-dependent radiation-reaction form.
    RadiationReaction,
    /// −iτω_kn²ω: constant viscous damping γ = τω_kn², the form solved by
    /// the reduced time-domain model.
    Reduced,
}

/// χ(ω) = 1 / (ω_kn² − ω² − i·damping(ω)). The denominator never vanishes
/// for τ > 0, ω ≠ 0, and the two conventions agree to O(τω_kn) inside the
/// resonance band.
pub fn susceptibility_at(
    omega: f64,
    omega_kn: f64,
    tau: f64,
    convention: DampingConvention,
) -> Complex64 {
    let damping = match convention {
        DampingConvention::RadiationReaction => tau * omega.powi(3),
        DampingConvention::Reduced => tau * omega_kn * omega_kn * omega,
    };
    1.0 / Complex64::new(omega_kn * omega_kn - omega * omega, -damping)
}

/// Susceptibility evaluated on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Susceptibility {
    pub omega_kn: f64,
    pub tau: f64,
    pub convention: DampingConvention,
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl Susceptibility {
    pub fn evaluate(
        omega_kn: f64,
        tau: f64,
        grid: Vec<f64>,
        convention: DampingConvention,
    ) -> Self {
        let values = grid
            .iter()
            .map(|&w| susceptibility_at(w, omega_kn, tau, convention))
            .collect();
        Self {
            omega_kn,
            tau,
            convention,
            grid,
            values,
        }
    }

    /// Uniform grid of `n` points spanning ω_kn ± `half_width_linewidths`
    /// damping rates (linewidth = τω_kn²).
    pub fn around_resonance(
        omega_kn: f64,
        tau: f64,
        half_width_linewidths: f64,
        n: usize,
        convention: DampingConvention,
    ) -> Self {
        let lw = tau * omega_kn * omega_kn;
        let a = omega_kn - half_width_linewidths * lw;
        let b = omega_kn + half_width_linewidths * lw;
        let grid = (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect();
        Self::evaluate(omega_kn, tau, grid, convention)
    }
}

/// Real-time response function recovered from the susceptibility.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseFunction {
    pub dt: f64,
    /// Sample times, ascending; negative times included for the causality check.
    pub t: Vec<f64>,
    pub chi: Vec<f64>,
    /// max |Im χ(t)| / max |Re χ(t)| before discarding imaginary parts.
    pub imag_residual: f64,
    /// max |χ(t < 0)| / max |χ|.
    pub anticausal_fraction: f64,
}

/// Inverse Fourier transform of Σ_k χ_k(ω) on a symmetric frequency grid:
/// χ(t) = (1/2π) ∫ χ̃(ω) e^{−iωt} dω. The grid Nyquist must exceed
/// 10 × max(ω_kn) to keep the sharp resonance far from the fold.
pub fn response_function(
    resonances: &[f64],
    tau: f64,
    dt: f64,
    n: usize,
    convention: DampingConvention,
) -> Result<ResponseFunction> {
    if resonances.is_empty() {
        return Err(CoreError::InvalidParams(
            "need at least one resonance".into(),
        ));
    }
    let omega_max = resonances.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let nyquist = PI / dt;
    if nyquist <= 10.0 * omega_max {
        return Err(CoreError::AliasedGrid {
            nyquist,
            required: 10.0 * omega_max,
        });
    }
    let d_omega = 2.0 * PI / (n as f64 * dt);

    let chi_total = |w: f64| -> Complex64 {
        resonances
            .iter()
            .map(|&r| susceptibility_at(w, r, tau, convention))
            .sum()
    };
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let kk = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            let w = kk * d_omega;
            if n.is_multiple_of(2) && k == n / 2 {
                // Nyquist bin is shared between ±ω; keep its real part so the
                // transform of a conjugate-symmetric spectrum stays real.
                Complex64::new(chi_total(w).re, 0.0)
            } else {
                chi_total(w)
            }
        })
        .collect();

    // (1/2π) Σ χ̃(ω_k) e^{−iω_k t_j} Δω = forward DFT / (n·dt)
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64 * dt);

    let half = n / 2;
    let mut t = Vec::with_capacity(n);
    let mut chi = Vec::with_capacity(n);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for j in (half + 1..n).chain(0..=half) {
        let tj = if j > half {
            (j as f64 - n as f64) * dt
        } else {
            j as f64 * dt
        };
        let z = buf[j] * scale;
        t.push(tj);
        chi.push(z.re);
        max_re = max_re.max(z.re.abs());
        max_im = max_im.max(z.im.abs());
    }
    let peak = chi.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let anticausal = t
        .iter()
        .zip(&chi)
        .filter(|(tj, _)| **tj < 0.0)
        .fold(0.0f64, |a, (_, &c)| a.max(c.abs()));
    Ok(ResponseFunction {
        dt,
        t,
        chi,
        imag_residual: if max_re > 0.0 { max_im / max_re } else { 0.0 },
        anticausal_fraction: if peak > 0.0 { anticausal / peak } else { 0.0 },
    })
}

/// Result of reconstructing Re χ from Im χ.
#[derive(Debug, Clone, PartialEq)]
pub struct KkReconstruction {
    /// Frequencies of the reconstructed points (inner 80% of the grid).
    pub omega: Vec<f64>,
    pub re_reconstructed: Vec<f64>,
    pub re_direct: Vec<f64>,
    pub max_rel_error: f64,
}

/// Principal-value Hilbert reconstruction of the reactive part from the
/// absorptive part,
///
/// Re χ(ω) = (2/π) PV ∫₀^∞ ω′ Im χ(ω′) / (ω′² − ω²) dω′,
///
/// restricted to the sampled band. The singular factor is subtracted and
/// integrated in closed form on each call; the remaining integrand is
/// regular and handled by the trapezoid rule on the uniform grid. Band-edge
/// points are excluded from the error report.
pub fn kramers_kronig_reconstruct(susc: &Susceptibility) -> Result<KkReconstruction> {
    let grid = &susc.grid;
    let n = grid.len();
    if n < 16 {
        return Err(CoreError::GridCoverage(
            "need at least 16 grid points".into(),
        ));
    }
    let h = grid[1] - grid[0];
    let uniform = grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() < 1e-9 * h);
    if !uniform {
        return Err(CoreError::GridCoverage("grid must be uniform".into()));
    }
    let lw = susc.tau * susc.omega_kn * susc.omega_kn;
    let (a, b) = (grid[0], grid[n - 1]);
    if a > susc.omega_kn - 50.0 * lw || b < susc.omega_kn + 50.0 * lw {
        return Err(CoreError::GridCoverage(format!(
            "grid [{a}, {b}] must cover at least ±50 linewidths ({lw:.3e}) around {}",
            susc.omega_kn
        )));
    }

    let f: Vec<f64> = grid
        .iter()
        .zip(&susc.values)
        .map(|(&w, v)| w * v.im)
        .collect();

    let lo = n / 10;
    let hi = n - n / 10;
    let mut omega = Vec::with_capacity(hi - lo);
    let mut rec = Vec::with_capacity(hi - lo);
    let mut direct = Vec::with_capacity(hi - lo);
    let mut max_rel: f64 = 0.0;
    for j in lo..hi {
        let w = grid[j];
        let fw = f[j];
        let mut s = 0.0;
        for i in 0..n {
            let trap = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            let g = if i == j {
                // removable point: lim (f(ω′) − f(ω))/(ω′² − ω²) = f′(ω)/(2ω)
                (f[j + 1] - f[j - 1]) / (2.0 * h) / (2.0 * w)
            } else {
                (f[i] - fw) / (grid[i] * grid[i] - w * w)
            };
            s += trap * g * h;
        }
        let pv = fw / (2.0 * w) * (((b - w) * (w + a)) / ((w - a) * (b + w))).ln();
        let value = 2.0 / PI * (s + pv);
        let re = susc.values[j].re;
        omega.push(w);
        rec.push(value);
        direct.push(re);
        if re != 0.0 {
            max_rel = max_rel.max(((value - re) / re).abs());
        }
    }
    Ok(KkReconstruction {
        omega,
        re_reconstructed: rec,
        re_direct: direct,
        max_rel_error: max_rel,
    })
}

/// The stationary covariance integral at a resonance,
/// (ħτ/πm) ∫₀^∞ ω³ dω / ((ω_kn² − ω²)² + τ²ω⁶),
/// against its narrow-linewidth closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceCovariance {
    pub numeric: f64,
    /// Narrow-linewidth limit ħ/2m|ω_kn| (the integrand collapses onto a
    /// Lorentzian of half-width τω_kn²/2 at ω_kn).
    pub delta_limit: f64,
    /// numeric / delta_limit, → 1 as τω_kn → 0.
    pub ratio: f64,
    /// The doubled closed form ħ/m|ω_kn| that circulates in the literature;
    /// reported for comparison, not asserted. numeric/doubled → 1/2.
    pub doubled_form: f64,
    pub ratio_to_doubled: f64,
}

pub fn resonance_covariance(
    omega_kn: f64,
    tau: f64,
    units: &NaturalUnits,
) -> Result<ResonanceCovariance> {
    units.validate()?;
    if omega_kn <= 0.0 {
        return Err(CoreError::InvalidParams(format!(
            "omega_kn must be > 0, got {omega_kn}"
        )));
    }
    if tau * omega_kn > 1e-2 {
        return Err(CoreError::InvalidParams(format!(
            "tau * omega_kn = {} outside the narrow-resonance domain (limit 1e-2)",
            tau * omega_kn
        )));
    }
    let integrand = move |w: f64| {
        let d = omega_kn * omega_kn - w * w;
        w.powi(3) / (d * d + tau * tau * w.powi(6))
    };
    let opts = QuadratureOptions {
        rel_tol: 1e-10,
        ..Default::default()
    };
    let body = quadrature::integrate_with_breakpoints(
        integrand,
        &[
            0.0,
            0.5 * omega_kn,
            omega_kn,
            1.5 * omega_kn,
            8.0 * omega_kn,
        ],
        opts,
    )?;
    let tail = quadrature::integrate_to_infinity(integrand, 8.0 * omega_kn, opts)?;
    let numeric = units.hbar * tau / (PI * units.m) * (body.value + tail.value);
    let delta_limit = units.hbar / (2.0 * units.m * omega_kn);
    let doubled_form = units.hbar / (units.m * omega_kn);
    Ok(ResonanceCovariance {
        numeric,
        delta_limit,
        ratio: numeric / delta_limit,
        doubled_form,
        ratio_to_doubled: numeric / doubled_form,
    })
}

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchSettings {
    pub segment_len: usize,
    /// Fractional overlap between consecutive segments.
    pub overlap: f64,
}

impl Default for WelchSettings {
    fn default() -> Self {
        Self {
            segment_len: 32_768,
            overlap: 0.5,
        }
    }
}

/// One-sided spectrum estimate, normalized so Σ S(ω) Δω = var x.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub omega: Vec<f64>,
    pub s_x: Vec<f64>,
    pub segment_len: usize,
    pub overlap: f64,
    pub window: &'static str,
    pub n_members: usize,
    pub n_segments: usize,
}

impl SpectrumEstimate {
    pub fn d_omega(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }

    pub fn total_power(&self) -> f64 {
        self.s_x.iter().sum::<f64>() * self.d_omega()
    }

    pub fn peak_omega(&self) -> f64 {
        let k = self
            .s_x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        self.omega[k]
    }

    /// Full width at half maximum by linear interpolation of the half-power
    /// crossings around the peak.
    pub fn fwhm(&self) -> Option<f64> {
        let k_peak = self.omega.iter().position(|&w| w == self.peak_omega())?;
        let half = self.s_x[k_peak] / 2.0;
        let mut left = None;
        for k in (1..=k_peak).rev() {
            if self.s_x[k - 1] < half && self.s_x[k] >= half {
                let frac = (half - self.s_x[k - 1]) / (self.s_x[k] - self.s_x[k - 1]);
                left = Some(self.omega[k - 1] + frac * self.d_omega());
                break;
            }
        }
        let mut right = None;
        for k in k_peak..self.s_x.len() - 1 {
            if self.s_x[k] >= half && self.s_x[k + 1] < half {
                let frac = (self.s_x[k] - half) / (self.s_x[k] - self.s_x[k + 1]);
                right = Some(self.omega[k] + frac * self.d_omega());
                break;
            }
        }
        Some(right? - left?)
    }
}

/// Spectrum plus the lag-domain split of its one-sided inverse transform
/// into even (covariance) and odd (response-like) parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumDecomposition {
    pub spectrum: SpectrumEstimate,
    pub var_x: f64,
    pub lags: Vec<f64>,
    /// Sample covariance ⟨x(t) x(t+Δ)⟩ from the trajectories.
    pub covariance_direct: Vec<f64>,
    /// Re ∫₀^∞ S(ω) e^{−iωΔ} dω — must match `covariance_direct`.
    pub covariance_from_spectrum: Vec<f64>,
    /// −Im of the same transform: the odd, response-like part.
    pub antisymmetric_from_spectrum: Vec<f64>,
    /// RMS(covariance mismatch) / covariance(0).
    pub rms_mismatch: f64,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / n as f64).cos()))
        .collect()
}

/// Segment-averaged periodogram over a stationary ensemble plus the
/// even/odd decomposition of its inverse transform.
pub fn spectrum_decompose(
    trajectories: &[Trajectory],
    settings: &WelchSettings,
) -> Result<SpectrumDecomposition> {
    if trajectories.len() < 100 {
        return Err(CoreError::InvalidParams(format!(
            "spectrum decomposition needs >= 100 members, got {}",
            trajectories.len()
        )));
    }
    let first = &trajectories[0];
    let dt = first.dt;
    let len = first.len();
    for (i, t) in trajectories.iter().enumerate() {
        if t.dt != dt || t.len() != len {
            return Err(CoreError::MismatchedTrajectories(format!(
                "member {i} has a different grid"
            )));
        }
    }
    let seg = settings.segment_len;
    if seg < 16 || seg > len {
        return Err(CoreError::InvalidParams(format!(
            "segment_len {seg} must lie in [16, {len}]"
        )));
    }
    let step = ((seg as f64) * (1.0 - settings.overlap)).round().max(1.0) as usize;
    let segs_per_member = (len - seg) / step + 1;

    // stationarity: ensemble mean of the first-half vs second-half member means
    let halves: Vec<(f64, f64)> = trajectories
        .iter()
        .map(|t| {
            let mid = len / 2;
            let a = t.x[..mid].iter().sum::<f64>() / mid as f64;
            let b = t.x[mid..].iter().sum::<f64>() / (len - mid) as f64;
            (a, b)
        })
        .collect();
    let n_m = halves.len() as f64;
    let drift = halves.iter().map(|(a, b)| b - a).sum::<f64>() / n_m;
    let drift_var = halves
        .iter()
        .map(|(a, b)| (b - a - drift).powi(2))
        .sum::<f64>()
        / (n_m - 1.0)
        / n_m;
    if drift.abs() > 3.0 * drift_var.sqrt().max(1e-300) {
        return Err(CoreError::NonStationary(format!(
            "ensemble mean drifts by {drift:.3e} between trajectory halves (3 sigma = {:.3e})",
            3.0 * drift_var.sqrt()
        )));
    }

    let window = hann(seg);
    let w2: f64 = window.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(seg);
    let mut power = vec![0.0f64; seg];
    let mut n_segments = 0usize;
    let mut var_acc = 0.0f64;
    let mut buf = vec![Complex64::ZERO; seg];
    for t in trajectories {
        let mean = t.x.iter().sum::<f64>() / len as f64;
        var_acc += t.x.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / len as f64;
        for s in 0..segs_per_member {
            let off = s * step;
            for k in 0..seg {
                buf[k] = Complex64::new(t.x[off + k] * window[k], 0.0);
            }
            fft.process(&mut buf);
            for k in 0..seg {
                power[k] += buf[k].norm_sqr();
            }
            n_segments += 1;
        }
    }
    let var_x = var_acc / trajectories.len() as f64;

    // two-sided density: S₂(ω_k) = dt |X_k|² / (2π W₂); fold to one side
    let d_omega = 2.0 * PI / (seg as f64 * dt);
    let scale = dt / (2.0 * PI * w2 * n_segments as f64);
    let half_bins = seg / 2 + 1;
    let mut omega = Vec::with_capacity(half_bins);
    let mut s_x = Vec::with_capacity(half_bins);
    for k in 0..half_bins {
        let folded = if k == 0 || (seg.is_multiple_of(2) && k == seg / 2) {
            power[k]
        } else {
            power[k] + power[seg - k]
        };
        omega.push(k as f64 * d_omega);
        s_x.push(folded * scale);
    }
    let spectrum = SpectrumEstimate {
        omega,
        s_x,
        segment_len: seg,
        overlap: settings.overlap,
        window: "hann",
        n_members: trajectories.len(),
        n_segments,
    };

    // direct covariance via FFT autocorrelation, averaged over members
    let pad = (2 * len).next_power_of_two();
    let fft_pad = planner.plan_fft_forward(pad);
    let ifft_pad = planner.plan_fft_inverse(pad);
    let max_lag_samples = len / 4;
    let lag_step = (max_lag_samples / 384).max(1);
    let lag_idx: Vec<usize> = (0..max_lag_samples).step_by(lag_step).collect();
    let mut cov = vec![0.0f64; lag_idx.len()];
    let mut pbuf = vec![Complex64::ZERO; pad];
    for t in trajectories {
        for z in pbuf.iter_mut() {
            *z = Complex64::ZERO;
        }
        for (slot, &x) in pbuf.iter_mut().zip(&t.x) {
            *slot = Complex64::new(x, 0.0);
        }
        fft_pad.process(&mut pbuf);
        for z in pbuf.iter_mut() {
            *z = Complex64::new(z.norm_sqr(), 0.0);
        }
        ifft_pad.process(&mut pbuf);
        for (j, &lag) in lag_idx.iter().enumerate() {
            // inverse FFT is unnormalized; unbiased estimator divides by (len - lag)
            cov[j] += pbuf[lag].re / pad as f64 / (len - lag) as f64;
        }
    }
    for c in cov.iter_mut() {
        *c /= trajectories.len() as f64;
    }

    // one-sided inverse transform of the spectrum at the same lags
    let lags: Vec<f64> = lag_idx.iter().map(|&k| k as f64 * dt).collect();
    let mut cov_rec = Vec::with_capacity(lags.len());
    let mut anti = Vec::with_capacity(lags.len());
    for &lag in &lags {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, &w) in spectrum.omega.iter().enumerate() {
            re += spectrum.s_x[k] * (w * lag).cos();
            im -= spectrum.s_x[k] * (w * lag).sin();
        }
        cov_rec.push(re * d_omega);
        anti.push(-im * d_omega);
    }

    let c0 = cov[0].max(1e-300);
    let rms = (cov
        .iter()
        .zip(&cov_rec)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / cov.len() as f64)
        .sqrt()
        / c0;

    Ok(SpectrumDecomposition {
        spectrum,
        var_x,
        lags,
        covariance_direct: cov,
        covariance_from_spectrum: cov_rec,
        antisymmetric_from_spectrum: anti,
        rms_mismatch: rms,
    })
}
