//! Dynamics of a harmonically bound charge driven by a field realization.
//!
//! The radiation-reaction equation of motion
//!
//! m ẍ + m ω₀² x − m τ x⃛ = e E(t)
//!
//! has runaway solutions in the third-derivative term. We use the standard
//! order-τ reduction x⃛ → −ω₀² ẋ, which turns it into a damped driven
//! oscillator with damping rate γ = τω₀²:
//!
//! m ẍ + m γ ẋ + m ω₀² x = e E(t).
//!
//! [`integrate_time_domain`] solves this with fixed-step RK4;
//! [`steady_state_spectral`] writes down its exact stationary solution mode
//! by mode and serves as the integrator's oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU as TWO_PI;
use std::io::Write;

use crate::error::{CoreError, Result};
use crate::harmonics::CosineSum;
use crate::response::{DampingConvention, susceptibility_at};
use crate::units::NaturalUnits;
use crate::zpf::{FieldBand, FieldRealization, RealizationSeed, sample_realization};

/// Particle constants in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    /// Mass m.
    pub m: f64,
    /// Charge e. For equilibrium with the zero-point field the charge and
    /// radiation-reaction time must be consistent: τ = 2e²/3mc³.
    pub e: f64,
    /// Natural angular frequency ω₀.
    pub omega0: f64,
    /// Radiation-reaction time τ.
    pub tau: f64,
}

impl OscillatorParams {
    /// Parameters with the charge derived from τ via τ = 2e²/3mc³.
    pub fn natural(omega0: f64, tau: f64, units: &NaturalUnits) -> Self {
        let m = units.m;
        let e = (1.5 * m * units.c.powi(3) * tau).sqrt();
        Self { m, e, omega0, tau }
    }

    /// Reduced damping rate γ = τω₀².
    pub fn gamma(&self) -> f64 {
        self.tau * self.omega0 * self.omega0
    }

    pub fn validate(&self) -> Result<()> {
        if self.m <= 0.0 || !self.m.is_finite() {
            return Err(CoreError::InvalidParams(format!(
                "oscillator.m must be > 0, got {}",
                self.m
            )));
        }
        if self.omega0 <= 0.0 || !self.omega0.is_finite() {
            return Err(CoreError::InvalidParams(format!(
                "oscillator.omega0 must be > 0, got {}",
                self.omega0
            )));
        }
        if self.tau < 0.0 || !self.tau.is_finite() {
            return Err(CoreError::InvalidParams(format!(
                "oscillator.tau must be >= 0, got {}",
                self.tau
            )));
        }
        if !self.e.is_finite() {
            return Err(CoreError::InvalidParams(format!(
                "oscillator.e must be finite, got {}",
                self.e
            )));
        }
        if self.tau * self.omega0 > 0.1 {
            return Err(CoreError::InvalidParams(format!(
                "tau * omega0 = {} exceeds the weak-damping domain (limit 0.1)",
                self.tau * self.omega0
            )));
        }
        Ok(())
    }

    /// Non-fatal parameter advisories.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.tau * self.omega0 > 1e-2 {
            w.push(format!(
                "tau * omega0 = {:.3e} is above 1e-2; order-tau reduction error may be visible",
                self.tau * self.omega0
            ));
        }
        w
    }
}

/// Uniform sampling grid t0 + k dt, k = 0..n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(CoreError::InvalidParams(format!(
                "grid dt must be > 0, got {dt}"
            )));
        }
        if n < 2 {
            return Err(CoreError::InvalidParams(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        Ok(Self { t0, dt, n })
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.t0 + k as f64 * self.dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectorySource {
    TimeDomain,
    Spectral,
}

/// Uniformly sampled (t, x, p) series plus the driving-field samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub t0: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub e_field: Vec<f64>,
    pub params: OscillatorParams,
    pub source: TrajectorySource,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.len().saturating_sub(1)) as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.t0 + k as f64 * self.dt)
    }

    pub fn energy(&self, k: usize) -> f64 {
        let OscillatorParams { m, omega0, .. } = self.params;
        self.p[k] * self.p[k] / (2.0 * m) + 0.5 * m * omega0 * omega0 * self.x[k] * self.x[k]
    }

    /// Acceleration from the reduced equation of motion.
    pub fn acceleration(&self, k: usize) -> f64 {
        let pr = &self.params;
        (pr.e / pr.m) * self.e_field[k]
            - pr.omega0 * pr.omega0 * self.x[k]
            - pr.gamma() * self.p[k] / pr.m
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.dt == other.dt
            && self.t0 == other.t0
            && self.len() == other.len()
            && self.params == other.params
    }

    /// CSV with header `t,x,p,E`, `.` decimal separator, LF newlines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"t,x,p,E\n")?;
        for k in 0..self.len() {
            let t = self.t0 + k as f64 * self.dt;
            writeln!(out, "{},{},{},{}", t, self.x[k], self.p[k], self.e_field[k])?;
        }
        Ok(())
    }
}

/// Predicted stationary variance of x for this field and parameter set (mode
/// sum over the discrete band with the reduced susceptibility).
pub fn predicted_var_x(params: &OscillatorParams, field: &FieldRealization) -> f64 {
    field
        .frequencies
        .iter()
        .zip(&field.amplitudes)
        .map(|(&w, &e_amp)| {
            let chi = susceptibility_at(w, params.omega0, params.tau, DampingConvention::Reduced);
            (params.e / params.m * e_amp).powi(2) * chi.norm_sqr() * 0.5
        })
        .sum()
}

/// Integrate the reduced Langevin equation from rest, discarding `transient`.
pub fn integrate_time_domain(
    params: &OscillatorParams,
    field: &FieldRealization,
    dt: f64,
    t_end: f64,
    transient: f64,
) -> Result<Trajectory> {
    integrate_time_domain_from(params, field, dt, t_end, transient, 0.0, 0.0)
}

/// Integrate the reduced Langevin equation from (x0, p0).
pub fn integrate_time_domain_from(
    params: &OscillatorParams,
    field: &FieldRealization,
    dt: f64,
    t_end: f64,
    transient: f64,
    x0: f64,
    p0: f64,
) -> Result<Trajectory> {
    params.validate()?;
    let grid_ok = dt.is_finite()
        && t_end.is_finite()
        && transient.is_finite()
        && dt > 0.0
        && t_end > 0.0
        && (0.0..t_end).contains(&transient);
    if !grid_ok {
        return Err(CoreError::InvalidParams(format!(
            "need 0 <= transient < t_end and dt > 0, got dt={dt}, t_end={t_end}, transient={transient}"
        )));
    }
    let driven = params.e != 0.0 && field.n_modes() > 0;
    let omega_ref = if driven {
        params.omega0.max(field.omega_max())
    } else {
        params.omega0
    };
    let dt_max = TWO_PI / omega_ref / 20.0;
    if dt > dt_max {
        return Err(CoreError::TimeStepTooLarge { dt, max: dt_max });
    }

    let n_steps = (t_end / dt).round() as usize;
    let k_start = (transient / dt).ceil() as usize;
    if k_start + 2 > n_steps {
        return Err(CoreError::InvalidParams(
            "post-transient window is shorter than two samples".into(),
        ));
    }

    // field on the half-step grid: index 2k ↔ t_k, 2k+1 ↔ t_k + dt/2
    let e_half: Vec<f64> = if driven {
        field.sample_series(0.0, 0.5 * dt, 2 * n_steps + 1)
    } else {
        vec![0.0; 2 * n_steps + 1]
    };

    let pr = *params;
    let gamma = pr.gamma();
    let om2 = pr.omega0 * pr.omega0;
    let eom = pr.e / pr.m;
    let acc = |x: f64, v: f64, e_t: f64| eom * e_t - om2 * x - gamma * v;

    let energy = |x: f64, v: f64| 0.5 * pr.m * (v * v + om2 * x * x);
    let guard_base = if driven {
        (pr.m * om2 * predicted_var_x(&pr, field)).max(energy(x0, p0 / pr.m))
    } else {
        energy(x0, p0 / pr.m)
    };
    let guard = 10.0 * guard_base + 1e-12;

    let n_stored = n_steps - k_start + 1;
    let mut xs = Vec::with_capacity(n_stored);
    let mut ps = Vec::with_capacity(n_stored);
    let mut es = Vec::with_capacity(n_stored);

    let mut x = x0;
    let mut v = p0 / pr.m;
    if k_start == 0 {
        xs.push(x);
        ps.push(pr.m * v);
        es.push(e_half[0]);
    }
    for k in 0..n_steps {
        let (e0, e1, e2) = (e_half[2 * k], e_half[2 * k + 1], e_half[2 * k + 2]);
        let k1x = v;
        let k1v = acc(x, v, e0);
        let k2x = v + 0.5 * dt * k1v;
        let k2v = acc(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, e1);
        let k3x = v + 0.5 * dt * k2v;
        let k3v = acc(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, e1);
        let k4x = v + dt * k3v;
        let k4v = acc(x + dt * k3x, v + dt * k3v, e2);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

        if k % 512 == 0 && energy(x, v) > guard {
            return Err(CoreError::UnstableIntegration {
                dt,
                t: (k + 1) as f64 * dt,
                energy: energy(x, v),
                limit: guard,
            });
        }
        if k + 1 >= k_start {
            xs.push(x);
            ps.push(pr.m * v);
            es.push(e2);
        }
    }

    Ok(Trajectory {
        dt,
        t0: k_start as f64 * dt,
        x: xs,
        p: ps,
        e_field: es,
        params: pr,
        source: TrajectorySource::TimeDomain,
    })
}

/// Exact stationary solution of the reduced equation, mode by mode:
/// x(t) = Σ_α (e/m)|χ(ω_α)| E_α cos(ω_α t + φ_α − arg χ(ω_α)), p = m ẋ.
pub fn steady_state_spectral(
    params: &OscillatorParams,
    field: &FieldRealization,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    params.validate()?;
    let n_modes = field.n_modes();
    let mut amp_x = Vec::with_capacity(n_modes);
    let mut ph_x = Vec::with_capacity(n_modes);
    let mut amp_p = Vec::with_capacity(n_modes);
    let mut ph_p = Vec::with_capacity(n_modes);
    for i in 0..n_modes {
        let w = field.frequencies[i];
        let chi = susceptibility_at(w, params.omega0, params.tau, DampingConvention::Reduced);
        let a = params.e / params.m * field.amplitudes[i] * chi.norm();
        let phase = field.phases[i] - chi.arg();
        amp_x.push(a);
        ph_x.push(phase);
        amp_p.push(params.m * w * a);
        ph_p.push(phase + std::f64::consts::FRAC_PI_2);
    }
    let x = CosineSum::new(amp_x, field.frequencies.clone(), ph_x).sample(grid.t0, grid.dt, grid.n);
    let p = CosineSum::new(amp_p, field.frequencies.clone(), ph_p).sample(grid.t0, grid.dt, grid.n);
    let e_field = field.sample_series(grid.t0, grid.dt, grid.n);
    Ok(Trajectory {
        dt: grid.dt,
        t0: grid.t0,
        x,
        p,
        e_field,
        params: *params,
        source: TrajectorySource::Spectral,
    })
}

/// Largest relative residual of the reduced equation of motion for the
/// spectral solution, evaluated analytically at the probe times.
pub fn spectral_ode_residual(
    params: &OscillatorParams,
    field: &FieldRealization,
    probe_times: &[f64],
) -> f64 {
    let mut worst: f64 = 0.0;
    let gamma = params.gamma();
    let om2 = params.omega0 * params.omega0;
    for &t in probe_times {
        let mut x = 0.0;
        let mut v = 0.0;
        let mut a = 0.0;
        let mut e_t = 0.0;
        for i in 0..field.n_modes() {
            let w = field.frequencies[i];
            let chi = susceptibility_at(w, params.omega0, params.tau, DampingConvention::Reduced);
            let amp = params.e / params.m * field.amplitudes[i] * chi.norm();
            let arg = w * t + field.phases[i] - chi.arg();
            x += amp * arg.cos();
            v += -amp * w * arg.sin();
            a += -amp * w * w * arg.cos();
            e_t += field.amplitudes[i] * (w * t + field.phases[i]).cos();
        }
        let residual = params.m * a + params.m * gamma * v + params.m * om2 * x - params.e * e_t;
        let scale = (params.e * e_t)
            .abs()
            .max(params.m * om2 * x.abs())
            .max(1e-300);
        worst = worst.max((residual / scale).abs());
    }
    worst
}

/// Phase-averaged (across members) and time-averaged (within members) moments
/// with jackknife standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_members: usize,
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub mean_energy: f64,
    pub uncertainty_product: f64,
    pub se_mean_x: f64,
    pub se_mean_p: f64,
    pub se_var_x: f64,
    pub se_var_p: f64,
    pub se_mean_energy: f64,
    pub se_uncertainty_product: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct MemberMoments {
    x: f64,
    p: f64,
    xx: f64,
    pp: f64,
    energy: f64,
}

fn member_moments(t: &Trajectory) -> MemberMoments {
    let n = t.len() as f64;
    let mut m = MemberMoments::default();
    for k in 0..t.len() {
        m.x += t.x[k];
        m.p += t.p[k];
        m.xx += t.x[k] * t.x[k];
        m.pp += t.p[k] * t.p[k];
        m.energy += t.energy(k);
    }
    m.x /= n;
    m.p /= n;
    m.xx /= n;
    m.pp /= n;
    m.energy /= n;
    m
}

fn check_compatible(trajectories: &[Trajectory]) -> Result<()> {
    if trajectories.is_empty() {
        return Err(CoreError::EmptyEnsemble);
    }
    let first = &trajectories[0];
    for (i, t) in trajectories.iter().enumerate().skip(1) {
        if !t.same_grid(first) {
            return Err(CoreError::MismatchedTrajectories(format!(
                "member {i} has a different grid or parameter set"
            )));
        }
    }
    Ok(())
}

pub fn ensemble_statistics(trajectories: &[Trajectory]) -> Result<EnsembleStats> {
    check_compatible(trajectories)?;
    let n = trajectories.len();
    let members: Vec<MemberMoments> = trajectories.iter().map(member_moments).collect();

    let stats = |skip: Option<usize>| -> [f64; 6] {
        let count = if skip.is_some() { n - 1 } else { n } as f64;
        let mut s = MemberMoments::default();
        for (i, m) in members.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            s.x += m.x;
            s.p += m.p;
            s.xx += m.xx;
            s.pp += m.pp;
            s.energy += m.energy;
        }
        let mean_x = s.x / count;
        let mean_p = s.p / count;
        let var_x = (s.xx / count - mean_x * mean_x).max(0.0);
        let var_p = (s.pp / count - mean_p * mean_p).max(0.0);
        let energy = s.energy / count;
        [mean_x, mean_p, var_x, var_p, energy, (var_x * var_p).sqrt()]
    };

    let full = stats(None);
    let mut se = [0.0f64; 6];
    if n >= 2 {
        let loo: Vec<[f64; 6]> = (0..n).map(|i| stats(Some(i))).collect();
        for j in 0..6 {
            let mean_loo = loo.iter().map(|v| v[j]).sum::<f64>() / n as f64;
            let ss = loo.iter().map(|v| (v[j] - mean_loo).powi(2)).sum::<f64>();
            se[j] = ((n - 1) as f64 / n as f64 * ss).sqrt();
        }
    }

    Ok(EnsembleStats {
        n_members: n,
        mean_x: full[0],
        mean_p: full[1],
        var_x: full[2],
        var_p: full[3],
        mean_energy: full[4],
        uncertainty_product: full[5],
        se_mean_x: se[0],
        se_mean_p: se[1],
        se_var_x: se[2],
        se_var_p: se[3],
        se_mean_energy: se[4],
        se_uncertainty_product: se[5],
    })
}

/// Steady-state power bookkeeping: energy absorbed from the field vs energy
/// radiated away, per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBalance {
    /// e ⟨ẋ E⟩
    pub absorbed: f64,
    /// m τ ⟨ẍ²⟩ (stationary series satisfy ⟨x⃛ ẋ⟩ = −⟨ẍ²⟩)
    pub radiated: f64,
    /// absorbed / radiated; `None` when nothing is radiated (τ = 0).
    pub ratio: Option<f64>,
}

pub fn power_balance(trajectory: &Trajectory) -> Result<PowerBalance> {
    let pr = &trajectory.params;
    let min_span = 100.0 * TWO_PI / pr.omega0;
    if trajectory.duration() < min_span {
        return Err(CoreError::InvalidParams(format!(
            "power balance needs at least 100 periods ({min_span:.1} time units), trajectory spans {:.1}",
            trajectory.duration()
        )));
    }
    let n = trajectory.len() as f64;
    let mut absorbed = 0.0;
    let mut radiated = 0.0;
    for k in 0..trajectory.len() {
        let v = trajectory.p[k] / pr.m;
        absorbed += pr.e * v * trajectory.e_field[k];
        let a = trajectory.acceleration(k);
        radiated += pr.m * pr.tau * a * a;
    }
    absorbed /= n;
    radiated /= n;
    let ratio = if radiated == 0.0 {
        None
    } else {
        Some(absorbed / radiated)
    };
    Ok(PowerBalance {
        absorbed,
        radiated,
        ratio,
    })
}

/// Phase-averaged diffusion estimators D_px = e⟨xE⟩ and D_pp = e⟨pE⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionEstimators {
    pub d_px: f64,
    pub d_pp: f64,
    pub se_d_px: f64,
    pub se_d_pp: f64,
}

pub fn diffusion_estimators(trajectories: &[Trajectory]) -> Result<DiffusionEstimators> {
    check_compatible(trajectories)?;
    let n = trajectories.len();
    let per_member: Vec<(f64, f64)> = trajectories
        .iter()
        .map(|t| {
            let e = t.params.e;
            let len = t.len() as f64;
            let mut xe = 0.0;
            let mut pe = 0.0;
            for k in 0..t.len() {
                xe += t.x[k] * t.e_field[k];
                pe += t.p[k] * t.e_field[k];
            }
            (e * xe / len, e * pe / len)
        })
        .collect();
    let mean = |f: fn(&(f64, f64)) -> f64| per_member.iter().map(f).sum::<f64>() / n as f64;
    let d_px = mean(|v| v.0);
    let d_pp = mean(|v| v.1);
    let se = |f: fn(&(f64, f64)) -> f64, m: f64| {
        if n < 2 {
            return 0.0;
        }
        let ss = per_member.iter().map(|v| (f(v) - m).powi(2)).sum::<f64>();
        (ss / ((n - 1) as f64 * n as f64)).sqrt()
    };
    Ok(DiffusionEstimators {
        d_px,
        d_pp,
        se_d_px: se(|v| v.0, d_px),
        se_d_pp: se(|v| v.1, d_pp),
    })
}

/// Observables whose mean evolution can be checked against the reduced
/// moment equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Hamiltonian,
    PositionSquared,
    MomentumSquared,
}

/// d⟨G⟩/dt (fitted slope) against the moment-equation prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEvolutionCheck {
    pub observable: Observable,
    /// Fitted d⟨G⟩/dt.
    pub lhs_slope: f64,
    /// Moment-equation right-hand side from the ensemble estimators.
    pub rhs: f64,
    pub residual: f64,
    pub se: f64,
}

fn slope(dt: f64, series: &[f64]) -> f64 {
    // least-squares slope on a uniform grid
    let n = series.len() as f64;
    let t_mean = 0.5 * (n - 1.0) * dt;
    let y_mean = series.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, &y) in series.iter().enumerate() {
        let tc = k as f64 * dt - t_mean;
        num += tc * (y - y_mean);
        den += tc * tc;
    }
    num / den
}

pub fn mean_evolution_check(
    trajectories: &[Trajectory],
    observable: Observable,
) -> Result<MeanEvolutionCheck> {
    check_compatible(trajectories)?;
    let n = trajectories.len();
    let pr = &trajectories[0].params;
    let gamma = pr.gamma();
    let om2 = pr.omega0 * pr.omega0;

    let per_member: Vec<(f64, f64)> = trajectories
        .iter()
        .map(|t| {
            let len = t.len() as f64;
            let series: Vec<f64> = (0..t.len())
                .map(|k| match observable {
                    Observable::Hamiltonian => t.energy(k),
                    Observable::PositionSquared => t.x[k] * t.x[k],
                    Observable::MomentumSquared => t.p[k] * t.p[k],
                })
                .collect();
            let lhs = slope(t.dt, &series);
            let mut vv = 0.0;
            let mut ve = 0.0;
            let mut xp = 0.0;
            let mut p2 = 0.0;
            let mut pe = 0.0;
            for k in 0..t.len() {
                let v = t.p[k] / pr.m;
                vv += v * v;
                ve += v * t.e_field[k];
                xp += t.x[k] * t.p[k];
                p2 += t.p[k] * t.p[k];
                pe += t.p[k] * t.e_field[k];
            }
            vv /= len;
            ve /= len;
            xp /= len;
            p2 /= len;
            pe /= len;
            let rhs = match observable {
                // d⟨H⟩/dt = −mγ⟨ẋ²⟩ + D_pp/m, D_pp = e⟨pE⟩
                Observable::Hamiltonian => -pr.m * gamma * vv + pr.e * ve,
                // d⟨x²⟩/dt = 2⟨xp⟩/m (no radiative term: ∂x²/∂p = 0)
                Observable::PositionSquared => 2.0 * xp / pr.m,
                // d⟨p²⟩/dt = −2mω₀²⟨xp⟩ − 2γ⟨p²⟩ + 2D_pp
                Observable::MomentumSquared => {
                    -2.0 * pr.m * om2 * xp / pr.m - 2.0 * gamma * p2 + 2.0 * pr.e * pe
                }
            };
            (lhs, rhs)
        })
        .collect();

    let lhs = per_member.iter().map(|v| v.0).sum::<f64>() / n as f64;
    let rhs = per_member.iter().map(|v| v.1).sum::<f64>() / n as f64;
    let residuals: Vec<f64> = per_member.iter().map(|v| v.0 - v.1).collect();
    let residual = residuals.iter().sum::<f64>() / n as f64;
    let se = if n >= 2 {
        let ss = residuals
            .iter()
            .map(|r| (r - residual).powi(2))
            .sum::<f64>();
        (ss / ((n - 1) as f64 * n as f64)).sqrt()
    } else {
        0.0
    };
    Ok(MeanEvolutionCheck {
        observable,
        lhs_slope: lhs,
        rhs,
        residual,
        se,
    })
}

/// Spectral-path ensemble: one independent phase stream per member,
/// deterministic member order.
pub fn simulate_ensemble_spectral(
    params: &OscillatorParams,
    band: &FieldBand,
    units: &NaturalUnits,
    n_members: usize,
    master_seed: u64,
    grid: &TimeGrid,
) -> Result<Vec<Trajectory>> {
    if n_members == 0 {
        return Err(CoreError::EmptyEnsemble);
    }
    (0..n_members)
        .into_par_iter()
        .map(|i| {
            let field =
                sample_realization(band, units, RealizationSeed::new(master_seed, i as u64))
                    .map_err(|e| e.for_member(i))?;
            steady_state_spectral(params, &field, grid).map_err(|e| e.for_member(i))
        })
        .collect()
}

/// Time-domain ensemble on the reduced equation, from rest.
#[allow(clippy::too_many_arguments)]
pub fn simulate_ensemble_time_domain(
    params: &OscillatorParams,
    band: &FieldBand,
    units: &NaturalUnits,
    n_members: usize,
    master_seed: u64,
    dt: f64,
    t_end: f64,
    transient: f64,
) -> Result<Vec<Trajectory>> {
    if n_members == 0 {
        return Err(CoreError::EmptyEnsemble);
    }
    (0..n_members)
        .into_par_iter()
        .map(|i| {
            let field =
                sample_realization(band, units, RealizationSeed::new(master_seed, i as u64))
                    .map_err(|e| e.for_member(i))?;
            integrate_time_domain(params, &field, dt, t_end, transient).map_err(|e| e.for_member(i))
        })
        .collect()
}
