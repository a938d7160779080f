//! Coarse-graining scale estimates for the physical electron.
//!
//! The coarse-grained (Markov) description resolves nothing faster than
//! Δt = 1/(α² ω_C) = ħ/(m α² c²); position diffuses as ⟨(Δx)²⟩ = (ħ/m)Δt.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Constants for the real-electron evaluation (SI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Fine-structure constant α.
    pub alpha: f64,
    /// Compton angular frequency ω_C = m c²/ħ (1/s).
    pub omega_c: f64,
    pub hbar_si: f64,
    pub m_e_si: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        // CODATA 2018 electron values
        Self {
            alpha: 7.297_352_569_3e-3,
            omega_c: 7.763_44e20,
            hbar_si: 1.054_571_817e-34,
            m_e_si: 9.109_383_701_5e-31,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("omega_c", self.omega_c),
            ("hbar_si", self.hbar_si),
            ("m_e_si", self.m_e_si),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(CoreError::InvalidParams(format!(
                    "constants.{name} must be positive, got {v}"
                )));
            }
        }
        if self.alpha >= 1.0 {
            return Err(CoreError::InvalidParams(format!(
                "constants.alpha must be below 1, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Time resolution of the coarse-grained description, Δt = 1/(α²ω_C).
pub fn markov_timescale(constants: &PhysicalConstants) -> Result<f64> {
    constants.validate()?;
    Ok(1.0 / (constants.alpha * constants.alpha * constants.omega_c))
}

/// Dispersion estimates over one coarse-graining step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionEstimates {
    /// ⟨(Δx)²⟩ = (ħ/m) Δt.
    pub var_x: f64,
    /// ⟨(Δp)²⟩ with Δp := m v̄ and v̄² = ⟨(Δx)²⟩/Δt².
    pub var_p: f64,
    /// var_x · var_p; equals ħ² identically under these definitions.
    pub product: f64,
    pub product_over_hbar_squared: f64,
}

/// Evaluate the dispersion estimates for the given scales. `hbar` and `m`
/// may be SI values or natural-unit scales.
pub fn dispersion_estimates(hbar: f64, m: f64, delta_t: f64) -> Result<DispersionEstimates> {
    if delta_t <= 0.0 || hbar <= 0.0 || m <= 0.0 {
        return Err(CoreError::InvalidParams(format!(
            "dispersion estimates need hbar, m, delta_t > 0, got {hbar}, {m}, {delta_t}"
        )));
    }
    let var_x = hbar / m * delta_t;
    let v_bar_sq = var_x / (delta_t * delta_t);
    let var_p = m * m * v_bar_sq;
    let product = var_x * var_p;
    Ok(DispersionEstimates {
        var_x,
        var_p,
        product,
        product_over_hbar_squared: product / (hbar * hbar),
    })
}
