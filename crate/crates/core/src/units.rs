use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Natural unit scales. All module formulas carry ħ, m and c explicitly so
/// that SI evaluations remain possible; simulations default to ħ = m = c = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaturalUnits {
    /// Action scale ħ.
    pub hbar: f64,
    /// Mass scale m.
    pub m: f64,
    /// Speed scale c.
    pub c: f64,
}

impl Default for NaturalUnits {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            m: 1.0,
            c: 1.0,
        }
    }
}

impl NaturalUnits {
    pub fn new(hbar: f64, m: f64, c: f64) -> Result<Self> {
        let u = Self { hbar, m, c };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("m", self.m), ("c", self.c)] {
            if v <= 0.0 || !v.is_finite() {
                return Err(CoreError::InvalidParams(format!(
                    "units.{name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}
