//! Flat `key = value` run configuration.
//!
//! Empty input yields the natural-unit desk-scale defaults. Unknown keys are
//! rejected, and tolerance overrides may only loosen the shipped defaults
//! unless `analysis.allow_tighten = true` is set explicitly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use sedres_core::NaturalUnits;
use sedres_core::oscillator::OscillatorParams;
use sedres_core::zpf::{FieldBand, ModeSpacing};

use crate::verify;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: Some(key.into()),
            message: message.into(),
        }
    }

    fn keyed(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: Some(key.into()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " (line {line})")?;
        }
        if let Some(key) = &self.key {
            write!(f, " [{key}]")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSettings {
    pub m: f64,
    /// `None` means "auto": derive e from τ via τ = 2e²/3mc³.
    pub e: Option<f64>,
    pub omega0: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSettings {
    pub n_members: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub dt: f64,
    pub t_end: f64,
    pub transient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSettings {
    pub n_max: usize,
    pub allow_tighten: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units: NaturalUnits,
    pub oscillator: OscillatorSettings,
    pub band: FieldBand,
    pub ensemble: EnsembleSettings,
    pub integration: IntegrationSettings,
    pub analysis: AnalysisSettings,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            units: NaturalUnits::default(),
            oscillator: OscillatorSettings {
                m: 1.0,
                e: None,
                omega0: 1.0,
                tau: 1e-3,
            },
            band: FieldBand {
                omega_min: 0.8,
                omega_max: 1.2,
                n_modes: 1024,
                spacing: ModeSpacing::Uniform,
            },
            ensemble: EnsembleSettings {
                n_members: 200,
                master_seed: 20_260_808,
            },
            integration: IntegrationSettings {
                dt: 0.25,
                t_end: 16_000.0,
                transient: 8_000.0,
            },
            analysis: AnalysisSettings {
                n_max: 20,
                allow_tighten: false,
            },
            tolerances: BTreeMap::new(),
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| ConfigError::at(line, key, format!("expected a number, got `{value}`")))
}

fn parse_int<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse::<T>()
        .map_err(|_| ConfigError::at(line, key, format!("expected an integer, got `{value}`")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ConfigError::at(
            line,
            key,
            format!("expected true or false, got `{other}`"),
        )),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: Some(line_no),
                    key: None,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::at(line_no, key, "duplicate key"));
            }
            seen.push(key.to_string());

            match key {
                "units.hbar" => cfg.units.hbar = parse_f64(line_no, key, value)?,
                "units.m" => cfg.units.m = parse_f64(line_no, key, value)?,
                "units.c" => cfg.units.c = parse_f64(line_no, key, value)?,
                "oscillator.m" => cfg.oscillator.m = parse_f64(line_no, key, value)?,
                "oscillator.e" => {
                    cfg.oscillator.e = if value == "auto" {
                        None
                    } else {
                        Some(parse_f64(line_no, key, value)?)
                    }
                }
                "oscillator.omega0" => cfg.oscillator.omega0 = parse_f64(line_no, key, value)?,
                "oscillator.tau" => cfg.oscillator.tau = parse_f64(line_no, key, value)?,
                "band.omega_min" => cfg.band.omega_min = parse_f64(line_no, key, value)?,
                "band.omega_max" => cfg.band.omega_max = parse_f64(line_no, key, value)?,
                "band.n_modes" => cfg.band.n_modes = parse_int(line_no, key, value)?,
                "band.spacing" => {
                    cfg.band.spacing = match value {
                        "uniform" => ModeSpacing::Uniform,
                        "uniform-in-cube" => ModeSpacing::UniformInCube,
                        other => {
                            return Err(ConfigError::at(
                                line_no,
                                key,
                                format!("expected uniform or uniform-in-cube, got `{other}`"),
                            ));
                        }
                    }
                }
                "ensemble.n_members" => cfg.ensemble.n_members = parse_int(line_no, key, value)?,
                "ensemble.master_seed" => {
                    cfg.ensemble.master_seed = parse_int(line_no, key, value)?
                }
                "integration.dt" => cfg.integration.dt = parse_f64(line_no, key, value)?,
                "integration.t_end" => cfg.integration.t_end = parse_f64(line_no, key, value)?,
                "integration.transient" => {
                    cfg.integration.transient = parse_f64(line_no, key, value)?
                }
                "analysis.n_max" => cfg.analysis.n_max = parse_int(line_no, key, value)?,
                "analysis.allow_tighten" => {
                    cfg.analysis.allow_tighten = parse_bool(line_no, key, value)?
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                _ if key.starts_with("tolerance.") => {
                    let name = &key["tolerance.".len()..];
                    if verify::tolerance_spec(name).is_none() {
                        return Err(ConfigError::at(
                            line_no,
                            key,
                            format!("unknown tolerance `{name}`"),
                        ));
                    }
                    cfg.tolerances
                        .insert(name.to_string(), parse_f64(line_no, key, value)?);
                }
                _ => {
                    return Err(ConfigError::at(line_no, key, "unknown key"));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural validation with key-qualified messages.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.units
            .validate()
            .map_err(|e| ConfigError::keyed("units", e.to_string()))?;
        let params = self.oscillator_params();
        params
            .validate()
            .map_err(|e| ConfigError::keyed("oscillator", e.to_string()))?;
        self.band
            .validate()
            .map_err(|e| ConfigError::keyed("band", e.to_string()))?;
        if self.ensemble.n_members == 0 {
            return Err(ConfigError::keyed(
                "ensemble.n_members",
                "must be at least 1",
            ));
        }
        let ig = &self.integration;
        if ig.dt <= 0.0 || !ig.dt.is_finite() {
            return Err(ConfigError::keyed(
                "integration.dt",
                format!("must be > 0, got {}", ig.dt),
            ));
        }
        if !ig.t_end.is_finite()
            || !ig.transient.is_finite()
            || ig.transient < 0.0
            || ig.t_end <= ig.transient
        {
            return Err(ConfigError::keyed(
                "integration.t_end",
                format!(
                    "need 0 <= transient < t_end, got transient={}, t_end={}",
                    ig.transient, ig.t_end
                ),
            ));
        }
        if !(2..=200).contains(&self.analysis.n_max) {
            return Err(ConfigError::keyed(
                "analysis.n_max",
                format!("must lie in [2, 200], got {}", self.analysis.n_max),
            ));
        }
        for (name, &value) in &self.tolerances {
            let spec = verify::tolerance_spec(name).ok_or_else(|| {
                ConfigError::keyed(format!("tolerance.{name}"), "unknown tolerance")
            })?;
            if value < 0.0 || !value.is_finite() {
                return Err(ConfigError::keyed(
                    format!("tolerance.{name}"),
                    format!("must be a non-negative number, got {value}"),
                ));
            }
            if value < spec.default && !self.analysis.allow_tighten {
                return Err(ConfigError::keyed(
                    format!("tolerance.{name}"),
                    format!(
                        "{value} tightens the default {}; set analysis.allow_tighten = true to allow this",
                        spec.default
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Oscillator parameters with `e = auto` resolved against τ.
    pub fn oscillator_params(&self) -> OscillatorParams {
        let o = &self.oscillator;
        let e =
            o.e.unwrap_or_else(|| (1.5 * o.m * self.units.c.powi(3) * o.tau).sqrt());
        OscillatorParams {
            m: o.m,
            e,
            omega0: o.omega0,
            tau: o.tau,
        }
    }

    /// Effective tolerance for a named check (override or shipped default).
    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            verify::tolerance_spec(name)
                .map(|s| s.default)
                .unwrap_or(0.0)
        })
    }

    /// Canonical text form; `parse(to_text(c))` equals `c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let spacing = match self.band.spacing {
            ModeSpacing::Uniform => "uniform",
            ModeSpacing::UniformInCube => "uniform-in-cube",
        };
        s.push_str(&format!("units.hbar = {}\n", self.units.hbar));
        s.push_str(&format!("units.m = {}\n", self.units.m));
        s.push_str(&format!("units.c = {}\n", self.units.c));
        s.push_str(&format!("oscillator.m = {}\n", self.oscillator.m));
        match self.oscillator.e {
            Some(e) => s.push_str(&format!("oscillator.e = {e}\n")),
            None => s.push_str("oscillator.e = auto\n"),
        }
        s.push_str(&format!("oscillator.omega0 = {}\n", self.oscillator.omega0));
        s.push_str(&format!("oscillator.tau = {}\n", self.oscillator.tau));
        s.push_str(&format!("band.omega_min = {}\n", self.band.omega_min));
        s.push_str(&format!("band.omega_max = {}\n", self.band.omega_max));
        s.push_str(&format!("band.n_modes = {}\n", self.band.n_modes));
        s.push_str(&format!("band.spacing = {spacing}\n"));
        s.push_str(&format!(
            "ensemble.n_members = {}\n",
            self.ensemble.n_members
        ));
        s.push_str(&format!(
            "ensemble.master_seed = {}\n",
            self.ensemble.master_seed
        ));
        s.push_str(&format!("integration.dt = {}\n", self.integration.dt));
        s.push_str(&format!("integration.t_end = {}\n", self.integration.t_end));
        s.push_str(&format!(
            "integration.transient = {}\n",
            self.integration.transient
        ));
        s.push_str(&format!("analysis.n_max = {}\n", self.analysis.n_max));
        s.push_str(&format!(
            "analysis.allow_tighten = {}\n",
            self.analysis.allow_tighten
        ));
        for (name, value) in &self.tolerances {
            s.push_str(&format!("tolerance.{name} = {value}\n"));
        }
        s.push_str(&format!("output_dir = {}\n", self.output_dir.display()));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_the_desk_scale_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.units, NaturalUnits::default());
        assert_eq!(cfg.oscillator.tau * cfg.oscillator.omega0, 1e-3);
        assert_eq!(cfg.ensemble.n_members, 200);
    }

    #[test]
    fn auto_charge_is_consistent_with_tau() {
        let cfg = RunConfig::default();
        let p = cfg.oscillator_params();
        // τ = 2e²/3mc³
        let tau_back = 2.0 * p.e * p.e / (3.0 * p.m * cfg.units.c.powi(3));
        assert!((tau_back - p.tau).abs() < 1e-15);
    }

    #[test]
    fn negative_omega0_is_rejected_by_name() {
        let err = RunConfig::parse("oscillator.omega0 = -1\n").unwrap_err();
        assert!(err.to_string().contains("oscillator.omega0"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let err = RunConfig::parse("units.hbar = 1\nno.such.key = 3\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert_eq!(err.key.as_deref(), Some("no.such.key"));
    }

    #[test]
    fn malformed_lines_and_duplicates_are_rejected() {
        assert!(RunConfig::parse("just words\n").is_err());
        let err = RunConfig::parse("units.c = 1\nunits.c = 2\n").unwrap_err();
        assert!(err.message.contains("duplicate"));
        assert!(RunConfig::parse("band.n_modes = 2.5\n").is_err());
    }

    #[test]
    fn tolerances_may_loosen_but_not_silently_tighten() {
        let loosened = RunConfig::parse("tolerance.stationary_energy_spectral = 0.2\n").unwrap();
        assert_eq!(loosened.tolerance("stationary_energy_spectral"), 0.2);

        let err = RunConfig::parse("tolerance.stationary_energy_spectral = 0.001\n").unwrap_err();
        assert!(err.message.contains("allow_tighten"), "{err}");

        let tightened = RunConfig::parse(
            "analysis.allow_tighten = true\ntolerance.stationary_energy_spectral = 0.001\n",
        )
        .unwrap();
        assert_eq!(tightened.tolerance("stationary_energy_spectral"), 0.001);

        assert!(RunConfig::parse("tolerance.not_a_check = 1\n").is_err());
    }

    #[test]
    fn round_trips_through_text() {
        let source = "oscillator.tau = 2e-3\nband.n_modes = 128\nband.spacing = uniform-in-cube\n\
                      ensemble.master_seed = 99\ntolerance.spectrum_parseval = 0.5\n";
        let cfg = RunConfig::parse(source).unwrap();
        let round = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, round);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::parse("# a comment\n\n  units.hbar = 2.0\n").unwrap();
        assert_eq!(cfg.units.hbar, 2.0);
    }
}
