use thiserror::Error;

/// Errors surfaced by the numerical toolkit.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("angular frequency must be non-negative, got {0}")]
    NegativeFrequency(f64),

    #[error("invalid field band: {0}")]
    InvalidBand(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("time step dt = {dt} exceeds the stable limit {max} for this band")]
    TimeStepTooLarge { dt: f64, max: f64 },

    #[error(
        "integration unstable at t = {t}: energy {energy:.3e} exceeds 10x the \
         equilibrium estimate {limit:.3e} (dt = {dt})"
    )]
    UnstableIntegration {
        dt: f64,
        t: f64,
        energy: f64,
        limit: f64,
    },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("trajectories are not compatible: {0}")]
    MismatchedTrajectories(String),

    #[error("response expansions are not compatible: {0}")]
    MismatchedExpansions(String),

    #[error("matrix dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("frequency grid too narrow: {0}")]
    GridCoverage(String),

    #[error("grid Nyquist frequency {nyquist} is below the required {required}")]
    AliasedGrid { nyquist: f64, required: f64 },

    #[error(
        "quadrature did not converge: reached error {achieved:.3e} after \
         {evaluations} evaluations (requested {requested:.3e})"
    )]
    QuadratureDidNotConverge {
        achieved: f64,
        requested: f64,
        evaluations: usize,
    },

    #[error("ensemble is not stationary: {0}")]
    NonStationary(String),

    #[error("response map is not linear: superposition residual {residual:.3e}")]
    NonlinearResponse { residual: f64 },

    #[error("field band [{omega_min}, {omega_max}] does not contain the resonance at {omega0}")]
    BandExcludesResonance {
        omega0: f64,
        omega_min: f64,
        omega_max: f64,
    },

    #[error("ensemble member {index}: {source}")]
    Member {
        index: usize,
        source: Box<CoreError>,
    },
}

impl CoreError {
    pub fn for_member(self, index: usize) -> Self {
        CoreError::Member {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
