//! Simulation and verification toolkit for a charged harmonic oscillator
//! driven by the zero-point radiation field.
//!
//! The crate is organized around five subsystems:
//!
//! * [`zpf`] — band-limited sampling of the zero-point field as a sum of
//!   cosines with independent random phases, plus the analytic spectral
//!   density and autocorrelation it must reproduce.
//! * [`oscillator`] — time-domain and spectral (exact stationary) solutions
//!   of the reduced radiation-reaction Langevin equation, ensemble
//!   statistics, and fluctuation–dissipation diagnostics.
//! * [`response`] — susceptibility, response function, Kramers–Kronig
//!   reconstruction, the resonance covariance integral, and spectrum
//!   estimation / decomposition.
//! * [`brackets`] — response expansions over normal field amplitudes,
//!   Poisson brackets, ordered covariances, and the matrix
//!   commutator/anticommutator correspondence.
//! * [`scales`] — coarse-graining time and dispersion estimates for the
//!   physical electron.
//!
//! Shared numerical machinery lives in [`quadrature`] and [`harmonics`];
//! verification results are collected in [`report`].

pub mod brackets;
pub mod error;
pub mod harmonics;
pub mod oscillator;
pub mod quadrature;
pub mod report;
pub mod response;
pub mod scales;
pub mod units;
pub mod zpf;

pub use error::{CoreError, Result};
pub use units::NaturalUnits;
