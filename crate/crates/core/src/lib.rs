//! Covariance-level simulation of a harmonic oscillator chain quenched from a
//! squeezed product state, with the infinite-chain closed forms and the
//! diagnostics of the relaxed subsystems.
//!
//! * [`chain`] coupling matrix, normal modes and the symplectic propagator
//! * [`gaussian`] covariance matrices, preparation, evolution and reduction
//! * [`continuum`] infinite-chain integrals, Bessel closed forms, steady states
//! * [`diagnostics`] effective temperature, separability, relaxation distance
//! * [`quadrature`] composite Gauss-Legendre integration

pub mod chain;
pub mod continuum;
pub mod diagnostics;
pub mod error;
pub mod gaussian;
pub mod quadrature;

pub use chain::{mode_spectrum, propagator, propagator_rows, verify_symplectic, ChainParams, ModeSpectrum, Propagator};
pub use continuum::{ContinuumParams, IntegralSpec, Trig};
pub use error::{Error, Result};
pub use gaussian::{CovarianceMatrix, PrepSpec, SubsystemState};
pub use quadrature::Quadrature;

/// Largest absolute entry; NaN if any entry is NaN (unlike `amax`, which
/// skips them).
pub fn max_abs(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, x| if acc.is_nan() || x.is_nan() { f64::NAN } else { acc.max(x.abs()) })
}
