//! Error type shared by all simulation modules.

use thiserror::Error;

/// Errors produced by the simulation kernels and models.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a kernel.
    #[error("domain error: {0}")]
    Domain(String),

    /// Physically invalid geometry (non-positive radius, epsilon >= 1, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Filament configuration that touches or intersects, making the
    /// inductance kernels singular.
    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    /// Factorization of the inductance system broke down.
    #[error("singular system: pivot {pivot} is not positive (value {value:e})")]
    SingularSystem { pivot: usize, value: f64 },

    /// Closed-form model used outside its validity region.
    #[error("model validity error: {0}")]
    ModelValidity(String),

    /// Equilibrium curve has no interior maximum.
    #[error("no pull-in detected: {0}")]
    NoPullIn(String),

    /// Malformed user input (scenario files, sample counts, flags).
    #[error("input error: {0}")]
    Input(String),
}

pub(crate) type Result<T> = std::result::Result<T, Error>;
