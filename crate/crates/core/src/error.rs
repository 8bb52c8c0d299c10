use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the domain of a function (negative frequency, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature whose error estimate exceeds the requested tolerance.
    #[error("numerical accuracy: {what}: estimated error {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    NumericalAccuracy {
        what: String,
        estimate: f64,
        tolerance: f64,
    },

    /// The rotated frame is undefined where the effective field vanishes.
    #[error("degenerate frame: effective field (B sin(theta), B cos(theta) - omega0) vanishes")]
    DegenerateFrame,

    /// A time grid too coarse for the oscillation or correlation scale.
    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("path crosses a pole near t = {t:.6} (azimuth undefined)")]
    PoleCrossing { t: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("configuration error: {0}")]
    Configuration(String),
}
