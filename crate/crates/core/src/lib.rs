//! Decoherence of a spin-1/2 Berry phase in a rotating magnetic field coupled
//! to Ohmic bosonic baths.
//!
//! The crate evaluates second-order (time-convolutionless) decoherence
//! coefficients for one adiabatic cycle, propagates the reduced spin state,
//! composes the two-cycle spin-echo protocol that isolates the geometric
//! phase, and ships two brute-force oracles (a non-secular master-equation
//! integrator and an exact few-mode bath propagator) to validate the results.

pub mod bath;
pub mod coefficients;
pub mod error;
pub mod evolution;
pub mod frames;
pub mod oracle;
pub mod paths;
pub mod quadrature;

pub use bath::{BathSpec, CorrelationSample};
pub use coefficients::{CoefficientSet, CoefficientValues, TimeGrid};
pub use error::{Error, Result};
pub use evolution::{EchoResult, Variant};
pub use frames::{DensityMatrix2, DriveParams, FrameAngles};
pub use paths::{PathSpec, TiltedCircle};
