//! Numerical laboratory for rescaled mean curvature flow near round cylinders.
//!
//! The crate is organised in layers:
//!
//! * [`geometry`]: normal graphs over cylinders, their curvature, the gradient
//!   `𝓜` of the Gaussian area and Simons-type residual checks;
//! * [`spectral`]: the Fourier × Hermite eigenbasis of the linearized operator
//!   `L`, Gaussian norms, the kernel and discretized spectra;
//! * [`flow`]: time stepping of the graphical rescaled flow and its diagnostics;
//! * [`harness`]: cylinder fitting, scales, Łojasiewicz-type reports and the
//!   uniqueness experiment;
//! * [`scalar`]: sequence and ODE models of the decay arguments;
//! * [`io`]: configuration, persistence and report emission.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod hermite;
pub mod io;
pub mod quadrature;
pub mod flow;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
