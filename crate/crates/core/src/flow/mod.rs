//! Rescaled mean curvature flow of normal graphs over the cylinder.

pub mod functional;
pub mod runner;
pub mod series;
pub mod state;

pub use functional::{cylinder_f, entropy_estimate, radial_f, f_value, local_gaussian_density, mcf_to_rescaled, phi_norms, rescaled_to_mcf, EntropyEstimate, SampledSurface};
pub use series::{energy_identity_residual, kernel_amplitudes, phi_evolution_residual, EnergyResidual, FlowRow, FlowSeries, PhiResidual};
pub use runner::{run, Halt, RunOptions, RunOutput};
pub use state::{Adaptive, FlowConfig, FlowState, Integrator, Scheme, StepInfo, StepOutput};
