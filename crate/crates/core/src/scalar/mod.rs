//! Scalar and finite-dimensional models of the decay arguments: admissible
//! sequences, gradient flows of polynomials, the Taylor region split and the
//! interpolation inequalities.

pub mod decay;
pub mod interp;
pub mod ode;

pub use decay::{discrete_decay_bound, generate_admissible, sqrt_increment_sum, DecayBound, DecaySequence, SqrtSum};
pub use interp::{bump, bump_family, dyadic_deltas, interpolation_check, FamilyReport, InterpolationRecord, InterpolationTerm, SampledFunction};
pub use ode::{ode_gradient_flow, power_decay_check, taylor_region_check, FlowExit, FlowOptions, ModelFunction, PowerDecay, RegionFit, TaylorReport, Trajectory};
