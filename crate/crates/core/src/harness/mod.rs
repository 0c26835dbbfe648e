//! Cylinder fitting, the cylindrical and shrinker scales, Łojasiewicz-type
//! reports and the uniqueness experiment.

pub mod fit;
pub mod loja;
pub mod pipeline;

pub use fit::{cylindrical_scale, fit_cylinder, shrinker_scale, CylinderFit, CylindricalScale, ScaleOptions, ShrinkerScale};
pub use loja::{discrete_flow_inequality, exponent_fit, first_lojasiewicz_point, gradient_lojasiewicz_point, loglog_slope, lojasiewicz_report, mean_value_report, DiscreteInequality, ExponentFit, LojasiewiczPoint, LojasiewiczReport, MeanValueReport};
pub use pipeline::{decay_rate, run_with_diagnostics, scale_compatibility_report, sum_with_tail, uniqueness_report, DiagnosticOptions, ScaleReport, SeriesSum, UniquenessReport, UniquenessTolerances};
