//! Normal-graph geometry over round cylinders.

pub mod cylinder;
pub mod graph;
pub mod offset;
pub mod simons;
pub mod surface;

pub use cylinder::{cylinder_shape_operator, CylinderSpec, ShapeOperator};
pub use graph::{gradient_m, graph_geometry, graph_mean_curvature, linearization_defect, linearization_order, nodal_l2, GraphEval, GraphGeometry, GraphPoint, SIGMA};
pub use offset::{eval_offset_jet, taylor_coefficients, OffsetJet, TaylorCoefficients};
pub use simons::{effective_bound_report, simons_trace_residual, EffectiveBoundReport, ParametricGrid};
pub use surface::{embed_graph, embed_graph_uniform, SurfaceSample};
