//! Mean curvature, `F`-gradient and flow speed of a normal graph over the
//! `k = 1, n = 2` cylinder, evaluated from the offset formulas.
//!
//! With `H_u = (w/ν)(∂_s ν − (∂_s∂_{y_α} ν) u_α − (∂_{y_α}∂_{y_β} ν) u_{αβ})`
//! the gradient of `F` is `𝓜(u) = (ν/w)(H_u − η/2) e^{−(2ru + u²)/4}` and
//! rescaled MCF moves the graph with speed `∂_s u = w(η/2 − H_u)`.

use nalgebra::DMatrix;

use super::cylinder::CylinderSpec;
use super::offset::circle;
use crate::error::{Error, Result};
use crate::spectral::basis::{GraphField, NodalJet, RADIUS};

/// Sign relating `𝓜` to `L` at linear order: `𝓜(u) ≈ σ L u`.
///
/// Fixed by the radial family: `𝓜(s) ≈ −s` while `L(1) = 1`.
pub const SIGMA: f64 = -1.0;

/// Safety margin kept between the graph and the focal axis.
pub const FOCAL_MARGIN: f64 = 0.05;

/// Jet of the graph function at one point, in cylinder coordinates `(θ, y)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GraphPoint {
    pub u: f64,
    pub u_t: f64,
    pub u_y: f64,
    pub u_tt: f64,
    pub u_ty: f64,
    pub u_yy: f64,
}

/// Pointwise geometry of the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphGeometry {
    pub w: f64,
    pub nu: f64,
    pub eta: f64,
    pub h: f64,
    pub phi: f64,
    pub m: f64,
    pub speed: f64,
}

pub(crate) fn require_circle(cyl: &CylinderSpec) -> Result<()> {
    if cyl.k() != 1 || cyl.n() != 2 {
        return Err(Error::Unsupported(format!(
            "nodal graph geometry is implemented for k = 1, n = 2 (got k = {}, n = {})",
            cyl.k(),
            cyl.n()
        )));
    }
    Ok(())
}

/// Geometry of the graph at axial coordinate `y` from the jet `p`.
pub fn graph_geometry(y: f64, p: &GraphPoint) -> Result<GraphGeometry> {
    let vals = [p.u, p.u_t, p.u_y, p.u_tt, p.u_ty, p.u_yy];
    if vals.iter().any(|v| !v.is_finite()) || !y.is_finite() {
        return Err(Error::Input("non-finite derivative data".into()));
    }
    let r = RADIUS;
    if p.u <= -r {
        return Err(Error::SingularOffset { height: p.u, focal: r });
    }
    let u1 = p.u_t / r;
    let u2 = p.u_y;
    let u11 = p.u_tt / (r * r);
    let u12 = p.u_ty / r;
    let u22 = p.u_yy;
    let j = circle::nu_jet(r, p.u, u1, u2);
    let bracket = j.ds - j.dsdy1 * u1 - j.dsdy2 * u2 - j.dy1y1 * u11 - 2.0 * j.dy1y2 * u12 - j.dy2y2 * u22;
    let h = j.w / j.nu * bracket;
    let eta = circle::eta(r, p.u, y, u2, j.w);
    let phi = eta / 2.0 - h;
    let m = j.nu / j.w * (h - eta / 2.0) * (-(2.0 * r * p.u + p.u * p.u) / 4.0).exp();
    Ok(GraphGeometry { w: j.w, nu: j.nu, eta, h, phi, m, speed: j.w * phi })
}

/// Geometry fields on a tensor grid (rows θ, columns y).
#[derive(Debug, Clone)]
pub struct GraphEval {
    pub jet: NodalJet,
    pub w: DMatrix<f64>,
    pub nu: DMatrix<f64>,
    pub eta: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub speed: DMatrix<f64>,
}

impl GraphEval {
    pub fn point(jet: &NodalJet, i: usize, q: usize) -> GraphPoint {
        GraphPoint {
            u: jet.u[(i, q)],
            u_t: jet.u_t[(i, q)],
            u_y: jet.u_y[(i, q)],
            u_tt: jet.u_tt[(i, q)],
            u_ty: jet.u_ty[(i, q)],
            u_yy: jet.u_yy[(i, q)],
        }
    }

    pub fn new(jet: NodalJet) -> Result<Self> {
        let (rows, cols) = jet.u.shape();
        let mut out = Self {
            w: DMatrix::zeros(rows, cols),
            nu: DMatrix::zeros(rows, cols),
            eta: DMatrix::zeros(rows, cols),
            h: DMatrix::zeros(rows, cols),
            phi: DMatrix::zeros(rows, cols),
            m: DMatrix::zeros(rows, cols),
            speed: DMatrix::zeros(rows, cols),
            jet,
        };
        for q in 0..cols {
            let y = out.jet.y[q];
            for i in 0..rows {
                let g = graph_geometry(y, &Self::point(&out.jet, i, q))?;
                out.w[(i, q)] = g.w;
                out.nu[(i, q)] = g.nu;
                out.eta[(i, q)] = g.eta;
                out.h[(i, q)] = g.h;
                out.phi[(i, q)] = g.phi;
                out.m[(i, q)] = g.m;
                out.speed[(i, q)] = g.speed;
            }
        }
        Ok(out)
    }
}

/// Evaluates the tapered graph `χu` on the quadrature grid.
pub fn evaluate(cyl: &CylinderSpec, u: &GraphField) -> Result<GraphEval> {
    require_circle(cyl)?;
    GraphEval::new(u.tapered_jet())
}

/// Mean curvature `H_u` of the (tapered) graph on the quadrature grid.
pub fn graph_mean_curvature(cyl: &CylinderSpec, u: &GraphField) -> Result<DMatrix<f64>> {
    Ok(evaluate(cyl, u)?.h)
}

/// `𝓜(u)` on the quadrature grid.
pub fn gradient_m(cyl: &CylinderSpec, u: &GraphField) -> Result<DMatrix<f64>> {
    Ok(evaluate(cyl, u)?.m)
}

/// `L(χu)` on the quadrature grid, computed pointwise from the jet:
/// `u_θθ/r² + u_yy − (y/2)u_y + u`.
pub fn linear_operator_nodal(jet: &NodalJet) -> DMatrix<f64> {
    let r2 = RADIUS * RADIUS;
    DMatrix::from_fn(jet.u.nrows(), jet.u.ncols(), |i, q| {
        jet.u_tt[(i, q)] / r2 + jet.u_yy[(i, q)] - jet.y[q] / 2.0 * jet.u_y[(i, q)] + jet.u[(i, q)]
    })
}

/// Gaussian `L²` norm on the reference cylinder of nodal values over `|y| ≤ L`.
pub fn nodal_l2(u: &GraphField, values: &DMatrix<f64>) -> f64 {
    let basis = u.basis();
    let wt = basis.theta_weight() * RADIUS * (-RADIUS * RADIUS / 4.0).exp();
    let l = basis.truncation();
    let mut total = 0.0;
    for (q, (w, y)) in basis.y_weights().iter().zip(basis.y_nodes()).enumerate() {
        if y.abs() <= l {
            total += wt * w * values.column(q).norm_squared();
        }
    }
    total.sqrt()
}

/// `‖𝓜(εv) − σεL(χv)‖`, the remainder of the linearization.
pub fn linearization_defect(cyl: &CylinderSpec, v: &GraphField, eps: f64) -> Result<f64> {
    let m = gradient_m(cyl, &v.scaled(eps))?;
    let lv = linear_operator_nodal(&v.tapered_jet());
    Ok(nodal_l2(v, &(m - lv * (SIGMA * eps))))
}

/// Log-log slope of the linearization remainder against `ε`; quadratic
/// remainders give 2.
pub fn linearization_order(cyl: &CylinderSpec, v: &GraphField, eps: &[f64]) -> Result<f64> {
    let pairs = eps.iter().map(|&e| Ok((e, linearization_defect(cyl, v, e)?))).collect::<Result<Vec<_>>>()?;
    let (n, sx, sy) = (pairs.len() as f64, pairs.iter().map(|p| p.0.ln()).sum::<f64>(), pairs.iter().map(|p| p.1.ln()).sum::<f64>());
    let (mx, my) = (sx / n, sy / n);
    let sxy: f64 = pairs.iter().map(|p| (p.0.ln() - mx) * (p.1.ln() - my)).sum();
    let sxx: f64 = pairs.iter().map(|p| (p.0.ln() - mx).powi(2)).sum();
    if pairs.len() < 2 || sxx == 0.0 {
        return Err(Error::Input("need at least two distinct ε".into()));
    }
    Ok(sxy / sxx)
}
