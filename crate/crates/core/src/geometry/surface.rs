//! Pointwise geometry of an embedded graph by parametric differentiation.
//!
//! The graph `x(θ, y) = (r + u)(cos θ, sin θ, 0) + y e₃` (in the cylinder's
//! local frame) is differentiated directly; the normal is `x_θ × x_y`
//! normalized, and the second fundamental form is pulled back to the
//! Gram–Schmidt frame `e₁ ∝ x_θ`, `e₂ ⊥ e₁`. This path is independent of the
//! offset formulas and serves as their oracle.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector3};

use super::cylinder::CylinderSpec;
use super::graph::{require_circle, GraphEval, GraphPoint};
use crate::error::{Error, Result};
use crate::spectral::basis::{GraphField, NodalJet, RADIUS};

/// How node weights of a sample were produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleGrid {
    /// Uniform θ × Gauss–Hermite nodes.
    Quadrature,
    /// Uniform θ × uniform y with spacings `(dθ, dy)`.
    Uniform { dtheta: f64, dy: f64 },
}

/// Local geometry at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct EmbeddedPoint {
    pub x: Vector3<f64>,
    pub normal: Vector3<f64>,
    /// Orthonormal tangent frame, `e₁ ∝ x_θ`.
    pub frame: [Vector3<f64>; 2],
    /// Coordinate tangent vectors `x_θ`, `x_y`.
    pub tangents: [Vector3<f64>; 2],
    pub metric: Matrix2<f64>,
    pub second_form: Matrix2<f64>,
    pub a: Matrix2<f64>,
    pub h: f64,
    pub phi: f64,
    /// `|x_θ × x_y|`, the area density in `dθ dy`.
    pub area: f64,
    /// Christoffel symbols `Γ^c_{ab}` indexed `[c][a][b]`.
    pub christoffel: [[[f64; 2]; 2]; 2],
}

/// Geometry of the graph point in the cylinder's local coordinates.
pub fn embed_point(theta: f64, y: f64, p: &GraphPoint) -> Result<EmbeddedPoint> {
    let vals = [p.u, p.u_t, p.u_y, p.u_tt, p.u_ty, p.u_yy];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite derivative data".into()));
    }
    let rho = RADIUS + p.u;
    if rho <= 0.0 {
        return Err(Error::SingularOffset { height: p.u, focal: RADIUS });
    }
    let (s, c) = theta.sin_cos();
    let er = Vector3::new(c, s, 0.0);
    let ep = Vector3::new(-s, c, 0.0);
    let ez = Vector3::new(0.0, 0.0, 1.0);
    let x = er * rho + ez * y;
    let xt = er * p.u_t + ep * rho;
    let xy = er * p.u_y + ez;
    let xtt = er * (p.u_tt - rho) + ep * (2.0 * p.u_t);
    let xty = er * p.u_ty + ep * p.u_y;
    let xyy = er * p.u_yy;
    point_from_derivatives([x, xt, xy, xtt, xty, xyy])
}

/// Geometry from a position and its first and second parameter derivatives
/// `[x, x_a, x_b, x_aa, x_ab, x_bb]`. The normal is `x_a × x_b` normalized.
pub fn point_from_derivatives(d: [Vector3<f64>; 6]) -> Result<EmbeddedPoint> {
    let [x, xt, xy, xtt, xty, xyy] = d;
    let big_n = xt.cross(&xy);
    let area = big_n.norm();
    if !(area > 0.0) {
        return Err(Error::Domain("degenerate parametrization".into()));
    }
    let normal = big_n / area;
    let metric = Matrix2::new(xt.dot(&xt), xt.dot(&xy), xy.dot(&xt), xy.dot(&xy));
    let second_form = Matrix2::new(xtt.dot(&normal), xty.dot(&normal), xty.dot(&normal), xyy.dot(&normal));
    let g11 = metric[(0, 0)];
    let g12 = metric[(0, 1)];
    let g22 = metric[(1, 1)];
    let n1 = g11.sqrt();
    let n2 = (g22 - g12 * g12 / g11).sqrt();
    // rows: frame vectors in the coordinate basis
    let t = Matrix2::new(1.0 / n1, 0.0, -g12 / g11 / n2, 1.0 / n2);
    let a = t * second_form * t.transpose();
    let a = (a + a.transpose()) * 0.5;
    let e1 = xt * t[(0, 0)];
    let e2 = xt * t[(1, 0)] + xy * t[(1, 1)];
    let h = -a.trace();
    let phi = x.dot(&normal) / 2.0 - h;
    let ginv = metric.try_inverse().ok_or_else(|| Error::Domain("degenerate metric".into()))?;
    let d = [xt, xy];
    let dd = [[xtt, xty], [xty, xyy]];
    let mut christoffel = [[[0.0; 2]; 2]; 2];
    for cc in 0..2 {
        for aa in 0..2 {
            for bb in 0..2 {
                christoffel[cc][aa][bb] = (0..2).map(|e| ginv[(cc, e)] * dd[aa][bb].dot(&d[e])).sum();
            }
        }
    }
    Ok(EmbeddedPoint {
        x,
        normal,
        frame: [e1, e2],
        tangents: [xt, xy],
        metric,
        second_form,
        a,
        h,
        phi,
        area,
        christoffel,
    })
}

/// Pointwise geometry of `Σ_u` on a tensor grid, flattened with index
/// `i·n_y + q` (θ-major).
#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub theta: Vec<f64>,
    pub y: Vec<f64>,
    pub grid: SampleGrid,
    /// Ambient positions, normals and tangent frames (rotated by the cylinder frame).
    pub x: Vec<Vector3<f64>>,
    pub normal: Vec<Vector3<f64>>,
    pub frame: Vec<[Vector3<f64>; 2]>,
    pub a: Vec<Matrix2<f64>>,
    pub h: Vec<f64>,
    pub phi: Vec<f64>,
    /// `A/H` where `H > δ`, `None` on masked nodes.
    pub tau: Vec<Option<Matrix2<f64>>>,
    pub delta: f64,
    /// Quadrature weight of `∫_Σ f e^{−|x|²/4} dμ` at each node.
    pub weight: Vec<f64>,
    /// Graph jet (the tapered `u`).
    pub jet: NodalJet,
    pub rotation: Matrix3<f64>,
}

impl SurfaceSample {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_y(&self) -> usize {
        self.y.len()
    }

    pub fn index(&self, i: usize, q: usize) -> usize {
        i * self.y.len() + q
    }

    /// Gaussian `L²` norm of a nodal field over `B_R` (or everything for `None`).
    pub fn gaussian_l2(&self, f: &[f64], radius: Option<f64>) -> f64 {
        self.integrate(|i| f[i] * f[i], radius).sqrt()
    }

    pub fn gaussian_l1(&self, f: &[f64], radius: Option<f64>) -> f64 {
        self.integrate(|i| f[i].abs(), radius)
    }

    pub fn integrate(&self, f: impl Fn(usize) -> f64, radius: Option<f64>) -> f64 {
        let r2 = radius.map(|r| r * r);
        (0..self.len())
            .filter(|&i| r2.is_none_or(|r2| self.x[i].norm_squared() <= r2))
            .map(|i| self.weight[i] * f(i))
            .sum()
    }
}

/// Default `δ` for masking `τ = A/H`.
pub fn default_delta(k: usize) -> f64 {
    0.1 * (k as f64 / 2.0).sqrt()
}

/// Builds a surface sample from a graph jet.
pub fn sample_from_jet(cyl: &CylinderSpec, jet: NodalJet, grid: SampleGrid, gh_weights: Option<&[f64]>) -> Result<SurfaceSample> {
    require_circle(cyl)?;
    let rot = Matrix3::from_iterator(cyl.frame().iter().copied());
    let nt = jet.theta.len();
    let ny = jet.y.len();
    let delta = default_delta(1);
    let mut out = SurfaceSample {
        theta: jet.theta.clone(),
        y: jet.y.clone(),
        grid,
        x: Vec::with_capacity(nt * ny),
        normal: Vec::with_capacity(nt * ny),
        frame: Vec::with_capacity(nt * ny),
        a: Vec::with_capacity(nt * ny),
        h: Vec::with_capacity(nt * ny),
        phi: Vec::with_capacity(nt * ny),
        tau: Vec::with_capacity(nt * ny),
        delta,
        weight: Vec::with_capacity(nt * ny),
        jet: jet.clone(),
        rotation: rot,
    };
    let dtheta = 2.0 * PI / nt as f64;
    for i in 0..nt {
        for q in 0..ny {
            let p = GraphEval::point(&jet, i, q);
            let e = embed_point(jet.theta[i], jet.y[q], &p)?;
            let rho = RADIUS + p.u;
            let weight = match grid {
                SampleGrid::Quadrature => {
                    let w = gh_weights.ok_or_else(|| Error::Input("quadrature grid needs weights".into()))?;
                    dtheta * w[q] * e.area * (-rho * rho / 4.0).exp()
                }
                SampleGrid::Uniform { dtheta, dy } => dtheta * dy * e.area * (-e.x.norm_squared() / 4.0).exp(),
            };
            out.x.push(rot * e.x);
            out.normal.push(rot * e.normal);
            out.frame.push([rot * e.frame[0], rot * e.frame[1]]);
            out.a.push(e.a);
            out.h.push(e.h);
            out.phi.push(e.phi);
            out.tau.push(if e.h > delta { Some(e.a / e.h) } else { None });
            out.weight.push(weight);
        }
    }
    Ok(out)
}

/// Embeds the tapered graph on the quadrature grid.
pub fn embed_graph(cyl: &CylinderSpec, u: &GraphField) -> Result<SurfaceSample> {
    let b = u.basis();
    sample_from_jet(cyl, u.tapered_jet(), SampleGrid::Quadrature, Some(b.y_weights()))
}

/// Embeds the tapered graph on a uniform `n_theta × n_y` grid over `|y| ≤ half_width`.
pub fn embed_graph_uniform(cyl: &CylinderSpec, u: &GraphField, n_theta: usize, n_y: usize, half_width: f64) -> Result<SurfaceSample> {
    if n_theta < 4 || n_y < 3 {
        return Err(Error::Input("uniform grid too small".into()));
    }
    let theta: Vec<f64> = (0..n_theta).map(|i| 2.0 * PI * i as f64 / n_theta as f64).collect();
    let dy = 2.0 * half_width / (n_y - 1) as f64;
    let y: Vec<f64> = (0..n_y).map(|q| -half_width + dy * q as f64).collect();
    let jet = u.basis().grid_jet(u.coeffs(), &theta, &y, true);
    sample_from_jet(cyl, jet, SampleGrid::Uniform { dtheta: 2.0 * PI / n_theta as f64, dy }, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::graph::graph_geometry;
    use crate::spectral::basis::SpectralBasis;
    use approx::assert_relative_eq;

    #[test]
    fn cylinder_sample_has_exact_geometry() {
        let b = SpectralBasis::new(16, 8, 12.0).unwrap();
        let cyl = CylinderSpec::standard(1, 2).unwrap();
        let s = embed_graph(&cyl, &GraphField::zero(&b)).unwrap();
        for i in 0..s.len() {
            assert!(s.phi[i].abs() < 1e-14);
            assert_relative_eq!(s.h[i], 1.0 / RADIUS, epsilon = 1e-14);
            let a2: f64 = s.a[i].iter().map(|v| v * v).sum();
            assert_relative_eq!(a2, 0.5, epsilon = 1e-14);
            assert!((s.normal[i].norm() - 1.0).abs() < 1e-14);
        }
        // Σ weights = ∫ e^{-|x|²/4} over the cylinder = 4π F
        let total: f64 = s.weight.iter().sum();
        let f = total / (4.0 * PI);
        assert_relative_eq!(f, (2.0 * PI / std::f64::consts::E).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn constant_graph_phi() {
        let b = SpectralBasis::new(8, 4, 12.0).unwrap();
        let cyl = CylinderSpec::standard(1, 2).unwrap();
        let s0 = 0.2;
        let u = GraphField::from_modes(&b, &[(0, 0, s0)]).unwrap();
        let sample = embed_graph_uniform(&cyl, &u, 8, 9, 3.0).unwrap();
        for i in 0..sample.len() {
            let rr = RADIUS + s0;
            assert_relative_eq!(sample.phi[i], rr / 2.0 - 1.0 / rr, epsilon = 1e-13);
        }
    }

    #[test]
    fn embedding_agrees_with_offset_formulas_pointwise() {
        let pts = [
            GraphPoint { u: 0.05, u_t: 0.02, u_y: -0.1, u_tt: 0.3, u_ty: 0.07, u_yy: -0.2 },
            GraphPoint { u: -0.3, u_t: -0.4, u_y: 0.5, u_tt: -0.6, u_ty: 0.2, u_yy: 0.9 },
        ];
        for p in pts {
            for (th, y) in [(0.2, 0.4), (2.5, -1.3)] {
                let e = embed_point(th, y, &p).unwrap();
                let g = graph_geometry(y, &p).unwrap();
                assert_relative_eq!(e.h, g.h, epsilon = 1e-12);
                assert_relative_eq!(e.phi, g.phi, epsilon = 1e-12);
                assert!(e.normal.dot(&e.tangents[0]).abs() < 1e-14);
                assert!(e.normal.dot(&e.tangents[1]).abs() < 1e-14);
                // ν is the area density relative to the cylinder's r dθ dy
                assert_relative_eq!(e.area / RADIUS, g.nu, epsilon = 1e-12);
            }
        }
    }
}
