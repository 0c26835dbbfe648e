//! Simons-type identities as discrete residual checks.
//!
//! Geometry is evaluated exactly at the nodes of a uniform parameter grid and
//! covariant derivatives are formed by fourth-order central differences with
//! the exact metric and Christoffel symbols. The traced identity
//! `LH = H − Δφ − φ|A|²` then holds up to `O(h⁴)`.

use nalgebra::{Matrix2, Matrix3, Vector3};

use super::cylinder::CylinderSpec;
use super::surface::{embed_point, point_from_derivatives, EmbeddedPoint};
use crate::error::{Error, Result};
use crate::spectral::basis::GraphField;

/// Five-point first-derivative weights on offsets `−2..=2`, times `12h`.
const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
/// Five-point second-derivative weights, times `12h²`.
const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
/// Nodes lost at each non-periodic edge.
const MARGIN: usize = 2;

/// Exact pointwise geometry on a uniform parameter grid.
#[derive(Debug, Clone)]
pub struct ParametricGrid {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub da: f64,
    pub db: f64,
    pub periodic_a: bool,
    pub points: Vec<EmbeddedPoint>,
}

impl ParametricGrid {
    /// Samples `jet(a, b) = [x, x_a, x_b, x_aa, x_ab, x_bb]` on the grid.
    pub fn from_parametrization(a: Vec<f64>, b: Vec<f64>, periodic_a: bool, jet: impl Fn(f64, f64) -> [Vector3<f64>; 6]) -> Result<Self> {
        if a.len() < 2 * MARGIN + 1 || b.len() < 2 * MARGIN + 1 {
            return Err(Error::Domain("grid too small for central differences".into()));
        }
        let da = a[1] - a[0];
        let db = b[1] - b[0];
        let mut points = Vec::with_capacity(a.len() * b.len());
        for &aa in &a {
            for &bb in &b {
                points.push(point_from_derivatives(jet(aa, bb))?);
            }
        }
        Ok(Self { a, b, da, db, periodic_a, points })
    }

    /// The tapered graph of `u` on `n_theta × n_y` nodes over `|y| ≤ half_width`.
    pub fn from_graph(cyl: &CylinderSpec, u: &GraphField, n_theta: usize, n_y: usize, half_width: f64) -> Result<Self> {
        super::graph::require_circle(cyl)?;
        if n_theta < 2 * MARGIN + 1 || n_y < 2 * MARGIN + 1 {
            return Err(Error::Domain("grid too small for central differences".into()));
        }
        let a: Vec<f64> = (0..n_theta).map(|i| 2.0 * std::f64::consts::PI * i as f64 / n_theta as f64).collect();
        let db = 2.0 * half_width / (n_y - 1) as f64;
        let b: Vec<f64> = (0..n_y).map(|q| -half_width + db * q as f64).collect();
        let jet = u.basis().grid_jet(u.coeffs(), &a, &b, true);
        let mut points = Vec::with_capacity(n_theta * n_y);
        for i in 0..n_theta {
            for q in 0..n_y {
                points.push(embed_point(a[i], b[q], &super::graph::GraphEval::point(&jet, i, q))?);
            }
        }
        Ok(Self { da: a[1] - a[0], db, a, b, periodic_a: true, points })
    }

    /// Flat index of node `(i, q)` in [`Self::points`].
    pub fn idx(&self, i: usize, q: usize) -> usize {
        i * self.b.len() + q
    }

    /// Nodes where central differences are available.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let ia = if self.periodic_a { 0..self.a.len() } else { MARGIN..self.a.len() - MARGIN };
        ia.flat_map(move |i| (MARGIN..self.b.len() - MARGIN).map(move |q| (i, q)))
    }

    /// Node `i + d` along the first coordinate, wrapped when periodic.
    fn shift(&self, i: usize, d: isize) -> usize {
        let n = self.a.len() as isize;
        let j = i as isize + d;
        if self.periodic_a {
            j.rem_euclid(n) as usize
        } else {
            j as usize
        }
    }

    /// Weighted five-point sums along each coordinate, already divided by the spacing.
    fn stencil<T>(&self, f: impl Fn(usize) -> T, i: usize, q: usize, wa: &[f64; 5], wb: &[f64; 5]) -> (T, T)
    where
        T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Copy,
    {
        let mut sa = f(self.idx(i, q)) * 0.0;
        let mut sb = sa;
        for (d, (a, b)) in wa.iter().zip(wb).enumerate() {
            let off = d as isize - 2;
            sa = sa + f(self.idx(self.shift(i, off), q)) * *a;
            sb = sb + f(self.idx(i, (q as isize + off) as usize)) * *b;
        }
        (sa, sb)
    }

    /// First and second coordinate derivatives of a nodal scalar.
    fn derivatives(&self, f: &[f64], i: usize, q: usize) -> ([f64; 2], [[f64; 2]; 2]) {
        let (fa, fb) = self.stencil(|k| f[k], i, q, &D1, &D1);
        let (fa, fb) = (fa / (12.0 * self.da), fb / (12.0 * self.db));
        let (faa, fbb) = self.stencil(|k| f[k], i, q, &D2, &D2);
        let (faa, fbb) = (faa / (12.0 * self.da * self.da), fbb / (12.0 * self.db * self.db));
        let mut fab = 0.0;
        for (da, wa) in D1.iter().enumerate() {
            for (db, wb) in D1.iter().enumerate() {
                if *wa != 0.0 && *wb != 0.0 {
                    fab += wa * wb * f[self.idx(self.shift(i, da as isize - 2), q + db - 2)];
                }
            }
        }
        let fab = fab / (144.0 * self.da * self.db);
        ([fa, fb], [[faa, fab], [fab, fbb]])
    }

    /// Covariant Hessian `f_ab − Γ^c_ab f_c` in coordinates.
    fn hessian(&self, f: &[f64], i: usize, q: usize) -> ([f64; 2], Matrix2<f64>) {
        let p = &self.points[self.idx(i, q)];
        let (d1, d2) = self.derivatives(f, i, q);
        let hess = Matrix2::from_fn(|a, b| d2[a][b] - (0..2).map(|c| p.christoffel[c][a][b] * d1[c]).sum::<f64>());
        (d1, hess)
    }

    fn laplacian_and_drift(&self, f: &[f64], i: usize, q: usize) -> (f64, f64) {
        let p = &self.points[self.idx(i, q)];
        let ginv = p.metric.try_inverse().unwrap_or_else(Matrix2::zeros);
        let (d1, hess) = self.hessian(f, i, q);
        let lap = (ginv.component_mul(&hess)).sum();
        let xa = [p.x.dot(&p.tangents[0]), p.x.dot(&p.tangents[1])];
        let drift: f64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| ginv[(a, b)] * xa[a] * d1[b]).sum();
        (lap, drift)
    }

    /// `⟨∇f, v⟩` at an interior node for an ambient vector `v`.
    pub fn directional(&self, f: &[f64], i: usize, q: usize, v: &Vector3<f64>) -> f64 {
        let p = &self.points[self.idx(i, q)];
        let ginv = p.metric.try_inverse().unwrap_or_else(Matrix2::zeros);
        let (d1, _) = self.derivatives(f, i, q);
        let xv = [p.tangents[0].dot(v), p.tangents[1].dot(v)];
        (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| ginv[(a, b)] * d1[a] * xv[b]).sum()
    }

    fn field(&self, f: impl Fn(&EmbeddedPoint) -> f64) -> Vec<f64> {
        self.points.iter().map(f).collect()
    }

    /// Drift-Laplacian based `L f = Δf − ½⟨x^T, ∇f⟩ + (|A|² + ½) f` at interior nodes.
    pub fn apply_l(&self, f: &[f64]) -> Vec<(usize, usize, f64)> {
        self.interior()
            .map(|(i, q)| {
                let p = &self.points[self.idx(i, q)];
                let (lap, drift) = self.laplacian_and_drift(f, i, q);
                let a2: f64 = p.a.iter().map(|v| v * v).sum();
                (i, q, lap - 0.5 * drift + (a2 + 0.5) * f[self.idx(i, q)])
            })
            .collect()
    }
}

/// Pointwise `LH − H + Δφ + φ|A|²` at interior nodes.
pub fn simons_trace_residual(grid: &ParametricGrid) -> Result<Vec<f64>> {
    if grid.b.len() < 2 * MARGIN + 1 || grid.a.len() < 2 * MARGIN + 1 {
        return Err(Error::Domain("insufficient interior margin for stencils".into()));
    }
    let h = grid.field(|p| p.h);
    let phi = grid.field(|p| p.phi);
    let lh = grid.apply_l(&h);
    Ok(lh
        .into_iter()
        .map(|(i, q, lhv)| {
            let p = &grid.points[grid.idx(i, q)];
            let (lap_phi, _) = grid.laplacian_and_drift(&phi, i, q);
            let a2: f64 = p.a.iter().map(|v| v * v).sum();
            lhv - p.h + lap_phi + p.phi * a2
        })
        .collect())
}

/// Terms of the effective bound for `∇(A/H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveBoundReport {
    pub lhs: f64,
    /// `Vol(B_R ∩ Σ) e^{−(R−s)²/4} / s²`.
    pub volume_term: f64,
    /// `∫_{B_R} (|Hess φ| + |φ|) e^{−|x|²/4}`.
    pub phi_term: f64,
    /// `lhs / (volume_term + phi_term)`, the smallest admissible `C₂`.
    pub ratio: f64,
}

/// Evaluates both sides of the effective bound on `B_R` with band `s`.
///
/// `δ` is the mean-curvature floor; nodes of `B_R` with `H ≤ δ` make the
/// report fail with the offending location.
pub fn effective_bound_report(grid: &ParametricGrid, radius: f64, band: f64, delta: f64) -> Result<EffectiveBoundReport> {
    if !(band > 0.0 && band < radius) {
        return Err(Error::Input(format!("band s = {band} must lie in (0, R = {radius})")));
    }
    let in_ball = |p: &EmbeddedPoint, r: f64| p.x.norm() <= r;
    for (i, p) in grid.points.iter().enumerate() {
        if in_ball(p, radius) && p.h <= delta {
            return Err(Error::Precondition(format!(
                "H = {:.4} ≤ δ = {delta} at x = ({:.3}, {:.3}, {:.3}) (node {i})",
                p.h, p.x[0], p.x[1], p.x[2]
            )));
        }
    }
    // τ as an ambient tensor; its covariant derivative is the tangential part of
    // the coordinate derivative
    let tau: Vec<Matrix3<f64>> = grid
        .points
        .iter()
        .map(|p| {
            let t = p.a / p.h;
            let mut m = Matrix3::zeros();
            for a in 0..2 {
                for b in 0..2 {
                    m += p.frame[a] * p.frame[b].transpose() * t[(a, b)];
                }
            }
            m
        })
        .collect();
    let phi = grid.field(|p| p.phi);
    let mut lhs = 0.0;
    let mut phi_term = 0.0;
    let mut volume = 0.0;
    for (i, q) in grid.interior() {
        let k = grid.idx(i, q);
        let p = &grid.points[k];
        let dmu = grid.da * grid.db * p.area;
        let gauss = (-p.x.norm_squared() / 4.0).exp();
        if !in_ball(p, radius) {
            continue;
        }
        volume += dmu;
        let proj = Matrix3::identity() - p.normal * p.normal.transpose();
        let (d_a, d_b) = grid.stencil(|k| tau[k], i, q, &D1, &D1);
        let (d_a, d_b) = (d_a / (12.0 * grid.da), d_b / (12.0 * grid.db));
        let ginv = p.metric.try_inverse().unwrap_or_else(Matrix2::zeros);
        let cov = [proj * d_a * proj, proj * d_b * proj];
        let mut grad2 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                grad2 += ginv[(a, b)] * cov[a].component_mul(&cov[b]).sum();
            }
        }
        if in_ball(p, radius - band) {
            lhs += grad2 * gauss * dmu;
        }
        let (_, hess) = grid.hessian(&phi, i, q);
        let mixed = ginv * hess * ginv;
        let hess_norm = hess.component_mul(&mixed).sum().max(0.0).sqrt();
        phi_term += (hess_norm + p.phi.abs()) * gauss * dmu;
    }
    let volume_term = volume * (-(radius - band).powi(2) / 4.0).exp() / (band * band);
    let rhs = volume_term + phi_term;
    let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(EffectiveBoundReport { lhs, volume_term, phi_term, ratio })
}

/// Round sphere of radius `radius` in polar coordinates `(azimuth, polar)`.
pub fn sphere_parametrization(radius: f64) -> impl Fn(f64, f64) -> [Vector3<f64>; 6] {
    move |t: f64, p: f64| {
        let (st, ct) = t.sin_cos();
        let (sp, cp) = p.sin_cos();
        let r = radius;
        // azimuth runs clockwise so that x_a × x_b points outward
        [
            Vector3::new(r * sp * ct, -r * sp * st, r * cp),
            Vector3::new(-r * sp * st, -r * sp * ct, 0.0),
            Vector3::new(r * cp * ct, -r * cp * st, -r * sp),
            Vector3::new(-r * sp * ct, r * sp * st, 0.0),
            Vector3::new(-r * cp * st, -r * cp * ct, 0.0),
            Vector3::new(-r * sp * ct, r * sp * st, -r * cp),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::basis::SpectralBasis;
    use std::f64::consts::PI;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn cylinder_residual_vanishes() {
        let b = SpectralBasis::new(8, 6, 12.0).unwrap();
        let cyl = CylinderSpec::standard(1, 2).unwrap();
        let g = ParametricGrid::from_graph(&cyl, &GraphField::zero(&b), 16, 21, 4.0).unwrap();
        assert!(max_abs(&simons_trace_residual(&g).unwrap()) < 1e-12);
        let rep = effective_bound_report(&g, 4.0, 1.0, 0.05).unwrap();
        assert!(rep.lhs < 1e-20);
    }

    #[test]
    fn shrinking_sphere_residual_vanishes() {
        // S²_2: outward normal, H = 1, |A|² = ½, φ = 0
        let a: Vec<f64> = (0..32).map(|i| 2.0 * PI * i as f64 / 32.0).collect();
        let b: Vec<f64> = (0..17).map(|q| 0.5 + 2.0 * q as f64 / 16.0).collect();
        let g = ParametricGrid::from_parametrization(a, b, true, sphere_parametrization(2.0)).unwrap();
        for p in &g.points {
            assert!((p.h - 1.0).abs() < 1e-13);
            assert!(p.phi.abs() < 1e-13);
        }
        assert!(max_abs(&simons_trace_residual(&g).unwrap()) < 1e-10);
    }

    #[test]
    fn residual_converges_at_fourth_order() {
        let basis = SpectralBasis::new(8, 6, 12.0).unwrap();
        let cyl = CylinderSpec::standard(1, 2).unwrap();
        let u = GraphField::from_modes(&basis, &[(0, 2, 0.02), (2, 1, 0.01)]).unwrap();
        let r1 = max_abs(&simons_trace_residual(&ParametricGrid::from_graph(&cyl, &u, 32, 41, 3.0).unwrap()).unwrap());
        let r2 = max_abs(&simons_trace_residual(&ParametricGrid::from_graph(&cyl, &u, 64, 81, 3.0).unwrap()).unwrap());
        let order = (r1 / r2).log2();
        assert!(order > 3.5, "order {order} ({r1:.3e} → {r2:.3e})");
    }

    #[test]
    fn low_mean_curvature_is_a_precondition_failure() {
        let a: Vec<f64> = (0..16).map(|i| 2.0 * PI * i as f64 / 16.0).collect();
        let b: Vec<f64> = (0..9).map(|q| 0.5 + 0.2 * q as f64).collect();
        let g = ParametricGrid::from_parametrization(a, b, true, sphere_parametrization(2.0)).unwrap();
        let err = effective_bound_report(&g, 3.0, 0.5, 1.5).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
