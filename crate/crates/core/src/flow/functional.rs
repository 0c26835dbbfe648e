//! Gaussian area `F`, `φ`-norms, Gaussian densities, entropy and the
//! MCF ↔ rescaled-time conversion.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::graph::{GraphEval, GraphPoint};
use crate::geometry::surface::embed_point;
use crate::spectral::basis::{GraphField, SpectralBasis, RADIUS};

/// Gaussian area `(4π)^{−1} ∫_Σ e^{−|x|²/4}` of the graph evaluated on the
/// quadrature grid. Uses `|p + u n|² = |p|² + u² + 2ru`.
///
/// All surface integrals here cover the modelled part `|y| ≤ L` of the graph;
/// the taper band beyond it is a numerical closure, not part of the flow.
/// For the cylinder the omitted part is below `e^{−L²/4}` relative.
pub fn f_value(basis: &SpectralBasis, eval: &GraphEval) -> f64 {
    weighted_sum(basis, eval, None, |_, _| 1.0) / (4.0 * PI)
}

/// `∫_{Σ ∩ B_R} g e^{−|x|²/4} dμ` on the quadrature grid (over `|y| ≤ L`).
pub fn weighted_sum(basis: &SpectralBasis, eval: &GraphEval, radius: Option<f64>, g: impl Fn(usize, usize) -> f64) -> f64 {
    let wt = basis.theta_weight() * RADIUS;
    let wy = basis.y_weights();
    let r2 = radius.map(|r| r * r);
    let l = basis.truncation();
    let mut total = 0.0;
    for (q, &y) in eval.jet.y.iter().enumerate() {
        if y.abs() > l {
            continue;
        }
        for i in 0..eval.jet.theta.len() {
            let rho = RADIUS + eval.jet.u[(i, q)];
            if let Some(r2) = r2 {
                if rho * rho + y * y > r2 {
                    continue;
                }
            }
            total += wt * wy[q] * eval.nu[(i, q)] * (-(rho * rho) / 4.0).exp() * g(i, q);
        }
    }
    total
}

/// `φ` norms of one state: `(‖φ‖_{L¹(B_R)}, ‖φ‖_{L²(B_R)}, ‖φ‖_{L²})`.
pub fn phi_norms(basis: &SpectralBasis, eval: &GraphEval, radius: f64) -> (f64, f64, f64) {
    let l1 = weighted_sum(basis, eval, Some(radius), |i, q| eval.phi[(i, q)].abs());
    let l2r = weighted_sum(basis, eval, Some(radius), |i, q| eval.phi[(i, q)].powi(2)).sqrt();
    let l2 = weighted_sum(basis, eval, None, |i, q| eval.phi[(i, q)].powi(2)).sqrt();
    (l1, l2r, l2)
}

/// `‖𝓜(u)‖` in the Gaussian `L²` norm of the reference cylinder (over `|y| ≤ L`).
pub fn gradient_norm(basis: &SpectralBasis, eval: &GraphEval) -> f64 {
    let wt = basis.theta_weight() * RADIUS * (-RADIUS * RADIUS / 4.0).exp();
    let l = basis.truncation();
    let mut total = 0.0;
    for (q, w) in basis.y_weights().iter().enumerate() {
        if eval.jet.y[q].abs() > l {
            continue;
        }
        for i in 0..eval.jet.theta.len() {
            total += wt * w * eval.m[(i, q)].powi(2);
        }
    }
    total.sqrt()
}

/// `F` of the cylinder `S¹_{√2} × R`: `√π · √2 · e^{−1/2}`.
pub fn cylinder_f() -> f64 {
    PI.sqrt() * RADIUS * (-0.5f64).exp()
}

/// `F` of the round cylinder of radius `r`: `√π r e^{−r²/4}`.
pub fn radial_f(r: f64) -> f64 {
    PI.sqrt() * r * (-r * r / 4.0).exp()
}

/// Positions and area weights of a sampled surface.
#[derive(Debug, Clone, Default)]
pub struct SampledSurface {
    pub x: Vec<Vector3<f64>>,
    pub area: Vec<f64>,
}

impl SampledSurface {
    /// `(4πt)^{−1} ∫_Σ e^{−|x−x₀|²/(4t)}`.
    pub fn gaussian_area(&self, x0: &Vector3<f64>, t: f64) -> f64 {
        let c = 1.0 / (4.0 * t);
        self.x.iter().zip(&self.area).map(|(x, a)| a * (-(x - x0).norm_squared() * c).exp()).sum::<f64>() / (4.0 * PI * t)
    }

    /// Uniform trapezoid sampling of the tapered graph of `u` over
    /// `θ ∈ [0, 2π)`, `y ∈ [y_lo, y_hi]`. Beyond the taper support the graph
    /// is the cylinder itself.
    pub fn from_graph(u: &GraphField, n_theta: usize, y_lo: f64, y_hi: f64, n_y: usize) -> Result<Self> {
        if n_theta < 4 || n_y < 2 || !(y_hi > y_lo) {
            return Err(Error::Input("degenerate sampling grid".into()));
        }
        let basis = u.basis();
        let theta: Vec<f64> = (0..n_theta).map(|i| 2.0 * PI * i as f64 / n_theta as f64).collect();
        let dy = (y_hi - y_lo) / (n_y - 1) as f64;
        let y: Vec<f64> = (0..n_y).map(|q| y_lo + dy * q as f64).collect();
        let l = basis.taper().outer();
        let inside: Vec<f64> = y.iter().copied().filter(|v| v.abs() < l).collect();
        let jet = basis.grid_jet(u.coeffs(), &theta, &inside, true);
        let dtheta = 2.0 * PI / n_theta as f64;
        let mut out = Self::default();
        let mut col = 0;
        for (q, &yy) in y.iter().enumerate() {
            let end = if q == 0 || q + 1 == n_y { 0.5 } else { 1.0 };
            let is_inside = yy.abs() < l;
            for (i, &th) in theta.iter().enumerate() {
                let p = if is_inside { GraphEval::point(&jet, i, col) } else { GraphPoint::default() };
                let e = embed_point(th, yy, &p)?;
                out.x.push(e.x);
                out.area.push(e.area * dtheta * dy * end);
            }
            if is_inside {
                col += 1;
            }
        }
        Ok(out)
    }
}

/// Local Gaussian density `(4πτ)^{−1} ∫ e^{−|x−x₀|²/(4τ)}` of the graph,
/// integrated on a grid adapted to the scale `τ ∈ (0, ½]`.
pub fn local_gaussian_density(u: &GraphField, x0: &Vector3<f64>, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 0.5) {
        return Err(Error::Input(format!("scale τ = {tau} outside (0, 1/2]")));
    }
    let h = tau.sqrt() / 8.0;
    let reach = 13.0 * tau.sqrt();
    let n_theta = ((2.0 * PI * (RADIUS + 2.0) / h).ceil() as usize).max(64);
    let n_y = ((2.0 * reach / h).ceil() as usize).max(16);
    let s = SampledSurface::from_graph(u, n_theta, x0[2] - reach, x0[2] + reach, n_y)?;
    Ok(s.gaussian_area(x0, tau))
}

/// Result of the entropy search.
#[derive(Debug, Clone, Copy)]
pub struct EntropyEstimate {
    pub value: f64,
    pub center: Vector3<f64>,
    pub scale: f64,
}

/// `sup_{x₀, t₀} F_{x₀,t₀}(Σ)` over `x₀ ∈ [−3,3]³`, `t₀ ∈ [¼, 4]`: coarse grid
/// search followed by a shrinking pattern search around the best node.
pub fn entropy_estimate(u: &GraphField) -> Result<EntropyEstimate> {
    let l = u.basis().taper().outer().max(30.0);
    let s = SampledSurface::from_graph(u, 64, -l, l, (20.0 * l) as usize + 1)?;
    let mut best = EntropyEstimate { value: f64::NEG_INFINITY, center: Vector3::zeros(), scale: 1.0 };
    let coords = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    for &a in &coords {
        for &b in &coords {
            for &c in &coords {
                let x0 = Vector3::new(a, b, c);
                for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
                    let v = s.gaussian_area(&x0, t);
                    if v > best.value {
                        best = EntropyEstimate { value: v, center: x0, scale: t };
                    }
                }
            }
        }
    }
    let mut step = 0.5;
    while step > 1e-4 {
        let mut improved = false;
        for d in 0..4 {
            for sign in [-1.0, 1.0] {
                let mut c = best.center;
                let mut t = best.scale;
                if d < 3 {
                    c[d] = (c[d] + sign * step).clamp(-3.0, 3.0);
                } else {
                    t = (t * (1.0 + sign * step)).clamp(0.25, 4.0);
                }
                let v = s.gaussian_area(&c, t);
                if v > best.value + 1e-15 {
                    best = EntropyEstimate { value: v, center: c, scale: t };
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(best)
}

/// `s = −log(−t)` and the rescaling factor `1/√(−t)`.
pub fn mcf_to_rescaled(t: f64) -> Result<(f64, f64)> {
    if !(t < 0.0) {
        return Err(Error::Domain(format!("MCF time must be negative, got {t}")));
    }
    Ok((-(-t).ln(), 1.0 / (-t).sqrt()))
}

/// `t = −e^{−s}`.
pub fn rescaled_to_mcf(s: f64) -> f64 {
    -(-s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::graph::GraphEval;
    use approx::assert_relative_eq;

    #[test]
    fn cylinder_gaussian_area() {
        let b = SpectralBasis::new(16, 16, 12.0).unwrap();
        let u = GraphField::zero(&b);
        let eval = GraphEval::new(u.tapered_jet()).unwrap();
        assert_relative_eq!(f_value(&b, &eval), cylinder_f(), epsilon = 1e-13);
        assert!((cylinder_f() - 1.52035).abs() < 1e-5);
    }

    #[test]
    fn radial_family_peaks_at_sqrt_two() {
        // golden-section search on the closed form
        let (mut a, mut b) = (0.5f64, 3.0f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if radial_f(c) > radial_f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        assert!((0.5 * (a + b) - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn time_conversions() {
        assert_eq!(mcf_to_rescaled(-1.0).unwrap().0, 0.0);
        let (s, scale) = mcf_to_rescaled(-(-2.0f64).exp()).unwrap();
        assert_relative_eq!(s, 2.0, epsilon = 1e-15);
        assert_relative_eq!(scale, std::f64::consts::E, epsilon = 1e-15);
        for t in [-0.3, -1.7, -1e-3] {
            let (s, _) = mcf_to_rescaled(t).unwrap();
            assert!((rescaled_to_mcf(s) - t).abs() <= 1e-15 * t.abs().max(1.0));
        }
        assert!(mcf_to_rescaled(0.0).is_err());
    }

    #[test]
    fn densities() {
        let b = SpectralBasis::new(8, 4, 12.0).unwrap();
        let u = GraphField::zero(&b);
        let on = Vector3::new(RADIUS, 0.0, 0.0);
        let d = local_gaussian_density(&u, &on, 0.01).unwrap();
        assert!((d - 1.0).abs() < 2e-2, "{d}");
        let far = Vector3::new(RADIUS + 5.0 * 0.5f64.sqrt(), 0.0, 0.0);
        assert!(local_gaussian_density(&u, &far, 0.5).unwrap() < 0.01);
        // hyperplane through x0
        let mut plane = SampledSurface::default();
        let h = 0.05;
        for i in -200..=200 {
            for j in -200..=200 {
                plane.x.push(Vector3::new(i as f64 * h, j as f64 * h, 0.0));
                plane.area.push(h * h);
            }
        }
        assert_relative_eq!(plane.gaussian_area(&Vector3::zeros(), 0.3), 1.0, epsilon = 1e-10);
    }
}
