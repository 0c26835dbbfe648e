//! Quadrature rules for the Gaussian weight `e^{-y^2/4}` on the axis and the
//! uniform trapezoid rule on the circle.
//!
//! The Gauss–Hermite nodes are obtained with the Golub–Welsch eigenvalue
//! construction and then polished by Newton iteration on the orthonormal
//! three-term recurrence. Weights come from the Christoffel function, which
//! keeps relative accuracy even for the far nodes where the weights are tiny.

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Gauss–Hermite rule for `∫ f(y) e^{-y²/4} dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Orthonormal physicists' Hermite values `p_0..p_{len-1}` at `x`, with
/// `∫ p_m p_l e^{-x²} dx = δ_ml`.
fn orthonormal_physicists(x: f64, len: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(len);
    if len == 0 {
        return p;
    }
    p.push(PI.powf(-0.25));
    if len > 1 {
        p.push(x * 2f64.sqrt() * p[0]);
    }
    for m in 1..len.saturating_sub(1) {
        let mf = m as f64;
        let next = x * (2.0 / (mf + 1.0)).sqrt() * p[m] - (mf / (mf + 1.0)).sqrt() * p[m - 1];
        p.push(next);
    }
    p
}

impl GaussHermite {
    /// Builds a rule with `count` nodes; exact for polynomials of degree `2·count − 1`.
    pub fn new(count: usize) -> Self {
        assert!(count > 0, "Gauss–Hermite rule needs at least one node");
        let mut jacobi = DMatrix::<f64>::zeros(count, count);
        for i in 0..count - 1 {
            let off = ((i + 1) as f64 * 0.5).sqrt();
            jacobi[(i, i + 1)] = off;
            jacobi[(i + 1, i)] = off;
        }
        let mut xi: Vec<f64> = jacobi.symmetric_eigen().eigenvalues.iter().copied().collect();
        xi.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut nodes = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for &x0 in &xi {
            let mut x = x0;
            for _ in 0..8 {
                let p = orthonormal_physicists(x, count + 1);
                let value = p[count];
                let deriv = (2.0 * count as f64).sqrt() * p[count - 1];
                if deriv == 0.0 {
                    break;
                }
                let dx = value / deriv;
                x -= dx;
                if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
            let p = orthonormal_physicists(x, count);
            let christoffel: f64 = p.iter().map(|v| v * v).sum();
            // y = 2ξ maps e^{-ξ²} onto e^{-y²/4}
            nodes.push(2.0 * x);
            weights.push(2.0 / christoffel);
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ f(y) e^{-y²/4} dy`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&y, &w)| w * f(y)).sum()
    }
}

/// Uniform nodes `2πi/N` on the circle.
pub fn circle_nodes(count: usize) -> Vec<f64> {
    (0..count).map(|i| 2.0 * PI * i as f64 / count as f64).collect()
}

/// Trapezoid weight for a uniform periodic grid of `count` nodes.
pub fn circle_weight(count: usize) -> f64 {
    2.0 * PI / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_gaussian_moments() {
        let rule = GaussHermite::new(20);
        let mass = (4.0 * PI).sqrt();
        assert_relative_eq!(rule.integrate(|_| 1.0), mass, max_relative = 1e-14);
        assert_relative_eq!(rule.integrate(|y| y * y), 2.0 * mass, max_relative = 1e-13);
        assert_relative_eq!(rule.integrate(|y| y.powi(4)), 12.0 * mass, max_relative = 1e-13);
        assert!(rule.integrate(|y| y.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn large_rule_stays_accurate() {
        let rule = GaussHermite::new(129);
        let mass = (4.0 * PI).sqrt();
        assert_relative_eq!(rule.integrate(|_| 1.0), mass, max_relative = 1e-13);
        // E[y^8] for y ~ N(0, 2) is 105·2^4
        assert_relative_eq!(rule.integrate(|y| y.powi(8)), 1680.0 * mass, max_relative = 1e-12);
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trapezoid_is_exact_for_trig_polynomials() {
        let nodes = circle_nodes(16);
        let w = circle_weight(16);
        let s: f64 = nodes.iter().map(|t| (3.0 * t).cos().powi(2)).sum::<f64>() * w;
        assert_relative_eq!(s, PI, max_relative = 1e-14);
    }
}
