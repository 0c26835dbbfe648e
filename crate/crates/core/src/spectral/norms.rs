//! Gaussian norms on the cylinder, kernel projection, the Poincaré check and
//! the quadratic norm `‖·‖₂`.
//!
//! Integrals are `∫ f e^{−|x|²/4} dμ` over `S¹_{√2} × R` without the
//! `(4π)^{−n/2}` prefactor, so `‖1‖² = 4π^{3/2}√2 e^{−1/2}`.

use std::sync::Arc;

use crate::error::Result;
use crate::spectral::basis::{GraphField, NodalJet, SpectralBasis, RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2,
    W12,
    W22,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Full,
    Ball(f64),
}

/// Norm value, with a bound on the Gaussian tail beyond the truncation when the
/// region reaches past it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    pub value: f64,
    pub tail_warning: Option<f64>,
}

fn integrate(basis: &SpectralBasis, jet: &NodalJet, region: Region, f: impl Fn(usize, usize) -> f64) -> f64 {
    let wt = basis.theta_weight() * RADIUS * (-RADIUS * RADIUS / 4.0).exp();
    let wy = basis.y_weights();
    let mut total = 0.0;
    for (q, &y) in jet.y.iter().enumerate() {
        if let Region::Ball(r) = region {
            if RADIUS * RADIUS + y * y > r * r {
                continue;
            }
        }
        for i in 0..jet.theta.len() {
            total += wt * wy[q] * f(i, q);
        }
    }
    total
}

fn squared(basis: &SpectralBasis, jet: &NodalJet, which: NormKind, region: Region) -> f64 {
    let r2 = RADIUS * RADIUS;
    integrate(basis, jet, region, |i, q| {
        let u = jet.u[(i, q)];
        let grad = jet.u_t[(i, q)].powi(2) / r2 + jet.u_y[(i, q)].powi(2);
        let hess = jet.u_tt[(i, q)].powi(2) / (r2 * r2) + 2.0 * jet.u_ty[(i, q)].powi(2) / r2 + jet.u_yy[(i, q)].powi(2);
        match which {
            NormKind::L1 => u.abs(),
            NormKind::L2 => u * u,
            NormKind::W12 => u * u + grad,
            NormKind::W22 => u * u + grad + hess,
        }
    })
}

/// Gaussian norm of `u` on the reference cylinder.
pub fn gaussian_norm(u: &GraphField, which: NormKind, region: Region) -> Result<NormValue> {
    let basis = u.basis();
    let jet = u.jet();
    let raw = squared(basis, &jet, which, region);
    let value = if which == NormKind::L1 { raw } else { raw.sqrt() };
    let l = basis.truncation();
    let tail_warning = match region {
        Region::Ball(r) if r * r > RADIUS * RADIUS + l * l => Some((-l * l / 4.0).exp()),
        Region::Full => None,
        _ => None,
    };
    Ok(NormValue { value, tail_warning })
}

/// Kernel modes of the `k = 1, n = 2` basis: `y²−2`, `y cos θ`, `y sin θ`.
pub fn kernel_indices(basis: &SpectralBasis) -> Vec<usize> {
    (0..basis.len()).filter(|&i| basis.eigenvalues()[i].abs() < 1e-12).collect()
}

/// `L²`-orthogonal splitting `u = u_𝒦 + u_⊥`.
pub fn project_kernel(u: &GraphField) -> (GraphField, GraphField) {
    let basis = u.basis();
    let mut kern = vec![0.0; basis.len()];
    for i in kernel_indices(basis) {
        kern[i] = u.coeffs()[i];
    }
    let kern = GraphField::from_coeffs(basis, kern).expect("same basis");
    let perp = u.sub(&kern);
    (kern, perp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// `‖|x|u‖² ≤ (4(n−k) + 2k)‖u‖² + 16‖∂_y u‖²` with `k = 1, n = 2`.
pub fn poincare_check(u: &GraphField) -> PoincareReport {
    let basis = u.basis();
    let jet = u.jet();
    let lhs = integrate(basis, &jet, Region::Full, |i, q| (RADIUS * RADIUS + jet.y[q] * jet.y[q]) * jet.u[(i, q)].powi(2));
    let u2 = integrate(basis, &jet, Region::Full, |i, q| jet.u[(i, q)].powi(2));
    let uy2 = integrate(basis, &jet, Region::Full, |i, q| jet.u_y[(i, q)].powi(2));
    let rhs = 6.0 * u2 + 16.0 * uy2;
    PoincareReport { lhs, rhs, ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 }, pass: lhs <= rhs * (1.0 + 1e-12) }
}

/// `‖u² + |∇u|² + |Hess_u(·, R)|² + (1+|x|)^{−1}|Hess_u|²‖_{L²}`.
pub fn quadratic_norm(u: &GraphField) -> f64 {
    let basis = u.basis();
    let jet = u.jet();
    let r2 = RADIUS * RADIUS;
    integrate(basis, &jet, Region::Full, |i, q| {
        let (uu, ut, uy, utt, uty, uyy) =
            (jet.u[(i, q)], jet.u_t[(i, q)], jet.u_y[(i, q)], jet.u_tt[(i, q)], jet.u_ty[(i, q)], jet.u_yy[(i, q)]);
        let grad = ut * ut / r2 + uy * uy;
        let hess_axis = uty * uty / r2 + uyy * uyy;
        let hess = utt * utt / (r2 * r2) + 2.0 * uty * uty / r2 + uyy * uyy;
        let x = (r2 + jet.y[q] * jet.y[q]).sqrt();
        let v = uu * uu + grad + hess_axis + hess / (1.0 + x);
        v * v
    })
    .sqrt()
}

/// `C_𝒦 = max ‖v‖₂ / ‖v‖²` over unit kernel elements, sampled on a Fibonacci
/// grid of the unit sphere of the three-dimensional kernel.
pub fn kernel_quadratic_constant(basis: &Arc<SpectralBasis>, samples: usize) -> f64 {
    let idx = kernel_indices(basis);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = 0.0f64;
    for s in 0..samples {
        let z = 1.0 - 2.0 * (s as f64 + 0.5) / samples as f64;
        let rho = (1.0 - z * z).sqrt();
        let phi = golden * s as f64;
        let dir = [rho * phi.cos(), rho * phi.sin(), z];
        let mut coeffs = vec![0.0; basis.len()];
        for (c, &i) in dir.iter().zip(&idx) {
            coeffs[i] = *c;
        }
        let v = GraphField::from_coeffs(basis, coeffs).expect("same basis");
        best = best.max(quadratic_norm(&v));
    }
    best
}

/// `⟨u, 𝓛v⟩ + ⟨∇u, ∇v⟩` for the tapered fields, which should vanish.
pub fn integration_by_parts_defect(u: &GraphField, v: &GraphField) -> f64 {
    let basis = u.basis();
    let ju = u.tapered_jet();
    let jv = v.tapered_jet();
    let r2 = RADIUS * RADIUS;
    integrate(basis, &ju, Region::Full, |i, q| {
        let lv = jv.u_tt[(i, q)] / r2 + jv.u_yy[(i, q)] - jv.y[q] / 2.0 * jv.u_y[(i, q)];
        let grad = ju.u_t[(i, q)] * jv.u_t[(i, q)] / r2 + ju.u_y[(i, q)] * jv.u_y[(i, q)];
        ju.u[(i, q)] * lv + grad
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn basis() -> Arc<SpectralBasis> {
        SpectralBasis::new(16, 16, 12.0).unwrap()
    }

    #[test]
    fn closed_form_norms() {
        let b = basis();
        let one = GraphField::from_modes(&b, &[(0, 0, 1.0)]).unwrap();
        let n1 = gaussian_norm(&one, NormKind::L2, Region::Full).unwrap().value;
        assert_relative_eq!(n1 * n1, 4.0 * PI.powf(1.5) * 2f64.sqrt() * (-0.5f64).exp(), epsilon = 1e-11);
        assert!((n1 * n1 - 19.10).abs() < 0.01);
        let y = GraphField::from_modes(&b, &[(0, 1, 1.0)]).unwrap();
        let ny = gaussian_norm(&y, NormKind::L2, Region::Full).unwrap().value;
        assert_relative_eq!(ny * ny / (n1 * n1), 2.0, epsilon = 1e-12);
        // spectral Parseval agrees with nodal quadrature
        assert_relative_eq!(y.l2_norm(), ny, epsilon = 1e-12);
    }

    #[test]
    fn ball_norms_are_monotone() {
        let b = basis();
        let u = GraphField::from_modes(&b, &[(1, 3, 0.4), (0, 2, -1.0)]).unwrap();
        let mut prev = 0.0;
        for r in [1.5, 2.0, 4.0, 7.0, 11.0] {
            let v = gaussian_norm(&u, NormKind::W12, Region::Ball(r)).unwrap();
            assert!(v.value >= prev);
            assert!(v.tail_warning.is_none());
            prev = v.value;
        }
        assert!(gaussian_norm(&u, NormKind::L2, Region::Ball(20.0)).unwrap().tail_warning.is_some());
    }

    #[test]
    fn kernel_projection_splits_modes() {
        let b = basis();
        let u = GraphField::from_modes(&b, &[(0, 2, 1.0), (-2, 0, 1.0)]).unwrap();
        let (k, p) = project_kernel(&u);
        let expected = GraphField::from_modes(&b, &[(0, 2, 1.0)]).unwrap();
        assert!(k.sub(&expected).l2_norm() < 1e-14);
        assert_relative_eq!(u.inner(&u), k.inner(&k) + p.inner(&p), epsilon = 1e-12);
        let (kk, pp) = project_kernel(&k);
        assert!(pp.l2_norm() < 1e-15 && kk.sub(&k).l2_norm() < 1e-15);
    }

    #[test]
    fn poincare_for_constants() {
        let b = basis();
        let one = GraphField::from_modes(&b, &[(0, 0, 1.0)]).unwrap();
        let rep = poincare_check(&one);
        let n2 = one.inner(&one);
        assert_relative_eq!(rep.lhs / n2, 4.0, epsilon = 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn quadratic_norm_is_two_homogeneous() {
        let b = basis();
        let v = GraphField::from_modes(&b, &[(1, 1, 0.3), (0, 2, 0.2), (3, 0, 0.1)]).unwrap();
        assert_relative_eq!(quadratic_norm(&v.scaled(3.0)), 9.0 * quadratic_norm(&v), epsilon = 1e-12);
        assert!(kernel_quadratic_constant(&b, 64).is_finite());
    }

    #[test]
    fn drift_laplacian_is_symmetric() {
        let b = basis();
        let u = GraphField::from_modes(&b, &[(1, 2, 0.3), (0, 0, 1.0)]).unwrap();
        let v = GraphField::from_modes(&b, &[(2, 3, 0.5), (-1, 1, 0.2)]).unwrap();
        assert!(integration_by_parts_defect(&u, &v).abs() < 1e-8);
    }
}
