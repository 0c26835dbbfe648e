//! Offset quantities of a normal graph over a cylinder.
//!
//! For a point `p` of the cylinder, a normal height `s` and a tangent vector
//! `y` (the gradient of the graph function), the graph has speed
//! `w = √(1 + |B⁻¹y|²)`, relative area element `ν = w det B` and support
//! function `η = (⟨p,n⟩ + s − ⟨p, B⁻¹y⟩)/w`, where `B = Id − sA(p)`.
//!
//! On a cylinder `B` is diagonal in the tangent basis returned by
//! [`CylinderSpec::tangent_basis`]: `1 + s/√(2k)` on the sphere directions
//! and `1` on the axis directions. It degenerates only on the focal side,
//! at `s = −√(2k)`.

use nalgebra::{DMatrix, DVector};

use super::cylinder::{cylinder_shape_operator, CylinderSpec};
use crate::error::{Error, Result};

/// Offset data at `(p, s, y)`.
#[derive(Debug, Clone)]
pub struct OffsetJet {
    pub b: DMatrix<f64>,
    pub w: f64,
    pub nu: f64,
    pub eta: f64,
}

/// Second-order Taylor data of `w`, `ν`, `η` at `(p, 0, 0)`.
///
/// Mixed partials with `p` vanish on a cylinder because `A` is parallel.
#[derive(Debug, Clone)]
pub struct TaylorCoefficients {
    pub w: f64,
    pub dw_ds: f64,
    pub dw_dy: DVector<f64>,
    pub d2w_dy2: DMatrix<f64>,
    pub nu: f64,
    pub dnu_ds: f64,
    pub d2nu_ds2: f64,
    pub dnu_dy: DVector<f64>,
    pub d2nu_dsdy: DVector<f64>,
    pub d2nu_dy2: DMatrix<f64>,
    pub d2nu_dpds: DVector<f64>,
    pub eta: f64,
    pub deta_ds: f64,
    pub deta_dy: DVector<f64>,
}

fn check_height(cyl: &CylinderSpec, s: f64) -> Result<()> {
    let focal = cyl.radius();
    if !s.is_finite() {
        return Err(Error::Input(format!("non-finite offset height {s}")));
    }
    if s <= -focal {
        return Err(Error::SingularOffset { height: s, focal });
    }
    Ok(())
}

/// Tangential component of `p` in the basis used for `y`.
fn tangential_coordinates(cyl: &CylinderSpec, p: &DVector<f64>) -> Result<DVector<f64>> {
    let basis = cyl.tangent_basis(p)?;
    Ok(DVector::from_iterator(basis.len(), basis.iter().map(|e| e.dot(p))))
}

/// Evaluates `B`, `w`, `ν`, `η` at `(p, s, y)`, with `y` given in the tangent
/// basis of [`CylinderSpec::tangent_basis`].
///
/// Only the focal side is singular: `s ≤ −√(2k)` is rejected, while outward
/// offsets of any size are regular.
pub fn eval_offset_jet(cyl: &CylinderSpec, p: &DVector<f64>, s: f64, y: &DVector<f64>) -> Result<OffsetJet> {
    check_height(cyl, s)?;
    if y.len() != cyl.n() {
        return Err(Error::Input(format!("tangent vector has dimension {}, expected {}", y.len(), cyl.n())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite tangent vector".into()));
    }
    let shape = cylinder_shape_operator(cyl, p)?;
    let n = cyl.n();
    let b = DMatrix::<f64>::identity(n, n) - &shape.matrix * s;
    let binv_y = DVector::from_iterator(n, (0..n).map(|i| y[i] / b[(i, i)]));
    let w = (1.0 + binv_y.norm_squared()).sqrt();
    let det: f64 = (0..n).map(|i| b[(i, i)]).product();
    let nu = w * det;
    let p_tan = tangential_coordinates(cyl, p)?;
    let support = cyl.normal(p)?.dot(p);
    let eta = (support + s - p_tan.dot(&binv_y)) / w;
    Ok(OffsetJet { b, w, nu, eta })
}

/// Exact Taylor coefficients at `(p, 0, 0)`.
pub fn taylor_coefficients(cyl: &CylinderSpec, p: &DVector<f64>) -> Result<TaylorCoefficients> {
    let shape = cylinder_shape_operator(cyl, p)?;
    let n = cyl.n();
    let h = shape.mean_curvature;
    let a2: f64 = shape.matrix.iter().map(|v| v * v).sum();
    let p_tan = tangential_coordinates(cyl, p)?;
    Ok(TaylorCoefficients {
        w: 1.0,
        dw_ds: 0.0,
        dw_dy: DVector::zeros(n),
        d2w_dy2: DMatrix::identity(n, n),
        nu: 1.0,
        dnu_ds: h,
        d2nu_ds2: h * h - a2,
        dnu_dy: DVector::zeros(n),
        d2nu_dsdy: DVector::zeros(n),
        d2nu_dy2: DMatrix::identity(n, n),
        // ∂_p ∂_s ν = ∇H = 0 on a cylinder
        d2nu_dpds: DVector::zeros(n),
        eta: cyl.normal(p)?.dot(p),
        deta_ds: 1.0,
        deta_dy: -p_tan,
    })
}

/// `k = 1, n = 2` closed forms used on the nodal grid.
///
/// Coordinates: `y1` is the sphere-direction gradient component, `y2` the axis
/// component, `r = √2`, `b = 1 + s/r`, and `ν = √(b²(1+y2²) + y1²)`.
/// Every entry is an exact partial derivative of that expression.
pub mod circle {
    /// Values of `ν` and the partial derivatives that enter the graph mean
    /// curvature.
    #[derive(Debug, Clone, Copy)]
    pub struct NuJet {
        pub w: f64,
        pub nu: f64,
        pub ds: f64,
        pub dy1: f64,
        pub dy2: f64,
        pub dy1y1: f64,
        pub dy2y2: f64,
        pub dy1y2: f64,
        pub dsdy1: f64,
        pub dsdy2: f64,
    }

    pub fn nu_jet(r: f64, s: f64, y1: f64, y2: f64) -> NuJet {
        let b = 1.0 + s / r;
        let q = 1.0 + y2 * y2;
        let nu2 = b * b * q + y1 * y1;
        let nu = nu2.sqrt();
        let nu3 = nu2 * nu;
        let db = 1.0 / r;
        NuJet {
            w: nu / b,
            nu,
            ds: b * db * q / nu,
            dy1: y1 / nu,
            dy2: b * b * y2 / nu,
            dy1y1: b * b * q / nu3,
            dy2y2: b * b * (b * b + y1 * y1) / nu3,
            dy1y2: -b * b * y1 * y2 / nu3,
            dsdy1: -y1 * b * db * q / nu3,
            dsdy2: 2.0 * b * db * y2 / nu - b * b * y2 * b * db * q / nu3,
        }
    }

    /// Support function `η = (r + s − z·y2)/w` at axial coordinate `z`.
    pub fn eta(r: f64, s: f64, z: f64, y2: f64, w: f64) -> f64 {
        (r + s - z * y2) / w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn point(cyl: &CylinderSpec, angle: f64, axial: &[f64]) -> DVector<f64> {
        let mut q = DVector::zeros(cyl.n() + 1);
        q[0] = cyl.radius() * angle.cos();
        q[1] = cyl.radius() * angle.sin();
        for (i, a) in axial.iter().enumerate() {
            q[cyl.k() + 1 + i] = *a;
        }
        cyl.frame() * q
    }

    #[test]
    fn radial_offsets_match_the_offset_cylinder() {
        let cyl = CylinderSpec::standard(1, 2).unwrap();
        let p = point(&cyl, 0.4, &[0.9]);
        let r = 2f64.sqrt();
        for s in [-1.0, -0.3, 0.0, 0.2, 1.5, 4.0] {
            let jet = eval_offset_jet(&cyl, &p, s, &DVector::zeros(2)).unwrap();
            assert_relative_eq!(jet.nu, (r + s) / r, epsilon = 1e-14);
            assert_relative_eq!(jet.eta, r + s, epsilon = 1e-14);
            assert_eq!(jet.w, 1.0);
        }
    }

    #[test]
    fn focal_offset_is_singular() {
        let cyl = CylinderSpec::standard(1, 2).unwrap();
        let p = point(&cyl, 0.0, &[0.0]);
        let err = eval_offset_jet(&cyl, &p, -2f64.sqrt(), &DVector::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::SingularOffset { .. }));
    }

    #[test]
    fn taylor_coefficients_match_central_differences() {
        for (k, n) in [(1usize, 2usize), (2, 3), (1, 3)] {
            let cyl = CylinderSpec::standard(k, n).unwrap();
            let axial: Vec<f64> = (0..n - k).map(|i| 0.7 - 0.4 * i as f64).collect();
            let p = point(&cyl, 0.9, &axial);
            let t = taylor_coefficients(&cyl, &p).unwrap();
            let eval = |s: f64, y: &DVector<f64>| eval_offset_jet(&cyl, &p, s, y).unwrap();
            let z = DVector::zeros(n);
            let h = 1e-4;
            let mut prev = f64::INFINITY;
            for hh in [2e-3, 1e-3] {
                let dnu = (eval(hh, &z).nu - eval(-hh, &z).nu) / (2.0 * hh);
                let err = (dnu - t.dnu_ds).abs();
                assert!(err < 1e-5);
                if prev.is_finite() {
                    assert!(err <= prev / 3.0 || err < 1e-12);
                }
                prev = err;
            }
            let d2nu = (eval(h, &z).nu - 2.0 * eval(0.0, &z).nu + eval(-h, &z).nu) / (h * h);
            assert_relative_eq!(d2nu, t.d2nu_ds2, epsilon = 1e-6);
            assert_relative_eq!(t.dnu_ds, (k as f64 / 2.0).sqrt(), epsilon = 1e-14);
            assert_relative_eq!(t.d2nu_ds2, k as f64 / 2.0 - 0.5, epsilon = 1e-14);
            let deta = (eval(h, &z).eta - eval(-h, &z).eta) / (2.0 * h);
            assert_relative_eq!(deta, t.deta_ds, epsilon = 1e-8);
            for a in 0..n {
                for b in 0..n {
                    let e = |sa: f64, sb: f64| {
                        let mut y = DVector::zeros(n);
                        y[a] += sa * h;
                        y[b] += sb * h;
                        eval(0.0, &y)
                    };
                    let dw = (e(1.0, 1.0).w - e(1.0, -1.0).w - e(-1.0, 1.0).w + e(-1.0, -1.0).w) / (4.0 * h * h);
                    let dn = (e(1.0, 1.0).nu - e(1.0, -1.0).nu - e(-1.0, 1.0).nu + e(-1.0, -1.0).nu) / (4.0 * h * h);
                    assert!((dw - t.d2w_dy2[(a, b)]).abs() < 1e-6, "w_{a}{b} {dw}");
                    assert!((dn - t.d2nu_dy2[(a, b)]).abs() < 1e-6);
                }
                let mut y = DVector::zeros(n);
                y[a] = h;
                let plus = eval(0.0, &y);
                y[a] = -h;
                let minus = eval(0.0, &y);
                assert!(((plus.eta - minus.eta) / (2.0 * h) - t.deta_dy[a]).abs() < 1e-7);
                assert!(((plus.w - minus.w) / (2.0 * h)).abs() < 1e-12);
                let mut ys = DVector::zeros(n);
                ys[a] = h;
                let mixed = (eval(h, &ys).nu - eval(-h, &ys).nu - eval(h, &(-&ys)).nu + eval(-h, &(-&ys)).nu) / (4.0 * h * h);
                assert!((mixed - t.d2nu_dsdy[a]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn circle_closed_form_matches_general_jet() {
        let cyl = CylinderSpec::standard(1, 2).unwrap();
        let r = cyl.radius();
        let z = 0.8;
        let p = point(&cyl, 1.1, &[z]);
        for (s, y1, y2) in [(0.1, 0.2, -0.3), (-0.5, -0.4, 0.6), (1.7, 0.0, 0.9)] {
            let y = DVector::from_column_slice(&[y1, y2]);
            let general = eval_offset_jet(&cyl, &p, s, &y).unwrap();
            let jet = circle::nu_jet(r, s, y1, y2);
            assert_relative_eq!(jet.nu, general.nu, epsilon = 1e-13);
            assert_relative_eq!(jet.w, general.w, epsilon = 1e-13);
            assert_relative_eq!(circle::eta(r, s, z, y2, jet.w), general.eta, epsilon = 1e-13);
            let h = 1e-5;
            let nu = |s: f64, a: f64, b: f64| circle::nu_jet(r, s, a, b).nu;
            let fd_s = (nu(s + h, y1, y2) - nu(s - h, y1, y2)) / (2.0 * h);
            assert_relative_eq!(jet.ds, fd_s, epsilon = 1e-8);
            let fd_1 = (nu(s, y1 + h, y2) - nu(s, y1 - h, y2)) / (2.0 * h);
            assert_relative_eq!(jet.dy1, fd_1, epsilon = 1e-8);
            let fd_2 = (nu(s, y1, y2 + h) - nu(s, y1, y2 - h)) / (2.0 * h);
            assert_relative_eq!(jet.dy2, fd_2, epsilon = 1e-8);
            let d = |f: &dyn Fn(f64, f64, f64) -> f64, v: [f64; 3]| {
                let mut p = [s, y1, y2];
                let mut m = [s, y1, y2];
                for i in 0..3 {
                    p[i] += v[i] * h;
                    m[i] -= v[i] * h;
                }
                (f(p[0], p[1], p[2]) - f(m[0], m[1], m[2])) / (2.0 * h)
            };
            let ds = |s: f64, a: f64, b: f64| circle::nu_jet(r, s, a, b).ds;
            let d1 = |s: f64, a: f64, b: f64| circle::nu_jet(r, s, a, b).dy1;
            let d2 = |s: f64, a: f64, b: f64| circle::nu_jet(r, s, a, b).dy2;
            assert_relative_eq!(jet.dsdy1, d(&ds, [0.0, 1.0, 0.0]), epsilon = 1e-7);
            assert_relative_eq!(jet.dsdy2, d(&ds, [0.0, 0.0, 1.0]), epsilon = 1e-7);
            assert_relative_eq!(jet.dy1y1, d(&d1, [0.0, 1.0, 0.0]), epsilon = 1e-7);
            assert_relative_eq!(jet.dy1y2, d(&d1, [0.0, 0.0, 1.0]), epsilon = 1e-7);
            assert_relative_eq!(jet.dy2y2, d(&d2, [0.0, 0.0, 1.0]), epsilon = 1e-7);
        }
    }
}
