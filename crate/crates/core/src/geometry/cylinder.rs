use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Frame columns must be orthonormal to this tolerance.
pub const FRAME_TOLERANCE: f64 = 1e-12;
/// Points handed to cylinder routines must lie on the cylinder to this tolerance.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-10;

/// A rotated round cylinder `S^k_{√(2k)} × R^{n−k}` in `R^{n+1}`.
///
/// The first `k+1` columns of `frame` span the plane of the sphere factor and
/// the remaining `n−k` columns span the axis. The radius is always `√(2k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSpec {
    k: usize,
    n: usize,
    frame: DMatrix<f64>,
}

/// Shape operator of a cylinder at a point, in the tangent basis
/// `(sphere directions…, axis directions…)`.
#[derive(Debug, Clone)]
pub struct ShapeOperator {
    pub tangent_basis: Vec<DVector<f64>>,
    pub matrix: DMatrix<f64>,
    pub mean_curvature: f64,
}

impl CylinderSpec {
    /// Cylinder in standard position.
    pub fn standard(k: usize, n: usize) -> Result<Self> {
        Self::with_frame(k, n, DMatrix::identity(n + 1, n + 1))
    }

    pub fn with_frame(k: usize, n: usize, frame: DMatrix<f64>) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Input(format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
        }
        if frame.nrows() != n + 1 || frame.ncols() != n + 1 {
            return Err(Error::Input(format!(
                "frame must be {0}×{0}, got {1}×{2}",
                n + 1,
                frame.nrows(),
                frame.ncols()
            )));
        }
        let gram = frame.transpose() * &frame;
        let defect = (gram - DMatrix::<f64>::identity(n + 1, n + 1)).amax();
        if defect > FRAME_TOLERANCE {
            return Err(Error::Input(format!("frame is not orthonormal (defect {defect:.3e})")));
        }
        Ok(Self { k, n, frame })
    }

    /// Standard `k = 1, n = 2` cylinder whose axis is the given unit vector.
    pub fn from_axis(axis: [f64; 3]) -> Result<Self> {
        let a = DVector::from_column_slice(&axis);
        let norm = a.norm();
        if !(norm > 0.0) {
            return Err(Error::Input("axis must be nonzero".into()));
        }
        let a = a / norm;
        let seed = if a[0].abs() < 0.9 { DVector::from_column_slice(&[1.0, 0.0, 0.0]) } else { DVector::from_column_slice(&[0.0, 1.0, 0.0]) };
        let e1 = {
            let v = &seed - &a * a.dot(&seed);
            let nv = v.norm();
            v / nv
        };
        let e2 = DVector::from_column_slice(&[
            a[1] * e1[2] - a[2] * e1[1],
            a[2] * e1[0] - a[0] * e1[2],
            a[0] * e1[1] - a[1] * e1[0],
        ]);
        let mut frame = DMatrix::zeros(3, 3);
        frame.set_column(0, &e1);
        frame.set_column(1, &e2);
        frame.set_column(2, &a);
        Self::with_frame(1, 2, frame)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// `√(2k)`.
    pub fn radius(&self) -> f64 {
        (2.0 * self.k as f64).sqrt()
    }

    /// Mean curvature `√(k/2)` with the outward normal.
    pub fn mean_curvature(&self) -> f64 {
        (self.k as f64 / 2.0).sqrt()
    }

    /// Last column of the frame for `k = n − 1`; the first axis column otherwise.
    pub fn axis(&self) -> DVector<f64> {
        self.frame.column(self.k + 1).into_owned()
    }

    /// Local coordinates `frameᵀ x`.
    pub fn local(&self, x: &DVector<f64>) -> DVector<f64> {
        self.frame.transpose() * x
    }

    /// Component of `x` in the sphere plane, in ambient coordinates.
    pub fn sphere_part(&self, x: &DVector<f64>) -> DVector<f64> {
        let q = self.local(x);
        let mut v = DVector::zeros(self.n + 1);
        for i in 0..=self.k {
            v += self.frame.column(i) * q[i];
        }
        v
    }

    pub fn axis_part(&self, x: &DVector<f64>) -> DVector<f64> {
        x - self.sphere_part(x)
    }

    /// Outward unit normal at a point of the cylinder (or of an offset of it).
    pub fn normal(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let s = self.sphere_part(x);
        let len = s.norm();
        if len == 0.0 {
            return Err(Error::Domain("point lies on the axis".into()));
        }
        Ok(s / len)
    }

    /// Signed distance of `|sphere part|` from the radius.
    pub fn membership_defect(&self, x: &DVector<f64>) -> f64 {
        self.sphere_part(x).norm() - self.radius()
    }

    pub fn check_on_cylinder(&self, p: &DVector<f64>) -> Result<()> {
        if p.len() != self.n + 1 {
            return Err(Error::Input(format!("point has dimension {}, expected {}", p.len(), self.n + 1)));
        }
        let defect = self.membership_defect(p);
        if defect.abs() > MEMBERSHIP_TOLERANCE {
            return Err(Error::Domain(format!("point is {defect:.3e} off the cylinder")));
        }
        Ok(())
    }

    /// Orthonormal tangent basis at `p`: `k` sphere directions then `n−k` axis directions.
    pub fn tangent_basis(&self, p: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        let nrm = self.normal(p)?;
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(self.n);
        for i in 0..=self.k {
            let mut v = self.frame.column(i).into_owned();
            v -= &nrm * nrm.dot(&v);
            for b in &basis {
                v -= b * b.dot(&v);
            }
            let len = v.norm();
            if len > 1e-8 && basis.len() < self.k {
                basis.push(v / len);
            }
        }
        for i in self.k + 1..=self.n {
            basis.push(self.frame.column(i).into_owned());
        }
        Ok(basis)
    }

    /// Ambient projection onto the sphere-tangent directions at `p`.
    pub fn sphere_tangent_projection(&self, p: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        let nrm = self.normal(p)?;
        let s = self.sphere_part(v);
        Ok(&s - &nrm * nrm.dot(&s))
    }
}

/// Shape operator and mean curvature of the cylinder at `p`.
///
/// Convention: outward normal, `A_ij = ⟨∇_{e_i} e_j, n⟩`, `H = −tr A`, so the
/// sphere directions carry eigenvalue `−1/√(2k)` and `H = √(k/2)`.
pub fn cylinder_shape_operator(cyl: &CylinderSpec, p: &DVector<f64>) -> Result<ShapeOperator> {
    cyl.check_on_cylinder(p)?;
    let basis = cyl.tangent_basis(p)?;
    let n = cyl.n();
    let mut matrix = DMatrix::zeros(n, n);
    for i in 0..cyl.k() {
        matrix[(i, i)] = -1.0 / cyl.radius();
    }
    let mean_curvature = -matrix.trace();
    Ok(ShapeOperator { tangent_basis: basis, matrix, mean_curvature })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn point_on(cyl: &CylinderSpec, angle: f64, axial: f64) -> DVector<f64> {
        let mut q = DVector::zeros(cyl.n() + 1);
        q[0] = cyl.radius() * angle.cos();
        q[1] = cyl.radius() * angle.sin();
        if cyl.n() > cyl.k() {
            q[cyl.k() + 1] = axial;
        }
        cyl.frame() * q
    }

    #[test]
    fn circle_curvature_by_parametric_differentiation() {
        // oracle: γ(t) = √2 (cos t, sin t); ⟨γ'', n⟩ / |γ'|² with outward n
        let r = 2f64.sqrt();
        let t: f64 = 0.7;
        let d1 = [-r * t.sin(), r * t.cos()];
        let d2 = [-r * t.cos(), -r * t.sin()];
        let n = [t.cos(), t.sin()];
        let a11 = (d2[0] * n[0] + d2[1] * n[1]) / (d1[0] * d1[0] + d1[1] * d1[1]);

        let cyl = CylinderSpec::standard(1, 2).unwrap();
        let p = point_on(&cyl, t, 0.4);
        let shape = cylinder_shape_operator(&cyl, &p).unwrap();
        assert_relative_eq!(shape.matrix[(0, 0)], a11, epsilon = 1e-14);
        assert_relative_eq!(shape.matrix[(0, 0)], -1.0 / 2f64.sqrt(), epsilon = 1e-14);
        assert_eq!(shape.matrix[(1, 1)], 0.0);
        assert_relative_eq!(shape.mean_curvature, 1.0 / 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn mean_curvature_and_shrinker_identity() {
        for (k, n) in [(1, 2), (2, 3), (1, 3), (3, 3), (2, 5)] {
            let cyl = CylinderSpec::standard(k, n).unwrap();
            let p = point_on(&cyl, 1.3, -2.0);
            let shape = cylinder_shape_operator(&cyl, &p).unwrap();
            assert_relative_eq!(shape.mean_curvature, (k as f64 / 2.0).sqrt(), epsilon = 1e-14);
            let a2: f64 = shape.matrix.iter().map(|v| v * v).sum();
            assert_relative_eq!(a2, 0.5, epsilon = 1e-14);
            let nrm = cyl.normal(&p).unwrap();
            let phi = 0.5 * p.dot(&nrm) - shape.mean_curvature;
            assert!(phi.abs() < 1e-14);
            assert_eq!(shape.tangent_basis.len(), n);
        }
        let cyl = CylinderSpec::standard(2, 3).unwrap();
        assert_relative_eq!(cyl.mean_curvature(), 1.0);
    }

    #[test]
    fn off_cylinder_point_is_a_domain_error() {
        let cyl = CylinderSpec::standard(1, 2).unwrap();
        let p = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        assert!(matches!(cylinder_shape_operator(&cyl, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn frame_must_be_orthonormal() {
        let mut f = DMatrix::identity(3, 3);
        f[(0, 1)] = 1e-6;
        assert!(CylinderSpec::with_frame(1, 2, f).is_err());
        let c = CylinderSpec::from_axis([0.3, -0.2, 1.0]).unwrap();
        let gram = c.frame().transpose() * c.frame();
        assert!((gram - DMatrix::<f64>::identity(3, 3)).amax() < 1e-14);
    }
}
