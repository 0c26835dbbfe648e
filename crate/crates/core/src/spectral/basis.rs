//! Fourier × Hermite basis on `S¹_{√2} × R` and graph fields expanded in it.
//!
//! Basis functions are `e_{t,m}(θ, y) = c₀ F_t(θ) h_m(y)` with
//! `F_0 = 1/√(2π)`, `F_{2j−1} = cos(jθ)/√π`, `F_{2j} = sin(jθ)/√π` and the
//! normalized Hermite functions of [`crate::hermite`]. The constant
//! `c₀ = (r e^{−r²/4})^{−1/2}` makes them orthonormal for the Gaussian inner
//! product `∫ f g e^{−|x|²/4} dμ` of the cylinder. Coefficients are stored
//! θ-major: index `t·M + m`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermite;
use crate::quadrature::{circle_nodes, circle_weight, GaussHermite};

/// Radius of the `k = 1` cylinder.
pub const RADIUS: f64 = std::f64::consts::SQRT_2;

/// Harmonic label of a Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Harmonic {
    Const,
    Cos,
    Sin,
}

/// Fourier slot `t` as `(j, harmonic)`.
pub fn fourier_label(t: usize) -> (usize, Harmonic) {
    if t == 0 {
        (0, Harmonic::Const)
    } else if t % 2 == 1 {
        ((t + 1) / 2, Harmonic::Cos)
    } else {
        (t / 2, Harmonic::Sin)
    }
}

pub fn fourier_slot(j: usize, harmonic: Harmonic) -> usize {
    match harmonic {
        Harmonic::Const => 0,
        Harmonic::Cos => 2 * j - 1,
        Harmonic::Sin => 2 * j,
    }
}

/// Smooth cutoff equal to one on `|y| ≤ L` and zero on `|y| ≥ 5L/4`.
///
/// The transition is the degree-7 smoothstep, so the cutoff is `C³`. The
/// graph is exactly the evolving surface on the plateau `|y| ≤ L`; beyond
/// the support it is the cylinder itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taper {
    pub half_width: f64,
}

impl Taper {
    pub fn new(half_width: f64) -> Self {
        Self { half_width }
    }

    /// End of the plateau, `L`.
    pub fn inner(&self) -> f64 {
        self.half_width
    }

    /// End of the support, `5L/4`.
    pub fn outer(&self) -> f64 {
        1.25 * self.half_width
    }

    /// `(χ, χ', χ'')` at `y`.
    pub fn jet(&self, y: f64) -> (f64, f64, f64) {
        let a = self.inner();
        let l = self.outer();
        let ay = y.abs();
        if ay <= a {
            return (1.0, 0.0, 0.0);
        }
        if ay >= l {
            return (0.0, 0.0, 0.0);
        }
        let width = l - a;
        let t = (l - ay) / width;
        let s = t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t.powi(3));
        let ds = 140.0 * t.powi(3) * (1.0 - t).powi(3);
        let d2s = 420.0 * t * t * (1.0 - t).powi(2) * (1.0 - 2.0 * t);
        // dt/dy = −sign(y)/width
        let sign = y.signum();
        (s, -sign * ds / width, d2s / (width * width))
    }
}

/// Tensor-product spectral basis for `k = 1, n = 2` with its quadrature grid.
#[derive(Debug)]
pub struct SpectralBasis {
    n_theta: usize,
    hermite: usize,
    taper: Taper,
    gh: GaussHermite,
    theta: Vec<f64>,
    c0: f64,
    eigenvalues: Vec<f64>,
    fourier: [DMatrix<f64>; 3],
    herm: [DMatrix<f64>; 3],
    analysis_theta: DMatrix<f64>,
    analysis_y: DMatrix<f64>,
}

/// Values and first/second derivatives of a (tapered) field on a tensor grid.
/// Rows index θ, columns index y.
#[derive(Debug, Clone)]
pub struct NodalJet {
    pub theta: Vec<f64>,
    pub y: Vec<f64>,
    pub u: DMatrix<f64>,
    pub u_t: DMatrix<f64>,
    pub u_y: DMatrix<f64>,
    pub u_tt: DMatrix<f64>,
    pub u_ty: DMatrix<f64>,
    pub u_yy: DMatrix<f64>,
}

impl SpectralBasis {
    /// `n_theta` must be even and at least 4; `hermite` is the number of Hermite
    /// functions `M`; the quadrature uses `2M + 1` Gauss–Hermite nodes.
    pub fn new(n_theta: usize, hermite: usize, truncation: f64) -> Result<Arc<Self>> {
        let mut problems = Vec::new();
        if n_theta < 4 || n_theta % 2 != 0 {
            problems.push(format!("N_theta must be even and ≥ 4, got {n_theta}"));
        }
        if hermite == 0 {
            problems.push("Hermite cap M must be positive".into());
        }
        if !(truncation > 2.0) {
            problems.push(format!("truncation L must exceed 2, got {truncation}"));
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        let gh = GaussHermite::new(2 * hermite + 1);
        let theta = circle_nodes(n_theta);
        let c0 = (RADIUS * (-RADIUS * RADIUS / 4.0).exp()).powf(-0.5);
        let t_count = n_theta - 1;

        let mut fourier = [
            DMatrix::zeros(n_theta, t_count),
            DMatrix::zeros(n_theta, t_count),
            DMatrix::zeros(n_theta, t_count),
        ];
        for (i, &th) in theta.iter().enumerate() {
            for t in 0..t_count {
                let (v, d1, d2) = fourier_jet(t, th);
                fourier[0][(i, t)] = c0 * v;
                fourier[1][(i, t)] = c0 * d1;
                fourier[2][(i, t)] = c0 * d2;
            }
        }
        let q = gh.len();
        let mut herm = [DMatrix::zeros(q, hermite), DMatrix::zeros(q, hermite), DMatrix::zeros(q, hermite)];
        for (iq, &y) in gh.nodes().iter().enumerate() {
            let (h, h1, h2) = hermite::jet(y, hermite);
            for m in 0..hermite {
                herm[0][(iq, m)] = h[m];
                herm[1][(iq, m)] = h1[m];
                herm[2][(iq, m)] = h2[m];
            }
        }
        let wt = circle_weight(n_theta);
        let mut analysis_theta = DMatrix::zeros(t_count, n_theta);
        for t in 0..t_count {
            for i in 0..n_theta {
                analysis_theta[(t, i)] = wt * fourier[0][(i, t)] / (c0 * c0);
            }
        }
        let mut analysis_y = herm[0].clone();
        for (iq, w) in gh.weights().iter().enumerate() {
            for m in 0..hermite {
                analysis_y[(iq, m)] *= w;
            }
        }
        let mut eigenvalues = Vec::with_capacity(t_count * hermite);
        for t in 0..t_count {
            let (j, _) = fourier_label(t);
            for m in 0..hermite {
                eigenvalues.push(1.0 - (j * j) as f64 / 2.0 - m as f64 / 2.0);
            }
        }
        Ok(Arc::new(Self {
            n_theta,
            hermite,
            taper: Taper::new(truncation),
            gh,
            theta,
            c0,
            eigenvalues,
            fourier,
            herm,
            analysis_theta,
            analysis_y,
        }))
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn hermite(&self) -> usize {
        self.hermite
    }

    pub fn fourier_count(&self) -> usize {
        self.n_theta - 1
    }

    pub fn len(&self) -> usize {
        self.fourier_count() * self.hermite
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn truncation(&self) -> f64 {
        self.taper.half_width
    }

    pub fn taper(&self) -> Taper {
        self.taper
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn y_nodes(&self) -> &[f64] {
        self.gh.nodes()
    }

    pub fn y_weights(&self) -> &[f64] {
        self.gh.weights()
    }

    pub fn theta_weight(&self) -> f64 {
        circle_weight(self.n_theta)
    }

    pub fn normalization(&self) -> f64 {
        self.c0
    }

    /// `L`-eigenvalue of every mode, in storage order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn index(&self, t: usize, m: usize) -> usize {
        t * self.hermite + m
    }

    /// `(j, harmonic, m)` for a storage index.
    pub fn label(&self, index: usize) -> (usize, Harmonic, usize) {
        let (j, h) = fourier_label(index / self.hermite);
        (j, h, index % self.hermite)
    }

    /// Coefficient of `cos(jθ)·q_m(y)` (monic Hermite) on the basis function
    /// `e_{t,m}`; negative `j` selects `sin(|j|θ)`.
    pub fn monic_mode(&self, j: i64, m: usize) -> Result<(usize, f64)> {
        let ju = j.unsigned_abs() as usize;
        if ju >= self.n_theta / 2 || m >= self.hermite {
            return Err(Error::Input(format!("mode (j = {j}, m = {m}) exceeds the basis")));
        }
        let (slot, fnorm) = if ju == 0 {
            (0, (2.0 * PI).sqrt())
        } else if j > 0 {
            (fourier_slot(ju, Harmonic::Cos), PI.sqrt())
        } else {
            (fourier_slot(ju, Harmonic::Sin), PI.sqrt())
        };
        Ok((self.index(slot, m), fnorm * hermite::monic_scale(m) / self.c0))
    }

    fn coefficient_matrix(&self, coeffs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.fourier_count(), self.hermite, coeffs)
    }

    /// Nodal values on the quadrature grid (no taper).
    pub fn synthesize(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let c = self.coefficient_matrix(coeffs);
        &self.fourier[0] * (c * self.herm[0].transpose())
    }

    /// Galerkin projection of nodal values on the quadrature grid.
    pub fn analyze(&self, values: &DMatrix<f64>) -> Vec<f64> {
        let c = &self.analysis_theta * values * &self.analysis_y;
        let mut out = Vec::with_capacity(self.len());
        for t in 0..self.fourier_count() {
            for m in 0..self.hermite {
                out.push(c[(t, m)]);
            }
        }
        out
    }

    /// Jet of the field on the quadrature grid, optionally multiplied by the taper.
    pub fn nodal_jet(&self, coeffs: &[f64], tapered: bool) -> NodalJet {
        let c = self.coefficient_matrix(coeffs);
        let ch0 = &c * self.herm[0].transpose();
        let ch1 = &c * self.herm[1].transpose();
        let ch2 = &c * self.herm[2].transpose();
        let jet = NodalJet {
            theta: self.theta.clone(),
            y: self.gh.nodes().to_vec(),
            u: &self.fourier[0] * &ch0,
            u_t: &self.fourier[1] * &ch0,
            u_y: &self.fourier[0] * &ch1,
            u_tt: &self.fourier[2] * &ch0,
            u_ty: &self.fourier[1] * &ch1,
            u_yy: &self.fourier[0] * &ch2,
        };
        if tapered {
            apply_taper(jet, self.taper)
        } else {
            jet
        }
    }

    /// Jet of the field on an arbitrary tensor grid.
    pub fn grid_jet(&self, coeffs: &[f64], theta: &[f64], y: &[f64], tapered: bool) -> NodalJet {
        let t_count = self.fourier_count();
        let mut f = [
            DMatrix::zeros(theta.len(), t_count),
            DMatrix::zeros(theta.len(), t_count),
            DMatrix::zeros(theta.len(), t_count),
        ];
        for (i, &th) in theta.iter().enumerate() {
            for t in 0..t_count {
                let (v, d1, d2) = fourier_jet(t, th);
                f[0][(i, t)] = self.c0 * v;
                f[1][(i, t)] = self.c0 * d1;
                f[2][(i, t)] = self.c0 * d2;
            }
        }
        let mut h = [
            DMatrix::zeros(y.len(), self.hermite),
            DMatrix::zeros(y.len(), self.hermite),
            DMatrix::zeros(y.len(), self.hermite),
        ];
        for (iy, &yy) in y.iter().enumerate() {
            let (h0, h1, h2) = hermite::jet(yy, self.hermite);
            for m in 0..self.hermite {
                h[0][(iy, m)] = h0[m];
                h[1][(iy, m)] = h1[m];
                h[2][(iy, m)] = h2[m];
            }
        }
        let c = self.coefficient_matrix(coeffs);
        let ch0 = &c * h[0].transpose();
        let ch1 = &c * h[1].transpose();
        let ch2 = &c * h[2].transpose();
        let jet = NodalJet {
            theta: theta.to_vec(),
            y: y.to_vec(),
            u: &f[0] * &ch0,
            u_t: &f[1] * &ch0,
            u_y: &f[0] * &ch1,
            u_tt: &f[2] * &ch0,
            u_ty: &f[1] * &ch1,
            u_yy: &f[0] * &ch2,
        };
        if tapered {
            apply_taper(jet, self.taper)
        } else {
            jet
        }
    }
}

fn fourier_jet(t: usize, theta: f64) -> (f64, f64, f64) {
    let (j, h) = fourier_label(t);
    let jf = j as f64;
    match h {
        Harmonic::Const => (1.0 / (2.0 * PI).sqrt(), 0.0, 0.0),
        Harmonic::Cos => {
            let s = PI.sqrt();
            ((jf * theta).cos() / s, -jf * (jf * theta).sin() / s, -jf * jf * (jf * theta).cos() / s)
        }
        Harmonic::Sin => {
            let s = PI.sqrt();
            ((jf * theta).sin() / s, jf * (jf * theta).cos() / s, -jf * jf * (jf * theta).sin() / s)
        }
    }
}

fn apply_taper(mut jet: NodalJet, taper: Taper) -> NodalJet {
    for (c, &y) in jet.y.iter().enumerate() {
        let (x, x1, x2) = taper.jet(y);
        for r in 0..jet.theta.len() {
            let u = jet.u[(r, c)];
            let ut = jet.u_t[(r, c)];
            let uy = jet.u_y[(r, c)];
            jet.u_yy[(r, c)] = x2 * u + 2.0 * x1 * uy + x * jet.u_yy[(r, c)];
            jet.u_ty[(r, c)] = x1 * ut + x * jet.u_ty[(r, c)];
            jet.u_y[(r, c)] = x1 * u + x * uy;
            jet.u[(r, c)] = x * u;
            jet.u_t[(r, c)] = x * ut;
            jet.u_tt[(r, c)] *= x;
        }
    }
    jet
}

/// A scalar field `u` on the cylinder, stored by its spectral coefficients.
#[derive(Debug, Clone)]
pub struct GraphField {
    basis: Arc<SpectralBasis>,
    coeffs: Vec<f64>,
}

impl GraphField {
    pub fn zero(basis: &Arc<SpectralBasis>) -> Self {
        Self { basis: Arc::clone(basis), coeffs: vec![0.0; basis.len()] }
    }

    pub fn from_coeffs(basis: &Arc<SpectralBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Input(format!("expected {} coefficients, got {}", basis.len(), coeffs.len())));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("non-finite coefficient".into()));
        }
        Ok(Self { basis: Arc::clone(basis), coeffs })
    }

    /// Sum of `amp·cos(jθ)·q_m(y)` terms (`sin(|j|θ)` for negative `j`), with
    /// `q_m` the monic Hermite polynomials `1, y, y²−2, …`.
    pub fn from_modes(basis: &Arc<SpectralBasis>, modes: &[(i64, usize, f64)]) -> Result<Self> {
        let mut field = Self::zero(basis);
        for &(j, m, amp) in modes {
            let (idx, scale) = basis.monic_mode(j, m)?;
            field.coeffs[idx] += amp * scale;
        }
        Ok(field)
    }

    /// Projects a function sampled on the quadrature grid.
    pub fn from_fn(basis: &Arc<SpectralBasis>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = DMatrix::from_fn(basis.n_theta(), basis.y_nodes().len(), |i, q| f(basis.theta()[i], basis.y_nodes()[q]));
        Self { basis: Arc::clone(basis), coeffs: basis.analyze(&values) }
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn values(&self) -> DMatrix<f64> {
        self.basis.synthesize(&self.coeffs)
    }

    /// Jet of `χu` on the quadrature grid.
    pub fn tapered_jet(&self) -> NodalJet {
        self.basis.nodal_jet(&self.coeffs, true)
    }

    pub fn jet(&self) -> NodalJet {
        self.basis.nodal_jet(&self.coeffs, false)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { basis: Arc::clone(&self.basis), coeffs: self.coeffs.iter().map(|c| a * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// `L u`, exact on the spectral representation.
    pub fn apply_l(&self) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().zip(self.basis.eigenvalues()).map(|(c, l)| c * l).collect(),
        }
    }

    /// Gaussian `L²` inner product (Parseval).
    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn basis() -> Arc<SpectralBasis> {
        SpectralBasis::new(16, 12, 12.0).unwrap()
    }

    #[test]
    fn round_trip_of_band_limited_fields() {
        let b = basis();
        let coeffs: Vec<f64> = (0..b.len()).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let values = b.synthesize(&coeffs);
        let back = b.analyze(&values);
        let err = coeffs.iter().zip(&back).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "round trip error {err}");
    }

    #[test]
    fn monic_modes_evaluate_to_their_polynomials() {
        let b = basis();
        let f = GraphField::from_modes(&b, &[(2, 3, 0.7), (-1, 2, -0.3), (0, 0, 1.1)]).unwrap();
        let jet = b.grid_jet(f.coeffs(), &[0.3, 1.9], &[-1.5, 0.4, 2.2], false);
        for (i, &th) in [0.3f64, 1.9].iter().enumerate() {
            for (q, &y) in [-1.5f64, 0.4, 2.2].iter().enumerate() {
                let exact = 0.7 * (2.0 * th).cos() * (y.powi(3) - 6.0 * y) - 0.3 * th.sin() * (y * y - 2.0) + 1.1;
                assert_relative_eq!(jet.u[(i, q)], exact, epsilon = 1e-11);
                let d_th = -1.4 * (2.0 * th).sin() * (y.powi(3) - 6.0 * y) - 0.3 * th.cos() * (y * y - 2.0);
                assert_relative_eq!(jet.u_t[(i, q)], d_th, epsilon = 1e-11);
                let d_yy = 0.7 * (2.0 * th).cos() * 6.0 * y - 0.6 * th.sin();
                assert_relative_eq!(jet.u_yy[(i, q)], d_yy, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn taper_is_smooth_and_supported() {
        let t = Taper::new(12.0);
        assert_eq!(t.jet(12.0).0, 1.0);
        assert_eq!(t.jet(-15.0).0, 0.0);
        let h = 1e-5;
        for y in [12.2, 13.1, 14.3, -14.8] {
            let (_, d1, d2) = t.jet(y);
            assert_relative_eq!(d1, (t.jet(y + h).0 - t.jet(y - h).0) / (2.0 * h), epsilon = 1e-6);
            assert_relative_eq!(d2, (t.jet(y + h).1 - t.jet(y - h).1) / (2.0 * h), epsilon = 1e-5);
        }
    }

    #[test]
    fn l_acts_by_eigenvalues() {
        let b = basis();
        let f = GraphField::from_modes(&b, &[(1, 1, 1.0), (0, 2, 1.0)]).unwrap();
        assert!(f.apply_l().l2_norm() < 1e-14);
        let one = GraphField::from_modes(&b, &[(0, 0, 1.0)]).unwrap();
        assert_relative_eq!(one.apply_l().inner(&one), one.inner(&one), epsilon = 1e-12);
    }
}
