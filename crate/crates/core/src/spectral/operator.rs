//! Discretized spectra of `L` on `S¹_{√2} × R`.
//!
//! `L = ∂²_θ/r² + (∂²_y − (y/2)∂_y) + 1` is a sum of commuting operators in
//! `θ` and `y`, so any tensor-product discretization has eigenvalues
//! `σ_θ + σ_y + 1`. Two discretizations are provided: a Galerkin matrix in
//! the Hermite basis (exact up to rounding) and fourth-order central finite
//! differences on uniform grids.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermite;
use crate::quadrature::GaussHermite;
use crate::spectral::basis::RADIUS;

/// Exact eigenvalues `1 − j²/2 − m/2` for `k = 1, n = 2` with multiplicity,
/// the `count` smallest in absolute value, sorted by value.
pub fn exact_lowest(count: usize) -> Vec<f64> {
    let mut all = Vec::new();
    for j in 0..12usize {
        let mult = if j == 0 { 1 } else { 2 };
        for m in 0..40usize {
            let l = 1.0 - (j * j) as f64 / 2.0 - m as f64 / 2.0;
            for _ in 0..mult {
                all.push(l);
            }
        }
    }
    lowest(all, count)
}

/// `count` entries of smallest absolute value, sorted by value.
pub fn lowest(mut values: Vec<f64>, count: usize) -> Vec<f64> {
    values.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    values.truncate(count);
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// Galerkin matrix `⟨h_l, 𝓛_y h_m⟩` with `2M + 1` Gauss–Hermite nodes.
pub fn galerkin_axis_matrix(modes: usize) -> DMatrix<f64> {
    let gh = GaussHermite::new(2 * modes + 1);
    let mut a = DMatrix::zeros(modes, modes);
    for (&y, &w) in gh.nodes().iter().zip(gh.weights()) {
        let (h, h1, h2) = hermite::jet(y, modes);
        for m in 0..modes {
            let lh = h2[m] - y / 2.0 * h1[m];
            for l in 0..modes {
                a[(l, m)] += w * h[l] * lh;
            }
        }
    }
    a
}

/// Spectrum of the Galerkin discretization with `n_theta` Fourier modes (Nyquist
/// dropped) and `modes` Hermite functions.
pub fn galerkin_spectrum(n_theta: usize, modes: usize) -> Vec<f64> {
    let a = galerkin_axis_matrix(modes);
    let sym = (&a + a.transpose()) * 0.5;
    let axis = sym.symmetric_eigenvalues();
    let mut out = Vec::new();
    for j in 0..n_theta / 2 {
        let mult = if j == 0 { 1 } else { 2 };
        let sigma = -((j * j) as f64) / (RADIUS * RADIUS);
        for &s in axis.iter() {
            for _ in 0..mult {
                out.push(sigma + s + 1.0);
            }
        }
    }
    out
}

/// Fourth-order periodic second-difference matrix on `n` nodes of spacing `h`.
pub fn fd_periodic_second(n: usize, h: f64) -> DMatrix<f64> {
    let c = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for (o, &w) in c.iter().enumerate() {
            let jj = (i + n + o - 2) % n;
            a[(i, jj)] += w / (h * h);
        }
    }
    a
}

/// Fourth-order central differences for `∂²_y − (y/2)∂_y` on the `n` interior
/// nodes of `[−L, L]`, with zero values on and beyond the boundary.
pub fn fd_axis_matrix(n: usize, half_width: f64) -> (DMatrix<f64>, Vec<f64>) {
    let h = 2.0 * half_width / (n + 1) as f64;
    let y: Vec<f64> = (1..=n).map(|i| -half_width + h * i as f64).collect();
    let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
    let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for o in 0..5 {
            let j = i as isize + o as isize - 2;
            if j < 0 || j >= n as isize {
                continue;
            }
            a[(i, j as usize)] += d2[o] / (h * h) - y[i] / 2.0 * d1[o] / h;
        }
    }
    (a, y)
}

/// Real parts of the eigenvalues of a real matrix.
fn real_eigenvalues(a: DMatrix<f64>) -> Result<Vec<f64>> {
    let schur = nalgebra::linalg::Schur::try_new(a, 1e-14, 100_000)
        .ok_or_else(|| Error::Domain("eigenvalue iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.re).collect())
}

/// Spectrum of the finite-difference discretization on `n_theta × n_y` nodes.
pub fn finite_difference_spectrum(n_theta: usize, n_y: usize, half_width: f64) -> Result<Vec<f64>> {
    let t = fd_periodic_second(n_theta, 2.0 * std::f64::consts::PI / n_theta as f64) / (RADIUS * RADIUS);
    let theta = t.symmetric_eigenvalues();
    let (a, _) = fd_axis_matrix(n_y, half_width);
    let axis = real_eigenvalues(a)?;
    let mut out = Vec::with_capacity(n_theta * n_y);
    for &s in theta.iter() {
        for &r in &axis {
            out.push(s + r + 1.0);
        }
    }
    Ok(out)
}

/// Result of comparing a discrete spectrum against the exact one.
#[derive(Debug, Clone)]
pub struct SpectrumComparison {
    pub computed: Vec<f64>,
    pub exact: Vec<f64>,
    pub max_error: f64,
    pub kernel_dimension: usize,
}

pub fn compare_lowest(spectrum: Vec<f64>, count: usize, kernel_threshold: f64) -> SpectrumComparison {
    let kernel_dimension = spectrum.iter().filter(|l| l.abs() < kernel_threshold).count();
    let computed = lowest(spectrum, count);
    let exact = exact_lowest(count);
    let max_error = computed.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    SpectrumComparison { computed, exact, max_error, kernel_dimension }
}
