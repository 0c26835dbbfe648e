//! Gaussian-weighted spectral theory of `L = 𝓛 + 1` on the cylinder.
//!
//! Eigenvalues are reported with the convention `Lu = λu`, so that
//! `λ = 1 − c(j,k) − |m|/2` where `c(j,k) = (j² + (k−1)j)/(2k)` is the `j`-th
//! eigenvalue cluster of `−Δ` on `S^k_{√(2k)}` and `|m|` is the total Hermite
//! degree along the axis. The drift-operator convention `Lu = −μu` used in
//! much of the literature flips every sign.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub mod basis;
pub mod norms;
pub mod operator;

pub use basis::{GraphField, SpectralBasis, Taper};
pub use norms::{gaussian_norm, poincare_check, project_kernel, quadratic_norm, NormKind, Region};

/// Label of an eigenfunction: sphere cluster `j`, harmonic `harmonic` inside
/// the cluster and Hermite multi-index `m` over the axis variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub j: usize,
    pub harmonic: usize,
    pub m: Vec<usize>,
}

impl ModeIndex {
    pub fn degree(&self) -> usize {
        self.m.iter().sum()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        basis_eigenvalue(self.j, self.degree(), k)
    }
}

/// `c(j, k) = (j² + (k−1)j)/(2k)`.
pub fn cluster(j: usize, k: usize) -> f64 {
    let (j, k) = (j as f64, k as f64);
    (j * j + (k - 1.0) * j) / (2.0 * k)
}

/// `L`-eigenvalue `1 − c(j,k) − m/2` (convention `Lu = λu`).
pub fn basis_eigenvalue(j: usize, m: usize, k: usize) -> f64 {
    1.0 - cluster(j, k) - m as f64 / 2.0
}

/// Dimension of degree-`j` spherical harmonics on `S^k`.
pub fn harmonic_multiplicity(j: usize, k: usize) -> usize {
    let binom = |a: usize, b: usize| -> usize {
        if b > a {
            return 0;
        }
        (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1))
    };
    if j < 2 {
        binom(j + k, k)
    } else {
        binom(j + k, k) - binom(j + k - 2, k)
    }
}

/// A field given by its amplitudes on the orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub k: usize,
    pub n: usize,
    pub amplitudes: BTreeMap<ModeIndex, f64>,
}

impl SpectralField {
    pub fn new(k: usize, n: usize) -> Self {
        Self { k, n, amplitudes: BTreeMap::new() }
    }

    pub fn single(k: usize, n: usize, mode: ModeIndex) -> Self {
        let mut f = Self::new(k, n);
        f.amplitudes.insert(mode, 1.0);
        f
    }

    /// Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.amplitudes.values().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.amplitudes.iter().map(|(k, a)| a * other.amplitudes.get(k).copied().unwrap_or(0.0)).sum()
    }

    pub fn apply_l(&self) -> Self {
        let mut out = self.clone();
        for (mode, a) in out.amplitudes.iter_mut() {
            *a *= mode.lambda(self.k);
        }
        out
    }

    /// Converts a `k = 1, n = 2` field to basis coefficients.
    pub fn to_graph_field(&self, basis: &std::sync::Arc<SpectralBasis>) -> Result<GraphField> {
        if self.k != 1 || self.n != 2 {
            return Err(Error::Unsupported("nodal fields exist for k = 1, n = 2 only".into()));
        }
        let mut coeffs = vec![0.0; basis.len()];
        for (mode, a) in &self.amplitudes {
            let m = mode.m.first().copied().unwrap_or(0);
            let harmonic = match (mode.j, mode.harmonic) {
                (0, _) => basis::Harmonic::Const,
                (_, 0) => basis::Harmonic::Cos,
                _ => basis::Harmonic::Sin,
            };
            if mode.j >= basis.n_theta() / 2 || m >= basis.hermite() {
                return Err(Error::Input(format!("mode {mode:?} exceeds the basis")));
            }
            coeffs[basis.index(basis::fourier_slot(mode.j, harmonic), m)] += a;
        }
        GraphField::from_coeffs(basis, coeffs)
    }
}

/// Geometric meaning of a kernel element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelLabel {
    /// `y_i f(θ)` with `f` a first spherical harmonic: an infinitesimal rotation.
    Rotation { axis: usize, harmonic: usize },
    /// `y_i y_j − 2δ_ij`.
    Quadratic { i: usize, j: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Cylinder,
    /// `k = n`: the round sphere, whose kernel is empty.
    Sphere,
}

#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub k: usize,
    pub n: usize,
    pub kind: KernelKind,
    pub elements: Vec<(KernelLabel, SpectralField)>,
}

impl KernelBasis {
    pub fn dimension(&self) -> usize {
        self.elements.len()
    }
}

/// `(n−k)(n−k+1)/2 + (n−k)(k+1)`.
pub fn kernel_dimension(k: usize, n: usize) -> usize {
    let a = n - k;
    a * (a + 1) / 2 + a * (k + 1)
}

fn unit(len: usize, i: usize) -> Vec<usize> {
    let mut v = vec![0; len];
    v[i] += 1;
    v
}

/// Orthonormal basis of `ker L`.
///
/// A free constant is not part of the kernel: `L1 = 1`.
pub fn kernel_basis(k: usize, n: usize) -> Result<KernelBasis> {
    if k == 0 || k > n {
        return Err(Error::Input(format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    if k == n {
        return Ok(KernelBasis { k, n, kind: KernelKind::Sphere, elements: Vec::new() });
    }
    let axes = n - k;
    let mut elements = Vec::new();
    for i in 0..axes {
        for j in i..axes {
            let mut m = unit(axes, i);
            m[j] += 1;
            let mode = ModeIndex { j: 0, harmonic: 0, m };
            elements.push((KernelLabel::Quadratic { i, j }, SpectralField::single(k, n, mode)));
        }
    }
    for i in 0..axes {
        for h in 0..harmonic_multiplicity(1, k) {
            let mode = ModeIndex { j: 1, harmonic: h, m: unit(axes, i) };
            elements.push((KernelLabel::Rotation { axis: i, harmonic: h }, SpectralField::single(k, n, mode)));
        }
    }
    Ok(KernelBasis { k, n, kind: KernelKind::Cylinder, elements })
}

/// Smallest nonzero `|λ|`.
pub fn spectral_gap(k: usize, n: usize) -> f64 {
    let max_m = if n > k { 40 } else { 0 };
    let mut gap = f64::INFINITY;
    for j in 0..40 {
        for m in 0..=max_m {
            let l = basis_eigenvalue(j, m, k).abs();
            if l > 1e-12 {
                gap = gap.min(l);
            }
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigenvalue_table() {
        for k in 1..6 {
            assert_relative_eq!(basis_eigenvalue(1, 0, k), 0.5);
            assert_eq!(cluster(0, k), 0.0);
        }
        assert_eq!(basis_eigenvalue(0, 2, 1), 0.0);
        assert_eq!(basis_eigenvalue(2, 0, 1), -1.0);
        assert_eq!(harmonic_multiplicity(1, 1), 2);
        assert_eq!(harmonic_multiplicity(2, 2), 5);
        assert_eq!(harmonic_multiplicity(3, 1), 2);
    }

    #[test]
    fn kernel_dimensions() {
        assert_eq!(kernel_basis(1, 2).unwrap().dimension(), 3);
        assert_eq!(kernel_basis(1, 3).unwrap().dimension(), 7);
        for (k, n) in [(1, 4), (2, 3), (2, 5), (3, 4)] {
            let kb = kernel_basis(k, n).unwrap();
            assert_eq!(kb.dimension(), kernel_dimension(k, n));
            for (_, v) in &kb.elements {
                assert!(v.apply_l().l2_norm() < 1e-15);
                assert_relative_eq!(v.l2_norm(), 1.0);
            }
        }
        let sphere = kernel_basis(2, 2).unwrap();
        assert_eq!(sphere.kind, KernelKind::Sphere);
        assert_eq!(sphere.dimension(), 0);
    }

    #[test]
    fn gaps() {
        assert_relative_eq!(spectral_gap(1, 2), 0.5);
        assert!(spectral_gap(2, 3) > 0.0);
    }
}
