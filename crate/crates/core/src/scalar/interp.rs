//! Interpolation between `L¹` and `C^k`:
//!
//! ```text
//! ‖u‖_∞(B_r)        ≤ C (r^{−n}‖u‖_{L¹(B_{2r})} + ‖u‖_{L¹}^a m^{1−a})
//! r‖∇u‖_∞(B_r)      ≤ C (r^{−n}‖u‖_{L¹(B_{2r})} + r ‖u‖_{L¹}^b m^{1−b})
//! r²‖∇²u‖_∞(B_r)    ≤ C (r^{−n}‖u‖_{L¹(B_{2r})} + r² ‖u‖_{L¹}^c m^{1−c})
//! ```
//!
//! with `m = ‖∇^k u‖_∞(B_{2r})` and `a = k/(k+n)`, `b = (k−1)/(k+n)`,
//! `c = (k−2)/(k+n)`. Balls are coordinate cubes; derivatives come from
//! finite differences on the samples.

use crate::error::{Error, Result};
use crate::harness::loja::loglog_slope;

/// Samples of `u` on a uniform grid over the cube `[−w, w]^n` (row-major,
/// first axis fastest). `u` is taken to vanish outside the cube.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub dim: usize,
    pub half_width: f64,
    pub nodes: usize,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn from_fn(dim: usize, half_width: f64, nodes: usize, u: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if !(1..=2).contains(&dim) || nodes < 5 || !(half_width > 0.0) {
            return Err(Error::Input("need n ∈ {1, 2}, at least 5 nodes and a positive width".into()));
        }
        let h = 2.0 * half_width / (nodes - 1) as f64;
        let total = nodes.pow(dim as u32);
        let values = (0..total)
            .map(|idx| {
                let x: Vec<f64> = (0..dim).map(|a| -half_width + ((idx / nodes.pow(a as u32)) % nodes) as f64 * h).collect();
                u(&x)
            })
            .collect();
        Ok(Self { dim, half_width, nodes, values })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.nodes - 1) as f64
    }

    fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    fn at(&self, ix: [usize; 2]) -> f64 {
        self.values[ix[0] + if self.dim == 2 { ix[1] * self.nodes } else { 0 }]
    }

    fn indices(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        let n = self.nodes;
        let outer = if self.dim == 2 { n } else { 1 };
        (0..outer).flat_map(move |j| (0..n).map(move |i| [i, j]))
    }

    fn inside(&self, ix: [usize; 2], half: f64) -> bool {
        (0..self.dim).all(|a| self.coord(ix[a]).abs() <= half * (1.0 + 1e-12))
    }

    /// `sup |∇^ℓ u|` over the cube `[−half, half]^n` with difference step
    /// `s·h`, using central differences on interior nodes.
    fn derivative_sup(&self, order: usize, s: usize, half: f64) -> f64 {
        let n = self.nodes;
        let step = s as f64 * self.spacing();
        let mut best = 0.0f64;
        for ix in self.indices() {
            if !self.inside(ix, half) || (0..self.dim).any(|a| ix[a] < s || ix[a] + s >= n) {
                continue;
            }
            let shift = |a: usize, k: isize| {
                let mut j = ix;
                j[a] = (j[a] as isize + k * s as isize) as usize;
                j
            };
            let val = match order {
                0 => self.at(ix).abs(),
                1 => (0..self.dim).map(|a| ((self.at(shift(a, 1)) - self.at(shift(a, -1))) / (2.0 * step)).powi(2)).sum::<f64>().sqrt(),
                _ => {
                    let mut sq = 0.0;
                    for a in 0..self.dim {
                        let d2 = (self.at(shift(a, 1)) - 2.0 * self.at(ix) + self.at(shift(a, -1))) / (step * step);
                        sq += d2 * d2;
                        for b in a + 1..self.dim {
                            let corner = |p: isize, q: isize| {
                                let mut j = shift(a, p);
                                j[b] = (j[b] as isize + q * s as isize) as usize;
                                self.at(j)
                            };
                            let dab = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4.0 * step * step);
                            sq += 2.0 * dab * dab;
                        }
                    }
                    sq.sqrt()
                }
            };
            best = best.max(val);
        }
        best
    }

    /// Sup of `|∇^ℓ u|` on the whole cube, including the one-node band at the
    /// boundary where `u` continues by zero.
    fn padded(&self) -> SampledFunction {
        let n = self.nodes + 4;
        let pad = |i: usize| (2..n - 2).contains(&i).then(|| i - 2);
        let mut values = vec![0.0; n.pow(self.dim as u32)];
        for (k, v) in values.iter_mut().enumerate() {
            let (i, j) = (k % n, k / n);
            if let (Some(i), Some(j)) = (pad(i), if self.dim == 2 { pad(j) } else { Some(0) }) {
                *v = self.at([i, j]);
            }
        }
        SampledFunction { dim: self.dim, half_width: self.half_width + 2.0 * self.spacing(), nodes: n, values }
    }

    /// `∫ |u|` over the sampled cube (trapezoid rule).
    fn l1(&self) -> f64 {
        let h = self.spacing();
        let w = |i: usize| if i == 0 || i == self.nodes - 1 { 0.5 } else { 1.0 };
        self.indices().map(|ix| (0..self.dim).map(|a| w(ix[a]) * h).product::<f64>() * self.at(ix).abs()).sum()
    }
}

/// One of the three inequalities at a single sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationTerm {
    pub exponent: f64,
    pub lhs: f64,
    /// Right-hand side without the constant.
    pub rhs: f64,
}

impl InterpolationTerm {
    pub fn ratio(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs / self.rhs
        } else if self.lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationRecord {
    pub k: usize,
    pub n: usize,
    pub r: f64,
    pub l1: f64,
    pub m: f64,
    /// `‖u‖_∞`, `r‖∇u‖_∞` and, for `k = 2`, `r²‖∇²u‖_∞`.
    pub terms: Vec<InterpolationTerm>,
}

/// Evaluates the inequalities for `u` on `B_r`, with every exponent raised by
/// `shift` (zero for the actual statement).
pub fn interpolation_check(u: &SampledFunction, r: f64, k: usize, shift: f64) -> Result<InterpolationRecord> {
    if !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!("derivative order k = {k}; only k ∈ {{1, 2}} are implemented")));
    }
    if !(r > 0.0) || u.half_width > 2.0 * r * (1.0 + 1e-12) {
        return Err(Error::Input("the sampled cube must lie inside B_{2r}".into()));
    }
    let n = u.dim;
    let padded = if u.half_width < 2.0 * r * (1.0 - 1e-9) { u.padded() } else { u.clone() };
    let big = 2.0 * r + 2.0 * u.spacing();
    let m = padded.derivative_sup(k, 1, big);
    let m2 = padded.derivative_sup(k, 2, big);
    let scale = padded.derivative_sup(0, 1, big);
    let noise = 1e-10 * scale / u.spacing().powi(k as i32);
    // a stable difference quotient changes little when the step doubles
    if (m - m2).abs() > 0.1 * m.max(m2) && m.max(m2) > noise {
        return Err(Error::Input(format!("sampling too coarse for order-{k} differences: {m:e} at h against {m2:e} at 2h")));
    }
    let m = if m <= noise { 0.0 } else { m };
    let l1 = u.l1();
    let kellogg = r.powi(-(n as i32)) * l1;
    let mix = |e: f64| if m == 0.0 { 0.0 } else { l1.powf(e) * m.powf(1.0 - e) };
    let kn = (k + n) as f64;
    let mut terms = Vec::with_capacity(3);
    for order in 0..=k.min(2) {
        let e = (k as f64 - order as f64) / kn + shift;
        let lhs = r.powi(order as i32) * padded.derivative_sup(order, 1, r);
        terms.push(InterpolationTerm { exponent: e, lhs, rhs: kellogg + r.powi(order as i32) * mix(e) });
    }
    Ok(InterpolationRecord { k, n, r, l1, m, terms })
}

/// `exp(1 − 1/(1 − |x|²))` on the unit ball, so `‖g‖_∞ = g(0) = 1`.
pub fn bump(x: &[f64]) -> f64 {
    let s = x.iter().map(|v| v * v).sum::<f64>();
    if s < 1.0 {
        (1.0 - 1.0 / (1.0 - s)).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub deltas: Vec<f64>,
    pub shift: f64,
    /// `ratios[i][δ]` for inequality `i`.
    pub ratios: Vec<Vec<f64>>,
    /// Fitted constant: the largest ratio per inequality.
    pub constants: Vec<f64>,
    /// Log-log slope of the ratio against `1/δ` over the four most
    /// concentrated members; positive means the constant grows as the family
    /// concentrates.
    pub growth: Vec<f64>,
}

impl FamilyReport {
    /// Constants bounded along the family: growth below `tol` for every
    /// inequality.
    pub fn stable(&self, tol: f64) -> bool {
        self.growth.iter().all(|g| *g < tol)
    }
}

/// Concentrating family `u(x) = g(x/δ)` in `B_{2r}`, `r = 1`. Each sample
/// covers the support `[−δ, δ]^n` with `nodes` points per axis.
pub fn bump_family(n: usize, k: usize, deltas: &[f64], nodes: usize, shift: f64) -> Result<FamilyReport> {
    let mut ratios = vec![Vec::with_capacity(deltas.len()); k + 1];
    for &d in deltas {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::Input(format!("δ = {d} must lie in (0, 1]")));
        }
        let u = SampledFunction::from_fn(n, d, nodes, |x| bump(&x.iter().map(|v| v / d).collect::<Vec<_>>()))?;
        let rec = interpolation_check(&u, 1.0, k, shift)?;
        for (i, t) in rec.terms.iter().enumerate() {
            ratios[i].push(t.ratio());
        }
    }
    let constants = ratios.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    let growth = ratios
        .iter()
        .map(|r| {
            let from = deltas.len().saturating_sub(4);
            let pairs: Vec<(f64, f64)> = deltas[from..].iter().zip(&r[from..]).map(|(d, q)| (1.0 / d, *q)).collect();
            loglog_slope(&pairs).map(|f| f.slope).unwrap_or(f64::NAN)
        })
        .collect();
    Ok(FamilyReport { deltas: deltas.to_vec(), shift, ratios, constants, growth })
}

/// `δ ∈ {1, 1/2, …, 1/64}`.
pub fn dyadic_deltas() -> Vec<f64> {
    (0..7).map(|j| 0.5f64.powi(j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_functions_reduce_to_kellogg() {
        let u = SampledFunction::from_fn(1, 2.0, 401, |x| 1.0 + 0.3 * x[0]).unwrap();
        let rec = interpolation_check(&u, 1.0, 2, 0.0).unwrap();
        // the jump to zero outside the cube is invisible on B_r
        assert!((rec.terms[0].lhs - 1.3).abs() < 1e-12);
        assert!((rec.l1 - 4.0).abs() < 1e-12);
        assert!(rec.terms[0].ratio() < 1.0);
    }

    #[test]
    fn stable_and_sharp_in_one_dimension() {
        let fam = bump_family(1, 2, &dyadic_deltas(), 801, 0.0).unwrap();
        assert!(fam.stable(0.03), "{:?}", fam.growth);
        assert!(fam.constants.iter().all(|c| *c < 2.0));
        let sharp = bump_family(1, 2, &dyadic_deltas(), 801, 0.05).unwrap();
        for g in &sharp.growth {
            assert!((g - 0.15).abs() < 0.03, "{g}");
        }
    }

    #[test]
    fn coarse_sampling_is_rejected() {
        let u = SampledFunction::from_fn(1, 1.0, 7, |x| bump(&[x[0] * 4.0])).unwrap();
        assert!(matches!(interpolation_check(&u, 1.0, 2, 0.0), Err(Error::Input(_))));
    }
}
