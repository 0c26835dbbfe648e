//! Sequences with `K f(t)^{1+ε} ≤ f(t−1) − f(t+1)`: the polynomial decay
//! bound with its explicit constant, square-root increment sums and a
//! generator of admissible sequences.

use rand::Rng;

use crate::error::{Error, Result};
use crate::harness::pipeline::sum_with_tail;

/// A non-negative sequence together with the exponent and constant of its
/// admissibility condition.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySequence {
    pub values: Vec<f64>,
    pub eps: f64,
    pub k: f64,
}

impl DecaySequence {
    pub fn new(values: Vec<f64>, eps: f64, k: f64) -> Result<Self> {
        if !(eps > 0.0) || !(k > 0.0) {
            return Err(Error::Input(format!("need ε > 0 and K > 0, got ε = {eps}, K = {k}")));
        }
        if values.len() < 3 {
            return Err(Error::Input("sequence needs at least three values".into()));
        }
        if let Some(t) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Input(format!("f({t}) = {} is not a non-negative number", values[t])));
        }
        Ok(Self { values, eps, k })
    }

    /// First `t` violating monotonicity or admissibility, if any.
    pub fn first_violation(&self) -> Option<(usize, String)> {
        let f = &self.values;
        for t in 1..f.len() {
            if f[t] > f[t - 1] * (1.0 + 1e-14) {
                return Some((t, format!("f({t}) = {:e} exceeds f({}) = {:e}", f[t], t - 1, f[t - 1])));
            }
        }
        for t in 1..f.len() - 1 {
            let lhs = self.k * f[t].powf(1.0 + self.eps);
            let rhs = f[t - 1] - f[t + 1];
            if lhs > rhs + 1e-14 * f[t - 1] {
                return Some((t, format!("K f(t)^(1+ε) = {lhs:e} > f(t−1) − f(t+1) = {rhs:e}")));
            }
        }
        None
    }

    pub fn is_admissible(&self) -> bool {
        self.first_violation().is_none()
    }
}

/// Constant of the polynomial decay bound and its verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    /// `f(t) ≤ C t^{−1/ε}` for `t ≥ 1`.
    pub c: f64,
    /// Normalization `f = C₀ g` with `g(0) ≤ 1` and `g` admissible with `K = 1`.
    pub c0: f64,
    pub t0: f64,
    pub verified: bool,
    /// `max_t f(t) t^{1/ε} / C`.
    pub worst_ratio: f64,
}

/// Constant from the proof: with `C₀ = max(f(0), K^{−1/ε})` the sequence
/// `g = f/C₀` has `g(0) ≤ 1` and is admissible with `K = 1`; then
/// `t₀ = 4·2^ε g(0)^{−ε}/ε + 2` and `C = C₀ g(0) t₀^{1/ε}`.
pub fn discrete_decay_bound(seq: &DecaySequence) -> Result<DecayBound> {
    if let Some((t, why)) = seq.first_violation() {
        return Err(Error::Precondition(format!("sequence not admissible at t = {t}: {why}")));
    }
    let eps = seq.eps;
    let f0 = seq.values[0];
    if f0 == 0.0 {
        return Ok(DecayBound { c: 0.0, c0: 0.0, t0: 0.0, verified: true, worst_ratio: 0.0 });
    }
    let c0 = f0.max(seq.k.powf(-1.0 / eps));
    let g0 = f0 / c0;
    let t0 = 4.0 * 2f64.powf(eps) * g0.powf(-eps) / eps + 2.0;
    let c = c0 * g0 * t0.powf(1.0 / eps);
    let worst_ratio = seq
        .values
        .iter()
        .enumerate()
        .skip(1)
        .map(|(t, v)| v * (t as f64).powf(1.0 / eps) / c)
        .fold(0.0, f64::max);
    Ok(DecayBound { c, c0, t0, verified: worst_ratio <= 1.0, worst_ratio })
}

/// Partial sums of `√(f(j) − f(j+1))` and a certified bound on the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtSum {
    pub partial_sums: Vec<f64>,
    /// Exponent `p ∈ (1, 1/ε)` of the Cauchy–Schwarz split.
    pub p: f64,
    /// Bound on `Σ_{j ≥ N} √(f(j) − f(j+1))` for the infinite continuation
    /// obeying the decay bound, with `N` the last index.
    pub tail_bound: f64,
    /// Remainder extrapolated from a power-law fit of the last half of the
    /// increments; infinite when they do not decay faster than `1/j`.
    pub tail_estimate: f64,
}

/// `Σ_{j≥1} √(f(j) − f(j+1))` with the tail certificate
/// `Σ_{j≥N} √Δ_j ≤ (Σ_{j≥N} j^{−p})^{1/2} (Σ_{j≥N} j^p Δ_j)^{1/2}`, where the
/// second factor is bounded by summation by parts and `f ≤ C j^{−1/ε}`.
pub fn sqrt_increment_sum(seq: &DecaySequence) -> Result<SqrtSum> {
    if seq.eps >= 1.0 {
        return Err(Error::Unsupported(format!("square-root sums need ε < 1, got {}", seq.eps)));
    }
    let bound = discrete_decay_bound(seq)?;
    let f = &seq.values;
    let incs: Vec<f64> = (1..f.len() - 1).map(|j| (f[j] - f[j + 1]).max(0.0).sqrt()).collect();
    let partial_sums: Vec<f64> = incs
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let times: Vec<f64> = (1..f.len() - 1).map(|j| j as f64).collect();
    let tail_estimate = sum_with_tail(&times, &incs, 0.0).map(|s| s.tail).unwrap_or(f64::INFINITY);
    let q = 1.0 / seq.eps;
    let p = 0.5 * (1.0 + q);
    let n = (f.len() - 1) as f64;
    let zeta_tail = n.powf(-p) + n.powf(1.0 - p) / (p - 1.0);
    let weighted = n.powf(p) * f[f.len() - 1] + p * bound.c * n.powf(p - q) / (q - p);
    Ok(SqrtSum { partial_sums, p, tail_bound: (zeta_tail * weighted).sqrt(), tail_estimate })
}

/// Builds an admissible sequence of length `len` backwards from a positive
/// tail: `f(t−1) = f(t+1) + K f(t)^{1+ε} + slack_t`, where the slack
/// `(f(t) − f(t+1)) + σ·U·f(t)` (`U` uniform on `[0, 1)`) keeps it monotone.
/// The recursion stops early once a value exceeds 1, so the result may be
/// shorter than `len`.
pub fn generate_admissible(rng: &mut impl Rng, len: usize, eps: f64, k: f64, tail: f64, slack: f64) -> Result<DecaySequence> {
    if len < 3 || !(tail > 0.0) || !(slack >= 0.0) {
        return Err(Error::Input("need len ≥ 3, tail > 0 and slack ≥ 0".into()));
    }
    let mut rev = vec![tail, tail * (1.0 + slack * rng.random::<f64>())];
    while rev.len() < len && rev[rev.len() - 1] <= 1.0 {
        let m = rev.len();
        let (next, cur) = (rev[m - 2], rev[m - 1]);
        let prev = next + k * cur.powf(1.0 + eps) + (cur - next) + slack * rng.random::<f64>() * cur;
        if !prev.is_finite() {
            return Err(Error::Domain("generated sequence overflowed".into()));
        }
        rev.push(prev);
    }
    rev.reverse();
    DecaySequence::new(rev, eps, k)
}
