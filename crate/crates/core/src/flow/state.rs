//! Flow state and time stepping of the graphical rescaled flow.
//!
//! The coefficient vector `c` of `u` evolves by
//! `ċ = Λc + P[χ(G(χu) − Lu)]`, where `Λ` holds the eigenvalues of `L`,
//! `G = w(η/2 − H_u)` is the graph speed and `P` is the Galerkin projection.
//! Inside the taper plateau this is exactly the rescaled flow; outside the
//! truncation the field follows the linear equation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::graph::{linear_operator_nodal, GraphEval, FOCAL_MARGIN};
use crate::spectral::basis::{GraphField, SpectralBasis, RADIUS};

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Exponential time differencing (second order): `L` exact, remainder explicit.
    ImexSpectral,
    /// Classical RK4 in the integrating-factor variable `e^{−Λs}c`.
    ExplicitRk4,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex-spectral" => Ok(Self::ImexSpectral),
            "explicit-rk4" => Ok(Self::ExplicitRk4),
            other => Err(Error::Input(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Step-size control for [`Integrator::advance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adaptive {
    /// Tolerance on the local error relative to `max(‖c‖, floor)`.
    pub rtol: f64,
    pub floor: f64,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self { rtol: 1e-5, floor: 1e-8, dt_min: 1e-4, dt_max: 1.0 }
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub scheme: Scheme,
    pub dt: f64,
    /// Remove the unstable modes (`λ > 0`) after every step.
    pub stabilize: bool,
    pub adaptive: Option<Adaptive>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { scheme: Scheme::ImexSpectral, dt: 0.01, stabilize: true, adaptive: None }
    }
}

/// Rescaled time and field.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub s: f64,
    pub u: GraphField,
    pub steps: usize,
}

impl FlowState {
    pub fn new(u: GraphField) -> Self {
        Self { s: 0.0, u, steps: 0 }
    }
}

/// Outcome of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    pub error_estimate: f64,
    pub rejected: usize,
}

/// A step together with the geometry of the state it started from.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: FlowState,
    /// Local error estimate (`NaN` for RK4).
    pub error_estimate: f64,
    pub start: GraphEval,
}

/// `φ₁(z) = (e^z − 1)/z`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        z.exp_m1() / z
    }
}

/// `φ₂(z) = (e^z − 1 − z)/z²`.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z.powi(4) / 720.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Time stepper bound to a spectral basis.
#[derive(Debug, Clone)]
pub struct Integrator {
    basis: Arc<SpectralBasis>,
    config: FlowConfig,
    unstable: Vec<usize>,
}

impl Integrator {
    pub fn new(basis: &Arc<SpectralBasis>, config: FlowConfig) -> Result<Self> {
        if !(config.dt > 0.0 && config.dt.is_finite()) {
            return Err(Error::Input(format!("time step must be positive, got {}", config.dt)));
        }
        if let Some(a) = config.adaptive {
            if !(a.rtol > 0.0 && a.dt_min > 0.0 && a.dt_max >= a.dt_min) {
                return Err(Error::Input("inconsistent adaptive step settings".into()));
            }
        }
        let unstable = (0..basis.len()).filter(|&i| basis.eigenvalues()[i] > 1e-12).collect();
        Ok(Self { basis: basis.clone(), config, unstable })
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    /// Storage indices of the modes with `λ > 0`.
    pub fn unstable_modes(&self) -> &[usize] {
        &self.unstable
    }

    /// Geometry of the tapered graph with breakdown checks.
    pub fn evaluate(&self, coeffs: &[f64], s: f64) -> Result<GraphEval> {
        let jet = self.basis.nodal_jet(coeffs, true);
        let min = jet.u.iter().copied().fold(f64::INFINITY, f64::min);
        if !min.is_finite() || jet.u.iter().any(|v| !v.is_finite()) {
            return Err(Error::GraphBreakdown { s, reason: "non-finite graph values".into() });
        }
        if min <= -RADIUS + FOCAL_MARGIN {
            return Err(Error::GraphBreakdown { s, reason: format!("graph reached u = {min:.4} near the axis") });
        }
        GraphEval::new(jet).map_err(|e| Error::GraphBreakdown { s, reason: e.to_string() })
    }

    /// Nonlinear remainder `P[χ(G(χu) − Lu)]`.
    pub fn remainder(&self, coeffs: &[f64], s: f64) -> Result<Vec<f64>> {
        Ok(self.remainder_with_eval(coeffs, s)?.0)
    }

    fn remainder_with_eval(&self, coeffs: &[f64], s: f64) -> Result<(Vec<f64>, GraphEval)> {
        let eval = self.evaluate(coeffs, s)?;
        let plain = self.basis.nodal_jet(coeffs, false);
        let lu = linear_operator_nodal(&plain);
        let taper = self.basis.taper();
        let mut vals = &eval.speed - lu;
        for (q, &y) in self.basis.y_nodes().iter().enumerate() {
            let chi = taper.jet(y).0;
            vals.column_mut(q).scale_mut(chi);
        }
        let out = self.basis.analyze(&vals);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::GraphBreakdown { s, reason: "non-finite flow speed".into() });
        }
        Ok((out, eval))
    }

    fn etd2(&self, c: &[f64], s: f64, h: f64) -> Result<(Vec<f64>, f64, GraphEval)> {
        let lam = self.basis.eigenvalues();
        let (n0, start) = self.remainder_with_eval(c, s)?;
        let a: Vec<f64> = (0..c.len()).map(|i| {
            let z = lam[i] * h;
            z.exp() * c[i] + h * phi1(z) * n0[i]
        }).collect();
        let n1 = self.remainder(&a, s + h)?;
        let mut err = 0.0;
        let out = (0..c.len()).map(|i| {
            let d = h * phi2(lam[i] * h) * (n1[i] - n0[i]);
            err += d * d;
            a[i] + d
        }).collect();
        Ok((out, err.sqrt(), start))
    }

    fn rk4(&self, c: &[f64], s: f64, h: f64) -> Result<(Vec<f64>, GraphEval)> {
        let lam = self.basis.eigenvalues();
        let e_half: Vec<f64> = lam.iter().map(|l| (l * h / 2.0).exp()).collect();
        let e_full: Vec<f64> = lam.iter().map(|l| (l * h).exp()).collect();
        let (k1, start) = self.remainder_with_eval(c, s)?;
        let c2: Vec<f64> = (0..c.len()).map(|i| e_half[i] * (c[i] + h / 2.0 * k1[i])).collect();
        let k2 = self.remainder(&c2, s + h / 2.0)?;
        let c3: Vec<f64> = (0..c.len()).map(|i| e_half[i] * c[i] + h / 2.0 * k2[i]).collect();
        let k3 = self.remainder(&c3, s + h / 2.0)?;
        let c4: Vec<f64> = (0..c.len()).map(|i| e_full[i] * c[i] + h * e_half[i] * k3[i]).collect();
        let k4 = self.remainder(&c4, s + h)?;
        let out = (0..c.len())
            .map(|i| e_full[i] * c[i] + h / 6.0 * (e_full[i] * k1[i] + 2.0 * e_half[i] * (k2[i] + k3[i]) + k4[i]))
            .collect();
        Ok((out, start))
    }

    fn project(&self, c: &mut [f64]) {
        if self.config.stabilize {
            for &i in &self.unstable {
                c[i] = 0.0;
            }
        }
    }

    /// One step of size `h`. On failure the input state is left untouched.
    pub fn step_with(&self, state: &FlowState, h: f64) -> Result<StepOutput> {
        if !(h > 0.0) {
            return Err(Error::Input(format!("time step must be positive, got {h}")));
        }
        let c = state.u.coeffs();
        let (mut next, err, start) = match self.config.scheme {
            Scheme::ImexSpectral => self.etd2(c, state.s, h)?,
            Scheme::ExplicitRk4 => {
                let (next, start) = self.rk4(c, state.s, h)?;
                (next, f64::NAN, start)
            }
        };
        self.project(&mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::GraphBreakdown { s: state.s + h, reason: "non-finite coefficients".into() });
        }
        let u = GraphField::from_coeffs(&self.basis, next)?;
        Ok(StepOutput { state: FlowState { s: state.s + h, u, steps: state.steps + 1 }, error_estimate: err, start })
    }

    /// One fixed step of the configured size.
    pub fn step(&self, state: &FlowState) -> Result<FlowState> {
        Ok(self.step_with(state, self.config.dt)?.state)
    }

    /// One step of at most `limit`, choosing the size adaptively when enabled.
    /// Returns the step, its bookkeeping and the suggested next size.
    pub fn advance(&self, state: &FlowState, dt_try: f64, limit: f64) -> Result<(StepOutput, StepInfo, f64)> {
        let Some(ad) = self.config.adaptive.filter(|_| self.config.scheme == Scheme::ImexSpectral) else {
            let h = self.config.dt.min(limit);
            let out = self.step_with(state, h)?;
            let info = StepInfo { dt: h, error_estimate: out.error_estimate, rejected: 0 };
            return Ok((out, info, self.config.dt));
        };
        let mut h = dt_try.clamp(ad.dt_min, ad.dt_max).min(limit);
        let mut rejected = 0;
        loop {
            let attempt = self.step_with(state, h);
            let scale = ad.rtol * state.u.coeffs().iter().map(|v| v * v).sum::<f64>().sqrt().max(ad.floor);
            match attempt {
                Ok(out) if out.error_estimate <= scale || h <= ad.dt_min => {
                    let err = out.error_estimate;
                    let grow = if err > 0.0 { (0.9 * (scale / err).sqrt()).clamp(0.2, 2.0) } else { 2.0 };
                    let suggestion = (h * grow).clamp(ad.dt_min, ad.dt_max);
                    return Ok((out, StepInfo { dt: h, error_estimate: err, rejected }, suggestion));
                }
                Ok(out) => {
                    let err = out.error_estimate;
                    h = (h * (0.9 * (scale / err).sqrt()).clamp(0.1, 0.5)).max(ad.dt_min);
                }
                Err(e @ Error::GraphBreakdown { .. }) if h <= ad.dt_min => return Err(e),
                Err(Error::GraphBreakdown { .. }) => h = (h * 0.25).max(ad.dt_min),
                Err(e) => return Err(e),
            }
            rejected += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(z: f64, shift: u32) -> f64 {
        // Σ z^j/(j+shift)!
        let mut term = (1..=shift).map(f64::from).product::<f64>().recip();
        let mut sum = 0.0;
        for j in 0..40 {
            sum += term;
            term *= z / f64::from(j + shift + 1);
        }
        sum
    }

    #[test]
    fn phi_functions_match_series() {
        for z in [-1.5, -0.3, -1.1e-2, -0.9e-2, -1.1e-3, -0.9e-3, 0.0, 1e-6, 0.9e-3, 1.1e-3, 0.9e-2, 1.1e-2, 0.7] {
            assert!((phi1(z) - series(z, 1)).abs() < 1e-14, "phi1({z})");
            assert!((phi2(z) - series(z, 2)).abs() < 2e-13, "phi2({z})");
        }
        assert!((phi1(-50.0) - 1.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn cylinder_is_stationary() {
        let b = SpectralBasis::new(16, 16, 12.0).unwrap();
        for scheme in [Scheme::ImexSpectral, Scheme::ExplicitRk4] {
            let it = Integrator::new(&b, FlowConfig { scheme, ..Default::default() }).unwrap();
            let mut st = FlowState::new(GraphField::zero(&b));
            for _ in 0..50 {
                st = it.step(&st).unwrap();
            }
            assert!(st.u.sup_norm() < 1e-14, "{scheme:?}: {}", st.u.sup_norm());
        }
    }
}
