//! Time series of flow diagnostics and the identities they must satisfy.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::functional::{f_value, gradient_norm, phi_norms};
use super::state::FlowState;
use crate::error::{Error, Result};
use crate::geometry::cylinder::CylinderSpec;
use crate::geometry::graph::GraphEval;
use crate::geometry::simons::ParametricGrid;
use crate::spectral::basis::GraphField;

/// Diagnostics of one sampled state. Quantities that have not been computed
/// are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRow {
    pub step: usize,
    pub s: f64,
    pub f: f64,
    pub phi_l1_br: f64,
    pub phi_l2_br: f64,
    pub phi_l2: f64,
    pub dfds: f64,
    pub dc_r: f64,
    pub r_cyl: f64,
    pub r_shrink: f64,
    pub axis_a: f64,
    pub axis_b: f64,
    /// `‖𝓜(u)‖`.
    pub grad_norm: f64,
    /// `‖u‖` in the Gaussian `L²` norm of the reference cylinder.
    pub u_l2: f64,
    /// Monic amplitudes of `y² − 2`, `y cos θ`, `y sin θ`.
    pub kernel: [f64; 3],
    /// `(4π)^{−1} ∫_0^s ‖φ‖²_{L²} ds`, accumulated step by step. Differences of
    /// this column measure `F`-drops without cancellation.
    pub dissipated: f64,
}

impl FlowRow {
    /// Column names of the CSV form.
    pub const HEADER: [&'static str; 12] =
        ["step", "s", "F", "phi_L1_BR", "phi_L2_BR", "phi_L2", "dFds", "dC_R", "r_cyl", "R_shrink", "axis_a", "axis_b"];

    /// Evaluates the basic diagnostics from the geometry of `state`.
    pub fn from_eval(state: &FlowState, eval: &GraphEval, radius: f64) -> Self {
        let basis = state.u.basis();
        let (l1, l2r, l2) = phi_norms(basis, eval, radius);
        Self {
            step: state.steps,
            s: state.s,
            f: f_value(basis, eval),
            phi_l1_br: l1,
            phi_l2_br: l2r,
            phi_l2: l2,
            dfds: f64::NAN,
            dc_r: f64::NAN,
            r_cyl: f64::NAN,
            r_shrink: f64::NAN,
            axis_a: f64::NAN,
            axis_b: f64::NAN,
            grad_norm: gradient_norm(basis, eval),
            u_l2: state.u.l2_norm(),
            kernel: kernel_amplitudes(&state.u),
            dissipated: f64::NAN,
        }
    }

    pub fn values(&self) -> [f64; 12] {
        [
            self.step as f64,
            self.s,
            self.f,
            self.phi_l1_br,
            self.phi_l2_br,
            self.phi_l2,
            self.dfds,
            self.dc_r,
            self.r_cyl,
            self.r_shrink,
            self.axis_a,
            self.axis_b,
        ]
    }
}

/// Monic amplitudes of the kernel modes `y² − 2`, `y cos θ`, `y sin θ`.
pub fn kernel_amplitudes(u: &GraphField) -> [f64; 3] {
    let basis = u.basis();
    let mut out = [0.0; 3];
    for (slot, (j, m)) in out.iter_mut().zip([(0i64, 2usize), (1, 1), (-1, 1)]) {
        if let Ok((idx, scale)) = basis.monic_mode(j, m) {
            *slot = u.coeffs()[idx] / scale;
        }
    }
    out
}

/// Ordered diagnostics of one run.
#[derive(Debug, Clone, Default)]
pub struct FlowSeries {
    pub rows: Vec<FlowRow>,
}

impl FlowSeries {
    pub fn push(&mut self, row: FlowRow) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest increase of `F` between consecutive rows.
    pub fn max_f_increase(&self) -> f64 {
        self.rows.windows(2).map(|w| w[1].f - w[0].f).fold(0.0, f64::max)
    }

    /// `F`-drop between rows `i < j` from the accumulated dissipation.
    pub fn drop_between(&self, i: usize, j: usize) -> f64 {
        self.rows[j].dissipated - self.rows[i].dissipated
    }

    /// Fills `dF/ds` by second-order finite differences on the (possibly
    /// non-uniform) sample times.
    pub fn fill_derivatives(&mut self) {
        let n = self.rows.len();
        if n < 2 {
            return;
        }
        let s: Vec<f64> = self.rows.iter().map(|r| r.s).collect();
        let f: Vec<f64> = self.rows.iter().map(|r| r.f).collect();
        for i in 0..n {
            let (a, b, c) = if i == 0 {
                (0, 1, 2.min(n - 1))
            } else if i == n - 1 {
                (n.saturating_sub(3), n - 2, n - 1)
            } else {
                (i - 1, i, i + 1)
            };
            self.rows[i].dfds = if a == b || b == c || a == c {
                (f[1] - f[0]) / (s[1] - s[0])
            } else {
                lagrange_derivative([s[a], s[b], s[c]], [f[a], f[b], f[c]], s[i])
            };
        }
    }
}

fn lagrange_derivative(x: [f64; 3], y: [f64; 3], at: f64) -> f64 {
    let mut d = 0.0;
    for j in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&m| m != j).collect();
        let denom: f64 = others.iter().map(|&m| x[j] - x[m]).product();
        let num = others.iter().map(|&m| at - x[others.iter().copied().find(|&o| o != m).unwrap()]).sum::<f64>();
        d += y[j] * num / denom;
    }
    d
}

/// Mismatch between `dF/ds` and `−(4π)^{−1}‖φ‖²` over the interior samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyResidual {
    pub max_abs: f64,
    /// `max_abs / max |dF/ds|`.
    pub relative: f64,
    pub samples: usize,
}

/// Checks `dF/ds = −(4π)^{−1} ∫ φ² e^{−|x|²/4}` along a series whose
/// derivatives have been filled.
pub fn energy_identity_residual(series: &FlowSeries) -> Result<EnergyResidual> {
    let n = series.rows.len();
    if n < 3 {
        return Err(Error::Input("energy identity needs at least three samples".into()));
    }
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for r in &series.rows[1..n - 1] {
        if !r.dfds.is_finite() {
            return Err(Error::Input(format!("dF/ds missing at s = {}", r.s)));
        }
        max_abs = max_abs.max((r.dfds + r.phi_l2 * r.phi_l2 / (4.0 * PI)).abs());
        scale = scale.max(r.dfds.abs());
    }
    Ok(EnergyResidual { max_abs, relative: if scale > 0.0 { max_abs / scale } else { max_abs }, samples: n - 2 })
}

/// Mismatch between the observed `∂_s φ` and `Lφ` corrected for the
/// tangential motion of the graph parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiResidual {
    pub max_abs: f64,
    /// `max |Lφ|` over the same nodes.
    pub scale: f64,
}

/// Evaluates the `φ` evolution identity at the middle of each triple of
/// consecutive, equally spaced states on a uniform grid over `|y| ≤ half_width`.
pub fn phi_evolution_residual(states: &[FlowState], n_theta: usize, n_y: usize, half_width: f64) -> Result<PhiResidual> {
    if states.len() < 3 {
        return Err(Error::Input("φ evolution needs at least three states".into()));
    }
    let cyl = CylinderSpec::standard(1, 2)?;
    let grids = states
        .iter()
        .map(|st| ParametricGrid::from_graph(&cyl, &st.u, n_theta, n_y, half_width))
        .collect::<Result<Vec<_>>>()?;
    let mut out = PhiResidual { max_abs: 0.0, scale: 0.0 };
    for w in 0..states.len() - 2 {
        let h0 = states[w + 1].s - states[w].s;
        let h1 = states[w + 2].s - states[w + 1].s;
        if (h0 - h1).abs() > 1e-9 * h0.abs() || h0 <= 0.0 {
            return Err(Error::Input("states must be equally spaced in s".into()));
        }
        let (g0, g1, g2) = (&grids[w], &grids[w + 1], &grids[w + 2]);
        let phi: Vec<f64> = g1.points.iter().map(|p| p.phi).collect();
        for (i, q, lphi) in g1.apply_l(&phi) {
            let k = g1.idx(i, q);
            let p = &g1.points[k];
            let dphi = (g2.points[k].phi - g0.points[k].phi) / (2.0 * h0);
            let vel: Vector3<f64> = (g2.points[k].x - g0.points[k].x) / (2.0 * h0);
            let tangential = vel - p.normal * p.normal.dot(&vel);
            let predicted = lphi + g1.directional(&phi, i, q, &tangential);
            out.max_abs = out.max_abs.max((dphi - predicted).abs());
            out.scale = out.scale.max(lphi.abs());
        }
    }
    Ok(out)
}
