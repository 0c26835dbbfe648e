//! Full diagnostic runs: the flow with per-sample cylinder fits and scales,
//! followed by the uniqueness and scale-compatibility reports.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::flow::runner::{run, RunOptions, RunOutput};
use crate::flow::series::FlowSeries;
use crate::flow::state::{FlowState, Integrator};
use crate::geometry::cylinder::CylinderSpec;
use crate::geometry::surface::{embed_graph, embed_graph_uniform};

use super::fit::{cylindrical_scale, fit_cylinder, shrinker_scale, ScaleOptions};
use super::loja::loglog_slope;

/// Which harness diagnostics accompany a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticOptions {
    /// Fit the cylinder on every `fit_every`-th sample (0 disables).
    pub fit_every: usize,
    /// Cylindrical scale on every `scale_every`-th sample (0 disables).
    pub scale_every: usize,
    pub scale: ScaleOptions,
    /// Uniform grid of the scale computation: `(n_θ, n_y)` over `|y| ≤ L`.
    pub scale_grid: (usize, usize),
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        Self { fit_every: 1, scale_every: 1, scale: ScaleOptions::default(), scale_grid: (64, 121) }
    }
}

/// Runs the flow and fills `d_𝒞(R)`, the axis, `r_ℓ` and the shrinker scale.
pub fn run_with_diagnostics(integrator: &Integrator, initial: FlowState, options: &RunOptions, diag: &DiagnosticOptions) -> Result<RunOutput> {
    let cyl = CylinderSpec::standard(1, 2)?;
    let mut warm: Option<Vector3<f64>> = None;
    let mut index = 0usize;
    let truncation = initial.u.basis().truncation();
    let mut out = run(integrator, initial, options, |state, _eval, row| {
        let k = index;
        index += 1;
        if diag.fit_every > 0 && k % diag.fit_every == 0 {
            let sample = embed_graph(&cyl, &state.u)?;
            let fit = fit_cylinder(&sample, options.radius, warm.or(Some(Vector3::z())))?;
            warm = Some(fit.axis);
            row.dc_r = fit.distance;
            row.axis_a = fit.axis[0];
            row.axis_b = fit.axis[1];
        }
        if diag.scale_every > 0 && k % diag.scale_every == 0 {
            let (nt, ny) = diag.scale_grid;
            let sample = embed_graph_uniform(&cyl, &state.u, nt, ny, truncation)?;
            let axis = warm.unwrap_or_else(Vector3::z);
            row.r_cyl = cylindrical_scale(&sample, &axis, &diag.scale)?.radius;
        }
        Ok(())
    })?;
    fill_shrinker_scale(&mut out.series, truncation)?;
    Ok(out)
}

/// Fills `R_shrink` on rows with neighbours one unit apart.
pub fn fill_shrinker_scale(series: &mut FlowSeries, cutoff: f64) -> Result<()> {
    let times: Vec<f64> = series.rows.iter().map(|r| r.s).collect();
    let find = |s: f64| times.iter().position(|t| (t - s).abs() < 1e-6);
    for i in 0..series.rows.len() {
        let s = series.rows[i].s;
        if let (Some(a), Some(b)) = (find(s - 1.0), find(s + 1.0)) {
            let drop = series.drop_between(a, b).max(0.0);
            series.rows[i].r_shrink = shrinker_scale(drop, cutoff)?.radius;
        }
    }
    Ok(())
}

/// Sum of a non-negative sequence sampled at times `s_j`, with the part
/// beyond the last sample extrapolated from a power-law fit to the last half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub partial: f64,
    /// Fitted decay exponent `p` of the increments, `δ_j ≈ C s_j^{−p}`.
    pub decay_exponent: f64,
    /// Estimated remainder `Σ_{j > N} δ_j` (infinite when `p ≤ 1`).
    pub tail: f64,
}

/// Sums `increments[j]` (attached to times `s[j] > 0` with uniform spacing)
/// and extrapolates the remainder. Increments at or below `floor` are
/// measurement noise and count as converged.
pub fn sum_with_tail(s: &[f64], increments: &[f64], floor: f64) -> Result<SeriesSum> {
    if s.len() != increments.len() || s.len() < 8 {
        return Err(Error::Data("need at least eight increments".into()));
    }
    let partial = increments.iter().sum();
    let start = s.len() / 2;
    let pairs: Vec<(f64, f64)> = (start..s.len()).filter(|&j| increments[j] > floor && s[j] > 0.0).map(|j| (s[j], increments[j])).collect();
    if pairs.len() < (s.len() - start) / 2 {
        // increments sit at the noise floor on most of the tail
        return Ok(SeriesSum { partial, decay_exponent: f64::INFINITY, tail: 0.0 });
    }
    let fit = loglog_slope(&pairs)?;
    let p = -fit.slope;
    let last = s[s.len() - 1];
    let spacing = (last - s[start]) / (s.len() - 1 - start) as f64;
    let tail = if p > 1.0 { fit.intercept.exp() * last.powf(1.0 - p) / ((p - 1.0) * spacing) } else { f64::INFINITY };
    Ok(SeriesSum { partial, decay_exponent: p, tail })
}

/// Outcome of [`uniqueness_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub axis_trajectory: Vec<(f64, Vector3<f64>)>,
    pub axis_variation: SeriesSum,
    pub sqrt_drops: SeriesSum,
    pub final_phi: f64,
    pub final_distance: f64,
    pub final_axis: Vector3<f64>,
    pub pass: bool,
    pub diagnosis: Option<String>,
}

/// Tolerances of the uniqueness test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessTolerances {
    pub axis_tail: f64,
    pub sqrt_tail: f64,
    pub final_phi: f64,
}

impl Default for UniquenessTolerances {
    fn default() -> Self {
        Self { axis_tail: 1e-3, sqrt_tail: 1e-4, final_phi: 1e-6 }
    }
}

/// Resolution of fitted axes; smaller changes are not distinguishable from
/// the optimizer's stopping noise.
pub const AXIS_NOISE: f64 = 1e-10;

fn axis_of(a: f64, b: f64) -> Vector3<f64> {
    Vector3::new(a, b, (1.0 - a * a - b * b).max(0.0).sqrt())
}

/// Axis total variation and `Σ (F(t_j) − F(t_{j+1}))^{1/2}` along a fitted
/// series, with extrapolated tails and the final state's `φ` and distance.
pub fn uniqueness_report(series: &FlowSeries, tol: &UniquenessTolerances) -> Result<UniquenessReport> {
    let fitted: Vec<_> = series.rows.iter().filter(|r| r.axis_a.is_finite() && r.s >= 1.0).collect();
    if fitted.len() < 9 {
        return Err(Error::Data("uniqueness report needs at least nine fitted rows past s = 1".into()));
    }
    let axis_trajectory: Vec<(f64, Vector3<f64>)> = fitted.iter().map(|r| (r.s, axis_of(r.axis_a, r.axis_b))).collect();
    let (ts, dv): (Vec<f64>, Vec<f64>) = axis_trajectory.windows(2).map(|w| (w[1].0, (w[1].1 - w[0].1).norm())).unzip();
    let axis_variation = sum_with_tail(&ts, &dv, AXIS_NOISE)?;
    let unit: Vec<usize> = (0..series.rows.len()).filter(|&i| series.rows[i].s >= 1.0).collect();
    let mut st = Vec::new();
    let mut sd = Vec::new();
    for w in unit.windows(2) {
        let (a, b) = (w[0], w[1]);
        st.push(series.rows[b].s);
        sd.push(series.drop_between(a, b).max(0.0).sqrt());
    }
    let sqrt_drops = sum_with_tail(&st, &sd, 0.0)?;
    let last = series.rows.last().expect("non-empty");
    let final_fit = fitted.last().expect("non-empty");
    let mut reasons = Vec::new();
    if axis_variation.tail >= tol.axis_tail {
        reasons.push(format!("axis variation tail {:.3e} (decay exponent {:.3})", axis_variation.tail, axis_variation.decay_exponent));
    }
    if sqrt_drops.tail >= tol.sqrt_tail {
        reasons.push(format!("sqrt-drop tail {:.3e} (decay exponent {:.3})", sqrt_drops.tail, sqrt_drops.decay_exponent));
    }
    if !(last.phi_l2 < tol.final_phi) {
        reasons.push(format!("final ‖φ‖ = {:.3e}", last.phi_l2));
    }
    Ok(UniquenessReport {
        final_axis: axis_of(final_fit.axis_a, final_fit.axis_b),
        axis_trajectory,
        axis_variation,
        sqrt_drops,
        final_phi: last.phi_l2,
        final_distance: final_fit.dc_r,
        pass: reasons.is_empty(),
        diagnosis: if reasons.is_empty() { None } else { Some(reasons.join("; ")) },
    })
}

/// Exponential decay rate of `‖u‖` over rows with `s ∈ [from, to]`.
pub fn decay_rate(series: &FlowSeries, from: f64, to: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series.rows.iter().filter(|r| r.s >= from && r.s <= to && r.u_l2 > 0.0).map(|r| (r.s, r.u_l2.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::Data("too few rows in the decay window".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// Outcome of [`scale_compatibility_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleReport {
    /// `(t, min r_ℓ over [t − ½, t + 1], R(Σ_t), ratio)`.
    pub rows: Vec<(f64, f64, f64, f64)>,
    /// `min ratio − 1` over the first half of the tail window.
    pub mu_fit: f64,
    pub pass: bool,
    pub window: (f64, f64),
}

/// Compares the cylindrical scale with the shrinker scale on the rows with
/// `s ≥ tail_start`; earlier rows are reported without pass/fail.
pub fn scale_compatibility_report(series: &FlowSeries, tail_start: f64, tolerance: f64) -> Result<ScaleReport> {
    let rows = &series.rows;
    let mut out = Vec::new();
    for r in rows {
        if !r.r_shrink.is_finite() && !r.r_shrink.is_infinite() {
            continue;
        }
        let min_r = rows.iter().filter(|q| q.s >= r.s - 0.5 - 1e-9 && q.s <= r.s + 1.0 + 1e-9 && q.r_cyl.is_finite()).map(|q| q.r_cyl).fold(f64::INFINITY, f64::min);
        if !min_r.is_finite() {
            continue;
        }
        let ratio = if r.r_shrink.is_infinite() { f64::INFINITY } else { min_r / r.r_shrink };
        out.push((r.s, min_r, r.r_shrink, ratio));
    }
    let tail: Vec<_> = out.iter().filter(|r| r.0 >= tail_start).collect();
    if tail.len() < 2 {
        return Err(Error::Data("scale compatibility needs at least two tail rows".into()));
    }
    let half = tail.len().div_ceil(2);
    let mu_fit = tail[..half].iter().map(|r| r.3).fold(f64::INFINITY, f64::min) - 1.0;
    let pass = mu_fit > 0.0 && tail.iter().all(|r| r.3 >= 1.0 + mu_fit - tolerance);
    let window = (tail[0].0, tail[tail.len() - 1].0);
    Ok(ScaleReport { rows: out, mu_fit, pass, window })
}
