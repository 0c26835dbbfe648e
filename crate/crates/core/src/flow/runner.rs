//! Driving a flow to a final time while sampling diagnostics.

use std::f64::consts::PI;

use super::functional::weighted_sum;
use super::series::{FlowRow, FlowSeries};
use super::state::{FlowState, Integrator};
use crate::error::{Error, Result};
use crate::geometry::graph::GraphEval;

/// Sampling and stopping options of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub s_end: f64,
    /// Spacing of diagnostic rows in `s`; steps are shortened to land on samples.
    pub sample_interval: f64,
    /// Radius `R` of the ball norms.
    pub radius: f64,
    /// Keep a copy of the state every this many steps (0 disables).
    pub checkpoint_every: usize,
    /// Keep every sampled state.
    pub keep_samples: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { s_end: 10.0, sample_interval: 1.0, radius: 10.0, checkpoint_every: 100, keep_samples: false }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Halt {
    Completed,
    Breakdown { s: f64, reason: String },
}

impl std::fmt::Display for Halt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Halt::Completed => write!(f, "completed"),
            Halt::Breakdown { s, reason } => write!(f, "graph breakdown at s = {s}: {reason}"),
        }
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: FlowSeries,
    pub final_state: FlowState,
    pub checkpoints: Vec<FlowState>,
    pub samples: Vec<FlowState>,
    pub halt: Halt,
    pub rejected_steps: usize,
}

fn phi_sq(state: &FlowState, eval: &GraphEval) -> f64 {
    weighted_sum(state.u.basis(), eval, None, |i, q| eval.phi[(i, q)].powi(2)) / (4.0 * PI)
}

/// Runs `integrator` from `initial` to `options.s_end`. The hook may add
/// diagnostics to each sampled row. A graph breakdown ends the run with the
/// last valid state; other errors propagate.
pub fn run(
    integrator: &Integrator,
    initial: FlowState,
    options: &RunOptions,
    mut hook: impl FnMut(&FlowState, &GraphEval, &mut FlowRow) -> Result<()>,
) -> Result<RunOutput> {
    if !(options.sample_interval > 0.0) || !(options.s_end >= initial.s) || !(options.radius > 0.0) {
        return Err(Error::Input("invalid run options".into()));
    }
    let mut out = RunOutput {
        series: FlowSeries::default(),
        final_state: initial.clone(),
        checkpoints: Vec::new(),
        samples: Vec::new(),
        halt: Halt::Completed,
        rejected_steps: 0,
    };
    let mut state = initial;
    let mut eval = match integrator.evaluate(state.u.coeffs(), state.s) {
        Ok(e) => e,
        Err(Error::GraphBreakdown { s, reason }) => {
            out.halt = Halt::Breakdown { s, reason };
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    let mut dissipated = 0.0;
    let mut d_prev = phi_sq(&state, &eval);
    let tol = 1e-9 * options.sample_interval;
    let mut sample_index = 0usize;
    let mut sample = |state: &FlowState, eval: &GraphEval, dissipated: f64, out: &mut RunOutput| -> Result<()> {
        let mut row = FlowRow::from_eval(state, eval, options.radius);
        row.dissipated = dissipated;
        hook(state, eval, &mut row)?;
        out.series.push(row);
        if options.keep_samples {
            out.samples.push(state.clone());
        }
        Ok(())
    };
    sample(&state, &eval, dissipated, &mut out)?;
    let mut dt = integrator.config().dt;
    while state.s < options.s_end - tol {
        let next_sample = (initial_s(&out) + (sample_index + 1) as f64 * options.sample_interval).min(options.s_end);
        let step = integrator.advance(&state, dt, next_sample - state.s);
        let (result, info, suggestion) = match step {
            Ok(v) => v,
            Err(Error::GraphBreakdown { s, reason }) => {
                out.halt = Halt::Breakdown { s, reason };
                break;
            }
            Err(e) => return Err(e),
        };
        out.rejected_steps += info.rejected;
        dt = suggestion;
        state = result.state;
        eval = match integrator.evaluate(state.u.coeffs(), state.s) {
            Ok(e) => e,
            Err(Error::GraphBreakdown { s, reason }) => {
                out.halt = Halt::Breakdown { s, reason };
                break;
            }
            Err(e) => return Err(e),
        };
        let d_now = phi_sq(&state, &eval);
        dissipated += 0.5 * info.dt * (d_prev + d_now);
        d_prev = d_now;
        if options.checkpoint_every > 0 && state.steps % options.checkpoint_every == 0 {
            out.checkpoints.push(state.clone());
        }
        if (state.s - next_sample).abs() <= tol {
            sample_index += 1;
            sample(&state, &eval, dissipated, &mut out)?;
        }
        out.final_state = state.clone();
    }
    out.final_state = state;
    out.series.fill_derivatives();
    Ok(out)
}

fn initial_s(out: &RunOutput) -> f64 {
    out.series.rows.first().map_or(0.0, |r| r.s)
}
