//! Finite-dimensional models: polynomial functions with exact gradients,
//! their gradient flows with curve length, the polynomial decay implied by a
//! gradient inequality, and the two-region Taylor argument near a degenerate
//! critical point.

use crate::error::{Error, Result};
use crate::harness::loja::loglog_slope;

/// `f(x) = Σ c · Π x_i^{e_i}` on `R^d`, with the coordinates split into
/// degenerate ones `y` and nondegenerate ones `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFunction {
    dim: usize,
    terms: Vec<(f64, Vec<u32>)>,
    degenerate: Vec<usize>,
}

impl ModelFunction {
    pub fn new(dim: usize, terms: Vec<(f64, Vec<u32>)>, degenerate: Vec<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("dimension must be positive".into()));
        }
        if terms.iter().any(|(c, e)| e.len() != dim || !c.is_finite()) {
            return Err(Error::Input(format!("every term needs {dim} exponents and a finite coefficient")));
        }
        if degenerate.iter().any(|&i| i >= dim) {
            return Err(Error::Input("degenerate coordinate out of range".into()));
        }
        Ok(Self { dim, terms, degenerate })
    }

    /// `Σ a_i x_i²`, with no degenerate directions.
    pub fn quadratic(a: &[f64]) -> Result<Self> {
        let d = a.len();
        let terms = (0..d)
            .map(|i| {
                let mut e = vec![0; d];
                e[i] = 2;
                (a[i], e)
            })
            .collect();
        Self::new(d, terms, vec![])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degenerate(&self) -> &[usize] {
        &self.degenerate
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * monomial(x, e, usize::MAX)).sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for (c, e) in &self.terms {
            for (i, gi) in g.iter_mut().enumerate() {
                if e[i] > 0 {
                    *gi += c * e[i] as f64 * monomial(x, e, i);
                }
            }
        }
        g
    }

    /// Norms of the degenerate and nondegenerate parts of `x`.
    pub fn split(&self, x: &[f64]) -> (f64, f64) {
        let (mut y, mut z) = (0.0, 0.0);
        for (i, v) in x.iter().enumerate() {
            if self.degenerate.contains(&i) {
                y += v * v;
            } else {
                z += v * v;
            }
        }
        (y.sqrt(), z.sqrt())
    }
}

/// `Π x_j^{e_j}`, with the exponent of coordinate `skip` lowered by one.
fn monomial(x: &[f64], e: &[u32], skip: usize) -> f64 {
    x.iter()
        .zip(e)
        .enumerate()
        .map(|(j, (v, &p))| v.powi(if j == skip { p as i32 - 1 } else { p as i32 }))
        .product()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Trajectories leaving `|x| ≤ neighborhood` stop with a flag.
    pub neighborhood: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-14, neighborhood: f64::INFINITY, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowExit {
    Completed,
    LeftNeighborhood,
    BlowUp,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// `∫|∇f| dt`, the length of the curve.
    pub length: f64,
    pub exit: FlowExit,
}

impl Trajectory {
    /// `|x(0) − x(T)|`.
    pub fn displacement(&self) -> f64 {
        let (a, b) = (&self.points[0], self.points.last().expect("non-empty"));
        norm(&a.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>())
    }

    /// Whether `f` decreases along the recorded points; strict unless the
    /// start is critical.
    pub fn is_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0] || (w[1] == w[0] && self.length == 0.0))
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrates `x' = −∇f(x)` on `[0, T]` with the Dormand–Prince 5(4) pair.
/// The curve length is carried as an extra component `ℓ' = |∇f|`.
pub fn ode_gradient_flow(f: &ModelFunction, x0: &[f64], t_end: f64, opts: &FlowOptions) -> Result<Trajectory> {
    if x0.len() != f.dim() {
        return Err(Error::Input(format!("start point has {} coordinates, expected {}", x0.len(), f.dim())));
    }
    if !(t_end > 0.0) {
        return Err(Error::Input("end time must be positive".into()));
    }
    let d = f.dim();
    let rhs = |s: &[f64]| -> Vec<f64> {
        let g = f.gradient(&s[..d]);
        let mut out: Vec<f64> = g.iter().map(|v| -v).collect();
        out.push(norm(&g));
        out
    };
    let mut state: Vec<f64> = x0.iter().copied().chain(std::iter::once(0.0)).collect();
    let mut traj = Trajectory { times: vec![0.0], points: vec![x0.to_vec()], values: vec![f.value(x0)], length: 0.0, exit: FlowExit::Completed };
    if norm(&f.gradient(x0)) == 0.0 {
        traj.times.push(t_end);
        traj.points.push(x0.to_vec());
        traj.values.push(traj.values[0]);
        return Ok(traj);
    }
    let mut t = 0.0;
    let mut h = (t_end * 1e-3).min(1e-3);
    let mut k1 = rhs(&state);
    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(traj);
        }
        h = h.min(t_end - t);
        let mut ks = vec![k1.clone()];
        for a in A.iter() {
            let stage: Vec<f64> = (0..=d).map(|c| state[c] + h * a.iter().zip(&ks).map(|(ai, k)| ai * k[c]).sum::<f64>()).collect();
            ks.push(rhs(&stage));
        }
        let next: Vec<f64> = (0..=d).map(|c| state[c] + h * B5.iter().zip(&ks).map(|(b, k)| b * k[c]).sum::<f64>()).collect();
        let err = (0..d)
            .map(|c| {
                let e = h * B4.iter().zip(&B5).zip(&ks).map(|((b4, b5), k)| (b5 - b4) * k[c]).sum::<f64>();
                let sc = opts.atol + opts.rtol * state[c].abs().max(next[c].abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            .sqrt()
            / (d as f64).sqrt();
        if !next.iter().all(|v| v.is_finite()) || norm(&next[..d]) > 1e12 {
            traj.exit = FlowExit::BlowUp;
            return Ok(traj);
        }
        if err <= 1.0 {
            t += h;
            state = next;
            k1 = ks.pop().expect("seven stages");
            traj.times.push(t);
            traj.points.push(state[..d].to_vec());
            traj.values.push(f.value(&state[..d]));
            traj.length = state[d];
            if norm(&state[..d]) > opts.neighborhood {
                traj.exit = FlowExit::LeftNeighborhood;
                return Ok(traj);
            }
        }
        h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        if h < 1e-300 {
            traj.exit = FlowExit::BlowUp;
            return Ok(traj);
        }
    }
    traj.exit = FlowExit::StepLimit;
    Ok(traj)
}

/// Polynomial decay of `f − f_∞` along a flow satisfying `|∇f| ≥ c |f|^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDecay {
    pub beta: f64,
    /// `inf |∇f|/|f|^β` along the trajectory.
    pub c: f64,
    /// `C = ((2β−1)c²)^{−1/(2β−1)}`, so that `f(t) ≤ C t^{−1/(2β−1)}`.
    pub constant: f64,
    pub exponent: f64,
    /// Fitted log-log slope of `f` over the second half of the trajectory.
    pub fitted_exponent: f64,
    /// `max_{t>0} f(t) t^{1/(2β−1)} / C`.
    pub worst_ratio: f64,
    pub verified: bool,
}

/// Integrating `f' = −|∇f|² ≤ −c² f^{2β}` gives `f(t)^{1−2β} ≥ (2β−1)c² t`;
/// checks this against the trajectory, where `f ≥ 0` with limit value 0.
pub fn power_decay_check(f: &ModelFunction, traj: &Trajectory, beta: f64) -> Result<PowerDecay> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::Input(format!("need β ∈ (1/2, 1), got {beta}")));
    }
    if traj.values.iter().any(|v| *v < 0.0) {
        return Err(Error::Input("decay check needs f ≥ 0 along the trajectory".into()));
    }
    let c = traj
        .points
        .iter()
        .zip(&traj.values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(x, v)| norm(&f.gradient(x)) / v.powf(beta))
        .fold(f64::INFINITY, f64::min);
    let exponent = 1.0 / (2.0 * beta - 1.0);
    let constant = ((2.0 * beta - 1.0) * c * c).powf(-exponent);
    let worst_ratio = traj
        .times
        .iter()
        .zip(&traj.values)
        .skip(1)
        .map(|(t, v)| v * t.powf(exponent) / constant)
        .fold(0.0, f64::max);
    let t_end = *traj.times.last().expect("non-empty");
    let tail: Vec<(f64, f64)> = traj.times.iter().zip(&traj.values).filter(|(t, v)| **t >= 0.5 * t_end && **v > 0.0).map(|(t, v)| (*t, *v)).collect();
    let fitted_exponent = loglog_slope(&tail).map(|fit| -fit.slope).unwrap_or(f64::NAN);
    Ok(PowerDecay { beta, c, constant, exponent, fitted_exponent, worst_ratio, verified: worst_ratio <= 1.0 + 1e-6 })
}

/// Fit of `|f|^β ≤ C|∇f|` on one region of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionFit {
    pub name: &'static str,
    pub points: usize,
    /// `max |f|^β / |∇f|`, zero on an empty region.
    pub constant: f64,
}

/// First Łojasiewicz hypothesis `|∇f| ≥ c|x|²` under grid refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub c_coarse: f64,
    pub c_fine: f64,
    pub pass: bool,
    /// Region containing the fine-grid minimizer when the check fails.
    pub broken_region: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorReport {
    pub split_eps: f64,
    pub beta: f64,
    pub regions: Vec<RegionFit>,
    /// The largest region constant on the coarse and on the refined grid.
    pub constant_coarse: f64,
    pub constant_fine: f64,
    pub hypothesis: HypothesisCheck,
    pub pass: bool,
}

pub const NEAR_DEGENERATE: &str = "|z|² ≤ ε|y|";
pub const NONDEGENERATE: &str = "|z|² > ε|y|";

/// Points of the tensor grid with `n` nodes per axis on `[−h, h]^d`, origin
/// excluded.
fn grid(dim: usize, half_width: f64, n: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = n.pow(dim as u32);
    let step = 2.0 * half_width / (n - 1) as f64;
    (0..total).filter_map(move |mut idx| {
        let mut x = Vec::with_capacity(dim);
        for _ in 0..dim {
            x.push(-half_width + (idx % n) as f64 * step);
            idx /= n;
        }
        (norm(&x) > 1e-14 * half_width).then_some(x)
    })
}

fn region_fits(f: &ModelFunction, half_width: f64, n: usize, split_eps: f64, beta: f64) -> (Vec<RegionFit>, f64, Option<&'static str>) {
    let mut fits = vec![RegionFit { name: NEAR_DEGENERATE, points: 0, constant: 0.0 }, RegionFit { name: NONDEGENERATE, points: 0, constant: 0.0 }];
    let mut c_min = f64::INFINITY;
    let mut argmin_region = None;
    for x in grid(f.dim(), half_width, n) {
        let (y, z) = f.split(&x);
        let which = usize::from(z * z > split_eps * y);
        let g = norm(&f.gradient(&x));
        let ratio = if g > 0.0 { f.value(&x).abs().powf(beta) / g } else { f64::INFINITY };
        fits[which].points += 1;
        fits[which].constant = fits[which].constant.max(ratio);
        let r2 = x.iter().map(|v| v * v).sum::<f64>();
        if g / r2 < c_min {
            c_min = g / r2;
            argmin_region = Some(fits[which].name);
        }
    }
    (fits, c_min, argmin_region)
}

/// Two-case Taylor argument near a critical point at the origin: splits the
/// neighborhood `[−h, h]^d` by `|z|² ≶ ε|y|`, fits `C` in `|f|^β ≤ C|∇f|` on
/// each part, and tests `|∇f| ≥ c|x|²` by refining the grid from `n` to
/// `2n + 1` nodes per axis. The hypothesis fails when the refined minimum
/// drops below 0.6 of the coarse one, and the region holding the minimizer
/// is reported.
pub fn taylor_region_check(f: &ModelFunction, half_width: f64, n: usize, split_eps: f64, beta: f64) -> Result<TaylorReport> {
    let origin = vec![0.0; f.dim()];
    if f.value(&origin).abs() > 1e-14 || norm(&f.gradient(&origin)) > 1e-14 {
        return Err(Error::Precondition("the origin must be a critical point with f(0) = 0".into()));
    }
    if n < 3 || !(half_width > 0.0) {
        return Err(Error::Input("need at least 3 nodes per axis and a positive half width".into()));
    }
    let (coarse, c_coarse, _) = region_fits(f, half_width, n, split_eps, beta);
    let (fine, c_fine, region) = region_fits(f, half_width, 2 * n + 1, split_eps, beta);
    let constant_coarse = coarse.iter().map(|r| r.constant).fold(0.0, f64::max);
    let constant_fine = fine.iter().map(|r| r.constant).fold(0.0, f64::max);
    let holds = c_fine > 0.0 && c_fine >= 0.6 * c_coarse;
    let hypothesis = HypothesisCheck { c_coarse, c_fine, pass: holds, broken_region: if holds { None } else { region } };
    let pass = holds && constant_fine.is_finite() && constant_fine <= 1.5 * constant_coarse.max(f64::MIN_POSITIVE);
    Ok(TaylorReport { split_eps, beta, regions: fine, constant_coarse, constant_fine, hypothesis, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x2_y3() -> ModelFunction {
        ModelFunction::new(2, vec![(1.0, vec![2, 0]), (1.0, vec![0, 3])], vec![1]).unwrap()
    }

    #[test]
    fn exact_gradient() {
        let f = x2_y3();
        assert_eq!(f.value(&[0.5, 2.0]), 8.25);
        assert_eq!(f.gradient(&[0.5, 2.0]), vec![1.0, 12.0]);
    }

    #[test]
    fn quadratic_flow_is_exponential() {
        let f = ModelFunction::quadratic(&[1.0]).unwrap();
        let tr = ode_gradient_flow(&f, &[1.0], 10.0, &FlowOptions::default()).unwrap();
        assert_eq!(tr.exit, FlowExit::Completed);
        for (t, x) in tr.times.iter().zip(&tr.points) {
            assert!((x[0] - (-2.0 * t).exp()).abs() < 1e-9);
        }
        assert!((tr.length - (1.0 - (-20f64).exp())).abs() < 1e-9);
        assert!(tr.is_decreasing());
    }

    #[test]
    fn critical_start_stays_put() {
        let f = ModelFunction::quadratic(&[1.0, 2.0]).unwrap();
        let tr = ode_gradient_flow(&f, &[0.0, 0.0], 5.0, &FlowOptions::default()).unwrap();
        assert_eq!(tr.length, 0.0);
        assert!(tr.points.iter().all(|p| p == &vec![0.0, 0.0]));
    }

    #[test]
    fn exits_are_flagged() {
        // −x² pushes away from the origin
        let f = ModelFunction::quadratic(&[-1.0]).unwrap();
        let opts = FlowOptions { neighborhood: 2.0, ..Default::default() };
        let tr = ode_gradient_flow(&f, &[0.5], 10.0, &opts).unwrap();
        assert_eq!(tr.exit, FlowExit::LeftNeighborhood);
    }

    #[test]
    fn cubic_decay_matches_closed_form() {
        // f = x³: f' = −9 f^{4/3}, so f = (x₀^{−1} + 3t)^{−3} ≤ (3t)^{−3}
        let f = ModelFunction::new(1, vec![(1.0, vec![3])], vec![0]).unwrap();
        let tr = ode_gradient_flow(&f, &[0.5], 100.0, &FlowOptions::default()).unwrap();
        let last = *tr.values.last().unwrap();
        assert!((last / (2.0 + 300.0f64).powi(-3) - 1.0).abs() < 1e-7);
        let d = power_decay_check(&f, &tr, 2.0 / 3.0).unwrap();
        assert!((d.c - 3.0).abs() < 1e-12);
        assert!((d.constant - 1.0 / 27.0).abs() < 1e-12);
        assert!(d.verified);
        assert!((d.fitted_exponent - 3.0).abs() < 0.05);
    }

    #[test]
    fn taylor_cases() {
        let ok = taylor_region_check(&x2_y3(), 0.1, 41, 0.1, 2.0 / 3.0).unwrap();
        assert!(ok.hypothesis.pass && ok.pass, "{ok:?}");
        assert!(ok.regions.iter().all(|r| r.points > 0));
        let quartic = ModelFunction::new(2, vec![(1.0, vec![2, 0]), (1.0, vec![0, 4])], vec![1]).unwrap();
        let bad = taylor_region_check(&quartic, 0.1, 41, 0.1, 2.0 / 3.0).unwrap();
        assert!(!bad.hypothesis.pass && !bad.pass);
        assert_eq!(bad.hypothesis.broken_region, Some(NEAR_DEGENERATE));
    }
}
