//! Best-fitting cylinder, the cylindrical scale `r_ℓ` and the shrinker scale.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{Matrix2, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::cylinder::CylinderSpec;
use crate::geometry::surface::{SampleGrid, SurfaceSample};
use crate::spectral::basis::RADIUS;

/// Number of quasi-random starts of the global axis search.
pub const FIT_STARTS: usize = 16;

/// Outcome of [`fit_cylinder`].
#[derive(Debug, Clone)]
pub struct CylinderFit {
    pub cylinder: CylinderSpec,
    /// Unit axis, oriented so that its last nonzero component is positive.
    pub axis: Vector3<f64>,
    /// Gaussian `L²(B_R)` distance `‖ρ_axis − √2‖`.
    pub distance: f64,
    pub converged: bool,
}

impl CylinderFit {
    /// `(a, b)`: the first two components of the axis.
    pub fn axis_parameters(&self) -> (f64, f64) {
        (self.axis[0], self.axis[1])
    }
}

struct Cloud {
    x: Vec<Vector3<f64>>,
    w: Vec<f64>,
}

impl Cloud {
    fn new(sample: &SurfaceSample, radius: f64) -> Result<Self> {
        let r2 = radius * radius;
        let (x, w): (Vec<_>, Vec<_>) = sample
            .x
            .iter()
            .zip(&sample.weight)
            .filter(|(x, _)| x.norm_squared() <= r2)
            .map(|(x, w)| (*x, *w))
            .unzip();
        if x.len() < 8 {
            return Err(Error::Precondition(format!("sample has only {} nodes inside B_{radius}", x.len())));
        }
        let reach = x.iter().map(|p| p.norm()).fold(0.0, f64::max);
        if reach < 0.8 * radius.min(sample_reach(sample)) {
            return Err(Error::Precondition(format!("sample does not cover B_{radius}")));
        }
        Ok(Self { x, w })
    }

    fn cost(&self, axis: &Vector3<f64>) -> f64 {
        self.x
            .iter()
            .zip(&self.w)
            .map(|(x, w)| {
                let rho = (x - axis * x.dot(axis)).norm();
                w * (rho - RADIUS).powi(2)
            })
            .sum()
    }

    /// Residuals and their derivatives along the chart directions `e1, e2`.
    fn gauss_newton(&self, axis: &Vector3<f64>) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let (e1, e2) = chart(axis);
        let mut g = Vector2::zeros();
        let mut jtj = Matrix2::zeros();
        let mut cost = 0.0;
        for (x, w) in self.x.iter().zip(&self.w) {
            let xa = x.dot(axis);
            let rho = (x - axis * xa).norm().max(1e-300);
            let res = rho - RADIUS;
            let j = Vector2::new(-xa * x.dot(&e1) / rho, -xa * x.dot(&e2) / rho);
            cost += w * res * res;
            g += j * (w * res);
            jtj += j * j.transpose() * *w;
        }
        (cost, g, jtj)
    }
}

fn sample_reach(sample: &SurfaceSample) -> f64 {
    sample.x.iter().map(|p| p.norm()).fold(0.0, f64::max)
}

fn chart(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let seed = if axis[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (seed - axis * axis.dot(&seed)).normalize();
    (e1, axis.cross(&e1))
}

fn orient(axis: Vector3<f64>) -> Vector3<f64> {
    let n = axis.normalize();
    let last = if n[2].abs() > 1e-14 { n[2] } else if n[1].abs() > 1e-14 { n[1] } else { n[0] };
    if last < 0.0 {
        -n
    } else {
        n
    }
}

struct ChartCost<'a> {
    cloud: &'a Cloud,
    base: Vector3<f64>,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
}

impl CostFunction for ChartCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let a = (self.base + self.e1 * p[0] + self.e2 * p[1]).normalize();
        Ok(self.cloud.cost(&a))
    }
}

fn polish(cloud: &Cloud, mut axis: Vector3<f64>) -> (Vector3<f64>, f64, bool) {
    let mut cost = cloud.cost(&axis);
    for _ in 0..100 {
        let (c, g, jtj) = cloud.gauss_newton(&axis);
        cost = c;
        let Some(delta) = jtj.try_inverse().map(|m| -(m * g)) else {
            return (axis, cost, false);
        };
        if delta.norm() < 1e-14 {
            return (axis, cost, true);
        }
        let (e1, e2) = chart(&axis);
        let mut t = 1.0;
        loop {
            let trial = (axis + e1 * (t * delta[0]) + e2 * (t * delta[1])).normalize();
            let tc = cloud.cost(&trial);
            if tc <= cost {
                let small = (t * delta).norm() < 1e-12;
                axis = trial;
                cost = tc;
                if small {
                    return (axis, cost, true);
                }
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                // no decrease left: accept when the gradient is at the roundoff
                // level of the residual (|g| ≤ √(‖JᵀJ‖·cost) always holds)
                return (axis, cost, g.norm() <= 1e-6 * (jtj.norm() * cost).sqrt() + 1e-300);
            }
        }
    }
    (axis, cost, false)
}

fn nelder_mead(cloud: &Cloud, base: Vector3<f64>) -> Result<Vector3<f64>> {
    let (e1, e2) = chart(&base);
    let problem = ChartCost { cloud, base, e1, e2 };
    let simplex = vec![vec![0.0, 0.0], vec![0.05, 0.0], vec![0.0, 0.05]];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let res = Executor::new(problem, solver)
        .configure(|s| s.max_iters(400))
        .run()
        .map_err(|e| Error::Fit(e.to_string()))?;
    let p = res.state().get_best_param().cloned().unwrap_or_else(|| vec![0.0, 0.0]);
    Ok((base + e1 * p[0] + e2 * p[1]).normalize())
}

/// Quasi-random start axes covering the upper hemisphere (Fibonacci lattice).
pub fn start_axes(count: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Best cylinder through the origin: minimizes the Gaussian `L²(B_R)` norm
/// of `ρ_axis − √2` over axes by a multi-start Nelder–Mead search polished
/// with Gauss–Newton. With `warm` the global search is skipped unless the
/// polished result fails to converge.
pub fn fit_cylinder(sample: &SurfaceSample, radius: f64, warm: Option<Vector3<f64>>) -> Result<CylinderFit> {
    let cloud = Cloud::new(sample, radius)?;
    if let Some(w) = warm {
        let (axis, cost, converged) = polish(&cloud, w.normalize());
        if converged {
            return finish(axis, cost, true);
        }
    }
    let starts = start_axes(FIT_STARTS);
    let mut ranked: Vec<(f64, Vector3<f64>)> = starts.iter().map(|a| (cloud.cost(a), *a)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(Vector3<f64>, f64, bool)> = None;
    for (_, start) in ranked.iter().take(4) {
        let refined = nelder_mead(&cloud, *start)?;
        let candidate = polish(&cloud, refined);
        if best.as_ref().is_none_or(|b| candidate.1 < b.1) {
            best = Some(candidate);
        }
    }
    let (axis, cost, converged) = best.expect("at least one start");
    finish(axis, cost, converged)
}

fn finish(axis: Vector3<f64>, cost: f64, converged: bool) -> Result<CylinderFit> {
    let axis = orient(axis);
    Ok(CylinderFit {
        cylinder: CylinderSpec::from_axis([axis[0], axis[1], axis[2]])?,
        axis,
        distance: cost.max(0.0).sqrt(),
        converged,
    })
}

/// Thresholds of the cylindrical scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleOptions {
    /// Bound on the `C²` norm of the graph over the fitted cylinder.
    pub eps0: f64,
    /// Order of the curvature-derivative bound (0, 1 or 2).
    pub ell: usize,
    /// Bound on `|∇^ℓ A|`.
    pub c_ell: f64,
}

impl Default for ScaleOptions {
    fn default() -> Self {
        Self { eps0: 0.05, ell: 2, c_ell: 10.0 }
    }
}

/// Outcome of [`cylindrical_scale`].
#[derive(Debug, Clone, PartialEq)]
pub struct CylindricalScale {
    pub radius: f64,
    /// Set when the sample is not a controlled graph even on `B_1`, or when the
    /// radius is capped by the sampled region.
    pub flag: Option<String>,
}

/// Largest `R` such that `Σ ∩ B_R` is a graph over the cylinder with axis
/// `axis` with `C²` norm at most `ε₀` and `|∇^ℓ A| ≤ C_ℓ`.
///
/// The admissible set of radii is an interval `[0, R*)`, where `R*` is the
/// distance to the nearest violating node, so the bisection on `R` is
/// resolved exactly on the sample. Needs a uniform sample; the result is
/// capped at the sampled half-width.
pub fn cylindrical_scale(sample: &SurfaceSample, axis: &Vector3<f64>, opts: &ScaleOptions) -> Result<CylindricalScale> {
    let SampleGrid::Uniform { dtheta, dy } = sample.grid else {
        return Err(Error::Input("the cylindrical scale needs a uniform sample".into()));
    };
    if !(opts.eps0 > 0.0) || opts.ell > 2 || !(opts.c_ell > 0.0) {
        return Err(Error::Input("need ε₀ > 0, ℓ ≤ 2 and C_ℓ > 0".into()));
    }
    let axis = axis.normalize();
    let (nt, ny) = (sample.n_theta(), sample.n_y());
    if nt < 3 || ny < 3 {
        return Err(Error::Input("sample too small".into()));
    }
    let cap = sample.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let comps: Vec<[f64; 3]> = sample.a.iter().map(|a| [a[(0, 0)], a[(0, 1)], a[(1, 1)]]).collect();
    let mut nearest = f64::INFINITY;
    for i in 0..nt {
        for q in 0..ny {
            let k = sample.index(i, q);
            let x = sample.x[k];
            let radial_vec = x - axis * x.dot(&axis);
            let rho = radial_vec.norm();
            let violated = if rho < 1e-12 {
                true
            } else {
                let e_rho = radial_vec / rho;
                let c = sample.normal[k].dot(&e_rho);
                let e_phi = axis.cross(&e_rho);
                let f = &sample.frame[k];
                let ac = Matrix2::from_fn(|a, b| -(f[a].dot(&e_phi)) * (f[b].dot(&e_phi)) / RADIUS);
                let slope = if c > 0.0 { (1.0 - c * c).max(0.0).sqrt() / c } else { f64::INFINITY };
                let c2 = (rho - RADIUS).abs().max(slope).max((sample.a[k] - ac).norm());
                let deriv = if opts.ell == 0 || q == 0 || q + 1 == ny {
                    0.0
                } else {
                    let rho_c = RADIUS + sample.jet.u[(i, q)];
                    let ht = dtheta * rho_c;
                    let (im, ip) = ((i + nt - 1) % nt, (i + 1) % nt);
                    let at = |ii: usize, qq: usize| comps[sample.index(ii, qq)];
                    let mut s = 0.0;
                    for c in 0..3 {
                        let mid = at(i, q)[c];
                        let (tm, tp, ym, yp) = (at(im, q)[c], at(ip, q)[c], at(i, q - 1)[c], at(i, q + 1)[c]);
                        let w = if c == 1 { 2.0 } else { 1.0 };
                        if opts.ell == 1 {
                            s += w * (((tp - tm) / (2.0 * ht)).powi(2) + ((yp - ym) / (2.0 * dy)).powi(2));
                        } else {
                            let (tmym, tmyp, tpym, tpyp) = (at(im, q - 1)[c], at(im, q + 1)[c], at(ip, q - 1)[c], at(ip, q + 1)[c]);
                            let tt = (tp - 2.0 * mid + tm) / (ht * ht);
                            let yy = (yp - 2.0 * mid + ym) / (dy * dy);
                            let ty = (tpyp - tpym - tmyp + tmym) / (4.0 * ht * dy);
                            s += w * (tt * tt + 2.0 * ty * ty + yy * yy);
                        }
                    }
                    s.sqrt()
                };
                !(c2 <= opts.eps0 && deriv <= opts.c_ell)
            };
            if violated {
                nearest = nearest.min(x.norm());
            }
        }
    }
    if nearest < 1.0 {
        return Ok(CylindricalScale { radius: 0.0, flag: Some(format!("not a controlled graph inside B_1 (violation at |x| = {nearest:.3})")) });
    }
    if nearest >= cap {
        return Ok(CylindricalScale { radius: cap, flag: Some("capped by the sampled region".into()) });
    }
    Ok(CylindricalScale { radius: nearest, flag: None })
}

/// Shrinker scale `R` with `e^{−R²/2} = drop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkerScale {
    pub radius: f64,
    /// The drop is below `e^{−cutoff²/2}` (or zero): the scale exceeds
    /// everything the simulation resolves and is reported as infinite.
    pub infinite: bool,
}

/// Inverts `e^{−R²/2} = drop`; drops beyond `e^{−cutoff²/2}` are flagged infinite.
pub fn shrinker_scale(drop: f64, cutoff: f64) -> Result<ShrinkerScale> {
    if drop.is_nan() || drop < 0.0 {
        return Err(Error::Data(format!("F-drop must be non-negative, got {drop}")));
    }
    if drop <= (-cutoff * cutoff / 2.0).exp() {
        return Ok(ShrinkerScale { radius: f64::INFINITY, infinite: true });
    }
    Ok(ShrinkerScale { radius: (-2.0 * drop.ln()).max(0.0).sqrt(), infinite: false })
}
