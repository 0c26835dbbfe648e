//! Self-checks grouped into suites, each producing check rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::CheckRow;
use crate::error::{Error, Result};
use crate::flow::{cylinder_f, f_value, radial_f};
use crate::geometry::graph::evaluate;
use crate::geometry::{linearization_order, simons_trace_residual, CylinderSpec, ParametricGrid};
use crate::scalar::{
    bump_family, discrete_decay_bound, dyadic_deltas, generate_admissible, ode_gradient_flow, power_decay_check, sqrt_increment_sum, taylor_region_check, FlowOptions, ModelFunction,
};
use crate::spectral::operator::{compare_lowest, finite_difference_spectrum, galerkin_spectrum};
use crate::spectral::{poincare_check, GraphField, SpectralBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Geometry,
    Spectral,
    Scalar,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::All),
            "geometry" => Ok(Self::Geometry),
            "spectral" => Ok(Self::Spectral),
            "scalar" => Ok(Self::Scalar),
            other => Err(Error::Input(format!("unknown suite '{other}'"))),
        }
    }
}

pub fn run_suite(suite: Suite) -> Result<Vec<CheckRow>> {
    Ok(match suite {
        Suite::Geometry => geometry_suite()?,
        Suite::Spectral => spectral_suite()?,
        Suite::Scalar => scalar_suite()?,
        Suite::All => {
            let mut rows = geometry_suite()?;
            rows.extend(spectral_suite()?);
            rows.extend(scalar_suite()?);
            rows
        }
    })
}

/// Golden-section maximization on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    while b - a > tol {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Observed order of the Simons trace residual between two grids.
pub fn simons_order(u: &GraphField, coarse: (usize, usize), half_width: f64) -> Result<(f64, f64, f64)> {
    let cyl = CylinderSpec::standard(1, 2)?;
    let r1 = max_abs(&simons_trace_residual(&ParametricGrid::from_graph(&cyl, u, coarse.0, coarse.1, half_width)?)?);
    let r2 = max_abs(&simons_trace_residual(&ParametricGrid::from_graph(&cyl, u, 2 * coarse.0, 2 * coarse.1 - 1, half_width)?)?);
    Ok(((r1 / r2).log2(), r1, r2))
}

/// The graphs of the refinement and linearization checks.
pub fn standard_test_fields(basis: &std::sync::Arc<SpectralBasis>) -> Result<Vec<(String, GraphField)>> {
    let modes: [(i64, usize, f64); 6] = [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (2, 0, 1.0), (0, 2, 1.0), (1, 1, 1.0)];
    modes.iter().map(|&(j, m, a)| Ok((format!("j={j} m={m}"), GraphField::from_modes(basis, &[(j, m, a)])?))).collect()
}

pub fn geometry_suite() -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let basis = SpectralBasis::new(64, 64, 12.0)?;
    let cyl = CylinderSpec::standard(1, 2)?;
    let zero = GraphField::zero(&basis);
    let f = f_value(&basis, &evaluate(&cyl, &zero)?);
    rows.push(CheckRow::new("cylinder-F", "N_theta=64 M=64 L=12", f, cylinder_f(), (f - cylinder_f()).abs(), (f - cylinder_f()).abs() < 1e-10));
    let r = golden_max(radial_f, 0.5, 3.0, 1e-10);
    rows.push(CheckRow::new("radial-max", "golden section", r, 2f64.sqrt(), (r - 2f64.sqrt()).abs(), (r - 2f64.sqrt()).abs() < 1e-6));
    let small = SpectralBasis::new(16, 16, 12.0)?;
    let u = GraphField::from_modes(&small, &[(0, 2, 0.02), (2, 1, 0.01)])?;
    let (order, r1, r2) = simons_order(&u, (32, 41), 3.0)?;
    rows.push(CheckRow::new("simons-order", "32x41 -> 64x81", r1, r2, order, order >= 2.0));
    for (name, v) in standard_test_fields(&small)? {
        let order = linearization_order(&cyl, &v, &[1e-3, 2e-3, 4e-3, 8e-3])?;
        rows.push(CheckRow::new("linearization-order", name, order, 1.9, order, order >= 1.9));
    }
    Ok(rows)
}

pub fn spectral_suite() -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let gal = compare_lowest(galerkin_spectrum(64, 64), 20, 1e-9);
    rows.push(CheckRow::bound("spectrum-galerkin", "20 lowest |lambda|", gal.max_error, 1e-12));
    rows.push(CheckRow::new("kernel-dimension", "galerkin", gal.kernel_dimension as f64, 3.0, f64::NAN, gal.kernel_dimension == 3));
    let fd = compare_lowest(finite_difference_spectrum(64, 64, 12.0)?, 20, 1e-2);
    rows.push(CheckRow::bound("spectrum-fd", "N_theta=64 N_y=64 L=12", fd.max_error, 1e-3));
    rows.push(CheckRow::new("kernel-dimension", "finite differences", fd.kernel_dimension as f64, 3.0, f64::NAN, fd.kernel_dimension == 3));
    let basis = SpectralBasis::new(16, 16, 12.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst, mut violations) = (0.0f64, 0usize);
    for _ in 0..200 {
        let coeffs: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rep = poincare_check(&GraphField::from_coeffs(&basis, coeffs)?);
        worst = worst.max(rep.ratio);
        violations += usize::from(!rep.pass);
    }
    rows.push(CheckRow::new("poincare", "200 random fields", worst, 1.0, violations as f64, violations == 0));
    Ok(rows)
}

pub fn scalar_suite() -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut worst_tail, mut failures) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..200 {
        let eps = rng.random_range(0.2..0.9);
        let k = rng.random_range(0.5..2.0);
        let seq = generate_admissible(&mut rng, 300, eps, k, 1e-16, 0.2)?;
        let b = discrete_decay_bound(&seq)?;
        let s = sqrt_increment_sum(&seq)?;
        worst = worst.max(b.worst_ratio);
        worst_tail = worst_tail.max(s.tail_estimate);
        failures += usize::from(!b.verified || !(s.tail_estimate < 1e-6));
    }
    rows.push(CheckRow::new("decay-bound", "200 generated sequences", worst, 1.0, failures as f64, failures == 0));
    rows.push(CheckRow::bound("sqrt-sum-tail", "200 generated sequences", worst_tail, 1e-6));

    let quad = ModelFunction::quadratic(&[1.0])?;
    let tr = ode_gradient_flow(&quad, &[1.0], 20.0, &FlowOptions::default())?;
    rows.push(CheckRow::new("flow-length", "f=x^2 x0=1", tr.length, 1.0, f64::NAN, (tr.length - 1.0).abs() < 1e-8));
    let cubic = ModelFunction::new(1, vec![(1.0, vec![3])], vec![0])?;
    let tr = ode_gradient_flow(&cubic, &[0.5], 100.0, &FlowOptions::default())?;
    let d = power_decay_check(&cubic, &tr, 2.0 / 3.0)?;
    rows.push(CheckRow::new("power-decay", "f=x^3 beta=2/3", d.worst_ratio, 1.0, d.constant, d.verified));

    let ok = ModelFunction::new(2, vec![(1.0, vec![2, 0]), (1.0, vec![0, 3])], vec![1])?;
    let rep = taylor_region_check(&ok, 0.1, 41, 0.1, 2.0 / 3.0)?;
    rows.push(CheckRow::new("taylor-split", "x^2+y^3", rep.constant_fine, rep.constant_coarse, rep.hypothesis.c_fine, rep.pass));
    let bad = ModelFunction::new(2, vec![(1.0, vec![2, 0]), (1.0, vec![0, 4])], vec![1])?;
    let rep = taylor_region_check(&bad, 0.1, 41, 0.1, 2.0 / 3.0)?;
    let detected = !rep.hypothesis.pass;
    rows.push(CheckRow::new("taylor-split-detects", format!("x^2+y^4 broken in {}", rep.hypothesis.broken_region.unwrap_or("none")), rep.hypothesis.c_fine, rep.hypothesis.c_coarse, f64::NAN, detected));

    for (n, nodes) in [(1usize, 801usize), (2, 161)] {
        let fam = bump_family(n, 2, &dyadic_deltas(), nodes, 0.0)?;
        let growth = fam.growth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rows.push(CheckRow::new("interpolation-stable", format!("n={n} k=2"), growth, 0.03, fam.constants.iter().copied().fold(0.0, f64::max), fam.stable(0.03)));
        let sharp = bump_family(n, 2, &dyadic_deltas(), nodes, 0.05)?;
        let growth = sharp.growth.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(CheckRow::new("interpolation-sharp", format!("n={n} k=2 exponent+0.05"), growth, 0.1, f64::NAN, growth > 0.1));
    }
    Ok(rows)
}
