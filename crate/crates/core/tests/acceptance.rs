//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line (written
//! straight to stderr so it shows without `--nocapture`) and then asserts.

use std::io::Write;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shrinkerlab::flow::{cylinder_f, energy_identity_residual, f_value, phi_evolution_residual, radial_f, run, FlowConfig, FlowSeries, FlowState, Halt, Integrator, RunOptions, Scheme};
use shrinkerlab::geometry::graph::evaluate;
use shrinkerlab::geometry::{embed_graph, linearization_order, CylinderSpec};
use shrinkerlab::harness::{
    discrete_flow_inequality, fit_cylinder, gradient_lojasiewicz_point, loglog_slope, lojasiewicz_report, run_with_diagnostics, uniqueness_report, LojasiewiczPoint, UniquenessReport,
    UniquenessTolerances,
};
use shrinkerlab::io::verify::{golden_max, simons_order, standard_test_fields};
use shrinkerlab::io::ExperimentConfig;
use shrinkerlab::scalar::{bump_family, discrete_decay_bound, dyadic_deltas, generate_admissible, sqrt_increment_sum};
use shrinkerlab::spectral::operator::{compare_lowest, finite_difference_spectrum, galerkin_spectrum};
use shrinkerlab::spectral::{poincare_check, GraphField, SpectralBasis};

fn report(n: usize, name: &str, pass: bool, detail: String) {
    let line = format!("criterion {n:>2} {name}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {n} {name} failed: {detail}");
}

fn default_basis() -> Arc<SpectralBasis> {
    SpectralBasis::new(64, 64, 12.0).unwrap()
}

fn small_basis() -> Arc<SpectralBasis> {
    SpectralBasis::new(16, 16, 12.0).unwrap()
}

fn fixed_step_run(u0: GraphField, scheme: Scheme, dt: f64, stabilize: bool, s_end: f64, sample: f64) -> FlowSeries {
    let basis = u0.basis().clone();
    let it = Integrator::new(&basis, FlowConfig { scheme, dt, stabilize, adaptive: None }).unwrap();
    let opts = RunOptions { s_end, sample_interval: sample, radius: 10.0, checkpoint_every: 0, keep_samples: false };
    let out = run(&it, FlowState::new(u0), &opts, |_, _, _| Ok(())).unwrap();
    assert_eq!(out.halt, Halt::Completed);
    out.series
}

#[test]
fn c01_stationarity() {
    let basis = default_basis();
    let mut worst: f64 = 0.0;
    for scheme in [Scheme::ImexSpectral, Scheme::ExplicitRk4] {
        let series = fixed_step_run(GraphField::zero(&basis), scheme, 0.01, true, 10.0, 0.01);
        assert_eq!(series.rows.last().unwrap().step, 1000);
        for r in &series.rows {
            worst = worst.max(r.phi_l2).max(r.u_l2);
        }
    }
    report(1, "stationarity", worst < 1e-10, format!("max of |phi|, |u| over 1000 steps, both schemes = {worst:.3e} < 1e-10"));
}

#[test]
fn c02_cylinder_value_and_radial_maximum() {
    let closed = std::f64::consts::PI.sqrt() * 2f64.sqrt() * (-0.5f64).exp();
    let basis = default_basis();
    let cyl = CylinderSpec::standard(1, 2).unwrap();
    let f = f_value(&basis, &evaluate(&cyl, &GraphField::zero(&basis)).unwrap());
    let err = (f - closed).abs().max((cylinder_f() - closed).abs());
    let r = golden_max(radial_f, 0.5, 3.0, 1e-10);
    let pass = err < 1e-10 && (r - 2f64.sqrt()).abs() < 1e-6;
    report(2, "F value", pass, format!("|F - sqrt(2 pi/e)| = {err:.2e} < 1e-10, argmax r = {r:.9} (|r - sqrt 2| = {:.1e} < 1e-6)", (r - 2f64.sqrt()).abs()));
}

#[test]
fn c03_energy_identity() {
    // unstabilized: removing unstable modes after a step moves F by a
    // dt-independent amount that the identity does not see
    let basis = default_basis();
    let u0 = GraphField::from_modes(&basis, &[(0, 2, 1e-3), (2, 0, 1e-3), (1, 1, 1e-3)]).unwrap();
    let mut detail = Vec::new();
    let mut pass = true;
    for scheme in [Scheme::ImexSpectral, Scheme::ExplicitRk4] {
        let r1 = energy_identity_residual(&fixed_step_run(u0.clone(), scheme, 0.01, false, 2.0, 0.01)).unwrap();
        let r2 = energy_identity_residual(&fixed_step_run(u0.clone(), scheme, 0.005, false, 2.0, 0.005)).unwrap();
        let factor = r1.max_abs / r2.max_abs;
        pass &= r1.relative < 1e-3 && factor >= 3.5;
        detail.push(format!("{scheme:?}: relative {:.2e} < 1e-3, halving factor {factor:.2} >= 3.5", r1.relative));
    }
    report(3, "energy identity", pass, detail.join("; "));
}

#[test]
fn c04_spectrum() {
    let gal = compare_lowest(galerkin_spectrum(64, 64), 20, 1e-9);
    let fd = compare_lowest(finite_difference_spectrum(64, 64, 12.0).unwrap(), 20, 1e-2);
    let pass = gal.max_error < 1e-12 && fd.max_error < 1e-3 && gal.kernel_dimension == 3 && fd.kernel_dimension == 3;
    report(
        4,
        "spectrum",
        pass,
        format!(
            "20 lowest: spectral error {:.1e} < 1e-12, finite-difference error {:.1e} < 1e-3, kernel dimension {} / {}",
            gal.max_error, fd.max_error, gal.kernel_dimension, fd.kernel_dimension
        ),
    );
}

#[test]
fn c05_rotation_tilts_the_fitted_cylinder() {
    let basis = default_basis();
    let cyl = CylinderSpec::standard(1, 2).unwrap();
    let mut distances = Vec::new();
    let mut tilts = Vec::new();
    for eps in [0.01, 0.02, 0.04] {
        let u = GraphField::from_modes(&basis, &[(1, 1, eps)]).unwrap();
        let fit = fit_cylinder(&embed_graph(&cyl, &u).unwrap(), 10.0, Some(nalgebra::Vector3::z())).unwrap();
        let (a, b) = fit.axis_parameters();
        tilts.push(a.hypot(b) / eps);
        distances.push((eps, fit.distance));
    }
    let slope = loglog_slope(&distances).unwrap().slope;
    let tilt_ok = tilts.iter().all(|t| (0.5..2.0).contains(t));
    let pass = tilt_ok && (slope - 2.0).abs() <= 0.1;
    report(5, "rotation semantics", pass, format!("tilt/eps = {:.4?} in (0.5, 2), distance slope {slope:.4} = 2 +- 0.1", tilts));
}

#[test]
fn c06_linearization_order() {
    let cyl = CylinderSpec::standard(1, 2).unwrap();
    let mut orders = Vec::new();
    for (name, v) in standard_test_fields(&small_basis()).unwrap() {
        orders.push((name, linearization_order(&cyl, &v, &[1e-2, 5e-3, 2.5e-3]).unwrap()));
    }
    let worst = orders.iter().map(|o| o.1).fold(f64::INFINITY, f64::min);
    let list: Vec<String> = orders.iter().map(|(n, o)| format!("{n}: {o:.3}")).collect();
    report(6, "linearization order", worst >= 1.9, format!("min {worst:.3} >= 1.9 [{}]", list.join(", ")));
}

#[test]
fn c07_lojasiewicz_exponents() {
    let basis = default_basis();
    let eps = [1e-3, 2e-3, 4e-3, 8e-3];
    let family = |modes: &[(i64, usize)]| -> Vec<LojasiewiczPoint> {
        eps.iter()
            .map(|&e| {
                let m: Vec<(i64, usize, f64)> = modes.iter().map(|&(j, k)| (j, k, e)).collect();
                gradient_lojasiewicz_point(&GraphField::from_modes(&basis, &m).unwrap(), 10.0, e).unwrap()
            })
            .collect()
    };
    // pure rotations are integrable (F is exactly F(C) on a rotated
    // cylinder), so the kernel families carry the quadratic direction
    let kernel: [&[(i64, usize)]; 3] = [&[(0, 2)], &[(0, 2), (1, 1)], &[(0, 2), (-1, 1)]];
    let orthogonal: [&[(i64, usize)]; 4] = [&[(0, 0)], &[(0, 1)], &[(1, 0)], &[(2, 0)]];
    let mut pass = true;
    let mut detail = Vec::new();
    let mut constant: f64 = 0.0;
    for (families, target, label) in [(&kernel[..], 1.5, "kernel"), (&orthogonal[..], 2.0, "orthogonal")] {
        let mut slopes = Vec::new();
        for modes in families {
            let points = family(modes);
            constant = points.iter().map(|p| p.lhs / p.rhs.powf(1.5)).fold(constant, f64::max);
            let slope = lojasiewicz_report(points).unwrap().exponent.unwrap().slope;
            pass &= (slope - target).abs() <= 0.1;
            slopes.push(format!("{slope:.3}"));
        }
        detail.push(format!("{label} slopes [{}] = {target} +- 0.1", slopes.join(", ")));
    }
    pass &= constant.is_finite();
    detail.push(format!("|F - F(C)| <= {constant:.3} |M|^(3/2) on all samples"));
    report(7, "Lojasiewicz exponents", pass, detail.join("; "));
}

/// The two uniqueness runs: the kernel-tilt preset and the same start with
/// an extra decaying mode.
fn uniqueness_runs() -> &'static [(FlowSeries, UniquenessReport); 2] {
    static RUNS: OnceLock<[(FlowSeries, UniquenessReport); 2]> = OnceLock::new();
    RUNS.get_or_init(|| {
        let base = ExperimentConfig::preset("kernel-tilt").unwrap();
        let mut other = base.clone();
        other.modes.push((2, 0, 0.02));
        let go = |cfg: &ExperimentConfig| {
            let basis = cfg.basis().unwrap();
            let it = Integrator::new(&basis, cfg.flow_config()).unwrap();
            let out = run_with_diagnostics(&it, FlowState::new(cfg.initial_field(&basis).unwrap()), &cfg.run_options(), &cfg.diagnostic_options()).unwrap();
            assert_eq!(out.halt, Halt::Completed);
            let rep = uniqueness_report(&out.series, &UniquenessTolerances::default()).unwrap();
            (out.series, rep)
        };
        [go(&base), go(&other)]
    })
}

#[test]
fn c08_discrete_flow_inequality() {
    let (series, _) = &uniqueness_runs()[0];
    let d = discrete_flow_inequality(series, 0.5, 5.0, 0.2).unwrap();
    let failures = d.failures_with(d.k_fit);
    report(
        8,
        "discrete flow inequality",
        d.pass && failures == 0,
        format!("{} times t >= 5, K = {:.4e}, tail/early K = {:.4} within 20%, {failures} violations", d.ratios.len(), d.k_fit, d.stability),
    );
}

#[test]
fn c09_uniqueness() {
    let [(_, a), (_, b)] = uniqueness_runs();
    let tol = UniquenessTolerances::default();
    let gap = (a.final_axis - b.final_axis).norm();
    let mut pass = gap < 1e-3;
    let mut detail = Vec::new();
    for (name, r) in [("tilt", a), ("tilt + cos 2theta", b)] {
        pass &= r.axis_variation.tail < 1e-3 && r.sqrt_drops.tail < 1e-4 && r.final_phi < 1e-6 && r.axis_variation.partial.is_finite();
        detail.push(format!(
            "{name}: axis variation {:.3e} tail {:.1e} < 1e-3, sqrt-drop sum {:.4} tail {:.1e} < 1e-4, final phi {:.1e} < 1e-6",
            r.axis_variation.partial, r.axis_variation.tail, r.sqrt_drops.partial, r.sqrt_drops.tail, r.final_phi
        ));
    }
    assert!(tol.axis_tail == 1e-3 && tol.sqrt_tail == 1e-4);
    detail.push(format!("axis gap {gap:.2e} < 1e-3"));
    report(9, "uniqueness", pass, detail.join("; "));
}

#[test]
fn c10_discrete_decay() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut worst_tail, mut failures) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..1000 {
        let eps = rng.random_range(0.2..0.9);
        let k = rng.random_range(0.5..2.0);
        let seq = generate_admissible(&mut rng, 300, eps, k, 1e-16, 0.2).unwrap();
        let bound = discrete_decay_bound(&seq).unwrap();
        let sums = sqrt_increment_sum(&seq).unwrap();
        worst = worst.max(bound.worst_ratio);
        worst_tail = worst_tail.max(sums.tail_estimate);
        failures += usize::from(!bound.verified || !(sums.tail_estimate < 1e-6));
    }
    report(10, "discrete decay", failures == 0, format!("1000 sequences: max f t^(1/eps)/C = {worst:.3e} <= 1, max sqrt-sum tail {worst_tail:.2e} < 1e-6, {failures} failures"));
}

#[test]
fn c11_poincare() {
    let basis = small_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut worst, mut violations) = (0.0f64, 0usize);
    for _ in 0..1000 {
        let coeffs: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rep = poincare_check(&GraphField::from_coeffs(&basis, coeffs).unwrap());
        worst = worst.max(rep.ratio);
        violations += usize::from(!rep.pass);
    }
    report(11, "Poincare", violations == 0, format!("1000 fields: max lhs/rhs = {worst:.4}, {violations} violations"));
}

#[test]
fn c12_refinement_orders() {
    let small = small_basis();
    let mixed = GraphField::from_modes(&small, &[(0, 2, 0.02), (2, 1, 0.01)]).unwrap();
    let mut fields = vec![("mixed".to_string(), mixed)];
    fields.extend(standard_test_fields(&small).unwrap().into_iter().map(|(n, v)| (n, v.scaled(0.02))));
    let mut simons = Vec::new();
    let mut pass = true;
    for (name, u) in &fields {
        let (order, _, fine) = simons_order(u, (32, 41), 3.0).unwrap();
        // a residual at roundoff on the coarse grid has no measurable order
        let exact = fine < 1e-12;
        pass &= exact || order >= 2.0;
        simons.push(if exact { format!("{name}: at roundoff") } else { format!("{name}: {order:.2}") });
    }
    // φ evolution: time spacing and grid refined together, unstabilized flow
    let basis = default_basis();
    let mut phi = Vec::new();
    for modes in [vec![(0, 2, 0.02), (2, 0, 0.02), (1, 1, 0.01)], vec![(1, 2, 0.002), (-2, 1, 0.01)]] {
        let mut res = Vec::new();
        for (h, nt, ny) in [(0.04, 32, 41), (0.02, 64, 81), (0.01, 128, 161)] {
            let u0 = GraphField::from_modes(&basis, &modes).unwrap();
            let it = Integrator::new(&basis, FlowConfig { dt: h / 8.0, stabilize: false, ..Default::default() }).unwrap();
            let opts = RunOptions { s_end: 0.48, sample_interval: h, radius: 10.0, checkpoint_every: 0, keep_samples: true };
            let out = run(&it, FlowState::new(u0), &opts, |_, _, _| Ok(())).unwrap();
            assert_eq!(out.halt, Halt::Completed);
            let n = out.samples.len();
            res.push(phi_evolution_residual(&out.samples[n - 3..], nt, ny, 3.0).unwrap().max_abs);
        }
        let orders: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        pass &= orders.iter().all(|o| *o >= 1.0);
        phi.push(format!("{:.2?}", orders));
    }
    report(12, "refinement orders", pass, format!("Simons >= 2 [{}]; phi evolution >= 1 {}", simons.join(", "), phi.join(" ")));
}

#[test]
fn c13_interpolation() {
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, nodes) in [(1usize, 801usize), (2, 161)] {
        let stable = bump_family(n, 2, &dyadic_deltas(), nodes, 0.0).unwrap();
        let sharp = bump_family(n, 2, &dyadic_deltas(), nodes, 0.05).unwrap();
        let growth = stable.growth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let constant = stable.constants.iter().copied().fold(0.0, f64::max);
        let sharp_growth = sharp.growth.iter().copied().fold(f64::INFINITY, f64::min);
        pass &= stable.stable(0.03) && constant.is_finite() && sharp_growth > 0.1;
        detail.push(format!("n={n}: constants <= {constant:.3} with growth {growth:.3} < 0.03, +0.05 exponent growth {sharp_growth:.3} > 0.1"));
    }
    report(13, "interpolation", pass, detail.join("; "));
}

#[test]
fn c14_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let short = ExperimentConfig { name: "short-kernel".into(), steps: 3000, sample_every: 10, ..ExperimentConfig::preset("kernel-quadratic").unwrap() };
    let path = dir.path().join("short-kernel.toml");
    std::fs::write(&path, short.to_toml()).unwrap();
    let run_cli = |out: &str| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_shrinkerlab"))
            .args(["simulate", "cylinder", path.to_str().unwrap(), "--out", dir.path().join(out).to_str().unwrap()])
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(matches!(status.code(), Some(0 | 1)), "simulate errored: {status}");
    };
    run_cli("a");
    run_cli("b");
    let mut compared = 0;
    let mut identical = true;
    for run in ["cylinder", "short-kernel"] {
        for file in ["diagnostics.csv", "energy.csv", "checks.csv"] {
            let a = std::fs::read(dir.path().join("a").join(run).join(file)).unwrap();
            let b = std::fs::read(dir.path().join("b").join(run).join(file)).unwrap();
            identical &= !a.is_empty() && a == b;
            compared += 1;
        }
    }
    report(14, "determinism", identical, format!("{compared} CSV files from two simulate invocations byte-identical"));
}
