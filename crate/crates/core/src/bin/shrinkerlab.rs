//! Command-line front end: runs experiments, prints spectra and checks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shrinkerlab::flow::cylinder_f;
use shrinkerlab::harness::{discrete_flow_inequality, first_lojasiewicz_point, gradient_lojasiewicz_point, mean_value_report, uniqueness_report, UniquenessTolerances};
use shrinkerlab::io::{fmt_f64, loglog_svg, output_root, read_series, run_batch, run_suite, write_checks, CheckRow, ExperimentConfig, Snapshot, Suite};
use shrinkerlab::scalar::{ode_gradient_flow, power_decay_check, FlowOptions, ModelFunction};
use shrinkerlab::spectral::operator::{compare_lowest, finite_difference_spectrum, galerkin_spectrum};
use shrinkerlab::spectral::{basis_eigenvalue, harmonic_multiplicity, kernel_basis, kernel_dimension, KernelLabel};
use shrinkerlab::{Error, Result};

#[derive(Parser)]
#[command(name = "shrinkerlab", version, about = "Rescaled mean curvature flow near shrinking cylinders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more experiments (config files or preset names) in parallel.
    Simulate {
        #[arg(required = true)]
        configs: Vec<String>,
        /// Output root; overrides SHRINKERLAB_OUT.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the lowest eigenvalues of L on S^k × R^{n−k} and the kernel.
    Spectrum {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        modes: usize,
    },
    /// Łojasiewicz-type checks of a snapshot (.json) or a diagnostics table (.csv).
    Loja {
        path: PathBuf,
        #[arg(long = "R", default_value_t = 10.0)]
        radius: f64,
    },
    /// Run self-check suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Scalar models: decay sequences, gradient flows, Taylor split, interpolation.
    ScalarDemo,
}

fn print_checks(rows: &[CheckRow]) -> Result<bool> {
    write_checks(std::io::stdout().lock(), rows)?;
    Ok(rows.iter().all(|r| r.pass))
}

fn simulate(configs: &[String], out: Option<PathBuf>) -> Result<bool> {
    let configs = configs.iter().map(|c| ExperimentConfig::load(c)).collect::<Result<Vec<_>>>()?;
    let root = out.unwrap_or_else(output_root);
    let mut pass = true;
    for (cfg, bundle) in configs.iter().zip(run_batch(&configs, &root)?) {
        match bundle {
            Ok(b) => {
                eprintln!("{}: {} ({}), bundle in {}", cfg.name, if b.pass { "pass" } else { "FAIL" }, b.halt, b.dir.display());
                pass &= b.pass;
            }
            Err(e) => {
                eprintln!("{}: {e}", cfg.name);
                pass = false;
            }
        }
    }
    Ok(pass)
}

fn spectrum(k: usize, n: usize, modes: usize) -> Result<bool> {
    if k == 0 || k > n {
        return Err(Error::Input(format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    let axes = n - k;
    let binom = |a: usize, b: usize| (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1));
    let mut table = Vec::new();
    for j in 0..40 {
        for m in 0..if axes > 0 { 80 } else { 1 } {
            let mult = harmonic_multiplicity(j, k) * if axes > 0 { binom(m + axes - 1, axes - 1) } else { 1 };
            table.push((basis_eigenvalue(j, m, k), j, m, mult));
        }
    }
    // same selection and order as the discrete spectra: smallest |λ|, then by value
    let mut rows: Vec<(f64, usize, usize, usize)> = table.into_iter().flat_map(|e| std::iter::repeat_n(e, e.3)).collect();
    rows.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(a.0.total_cmp(&b.0)));
    rows.truncate(modes);
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let discrete = ((k, n) == (1, 2)).then(|| -> Result<_> {
        Ok((compare_lowest(galerkin_spectrum(64, 64), modes, 1e-9), compare_lowest(finite_difference_spectrum(64, 64, 12.0)?, modes, 1e-2)))
    });
    let discrete = discrete.transpose()?;
    println!("index,j,m,lambda,multiplicity{}", if discrete.is_some() { ",galerkin,finite_difference" } else { "" });
    for (index, (lambda, j, m, mult)) in rows.into_iter().enumerate() {
        let extra = discrete.as_ref().map(|(g, f)| format!(",{},{}", fmt_f64(g.computed[index]), fmt_f64(f.computed[index]))).unwrap_or_default();
        println!("{index},{j},{m},{},{mult}{extra}", fmt_f64(lambda));
    }
    println!();
    let kb = kernel_basis(k, n)?;
    println!("kernel_element,label");
    for (i, (label, _)) in kb.elements.iter().enumerate() {
        // axes y1.., sphere coordinates x1..; on the circle x1, x2 are cos, sin
        let text = match *label {
            KernelLabel::Quadratic { i, j } if i == j => format!("y{}^2 - 2", i + 1),
            KernelLabel::Quadratic { i, j } => format!("y{} y{}", i + 1, j + 1),
            KernelLabel::Rotation { axis, harmonic } if k == 1 => format!("y{} {}(theta)", axis + 1, ["cos", "sin"][harmonic]),
            KernelLabel::Rotation { axis, harmonic } => format!("y{} x{}", axis + 1, harmonic + 1),
        };
        println!("{i},{text}");
    }
    let mut ok = kb.dimension() == kernel_dimension(k, n);
    println!("dimension,{},expected,{}", kb.dimension(), kernel_dimension(k, n));
    if let Some((g, f)) = &discrete {
        println!("numeric_kernel_dimension,{},{}", g.kernel_dimension, f.kernel_dimension);
        ok &= g.kernel_dimension == 3 && f.kernel_dimension == 3;
    }
    Ok(ok)
}

fn loja(path: &Path, radius: f64) -> Result<bool> {
    let mut rows = Vec::new();
    if path.extension().is_some_and(|e| e == "json") {
        let state = Snapshot::read(path)?.to_state()?;
        let first = first_lojasiewicz_point(&state.u, radius, state.s)?;
        rows.push(CheckRow::new("first-lojasiewicz", format!("s={} R={radius} d^2 <= C |phi|_L1", state.s), first.lhs, first.rhs, first.lhs / first.rhs, true));
        let grad = gradient_lojasiewicz_point(&state.u, radius, state.s)?;
        let c = grad.lhs.powf(2.0 / 3.0) / grad.rhs;
        rows.push(CheckRow::new("gradient-lojasiewicz", format!("s={} |F-F_C|^(2/3) <= C |M|", state.s), grad.lhs, grad.rhs, c, c.is_finite()));
        return print_checks(&rows);
    }
    let series = read_series(path)?;
    match discrete_flow_inequality(&series, 0.5, 5.0, 0.2) {
        Ok(d) => rows.push(CheckRow::new("discrete-inequality", "tau=0.5 t>=5", d.stability, 1.2, d.k_fit, d.pass)),
        Err(e) => rows.push(CheckRow::new("discrete-inequality", e.to_string(), f64::NAN, f64::NAN, f64::NAN, false)),
    }
    if let Ok(m) = mean_value_report(&series, 0.5, 2.0) {
        rows.push(CheckRow::new("mean-value", format!("beta=0.5 window=2 windows={}", m.windows), m.constant, f64::NAN, m.constant, m.constant.is_finite()));
    }
    if let Ok(u) = uniqueness_report(&series, &UniquenessTolerances::default()) {
        rows.push(CheckRow::bound("axis-variation-tail", format!("p={:.3}", u.axis_variation.decay_exponent), u.axis_variation.tail, 1e-3));
        rows.push(CheckRow::bound("sqrt-drop-tail", format!("p={:.3}", u.sqrt_drops.decay_exponent), u.sqrt_drops.tail, 1e-4));
    }
    let pts: Vec<(f64, f64)> = series.rows.iter().map(|r| (r.phi_l2, r.f - cylinder_f())).collect();
    let svg = path.with_extension("svg");
    std::fs::write(&svg, loglog_svg("F − F(cylinder) against ‖φ‖", "‖φ‖", "F − F(cylinder)", &[("run".into(), pts)]))?;
    eprintln!("plot written to {}", svg.display());
    print_checks(&rows)
}

fn scalar_demo() -> Result<bool> {
    // f = x³ flows like f' = −9 f^{4/3}: the β = 2/3 model
    let cubic = ModelFunction::new(1, vec![(1.0, vec![3])], vec![0])?;
    let tr = ode_gradient_flow(&cubic, &[0.5], 1000.0, &FlowOptions::default())?;
    let d = power_decay_check(&cubic, &tr, 2.0 / 3.0)?;
    println!("t,f,bound");
    let mut next = 1.0;
    for (t, f) in tr.times.iter().zip(&tr.values) {
        if *t >= next {
            println!("{},{},{}", fmt_f64(*t), fmt_f64(*f), fmt_f64(d.constant * t.powf(-d.exponent)));
            next *= 10.0;
        }
    }
    println!();
    print_checks(&run_suite(Suite::Scalar)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { configs, out } => simulate(&configs, out),
        Command::Spectrum { k, n, modes } => spectrum(k, n, modes),
        Command::Loja { path, radius } => loja(&path, radius),
        Command::Verify { suite } => suite.parse::<Suite>().and_then(run_suite).and_then(|rows| print_checks(&rows)),
        Command::ScalarDemo => scalar_demo(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
