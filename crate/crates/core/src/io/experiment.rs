//! Running a configured experiment and writing its report bundle.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Check, ExperimentConfig};
use super::report::{loglog_svg, write_checks, write_diagnostics, write_energy, CheckRow};
use super::snapshot::Snapshot;
use crate::error::{Error, Result};
use crate::flow::{cylinder_f, energy_identity_residual, FlowSeries, FlowState, Halt, Integrator};
use crate::harness::{discrete_flow_inequality, run_with_diagnostics, scale_compatibility_report, uniqueness_report, UniquenessTolerances};

/// Environment variable overriding the output root.
pub const OUT_ENV: &str = "SHRINKERLAB_OUT";

/// `$SHRINKERLAB_OUT`, or `runs` in the working directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

/// Files of one run. On a graph breakdown the bundle is partial and
/// `halt` carries the reason.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub dir: PathBuf,
    pub diagnostics: PathBuf,
    pub energy: PathBuf,
    pub checks_csv: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub plot: PathBuf,
    pub manifest: PathBuf,
    pub halt: Halt,
    pub checks: Vec<CheckRow>,
    pub pass: bool,
}

#[derive(Serialize)]
struct FileEntry {
    path: String,
    producer: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    name: &'a str,
    version: &'static str,
    config: &'a ExperimentConfig,
    halt: String,
    rows: usize,
    rejected_steps: usize,
    files: Vec<FileEntry>,
    checks: &'a [CheckRow],
    pass: bool,
}

/// Evaluates the enabled checks on a finished series.
pub fn evaluate_checks(config: &ExperimentConfig, series: &FlowSeries) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let failed = |check: Check, e: Error| CheckRow::new(check.name(), e.to_string(), f64::NAN, f64::NAN, f64::NAN, false);
    for &check in &config.checks {
        let name = check.name();
        match check {
            Check::Stationarity => {
                let phi = series.rows.iter().map(|r| r.phi_l2).fold(0.0, f64::max);
                let u = series.rows.iter().map(|r| r.u_l2).fold(0.0, f64::max);
                rows.push(CheckRow::bound(name, "max phi_L2", phi, 1e-10));
                rows.push(CheckRow::bound(name, "max u_L2", u, 1e-10));
            }
            Check::EnergyIdentity => match energy_identity_residual(series) {
                Ok(r) => rows.push(CheckRow::new(name, format!("samples={}", r.samples), r.relative, 1e-3, r.max_abs, r.relative < 1e-3)),
                Err(e) => rows.push(failed(check, e)),
            },
            Check::Uniqueness => match uniqueness_report(series, &UniquenessTolerances::default()) {
                Ok(u) => {
                    let tol = UniquenessTolerances::default();
                    rows.push(CheckRow::new(name, format!("axis variation tail, p={:.3}", u.axis_variation.decay_exponent), u.axis_variation.tail, tol.axis_tail, u.axis_variation.partial, u.axis_variation.tail < tol.axis_tail));
                    rows.push(CheckRow::new(name, format!("sqrt F-drop tail, p={:.3}", u.sqrt_drops.decay_exponent), u.sqrt_drops.tail, tol.sqrt_tail, u.sqrt_drops.partial, u.sqrt_drops.tail < tol.sqrt_tail));
                    rows.push(CheckRow::bound(name, "final phi_L2", u.final_phi, tol.final_phi));
                }
                Err(e) => rows.push(failed(check, e)),
            },
            Check::DiscreteInequality => match discrete_flow_inequality(series, 0.5, 5.0, 0.2) {
                Ok(d) => rows.push(CheckRow::new(name, "tau=0.5 t>=5", d.stability, 1.2, d.k_fit, d.pass)),
                Err(e) => rows.push(failed(check, e)),
            },
            Check::ScaleCompatibility => match scale_compatibility_report(series, config.s_end() / 2.0, 0.05) {
                Ok(r) => rows.push(CheckRow::new(name, format!("window=[{}, {}]", r.window.0, r.window.1), r.mu_fit, 0.0, r.mu_fit, r.pass)),
                Err(e) => rows.push(failed(check, e)),
            },
        }
    }
    rows
}

/// Runs the flow of `config` and writes the bundle to `root/<output>`.
pub fn run_experiment(config: &ExperimentConfig, root: &Path) -> Result<ReportBundle> {
    config.validate()?;
    let basis = config.basis()?;
    let integrator = Integrator::new(&basis, config.flow_config())?;
    let initial = FlowState::new(config.initial_field(&basis)?);
    let out = run_with_diagnostics(&integrator, initial, &config.run_options(), &config.diagnostic_options())?;

    let dir = root.join(config.output_dir());
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    let diagnostics = dir.join("diagnostics.csv");
    write_diagnostics(&diagnostics, &out.series)?;
    files.push(FileEntry { path: "diagnostics.csv".into(), producer: "flow::run with harness::run_with_diagnostics" });
    let energy = dir.join("energy.csv");
    write_energy(&energy, &out.series)?;
    files.push(FileEntry { path: "energy.csv".into(), producer: "flow::run (dissipation, kernel amplitudes)" });

    let mut snapshots = Vec::new();
    let mut states: Vec<&FlowState> = out.samples.iter().step_by(config.snapshot_every.max(1)).collect();
    if config.snapshot_every == 0 {
        states.clear();
    }
    states.push(&out.final_state);
    for st in states {
        let name = format!("snapshot_{:08}.json", st.steps);
        Snapshot::from_state(st).write(&dir.join(&name))?;
        files.push(FileEntry { path: name.clone(), producer: "io::Snapshot" });
        snapshots.push(dir.join(name));
    }

    let mut checks = evaluate_checks(config, &out.series);
    if let Halt::Breakdown { .. } = out.halt {
        checks.push(CheckRow::new("halt", out.halt.to_string(), f64::NAN, f64::NAN, f64::NAN, false));
    }
    let pass = checks.iter().all(|c| c.pass);
    let checks_csv = dir.join("checks.csv");
    let file = std::fs::File::create(&checks_csv)?;
    write_checks(file, &checks)?;
    files.push(FileEntry { path: "checks.csv".into(), producer: "harness reports" });

    let f_c = cylinder_f();
    let pts: Vec<(f64, f64)> = out.series.rows.iter().map(|r| (r.phi_l2, r.f - f_c)).collect();
    let plot = dir.join("loja.svg");
    std::fs::write(&plot, loglog_svg(&format!("{}: F − F(cylinder) against ‖φ‖", config.name), "‖φ‖", "F − F(cylinder)", &[(config.name.clone(), pts)]))?;
    files.push(FileEntry { path: "loja.svg".into(), producer: "io::loglog_svg from diagnostics.csv" });

    let manifest = dir.join("manifest.json");
    let m = Manifest {
        name: &config.name,
        version: env!("CARGO_PKG_VERSION"),
        config,
        halt: out.halt.to_string(),
        rows: out.series.len(),
        rejected_steps: out.rejected_steps,
        files,
        checks: &checks,
        pass,
    };
    std::fs::write(&manifest, serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(ReportBundle { dir, diagnostics, energy, checks_csv, snapshots, plot, manifest, halt: out.halt, checks, pass })
}

/// Runs configs in parallel, one output directory each.
pub fn run_batch(configs: &[ExperimentConfig], root: &Path) -> Result<Vec<Result<ReportBundle>>> {
    let mut seen = HashSet::new();
    for c in configs {
        if !seen.insert(c.output_dir()) {
            return Err(Error::Config(vec![format!("two configs write to '{}'", c.output_dir())]));
        }
    }
    Ok(configs.par_iter().map(|c| run_experiment(c, root)).collect())
}
