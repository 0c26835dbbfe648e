use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shrinkerlab")).args(args).output().unwrap()
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn spectrum_lists_kernel_and_eigenvalues() {
    let o = cli(&["spectrum", "--k", "1", "--n", "2", "--modes", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let out = text(&o);
    assert!(out.starts_with("index,j,m,lambda,multiplicity,galerkin,finite_difference"));
    assert!(out.contains("y1^2 - 2"));
    assert!(out.contains("numeric_kernel_dimension,3,3"));
    let o = cli(&["spectrum", "--k", "2", "--n", "3", "--modes", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o).contains("dimension,4,expected,4"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(cli(&["spectrum", "--k", "3", "--n", "2"]).status.code(), Some(2));
    assert_eq!(cli(&["verify", "--suite", "nope"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "name = \"bad\"\ndt = -1.0\nsteps = 0\n").unwrap();
    let o = cli(&["simulate", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("dt") && err.contains("steps"), "{err}");
}

#[test]
fn simulate_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["simulate", "cylinder", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("cylinder");
    for f in ["diagnostics.csv", "energy.csv", "checks.csv", "loja.svg", "manifest.json", "snapshot_00001000.json"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["pass"], true);
    assert_eq!(manifest["halt"], "completed");

    let o = cli(&["loja", run.join("snapshot_00001000.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o).contains("gradient-lojasiewicz"));
    let o = cli(&["loja", run.join("diagnostics.csv").to_str().unwrap()]);
    assert!(text(&o).starts_with("check,params,lhs,rhs,constant,pass"));
    assert!(Path::new(&run.join("diagnostics.svg")).exists());
}

#[test]
fn scalar_demo_passes() {
    let o = cli(&["scalar-demo"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("interpolation-sharp"));
}
