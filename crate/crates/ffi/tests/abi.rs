use std::ffi::{CStr, CString};
use std::ptr;

use shrinkerlab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(slab_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn constants_match_the_library() {
    assert_eq!(slab_cylinder_f(), shrinkerlab::flow::cylinder_f());
    assert_eq!(slab_eigenvalue(1, 1, 1), 0.0);
    assert_eq!(slab_eigenvalue(2, 0, 1), -1.0);
    let v = unsafe { CStr::from_ptr(slab_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn errors_carry_status_and_message() {
    let mut dim = 0usize;
    assert_eq!(unsafe { slab_kernel_dimension(2, 4, &mut dim) }, SlabStatus::Ok);
    assert_eq!(dim, 9);
    assert_eq!(unsafe { slab_kernel_dimension(0, 2, &mut dim) }, SlabStatus::InvalidArgument);
    assert!(last_error().contains("k = 0"));
    assert_eq!(unsafe { slab_kernel_dimension(1, 2, ptr::null_mut()) }, SlabStatus::NullPointer);
    let mut field = ptr::null_mut();
    assert_eq!(unsafe { slab_field_new(0, 4, 12.0, &mut field) }, SlabStatus::Config);
    assert!(field.is_null());
    assert_eq!(unsafe { slab_flow_step(ptr::null_mut(), 1) }, SlabStatus::NullPointer);
    unsafe { slab_field_free(ptr::null_mut()) };
}

#[test]
fn field_and_flow_round_trip() {
    unsafe {
        let mut field = ptr::null_mut();
        assert_eq!(slab_field_new(8, 8, 12.0, &mut field), SlabStatus::Ok);
        assert_eq!(slab_field_add_mode(field, 0, 2, 0.05), SlabStatus::Ok);
        let mut len = 0;
        assert_eq!(slab_field_len(field, &mut len), SlabStatus::Ok);
        let mut coeffs = vec![0.0; len];
        assert_eq!(slab_field_coefficients(field, coeffs.as_mut_ptr(), len), SlabStatus::Ok);
        assert_eq!(slab_field_coefficients(field, coeffs.as_mut_ptr(), len + 1), SlabStatus::InvalidArgument);
        assert!(coeffs.iter().any(|c| *c != 0.0));
        assert_eq!(slab_field_set_coefficients(field, coeffs.as_ptr(), len), SlabStatus::Ok);

        let mut diag = SlabDiagnostics::default();
        assert_eq!(slab_field_diagnostics(field, &mut diag), SlabStatus::Ok);
        assert!(diag.f_gap > 0.0 && diag.phi_l2 > 0.0);

        let mut flow = ptr::null_mut();
        assert_eq!(slab_flow_new(field, SlabScheme::ExplicitRk4, 0.01, 1, &mut flow), SlabStatus::Ok);
        assert_eq!(slab_flow_step(flow, 50), SlabStatus::Ok);
        let mut later = SlabDiagnostics::default();
        assert_eq!(slab_flow_diagnostics(flow, &mut later), SlabStatus::Ok);
        assert!((later.s - 0.5).abs() < 1e-12 && later.f < diag.f);

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("snap.json").to_str().unwrap()).unwrap();
        assert_eq!(slab_flow_write_snapshot(flow, path.as_ptr()), SlabStatus::Ok);
        let snap = shrinkerlab::io::Snapshot::read(&dir.path().join("snap.json")).unwrap();
        assert_eq!(snap.step, 50);

        let mut copy = ptr::null_mut();
        assert_eq!(slab_flow_field(flow, &mut copy), SlabStatus::Ok);
        assert_eq!(slab_field_coefficients(copy, coeffs.as_mut_ptr(), len), SlabStatus::Ok);
        assert_eq!(coeffs, snap.coefficients);
        slab_field_free(copy);
        slab_flow_free(flow);
        slab_field_free(field);
    }
}

#[test]
fn simulate_reports_pass_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let root = CString::new(dir.path().to_str().unwrap()).unwrap();
    let preset = CString::new("cylinder").unwrap();
    let mut passed = 0;
    assert_eq!(unsafe { slab_simulate(preset.as_ptr(), root.as_ptr(), &mut passed) }, SlabStatus::Ok);
    assert_eq!(passed, 1);
    assert!(dir.path().join("cylinder").join("diagnostics.csv").exists());
    let missing = CString::new("no-such-preset").unwrap();
    let st = unsafe { slab_simulate(missing.as_ptr(), root.as_ptr(), &mut passed) };
    assert_ne!(st, SlabStatus::Ok);
    assert!(!last_error().is_empty());
}

/// Compiles `smoke.c` against the generated header and the static library.
#[test]
fn c_program_links_against_the_header() {
    let Ok(cc) = which("cc") else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let crate_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    // test binaries live in target/<profile>/deps
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libshrinkerlab_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = std::process::Command::new(cc)
        .arg(crate_dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("F(C) = 1.520346"));
}

fn which(name: &str) -> Result<std::path::PathBuf, ()> {
    std::env::var_os("PATH")
        .and_then(|p| std::env::split_paths(&p).map(|d| d.join(name)).find(|c| c.is_file()))
        .ok_or(())
}
