//! C ABI over the `shrinkerlab` flow and spectral routines.
//!
//! Objects cross the boundary as opaque handles created by `slab_*_new` and
//! released by the matching `slab_*_free`. Every fallible call returns a
//! [`SlabStatus`]; the message of the most recent failure on the calling
//! thread is available from [`slab_last_error`]. Panics are caught and
//! reported as [`SlabStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use shrinkerlab::flow::functional::gradient_norm;
use shrinkerlab::flow::{cylinder_f, f_value, phi_norms, FlowConfig, FlowState, Integrator, Scheme};
use shrinkerlab::geometry::graph::evaluate;
use shrinkerlab::geometry::CylinderSpec;
use shrinkerlab::io::{run_experiment, ExperimentConfig, Snapshot};
use shrinkerlab::spectral::{basis_eigenvalue, kernel_dimension, GraphField, SpectralBasis};
use shrinkerlab::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Breakdown = 4,
    Unsupported = 5,
    Io = 6,
    Config = 7,
    Internal = 8,
}

/// Integration scheme of a flow handle.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlabScheme {
    ImexSpectral = 0,
    ExplicitRk4 = 1,
}

/// Scalar diagnostics of a field.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlabDiagnostics {
    /// Rescaled time (0 for a bare field).
    pub s: f64,
    /// Gaussian area `F`.
    pub f: f64,
    /// `F − F(cylinder)`.
    pub f_gap: f64,
    pub phi_l1_ball: f64,
    pub phi_l2_ball: f64,
    pub phi_l2: f64,
    /// `‖𝓜(u)‖`.
    pub gradient_norm: f64,
    pub u_l2: f64,
}

/// Graph over the standard cylinder `S¹_{√2} × R`.
pub struct SlabField {
    inner: GraphField,
}

/// A flow: integrator plus current state.
pub struct SlabFlow {
    integrator: Integrator,
    state: FlowState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SlabStatus {
    match e {
        Error::Input(_) | Error::Precondition(_) => SlabStatus::InvalidArgument,
        Error::Domain(_) | Error::SingularOffset { .. } | Error::Fit(_) => SlabStatus::Domain,
        Error::GraphBreakdown { .. } | Error::StepRejected(_) => SlabStatus::Breakdown,
        Error::Unsupported(_) => SlabStatus::Unsupported,
        Error::Io(_) | Error::Data(_) => SlabStatus::Io,
        Error::Config(_) => SlabStatus::Config,
    }
}

/// Runs `f`, recording its failure or panic.
fn guard(f: impl FnOnce() -> Result<(), (SlabStatus, String)>) -> SlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlabStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| panic.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            SlabStatus::Internal
        }
    }
}

fn lib(e: Error) -> (SlabStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SlabStatus, String) {
    (SlabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SlabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| (SlabStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SlabStatus, String)> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (SlabStatus, String)> {
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (SlabStatus, String)> {
    unsafe { handle_mut(p, what) }
}

fn diagnostics(u: &GraphField, s: f64) -> Result<SlabDiagnostics, Error> {
    let cyl = CylinderSpec::standard(1, 2)?;
    let eval = evaluate(&cyl, u)?;
    let basis = u.basis();
    let f = f_value(basis, &eval);
    let (l1, l2r, l2) = phi_norms(basis, &eval, 10.0);
    Ok(SlabDiagnostics { s, f, f_gap: f - cylinder_f(), phi_l1_ball: l1, phi_l2_ball: l2r, phi_l2: l2, gradient_norm: gradient_norm(basis, &eval), u_l2: u.l2_norm() })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn slab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread (empty if none). Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn slab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Gaussian area of the standard cylinder, `√(2π/e)`.
#[no_mangle]
pub extern "C" fn slab_cylinder_f() -> f64 {
    cylinder_f()
}

/// Eigenvalue `1 − j²/2 − m/2` (general `k`: `1 − j(j+k−1)/(2k) − m/2`).
#[no_mangle]
pub extern "C" fn slab_eigenvalue(j: usize, m: usize, k: usize) -> f64 {
    basis_eigenvalue(j, m, k)
}

/// Dimension of the kernel of `L` on `S^k × R^{n−k}`.
///
/// # Safety
/// `dimension` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn slab_kernel_dimension(k: usize, n: usize, dimension: *mut usize) -> SlabStatus {
    guard(|| {
        let d = unsafe { out(dimension, "dimension") }?;
        if k == 0 || k > n {
            return Err((SlabStatus::InvalidArgument, format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
        }
        *d = kernel_dimension(k, n);
        Ok(())
    })
}

/// Zero field on `n_theta × hermite` modes with truncation `L`.
///
/// # Safety
/// `field` must be null or point to writable memory; the handle written
/// there is released with [`slab_field_free`].
#[no_mangle]
pub unsafe extern "C" fn slab_field_new(n_theta: usize, hermite: usize, truncation: f64, field: *mut *mut SlabField) -> SlabStatus {
    guard(|| {
        let slot = unsafe { out(field, "field") }?;
        let basis = SpectralBasis::new(n_theta, hermite, truncation).map_err(lib)?;
        *slot = Box::into_raw(Box::new(SlabField { inner: GraphField::zero(&basis) }));
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle from [`slab_field_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn slab_field_free(field: *mut SlabField) {
    if !field.is_null() {
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Adds `amplitude` times the monic mode `cos(jθ) y^m + …` (`j < 0`: `sin`).
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn slab_field_add_mode(field: *mut SlabField, j: i64, m: usize, amplitude: f64) -> SlabStatus {
    guard(|| {
        let f = unsafe { handle_mut(field, "field") }?;
        let mode = GraphField::from_modes(f.inner.basis(), &[(j, m, amplitude)]).map_err(lib)?;
        f.inner = f.inner.add(&mode);
        Ok(())
    })
}

/// Number of spectral coefficients of the field.
///
/// # Safety
/// `field` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn slab_field_len(field: *const SlabField, len: *mut usize) -> SlabStatus {
    guard(|| {
        let f = unsafe { handle(field, "field") }?;
        *unsafe { out(len, "len") }? = f.inner.coeffs().len();
        Ok(())
    })
}

/// Copies the coefficients into `buf`, which must hold `len` values as
/// reported by [`slab_field_len`].
///
/// # Safety
/// `field` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn slab_field_coefficients(field: *const SlabField, buf: *mut f64, len: usize) -> SlabStatus {
    guard(|| {
        let f = unsafe { handle(field, "field") }?;
        let c = f.inner.coeffs();
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != c.len() {
            return Err((SlabStatus::InvalidArgument, format!("buffer holds {len} values, field has {}", c.len())));
        }
        unsafe { std::slice::from_raw_parts_mut(buf, len) }.copy_from_slice(c);
        Ok(())
    })
}

/// Replaces the coefficients with `len` values from `buf`.
///
/// # Safety
/// `field` must be a live handle and `buf` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn slab_field_set_coefficients(field: *mut SlabField, buf: *const f64, len: usize) -> SlabStatus {
    guard(|| {
        let f = unsafe { handle_mut(field, "field") }?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let values = unsafe { std::slice::from_raw_parts(buf, len) }.to_vec();
        f.inner = GraphField::from_coeffs(f.inner.basis(), values).map_err(lib)?;
        Ok(())
    })
}

/// `F`, `φ` norms and `‖𝓜‖` of the graph of the field (balls of radius 10).
///
/// # Safety
/// `field` must be a live handle and `diag` writable.
#[no_mangle]
pub unsafe extern "C" fn slab_field_diagnostics(field: *const SlabField, diag: *mut SlabDiagnostics) -> SlabStatus {
    guard(|| {
        let f = unsafe { handle(field, "field") }?;
        *unsafe { out(diag, "diag") }? = diagnostics(&f.inner, 0.0).map_err(lib)?;
        Ok(())
    })
}

/// Starts a flow from a copy of `field` with fixed step `dt`.
///
/// # Safety
/// `field` must be a live handle and `flow` writable; the flow is released
/// with [`slab_flow_free`].
#[no_mangle]
pub unsafe extern "C" fn slab_flow_new(field: *const SlabField, scheme: SlabScheme, dt: f64, stabilize: c_int, flow: *mut *mut SlabFlow) -> SlabStatus {
    guard(|| {
        let f = unsafe { handle(field, "field") }?;
        let slot = unsafe { out(flow, "flow") }?;
        let scheme = match scheme {
            SlabScheme::ImexSpectral => Scheme::ImexSpectral,
            SlabScheme::ExplicitRk4 => Scheme::ExplicitRk4,
        };
        let integrator = Integrator::new(f.inner.basis(), FlowConfig { scheme, dt, stabilize: stabilize != 0, adaptive: None }).map_err(lib)?;
        *slot = Box::into_raw(Box::new(SlabFlow { integrator, state: FlowState::new(f.inner.clone()) }));
        Ok(())
    })
}

/// # Safety
/// `flow` must be null or a handle from [`slab_flow_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn slab_flow_free(flow: *mut SlabFlow) {
    if !flow.is_null() {
        drop(unsafe { Box::from_raw(flow) });
    }
}

/// Advances `steps` steps. On a breakdown the flow keeps the last valid state.
///
/// # Safety
/// `flow` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn slab_flow_step(flow: *mut SlabFlow, steps: usize) -> SlabStatus {
    guard(|| {
        let fl = unsafe { handle_mut(flow, "flow") }?;
        for _ in 0..steps {
            fl.state = fl.integrator.step(&fl.state).map_err(lib)?;
        }
        Ok(())
    })
}

/// Diagnostics of the current state.
///
/// # Safety
/// `flow` must be a live handle and `diag` writable.
#[no_mangle]
pub unsafe extern "C" fn slab_flow_diagnostics(flow: *const SlabFlow, diag: *mut SlabDiagnostics) -> SlabStatus {
    guard(|| {
        let fl = unsafe { handle(flow, "flow") }?;
        *unsafe { out(diag, "diag") }? = diagnostics(&fl.state.u, fl.state.s).map_err(lib)?;
        Ok(())
    })
}

/// Copies the current state into a new field handle.
///
/// # Safety
/// `flow` must be a live handle and `field` writable.
#[no_mangle]
pub unsafe extern "C" fn slab_flow_field(flow: *const SlabFlow, field: *mut *mut SlabField) -> SlabStatus {
    guard(|| {
        let fl = unsafe { handle(flow, "flow") }?;
        *unsafe { out(field, "field") }? = Box::into_raw(Box::new(SlabField { inner: fl.state.u.clone() }));
        Ok(())
    })
}

/// Writes the current state as a JSON snapshot.
///
/// # Safety
/// `flow` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn slab_flow_write_snapshot(flow: *const SlabFlow, path: *const c_char) -> SlabStatus {
    guard(|| {
        let fl = unsafe { handle(flow, "flow") }?;
        let path = unsafe { str_arg(path, "path") }?;
        Snapshot::from_state(&fl.state).write(Path::new(path)).map_err(lib)
    })
}

/// Runs an experiment (preset name or TOML path) and writes its bundle below
/// `out_root`. `passed` receives 1 when every check passed.
///
/// # Safety
/// `config` and `out_root` must be NUL-terminated strings and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn slab_simulate(config: *const c_char, out_root: *const c_char, passed: *mut c_int) -> SlabStatus {
    guard(|| {
        let cfg = unsafe { str_arg(config, "config") }?;
        let root = unsafe { str_arg(out_root, "out_root") }?;
        let flag = unsafe { out(passed, "passed") }?;
        let cfg = ExperimentConfig::load(cfg).map_err(lib)?;
        let bundle = run_experiment(&cfg, Path::new(root)).map_err(lib)?;
        *flag = c_int::from(bundle.pass);
        Ok(())
    })
}
