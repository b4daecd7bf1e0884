//! C ABI over the homogenized thin-film solvers: opaque handles for the
//! physical parameters and roughness profiles, status codes for every
//! fallible call, and entry points for the flow factor, the effective
//! tensors of both rough regimes, and the full JSON-configured pipeline.
//!
//! The generated header lands in `include/brinkfilm.h` at build time.
//! Conventions:
//! * every `*_new` hands back an owned handle that must be released with the
//!   matching `*_free`;
//! * pointer arguments must be valid for the duration of the call and output
//!   pointers must be non-null unless stated otherwise;
//! * calls returning [`BfStatus`] store a message retrievable with
//!   [`bf_last_error_message`] on failure (per thread).

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use brinkfilm::pipeline::{run_pipeline, Stage};
use brinkfilm::{CellGrid, PhysicalParams, RoughnessProfile};

/// Status code of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfStatus {
    Ok = 0,
    /// A pointer argument was null or a value argument invalid.
    InvalidArgument = 1,
    /// A solver failed to converge or a precondition was violated.
    SolverFailure = 2,
    /// I/O or configuration parsing failed.
    ConfigError = 3,
    /// A panic was caught at the boundary.
    Internal = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.to_string());
}

fn fail(status: BfStatus, msg: &str) -> BfStatus {
    set_error(msg);
    status
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (then only the
/// length is returned).
#[no_mangle]
pub unsafe extern "C" fn bf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Opaque physical-parameter handle.
pub struct BfParams(PhysicalParams);

/// Opaque roughness-profile handle.
pub struct BfProfile(RoughnessProfile);

/// Build a parameter set; fails if a constant that must be positive is not.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn bf_params_new(
    mu: f64,
    mu_eff: f64,
    permeability: f64,
    conductivity: f64,
    heat_flux: f64,
    out: *mut *mut BfParams,
) -> BfStatus {
    if out.is_null() {
        return fail(BfStatus::InvalidArgument, "null output pointer");
    }
    match PhysicalParams::new(mu, mu_eff, permeability, conductivity, heat_flux) {
        Ok(p) => {
            *out = Box::into_raw(Box::new(BfParams(p)));
            BfStatus::Ok
        }
        Err(e) => fail(BfStatus::InvalidArgument, &e.to_string()),
    }
}

/// Brinkman parameter `M = sqrt(mu / (K mu_eff))`; NaN for a null handle.
///
/// # Safety
/// `params` must be a live handle from [`bf_params_new`] or null.
#[no_mangle]
pub unsafe extern "C" fn bf_params_m(params: *const BfParams) -> f64 {
    match params.as_ref() {
        Some(p) => p.0.m(),
        None => f64::NAN,
    }
}

/// # Safety
/// `params` must be a handle from [`bf_params_new`] (or null, a no-op);
/// it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bf_params_free(params: *mut BfParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Constant roughness profile `h(z') = height`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn bf_profile_constant_new(
    height: f64,
    out: *mut *mut BfProfile,
) -> BfStatus {
    if out.is_null() {
        return fail(BfStatus::InvalidArgument, "null output pointer");
    }
    match RoughnessProfile::constant(height) {
        Ok(p) => {
            *out = Box::into_raw(Box::new(BfProfile(p)));
            BfStatus::Ok
        }
        Err(e) => fail(BfStatus::InvalidArgument, &e.to_string()),
    }
}

/// Product sinusoid `h = mean + amplitude cos(2 pi k1 z1) cos(2 pi k2 z2)`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn bf_profile_sinusoidal_new(
    mean: f64,
    amplitude: f64,
    k1: u32,
    k2: u32,
    out: *mut *mut BfProfile,
) -> BfStatus {
    if out.is_null() {
        return fail(BfStatus::InvalidArgument, "null output pointer");
    }
    match RoughnessProfile::sinusoidal(mean, amplitude, k1, k2) {
        Ok(p) => {
            *out = Box::into_raw(Box::new(BfProfile(p)));
            BfStatus::Ok
        }
        Err(e) => fail(BfStatus::InvalidArgument, &e.to_string()),
    }
}

/// Sampled profile: `heights[j * n1 + i]` on the cell-center grid of `Z'`,
/// interpolated bilinearly with periodic wrapping.
///
/// # Safety
/// `heights` must point to `n1 * n2` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bf_profile_sampled_new(
    heights: *const f64,
    n1: usize,
    n2: usize,
    out: *mut *mut BfProfile,
) -> BfStatus {
    if out.is_null() || heights.is_null() {
        return fail(BfStatus::InvalidArgument, "null pointer");
    }
    let data = std::slice::from_raw_parts(heights, n1.saturating_mul(n2)).to_vec();
    match RoughnessProfile::sampled(n1, n2, data) {
        Ok(p) => {
            *out = Box::into_raw(Box::new(BfProfile(p)));
            BfStatus::Ok
        }
        Err(e) => fail(BfStatus::InvalidArgument, &e.to_string()),
    }
}

/// Evaluate the profile with periodic wrapping; NaN for a null handle.
///
/// # Safety
/// `profile` must be a live profile handle or null.
#[no_mangle]
pub unsafe extern "C" fn bf_profile_eval(profile: *const BfProfile, z1: f64, z2: f64) -> f64 {
    match profile.as_ref() {
        Some(p) => p.0.eval(z1, z2),
        None => f64::NAN,
    }
}

/// # Safety
/// `profile` must be a handle from a `bf_profile_*_new` call (or null);
/// it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bf_profile_free(profile: *mut BfProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Flow factor `phi_M(h) = h - (2/M) tanh(M h / 2)`; NaN for invalid input.
#[no_mangle]
pub extern "C" fn bf_flow_factor(m: f64, h: f64) -> f64 {
    brinkfilm::profile::flow_factor(m, h).unwrap_or(f64::NAN)
}

/// Subcritical effective tensor on an `n x n` periodic cell grid.
/// `out_tensor` receives row-major entries `[a11, a12, a21, a22]`,
/// `out_residual` (optional) the worst corrector flux-divergence.
///
/// # Safety
/// Handles must be live; `out_tensor` must point to 4 doubles and
/// `out_residual` to one double or be null.
#[no_mangle]
pub unsafe extern "C" fn bf_subcritical_tensor(
    profile: *const BfProfile,
    params: *const BfParams,
    n: usize,
    tol: f64,
    out_tensor: *mut f64,
    out_residual: *mut f64,
) -> BfStatus {
    let (Some(profile), Some(params)) = (profile.as_ref(), params.as_ref()) else {
        return fail(BfStatus::InvalidArgument, "null handle");
    };
    if out_tensor.is_null() {
        return fail(BfStatus::InvalidArgument, "null output pointer");
    }
    let result = catch_unwind(AssertUnwindSafe(|| {
        let grid = CellGrid::new(n, n, 1)?;
        let sol =
            brinkfilm::cell_sub::SubcriticalCellSolution::solve(&profile.0, &params.0, &grid, tol)?;
        let t = brinkfilm::cell_sub::assemble_tensor(&sol, &params.0, &profile.0)?;
        Ok::<_, brinkfilm::Error>((t, sol.max_flux_divergence()))
    }));
    match result {
        Ok(Ok((t, residual))) => {
            let e = t.entries();
            std::slice::from_raw_parts_mut(out_tensor, 4)
                .copy_from_slice(&[e[0][0], e[0][1], e[1][0], e[1][1]]);
            if !out_residual.is_null() {
                *out_residual = residual;
            }
            BfStatus::Ok
        }
        Ok(Err(e)) => fail(BfStatus::SolverFailure, &e.to_string()),
        Err(_) => fail(BfStatus::Internal, "panic in solver"),
    }
}

/// Critical (3D) effective tensor on an `n1 x n2 x n3` staggered grid over
/// the penalized box `Z' x (0, h_max)`; entries as in
/// [`bf_subcritical_tensor`], residual = worst fluid-cell divergence.
///
/// # Safety
/// Same contracts as [`bf_subcritical_tensor`].
#[no_mangle]
pub unsafe extern "C" fn bf_critical_tensor(
    profile: *const BfProfile,
    params: *const BfParams,
    n1: usize,
    n2: usize,
    n3: usize,
    tol: f64,
    out_tensor: *mut f64,
    out_residual: *mut f64,
) -> BfStatus {
    let (Some(profile), Some(params)) = (profile.as_ref(), params.as_ref()) else {
        return fail(BfStatus::InvalidArgument, "null handle");
    };
    if out_tensor.is_null() {
        return fail(BfStatus::InvalidArgument, "null output pointer");
    }
    let result = catch_unwind(AssertUnwindSafe(|| {
        let grid = CellGrid::new(n1, n2, n3)?;
        let sol = brinkfilm::cell_crit::CriticalCellSolution::solve(
            &profile.0, &params.0, &grid, tol,
        )?;
        let t = brinkfilm::cell_crit::assemble_tensor(&sol, &params.0, &profile.0)?;
        let residual = sol.fields[0]
            .div_inf_fluid
            .max(sol.fields[1].div_inf_fluid);
        Ok::<_, brinkfilm::Error>((t, residual))
    }));
    match result {
        Ok(Ok((t, residual))) => {
            let e = t.entries();
            std::slice::from_raw_parts_mut(out_tensor, 4)
                .copy_from_slice(&[e[0][0], e[0][1], e[1][0], e[1][1]]);
            if !out_residual.is_null() {
                *out_residual = residual;
            }
            BfStatus::Ok
        }
        Ok(Err(e)) => fail(BfStatus::SolverFailure, &e.to_string()),
        Err(_) => fail(BfStatus::Internal, "panic in solver"),
    }
}

/// Run the full pipeline from a JSON configuration string, writing the
/// standard output files into `out_dir`.
///
/// # Safety
/// `config_json` and `out_dir` must be NUL-terminated UTF-8 strings.
#[no_mangle]
pub unsafe extern "C" fn bf_run_json(
    config_json: *const c_char,
    out_dir: *const c_char,
) -> BfStatus {
    if config_json.is_null() || out_dir.is_null() {
        return fail(BfStatus::InvalidArgument, "null pointer");
    }
    let parse = |p: *const c_char| -> Result<&str, std::str::Utf8Error> {
        std::ffi::CStr::from_ptr(p).to_str()
    };
    let (Ok(json), Ok(dir)) = (parse(config_json), parse(out_dir)) else {
        return fail(BfStatus::InvalidArgument, "non-UTF-8 argument");
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        let cfg = brinkfilm::config::RunConfig::from_json(json)?;
        run_pipeline(&cfg, std::path::Path::new(dir), Stage::Full)
    }));
    match result {
        Ok(Ok(report)) if !report.failed => BfStatus::Ok,
        Ok(Ok(report)) => {
            let failed: Vec<&str> = report
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            fail(
                BfStatus::SolverFailure,
                &format!("invariant checks failed: {}", failed.join(", ")),
            )
        }
        Ok(Err(brinkfilm::Error::Config { path, message })) => {
            fail(BfStatus::ConfigError, &format!("{path}: {message}"))
        }
        Ok(Err(e @ brinkfilm::Error::Json(_))) | Ok(Err(e @ brinkfilm::Error::Io(_))) => {
            fail(BfStatus::ConfigError, &e.to_string())
        }
        Ok(Err(e)) => fail(BfStatus::SolverFailure, &e.to_string()),
        Err(_) => fail(BfStatus::Internal, "panic in pipeline"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_roundtrip_and_error_path() {
        unsafe {
            let mut h: *mut BfParams = std::ptr::null_mut();
            assert_eq!(bf_params_new(4.0, 1.0, 1.0, 1.0, 0.0, &mut h), BfStatus::Ok);
            assert_eq!(bf_params_m(h), 2.0);
            bf_params_free(h);

            let mut h2: *mut BfParams = std::ptr::null_mut();
            assert_eq!(
                bf_params_new(-1.0, 1.0, 1.0, 1.0, 0.0, &mut h2),
                BfStatus::InvalidArgument
            );
            let mut buf = [0i8; 128];
            let n = bf_last_error_message(buf.as_mut_ptr(), buf.len());
            assert!(n > 0);
            let msg = std::ffi::CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
            assert!(msg.contains("mu"));
        }
    }

    #[test]
    fn profile_eval_through_the_boundary() {
        unsafe {
            let mut p: *mut BfProfile = std::ptr::null_mut();
            assert_eq!(
                bf_profile_sinusoidal_new(1.0, 0.3, 1, 1, &mut p),
                BfStatus::Ok
            );
            assert!((bf_profile_eval(p, 0.0, 0.0) - 1.3).abs() < 1e-12);
            assert!((bf_profile_eval(p, 1.0, 0.0) - 1.3).abs() < 1e-12);
            bf_profile_free(p);
        }
    }

    #[test]
    fn flow_factor_and_invalid_inputs() {
        assert!((bf_flow_factor(1.0, 1.0) - (1.0 - 2.0 * 0.5f64.tanh())).abs() < 1e-15);
        assert!(bf_flow_factor(-1.0, 1.0).is_nan());
    }

    #[test]
    fn subcritical_tensor_matches_flow_factor() {
        unsafe {
            let mut prof: *mut BfProfile = std::ptr::null_mut();
            bf_profile_constant_new(1.0, &mut prof);
            let mut pars: *mut BfParams = std::ptr::null_mut();
            bf_params_new(1.0, 1.0, 1.0, 1.0, 0.0, &mut pars);
            let mut t = [0.0f64; 4];
            let mut residual = 0.0f64;
            assert_eq!(
                bf_subcritical_tensor(prof, pars, 16, 1e-10, t.as_mut_ptr(), &mut residual),
                BfStatus::Ok
            );
            let phi = bf_flow_factor(1.0, 1.0);
            assert!((t[0] - phi).abs() < 1e-10);
            assert!((t[3] - phi).abs() < 1e-10);
            assert!(t[1].abs() < 1e-12 && t[2].abs() < 1e-12);
            assert!(residual <= 1e-9);
            bf_profile_free(prof);
            bf_params_free(pars);
        }
    }

    #[test]
    fn run_json_reports_config_errors() {
        unsafe {
            let bad = std::ffi::CString::new("{ not json").unwrap();
            let dir = std::ffi::CString::new("/tmp/brinkfilm-ffi-test").unwrap();
            assert_eq!(bf_run_json(bad.as_ptr(), dir.as_ptr()), BfStatus::ConfigError);
        }
    }
}
