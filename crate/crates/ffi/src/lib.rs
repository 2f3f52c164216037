//! C interface to the simulator.
//!
//! Every function returns a [`ZkgStatus`]; on failure a description is
//! available from [`zkg_last_error`] on the same thread. Handles are opaque
//! and must be released with [`zkg_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use zkg_core::checkpoint::{read_checkpoint, write_checkpoint};
use zkg_core::config::RunConfig;
use zkg_core::diagnostics::{fit_decay, DiagnosticsRecord};
use zkg_core::phases::{phi, psi};
use zkg_core::propagators::Sign;
use zkg_core::runner::Simulation;
use zkg_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZkgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    Numerical = 5,
    Io = 6,
    Checkpoint = 7,
    Panic = 8,
}

/// Opaque simulation handle.
pub struct ZkgSimulation {
    sim: Simulation,
}

/// Snapshot of the monitored quantities at the current time.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZkgDiagnostics {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub sup_u: f64,
    pub sup_n: f64,
    pub sob_f: f64,
    pub xf: f64,
    pub x2f: f64,
    pub sob_g: f64,
    pub besov_w: f64,
    pub xnorm_components: [f64; 5],
    pub apriori_g: [f64; 3],
    pub cauchy_f: f64,
}

impl From<&DiagnosticsRecord> for ZkgDiagnostics {
    fn from(r: &DiagnosticsRecord) -> Self {
        ZkgDiagnostics {
            t: r.t,
            mass: r.mass,
            energy: r.energy,
            sup_u: r.sup_u,
            sup_n: r.sup_n,
            sob_f: r.sob_f,
            xf: r.xf,
            x2f: r.x2f,
            sob_g: r.sob_g,
            besov_w: r.besov_w,
            xnorm_components: r.xnorm_components,
            apriori_g: r.apriori_g,
            cauchy_f: r.cauchy_f,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZkgDecayFit {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub samples: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ZkgStatus {
    match e {
        Error::Config(_) | Error::InvalidGrid(_) | Error::InvalidParams(_) | Error::DeltaTooLarge { .. } | Error::InvalidData(_) => {
            ZkgStatus::Config
        }
        Error::BlowUp { .. } | Error::EnergyDrift { .. } | Error::Identity(_) | Error::CheckFailed(_) => ZkgStatus::Numerical,
        Error::Io(_) | Error::Timeseries(_) => ZkgStatus::Io,
        Error::Checkpoint { .. } => ZkgStatus::Checkpoint,
        _ => ZkgStatus::InvalidArgument,
    }
}

struct Failure(ZkgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ZkgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ZkgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ZkgStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(ZkgStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` is null or a valid nul-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(ZkgStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `p` is null or points to a live handle.
unsafe fn handle<'a>(p: *const ZkgSimulation) -> Result<&'a ZkgSimulation, Failure> {
    p.as_ref().ok_or_else(|| null("simulation"))
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn zkg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn zkg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn parse_config(text: &str) -> Result<RunConfig, Failure> {
    Ok(RunConfig::from_str_with_overrides(text, &[])?)
}

/// Builds data from a TOML configuration string and returns a new handle.
///
/// # Safety
/// `config_toml` is a nul-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zkg_simulation_new(config_toml: *const c_char, out: *mut *mut ZkgSimulation) -> ZkgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = parse_config(text(config_toml, "config")?)?;
        let sim = Simulation::from_config(&config)?;
        put(out, Box::into_raw(Box::new(ZkgSimulation { sim })), "out")
    })
}

/// Restores a handle from a checkpoint written under a compatible configuration.
///
/// # Safety
/// String arguments are nul-terminated; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zkg_simulation_from_checkpoint(
    config_toml: *const c_char,
    path: *const c_char,
    out: *mut *mut ZkgSimulation,
) -> ZkgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = parse_config(text(config_toml, "config")?)?;
        let state = read_checkpoint(&PathBuf::from(text(path, "path")?))?;
        let sim = Simulation::from_state(&config, state)?;
        put(out, Box::into_raw(Box::new(ZkgSimulation { sim })), "out")
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sim` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn zkg_simulation_free(sim: *mut ZkgSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Takes `steps` steps of the configured size.
///
/// # Safety
/// `sim` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn zkg_simulation_advance(sim: *mut ZkgSimulation, steps: u64) -> ZkgStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("simulation"))?;
        Ok(sim.sim.advance(steps)?)
    })
}

/// # Safety
/// `sim` is a live handle; `t` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zkg_simulation_time(sim: *const ZkgSimulation, t: *mut f64) -> ZkgStatus {
    guard(|| put(t, handle(sim)?.sim.state().t, "t"))
}

/// # Safety
/// `sim` is a live handle; `steps` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zkg_simulation_step_count(sim: *const ZkgSimulation, steps: *mut u64) -> ZkgStatus {
    guard(|| put(steps, handle(sim)?.sim.state().step_count, "steps"))
}

/// # Safety
/// `sim` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zkg_simulation_diagnostics(sim: *const ZkgSimulation, out: *mut ZkgDiagnostics) -> ZkgStatus {
    guard(|| {
        let record = handle(sim)?.sim.diagnostics()?;
        put(out, ZkgDiagnostics::from(&record), "out")
    })
}

/// # Safety
/// `sim` is a live handle; `path` is nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn zkg_simulation_write_checkpoint(sim: *const ZkgSimulation, path: *const c_char) -> ZkgStatus {
    guard(|| {
        let sim = handle(sim)?;
        Ok(write_checkpoint(sim.sim.state(), &PathBuf::from(text(path, "path")?))?)
    })
}

/// # Safety
/// Pointers are null or valid for three reads.
unsafe fn vec3(p: *const f64, what: &str) -> Result<[f64; 3], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok([s[0], s[1], s[2]])
}

fn sign(branch: i32) -> Result<Sign, Failure> {
    match branch {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        b => Err(Failure(ZkgStatus::InvalidArgument, format!("branch must be +1 or -1, got {b}"))),
    }
}

/// Schrodinger-wave phase at `(xi, eta)`; `branch` is +1 or -1.
///
/// # Safety
/// `xi` and `eta` point to three doubles; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zkg_phi(xi: *const f64, eta: *const f64, branch: i32, out: *mut f64) -> ZkgStatus {
    guard(|| put(out, phi(&vec3(xi, "xi")?, &vec3(eta, "eta")?, sign(branch)?), "out"))
}

/// Wave-Schrodinger phase at `(xi, eta)`; `branch` is +1 or -1.
///
/// # Safety
/// As for [`zkg_phi`].
#[no_mangle]
pub unsafe extern "C" fn zkg_psi(xi: *const f64, eta: *const f64, branch: i32, out: *mut f64) -> ZkgStatus {
    guard(|| put(out, psi(&vec3(xi, "xi")?, &vec3(eta, "eta")?, sign(branch)?), "out"))
}

/// Power-law fit `value ~ C t^slope` over samples with `t0 <= t <= t1`.
///
/// # Safety
/// `t` and `value` point to `len` doubles each; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn zkg_fit_decay(
    t: *const f64,
    value: *const f64,
    len: usize,
    t0: f64,
    t1: f64,
    out: *mut ZkgDecayFit,
) -> ZkgStatus {
    guard(|| {
        if t.is_null() || value.is_null() {
            return Err(null("series"));
        }
        let ts = std::slice::from_raw_parts(t, len);
        let vs = std::slice::from_raw_parts(value, len);
        let series: Vec<(f64, f64)> = ts.iter().copied().zip(vs.iter().copied()).collect();
        let fit = fit_decay(&series, (t0, t1))?;
        put(
            out,
            ZkgDecayFit {
                slope: fit.slope,
                std_error: fit.stderr,
                intercept: fit.intercept,
                samples: fit.samples,
            },
            "out",
        )
    })
}
