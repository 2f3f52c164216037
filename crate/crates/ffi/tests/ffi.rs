use std::ffi::{CStr, CString};
use std::ptr;
use zkg_ffi::*;

const CONFIG: &str = "[grid]\ndim = 2\nn = 16\nlength = 16.0\n[data]\nfamily = \"random\"\nseed = 4\nsigma = 1.5\namplitude = 0.05\n[params]\neps0 = 1e6\n[run]\ndt = 0.02\n";

fn new_sim(config: &str) -> Result<*mut ZkgSimulation, (ZkgStatus, String)> {
    let c = CString::new(config).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { zkg_simulation_new(c.as_ptr(), &mut out) };
    if status == ZkgStatus::Ok {
        Ok(out)
    } else {
        Err((status, last_error()))
    }
}

fn last_error() -> String {
    let p = zkg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn advance_diagnose_and_checkpoint() {
    let sim = new_sim(CONFIG).unwrap();
    let mut d0 = ZkgDiagnostics::default();
    let mut d1 = ZkgDiagnostics::default();
    unsafe {
        assert_eq!(zkg_simulation_diagnostics(sim, &mut d0), ZkgStatus::Ok);
        assert_eq!(zkg_simulation_advance(sim, 10), ZkgStatus::Ok);
        assert_eq!(zkg_simulation_diagnostics(sim, &mut d1), ZkgStatus::Ok);
    }
    assert!((d1.t - 0.2).abs() < 1e-12);
    assert!(((d1.mass - d0.mass) / d0.mass).abs() < 1e-10);
    assert!(d1.cauchy_f > 0.0 && d0.cauchy_f == 0.0);
    let mut steps = 0u64;
    assert_eq!(unsafe { zkg_simulation_step_count(sim, &mut steps) }, ZkgStatus::Ok);
    assert_eq!(steps, 10);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("s.zkg").to_str().unwrap()).unwrap();
    let config = CString::new(CONFIG).unwrap();
    let mut restored = ptr::null_mut();
    unsafe {
        assert_eq!(zkg_simulation_write_checkpoint(sim, path.as_ptr()), ZkgStatus::Ok);
        assert_eq!(zkg_simulation_from_checkpoint(config.as_ptr(), path.as_ptr(), &mut restored), ZkgStatus::Ok);
        assert_eq!(zkg_simulation_advance(sim, 5), ZkgStatus::Ok);
        assert_eq!(zkg_simulation_advance(restored, 5), ZkgStatus::Ok);
        let (mut a, mut b) = (ZkgDiagnostics::default(), ZkgDiagnostics::default());
        zkg_simulation_diagnostics(sim, &mut a);
        zkg_simulation_diagnostics(restored, &mut b);
        assert_eq!(a, b);
        zkg_simulation_free(sim);
        zkg_simulation_free(restored);
        zkg_simulation_free(ptr::null_mut());
    }
}

#[test]
fn errors_carry_status_and_message() {
    let (status, msg) = new_sim("[grid]\nn = 10\n").unwrap_err();
    assert_eq!(status, ZkgStatus::Config);
    assert!(msg.contains("grid"), "{msg}");

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { zkg_simulation_new(ptr::null(), &mut out) }, ZkgStatus::NullPointer);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { zkg_simulation_new(bad.as_ptr().cast(), &mut out) }, ZkgStatus::InvalidUtf8);

    let config = CString::new(CONFIG).unwrap();
    let missing = CString::new("/nonexistent/zkg/none.zkg").unwrap();
    let status = unsafe { zkg_simulation_from_checkpoint(config.as_ptr(), missing.as_ptr(), &mut out) };
    assert_eq!(status, ZkgStatus::Io);
    let mut t = 0.0;
    assert_eq!(unsafe { zkg_simulation_time(ptr::null(), &mut t) }, ZkgStatus::NullPointer);
}

#[test]
fn phases_and_fits() {
    let xi = [1.0, 0.5, -0.25];
    let eta = [0.3, -0.2, 0.7];
    let mut v = 0.0;
    unsafe {
        assert_eq!(zkg_phi(xi.as_ptr(), eta.as_ptr(), 1, &mut v), ZkgStatus::Ok);
        assert_eq!(v, zkg_core::phases::phi(&xi, &eta, zkg_core::propagators::Sign::Plus));
        assert_eq!(zkg_psi(xi.as_ptr(), eta.as_ptr(), -1, &mut v), ZkgStatus::Ok);
        assert_eq!(v, zkg_core::phases::psi(&xi, &eta, zkg_core::propagators::Sign::Minus));
        assert_eq!(zkg_psi(xi.as_ptr(), eta.as_ptr(), 0, &mut v), ZkgStatus::InvalidArgument);
    }
    let t: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let y: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-1.5)).collect();
    let mut fit = ZkgDecayFit::default();
    assert_eq!(unsafe { zkg_fit_decay(t.as_ptr(), y.as_ptr(), t.len(), 1.0, 20.0, &mut fit) }, ZkgStatus::Ok);
    assert!((fit.slope + 1.5).abs() < 1e-12);
    assert_eq!(fit.samples, 20);
    assert_eq!(unsafe { zkg_fit_decay(t.as_ptr(), y.as_ptr(), 3, 1.0, 20.0, &mut fit) }, ZkgStatus::InvalidArgument);
    let version = unsafe { CStr::from_ptr(zkg_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_against_the_header() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libzkg_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = std::process::Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("mass drift"));
}
