//! Acceptance run: prints one `[PASS]`/`[FAIL]` line per criterion.
//!
//! A criterion listed in `KNOWN_LIMITS` may report FAIL without failing the
//! target, but only when its companion check confirms the analysis of why it
//! cannot pass. Any other FAIL makes the target exit non-zero.

use num_complex::Complex64;
use std::path::Path;
use std::time::Instant;
use zkg_core::besov::DyadicPartition;
use zkg_core::checkpoint::{encode, read_checkpoint};
use zkg_core::config::{OracleConfig, RunConfig};
use zkg_core::data::{calibrate_amplitude, choose_parameters, make_data, DataSpec, Family};
use zkg_core::diagnostics::{
    dispersive_estimate_check, fit_decay, xnorm_report, DiagnosticsRecord, DispersiveKind, DispersiveTolerances,
};
use zkg_core::evolution::{
    energy, mass, reality_defect, reconstruct_n, reconstruct_nt, reduce_to_first_order, run, Coupling, Integrator,
    RunSettings, State,
};
use zkg_core::propagators::{schrodinger_group, wave_half_group, Sign};
use zkg_core::runner::{
    checkpoint_name, identities_pipeline, oracle_pipeline, run_pipeline, FINAL_CHECKPOINT, NULL_IDENTITY_TOLERANCE,
    TIMESERIES_FILE,
};
use zkg_core::{Field, Grid};

const IDENTITY_SAMPLES: usize = 1_000_000;
const IDENTITY_SECONDS: f64 = 5.0;
const PSEUDO_SCALING_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-5;
const MASS_DRIFT_TOL: f64 = 1e-8;
const ENERGY_DRIFT_TOL: f64 = 1e-6;
const HALVING_RATIO: f64 = 16.0;
const HALVING_SPREAD: f64 = 0.3;
const ORDER: f64 = 4.0;
const ORDER_TOL: f64 = 0.2;
const PROFILE_CONST_TOL: f64 = 1e-14;
const PROPAGATOR_NORM_TOL: f64 = 1e-12;
const SUP_RATE: f64 = 1.5;
const L6_RATE: f64 = 1.0;
const WAVE_RATE: f64 = 1.0;
const SCHRODINGER_SLOPE_TOL: f64 = 0.1;
const WAVE_SLOPE_TOL: f64 = 0.15;
const MONITOR_BAND: f64 = 3.0;
const MONITOR_SLOPE_MAX: f64 = 0.05;
const EPS0: f64 = 1e-2;
const REALITY_TOL: f64 = 1e-10;
const ROUNDTRIP_TOL: f64 = 1e-12;
const PARTITION_TOL: f64 = 1e-12;
const BESOV_L2_TOL: f64 = 1e-10;

/// Criteria allowed to report FAIL once their explanation is confirmed.
const KNOWN_LIMITS: [&str; 2] = ["3", "9b"];

struct Outcome {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
    /// For known limits: whether the measured failure matches its analysis.
    explained: Option<(bool, String)>,
}

fn outcome(id: &'static str, name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        id,
        name,
        pass,
        detail,
        explained: None,
    }
}

fn rel(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

/// Tracks the largest relative `Im n` seen in every run of the suite.
#[derive(Default)]
struct Reality {
    worst: f64,
    checks: usize,
}

impl Reality {
    fn see(&mut self, state: &State) {
        self.worst = self.worst.max(reality_defect(&state.w_plus()));
        self.checks += 1;
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let o = identities_pipeline(IDENTITY_SAMPLES, 7).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = o.null.max_residual <= NULL_IDENTITY_TOLERANCE
        && o.pseudo.max_residual <= PSEUDO_SCALING_TOL
        && secs < IDENTITY_SECONDS;
    outcome(
        "1",
        "identity suite",
        pass,
        format!(
            "null residual {:.2e} (<= {NULL_IDENTITY_TOLERANCE:.0e}), pseudo-scaling residual {:.2e} (<= {PSEUDO_SCALING_TOL:.0e}) with signs {:?}, next best pattern {:.1e}, {} samples in {secs:.2} s",
            o.null.max_residual, o.pseudo.max_residual, o.pseudo.sign_pattern, o.pseudo.runner_up_residual, IDENTITY_SAMPLES
        ),
    )
}

fn criterion_2() -> Outcome {
    let config = OracleConfig {
        dim: 2,
        n: 8,
        length: 4.0 * std::f64::consts::PI,
        amplitude: 0.3,
        sigma: 1.5,
        dt: 1e-2,
        t_end: 1.0,
        tolerance: ORACLE_TOL,
    };
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for gamma in [1.0, 0.5] {
        let o = oracle_pipeline(&config, gamma).unwrap();
        worst = worst.max(o.worst());
        parts.push(format!(
            "gamma {gamma}: G+ {:.2e}, F+ {:.2e}, F- {:.2e}",
            o.g_plus, o.f_plus, o.f_minus
        ));
    }
    outcome(
        "2",
        "oracle equivalence",
        worst <= ORACLE_TOL,
        format!("8^2 grid, t in [0, 1]; {} (<= {ORACLE_TOL:.0e})", parts.join("; ")),
    )
}

/// Largest relative mass and energy drift, sampled every 10 steps.
fn drifts(state: &State, dt: f64, t_end: f64, reality: &mut Reality) -> (f64, f64) {
    let integrator = Integrator::for_state(state, Coupling::Nonlinear);
    let (m0, e0) = (mass(state), energy(state).unwrap());
    let steps = (t_end / dt).round() as usize;
    let mut s = state.clone();
    let (mut dm, mut de) = (0.0f64, 0.0f64);
    for j in 1..=steps {
        s = integrator.step(&s, dt).unwrap();
        if j % 10 == 0 || j == steps {
            dm = dm.max(((mass(&s) - m0) / m0).abs());
            de = de.max(((energy(&s).unwrap() - e0) / e0).abs());
            reality.see(&s);
        }
    }
    (dm, de)
}

fn ratio_ok(r: f64) -> bool {
    (r - HALVING_RATIO).abs() <= HALVING_SPREAD * HALVING_RATIO
}

fn criterion_3(reality: &mut Reality) -> Outcome {
    let grid = Grid::new(3, 32, 32.0).unwrap();
    let params = choose_parameters(1.0, Some(0.01), EPS0).unwrap();
    let spec = DataSpec::gaussian(1.0, 2.0);
    let amplitude = calibrate_amplitude(&spec, grid, &params, 0.9).unwrap();
    let data = make_data(&spec.with_amplitude(amplitude), grid).unwrap();
    let state = State::from_data(&data.u0, &data.n0, &data.n1, 1.0).unwrap();
    let (m1, e1) = drifts(&state, 1e-2, 10.0, reality);
    let (m2, e2) = drifts(&state, 5e-3, 10.0, reality);
    let (rm, re) = (m1 / m2, e1 / e2);
    let pass = m1 <= MASS_DRIFT_TOL && e1 <= ENERGY_DRIFT_TOL && ratio_ok(rm) && ratio_ok(re);

    // Same setup far above the certified amplitude, where the time-stepping
    // error is no longer buried under roundoff.
    let big = make_data(&spec.with_amplitude(1e5 * amplitude), grid).unwrap();
    let big = State::from_data(&big.u0, &big.n0, &big.n1, 1.0).unwrap();
    let (bm1, be1) = drifts(&big, 1e-2, 2.0, reality);
    let (bm2, be2) = drifts(&big, 5e-3, 2.0, reality);
    let roundoff = 1e3 * f64::EPSILON;
    let explained = m1.max(e1).max(m2).max(e2) < roundoff && ratio_ok(bm1 / bm2) && ratio_ok(be1 / be2);
    Outcome {
        id: "3",
        name: "conservation",
        pass,
        detail: format!(
            "32^3, certified amplitude {amplitude:.3e}, 10 time units: mass drift {m1:.2e} (<= {MASS_DRIFT_TOL:.0e}), energy drift {e1:.2e} (<= {ENERGY_DRIFT_TOL:.0e}); halving dt: mass x{rm:.2}, energy x{re:.2} (want {HALVING_RATIO} +/- {:.0}%)",
            HALVING_SPREAD * 100.0
        ),
        explained: Some((
            explained,
            format!(
                "certified drifts all below {roundoff:.1e} (roundoff floor); at 1e5 x amplitude over 2 time units drifts {bm1:.2e}/{be1:.2e} shrink x{:.2} / x{:.2}",
                bm1 / bm2,
                be1 / be2
            ),
        )),
    }
}

fn criterion_4(reality: &mut Reality) -> Outcome {
    let grid = Grid::new(3, 16, 16.0).unwrap();
    let spec = DataSpec {
        family: Family::ModulatedGaussian { k0: [0.5, 0.0, 0.0] },
        amplitude: 1.0,
        sigma: 1.5,
        wave_sigma: None,
    };
    let data = make_data(&spec, grid).unwrap();
    let s0 = State::from_data(&data.u0, &data.n0, &data.n1, 1.0).unwrap();
    let integrator = Integrator::for_state(&s0, Coupling::Nonlinear);
    let solve = |dt: f64| {
        let mut s = s0.clone();
        for _ in 0..(1.0 / dt).round() as usize {
            s = integrator.step(&s, dt).unwrap();
        }
        s
    };
    let (a, b, c) = (solve(0.05), solve(0.025), solve(0.0125));
    for s in [&a, &b, &c] {
        reality.see(s);
    }
    let diff = |x: &State, y: &State| x.f_hat.sub(&y.f_hat).unwrap().l2_norm() + x.g_hat.sub(&y.g_hat).unwrap().l2_norm();
    let (e1, e2) = (diff(&a, &b), diff(&b, &c));
    let order = (e1 / e2).log2();
    outcome(
        "4",
        "integrator order",
        (order - ORDER).abs() <= ORDER_TOL,
        format!("16^3, t = 1, dt 0.05/0.025/0.0125: differences {e1:.2e}, {e2:.2e}, order {order:.3} (want {ORDER} +/- {ORDER_TOL})"),
    )
}

fn criterion_5() -> Outcome {
    let grid = Grid::new(3, 16, 16.0).unwrap();
    let spec = DataSpec {
        family: Family::RandomBandLimited { seed: 3 },
        amplitude: 0.5,
        sigma: 1.5,
        wave_sigma: None,
    };
    let data = make_data(&spec, grid).unwrap();
    let s0 = State::from_data(&data.u0, &data.n0, &data.n1, 1.0).unwrap();
    let settings = RunSettings {
        dt: 1e-2,
        t_end: 2.0,
        stride: 20,
        coupling: Coupling::LinearOnly,
        energy_tolerance: 1e-6,
    };
    let (f0, g0) = (s0.f_hat.l2_norm(), s0.g_hat.l2_norm());
    let mut profile_dev = 0.0f64;
    let mut norm_dev = 0.0f64;
    run(s0.clone(), &settings, |s| {
        let d = |a: &Field, b: &Field| a.sub(b).unwrap().l2_norm() / b.l2_norm();
        profile_dev = profile_dev.max(d(&s.f_hat, &s0.f_hat)).max(d(&s.g_hat, &s0.g_hat));
        for acc in [&s.f_plus, &s.f_minus, &s.g_acc] {
            profile_dev = profile_dev.max(acc.l2_norm());
        }
        let u = schrodinger_group(&s.f_hat, s.t);
        let w = wave_half_group(&s.g_hat, Sign::Plus, s.t);
        let wm = wave_half_group(&s.g_hat, Sign::Minus, s.t);
        norm_dev = norm_dev
            .max((u.l2_norm() / f0 - 1.0).abs())
            .max((u.in_physical().l2_norm() / f0 - 1.0).abs())
            .max((w.l2_norm() / g0 - 1.0).abs())
            .max((wm.in_physical().l2_norm() / g0 - 1.0).abs());
        Ok(())
    })
    .unwrap();
    outcome(
        "5",
        "linear exactness",
        profile_dev <= PROFILE_CONST_TOL && norm_dev <= PROPAGATOR_NORM_TOL,
        format!(
            "coupling off, t in [0, 2]: profile change {profile_dev:.2e} (<= {PROFILE_CONST_TOL:.0e}), propagator norm change {norm_dev:.2e} (<= {PROPAGATOR_NORM_TOL:.0e})"
        ),
    )
}

fn criterion_6() -> Outcome {
    let grid = Grid::new(3, 64, 64.0).unwrap();
    let spec = DataSpec {
        family: Family::Gaussian,
        amplitude: EPS0,
        sigma: 1.25,
        wave_sigma: Some(0.6),
    };
    let data = make_data(&spec, grid).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, rate, tol) in [
        (DispersiveKind::SchrodingerLinf, SUP_RATE, SCHRODINGER_SLOPE_TOL),
        (DispersiveKind::SchrodingerL6, L6_RATE, SCHRODINGER_SLOPE_TOL),
    ] {
        let t_wrap = kind.wraparound_time(&data.u0);
        let tolerances = DispersiveTolerances {
            slope_tolerance: tol,
            ..DispersiveTolerances::default_for(kind)
        };
        let r = dispersive_estimate_check(kind, &data.u0, (2.5, t_wrap), 16, tolerances).unwrap();
        pass &= r.passed() && (r.fit.slope + rate).abs() <= tol;
        parts.push(format!(
            "{} slope {:.3} (want -{rate} +/- {tol}) band {:.2} on [2.5, {t_wrap:.2}]",
            if kind == DispersiveKind::SchrodingerL6 { "L6" } else { "sup" },
            r.fit.slope,
            r.band
        ));
    }
    let w = reduce_to_first_order(&data.n0, &data.n1).unwrap();
    for sign in [Sign::Plus, Sign::Minus] {
        let kind = DispersiveKind::WaveBesov(sign);
        let tolerances = DispersiveTolerances {
            slope_tolerance: WAVE_SLOPE_TOL,
            ..DispersiveTolerances::default_for(kind)
        };
        let r = dispersive_estimate_check(kind, &w, (16.0, 28.0), 16, tolerances).unwrap();
        pass &= r.passed() && (r.fit.slope + WAVE_RATE).abs() <= WAVE_SLOPE_TOL;
        parts.push(format!(
            "wave{} slope {:.3} (want -{WAVE_RATE} +/- {WAVE_SLOPE_TOL}) band {:.2} on [16, 28]",
            if sign == Sign::Plus { "+" } else { "-" },
            r.fit.slope,
            r.band
        ));
    }
    outcome("6", "linear dispersive exponents", pass, format!("64^3, L = 64: {}", parts.join("; ")))
}

/// `(max/min, log-log slope)` of `series` over `window`.
fn band_and_slope(series: &[(f64, f64)], window: (f64, f64)) -> (f64, f64) {
    let inside: Vec<f64> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .map(|p| p.1)
        .collect();
    let max = inside.iter().copied().fold(0.0, f64::max);
    let min = inside.iter().copied().fold(f64::INFINITY, f64::min);
    (max / min, fit_decay(series, window).unwrap().slope)
}

fn criterion_7(reality: &mut Reality) -> Outcome {
    let grid = Grid::new(3, 64, 64.0).unwrap();
    let params = choose_parameters(1.0, Some(0.01), EPS0).unwrap();
    let spec = DataSpec::gaussian(1.0, 1.25);
    let amplitude = calibrate_amplitude(&spec, grid, &params, 0.9).unwrap();
    let data = make_data(&spec.with_amplitude(amplitude), grid).unwrap();
    let t_wrap = zkg_core::propagators::schrodinger_wraparound_time(&data.u0);
    let window = (2.5, 8.0_f64.min(t_wrap));
    let settings = RunSettings {
        dt: 1e-2,
        t_end: window.1,
        stride: 40,
        coupling: Coupling::Nonlinear,
        energy_tolerance: 1e-6,
    };
    let state = State::from_data(&data.u0, &data.n0, &data.n1, 1.0).unwrap();
    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let mut previous: Option<State> = None;
    run(state, &settings, |s| {
        records.push(xnorm_report(s, &params, previous.as_ref())?);
        reality.see(s);
        previous = Some(s.clone());
        Ok(())
    })
    .unwrap();

    let u_series: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.t, r.t.powf(1.0 + params.alpha) * r.sup_u))
        .collect();
    let n_series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.t * r.sup_n)).collect();
    let (u_band, u_slope) = band_and_slope(&u_series, window);
    let (n_band, n_slope) = band_and_slope(&n_series, window);
    let eps1 = params.eps1();
    let worst = records
        .iter()
        .flat_map(|r| r.xnorm_components.iter().chain(r.apriori_g.iter()).copied())
        .fold(0.0, f64::max);
    let pass = u_band <= MONITOR_BAND
        && n_band <= MONITOR_BAND
        && u_slope <= MONITOR_SLOPE_MAX
        && n_slope <= MONITOR_SLOPE_MAX
        && worst <= 2.0 * eps1;
    outcome(
        "7",
        "nonlinear bound monitors",
        pass,
        format!(
            "64^3, certified amplitude {amplitude:.3e}, window [{}, {:.2}]: t^(1+a)|u|_inf band {u_band:.2} slope {u_slope:+.3}; t|n|_inf band {n_band:.2} slope {n_slope:+.3} (band <= {MONITOR_BAND}, slope <= {MONITOR_SLOPE_MAX}); largest X/G monitor {worst:.3e} <= 2 eps1 = {:.3e}",
            window.0,
            window.1,
            2.0 * eps1
        ),
    )
}

fn criterion_8(reality: &Reality) -> Outcome {
    let grid = Grid::new(3, 16, 16.0).unwrap();
    let spec = DataSpec {
        family: Family::RandomBandLimited { seed: 11 },
        amplitude: 1.0,
        sigma: 1.5,
        wave_sigma: Some(1.0),
    };
    let data = make_data(&spec, grid).unwrap();
    let w = reduce_to_first_order(&data.n0, &data.n1).unwrap();
    let roundtrip = rel(&reconstruct_n(&w).in_physical(), &data.n0).max(rel(&reconstruct_nt(&w).in_physical(), &data.n1));
    outcome(
        "8",
        "reality and reduction",
        reality.worst <= REALITY_TOL && roundtrip <= ROUNDTRIP_TOL,
        format!(
            "largest relative Im n over {} states of every run above {:.2e} (<= {REALITY_TOL:.0e}); reduce/reconstruct {roundtrip:.2e} (<= {ROUNDTRIP_TOL:.0e})",
            reality.checks, reality.worst
        ),
    )
}

fn criterion_9() -> (Outcome, Outcome) {
    let mut residual = 0.0f64;
    for (dim, n, l) in [(1, 256, 100.0), (2, 64, 20.0), (3, 32, 32.0), (3, 64, 64.0)] {
        residual = residual.max(DyadicPartition::new(Grid::new(dim, n, l).unwrap()).partition_residual());
    }
    let a = outcome(
        "9a",
        "partition of unity",
        residual <= PARTITION_TOL,
        format!("largest |sum psi_k - 1| on the interior range {residual:.2e} (<= {PARTITION_TOL:.0e})"),
    );

    let grid = Grid::new(3, 32, 32.0).unwrap();
    let spec = DataSpec {
        family: Family::RandomBandLimited { seed: 5 },
        amplitude: 1.0,
        sigma: 2.0,
        wave_sigma: None,
    };
    let v = make_data(&spec, grid).unwrap().u0.remove_mean();
    let partition = DyadicPartition::new(grid);
    let besov = partition.besov_norm(&v, 0.0, 2.0, 2.0).unwrap();
    let l2 = v.l2_norm();
    let gap = (besov - l2).abs() / l2;

    // With 0 <= psi_k <= 1 and sum psi_k = 1, the shells give
    // sum_k ||P_k v||^2 = sum_xi (sum_k psi_k^2) |v_hat|^2, short of ||v||^2
    // wherever two shells overlap.
    let hat = v.in_frequency();
    let mut squares = vec![0.0; grid.size()];
    for k in partition.shells() {
        for (acc, p) in squares.iter_mut().zip(partition.shell_table(k).unwrap()) {
            *acc += p * p;
        }
    }
    let weight: f64 = hat.values().iter().map(Complex64::norm_sqr).sum();
    let kept: f64 = hat.values().iter().zip(&squares).map(|(z, s)| s * z.norm_sqr()).sum();
    let predicted = l2 * (kept / weight).sqrt();
    let deficit_match = (besov - predicted).abs() / l2;
    let min_square = squares
        .iter()
        .zip(hat.values())
        .filter(|(_, z)| z.norm() > 0.0)
        .map(|(s, _)| *s)
        .fold(1.0, f64::min);
    let b = Outcome {
        id: "9b",
        name: "Besov B^0_{2,2} vs L2",
        pass: gap <= BESOV_L2_TOL,
        detail: format!("random zero-mean field on 32^3: relative gap {gap:.3e} (want <= {BESOV_L2_TOL:.0e})"),
        explained: Some((
            deficit_match <= 1e-12 && min_square < 1.0,
            format!(
                "gap equals the shell-overlap deficit: measured vs predicted {deficit_match:.1e}; min sum psi_k^2 over the support {min_square:.3}"
            ),
        )),
    };
    (a, b)
}

fn small_run_config(out: &Path) -> RunConfig {
    RunConfig::from_str_with_overrides(
        "",
        &[
            "grid.n=16".into(),
            "grid.length=16".into(),
            "data.family=random".into(),
            "data.seed=42".into(),
            "data.sigma=1.5".into(),
            "data.amplitude=0.05".into(),
            "run.mode=linear-only".into(),
            "run.t_end=1".into(),
            "run.dt=0.02".into(),
            "run.diagnostics_stride=5".into(),
            "run.checkpoint_every=4".into(),
            format!("output.dir=\"{}\"", out.display()),
        ],
    )
    .unwrap()
}

fn nonlinear(mut c: RunConfig) -> RunConfig {
    // Coupling on, without the certification gate: data are set explicitly.
    c.run.mode = zkg_core::config::Mode::Nonlinear;
    c.params.eps0 = 1e6;
    c
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |name: &str| tmp.path().join(name);
    let config = nonlinear(small_run_config(&dir("a")));

    let a = run_pipeline(&config, &dir("a"), None, |_| {}).unwrap();
    let final_bytes = std::fs::read(dir("a").join(FINAL_CHECKPOINT)).unwrap();
    let reread = read_checkpoint(&dir("a").join(FINAL_CHECKPOINT)).unwrap();
    let roundtrip = encode(&reread) == final_bytes && reread == a.final_state;

    let b = run_pipeline(&config, &dir("b"), None, |_| {}).unwrap();
    let csv_a = std::fs::read(dir("a").join(TIMESERIES_FILE)).unwrap();
    let csv_b = std::fs::read(dir("b").join(TIMESERIES_FILE)).unwrap();
    let deterministic = csv_a == csv_b && b.final_state == a.final_state;

    let cp = dir("a").join(checkpoint_name(20));
    let mid = read_checkpoint(&cp).unwrap();
    let resumed = run_pipeline(&config, &dir("c"), Some(mid), |_| {}).unwrap();
    let resumed_bytes = std::fs::read(dir("c").join(FINAL_CHECKPOINT)).unwrap();
    let text_a = String::from_utf8(csv_a).unwrap();
    let text_c = std::fs::read_to_string(dir("c").join(TIMESERIES_FILE)).unwrap();
    let tail_a: Vec<&str> = text_a.lines().skip(1 + 5).collect();
    let tail_c: Vec<&str> = text_c.lines().skip(1).collect();
    let resume_ok = resumed_bytes == final_bytes && tail_a == tail_c && resumed.final_state == a.final_state;

    outcome(
        "10",
        "infrastructure",
        roundtrip && deterministic && resume_ok,
        format!(
            "checkpoint round trip {}, identical CSV bytes across runs {}, resume from step 20 bit-exact {} ({} resumed rows)",
            roundtrip,
            deterministic,
            resume_ok,
            tail_c.len()
        ),
    )
}

fn main() {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |id: &str| only.is_empty() || only.iter().any(|o| id.starts_with(o.as_str()));
    let mut reality = Reality::default();
    let mut outcomes = Vec::new();
    let mut timed = |f: &mut dyn FnMut() -> Vec<Outcome>| {
        let start = Instant::now();
        let mut o = f();
        for x in &mut o {
            x.detail.push_str(&format!(" [{:.1} s]", start.elapsed().as_secs_f64()));
        }
        outcomes.extend(o);
    };
    if wanted("1") {
        timed(&mut || vec![criterion_1()]);
    }
    if wanted("2") {
        timed(&mut || vec![criterion_2()]);
    }
    if wanted("3") {
        timed(&mut || vec![criterion_3(&mut reality)]);
    }
    if wanted("4") {
        timed(&mut || vec![criterion_4(&mut reality)]);
    }
    if wanted("5") {
        timed(&mut || vec![criterion_5()]);
    }
    if wanted("6") {
        timed(&mut || vec![criterion_6()]);
    }
    if wanted("7") {
        timed(&mut || vec![criterion_7(&mut reality)]);
    }
    if wanted("8") {
        let r = std::mem::take(&mut reality);
        timed(&mut || vec![criterion_8(&r)]);
    }
    if wanted("9") {
        timed(&mut || {
            let (a, b) = criterion_9();
            vec![a, b]
        });
    }
    if wanted("10") {
        timed(&mut || vec![criterion_10()]);
    }

    let mut unexpected = Vec::new();
    for o in &outcomes {
        println!("[{}] {} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
        if let Some((ok, why)) = &o.explained {
            if !o.pass {
                println!("       known limit, analysis {}: {why}", if *ok { "confirmed" } else { "NOT confirmed" });
            }
        }
        let tolerated = KNOWN_LIMITS.contains(&o.id) && o.explained.as_ref().is_some_and(|e| e.0);
        if !o.pass && !tolerated {
            unexpected.push(o.id);
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if !unexpected.is_empty() {
        println!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
