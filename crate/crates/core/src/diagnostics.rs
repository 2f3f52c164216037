//! Bootstrap norm monitors, conserved quantities, decay fits, scattering and
//! linear dispersive checks.
//!
//! Rate weights use `tau = max(t, 1)` so that the monitors stay finite near
//! `t = 0`.

use crate::besov::DyadicPartition;
use crate::error::{Error, Result};
use crate::evolution::{energy, mass, Params, State};
use crate::field::Field;
use crate::grid::Grid;
use crate::propagators::{schrodinger_group, schrodinger_wraparound_time, wave_half_group, Sign};
use crate::spectral::{lambda_pow, lp_norm, lp_norm_vector, multiply_by_weight, Exponent, WeightComponent};
use num_complex::Complex64;

/// One time slice of every monitored quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub sup_u: f64,
    pub sup_n: f64,
    /// `||f||_{H^{N_mon}}`.
    pub sob_f: f64,
    pub xf: f64,
    pub x2f: f64,
    /// `||g_+||_{H^{N_mon}}`.
    pub sob_g: f64,
    /// `||e^{-it Lambda} g_+||_{B^0_{inf,1}}`.
    pub besov_w: f64,
    /// The five weighted terms of the X-norm, see [`xnorm_report`].
    pub xnorm_components: [f64; 5],
    /// The three weighted G-monitors, see [`g_monitors`].
    pub apriori_g: [f64; 3],
    /// `||f(t) - f(t_prev)||_{L^2}`, zero for the first record.
    pub cauchy_f: f64,
}

impl DiagnosticsRecord {
    /// Flat column names, in declaration order.
    pub const COLUMNS: [&'static str; 19] = [
        "t",
        "mass",
        "energy",
        "sup_u",
        "sup_n",
        "sob_f",
        "xf",
        "x2f",
        "sob_g",
        "besov_w",
        "x_sob_f",
        "x_xf",
        "x_x2f",
        "x_sob_g",
        "x_besov_w",
        "g_x_lambda",
        "g_inv_lambda",
        "g_half_lambda_x",
        "cauchy_f",
    ];

    pub fn to_row(&self) -> Vec<f64> {
        let mut row = vec![
            self.t,
            self.mass,
            self.energy,
            self.sup_u,
            self.sup_n,
            self.sob_f,
            self.xf,
            self.x2f,
            self.sob_g,
            self.besov_w,
        ];
        row.extend_from_slice(&self.xnorm_components);
        row.extend_from_slice(&self.apriori_g);
        row.push(self.cauchy_f);
        row
    }

    pub fn from_row(row: &[f64]) -> Result<Self> {
        if row.len() != Self::COLUMNS.len() {
            return Err(Error::Timeseries(format!(
                "expected {} columns, found {}",
                Self::COLUMNS.len(),
                row.len()
            )));
        }
        Ok(DiagnosticsRecord {
            t: row[0],
            mass: row[1],
            energy: row[2],
            sup_u: row[3],
            sup_n: row[4],
            sob_f: row[5],
            xf: row[6],
            x2f: row[7],
            sob_g: row[8],
            besov_w: row[9],
            xnorm_components: [row[10], row[11], row[12], row[13], row[14]],
            apriori_g: [row[15], row[16], row[17]],
            cauchy_f: row[18],
        })
    }
}

fn tau(t: f64) -> f64 {
    t.max(1.0)
}

/// `(mass, energy)` of a state.
pub fn conserved_quantities(state: &State) -> Result<(f64, f64)> {
    Ok((mass(state), energy(state)?))
}

/// `x v` as its components, for a physical field.
fn position_times(v: &Field) -> Result<Vec<Field>> {
    (0..v.grid().dim())
        .map(|a| multiply_by_weight(v, 1, WeightComponent::Axis(a)))
        .collect()
}

/// The three G-monitors for an accumulator `G_hat` at time `t`:
///
/// - `tau^{1/4 - 3 gamma/4 + 2 alpha + 3 delta} ||e^{-it Lambda} x Lambda G||_{L^{4/(1+gamma)}}`
/// - `tau^{2 alpha + 3 delta} ||e^{-it Lambda} Lambda^{-1} G||_{L^3}`
/// - `||Lambda^{1/2} x G||_{L^2}`
pub fn g_monitors(g_acc: &Field, t: f64, params: &Params) -> Result<[f64; 3]> {
    let (gamma, alpha, delta) = (params.gamma, params.alpha, params.delta);
    let s = tau(t);

    let lam_g = lambda_pow(g_acc, 1.0)?.into_physical()?;
    let x_lam_g = position_times(&lam_g)?
        .iter()
        .map(|c| wave_half_group(c, Sign::Plus, t).into_physical())
        .collect::<Result<Vec<_>>>()?;
    let first = s.powf(0.25 - 0.75 * gamma + 2.0 * alpha + 3.0 * delta) * lp_norm_vector(&x_lam_g, 4.0 / (1.0 + gamma))?;

    let inv = wave_half_group(&lambda_pow(&g_acc.remove_mean(), -1.0)?, Sign::Plus, t).into_physical()?;
    let second = s.powf(2.0 * alpha + 3.0 * delta) * lp_norm(&inv, 3.0)?;

    let x_g = position_times(&g_acc.in_physical())?
        .iter()
        .map(|c| lambda_pow(c, 0.5))
        .collect::<Result<Vec<_>>>()?;
    let third = x_g.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt();
    Ok([first, second, third])
}

/// Evaluates every monitor for `state`. The X-norm components are
///
/// `[tau^{-delta} ||f||_{H^{N_mon+1}}, tau^{-delta} ||x f||_{L^2},
///   tau^{-1+2 alpha+delta} || |x|^2 f ||_{L^2}, ||g_+||_{H^{N_mon}},
///   tau ||e^{-it Lambda} g_+||_{B^0_{inf,1}}]`.
pub fn xnorm_report(state: &State, params: &Params, previous: Option<&State>) -> Result<DiagnosticsRecord> {
    let t = state.t;
    let s = tau(t);
    let n_mon = params.n_mon as f64;
    let f = state.f_hat.in_physical();
    let w = state.w_plus();
    let n = crate::evolution::reconstruct_n(&w);

    let sob_f = state.f_hat.sobolev_norm(n_mon);
    let sob_f1 = state.f_hat.sobolev_norm(n_mon + 1.0);
    let xf = multiply_by_weight(&f, 1, WeightComponent::Radial)?.l2_norm();
    let x2f = multiply_by_weight(&f, 2, WeightComponent::Radial)?.l2_norm();
    let sob_g = state.g_hat.sobolev_norm(n_mon);
    let besov_w = DyadicPartition::new(*state.grid()).besov_norm(&w.remove_mean(), 0.0, Exponent::Infinity, 1.0)?;
    let (mass, energy) = conserved_quantities(state)?;
    let cauchy_f = match previous {
        Some(p) => state.f_hat.sub(&p.f_hat.in_frequency())?.l2_norm(),
        None => 0.0,
    };
    Ok(DiagnosticsRecord {
        t,
        mass,
        energy,
        sup_u: lp_norm(&state.u(), Exponent::Infinity)?,
        sup_n: lp_norm(&n, Exponent::Infinity)?,
        sob_f,
        xf,
        x2f,
        sob_g,
        besov_w,
        xnorm_components: [
            s.powf(-params.delta) * sob_f1,
            s.powf(-params.delta) * xf,
            s.powf(-1.0 + 2.0 * params.alpha + params.delta) * x2f,
            sob_g,
            s * besov_w,
        ],
        apriori_g: g_monitors(&state.g_acc, t, params)?,
        cauchy_f,
    })
}

/// Least-squares fit of `log value` against `log t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub samples: usize,
}

/// Minimum number of samples [`fit_decay`] accepts.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Fits `value ~ C t^slope` over samples with `t0 <= t <= t1`.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (t0, t1) = window;
    let points: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= t0 && t <= t1).collect();
    if points.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "window [{t0}, {t1}] holds {} samples, need at least {MIN_FIT_SAMPLES}",
            points.len()
        )));
    }
    if let Some(&(t, v)) = points.iter().find(|&&(t, v)| !(t > 0.0 && v > 0.0)) {
        return Err(Error::Fit(format!("non-positive sample ({t}, {v}) in window")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all samples share one time".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(DecayFit {
        slope,
        stderr: (ssr / (k - 2.0) / sxx).sqrt(),
        intercept,
        samples: logs.len(),
    })
}

/// Profile increments between consecutive snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringReport {
    pub times: Vec<f64>,
    pub f_increments: Vec<f64>,
    pub g_increments: Vec<f64>,
    /// Increments never grow over the last five snapshots.
    pub cauchy_consistent: bool,
}

pub fn scattering_monitor(snapshots: &[State]) -> Result<ScatteringReport> {
    let mut report = ScatteringReport {
        times: Vec::new(),
        f_increments: Vec::new(),
        g_increments: Vec::new(),
        cauchy_consistent: false,
    };
    for pair in snapshots.windows(2) {
        report.times.push(pair[1].t);
        report.f_increments.push(pair[1].f_hat.sub(&pair[0].f_hat)?.l2_norm());
        report.g_increments.push(pair[1].g_hat.sub(&pair[0].g_hat)?.l2_norm());
    }
    if snapshots.len() >= 3 {
        let start = report.f_increments.len().saturating_sub(4);
        let non_increasing = |v: &[f64]| v[start..].windows(2).all(|w| w[1] <= w[0]);
        report.cauchy_consistent = non_increasing(&report.f_increments) && non_increasing(&report.g_increments);
    }
    Ok(report)
}

/// Which linear estimate to measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersiveKind {
    /// `||e^{it Delta} f||_{L^6} t / ||x f||_{L^2}`.
    SchrodingerL6,
    /// `||e^{it Delta} f||_{L^inf} t^{3/2} / (||x f||^{1/2} ||x^2 f||^{1/2})`.
    SchrodingerLinf,
    /// `||e^{-/+ it Lambda} h||_{B^0_{inf,1}} t / ||h||_{B^2_{1,1}}`.
    WaveBesov(Sign),
}

impl DispersiveKind {
    pub fn rate(self) -> f64 {
        match self {
            DispersiveKind::SchrodingerL6 | DispersiveKind::WaveBesov(_) => 1.0,
            DispersiveKind::SchrodingerLinf => 1.5,
        }
    }

    /// Wraparound time for this group acting on `data`.
    pub fn wraparound_time(self, data: &Field) -> f64 {
        match self {
            DispersiveKind::WaveBesov(_) => data.grid().wave_wraparound_time(),
            _ => schrodinger_wraparound_time(data),
        }
    }
}

/// Band and slope tolerances for [`dispersive_estimate_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveTolerances {
    pub max_band: f64,
    pub slope_tolerance: f64,
}

impl DispersiveTolerances {
    pub fn default_for(kind: DispersiveKind) -> Self {
        DispersiveTolerances {
            max_band: 2.0,
            slope_tolerance: match kind {
                DispersiveKind::WaveBesov(_) => 0.15,
                _ => 0.1,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveReport {
    pub kind: DispersiveKind,
    pub t_wrap: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Left side times `t^rate` over the right-side data norms.
    pub ratios: Vec<f64>,
    /// `max / median` of the ratios.
    pub band: f64,
    pub fit: DecayFit,
    pub band_ok: bool,
    pub slope_ok: bool,
}

impl DispersiveReport {
    pub fn passed(&self) -> bool {
        self.band_ok && self.slope_ok
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// Samples the linear flow of `data` at `samples` evenly spaced times in
/// `window`, which must end before the wraparound time.
pub fn dispersive_estimate_check(
    kind: DispersiveKind,
    data: &Field,
    window: (f64, f64),
    samples: usize,
    tolerances: DispersiveTolerances,
) -> Result<DispersiveReport> {
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 > t0) || samples < 2 {
        return Err(Error::Fit(format!("empty window [{t0}, {t1}] with {samples} samples")));
    }
    let t_wrap = kind.wraparound_time(data);
    if t1 > t_wrap {
        return Err(Error::BeyondWraparound { t1, t_wrap });
    }
    let hat = data.in_frequency();
    let grid: Grid = *hat.grid();
    let times: Vec<f64> = (0..samples)
        .map(|j| t0 + (t1 - t0) * j as f64 / (samples - 1) as f64)
        .collect();
    let (values, rhs): (Vec<f64>, f64) = match kind {
        DispersiveKind::SchrodingerL6 | DispersiveKind::SchrodingerLinf => {
            let f = hat.in_physical();
            let xf = multiply_by_weight(&f, 1, WeightComponent::Radial)?.l2_norm();
            let x2f = multiply_by_weight(&f, 2, WeightComponent::Radial)?.l2_norm();
            let (p, rhs) = if kind == DispersiveKind::SchrodingerL6 {
                (Exponent::Finite(6.0), xf)
            } else {
                (Exponent::Infinity, (xf * x2f).sqrt())
            };
            let values = times
                .iter()
                .map(|&t| lp_norm(&schrodinger_group(&hat, t).into_physical()?, p))
                .collect::<Result<Vec<_>>>()?;
            (values, rhs)
        }
        DispersiveKind::WaveBesov(sign) => {
            let partition = DyadicPartition::new(grid);
            let h = hat.remove_mean();
            let rhs = partition.besov_norm(&h, 2.0, 1.0, 1.0)?;
            let values = times
                .iter()
                .map(|&t| partition.besov_norm(&wave_half_group(&h, sign, t), 0.0, Exponent::Infinity, 1.0))
                .collect::<Result<Vec<_>>>()?;
            (values, rhs)
        }
    };
    let ratios: Vec<f64> = times
        .iter()
        .zip(&values)
        .map(|(&t, &v)| if rhs > 0.0 { v * t.powf(kind.rate()) / rhs } else { 0.0 })
        .collect();
    let med = median(&ratios);
    let band = if med > 0.0 {
        ratios.iter().copied().fold(0.0, f64::max) / med
    } else {
        f64::INFINITY
    };
    let series: Vec<(f64, f64)> = times.iter().copied().zip(values.iter().copied()).collect();
    let fit = fit_decay(&series, (t0, t1))?;
    Ok(DispersiveReport {
        kind,
        t_wrap,
        band_ok: band <= tolerances.max_band,
        slope_ok: (fit.slope + kind.rate()).abs() <= tolerances.slope_tolerance,
        times,
        values,
        ratios,
        band,
        fit,
    })
}

/// `i (g_+(t) - g_+(0))`, which the `G_+` accumulator tracks.
pub fn accumulator_from_increment(g_now: &Field, g_initial: &Field) -> Result<Field> {
    Ok(g_now.sub(g_initial)?.scaled(Complex64::new(0.0, 1.0)))
}
