//! Time integration of the first-order system in profile variables.
//!
//! With `w_+ = n + i Lambda^{-1} n_t` (and `w_- = -conj(w_+)`), the system
//! becomes
//!
//! ```text
//! i u_t + Delta u = (w_+ u - w_- u) / 2,      i d_t w_+ - Lambda w_+ = Lambda^gamma |u|^2.
//! ```
//!
//! In terms of the profiles `f = e^{-it Delta} u`, `g_+ = e^{it Lambda} w_+`:
//!
//! ```text
//! d_t f_hat = -i (dF_+ - dF_-),   dF_pm = 1/2 e^{it|k|^2} F[u w_pm],
//! d_t g_hat = -i dG_+,            dG_+  = e^{it|k|} |k|^gamma F[|u|^2].
//! ```
//!
//! The accumulators `F_pm`, `G_+` integrate `dF_pm`, `dG_+` with the same
//! Runge–Kutta weights as the profiles, so `f - f(0) = -i (F_+ - F_-)` and
//! `G_+ = i (g_+ - g_+(0))` hold to roundoff rather than to truncation error.

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{Field, Space};
use crate::grid::Grid;
use crate::propagators::{physical_of, wave_physical_of, Sign};
use crate::spectral::{lambda_pow, lambda_table, lp_norm, Exponent};
use num_complex::Complex64;
use rayon::prelude::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Model and bootstrap parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    /// Sobolev index required by the proof; reported, never computed with.
    pub n_proof: u32,
    /// Sobolev index actually monitored.
    pub n_mon: u32,
    pub eps0: f64,
}

impl Params {
    /// Checks `5/N <= delta`, `3 delta < alpha <= gamma/2 - 10 delta` and
    /// `alpha <= 1/6 - 10 delta`.
    pub fn validate(&self) -> Result<()> {
        const SLACK: f64 = 1e-15;
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(self.delta > 0.0) || !(self.eps0 > 0.0) {
            return bad("delta and eps0 must be positive".into());
        }
        if 5.0 / self.n_proof as f64 > self.delta + SLACK {
            return bad(format!("5/N = {} exceeds delta = {}", 5.0 / self.n_proof as f64, self.delta));
        }
        if 3.0 * self.delta >= self.alpha {
            return bad(format!("need 3 delta < alpha, got delta = {}, alpha = {}", self.delta, self.alpha));
        }
        let cap = (0.5 * self.gamma).min(1.0 / 6.0) - 10.0 * self.delta;
        if self.alpha > cap + SLACK {
            return bad(format!("alpha = {} exceeds min(gamma/2, 1/6) - 10 delta = {cap}", self.alpha));
        }
        Ok(())
    }

    /// `eps1 = eps0^{2/3}`.
    pub fn eps1(&self) -> f64 {
        self.eps0.powf(2.0 / 3.0)
    }
}

/// Whether the bilinear terms are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    #[default]
    Nonlinear,
    /// Test hook: all Duhamel terms vanish and the flow is the free one.
    LinearOnly,
}

/// Solution at time `t` in profile form, with the Duhamel accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub gamma: f64,
    pub t: f64,
    pub step_count: u64,
    pub f_hat: Field,
    pub g_hat: Field,
    pub f_plus: Field,
    pub f_minus: Field,
    pub g_acc: Field,
}

impl State {
    /// State at `t = 0` for data `(u0, n0, n1)`.
    pub fn from_data(u0: &Field, n0: &Field, n1: &Field, gamma: f64) -> Result<State> {
        u0.expect_same_grid(n0)?;
        u0.expect_same_grid(n1)?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParams(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        let w = reduce_to_first_order(n0, n1)?;
        let zero = Field::zeros(*u0.grid(), Space::Frequency);
        Ok(State {
            gamma,
            t: 0.0,
            step_count: 0,
            f_hat: u0.in_frequency(),
            g_hat: w,
            f_plus: zero.clone(),
            f_minus: zero.clone(),
            g_acc: zero,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.f_hat.grid()
    }

    /// Physical `u(t)`.
    pub fn u(&self) -> Field {
        physical_of(&self.f_hat, self.t).in_physical()
    }

    /// `w_+(t)` in frequency space.
    pub fn w_plus(&self) -> Field {
        wave_physical_of(&self.g_hat, Sign::Plus, self.t)
    }

    /// Physical `n(t)`.
    pub fn n(&self) -> Field {
        reconstruct_n(&self.w_plus())
    }

    /// Physical `d_t n(t)`.
    pub fn nt(&self) -> Field {
        reconstruct_nt(&self.w_plus())
    }

    pub fn is_finite(&self) -> bool {
        self.f_hat.is_finite() && self.g_hat.is_finite()
    }
}

/// `w_+ = n0 + i Lambda^{-1} n1`.
pub fn reduce_to_first_order(n0: &Field, n1: &Field) -> Result<Field> {
    n0.expect_same_grid(n1)?;
    n1.expect_zero_mean()?;
    for (name, v) in [("n0", n0), ("n1", n1)] {
        if v.relative_imaginary() > 1e-12 {
            return Err(Error::InvalidData(format!("{name} must be real")));
        }
    }
    let inv = lambda_pow(&n1.real_part(), -1.0)?;
    n0.real_part().in_frequency().axpy(I, &inv)
}

/// `n = Re w_+`, physical.
pub fn reconstruct_n(w_plus: &Field) -> Field {
    w_plus.real_part()
}

/// `d_t n = Lambda Im w_+`, physical.
pub fn reconstruct_nt(w_plus: &Field) -> Field {
    lambda_pow(&w_plus.imag_part(), 1.0)
        .expect("positive power")
        .into_physical()
        .expect("frequency field")
        .real_part()
}

/// Mass `||u||_{L^2}^2`.
pub fn mass(state: &State) -> f64 {
    state.f_hat.l2_norm().powi(2)
}

/// Conserved energy
/// `H = int |grad u|^2 + n |u|^2 + 1/2 (Lambda^{-(1+gamma)/2} n_t)^2 + 1/2 (Lambda^{(1-gamma)/2} n)^2`.
///
/// `H` has no sign-definite part besides the quadratic ones; `dH/dt = 0` follows
/// from `Lambda^{-(1+gamma)} Delta = -Lambda^{1-gamma}`. Since
/// `Lambda^{(1-gamma)/2} w_+` has real and imaginary parts equal to the two
/// wave terms, the wave energy is `1/2 ||Lambda^{(1-gamma)/2} g_+||^2`.
pub fn energy(state: &State) -> Result<f64> {
    let w = state.w_plus();
    reconstruct_nt(&w).expect_zero_mean()?;
    let grad = lambda_pow(&state.f_hat, 1.0)?.l2_norm().powi(2);
    let u = state.u();
    let n = reconstruct_n(&w);
    let cell = state.grid().cell_volume();
    let coupling = fft::deterministic_sum(u.values().len(), |i| n.values()[i].re * u.values()[i].norm_sqr()) * cell;
    let wave = 0.5 * lambda_pow(&state.g_hat, 0.5 * (1.0 - state.gamma))?.l2_norm().powi(2);
    Ok(grad + coupling + wave)
}

/// Time derivatives of the three accumulators.
struct Rates {
    f_plus: Vec<Complex64>,
    f_minus: Vec<Complex64>,
    g: Vec<Complex64>,
}

/// Integrating-factor RK4 stepper with cached lattice tables.
#[derive(Debug, Clone)]
pub struct Integrator {
    grid: Grid,
    gamma: f64,
    coupling: Coupling,
    k2: Vec<f64>,
    kabs: Vec<f64>,
    kgamma: Vec<f64>,
    mask: Vec<bool>,
}

impl Integrator {
    pub fn new(grid: Grid, gamma: f64, coupling: Coupling) -> Self {
        let kabs = grid.k_abs_table();
        Integrator {
            grid,
            gamma,
            coupling,
            k2: grid.k_squared_table(),
            kgamma: lambda_table(kabs.clone(), gamma),
            kabs,
            mask: grid.dealias_mask(),
        }
    }

    pub fn for_state(state: &State, coupling: Coupling) -> Self {
        Self::new(*state.grid(), state.gamma, coupling)
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    fn check(&self, state: &State) -> Result<()> {
        if *state.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if state.gamma != self.gamma {
            return Err(Error::InvalidParams(format!(
                "integrator built for gamma = {}, state has {}",
                self.gamma, state.gamma
            )));
        }
        Ok(())
    }

    fn rates(&self, t: f64, f: &[Complex64], g: &[Complex64]) -> Rates {
        let (n, dim) = (self.grid.n(), self.grid.dim());
        let schr: Vec<Complex64> = self.k2.par_iter().map(|&k| Complex64::from_polar(1.0, t * k)).collect();
        let wave: Vec<Complex64> = self.kabs.par_iter().map(|&k| Complex64::from_polar(1.0, t * k)).collect();
        let masked = |i: usize, v: Complex64| if self.mask[i] { v } else { Complex64::default() };

        let mut u: Vec<Complex64> = (0..f.len())
            .into_par_iter()
            .map(|i| masked(i, f[i] * schr[i].conj()))
            .collect();
        let mut w: Vec<Complex64> = (0..g.len())
            .into_par_iter()
            .map(|i| masked(i, g[i] * wave[i].conj()))
            .collect();
        fft::inverse(&mut u, n, dim);
        fft::inverse(&mut w, n, dim);

        let mut p_plus: Vec<Complex64> = u.par_iter().zip(&w).map(|(a, b)| a * b).collect();
        let mut p_minus: Vec<Complex64> = u.par_iter().zip(&w).map(|(a, b)| -a * b.conj()).collect();
        let mut q: Vec<Complex64> = u.par_iter().map(|a| Complex64::new(a.norm_sqr(), 0.0)).collect();
        fft::forward(&mut p_plus, n, dim);
        fft::forward(&mut p_minus, n, dim);
        fft::forward(&mut q, n, dim);

        p_plus
            .par_iter_mut()
            .zip(&mut p_minus)
            .enumerate()
            .for_each(|(i, (a, b))| {
                let s = masked(i, 0.5 * schr[i]);
                *a *= s;
                *b *= s;
            });
        q.par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v *= masked(i, wave[i] * self.kgamma[i]));
        Rates {
            f_plus: p_plus,
            f_minus: p_minus,
            g: q,
        }
    }

    /// `(d_t f_hat, d_t g_hat)` at the state's time.
    pub fn rhs(&self, state: &State) -> Result<(Field, Field)> {
        self.check(state)?;
        let size = self.grid.size();
        let (df, dg) = match self.coupling {
            Coupling::LinearOnly => (vec![Complex64::default(); size], vec![Complex64::default(); size]),
            Coupling::Nonlinear => {
                let r = self.rates(state.t, state.f_hat.values(), state.g_hat.values());
                let df = (0..size).map(|i| -I * (r.f_plus[i] - r.f_minus[i])).collect();
                let dg = r.g.iter().map(|v| -I * v).collect();
                (df, dg)
            }
        };
        Ok((
            Field::from_values(self.grid, Space::Frequency, df)?,
            Field::from_values(self.grid, Space::Frequency, dg)?,
        ))
    }

    /// One classical RK4 step of the profile equations.
    pub fn step(&self, state: &State, dt: f64) -> Result<State> {
        self.check(state)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParams(format!("time step must be positive, got {dt}")));
        }
        let mut next = state.clone();
        next.t = state.t + dt;
        next.step_count = state.step_count + 1;
        if self.coupling == Coupling::LinearOnly {
            return Ok(next);
        }

        let f0 = state.f_hat.values();
        let g0 = state.g_hat.values();
        let size = f0.len();
        let shifted = |r: &Rates, c: f64| -> (Vec<Complex64>, Vec<Complex64>) {
            let f = (0..size)
                .into_par_iter()
                .map(|i| f0[i] - I * c * (r.f_plus[i] - r.f_minus[i]))
                .collect();
            let g = (0..size).into_par_iter().map(|i| g0[i] - I * c * r.g[i]).collect();
            (f, g)
        };

        let t = state.t;
        let k1 = self.rates(t, f0, g0);
        let (f, g) = shifted(&k1, 0.5 * dt);
        let k2 = self.rates(t + 0.5 * dt, &f, &g);
        let (f, g) = shifted(&k2, 0.5 * dt);
        let k3 = self.rates(t + 0.5 * dt, &f, &g);
        let (f, g) = shifted(&k3, dt);
        let k4 = self.rates(t + dt, &f, &g);

        let w = dt / 6.0;
        let combine = |a: &[Complex64], b: &[Complex64], c: &[Complex64], d: &[Complex64]| -> Vec<Complex64> {
            (0..size)
                .into_par_iter()
                .map(|i| w * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                .collect()
        };
        let dfp = combine(&k1.f_plus, &k2.f_plus, &k3.f_plus, &k4.f_plus);
        let dfm = combine(&k1.f_minus, &k2.f_minus, &k3.f_minus, &k4.f_minus);
        let dg = combine(&k1.g, &k2.g, &k3.g, &k4.g);

        next.f_hat
            .values_mut()
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v -= I * (dfp[i] - dfm[i]));
        next.g_hat
            .values_mut()
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v -= I * dg[i]);
        for (acc, inc) in [(&mut next.f_plus, &dfp), (&mut next.f_minus, &dfm), (&mut next.g_acc, &dg)] {
            acc.values_mut()
                .par_iter_mut()
                .zip(inc.par_iter())
                .for_each(|(a, b)| *a += b);
        }
        if !next.is_finite() {
            return Err(Error::BlowUp { t: next.t });
        }
        Ok(next)
    }
}

/// `(d_t f_hat, d_t g_hat)` for the coupled system at the state's time.
pub fn rhs_profiles(state: &State) -> Result<(Field, Field)> {
    Integrator::for_state(state, Coupling::Nonlinear).rhs(state)
}

/// One integrating-factor RK4 step with the full nonlinearity.
pub fn step_ifrk4(state: &State, dt: f64) -> Result<State> {
    Integrator::for_state(state, Coupling::Nonlinear).step(state, dt)
}

/// Settings for [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between observations.
    pub stride: u64,
    pub coupling: Coupling,
    /// Relative energy drift that triggers one halving of `dt`.
    pub energy_tolerance: f64,
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.stride == 0 {
            return Err(Error::Config("diagnostics stride must be at least 1".into()));
        }
        if !(self.energy_tolerance > 0.0) {
            return Err(Error::Config("energy tolerance must be positive".into()));
        }
        Ok(())
    }
}

fn relative_drift(h: f64, h0: f64) -> f64 {
    if h0 == 0.0 {
        (h - h0).abs()
    } else {
        ((h - h0) / h0).abs()
    }
}

/// Integrates from `state` to `settings.t_end`, calling `observe` on the start
/// state and after every `stride` steps (and at the final time).
///
/// After each observation interval the energy drift relative to the starting
/// state is checked; on the first violation the interval is redone with half
/// the step (kept for the rest of the run), and a second violation is an error.
pub fn run<F>(state: State, settings: &RunSettings, mut observe: F) -> Result<State>
where
    F: FnMut(&State) -> Result<()>,
{
    settings.validate()?;
    let integrator = Integrator::for_state(&state, settings.coupling);
    let guard = settings.coupling == Coupling::Nonlinear;
    let h0 = if guard { energy(&state)? } else { 0.0 };
    let total = ((settings.t_end - state.t) / settings.dt).round().max(0.0) as u64;

    observe(&state)?;
    let mut state = state;
    let mut refine = 1u64;
    let mut done = 0u64;
    while done < total {
        let chunk = settings.stride.min(total - done);
        let start = state.clone();
        loop {
            let dt = settings.dt / refine as f64;
            let mut trial = start.clone();
            for _ in 0..chunk * refine {
                trial = integrator.step(&trial, dt)?;
            }
            if guard {
                let drift = relative_drift(energy(&trial)?, h0);
                if drift > settings.energy_tolerance {
                    if refine == 1 {
                        refine = 2;
                        continue;
                    }
                    return Err(Error::EnergyDrift {
                        drift,
                        tolerance: settings.energy_tolerance,
                        t: trial.t,
                    });
                }
            }
            state = trial;
            break;
        }
        done += chunk;
        observe(&state)?;
    }
    Ok(state)
}

/// Largest `|Im n| / max |n|` with `n = (w_+ - w_-)/2` assembled in frequency
/// space from `w_-(k) = -conj(w_+(-k))`, so only transform roundoff remains.
pub fn reality_defect(w_plus: &Field) -> f64 {
    let hat = w_plus.in_frequency();
    let grid = *hat.grid();
    let v = hat.values();
    let n_hat: Vec<Complex64> = (0..v.len())
        .into_par_iter()
        .map(|i| 0.5 * (v[i] + v[grid.negated(i)].conj()))
        .collect();
    let n = Field::from_values(grid, Space::Frequency, n_hat)
        .expect("same size")
        .into_physical()
        .expect("frequency field");
    n.relative_imaginary()
}

/// `||u||_inf` of the physical state.
pub fn sup_u(state: &State) -> f64 {
    lp_norm(&state.u(), Exponent::Infinity).expect("physical field")
}
