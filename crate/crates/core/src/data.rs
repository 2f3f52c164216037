//! Initial data families, parameter selection and data certification.

use crate::besov::DyadicPartition;
use crate::error::{Error, Result};
use crate::evolution::Params;
use crate::field::{Field, Space};
use crate::grid::Grid;
use crate::spectral::{apply_table, lambda_pow, multiply_by_japanese_bracket_squared};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Sobolev index used by the monitors in place of the proof's `N`.
pub const DEFAULT_N_MON: u32 = 8;
/// First `delta` tried when it is chosen automatically.
pub const AUTO_DELTA_START: f64 = 0.01;

/// Admissible parameters for `gamma`.
///
/// `alpha = min(gamma/2, 1/6) - 10 delta` is the largest value allowed; it must
/// exceed `3 delta`, so `delta < min(gamma/2, 1/6) / 13`. With `delta = None`
/// the search starts at [`AUTO_DELTA_START`] and halves until admissible.
pub fn choose_parameters(gamma: f64, delta: Option<f64>, eps0: f64) -> Result<Params> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParams(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::InvalidParams(format!("eps0 must be positive, got {eps0}")));
    }
    let cap = (0.5 * gamma).min(1.0 / 6.0);
    let max_delta = cap / 13.0;
    let admissible = |d: f64| 3.0 * d < cap - 10.0 * d;
    let delta = match delta {
        Some(d) if !(d > 0.0 && d.is_finite()) => {
            return Err(Error::InvalidParams(format!("delta must be positive, got {d}")))
        }
        Some(d) if !admissible(d) => return Err(Error::DeltaTooLarge { delta: d, max_delta }),
        Some(d) => d,
        None => {
            let mut d = AUTO_DELTA_START;
            while !admissible(d) {
                d *= 0.5;
            }
            d
        }
    };
    let params = Params {
        gamma,
        delta,
        alpha: cap - 10.0 * delta,
        n_proof: (5.0 / delta - 1e-9).ceil() as u32,
        n_mon: DEFAULT_N_MON,
        eps0,
    };
    params.validate()?;
    Ok(params)
}

/// Shape of the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `u0 = eps G`, `n0 = eps (G - mean)`, `n1 = 0` with centred Gaussians `G`.
    Gaussian,
    /// As [`Family::Gaussian`] with `u0` modulated by `e^{i k0 . x}`.
    ModulatedGaussian { k0: [f64; 3] },
    /// Gaussian envelopes times random superpositions of low modes
    /// (`|k| sigma <= 2`); `n1` is nonzero.
    RandomBandLimited { seed: u64 },
}

/// Initial data description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub family: Family,
    pub amplitude: f64,
    /// Width of the Schrodinger data.
    pub sigma: f64,
    /// Width of the wave data; defaults to `sigma`.
    pub wave_sigma: Option<f64>,
}

impl DataSpec {
    pub fn gaussian(amplitude: f64, sigma: f64) -> Self {
        DataSpec {
            family: Family::Gaussian,
            amplitude,
            sigma,
            wave_sigma: None,
        }
    }

    pub fn wave_width(&self) -> f64 {
        self.wave_sigma.unwrap_or(self.sigma)
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        DataSpec { amplitude, ..self }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidData(format!("amplitude must be non-negative, got {}", self.amplitude)));
        }
        for (name, s) in [("sigma", self.sigma), ("wave_sigma", self.wave_width())] {
            if !(s > 0.0) {
                return Err(Error::InvalidData(format!("{name} must be positive, got {s}")));
            }
            if s > grid.length() / 8.0 {
                return Err(Error::InvalidData(format!(
                    "{name} = {s} exceeds L/8 = {}; the data would not be localized in the box",
                    grid.length() / 8.0
                )));
            }
        }
        Ok(())
    }
}

/// Initial data `(u0, n0, n1)`, physical.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Field,
    pub n0: Field,
    pub n1: Field,
}

fn gaussian(grid: Grid, sigma: f64) -> Field {
    Field::from_real_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * sigma * sigma)).exp())
}

fn dealiased(v: &Field) -> Field {
    let mask = v.grid().dealias_mask();
    let table: Vec<f64> = mask.into_iter().map(|k| if k { 1.0 } else { 0.0 }).collect();
    apply_table(v, &table).into_physical().expect("frequency field")
}

fn real_zero_mean(v: &Field) -> Field {
    dealiased(&v.real_part().remove_mean().into_physical().expect("frequency field")).real_part()
}

/// Random trigonometric polynomial over modes with `|k| sigma <= 2`, normalized
/// so its coefficients have unit total variance.
fn random_carrier(grid: Grid, sigma: f64, rng: &mut ChaCha8Rng) -> Field {
    let cutoff = 2.0 / sigma;
    let mut modes = Vec::new();
    for flat in 0..grid.size() {
        let k = grid.wavevector(flat);
        if (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt() <= cutoff {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            modes.push((k, Complex64::new(re, im)));
        }
    }
    let scale = 1.0 / (2.0 * modes.len() as f64).sqrt();
    Field::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(k, c)| c * Complex64::from_polar(scale, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]))
            .sum()
    })
}

/// Builds centred, dealiased data; `n0`, `n1` are real with exactly zero mean.
pub fn make_data(spec: &DataSpec, grid: Grid) -> Result<InitialData> {
    spec.validate(&grid)?;
    let eps = Complex64::new(spec.amplitude, 0.0);
    let env_u = gaussian(grid, spec.sigma);
    let env_n = gaussian(grid, spec.wave_width());
    let (u0, n0, n1) = match spec.family {
        Family::Gaussian => (env_u, env_n, Field::zeros(grid, Space::Physical)),
        Family::ModulatedGaussian { k0 } => {
            let carrier = Field::from_fn(grid, |x| Complex64::from_polar(1.0, k0[0] * x[0] + k0[1] * x[1] + k0[2] * x[2]));
            let u = Field::from_values(
                grid,
                Space::Physical,
                env_u.values().iter().zip(carrier.values()).map(|(a, b)| a * b).collect(),
            )?;
            (u, env_n, Field::zeros(grid, Space::Physical))
        }
        Family::RandomBandLimited { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut modulate = |env: &Field, sigma: f64| {
                let c = random_carrier(grid, sigma, &mut rng);
                Field::from_values(
                    grid,
                    Space::Physical,
                    env.values().iter().zip(c.values()).map(|(a, b)| a * b).collect(),
                )
            };
            let u = modulate(&env_u, spec.sigma)?;
            let n0 = modulate(&env_n, spec.wave_width())?;
            let n1 = modulate(&env_n, spec.wave_width())?;
            (u, n0, n1)
        }
    };
    Ok(InitialData {
        u0: dealiased(&u0.scaled(eps)),
        n0: real_zero_mean(&n0.scaled(eps)),
        n1: real_zero_mean(&n1.scaled(eps)),
    })
}

/// One norm entering the data conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct CertTerm {
    pub name: String,
    /// Which displayed condition the term belongs to (1 or 2).
    pub line: u8,
    pub value: f64,
}

/// Outcome of [`certify_data`]. Failures are entries, not errors.
#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub eps0: f64,
    /// Sobolev index used here.
    pub n_mon: u32,
    /// Index the proof asks for, reported for comparison.
    pub n_proof: u32,
    pub terms: Vec<CertTerm>,
    /// Sum of the terms of each condition.
    pub line_totals: [f64; 2],
    /// Whether `n0` and `n1` have zero mean.
    pub zero_mean: bool,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.zero_mean && self.line_totals.iter().all(|&v| v <= self.eps0)
    }

    /// Terms of every condition that exceeds `eps0`.
    pub fn violations(&self) -> Vec<&CertTerm> {
        self.terms
            .iter()
            .filter(|t| self.line_totals[(t.line - 1) as usize] > self.eps0)
            .collect()
    }
}

fn bracket_table(grid: &Grid) -> Vec<f64> {
    grid.k_squared_table().into_iter().map(|k2| (1.0 + k2).sqrt()).collect()
}

/// Evaluates every norm of the two data conditions, with `N_mon` in place of `N`:
///
/// 1. `||u0||_{H^{N+1}} + ||<x>^2 u0||_{L^2}`
/// 2. `||(Lambda n0, n1)||_{H^{N-1}} + ||<Lambda> (Lambda n0, n1)||_{B^0_{1,1}} + ||<x>^2 (n0, n1)||_{H^1}`
pub fn certify_data(data: &InitialData, params: &Params) -> Result<CertReport> {
    let InitialData { u0, n0, n1 } = data;
    u0.expect_same_grid(n0)?;
    u0.expect_same_grid(n1)?;
    let grid = *u0.grid();
    let n = params.n_mon as f64;
    let zero_mean = n0.expect_zero_mean().is_ok() && n1.expect_zero_mean().is_ok();
    let n0z = n0.remove_mean();
    let n1z = n1.remove_mean();

    let weighted = |v: &Field| multiply_by_japanese_bracket_squared(&v.in_physical());
    let lam_n0 = lambda_pow(&n0z, 1.0)?;
    let bracket = bracket_table(&grid);
    let besov = DyadicPartition::new(grid).besov_norm_vector(
        &[apply_table(&lam_n0, &bracket), apply_table(&n1z, &bracket)],
        0.0,
        1.0,
        1.0,
    )?;
    let wn0 = weighted(n0)?.sobolev_norm(1.0);
    let wn1 = weighted(n1)?.sobolev_norm(1.0);
    let terms = vec![
        CertTerm {
            name: format!("||u0||_H^{}", params.n_mon + 1),
            line: 1,
            value: u0.sobolev_norm(n + 1.0),
        },
        CertTerm {
            name: "||<x>^2 u0||_L2".into(),
            line: 1,
            value: weighted(u0)?.l2_norm(),
        },
        CertTerm {
            name: format!("||(Lambda n0, n1)||_H^{}", params.n_mon - 1),
            line: 2,
            value: lam_n0.sobolev_norm(n - 1.0).hypot(n1z.sobolev_norm(n - 1.0)),
        },
        CertTerm {
            name: "||<Lambda>(Lambda n0, n1)||_B0_11".into(),
            line: 2,
            value: besov,
        },
        CertTerm {
            name: "||<x>^2 (n0, n1)||_H1".into(),
            line: 2,
            value: wn0.hypot(wn1),
        },
    ];
    let mut line_totals = [0.0; 2];
    for t in &terms {
        line_totals[(t.line - 1) as usize] += t.value;
    }
    Ok(CertReport {
        eps0: params.eps0,
        n_mon: params.n_mon,
        n_proof: params.n_proof,
        terms,
        line_totals,
        zero_mean,
    })
}

/// Largest amplitude at which `spec`'s data certifies with margin `safety`
/// (`0 < safety <= 1`). Every certified norm is homogeneous of degree one in
/// the amplitude, so one evaluation at unit amplitude suffices.
pub fn calibrate_amplitude(spec: &DataSpec, grid: Grid, params: &Params, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidParams(format!("safety factor must lie in (0, 1], got {safety}")));
    }
    let unit = make_data(&spec.with_amplitude(1.0), grid)?;
    let report = certify_data(&unit, params)?;
    let worst = report.line_totals[0].max(report.line_totals[1]);
    if worst == 0.0 {
        return Err(Error::InvalidData("unit-amplitude data has vanishing norms".into()));
    }
    Ok(safety * params.eps0 / worst)
}
