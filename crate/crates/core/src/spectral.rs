//! Fourier multipliers, fractional powers of `|grad|`, spatial weights and
//! Lebesgue norms on a periodic grid.

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{Field, Space};
use num_complex::Complex64;
use rayon::prelude::*;

/// How a multiplier treats the `k = 0` mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroMode {
    /// Evaluate the symbol at `k = 0`; fails if it is not finite there.
    Evaluate,
    /// Use this value at `k = 0` instead of the symbol.
    Value(Complex64),
}

/// Multiplies frequency samples by the symbol `m(k)`, transforming a physical
/// input first. The result is in frequency space.
pub fn apply_multiplier<M>(field: &Field, symbol: M, zero: ZeroMode) -> Result<Field>
where
    M: Fn(&[f64; 3]) -> Complex64 + Sync,
{
    let grid = *field.grid();
    let mut out = field.in_frequency();
    let zero_value = match zero {
        ZeroMode::Value(v) => v,
        ZeroMode::Evaluate => {
            let v = symbol(&[0.0; 3]);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::SingularMultiplier);
            }
            v
        }
    };
    let bad = out
        .values_mut()
        .par_iter_mut()
        .enumerate()
        .map(|(i, v)| {
            let m = if i == 0 {
                zero_value
            } else {
                symbol(&grid.wavevector(i))
            };
            if m.re.is_finite() && m.im.is_finite() {
                *v *= m;
                None
            } else {
                Some(i)
            }
        })
        .min_by_key(|x| x.unwrap_or(usize::MAX))
        .flatten();
    match bad {
        Some(i) => Err(Error::NonFiniteMultiplier(grid.wavevector(i))),
        None => Ok(out),
    }
}

/// Applies a real radial multiplier given as a precomputed table over the lattice.
pub(crate) fn apply_table(field: &Field, table: &[f64]) -> Field {
    let mut out = field.in_frequency();
    out.values_mut()
        .par_iter_mut()
        .zip(table.par_iter())
        .for_each(|(v, &m)| *v *= m);
    out
}

fn k_pow(kabs: f64, s: f64) -> f64 {
    if kabs == 0.0 {
        0.0
    } else {
        kabs.powf(s)
    }
}

/// `Lambda^s = |grad|^s`. The zero mode of the output is zero whenever `s != 0`;
/// for `s < 0` the input must already have zero mean.
pub fn lambda_pow(field: &Field, s: f64) -> Result<Field> {
    if s == 0.0 {
        return Ok(field.in_frequency());
    }
    if s < 0.0 {
        field.expect_zero_mean()?;
    }
    let table = lambda_table(field.grid().k_abs_table(), s);
    Ok(apply_table(field, &table))
}

/// `Lambda^s` after discarding the zero mode of the input.
pub fn lambda_pow_dropping_mean(field: &Field, s: f64) -> Field {
    let table = lambda_table(field.grid().k_abs_table(), s);
    apply_table(&field.remove_mean(), &table)
}

pub(crate) fn lambda_table(kabs: Vec<f64>, s: f64) -> Vec<f64> {
    kabs.into_iter().map(|k| k_pow(k, s)).collect()
}

/// Component of a spatial weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightComponent {
    /// The coordinate `x_j` along one axis.
    Axis(usize),
    /// The radius `|x|`.
    Radial,
}

/// Pointwise multiplication by `x_j^power` or `|x|^power` with box-centred
/// coordinates, `power` in `{1, 2}`.
pub fn multiply_by_weight(field: &Field, power: u32, component: WeightComponent) -> Result<Field> {
    field.expect_space(Space::Physical)?;
    if !(1..=2).contains(&power) {
        return Err(Error::InvalidExponent(power as f64));
    }
    let grid = *field.grid();
    if let WeightComponent::Axis(a) = component {
        if a >= grid.dim() {
            return Err(Error::InvalidGrid(format!("axis {a} out of range")));
        }
    }
    let values = field
        .values()
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = grid.position(i);
            let base = match component {
                WeightComponent::Axis(a) => x[a],
                WeightComponent::Radial => (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt(),
            };
            v * base.powi(power as i32)
        })
        .collect();
    Field::from_values(grid, Space::Physical, values)
}

/// Pointwise multiplication by `<x>^2 = 1 + |x|^2`.
pub fn multiply_by_japanese_bracket_squared(field: &Field) -> Result<Field> {
    field.expect_space(Space::Physical)?;
    let grid = *field.grid();
    let values = field
        .values()
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = grid.position(i);
            v * (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
        })
        .collect();
    Field::from_values(grid, Space::Physical, values)
}

/// Lebesgue exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn validate(self) -> Result<Self> {
        match self {
            Exponent::Finite(p) if !(p >= 1.0 && p.is_finite()) => Err(Error::InvalidExponent(p)),
            e => Ok(e),
        }
    }
}

impl From<f64> for Exponent {
    fn from(p: f64) -> Self {
        if p.is_infinite() && p > 0.0 {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }
}

/// Discrete `L^p` norm `(sum |v|^p (L/n)^dim)^(1/p)`, or `max |v|` for `p = inf`.
pub fn lp_norm(field: &Field, p: impl Into<Exponent>) -> Result<f64> {
    field.expect_space(Space::Physical)?;
    lp_norm_of(field.values(), field.grid().cell_volume(), p.into())
}

pub(crate) fn lp_norm_of(values: &[Complex64], cell: f64, p: Exponent) -> Result<f64> {
    match p.validate()? {
        Exponent::Infinity => Ok(fft::deterministic_max(values.len(), |i| values[i].norm())),
        Exponent::Finite(p) => {
            let sum = if p == 2.0 {
                fft::deterministic_sum(values.len(), |i| values[i].norm_sqr())
            } else {
                fft::deterministic_sum(values.len(), |i| values[i].norm().powf(p))
            };
            Ok((sum * cell).powf(1.0 / p))
        }
    }
}

/// `L^p` norm of a vector field given by its components, with the Euclidean
/// norm taken pointwise.
pub fn lp_norm_vector(components: &[Field], p: impl Into<Exponent>) -> Result<f64> {
    let first = components
        .first()
        .ok_or_else(|| Error::InvalidGrid("empty vector field".into()))?;
    for c in components {
        c.expect_space(Space::Physical)?;
        c.expect_same_grid(first)?;
    }
    let len = first.values().len();
    let magnitudes: Vec<Complex64> = (0..len)
        .into_par_iter()
        .map(|i| {
            let s: f64 = components.iter().map(|c| c.values()[i].norm_sqr()).sum();
            Complex64::new(s.sqrt(), 0.0)
        })
        .collect();
    lp_norm_of(&magnitudes, first.grid().cell_volume(), p.into())
}
