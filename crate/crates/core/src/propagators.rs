//! Free Schrodinger and half-wave groups as unit-modulus Fourier multipliers,
//! and conversions between physical variables and profiles.
//!
//! Conventions: `schrodinger_group(v, t)` is `e^{it Delta}`, multiplying
//! frequency samples by `e^{-it|k|^2}`; `wave_half_group(v, sign, t)` is
//! `e^{-/+ it Lambda}`, multiplying by `e^{-/+ it|k|}`. The Schrodinger profile
//! is `f = e^{-it Delta} u` and the wave profiles are `g_pm = e^{pm it Lambda} w_pm`.

use crate::field::Field;
use crate::spectral::apply_table;
use num_complex::Complex64;
use rayon::prelude::*;

/// Branch label `+` / `-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Multiplies frequency samples by `exp(i * phase_rate * symbol(k))`.
pub(crate) fn apply_phase(field: &Field, symbol: &[f64], phase_rate: f64) -> Field {
    let mut out = field.in_frequency();
    if phase_rate == 0.0 {
        return out;
    }
    out.values_mut()
        .par_iter_mut()
        .zip(symbol.par_iter())
        .for_each(|(v, &s)| *v *= Complex64::from_polar(1.0, phase_rate * s));
    out
}

/// `e^{it Delta}`.
pub fn schrodinger_group(field: &Field, t: f64) -> Field {
    apply_phase(field, &field.grid().k_squared_table(), -t)
}

/// `e^{-it Lambda}` for [`Sign::Plus`] and `e^{+it Lambda}` for [`Sign::Minus`].
pub fn wave_half_group(field: &Field, sign: Sign, t: f64) -> Field {
    apply_phase(field, &field.grid().k_abs_table(), -sign.value() * t)
}

/// Schrodinger profile `f = e^{-it Delta} u`.
pub fn profile_of(u: &Field, t: f64) -> Field {
    schrodinger_group(u, -t)
}

/// Physical Schrodinger variable `u = e^{it Delta} f`.
pub fn physical_of(f: &Field, t: f64) -> Field {
    schrodinger_group(f, t)
}

/// Wave profile `g_pm = e^{pm it Lambda} w_pm`.
pub fn wave_profile_of(w: &Field, sign: Sign, t: f64) -> Field {
    wave_half_group(w, sign, -t)
}

/// Physical wave variable `w_pm = e^{-/+ it Lambda} g_pm`.
pub fn wave_physical_of(g: &Field, sign: Sign, t: f64) -> Field {
    wave_half_group(g, sign, t)
}

/// Wraparound time for Schrodinger evolution of `data`, using group velocity
/// `2 k_eff` with `k_eff` twice the rms wavenumber of the data's spectrum.
pub fn schrodinger_wraparound_time(data: &Field) -> f64 {
    data.grid().schrodinger_wraparound_time(effective_wavenumber(data))
}

/// Twice the rms wavenumber `sqrt(sum |k|^2 |v_hat|^2 / sum |v_hat|^2)`.
pub fn effective_wavenumber(data: &Field) -> f64 {
    let hat = data.in_frequency();
    let k2 = data.grid().k_squared_table();
    let (num, den) = hat
        .values()
        .iter()
        .zip(&k2)
        .fold((0.0, 0.0), |(n, d), (v, &k)| (n + k * v.norm_sqr(), d + v.norm_sqr()));
    if den == 0.0 {
        return data.grid().k_max();
    }
    2.0 * (num / den).sqrt()
}

/// Radial multipliers commute with the groups; used by tests and diagnostics.
pub fn apply_radial(field: &Field, table: &[f64]) -> Field {
    apply_table(field, table)
}
