//! Smooth dyadic Littlewood–Paley shells and homogeneous Besov norms.
//!
//! The cutoff is `chi(r) = 1 - S(r - 1)` with the quintic smoothstep
//! `S(s) = 6s^5 - 15s^4 + 10s^3` on `[0, 1]`, so `chi = 1` for `r <= 1`,
//! `chi = 0` for `r >= 2`, and `chi` is C^2. Shell `k` is
//! `psi_k(xi) = chi(|xi| / 2^k) - chi(|xi| / 2^{k-1})`.
//!
//! Shells are truncated to the range the grid resolves: `2^{k_min}` is the
//! largest power of two not above the lattice spacing `2 pi / L`, and
//! `2^{k_max}` the smallest one not below the Nyquist corner. Over that range
//! the shells telescope to exactly one on every nonzero lattice mode.

use crate::error::{Error, Result};
use crate::fft;
use crate::field::Field;
use crate::grid::Grid;
use crate::spectral::{apply_table, lp_norm_of, lp_norm_vector, Exponent};
use rayon::prelude::*;

/// The cutoff profile `chi`.
pub fn chi(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let s = r - 1.0;
        1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }
}

/// Shell symbol `psi_k` at radius `r = |xi|`.
pub fn shell_symbol(k: i32, r: f64) -> f64 {
    let scale = 2f64.powi(k);
    chi(r / scale) - chi(2.0 * r / scale)
}

/// Dyadic shells active on a grid.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: Grid,
    k_min: i32,
    k_max: i32,
    k_abs: Vec<f64>,
}

impl DyadicPartition {
    pub fn new(grid: Grid) -> Self {
        let k_min = grid.dk().log2().floor() as i32;
        let k_max = grid.k_corner().log2().ceil() as i32;
        DyadicPartition {
            grid,
            k_min,
            k_max,
            k_abs: grid.k_abs_table(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn shells(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    fn check_shell(&self, k: i32) -> Result<()> {
        if (self.k_min..=self.k_max).contains(&k) {
            Ok(())
        } else {
            Err(Error::ShellOutOfRange {
                k,
                min: self.k_min,
                max: self.k_max,
            })
        }
    }

    /// `psi_k` sampled on the lattice.
    pub fn shell_table(&self, k: i32) -> Result<Vec<f64>> {
        self.check_shell(k)?;
        Ok(self.k_abs.par_iter().map(|&r| shell_symbol(k, r)).collect())
    }

    /// Largest `|sum_k psi_k(xi) - 1|` over lattice modes with
    /// `2^{k_min + 1} <= |xi| <= 2^{k_max - 1}`.
    pub fn partition_residual(&self) -> f64 {
        let lo = 2f64.powi(self.k_min + 1);
        let hi = 2f64.powi(self.k_max - 1);
        self.k_abs
            .par_iter()
            .filter(|&&r| r >= lo && r <= hi)
            .map(|&r| (self.shells().map(|k| shell_symbol(k, r)).sum::<f64>() - 1.0).abs())
            .reduce(|| 0.0, f64::max)
    }

    /// `P_k field`, as a frequency field.
    pub fn project(&self, field: &Field, k: i32) -> Result<Field> {
        if *field.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(apply_table(field, &self.shell_table(k)?))
    }

    /// Homogeneous Besov norm `|| 2^{sk} ||P_k v||_{L^p} ||_{l^q}` over the active shells.
    pub fn besov_norm(
        &self,
        field: &Field,
        s: f64,
        p: impl Into<Exponent>,
        q: impl Into<Exponent>,
    ) -> Result<f64> {
        let (p, q) = (p.into().validate()?, q.into().validate()?);
        field.expect_zero_mean()?;
        let hat = field.in_frequency();
        let cell = self.grid.cell_volume();
        let mut terms = Vec::with_capacity((self.k_max - self.k_min + 1) as usize);
        for k in self.shells() {
            let shell = self.project(&hat, k)?.into_physical()?;
            terms.push(2f64.powf(s * k as f64) * lp_norm_of(shell.values(), cell, p)?);
        }
        Ok(sequence_norm(&terms, q))
    }

    /// Besov norm of a vector field, with the Euclidean norm taken pointwise
    /// inside each shell.
    pub fn besov_norm_vector(
        &self,
        components: &[Field],
        s: f64,
        p: impl Into<Exponent>,
        q: impl Into<Exponent>,
    ) -> Result<f64> {
        let (p, q) = (p.into().validate()?, q.into().validate()?);
        let hats = components
            .iter()
            .map(|c| {
                c.expect_zero_mean()?;
                Ok(c.in_frequency())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut terms = Vec::with_capacity((self.k_max - self.k_min + 1) as usize);
        for k in self.shells() {
            let shells = hats
                .iter()
                .map(|h| self.project(h, k)?.into_physical())
                .collect::<Result<Vec<_>>>()?;
            terms.push(2f64.powf(s * k as f64) * lp_norm_vector(&shells, p)?);
        }
        Ok(sequence_norm(&terms, q))
    }
}

fn sequence_norm(terms: &[f64], q: Exponent) -> f64 {
    match q {
        Exponent::Infinity => terms.iter().copied().fold(0.0, f64::max),
        Exponent::Finite(q) => fft::deterministic_sum(terms.len(), |i| terms[i].powf(q)).powf(1.0 / q),
    }
}

/// Convenience wrapper building the partition for `field`'s grid.
pub fn besov_norm(field: &Field, s: f64, p: impl Into<Exponent>, q: impl Into<Exponent>) -> Result<f64> {
    DyadicPartition::new(*field.grid()).besov_norm(field, s, p, q)
}
