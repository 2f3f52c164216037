use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;
use num_complex::Complex64;
use rayon::prelude::*;

/// Which representation a [`Field`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Physical,
    Frequency,
}

/// Complex scalar samples on a [`Grid`], tagged with their representation.
///
/// Frequency samples use the unnormalized forward convention of [`crate::fft`],
/// so Parseval reads `sum |v|^2 = (1/n^dim) sum |v_hat|^2`. Norms always carry
/// the physical quadrature weight, which keeps the convention out of sight.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    space: Space,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid, space: Space) -> Self {
        Field {
            grid,
            space,
            values: vec![Complex64::default(); grid.size()],
        }
    }

    pub fn from_values(grid: Grid, space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.size(),
                values.len()
            )));
        }
        Ok(Field { grid, space, values })
    }

    /// Physical field sampled from `f(x)` at box-centred positions.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> Complex64 + Sync,
    {
        let values = (0..grid.size())
            .into_par_iter()
            .map(|i| f(grid.position(i)))
            .collect();
        Field {
            grid,
            space: Space::Physical,
            values,
        }
    }

    pub fn from_real_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Frequency field whose physical samples are `amplitude * exp(i k.x)` for
    /// the lattice mode `k = (2 pi / L) mode`.
    pub fn single_mode(grid: Grid, mode: &[isize], amplitude: Complex64) -> Self {
        let mut field = Field::zeros(grid, Space::Frequency);
        // Samples start at x = -L/2, which contributes exp(-i pi m) per axis.
        let parity: isize = mode[..grid.dim()].iter().sum();
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        field.values[grid.flat_of_mode(mode)] = amplitude * sign * grid.size() as f64;
        field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space == expected {
            Ok(())
        } else {
            Err(Error::WrongSpace {
                expected,
                found: self.space,
            })
        }
    }

    pub fn expect_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn into_frequency(mut self) -> Result<Field> {
        self.expect_space(Space::Physical)?;
        fft::forward(&mut self.values, self.grid.n(), self.grid.dim());
        self.space = Space::Frequency;
        Ok(self)
    }

    pub fn into_physical(mut self) -> Result<Field> {
        self.expect_space(Space::Frequency)?;
        fft::inverse(&mut self.values, self.grid.n(), self.grid.dim());
        self.space = Space::Physical;
        Ok(self)
    }

    pub fn to_frequency(&self) -> Result<Field> {
        self.clone().into_frequency()
    }

    pub fn to_physical(&self) -> Result<Field> {
        self.clone().into_physical()
    }

    /// This field in frequency space, transforming if necessary.
    pub fn in_frequency(&self) -> Field {
        match self.space {
            Space::Frequency => self.clone(),
            Space::Physical => self.clone().into_frequency().expect("tag checked"),
        }
    }

    /// This field in physical space, transforming if necessary.
    pub fn in_physical(&self) -> Field {
        match self.space {
            Space::Physical => self.clone(),
            Space::Frequency => self.clone().into_physical().expect("tag checked"),
        }
    }

    /// Zero-mode (mean) coefficient; the spatial mean times `n^dim` in frequency space.
    pub fn zero_mode(&self) -> Complex64 {
        match self.space {
            Space::Frequency => self.values[0],
            Space::Physical => {
                let re = fft::deterministic_sum(self.values.len(), |i| self.values[i].re);
                let im = fft::deterministic_sum(self.values.len(), |i| self.values[i].im);
                Complex64::new(re, im)
            }
        }
    }

    /// Errors unless the zero mode is negligible relative to the whole field.
    pub fn expect_zero_mean(&self) -> Result<()> {
        let freq = self.in_frequency();
        let total = fft::deterministic_sum(freq.values.len(), |i| freq.values[i].norm_sqr()).sqrt();
        let zero = freq.values[0].norm();
        if zero <= 1e-12 * total || zero <= f64::MIN_POSITIVE {
            Ok(())
        } else {
            Err(Error::NonzeroMean(zero / self.grid.size() as f64))
        }
    }

    /// Sets the zero mode to exactly zero.
    pub fn remove_mean(&self) -> Field {
        let mut freq = self.in_frequency();
        freq.values[0] = Complex64::default();
        freq
    }

    pub fn map<F>(&self, f: F) -> Field
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        Field {
            grid: self.grid,
            space: self.space,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Field {
        self.map(|v| v * factor)
    }

    /// `self + factor * other`, in the space of `self`.
    pub fn axpy(&self, factor: Complex64, other: &Field) -> Result<Field> {
        self.expect_same_grid(other)?;
        other.expect_space(self.space)?;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(&a, &b)| a + factor * b)
            .collect();
        Ok(Field {
            grid: self.grid,
            space: self.space,
            values,
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Real part taken in physical space.
    pub fn real_part(&self) -> Field {
        self.in_physical().map(|v| Complex64::new(v.re, 0.0))
    }

    /// Imaginary part taken in physical space, as a real field.
    pub fn imag_part(&self) -> Field {
        self.in_physical().map(|v| Complex64::new(v.im, 0.0))
    }

    /// Largest `|Im v| / max |v|` over physical samples.
    pub fn relative_imaginary(&self) -> f64 {
        let phys = self.in_physical();
        let scale = fft::deterministic_max(phys.values.len(), |i| phys.values[i].norm());
        if scale == 0.0 {
            return 0.0;
        }
        fft::deterministic_max(phys.values.len(), |i| phys.values[i].im.abs()) / scale
    }

    pub fn is_finite(&self) -> bool {
        self.values.par_iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `L^2` norm with the physical quadrature weight, valid in either space.
    pub fn l2_norm(&self) -> f64 {
        let sum = fft::deterministic_sum(self.values.len(), |i| self.values[i].norm_sqr());
        let scale = match self.space {
            Space::Physical => self.grid.cell_volume(),
            Space::Frequency => self.grid.cell_volume() / self.grid.size() as f64,
        };
        (sum * scale).sqrt()
    }

    /// Sobolev norm `||<k>^s v||_{L^2}` computed from frequency samples.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let freq = self.in_frequency();
        let k2 = self.grid.k_squared_table();
        let sum = fft::deterministic_sum(freq.values.len(), |i| {
            (1.0 + k2[i]).powf(s) * freq.values[i].norm_sqr()
        });
        (sum * self.grid.cell_volume() / self.grid.size() as f64).sqrt()
    }
}
