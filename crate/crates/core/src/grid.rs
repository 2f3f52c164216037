use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Periodic cubic box `[-L/2, L/2)^dim` sampled with `n` points per axis.
///
/// Samples are stored row-major with axis 0 slowest. Along each axis, index
/// `i` sits at `x = -L/2 + i L/n` and carries the wavenumber `(2 pi / L) m`
/// where `m = i` for `i < n/2` and `m = i - n` otherwise, so `m` ranges over
/// `[-n/2, n/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        Ok(Grid { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of samples, `n^dim`.
    pub fn size(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Quadrature weight of one sample, `(L/n)^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Lattice spacing in frequency, `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest resolved wavenumber per axis, `(2 pi / L)(n/2 - 1)`.
    pub fn k_max(&self) -> f64 {
        self.dk() * (self.n / 2 - 1) as f64
    }

    /// Largest `|k|` over the whole lattice (the Nyquist corner).
    pub fn k_corner(&self) -> f64 {
        self.dk() * (self.n / 2) as f64 * (self.dim as f64).sqrt()
    }

    /// Signed integer mode number of axis index `i`.
    pub fn mode(&self, i: usize) -> isize {
        if i < self.n / 2 {
            i as isize
        } else {
            i as isize - self.n as isize
        }
    }

    /// Axis index holding the (wrapped) integer mode `m`.
    pub fn index_of_mode(&self, m: isize) -> usize {
        m.rem_euclid(self.n as isize) as usize
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        self.dk() * self.mode(i) as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Wavevector of a flat index; unused trailing components are zero.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0.0; 3];
        for axis in 0..self.dim {
            k[axis] = self.wavenumber(idx[axis]);
        }
        k
    }

    /// Box-centred position of a flat index; unused trailing components are zero.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.coordinate(idx[axis]);
        }
        x
    }

    /// Flat index of the lattice mode with integer coordinates `m`.
    pub fn flat_of_mode(&self, m: &[isize]) -> usize {
        let idx: Vec<usize> = m[..self.dim].iter().map(|&mi| self.index_of_mode(mi)).collect();
        self.flat_index(&idx)
    }

    /// Flat index of the mode `-k` for the mode stored at `flat`.
    pub fn negated(&self, flat: usize) -> usize {
        let idx = self.multi_index(flat);
        let mut neg = [0usize; 3];
        for axis in 0..self.dim {
            neg[axis] = (self.n - idx[axis]) % self.n;
        }
        self.flat_index(&neg)
    }

    /// `|k|^2` at every lattice point.
    pub fn k_squared_table(&self) -> Vec<f64> {
        let axis: Vec<f64> = (0..self.n).map(|i| self.wavenumber(i).powi(2)).collect();
        (0..self.size())
            .map(|flat| {
                let idx = self.multi_index(flat);
                idx[..self.dim].iter().map(|&i| axis[i]).sum()
            })
            .collect()
    }

    /// `|k|` at every lattice point.
    pub fn k_abs_table(&self) -> Vec<f64> {
        self.k_squared_table().into_iter().map(f64::sqrt).collect()
    }

    /// Two-thirds dealiasing mask: keeps modes with `|m_j| < n/3` on every axis.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let keep: Vec<bool> = (0..self.n)
            .map(|i| 3 * self.mode(i).unsigned_abs() < self.n)
            .collect();
        (0..self.size())
            .map(|flat| {
                let idx = self.multi_index(flat);
                idx[..self.dim].iter().all(|&i| keep[i])
            })
            .collect()
    }

    /// Time for a signal moving at `speed` to cross half the box.
    pub fn wraparound_time(&self, speed: f64) -> f64 {
        self.length / (2.0 * speed)
    }

    /// Wraparound time of the half-wave group (unit propagation speed).
    pub fn wave_wraparound_time(&self) -> f64 {
        self.wraparound_time(1.0)
    }

    /// Wraparound time of the Schrodinger group for content up to `k_eff`
    /// (group velocity `2 k_eff`).
    pub fn schrodinger_wraparound_time(&self, k_eff: f64) -> f64 {
        self.wraparound_time(2.0 * k_eff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(3, 12, 1.0).is_err());
        assert!(Grid::new(3, 4, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(2, 8, 0.0).is_err());
        assert!(Grid::new(2, 8, 1.0).is_ok());
    }

    #[test]
    fn lattice_layout() {
        let g = Grid::new(2, 8, 2.0 * PI).unwrap();
        assert_eq!(g.size(), 64);
        assert_eq!(g.mode(3), 3);
        assert_eq!(g.mode(4), -4);
        assert_eq!(g.index_of_mode(-1), 7);
        assert!((g.k_max() - 3.0).abs() < 1e-15);
        assert!((g.coordinate(0) + PI).abs() < 1e-15);
        let flat = g.flat_of_mode(&[1, -2]);
        assert_eq!(g.wavevector(flat), [1.0, -2.0, 0.0]);
        assert_eq!(g.wavevector(g.negated(flat)), [-1.0, 2.0, 0.0]);
        assert!((g.cell_volume() - (2.0 * PI / 8.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn mask_keeps_lower_two_thirds() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let kept: Vec<isize> = (0..8).filter(|&i| g.dealias_mask()[i]).map(|i| g.mode(i)).collect();
        assert_eq!(kept, vec![0, 1, 2, -2, -1]);
    }
}
