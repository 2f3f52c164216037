//! Multi-dimensional complex FFT on row-major cubic arrays.
//!
//! Forward transforms are unnormalized, `v_hat[m] = sum_x v[x] exp(-i k.x)`;
//! the inverse carries the `1/n^dim` factor.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, matches!(direction, FftDirection::Forward));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

/// Rows handed to one rayon task.
const ROWS_PER_TASK: usize = 64;

fn transform_rows(data: &mut [Complex64], fft: &Plan, n: usize) {
    data.par_chunks_mut(n * ROWS_PER_TASK).for_each(|chunk| {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

/// Cyclic axis rotation: view `src` as an `(m, n)` matrix and write its transpose.
fn rotate_axes(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    let m = src.len() / n;
    dst.par_chunks_mut(m).enumerate().for_each(|(q, row)| {
        for (p, out) in row.iter_mut().enumerate() {
            *out = src[p * n + q];
        }
    });
}

fn transform(data: &mut [Complex64], n: usize, dim: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, direction);
    if dim == 1 {
        transform_rows(data, &fft, n);
        return;
    }
    let mut buf = vec![Complex64::default(); data.len()];
    // After `dim` (transform last axis, rotate) passes every axis has been
    // transformed once and the original axis order is restored.
    for pass in 0..dim {
        if pass % 2 == 0 {
            transform_rows(data, &fft, n);
            rotate_axes(data, &mut buf, n);
        } else {
            transform_rows(&mut buf, &fft, n);
            rotate_axes(&buf, data, n);
        }
    }
    if dim % 2 == 1 {
        data.copy_from_slice(&buf);
    }
}

pub fn forward(data: &mut [Complex64], n: usize, dim: usize) {
    transform(data, n, dim, FftDirection::Forward);
}

pub fn inverse(data: &mut [Complex64], n: usize, dim: usize) {
    transform(data, n, dim, FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    data.par_iter_mut().for_each(|v| *v *= scale);
}

/// Order-independent sum: fixed-size partial sums combined sequentially, so the
/// result does not depend on the thread count.
pub(crate) fn deterministic_sum<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    const BLOCK: usize = 4096;
    let blocks = len.div_ceil(BLOCK);
    let partial: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(len);
            (start..end).map(&term).sum()
        })
        .collect();
    partial.into_iter().sum()
}

/// Order-independent maximum of a non-negative quantity.
pub(crate) fn deterministic_max<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    (0..len).into_par_iter().map(&term).reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(data: &[Complex64], n: usize, dim: usize) -> Vec<Complex64> {
        let size = data.len();
        let digits = |mut f: usize| {
            let mut d = vec![0usize; dim];
            for a in (0..dim).rev() {
                d[a] = f % n;
                f /= n;
            }
            d
        };
        (0..size)
            .map(|kf| {
                let kd = digits(kf);
                (0..size)
                    .map(|xf| {
                        let xd = digits(xf);
                        let phase: f64 = kd.iter().zip(&xd).map(|(&k, &x)| (k * x) as f64).sum();
                        data[xf] * Complex64::from_polar(1.0, -2.0 * PI * phase / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_in_every_dimension() {
        for dim in 1..=3 {
            let n: usize = 8;
            let size = n.pow(dim as u32);
            let data: Vec<Complex64> = (0..size)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let expect = naive_dft(&data, n, dim);
            let mut got = data.clone();
            forward(&mut got, n, dim);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-10, "dim {dim}: {a} vs {b}");
            }
            inverse(&mut got, n, dim);
            for (a, b) in got.iter().zip(&data) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }
}
