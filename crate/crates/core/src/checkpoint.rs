//! Binary checkpoints.
//!
//! Layout (little-endian): `b"ZKG1"`, version `u32`, dim `u32`, n `u32`,
//! length `f64`, t `f64`, gamma `f64`, step_count `u64`, then the five
//! frequency arrays f̂, ĝ₊, F̂₊, F̂₋, Ĝ₊, each `n^dim` interleaved `(re, im)`
//! pairs of `f64` in row-major lattice order.

use crate::error::{Error, Result};
use crate::evolution::State;
use crate::field::{Field, Space};
use crate::grid::Grid;
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"ZKG1";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 8 + 8 + 8;

/// Serialized bytes of `state`.
pub fn encode(state: &State) -> Vec<u8> {
    let grid = state.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 5 * 16 * grid.size());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&state.gamma.to_le_bytes());
    out.extend_from_slice(&state.step_count.to_le_bytes());
    for field in arrays(state) {
        for z in field.in_frequency().values() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn arrays(state: &State) -> [&Field; 5] {
    [&state.f_hat, &state.g_hat, &state.f_plus, &state.f_minus, &state.g_acc]
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut b = [0u8; N];
        b.copy_from_slice(&self.bytes[self.pos..self.pos + N]);
        self.pos += N;
        b
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }
    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take())
    }
    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

fn mismatch(what: &'static str, expected: impl ToString, found: impl ToString) -> Error {
    Error::Checkpoint {
        what,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Parses checkpoint bytes.
pub fn decode(bytes: &[u8]) -> Result<State> {
    if bytes.len() < HEADER_LEN {
        return Err(mismatch("header length", format!("{HEADER_LEN} bytes"), format!("{} bytes", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(mismatch("magic", "ZKG1", String::from_utf8_lossy(&bytes[..4])));
    }
    let mut c = Cursor { bytes, pos: 4 };
    let version = c.u32();
    if version != VERSION {
        return Err(mismatch("version", VERSION, version));
    }
    let dim = c.u32() as usize;
    let n = c.u32() as usize;
    let length = c.f64();
    let grid = Grid::new(dim, n, length).map_err(|e| mismatch("grid", "a valid grid", e))?;
    let t = c.f64();
    let gamma = c.f64();
    let step_count = c.u64();

    let size = grid.size();
    let expected = HEADER_LEN + 5 * 16 * size;
    if bytes.len() != expected {
        return Err(mismatch(
            "file size",
            format!("{expected} bytes for dim {dim}, n {n}"),
            format!("{} bytes", bytes.len()),
        ));
    }
    let mut read_field = || {
        let values: Vec<Complex64> = (0..size)
            .map(|_| {
                let re = c.f64();
                let im = c.f64();
                Complex64::new(re, im)
            })
            .collect();
        Field::from_values(grid, Space::Frequency, values).expect("length checked")
    };
    let f_hat = read_field();
    let g_hat = read_field();
    let f_plus = read_field();
    let f_minus = read_field();
    let g_acc = read_field();
    Ok(State {
        gamma,
        t,
        step_count,
        f_hat,
        g_hat,
        f_plus,
        f_minus,
        g_acc,
    })
}

pub fn write_checkpoint(state: &State, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode(state))?;
    file.sync_all()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<State> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_state() -> State {
        let grid = Grid::new(2, 8, 10.0).unwrap();
        let z = Field::zeros(grid, Space::Physical);
        State::from_data(&z, &z, &z, 0.5).unwrap()
    }

    #[test]
    fn zero_state_round_trips() {
        let s = zero_state();
        let bytes = encode(&s);
        assert_eq!(bytes.len(), HEADER_LEN + 5 * 16 * 64);
        assert_eq!(decode(&bytes).unwrap(), s);
    }

    #[test]
    fn corrupt_headers_are_named() {
        let s = zero_state();
        let mut bytes = encode(&s);
        bytes[4] = 7;
        let err = decode(&bytes).unwrap_err().to_string();
        assert!(err.contains("version") && err.contains('7'), "{err}");

        let mut bytes = encode(&s);
        bytes[0] = b'X';
        assert!(decode(&bytes).unwrap_err().to_string().contains("magic"));

        let bytes = encode(&s);
        let err = decode(&bytes[..bytes.len() - 3]).unwrap_err().to_string();
        assert!(err.contains("file size"), "{err}");
        assert!(decode(&bytes[..10]).unwrap_err().to_string().contains("header"));
    }
}
