//! Pseudospectral simulation and analysis of the wave-Schrodinger system
//! `i u_t + Delta u = u n`, `n_tt - Delta n = -Lambda^{1+gamma} |u|^2` on a periodic box.

pub mod besov;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod field;
pub mod grid;
pub mod phases;
pub mod propagators;
pub mod runner;
pub mod spectral;
pub mod timeseries;

pub use error::{Error, Result};
pub use field::{Field, Space};
pub use grid::Grid;
