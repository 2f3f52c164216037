//! Bilinear phases, checks of their null and pseudo-scaling identities, and a
//! brute-force Duhamel quadrature used as an oracle for the stepper.
//!
//! `phi_pm(xi, eta) = |xi|^2 - |xi - eta|^2 pm |eta|` and
//! `psi_pm(xi, eta) = -/+ |xi| - |xi - eta|^2 + |eta|^2`.
//!
//! Which branch a channel of the evolution carries follows from the group
//! conventions: the `u w_+` product oscillates like `e^{is phi_-}` and the
//! `u w_-` product like `e^{is phi_+}`; likewise `g_+` collects `psi_-`. See
//! [`WaveChannel::phase_branch`].

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::Grid;
use crate::propagators::Sign;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Vec3 = [f64; 3];

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `phi_pm = 2 xi.eta - |eta|^2 pm |eta|`.
pub fn phi(xi: &Vec3, eta: &Vec3, branch: Sign) -> f64 {
    2.0 * dot(xi, eta) - dot(eta, eta) + branch.value() * norm(eta)
}

/// `phi_pm` in difference form, `|xi|^2 - |xi - eta|^2 pm |eta|`.
pub fn phi_difference_form(xi: &Vec3, eta: &Vec3, branch: Sign) -> f64 {
    let d = sub(xi, eta);
    dot(xi, xi) - dot(&d, &d) + branch.value() * norm(eta)
}

/// `psi_pm = -/+ |xi| - |xi|^2 + 2 xi.eta`.
pub fn psi(xi: &Vec3, eta: &Vec3, branch: Sign) -> f64 {
    -branch.value() * norm(xi) - dot(xi, xi) + 2.0 * dot(xi, eta)
}

/// `psi_pm` in difference form, `-/+ |xi| - |xi - eta|^2 + |eta|^2`.
pub fn psi_difference_form(xi: &Vec3, eta: &Vec3, branch: Sign) -> f64 {
    let d = sub(xi, eta);
    -branch.value() * norm(xi) - dot(&d, &d) + dot(eta, eta)
}

/// Which phase a quantity oscillates with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    /// Schrodinger output, wave input: `phi`.
    SchrodingerWave,
    /// Wave output, Schrodinger inputs: `psi`.
    WaveSchrodinger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSpec {
    pub kind: PhaseKind,
    pub branch: Sign,
}

impl PhaseSpec {
    pub fn eval(&self, xi: &Vec3, eta: &Vec3) -> f64 {
        match self.kind {
            PhaseKind::SchrodingerWave => phi(xi, eta, self.branch),
            PhaseKind::WaveSchrodinger => psi(xi, eta, self.branch),
        }
    }
}

/// Half-wave channel `w_+` or `w_- = -conj(w_+)` of the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveChannel {
    Plus,
    Minus,
}

impl WaveChannel {
    /// Branch of `phi` in the `u w_pm` product and of `psi` in `G_pm`.
    ///
    /// `w_pm` evolves with `e^{-/+ it|k|}`, which contributes `-/+ |eta|` to
    /// `phi` and `-/+ |xi|` to `psi`: the opposite label.
    pub fn phase_branch(self) -> Sign {
        match self {
            WaveChannel::Plus => Sign::Minus,
            WaveChannel::Minus => Sign::Plus,
        }
    }

    fn sign(self) -> f64 {
        match self {
            WaveChannel::Plus => 1.0,
            WaveChannel::Minus => -1.0,
        }
    }
}

fn sample_vector(rng: &mut ChaCha8Rng, radius: f64) -> Vec3 {
    [
        rng.gen_range(-radius..radius),
        rng.gen_range(-radius..radius),
        rng.gen_range(-radius..radius),
    ]
}

/// Sample box half-width for the identity sweeps.
const SAMPLE_RADIUS: f64 = 5.0;
/// Samples closer to the origin than this are redrawn.
const EXCLUSION: f64 = 0.1;

/// Draws `count` pairs `(xi, eta)`; `keep` rejects degenerate pairs.
fn sample_pairs(count: usize, seed: u64, keep: impl Fn(&Vec3, &Vec3) -> bool) -> Vec<(Vec3, Vec3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let xi = sample_vector(&mut rng, SAMPLE_RADIUS);
        let eta = sample_vector(&mut rng, SAMPLE_RADIUS);
        if keep(&xi, &eta) {
            out.push((xi, eta));
        }
    }
    out
}

/// Outcome of the null identity `|xi| = 1/2 (xi/|xi|) . grad_eta psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullIdentityReport {
    pub samples: usize,
    /// Largest residual over both branches.
    pub max_residual: f64,
    /// Largest disagreement between the two algebraic forms of `psi`.
    pub form_mismatch: f64,
}

/// `grad_eta psi_pm = 2 (xi - eta) + 2 eta` for either branch.
fn grad_eta_psi(xi: &Vec3, eta: &Vec3) -> Vec3 {
    let d = sub(xi, eta);
    [2.0 * d[0] + 2.0 * eta[0], 2.0 * d[1] + 2.0 * eta[1], 2.0 * d[2] + 2.0 * eta[2]]
}

pub fn check_null_identity_psi(samples: usize, seed: u64) -> NullIdentityReport {
    let pairs = sample_pairs(samples, seed, |xi, _| norm(xi) >= EXCLUSION);
    let (max_residual, form_mismatch) = pairs
        .par_iter()
        .map(|(xi, eta)| {
            let r = norm(xi);
            let unit = [xi[0] / r, xi[1] / r, xi[2] / r];
            let residual = (r - 0.5 * dot(&unit, &grad_eta_psi(xi, eta))).abs();
            let mismatch = [Sign::Plus, Sign::Minus]
                .iter()
                .map(|&b| (psi(xi, eta, b) - psi_difference_form(xi, eta, b)).abs())
                .fold(0.0, f64::max);
            (residual, mismatch)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    NullIdentityReport {
        samples,
        max_residual,
        form_mismatch,
    }
}

/// Outcome of the pseudo-scaling check for `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoScalingReport {
    pub samples: usize,
    /// `(s1, s2)` such that `grad_xi phi = s1 2 e (e . grad_eta phi) + s2 2 (phi/|eta|) e`
    /// with `e = eta/|eta|`.
    pub sign_pattern: (i8, i8),
    /// Largest residual of the vector relation for that pattern, over both branches.
    pub max_residual: f64,
    /// Largest residual of the scalar relation `e . grad_eta phi - phi/|eta| = -|eta|`.
    pub scalar_residual: f64,
    /// Largest disagreement between the two algebraic forms of `phi`.
    pub form_mismatch: f64,
    /// Best residual achieved by any other pattern (should be O(1)).
    pub runner_up_residual: f64,
}

/// Tolerance under which a sign pattern is accepted.
pub const PSEUDO_SCALING_TOLERANCE: f64 = 1e-12;

const PATTERNS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Samples `phi` and its analytic gradients and determines which sign pattern
/// makes the pseudo-scaling relation hold identically.
pub fn check_pseudo_scaling_phi(samples: usize, seed: u64) -> Result<PseudoScalingReport> {
    let pairs = sample_pairs(samples, seed, |_, eta| norm(eta) >= EXCLUSION);
    // Per pattern residuals, then scalar residual and form mismatch.
    let stats = pairs
        .par_iter()
        .map(|(xi, eta)| {
            let mut out = [0.0f64; 6];
            let r = norm(eta);
            let e = [eta[0] / r, eta[1] / r, eta[2] / r];
            for branch in [Sign::Plus, Sign::Minus] {
                let ph = phi(xi, eta, branch);
                let grad_xi = [2.0 * eta[0], 2.0 * eta[1], 2.0 * eta[2]];
                let d = sub(xi, eta);
                let b = branch.value();
                let grad_eta = [2.0 * d[0] + b * e[0], 2.0 * d[1] + b * e[1], 2.0 * d[2] + b * e[2]];
                let radial = dot(&e, &grad_eta);
                for (p, &(s1, s2)) in PATTERNS.iter().enumerate() {
                    let res = (0..3)
                        .map(|a| {
                            (grad_xi[a] - f64::from(s1) * 2.0 * e[a] * radial - f64::from(s2) * 2.0 * (ph / r) * e[a]).abs()
                        })
                        .fold(0.0, f64::max);
                    out[p] = out[p].max(res);
                }
                out[4] = out[4].max((radial - ph / r + r).abs());
                out[5] = out[5].max((ph - phi_difference_form(xi, eta, branch)).abs());
            }
            out
        })
        .reduce(
            || [0.0; 6],
            |a, b| {
                let mut m = [0.0; 6];
                for i in 0..6 {
                    m[i] = a[i].max(b[i]);
                }
                m
            },
        );
    let fitting: Vec<usize> = (0..4).filter(|&p| stats[p] <= PSEUDO_SCALING_TOLERANCE).collect();
    if fitting.len() != 1 {
        return Err(Error::Identity(format!(
            "expected exactly one fitting sign pattern, found {} (residuals {:?})",
            fitting.len(),
            &stats[..4]
        )));
    }
    let best = fitting[0];
    let runner_up = (0..4).filter(|&p| p != best).map(|p| stats[p]).fold(f64::INFINITY, f64::min);
    Ok(PseudoScalingReport {
        samples,
        sign_pattern: PATTERNS[best],
        max_residual: stats[best],
        scalar_residual: stats[4],
        form_mismatch: stats[5],
        runner_up_residual: runner_up,
    })
}

/// Profiles sampled at uniformly spaced times `0, h, 2h, ...`.
#[derive(Debug, Clone)]
pub struct ProfileHistory {
    pub spacing: f64,
    pub f_hat: Vec<Field>,
    pub g_hat: Vec<Field>,
}

impl ProfileHistory {
    pub fn new(spacing: f64) -> Self {
        ProfileHistory {
            spacing,
            f_hat: Vec::new(),
            g_hat: Vec::new(),
        }
    }

    pub fn push(&mut self, f_hat: Field, g_hat: Field) {
        self.f_hat.push(f_hat.in_frequency());
        self.g_hat.push(g_hat.in_frequency());
    }

    /// Final time covered, `(nodes - 1) h`.
    pub fn end_time(&self) -> f64 {
        self.f_hat.len().saturating_sub(1) as f64 * self.spacing
    }

    fn simpson_weights(&self) -> Result<Vec<f64>> {
        let nodes = self.f_hat.len();
        if self.g_hat.len() != nodes {
            return Err(Error::Quadrature("f and g histories differ in length".into()));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::Quadrature(format!("node spacing must be positive, got {}", self.spacing)));
        }
        if nodes < 3 || nodes % 2 == 0 {
            return Err(Error::Quadrature(format!(
                "composite Simpson needs an odd number of at least 3 nodes, got {nodes}"
            )));
        }
        let h = self.spacing;
        Ok((0..nodes)
            .map(|j| {
                let w = if j == 0 || j == nodes - 1 {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * h / 3.0
            })
            .collect())
    }

    fn grid(&self) -> Result<Grid> {
        let grid = *self.f_hat.first().ok_or_else(|| Error::Quadrature("empty history".into()))?.grid();
        if self.f_hat.iter().chain(&self.g_hat).any(|v| *v.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(grid)
    }
}

/// Largest grid the oracle accepts, in samples.
const ORACLE_MAX_SIZE: usize = 1 << 10;

/// Direct double sum `int_0^t sum_eta m(xi, eta) e^{is Phi(xi, eta)} a(xi - eta, s) b(eta, s) ds`
/// over dealiased lattice modes, without wraparound.
fn bilinear_oracle<A, B>(
    history: &ProfileHistory,
    symbol: impl Fn(&Vec3, &Vec3) -> f64 + Sync,
    phase: impl Fn(&Vec3, &Vec3) -> f64 + Sync,
    a: A,
    b: B,
) -> Result<Field>
where
    A: Fn(usize, usize) -> Complex64 + Sync,
    B: Fn(usize, usize) -> Complex64 + Sync,
{
    let grid = history.grid()?;
    if grid.size() > ORACLE_MAX_SIZE {
        return Err(Error::Quadrature(format!(
            "grid with {} samples is too large for direct summation (max {ORACLE_MAX_SIZE})",
            grid.size()
        )));
    }
    let weights = history.simpson_weights()?;
    let mask = grid.dealias_mask();
    let size = grid.size();
    let dim = grid.dim();
    let modes: Vec<[isize; 3]> = (0..size)
        .map(|i| {
            let idx = grid.multi_index(i);
            let mut m = [0isize; 3];
            for a in 0..dim {
                m[a] = grid.mode(idx[a]);
            }
            m
        })
        .collect();
    let limit = grid.n() as isize / 2;
    let values: Vec<Complex64> = (0..size)
        .into_par_iter()
        .map(|out| {
            if !mask[out] {
                return Complex64::default();
            }
            let xi = grid.wavevector(out);
            let mut acc = Complex64::default();
            for eta_i in (0..size).filter(|&i| mask[i]) {
                let mut diff = [0isize; 3];
                for a in 0..dim {
                    diff[a] = modes[out][a] - modes[eta_i][a];
                }
                if diff[..dim].iter().any(|&d| d < -limit || d >= limit) {
                    continue;
                }
                let d_i = grid.flat_of_mode(&diff);
                if !mask[d_i] {
                    continue;
                }
                let eta = grid.wavevector(eta_i);
                let m = symbol(&xi, &eta);
                if m == 0.0 {
                    continue;
                }
                let ph = phase(&xi, &eta);
                let mut time_integral = Complex64::default();
                for (j, w) in weights.iter().enumerate() {
                    let s = j as f64 * history.spacing;
                    time_integral += *w * Complex64::from_polar(1.0, s * ph) * a(j, d_i) * b(j, eta_i);
                }
                acc += m * time_integral;
            }
            acc / size as f64
        })
        .collect();
    Field::from_values(grid, Space::Frequency, values)
}

/// `G_pm(xi, t) = int_0^t |xi|^gamma e^{is psi} f_hat(xi - eta, s) conj(f_hat(-eta, s)) ds`,
/// summed over `eta`, with the `psi` branch carried by the channel. Returns `G_hat`
/// in the normalization of the evolution accumulators.
pub fn duhamel_oracle_g(history: &ProfileHistory, channel: WaveChannel, gamma: f64) -> Result<Field> {
    let grid = history.grid()?;
    let branch = channel.phase_branch();
    let f = &history.f_hat;
    bilinear_oracle(
        history,
        |xi, _| {
            let r = norm(xi);
            if r == 0.0 {
                0.0
            } else {
                r.powf(gamma)
            }
        },
        |xi, eta| psi_difference_form(xi, eta, branch),
        |j, i| f[j].values()[i],
        |j, i| f[j].values()[grid.negated(i)].conj(),
    )
}

/// `F_pm(xi, t) = int_0^t 1/2 e^{is phi} f_hat(xi - eta, s) g_pm_hat(eta, s) ds`, summed
/// over `eta`, with `g_-(eta) = -conj(g_+(-eta))` and the `phi` branch carried by
/// the channel.
pub fn duhamel_oracle_f(history: &ProfileHistory, channel: WaveChannel) -> Result<Field> {
    let grid = history.grid()?;
    let branch = channel.phase_branch();
    let (f, g) = (&history.f_hat, &history.g_hat);
    let sign = channel.sign();
    bilinear_oracle(
        history,
        |_, _| 0.5,
        |xi, eta| phi_difference_form(xi, eta, branch),
        |j, i| f[j].values()[i],
        move |j, i| match channel {
            WaveChannel::Plus => g[j].values()[i],
            WaveChannel::Minus => sign * g[j].values()[grid.negated(i)].conj(),
        },
    )
}
