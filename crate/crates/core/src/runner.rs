//! Experiment pipelines behind the command-line front end: time stepping with
//! diagnostics, checkpoints and resume; data certification; the identity and
//! quadrature-oracle checks; decay fits of recorded time series.

use crate::checkpoint::{read_checkpoint, write_checkpoint};
use crate::config::{Mode, OracleConfig, RunConfig};
use crate::data::{calibrate_amplitude, certify_data, make_data, CertReport, DataSpec, Family, InitialData};
use crate::diagnostics::{fit_decay, scattering_monitor, xnorm_report, DecayFit, DiagnosticsRecord, ScatteringReport};
use crate::error::{Error, Result};
use crate::evolution::{reality_defect, run, Coupling, Integrator, Params, State};
use crate::grid::Grid;
use crate::phases::{
    check_null_identity_psi, check_pseudo_scaling_phi, duhamel_oracle_f, duhamel_oracle_g, NullIdentityReport,
    ProfileHistory, PseudoScalingReport, WaveChannel, PSEUDO_SCALING_TOLERANCE,
};
use crate::timeseries::{column, read_timeseries, TimeseriesWriter};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Residual bound for the null identity of `psi`.
pub const NULL_IDENTITY_TOLERANCE: f64 = 1e-13;

/// Snapshots kept in memory for the scattering monitor.
const SNAPSHOTS_KEPT: usize = 6;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const FINAL_CHECKPOINT: &str = "final.zkg";

pub fn checkpoint_name(step: u64) -> String {
    format!("checkpoint_{step:08}.zkg")
}

/// Initial data resolved from a configuration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub grid: Grid,
    pub params: Params,
    pub spec: DataSpec,
    pub data: InitialData,
    pub certificate: CertReport,
}

/// Builds the configured data, calibrating the amplitude when none is given.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let grid = config.grid()?;
    let params = config.params()?;
    let amplitude = match config.data.amplitude {
        Some(a) => a,
        None => calibrate_amplitude(&config.data_spec(1.0), grid, &params, config.data.safety)?,
    };
    let spec = config.data_spec(amplitude);
    let data = make_data(&spec, grid)?;
    let certificate = certify_data(&data, &params)?;
    Ok(Prepared {
        grid,
        params,
        spec,
        data,
        certificate,
    })
}

impl Prepared {
    pub fn initial_state(&self) -> Result<State> {
        State::from_data(&self.data.u0, &self.data.n0, &self.data.n1, self.params.gamma)
    }
}

/// Fails unless `state` lives on the configured grid with the configured `gamma`.
pub fn check_compatible(state: &State, config: &RunConfig) -> Result<()> {
    let grid = config.grid()?;
    let found = state.grid();
    if (found.dim(), found.n(), found.length().to_bits()) != (grid.dim(), grid.n(), grid.length().to_bits()) {
        return Err(Error::Checkpoint {
            what: "grid",
            expected: format!("dim {}, n {}, L {}", grid.dim(), grid.n(), grid.length()),
            found: format!("dim {}, n {}, L {}", found.dim(), found.n(), found.length()),
        });
    }
    if state.gamma != config.params.gamma {
        return Err(Error::Checkpoint {
            what: "gamma",
            expected: config.params.gamma.to_string(),
            found: state.gamma.to_string(),
        });
    }
    Ok(())
}

/// Stepping handle used by embedders: fixed step, no energy guard.
pub struct Simulation {
    params: Params,
    dt: f64,
    integrator: Integrator,
    state: State,
    previous: Option<State>,
}

impl Simulation {
    pub fn from_config(config: &RunConfig) -> Result<Simulation> {
        let prepared = prepare(config)?;
        let state = prepared.initial_state()?;
        Ok(Self::with_state(config, prepared.params, state))
    }

    pub fn from_state(config: &RunConfig, state: State) -> Result<Simulation> {
        check_compatible(&state, config)?;
        Ok(Self::with_state(config, config.params()?, state))
    }

    fn with_state(config: &RunConfig, params: Params, state: State) -> Simulation {
        Simulation {
            params,
            dt: config.run.dt,
            integrator: Integrator::for_state(&state, config.coupling()),
            state,
            previous: None,
        }
    }

    pub fn advance(&mut self, steps: u64) -> Result<()> {
        let mut s = self.state.clone();
        for _ in 0..steps {
            s = self.integrator.step(&s, self.dt)?;
        }
        if steps > 0 {
            self.previous = Some(std::mem::replace(&mut self.state, s));
        }
        Ok(())
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Record for the current state; `cauchy_f` refers to the state before the
    /// last [`Simulation::advance`].
    pub fn diagnostics(&self) -> Result<DiagnosticsRecord> {
        xnorm_report(&self.state, &self.params, self.previous.as_ref())
    }
}

/// What a time-stepping run leaves behind.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: State,
    pub records: usize,
    pub checkpoints: Vec<PathBuf>,
    pub max_reality_defect: f64,
    pub scattering: ScatteringReport,
    pub certificate: Option<CertReport>,
}

/// Integrates per `config`, writing `timeseries.csv`, periodic checkpoints and
/// `final.zkg` under `out`. With `resume_from`, the run continues from that
/// state and appends to the time series; the resumed rows and final state
/// match those of an uninterrupted run.
pub fn run_pipeline(
    config: &RunConfig,
    out: &Path,
    resume_from: Option<State>,
    mut progress: impl FnMut(&DiagnosticsRecord),
) -> Result<RunSummary> {
    std::fs::create_dir_all(out)?;
    let params = config.params()?;
    let (start, certificate, mut csv) = match resume_from {
        Some(state) => {
            check_compatible(&state, config)?;
            (state, None, TimeseriesWriter::append(&out.join(TIMESERIES_FILE))?)
        }
        None => {
            let prepared = prepare(config)?;
            if config.coupling() == Coupling::Nonlinear && !prepared.certificate.passed() {
                return Err(Error::InvalidData(format!(
                    "initial data do not certify at eps0 = {}: condition totals {:?}",
                    params.eps0, prepared.certificate.line_totals
                )));
            }
            let state = prepared.initial_state()?;
            (state, Some(prepared.certificate), TimeseriesWriter::create(&out.join(TIMESERIES_FILE))?)
        }
    };
    let resuming = certificate.is_none();
    std::fs::write(out.join("config.toml"), config.to_toml())?;

    let mut skip_first = resuming;
    let mut previous: Option<State> = if resuming { Some(start.clone()) } else { None };
    let mut snapshots: Vec<State> = Vec::new();
    let mut checkpoints = Vec::new();
    let mut observations = 0u64;
    let mut max_reality_defect = 0.0f64;

    let settings = config.run_settings();
    let final_state = run(start, &settings, |state| {
        if skip_first {
            skip_first = false;
            return Ok(());
        }
        let record = xnorm_report(state, &params, previous.as_ref())?;
        csv.write(&record)?;
        progress(&record);
        max_reality_defect = max_reality_defect.max(reality_defect(&state.w_plus()));
        if observations % config.run.snapshot_stride == 0 {
            snapshots.push(state.clone());
            if snapshots.len() > SNAPSHOTS_KEPT {
                snapshots.remove(0);
            }
        }
        if config.run.checkpoint_every > 0 && observations > 0 && observations % config.run.checkpoint_every == 0 {
            let path = out.join(checkpoint_name(state.step_count));
            write_checkpoint(state, &path)?;
            checkpoints.push(path);
        }
        observations += 1;
        previous = Some(state.clone());
        Ok(())
    })?;
    csv.flush()?;
    write_checkpoint(&final_state, &out.join(FINAL_CHECKPOINT))?;
    let scattering = scattering_monitor(&snapshots)?;

    let summary = RunSummary {
        final_state,
        records: csv.rows(),
        checkpoints,
        max_reality_defect,
        scattering,
        certificate,
    };
    std::fs::write(out.join("summary.txt"), summary_text(&summary))?;
    Ok(summary)
}

fn summary_text(s: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "t_final = {:.16e}", s.final_state.t);
    let _ = writeln!(out, "steps = {}", s.final_state.step_count);
    let _ = writeln!(out, "records = {}", s.records);
    let _ = writeln!(out, "max_reality_defect = {:.3e}", s.max_reality_defect);
    let _ = writeln!(out, "cauchy_consistent = {}", s.scattering.cauchy_consistent);
    for (t, (df, dg)) in s
        .scattering
        .times
        .iter()
        .zip(s.scattering.f_increments.iter().zip(&s.scattering.g_increments))
    {
        let _ = writeln!(out, "increment t = {t:.6} f = {df:.6e} g = {dg:.6e}");
    }
    out
}

/// Continues the run stored at `checkpoint`.
pub fn resume_pipeline(
    config: &RunConfig,
    checkpoint: &Path,
    out: &Path,
    progress: impl FnMut(&DiagnosticsRecord),
) -> Result<RunSummary> {
    let state = read_checkpoint(checkpoint)?;
    run_pipeline(config, out, Some(state), progress)
}

/// Renders a data certificate.
pub fn certificate_text(prepared: &Prepared) -> String {
    let c = &prepared.certificate;
    let mut out = String::new();
    let _ = writeln!(out, "amplitude = {:.6e}", prepared.spec.amplitude);
    let _ = writeln!(out, "eps0 = {:e}", c.eps0);
    let _ = writeln!(out, "sobolev_index = {} (proof asks for {})", c.n_mon, c.n_proof);
    for t in &c.terms {
        let _ = writeln!(out, "line {} {:<28} {:.6e}", t.line, t.name, t.value);
    }
    let _ = writeln!(out, "line 1 total = {:.6e}", c.line_totals[0]);
    let _ = writeln!(out, "line 2 total = {:.6e}", c.line_totals[1]);
    let _ = writeln!(out, "zero_mean = {}", c.zero_mean);
    let _ = writeln!(out, "certified = {}", c.passed());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityOutcome {
    pub null: NullIdentityReport,
    pub pseudo: PseudoScalingReport,
}

impl IdentityOutcome {
    pub fn passed(&self) -> bool {
        self.null.max_residual <= NULL_IDENTITY_TOLERANCE && self.pseudo.max_residual <= PSEUDO_SCALING_TOLERANCE
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "samples = {}", self.null.samples);
        let _ = writeln!(out, "psi_null_residual = {:.3e}", self.null.max_residual);
        let _ = writeln!(out, "psi_form_mismatch = {:.3e}", self.null.form_mismatch);
        let (s1, s2) = self.pseudo.sign_pattern;
        let _ = writeln!(out, "phi_sign_pattern = ({s1:+}, {s2:+})");
        let _ = writeln!(out, "phi_pseudo_scaling_residual = {:.3e}", self.pseudo.max_residual);
        let _ = writeln!(out, "phi_scalar_residual = {:.3e}", self.pseudo.scalar_residual);
        let _ = writeln!(out, "phi_runner_up_residual = {:.3e}", self.pseudo.runner_up_residual);
        let _ = writeln!(out, "phi_form_mismatch = {:.3e}", self.pseudo.form_mismatch);
        out
    }
}

pub fn identities_pipeline(samples: usize, seed: u64) -> Result<IdentityOutcome> {
    let null = check_null_identity_psi(samples, seed);
    let pseudo = check_pseudo_scaling_phi(samples, seed.wrapping_add(1))?;
    Ok(IdentityOutcome { null, pseudo })
}

/// Relative L2 errors of the stepper's accumulators against direct quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    pub g_plus: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    pub tolerance: f64,
}

impl OracleOutcome {
    pub fn worst(&self) -> f64 {
        self.g_plus.max(self.f_plus).max(self.f_minus)
    }

    pub fn passed(&self) -> bool {
        self.worst() <= self.tolerance
    }
}

/// Steps modulated Gaussian data on the small oracle grid and compares the
/// accumulated Duhamel terms with Simpson quadrature of the recorded profiles.
pub fn oracle_pipeline(config: &OracleConfig, gamma: f64) -> Result<OracleOutcome> {
    let grid = Grid::new(config.dim, config.n, config.length)?;
    let spec = DataSpec {
        family: Family::ModulatedGaussian { k0: [0.5, 0.25, 0.0] },
        amplitude: config.amplitude,
        sigma: config.sigma,
        wave_sigma: None,
    };
    let data = make_data(&spec, grid)?;
    let mut state = State::from_data(&data.u0, &data.n0, &data.n1, gamma)?;
    let integrator = Integrator::new(grid, gamma, Coupling::Nonlinear);
    let steps = (config.t_end / config.dt).round() as usize;
    let mut history = ProfileHistory::new(config.dt);
    history.push(state.f_hat.clone(), state.g_hat.clone());
    for _ in 0..steps {
        state = integrator.step(&state, config.dt)?;
        history.push(state.f_hat.clone(), state.g_hat.clone());
    }
    let rel = |a: crate::Field, b: &crate::Field| -> Result<f64> {
        let norm = b.l2_norm();
        let diff = a.sub(b)?.l2_norm();
        Ok(if norm > 0.0 { diff / norm } else { diff })
    };
    Ok(OracleOutcome {
        g_plus: rel(duhamel_oracle_g(&history, WaveChannel::Plus, gamma)?, &state.g_acc)?,
        f_plus: rel(duhamel_oracle_f(&history, WaveChannel::Plus)?, &state.f_plus)?,
        f_minus: rel(duhamel_oracle_f(&history, WaveChannel::Minus)?, &state.f_minus)?,
        tolerance: config.tolerance,
    })
}

/// Fits the configured column of a recorded time series.
pub fn fit_pipeline(config: &RunConfig, csv_path: &Path) -> Result<DecayFit> {
    let records = read_timeseries(csv_path)?;
    let series = column(&records, &config.fit.column)?;
    fit_decay(&series, (config.fit.t0, config.fit.t1))
}

/// Default CSV location for `fit`.
pub fn fit_input(config: &RunConfig, out: &Path) -> PathBuf {
    config.fit.input.clone().unwrap_or_else(|| out.join(TIMESERIES_FILE))
}

/// Whether `mode` steps the equations.
pub fn is_time_stepping(mode: Mode) -> bool {
    matches!(mode, Mode::Nonlinear | Mode::LinearOnly)
}
