//! `zkg` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 numerical failure
//! (blow-up, energy drift, failed check), 3 I/O or file-format error.

use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::runner;
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "zkg", version, about = "Wave-Schrodinger pseudospectral simulator")]
struct Cli {
    /// Configuration file (TOML); every key has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// `section.key=value`, applied after the file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the pipeline selected by `run.mode`.
    Run,
    /// Build and certify the initial data.
    Certify,
    /// Check the phase identities by random sampling.
    Identities,
    /// Compare the stepper's Duhamel accumulators with direct quadrature.
    Oracle,
    /// Fit a power law to a recorded time series.
    Fit,
    /// Continue a run from a checkpoint.
    Resume { checkpoint: PathBuf },
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("zkg: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("ZKG_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if a pool already exists, in which case it is kept.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut config = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(dir) = &cli.output {
        config.output.dir = dir.clone();
    }
    let quiet = cli.quiet;
    let mode = match &cli.command {
        Command::Run => config.run.mode,
        Command::Certify => Mode::DataCert,
        Command::Identities => Mode::IdentityCheck,
        Command::Oracle => Mode::OracleCheck,
        Command::Fit => Mode::DecayFit,
        Command::Resume { checkpoint } => {
            let out = config.output.dir.clone();
            let summary = runner::resume_pipeline(&config, checkpoint, &out, |r| report_progress(quiet, r))?;
            return finish_run(quiet, &out, &summary);
        }
    };
    dispatch(&config, mode, quiet)
}

fn say(quiet: bool, text: &str) {
    if !quiet {
        print!("{text}");
    }
}

fn report_progress(quiet: bool, r: &crate::diagnostics::DiagnosticsRecord) {
    if !quiet {
        println!(
            "t = {:>9.4}  mass = {:.12e}  energy = {:+.12e}  |u|_inf = {:.4e}  |n|_inf = {:.4e}",
            r.t, r.mass, r.energy, r.sup_u, r.sup_n
        );
    }
}

fn finish_run(quiet: bool, out: &Path, summary: &runner::RunSummary) -> Result<()> {
    say(
        quiet,
        &format!(
            "wrote {} records and {} to {}\n",
            summary.records,
            runner::FINAL_CHECKPOINT,
            out.display()
        ),
    );
    Ok(())
}

fn dispatch(config: &RunConfig, mode: Mode, quiet: bool) -> Result<()> {
    let out = config.output.dir.clone();
    match mode {
        Mode::Nonlinear | Mode::LinearOnly => {
            let summary = runner::run_pipeline(config, &out, None, |r| report_progress(quiet, r))?;
            finish_run(quiet, &out, &summary)
        }
        Mode::DataCert => {
            let prepared = runner::prepare(config)?;
            let text = runner::certificate_text(&prepared);
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("certificate.txt"), &text)?;
            say(quiet, &text);
            if prepared.certificate.passed() {
                Ok(())
            } else {
                Err(Error::InvalidData("data do not certify at the configured eps0".into()))
            }
        }
        Mode::IdentityCheck => {
            let outcome = runner::identities_pipeline(config.identities.samples, config.identities.seed)?;
            // Identities are reported even under --quiet: they are the result.
            print!("{}", outcome.text());
            if outcome.passed() {
                Ok(())
            } else {
                Err(Error::Identity(format!(
                    "residuals {:.3e} / {:.3e} exceed tolerance",
                    outcome.null.max_residual, outcome.pseudo.max_residual
                )))
            }
        }
        Mode::OracleCheck => {
            let o = runner::oracle_pipeline(&config.oracle, config.params.gamma)?;
            println!(
                "oracle relative errors: G+ {:.3e}  F+ {:.3e}  F- {:.3e}  (tolerance {:.1e})",
                o.g_plus, o.f_plus, o.f_minus, o.tolerance
            );
            if o.passed() {
                Ok(())
            } else {
                Err(Error::CheckFailed(format!("oracle error {:.3e} exceeds {:.1e}", o.worst(), o.tolerance)))
            }
        }
        Mode::DecayFit => {
            let input = runner::fit_input(config, &out);
            let fit = runner::fit_pipeline(config, &input)?;
            println!(
                "{}: slope = {:.6} +/- {:.6} over [{}, {}] ({} samples)",
                config.fit.column, fit.slope, fit.stderr, config.fit.t0, config.fit.t1, fit.samples
            );
            Ok(())
        }
    }
}
