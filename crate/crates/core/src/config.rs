//! Run configuration: a TOML file with sections, every key defaulted, plus
//! `section.key=value` overrides from the command line.

use crate::data::{choose_parameters, DataSpec, Family};
use crate::error::{Error, Result};
use crate::evolution::{Coupling, Params, RunSettings};
use crate::grid::Grid;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            dim: 3,
            n: 64,
            length: 64.0,
        }
    }
}

/// `delta = "auto"` or a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSetting {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub gamma: f64,
    pub delta: DeltaSetting,
    pub eps0: f64,
    pub n_mon: u32,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            gamma: 1.0,
            delta: DeltaSetting::Value(0.01),
            eps0: 1e-2,
            n_mon: crate::data::DEFAULT_N_MON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Gaussian,
    ModulatedGaussian,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub family: FamilyName,
    /// Data amplitude; when absent it is calibrated so the data certify at
    /// `safety * eps0`.
    pub amplitude: Option<f64>,
    pub safety: f64,
    pub sigma: f64,
    pub wave_sigma: Option<f64>,
    pub k0: [f64; 3],
    pub seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            family: FamilyName::Gaussian,
            amplitude: None,
            safety: 0.9,
            sigma: 4.0,
            wave_sigma: None,
            k0: [0.5, 0.0, 0.0],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Nonlinear,
    LinearOnly,
    OracleCheck,
    IdentityCheck,
    DataCert,
    DecayFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigSection {
    pub mode: Mode,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between diagnostics records.
    pub diagnostics_stride: u64,
    /// Records between in-memory snapshots used by the scattering monitor.
    pub snapshot_stride: u64,
    /// Records between checkpoints; 0 writes only the final one.
    pub checkpoint_every: u64,
    pub energy_tolerance: f64,
}

impl Default for RunConfigSection {
    fn default() -> Self {
        RunConfigSection {
            mode: Mode::Nonlinear,
            dt: 1e-2,
            t_end: 30.0,
            diagnostics_stride: 50,
            snapshot_stride: 1,
            checkpoint_every: 0,
            energy_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Time-series column to fit.
    pub column: String,
    pub t0: f64,
    pub t1: f64,
    /// CSV to read; defaults to the run's own time series.
    pub input: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            column: "sup_u".into(),
            t0: 1.0,
            t1: 30.0,
            input: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        IdentitiesConfig {
            samples: 1_000_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub amplitude: f64,
    pub sigma: f64,
    pub dt: f64,
    pub t_end: f64,
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            dim: 2,
            n: 8,
            length: 4.0 * std::f64::consts::PI,
            amplitude: 0.3,
            sigma: 1.5,
            dt: 1e-2,
            t_end: 1.0,
            tolerance: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "zkg-out".into() }
    }
}

/// Whole configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub data: DataConfig,
    pub run: RunConfigSection,
    pub fit: FitConfig,
    pub identities: IdentitiesConfig,
    pub oracle: OracleConfig,
    pub output: OutputConfig,
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Parses a `section.key=value` override; `value` is read as a TOML value and
/// falls back to a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form section.key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key `{key}` is malformed")));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let (last, sections) = path.split_last().expect("non-empty path");
    let mut cursor = table;
    for s in sections {
        cursor = cursor
            .entry(s.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{s}` in override `{key}` is not a section")))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parses TOML text, applies overrides and validates.
    pub fn from_str_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
        let mut table: toml::Table = text.parse().map_err(config_error)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: RunConfig = RunConfig::deserialize(table).map_err(config_error)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path` (or starts from defaults when `None`).
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_str_with_overrides(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Field-level checks run before anything is allocated.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        Grid::new(self.grid.dim, self.grid.n, self.grid.length).map_err(|e| Error::Config(format!("grid: {e}")))?;
        if let DeltaSetting::Keyword(k) = &self.params.delta {
            if k != "auto" {
                return bad("params.delta", format!("expected a number or \"auto\", got \"{k}\""));
            }
        }
        if self.params.n_mon < 1 {
            return bad("params.n_mon", "must be at least 1".into());
        }
        self.params().map_err(|e| Error::Config(format!("params: {e}")))?;
        if let Some(a) = self.data.amplitude {
            if !(a >= 0.0 && a.is_finite()) {
                return bad("data.amplitude", format!("must be non-negative, got {a}"));
            }
        }
        if !(self.data.safety > 0.0 && self.data.safety <= 1.0) {
            return bad("data.safety", format!("must lie in (0, 1], got {}", self.data.safety));
        }
        self.data_spec(1.0)
            .validate(&self.grid()?)
            .map_err(|e| Error::Config(format!("data: {e}")))?;
        self.run_settings().validate()?;
        if self.run.snapshot_stride == 0 {
            return bad("run.snapshot_stride", "must be at least 1".into());
        }
        if !(self.fit.t1 > self.fit.t0) {
            return bad("fit", format!("window [{}, {}] is empty", self.fit.t0, self.fit.t1));
        }
        if self.identities.samples == 0 {
            return bad("identities.samples", "must be positive".into());
        }
        let o = &self.oracle;
        Grid::new(o.dim, o.n, o.length).map_err(|e| Error::Config(format!("oracle: {e}")))?;
        if !(o.dt > 0.0 && o.t_end > 0.0 && o.tolerance > 0.0) {
            return bad("oracle", "dt, t_end and tolerance must be positive".into());
        }
        let steps = (o.t_end / o.dt).round();
        if (steps * o.dt - o.t_end).abs() > 1e-9 * o.t_end || steps as u64 % 2 != 0 {
            return bad("oracle", "t_end must be an even number of steps dt for Simpson's rule".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.dim, self.grid.n, self.grid.length)
    }

    pub fn params(&self) -> Result<Params> {
        let delta = match self.params.delta {
            DeltaSetting::Value(d) => Some(d),
            DeltaSetting::Keyword(_) => None,
        };
        let mut p = choose_parameters(self.params.gamma, delta, self.params.eps0)?;
        p.n_mon = self.params.n_mon;
        Ok(p)
    }

    /// Data description with the given amplitude.
    pub fn data_spec(&self, amplitude: f64) -> DataSpec {
        let family = match self.data.family {
            FamilyName::Gaussian => Family::Gaussian,
            FamilyName::ModulatedGaussian => Family::ModulatedGaussian { k0: self.data.k0 },
            FamilyName::Random => Family::RandomBandLimited { seed: self.data.seed },
        };
        DataSpec {
            family,
            amplitude,
            sigma: self.data.sigma,
            wave_sigma: self.data.wave_sigma,
        }
    }

    pub fn coupling(&self) -> Coupling {
        match self.run.mode {
            Mode::LinearOnly => Coupling::LinearOnly,
            _ => Coupling::Nonlinear,
        }
    }

    pub fn run_settings(&self) -> RunSettings {
        RunSettings {
            dt: self.run.dt,
            t_end: self.run.t_end,
            stride: self.run.diagnostics_stride,
            coupling: self.coupling(),
            energy_tolerance: self.run.energy_tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_desk_scale_defaults() {
        let c = RunConfig::from_str_with_overrides("", &[]).unwrap();
        assert_eq!((c.grid.dim, c.grid.n, c.grid.length), (3, 64, 64.0));
        assert_eq!(c.data.sigma, 4.0);
        assert_eq!(c.params.eps0, 1e-2);
        assert_eq!(c.params().unwrap().n_proof, 500);
        let again = RunConfig::from_str_with_overrides(&c.to_toml(), &[]).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn overrides_and_sections() {
        let text = "[grid]\nn = 32\n[run]\nmode = \"linear-only\"\n";
        let c = RunConfig::from_str_with_overrides(
            text,
            &[
                "grid.length=32".into(),
                "params.delta=auto".into(),
                "data.family=random".into(),
                "data.amplitude=1e-4".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.grid.n, 32);
        assert_eq!(c.grid.length, 32.0);
        assert_eq!(c.params.delta, DeltaSetting::Keyword("auto".into()));
        assert_eq!(c.coupling(), Coupling::LinearOnly);
        assert_eq!(c.data_spec(1e-4).family, Family::RandomBandLimited { seed: 0 });
        assert_eq!(c.data.amplitude, Some(1e-4));
    }

    #[test]
    fn invalid_configs_name_the_field() {
        let cases = [
            ("[grid]\nn = 48\n", "grid"),
            ("[params]\ndelta = 0.5\n", "params"),
            ("[params]\ndelta = \"sometimes\"\n", "params.delta"),
            ("[run]\ndt = -1.0\n", "dt"),
            ("[data]\nsigma = 20.0\n", "data"),
            ("[grid]\nbogus = 1\n", "bogus"),
            ("[run]\nmode = \"warp\"\n", "warp"),
        ];
        for (text, needle) in cases {
            let err = RunConfig::from_str_with_overrides(text, &[]).unwrap_err();
            assert!(matches!(err, Error::Config(_)));
            assert!(err.to_string().contains(needle), "{text}: {err}");
        }
        assert!(RunConfig::from_str_with_overrides("", &["nokey".into()]).is_err());
    }
}
