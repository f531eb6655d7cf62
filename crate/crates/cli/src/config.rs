use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shiftinv::{Generator, OperatorSpec};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// One experiment, read from a JSON file with camelCase keys.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub generator: Generator,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "default_radius")]
    pub radius: usize,
    pub period: usize,
    pub scheme: Vec<String>,
    #[serde(default)]
    pub dual: DualConfig,
    #[serde(default)]
    pub signal: SignalConfig,
    #[serde(default)]
    pub evaluation: GridSpec,
    /// Sample indices `[lo, hi]`; derived from the evaluation grid if absent.
    #[serde(default)]
    pub sample_window: Option<(i64, i64)>,
    /// Second axis of a two-dimensional experiment.
    #[serde(default)]
    pub second_axis: Option<AxisConfig>,
    #[serde(default)]
    pub kernel2d: Kernel2dMode,
    #[serde(default = "default_grid_2d")]
    pub grid_size2d: usize,
    #[serde(default = "default_radius_2d")]
    pub radius2d: usize,
    /// Kernel set written by the `kernel` subcommand, used instead of
    /// recomputing.
    #[serde(default)]
    pub kernel_file: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_grid() -> usize {
    shiftinv::kernels::DEFAULT_GRID
}

fn default_radius() -> usize {
    shiftinv::kernels::DEFAULT_RADIUS
}

fn default_grid_2d() -> usize {
    128
}

fn default_radius_2d() -> usize {
    24
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum DualConfig {
    /// Inverse for square schemes, Moore–Penrose otherwise.
    #[default]
    Canonical,
    /// `M† + U (I - M M†)` with `U` uniform in `[-1, 1]`.
    RandomLeftInverse { seed: u64 },
    LeftInverse { u: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum SignalConfig {
    /// Coefficients i.i.d. uniform in `[-1, 1]` on `support` indices centred
    /// at 0 (per axis in 2D).
    Random {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_support")]
        support: usize,
    },
    /// JSON file with `start` and `coeffs` (1D) or `start`, `rows`, `cols`,
    /// `coeffs` (2D, row-major). Relative paths resolve against the config.
    File { path: PathBuf },
}

impl Default for SignalConfig {
    fn default() -> Self {
        SignalConfig::Random {
            seed: 0,
            support: default_support(),
        }
    }
}

fn default_support() -> usize {
    64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            start: -8.0,
            end: 8.0,
            step: 1.0 / 16.0,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        shiftinv::reconstruct::uniform_grid(self.start, self.end, self.step)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AxisConfig {
    /// Defaults to the first-axis generator.
    #[serde(default)]
    pub generator: Option<Generator>,
    #[serde(default)]
    pub b: f64,
    pub period: usize,
    pub scheme: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Kernel2dMode {
    /// `S_a(t) S̃_b(s)`.
    #[default]
    Separable,
    /// `S_{a,b}` from the two-dimensional Zak kernel.
    General,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_max_period")]
    pub max_period: usize,
    #[serde(default = "default_biortho_window")]
    pub biortho_window: i64,
    #[serde(default = "default_biortho_tol")]
    pub biortho_tol: f64,
    #[serde(default = "default_interp_range")]
    pub interpolation_range: i64,
    #[serde(default = "default_interp_tol")]
    pub interpolation_tol: f64,
    #[serde(default)]
    pub fixtures: Vec<MatrixFixture>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_period: default_max_period(),
            biortho_window: default_biortho_window(),
            biortho_tol: default_biortho_tol(),
            interpolation_range: default_interp_range(),
            interpolation_tol: default_interp_tol(),
            fixtures: Vec::new(),
        }
    }
}

fn default_max_period() -> usize {
    8
}

fn default_biortho_window() -> i64 {
    3
}

fn default_biortho_tol() -> f64 {
    1e-6
}

fn default_interp_range() -> i64 {
    10
}

fn default_interp_tol() -> f64 {
    1e-8
}

/// A scheme matrix with a claimed dual, checked for biorthogonality.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MatrixFixture {
    pub name: String,
    pub matrix: Vec<Vec<f64>>,
    #[serde(default)]
    pub window_start: i64,
    /// Defaults to the computed inverse.
    #[serde(default)]
    pub dual: Option<Vec<Vec<f64>>>,
}

/// Command-line overrides.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub grid_size: Option<usize>,
    pub radius: Option<usize>,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "unsupported schemaVersion {}; expected {SCHEMA_VERSION}",
                cfg.schema_version
            )));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        if let SignalConfig::File { path } = &mut cfg.signal {
            *path = resolve(base, path)?;
        }
        if let Some(k) = &cfg.kernel_file {
            cfg.kernel_file = Some(resolve(base, k)?);
        }
        if let Some(g) = overrides.grid_size {
            cfg.grid_size = g;
            cfg.grid_size2d = g;
        }
        if let Some(r) = overrides.radius {
            cfg.radius = r;
            cfg.radius2d = r;
        }
        if let (Some(s), SignalConfig::Random { seed, .. }) = (overrides.seed, &mut cfg.signal) {
            *seed = s;
        }
        if cfg.evaluation.step.is_nan() || cfg.evaluation.step <= 0.0 || cfg.evaluation.end < cfg.evaluation.start {
            return Err(CliError::config(format!(
                "evaluation grid needs step > 0 and end >= start, got {:?}",
                cfg.evaluation
            )));
        }
        cfg.specs()?;
        if let Some(axis) = &cfg.second_axis {
            parse(&axis.scheme)?;
        }
        Ok(cfg)
    }

    pub fn specs(&self) -> Result<Vec<OperatorSpec>, CliError> {
        let specs = parse(&self.scheme)?;
        for s in &specs {
            s.validate(self.period).map_err(CliError::from)?;
        }
        Ok(specs)
    }

    pub fn seed(&self) -> Option<u64> {
        match self.signal {
            SignalConfig::Random { seed, .. } => Some(seed),
            SignalConfig::File { .. } => None,
        }
    }
}

pub fn parse(texts: &[String]) -> Result<Vec<OperatorSpec>, CliError> {
    shiftinv::schemes::parse_specs(texts).map_err(CliError::from)
}

fn resolve(base: &Path, p: &Path) -> Result<PathBuf, CliError> {
    let full = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    if !full.exists() {
        return Err(CliError::config(format!("referenced file {} does not exist", full.display())));
    }
    Ok(full)
}
