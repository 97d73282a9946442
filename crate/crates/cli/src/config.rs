//! Run configuration: a sectioned TOML file.
//!
//! ```toml
//! [surface]
//! kind = "disk"            # disk | sphere | custom (then `file = "surface.csv"`)
//!
//! [bc]
//! alpha1 = 0.0
//! alpha2 = 1.0
//!
//! [physics]
//! m = 1
//! j = 0
//! lambda = 50.0            # or `lambda_factor = 1.5` times the bifurcation value
//! eta = 0.0
//! beta = 0.0
//!
//! [control]                # optional; omitted values are chosen automatically
//! b = -0.5
//! tau = 0.0
//! zeta = 3.14159
//! iota = "plus"
//!
//! [numerics]
//! nodes = 128
//!
//! [output]
//! directory = "out"
//! ```
//!
//! Angles are in radians. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use glspiral::control::Reflection;
use glspiral::geometry::BoundaryCondition;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Disk,
    Sphere,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub kind: SurfaceKind,
    /// `s,a[,atilde]` samples for custom surfaces, relative to the config file.
    pub file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcSection {
    #[serde(default)]
    pub alpha1: f64,
    #[serde(default = "one")]
    pub alpha2: f64,
}

impl Default for BcSection {
    fn default() -> Self {
        Self { alpha1: 0.0, alpha2: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    #[serde(default = "one_u32")]
    pub m: u32,
    #[serde(default)]
    pub j: u32,
    pub lambda: Option<f64>,
    pub lambda_factor: Option<f64>,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    /// Gain; the threshold gain when omitted.
    pub b: Option<f64>,
    #[serde(default)]
    pub tau: f64,
    /// Spatial shift; the best admissible shift when omitted.
    pub zeta: Option<f64>,
    #[serde(default)]
    pub iota: Reflection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    /// Radial grid nodes; `N` is accepted as well.
    #[serde(alias = "N")]
    pub nodes: usize,
    pub n_max: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Time steps between samples of the time series.
    pub output_every: usize,
    /// Most negative gain the spectral cutoff must cover.
    pub b_min: f64,
    /// Eigenvalues kept per Fourier mode.
    pub eigen_count: usize,
    /// Bisection width for the delay threshold.
    pub tau_tol: f64,
    /// Size of the unstable-eigenvector perturbation in `simulate`.
    pub perturbation: f64,
    /// Size of the random perturbation in `simulate`.
    pub noise: f64,
    /// Time at which `render` draws the pattern.
    pub render_time: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self {
            nodes: 128,
            n_max: 16,
            dt: 1e-3,
            t_end: 10.0,
            output_every: 100,
            b_min: -12.0,
            eigen_count: 12,
            tau_tol: 1e-4,
            perturbation: 1e-2,
            noise: 1e-4,
            render_time: 0.0,
        }
    }
}

/// Grid for `sweep`; every combination is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub b: Vec<f64>,
    #[serde(default = "zero_list")]
    pub tau: Vec<f64>,
    pub zeta: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![Format::Csv, Format::Svg] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceSection,
    #[serde(default)]
    pub bc: BcSection,
    pub physics: PhysicsSection,
    pub control: Option<ControlSection>,
    #[serde(default)]
    pub numerics: NumericsSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn zero_list() -> Vec<f64> {
    vec![0.0]
}

/// 1-based line of byte `offset` in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, if present.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_owned();
            if current == section && key.is_empty() {
                return Some(i + 1);
            }
        } else if current == section && !key.is_empty() {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    /// Parses and validates configuration text.
    pub fn from_str(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_owned(),
        })?;
        config.base_dir = base_dir.to_path_buf();
        config.validate(text)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str(&text, &base)
    }

    fn validate(&self, text: &str) -> Result<(), CliError> {
        let invalid = |section: &str, key: &str, message: String| CliError::Validation {
            field: format!("{section}.{key}"),
            line: locate(text, section, key).or_else(|| locate(text, section, "")),
            message,
        };
        if self.surface.kind == SurfaceKind::Custom && self.surface.file.is_none() {
            return Err(invalid("surface", "file", "custom surfaces need a sample file".into()));
        }
        if let Err(e) = BoundaryCondition::new(self.bc.alpha1, self.bc.alpha2) {
            return Err(invalid("bc", "alpha1", e.to_string()));
        }
        let p = &self.physics;
        match (p.lambda, p.lambda_factor) {
            (Some(_), Some(_)) => return Err(invalid("physics", "lambda_factor", "give either lambda or lambda_factor".into())),
            (None, None) => return Err(invalid("physics", "lambda", "lambda or lambda_factor is required".into())),
            (Some(l), None) if !(l > 0.0 && l.is_finite()) => {
                return Err(invalid("physics", "lambda", format!("must be positive, got {l}")))
            }
            (None, Some(f)) if !(f > 1.0 && f.is_finite()) => {
                return Err(invalid("physics", "lambda_factor", format!("must exceed 1, got {f}")))
            }
            _ => {}
        }
        if p.m == 0 {
            return Err(invalid("physics", "m", "winding number must be at least 1".into()));
        }
        for (key, v) in [("eta", p.eta), ("beta", p.beta)] {
            if !v.is_finite() {
                return Err(invalid("physics", key, format!("must be finite, got {v}")));
            }
        }
        if let Some(c) = &self.control {
            if let Some(b) = c.b {
                if !(b <= 0.0) {
                    return Err(invalid("control", "b", format!("gain must be non-positive, got {b}")));
                }
            }
            if !(c.tau >= 0.0 && c.tau.is_finite()) {
                return Err(invalid("control", "tau", format!("delay must be non-negative, got {}", c.tau)));
            }
            if c.zeta.is_some_and(|z| !z.is_finite()) {
                return Err(invalid("control", "zeta", "must be finite".into()));
            }
        }
        let n = &self.numerics;
        if n.nodes < glspiral::discretization::MIN_NODES {
            return Err(invalid("numerics", "nodes", format!("need at least {} nodes", glspiral::discretization::MIN_NODES)));
        }
        if (p.m as usize) > n.n_max {
            return Err(invalid("numerics", "n_max", format!("must be at least m = {}", p.m)));
        }
        if !(n.dt > 0.0 && n.dt.is_finite()) {
            return Err(invalid("numerics", "dt", format!("must be positive, got {}", n.dt)));
        }
        if !(n.t_end >= 0.0 && n.t_end.is_finite()) {
            return Err(invalid("numerics", "t_end", format!("must be non-negative, got {}", n.t_end)));
        }
        if !(n.b_min < 0.0) {
            return Err(invalid("numerics", "b_min", format!("must be negative, got {}", n.b_min)));
        }
        if n.eigen_count == 0 {
            return Err(invalid("numerics", "eigen_count", "must be positive".into()));
        }
        if !(n.tau_tol > 0.0) {
            return Err(invalid("numerics", "tau_tol", "must be positive".into()));
        }
        if let Some(s) = &self.sweep {
            if s.b.is_empty() || s.tau.is_empty() || s.zeta.is_empty() {
                return Err(invalid("sweep", "b", "every sweep axis needs at least one value".into()));
            }
            if let Some(b) = s.b.iter().find(|b| !(**b <= 0.0)) {
                return Err(invalid("sweep", "b", format!("gains must be non-positive, got {b}")));
            }
            if let Some(t) = s.tau.iter().find(|t| !(**t >= 0.0)) {
                return Err(invalid("sweep", "tau", format!("delays must be non-negative, got {t}")));
            }
        }
        Ok(())
    }

    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}
