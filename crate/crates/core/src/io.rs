//! CSV and JSON file formats.
//!
//! | file              | columns                                     |
//! |-------------------|---------------------------------------------|
//! | profile           | `s,re_u,im_u` plus a `.json` metadata file  |
//! | spectrum          | `n,k,mu,parity`                             |
//! | stability map     | `b,tau,zeta,margin,stable`                  |
//! | time series       | `t,distance,energy,control_norm,field_norm` |
//! | field snapshot    | `n,s,re_u,im_u`, one block per mode         |
//!
//! Floats are written in shortest round-trip form, so every file reads back
//! bit for bit.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretization::{Domain, RadialGrid};
use crate::geometry::{BoundaryCondition, SurfaceKind, SurfaceSpec};
use crate::profile::SpiralProfile;
use crate::simulator::{FieldState, Sample};
use crate::spectrum::{Parity, SpectrumReport};

/// Tolerance when matching a file's `s` column against a grid.
const NODE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("metadata: {0}")]
    Json(String),
    #[error("{0}")]
    Format(String),
}

impl IoError {
    fn file(path: &Path, source: std::io::Error) -> Self {
        IoError::File { path: path.to_path_buf(), source }
    }
}

impl From<csv::Error> for IoError {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        IoError::Csv { line, message: e.to_string() }
    }
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::file(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
    }
    fs::write(path, text).map_err(|e| IoError::file(path, e))
}

const PROFILE_HEADER: &[&str] = &["s", "re_u", "im_u"];
const SPECTRUM_HEADER: &[&str] = &["n", "k", "mu", "parity"];
const MAP_HEADER: &[&str] = &["b", "tau", "zeta", "margin", "stable"];
const TIMESERIES_HEADER: &[&str] = &["t", "distance", "energy", "control_norm", "field_norm"];
const SNAPSHOT_HEADER: &[&str] = &["n", "s", "re_u", "im_u"];

/// Writes `header` explicitly so that files without rows still reload.
fn to_csv<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<String, IoError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Format(e.to_string()))
}

fn from_csv<R: DeserializeOwned>(text: &str, header: &[&str]) -> Result<Vec<R>, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(IoError::Csv { line: 1, message: format!("expected header `{}`, got `{}`", header.join(","), found.join(",")) });
    }
    r.deserialize().map(|row| row.map_err(IoError::from)).collect()
}

// ---------------------------------------------------------------- profiles

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct ProfileRow {
    s: f64,
    re_u: f64,
    im_u: f64,
}

/// Everything besides the values that is needed to rebuild a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileMeta {
    pub m: u32,
    pub j: u32,
    pub lambda: f64,
    pub eta: f64,
    pub beta: f64,
    pub omega: f64,
    /// Number of radial nodes.
    pub nodes: usize,
    /// `disk`, `sphere` or `custom`.
    pub surface: String,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Surface samples for custom surfaces, relative to the metadata file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface_file: Option<String>,
}

impl ProfileMeta {
    pub fn of(profile: &SpiralProfile) -> Self {
        let d = profile.domain();
        Self {
            m: profile.m,
            j: profile.j,
            lambda: profile.lambda,
            eta: profile.eta,
            beta: profile.beta,
            omega: profile.omega,
            nodes: d.grid().len(),
            surface: d.surface().kind().name().to_owned(),
            alpha1: d.bc().alpha1(),
            alpha2: d.bc().alpha2(),
            surface_file: None,
        }
    }

    /// Rebuilds the domain; custom surfaces need `custom`.
    pub fn domain(&self, custom: Option<SurfaceSpec>) -> Result<Domain, crate::Error> {
        let surface = match (self.surface.as_str(), custom) {
            ("disk", _) => SurfaceSpec::disk(),
            ("sphere", _) => SurfaceSpec::sphere(),
            ("custom", Some(s)) => s,
            ("custom", None) => return Err(IoError::Format("custom surface without surface samples".into()).into()),
            (other, _) => return Err(IoError::Format(format!("unknown surface kind `{other}`")).into()),
        };
        let bc = BoundaryCondition::new(self.alpha1, self.alpha2)?;
        Ok(Domain::new(surface, bc, self.nodes)?)
    }
}

pub fn profile_to_csv(profile: &SpiralProfile) -> Result<String, IoError> {
    let s = profile.domain().grid().nodes();
    to_csv(PROFILE_HEADER, s.iter().zip(&profile.u).map(|(&s, u)| ProfileRow { s, re_u: u.re, im_u: u.im }))
}

fn check_nodes(grid: &RadialGrid, s: &[f64]) -> Result<(), IoError> {
    if s.len() != grid.len() {
        return Err(IoError::Format(format!("file has {} nodes, grid has {}", s.len(), grid.len())));
    }
    for (i, (a, b)) in s.iter().zip(grid.nodes()).enumerate() {
        if (a - b).abs() > NODE_TOL * grid.s_star() {
            return Err(IoError::Format(format!("node {i} at s = {a} does not match grid node {b}")));
        }
    }
    Ok(())
}

/// Parses profile CSV text against an already built domain.
pub fn profile_from_csv(text: &str, meta: &ProfileMeta, domain: Arc<Domain>) -> Result<SpiralProfile, crate::Error> {
    let rows: Vec<ProfileRow> = from_csv(text, PROFILE_HEADER)?;
    let s: Vec<f64> = rows.iter().map(|r| r.s).collect();
    check_nodes(domain.grid(), &s)?;
    let u = rows.iter().map(|r| Complex64::new(r.re_u, r.im_u)).collect();
    Ok(SpiralProfile::from_parts(domain, meta.m, meta.j, meta.lambda, meta.eta, meta.beta, meta.omega, u)?)
}

/// Metadata path belonging to a profile CSV path.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `path` and its metadata file; custom surfaces also get a
/// `<stem>.surface.csv`.
pub fn write_profile(path: &Path, profile: &SpiralProfile) -> Result<(), IoError> {
    let mut meta = ProfileMeta::of(profile);
    if profile.domain().surface().kind() == SurfaceKind::Custom {
        let surface = path.with_extension("surface.csv");
        write_text(&surface, &profile.domain().surface().to_csv())?;
        meta.surface_file = surface.file_name().map(|f| f.to_string_lossy().into_owned());
    }
    write_text(path, &profile_to_csv(profile)?)?;
    let json = serde_json::to_string_pretty(&meta).map_err(|e| IoError::Json(e.to_string()))?;
    write_text(&meta_path(path), &(json + "\n"))
}

pub fn read_profile_meta(csv_path: &Path) -> Result<ProfileMeta, IoError> {
    serde_json::from_str(&read_text(&meta_path(csv_path))?).map_err(|e| IoError::Json(e.to_string()))
}

pub fn read_surface(path: &Path) -> Result<SurfaceSpec, crate::Error> {
    Ok(SurfaceSpec::from_csv(&read_text(path)?)?)
}

/// Reads a profile written by [`write_profile`].
pub fn read_profile(path: &Path) -> Result<SpiralProfile, crate::Error> {
    let meta = read_profile_meta(path)?;
    let custom = match &meta.surface_file {
        Some(f) => Some(read_surface(&path.parent().unwrap_or(Path::new(".")).join(f))?),
        None => None,
    };
    let domain = Arc::new(meta.domain(custom)?);
    profile_from_csv(&read_text(path)?, &meta, domain)
}

// ---------------------------------------------------------------- spectra

/// One eigenvalue of one Fourier mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub n: i64,
    /// Position in the descending list.
    pub k: usize,
    pub mu: f64,
    /// `even`, `odd`, or empty when unknown.
    pub parity: String,
}

fn parity_name(p: Option<Parity>) -> &'static str {
    match p {
        Some(Parity::Even) => "even",
        Some(Parity::Odd) => "odd",
        None => "",
    }
}

pub fn spectrum_rows(report: &SpectrumReport) -> Vec<SpectrumRow> {
    let mut rows = Vec::new();
    for sp in &report.spectra {
        for (k, &mu) in sp.eigenvalues.iter().enumerate() {
            let parity = sp.parities.as_ref().and_then(|p| p.get(k).copied().flatten());
            rows.push(SpectrumRow { n: sp.n, k, mu, parity: parity_name(parity).to_owned() });
        }
    }
    rows
}

pub fn spectrum_to_csv(rows: &[SpectrumRow]) -> Result<String, IoError> {
    to_csv(SPECTRUM_HEADER, rows)
}

pub fn spectrum_from_csv(text: &str) -> Result<Vec<SpectrumRow>, IoError> {
    let rows: Vec<SpectrumRow> = from_csv(text, SPECTRUM_HEADER)?;
    if let Some(r) = rows.iter().find(|r| !matches!(r.parity.as_str(), "" | "even" | "odd")) {
        return Err(IoError::Format(format!("unknown parity `{}`", r.parity)));
    }
    Ok(rows)
}

// ---------------------------------------------------------------- stability maps

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapRow {
    pub b: f64,
    pub tau: f64,
    pub zeta: f64,
    pub margin: f64,
    pub stable: bool,
}

pub fn map_to_csv(rows: &[MapRow]) -> Result<String, IoError> {
    to_csv(MAP_HEADER, rows)
}

pub fn map_from_csv(text: &str) -> Result<Vec<MapRow>, IoError> {
    from_csv(text, MAP_HEADER)
}

// ---------------------------------------------------------------- simulation output

pub fn timeseries_to_csv(samples: &[Sample]) -> Result<String, IoError> {
    to_csv(TIMESERIES_HEADER, samples)
}

pub fn timeseries_from_csv(text: &str) -> Result<Vec<Sample>, IoError> {
    from_csv(text, TIMESERIES_HEADER)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct SnapshotRow {
    n: i64,
    s: f64,
    re_u: f64,
    im_u: f64,
}

/// All Fourier modes of a field, mode by mode from `-n_max` to `n_max`.
pub fn snapshot_to_csv(state: &FieldState, grid: &RadialGrid) -> Result<String, IoError> {
    if state.nodes() != grid.len() {
        return Err(IoError::Format(format!("state has {} nodes, grid has {}", state.nodes(), grid.len())));
    }
    let n = state.n_max() as i64;
    let rows = (-n..=n).flat_map(|k| {
        grid.nodes().iter().zip(state.mode(k)).map(move |(&s, c)| SnapshotRow { n: k, s, re_u: c.re, im_u: c.im })
    });
    to_csv(SNAPSHOT_HEADER, rows)
}

/// Inverse of [`snapshot_to_csv`]; the time stamp is set to `t`.
pub fn snapshot_from_csv(text: &str, grid: &RadialGrid, t: f64) -> Result<FieldState, IoError> {
    let rows: Vec<SnapshotRow> = from_csv(text, SNAPSHOT_HEADER)?;
    let nodes = grid.len();
    if nodes == 0 || !rows.len().is_multiple_of(nodes) || (rows.len() / nodes).is_multiple_of(2) {
        return Err(IoError::Format(format!("{} rows do not form an odd number of {nodes}-node blocks", rows.len())));
    }
    let n_max = (rows.len() / nodes - 1) / 2;
    let mut state = FieldState::zeros(n_max, nodes);
    state.t = t;
    for (b, block) in rows.chunks(nodes).enumerate() {
        let k = b as i64 - n_max as i64;
        if let Some(r) = block.iter().find(|r| r.n != k) {
            return Err(IoError::Format(format!("expected mode {k} in block {b}, found {}", r.n)));
        }
        let s: Vec<f64> = block.iter().map(|r| r.s).collect();
        check_nodes(grid, &s)?;
        for (c, r) in state.mode_mut(k).iter_mut().zip(block) {
            *c = Complex64::new(r.re_u, r.im_u);
        }
    }
    Ok(state)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), IoError> {
    write_text(path, text)
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    read_text(path)
}
