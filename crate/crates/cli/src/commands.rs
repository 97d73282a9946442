//! The subcommands. Each one builds the profile described by the
//! configuration, does its analysis, writes its files and returns the lines
//! to print.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use glspiral::control::{
    admissible_shifts, find_b_threshold_with_cutoff, find_tau_threshold, stability_verdict, ControlTriple, Reflection, TauSettings,
    VerdictSettings,
};
use glspiral::discretization::Domain;
use glspiral::geometry::{BoundaryCondition, SurfaceSpec};
use glspiral::io::{self, MapRow};
use glspiral::profile::{bifurcation_values, continue_rotating_wave, solve_vortex_equilibrium, ContinuationSettings, SpiralProfile};
use glspiral::simulator::{eigenvector_perturbation, random_smooth_field, Feedback, FieldState, SimulationSettings, Simulator};
use glspiral::spectrum::{unstable_report, SpectrumReport, SpectrumSettings};
use glspiral::Exec;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Format, RunConfig, SurfaceKind};
use crate::error::CliError;
use crate::render::render_svg;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Profile,
    Spectrum,
    Verdict,
    Thresholds,
    Sweep,
    Simulate { free: bool },
    Render,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Spectrum => "spectrum",
            Command::Verdict => "verdict",
            Command::Thresholds => "thresholds",
            Command::Sweep => "sweep",
            Command::Simulate { .. } => "simulate",
            Command::Render => "render",
        }
    }
}

/// Everything a command needs besides its own arguments.
pub struct Context {
    pub config: RunConfig,
    /// Verbatim configuration, echoed into the manifest.
    pub config_text: String,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Stored profile to use instead of solving for one.
    pub profile_file: Option<PathBuf>,
    pub exec: Exec,
}

/// Printed lines and written files of one command.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key} = {value}"));
    }
}

impl Context {
    fn spectrum_settings(&self) -> SpectrumSettings {
        SpectrumSettings { count: self.config.numerics.eigen_count, exec: self.exec, ..Default::default() }
    }

    fn verdict_settings(&self) -> VerdictSettings {
        VerdictSettings { exec: self.exec, ..Default::default() }
    }

    fn iota(&self) -> Reflection {
        self.config.control.map(|c| c.iota).unwrap_or_default()
    }

    fn domain(&self) -> Result<Domain, CliError> {
        let c = &self.config;
        let surface = match c.surface.kind {
            SurfaceKind::Disk => SurfaceSpec::disk(),
            SurfaceKind::Sphere => SurfaceSpec::sphere(),
            SurfaceKind::Custom => {
                let file = c.surface.file.as_deref().ok_or_else(|| CliError::Usage("custom surface without file".into()))?;
                io::read_surface(&c.resolve(file))?
            }
        };
        let bc = BoundaryCondition::new(c.bc.alpha1, c.bc.alpha2).map_err(glspiral::Error::from)?;
        Ok(Domain::new(surface, bc, c.numerics.nodes).map_err(glspiral::Error::from)?)
    }

    /// The vortex equilibrium and, for nonzero kinetic parameters, the
    /// rotating wave continued from it.
    fn profiles(&self) -> Result<(SpiralProfile, SpiralProfile), CliError> {
        if let Some(path) = &self.profile_file {
            let stored = io::read_profile(path)?;
            if stored.is_variational() {
                return Ok((stored.clone(), stored));
            }
            let vortex = solve_vortex_equilibrium(stored.domain().clone(), stored.m, stored.j, stored.lambda, &ContinuationSettings::default())
                .map_err(glspiral::Error::from)?;
            return Ok((vortex, stored));
        }
        let p = &self.config.physics;
        let domain = Arc::new(self.domain()?);
        let lambda = match (p.lambda, p.lambda_factor) {
            (Some(l), _) => l,
            (None, Some(f)) => {
                let values = bifurcation_values(&domain, p.m, p.j as usize + 1).map_err(glspiral::Error::from)?;
                f * values[p.j as usize]
            }
            (None, None) => return Err(CliError::Usage("lambda or lambda_factor is required".into())),
        };
        let settings = ContinuationSettings::default();
        let vortex = solve_vortex_equilibrium(domain, p.m, p.j, lambda, &settings).map_err(glspiral::Error::from)?;
        let wave = if p.eta == 0.0 && p.beta == 0.0 {
            vortex.clone()
        } else {
            continue_rotating_wave(&vortex, p.eta, p.beta, &settings).map_err(glspiral::Error::from)?
        };
        Ok((vortex, wave))
    }

    /// Spatial shift, gain and a spectral report covering that gain. Missing
    /// control values fall back to the best shift and the threshold gain.
    fn control(&self, vortex: &SpiralProfile, min_gain: Option<f64>) -> Result<ControlChoice, CliError> {
        let settings = self.spectrum_settings();
        let mut b_min = self.config.numerics.b_min;
        if let Some(g) = min_gain {
            b_min = b_min.min(g);
        }
        let scan = unstable_report(vortex, b_min, &settings).map_err(glspiral::Error::from)?;
        let modes: Vec<i64> = scan.unstable.iter().filter(|u| u.1 >= -1e-7).map(|u| u.0).collect();
        let zeta = match self.config.control.and_then(|c| c.zeta) {
            Some(z) => z,
            None => admissible_shifts(&modes, vortex.j).best().0,
        };
        let (b_tilde, mut report) = find_b_threshold_with_cutoff(vortex, zeta, self.iota(), b_min, &settings)?;
        let b = self.config.control.and_then(|c| c.b).unwrap_or(b_tilde);
        if b < report.b_min {
            report = unstable_report(vortex, b, &settings).map_err(glspiral::Error::from)?;
        }
        Ok(ControlChoice { zeta, b, b_tilde, report })
    }

    fn write(&self, outcome: &mut Outcome, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        io::write_file(&path, text)?;
        outcome.files.push(path);
        Ok(())
    }

    fn wants_csv(&self) -> bool {
        self.config.wants(Format::Csv)
    }
}

struct ControlChoice {
    zeta: f64,
    b: f64,
    b_tilde: f64,
    report: SpectrumReport,
}

fn note_vortex(outcome: &mut Outcome, wave: &SpiralProfile) {
    if !wave.is_variational() {
        outcome.line("spectral_data", "vortex equilibrium at the same lambda");
    }
}

fn profile(ctx: &Context) -> Result<Outcome, CliError> {
    let (_, wave) = ctx.profiles()?;
    let mut out = Outcome::default();
    out.line("lambda", wave.lambda);
    out.line("omega", wave.omega);
    out.line("residual", format!("{:.3e}", wave.residual().map_err(glspiral::Error::from)?));
    out.line("nodes", wave.u.len());
    if ctx.wants_csv() {
        let path = ctx.out_dir.join("profile.csv");
        io::write_profile(&path, &wave)?;
        out.files.push(path.clone());
        out.files.push(io::meta_path(&path));
        if wave.domain().surface().kind() == glspiral::geometry::SurfaceKind::Custom {
            out.files.push(path.with_extension("surface.csv"));
        }
    }
    if ctx.config.wants(Format::Svg) {
        ctx.write(&mut out, "profile.svg", &render_svg(&wave, ctx.config.numerics.render_time))?;
    }
    Ok(out)
}

fn spectrum(ctx: &Context) -> Result<Outcome, CliError> {
    let (vortex, wave) = ctx.profiles()?;
    let report = unstable_report(&vortex, ctx.config.numerics.b_min, &ctx.spectrum_settings()).map_err(glspiral::Error::from)?;
    let mut out = Outcome::default();
    note_vortex(&mut out, &wave);
    out.line("n_cut", report.n_cut);
    out.line("mu_star", report.mu_star);
    out.line("zero_modes", report.zero_mode_multiplicity);
    let unstable: Vec<String> = report.unstable.iter().filter(|u| u.0 >= 0 && u.1 > 0.0).map(|(n, mu)| format!("{n}:{mu:.6}")).collect();
    out.line("unstable", if unstable.is_empty() { "none".to_owned() } else { unstable.join(" ") });
    if ctx.wants_csv() {
        ctx.write(&mut out, "spectrum.csv", &io::spectrum_to_csv(&io::spectrum_rows(&report))?)?;
    }
    Ok(out)
}

fn verdict(ctx: &Context) -> Result<Outcome, CliError> {
    let (vortex, wave) = ctx.profiles()?;
    let choice = ctx.control(&vortex, ctx.config.control.and_then(|c| c.b))?;
    let tau = ctx.config.control.map_or(0.0, |c| c.tau);
    let triple = ControlTriple::noninvasive(&vortex, tau, choice.zeta, ctx.iota()).map_err(glspiral::Error::from)?;
    let v = stability_verdict(&vortex, &triple, choice.b, &choice.report, &ctx.verdict_settings()).map_err(glspiral::Error::from)?;
    let mut out = Outcome::default();
    note_vortex(&mut out, &wave);
    out.line("b", choice.b);
    out.line("tau", tau);
    out.line("zeta", choice.zeta);
    out.line("iota", ctx.iota().name());
    out.line("margin", v.margin);
    out.line("margin_is_bound", v.margin_is_bound);
    out.line("simple_zero", v.simple_zero);
    out.line("coverage_ok", v.coverage_ok);
    out.line("stable", v.stable());
    if ctx.wants_csv() {
        let row = MapRow { b: choice.b, tau, zeta: choice.zeta, margin: v.margin, stable: v.stable() };
        ctx.write(&mut out, "verdict.csv", &io::map_to_csv(&[row])?)?;
    }
    Ok(out)
}

fn thresholds(ctx: &Context) -> Result<Outcome, CliError> {
    let (vortex, wave) = ctx.profiles()?;
    let choice = ctx.control(&vortex, ctx.config.control.and_then(|c| c.b))?;
    let settings = TauSettings { tol: ctx.config.numerics.tau_tol, verdict: ctx.verdict_settings(), ..Default::default() };
    let tau = find_tau_threshold(&vortex, choice.zeta, ctx.iota(), choice.b, &choice.report, &settings).map_err(glspiral::Error::from)?;
    let mut out = Outcome::default();
    note_vortex(&mut out, &wave);
    out.line("zeta", choice.zeta);
    out.line("b_tilde", choice.b_tilde);
    out.line("b", choice.b);
    out.line("margin_at_zero_delay", tau.margin_at_zero);
    out.line("tau_lower_bound", tau.tau_lower_bound);
    // The bound assumes every retained mode sees a real shift factor.
    let real_shift = choice.report.spectra.iter().all(|s| (s.n as f64 * choice.zeta).sin().abs() < 1e-9);
    out.line("tau_lower_bound_applies", real_shift);
    out.line("tau_tilde", tau.tau_tilde);
    out.line("tau_crossed", tau.crossed);
    Ok(out)
}

fn sweep(ctx: &Context) -> Result<Outcome, CliError> {
    let grid = ctx.config.sweep.clone().ok_or_else(|| CliError::Validation {
        field: "sweep".into(),
        line: None,
        message: "the sweep command needs a [sweep] section".into(),
    })?;
    let (vortex, wave) = ctx.profiles()?;
    let b_low = grid.b.iter().copied().fold(ctx.config.numerics.b_min, f64::min);
    let report = unstable_report(&vortex, b_low, &ctx.spectrum_settings()).map_err(glspiral::Error::from)?;
    let mut jobs: Vec<(f64, f64, f64)> = Vec::with_capacity(grid.b.len() * grid.tau.len() * grid.zeta.len());
    for &b in &grid.b {
        for &tau in &grid.tau {
            jobs.extend(grid.zeta.iter().map(|&zeta| (b, tau, zeta)));
        }
    }
    let iota = ctx.iota();
    // Jobs run in parallel; each verdict runs sequentially inside its job.
    let settings = VerdictSettings { exec: Exec::Sequential, ..Default::default() };
    let run = |&(b, tau, zeta): &(f64, f64, f64)| -> Result<MapRow, glspiral::Error> {
        let triple = ControlTriple::noninvasive(&vortex, tau, zeta, iota)?;
        let v = stability_verdict(&vortex, &triple, b, &report, &settings)?;
        Ok(MapRow { b, tau, zeta, margin: v.margin, stable: v.stable() })
    };
    let rows: Vec<MapRow> = if ctx.exec.is_parallel() {
        jobs.par_iter().map(run).collect::<Result<_, _>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_, _>>()?
    };
    let mut out = Outcome::default();
    note_vortex(&mut out, &wave);
    out.line("points", rows.len());
    out.line("stable_points", rows.iter().filter(|r| r.stable).count());
    if ctx.wants_csv() {
        ctx.write(&mut out, "map.csv", &io::map_to_csv(&rows)?)?;
    }
    Ok(out)
}

/// Target state plus a push along the fastest unstable eigenvector and
/// seeded smooth noise.
fn perturbed_start(ctx: &Context, wave: &SpiralProfile, report: &SpectrumReport) -> Result<FieldState, CliError> {
    let n = &ctx.config.numerics;
    let mut start = FieldState::from_profile(wave, n.n_max).map_err(glspiral::Error::from)?;
    let fastest = report.unstable.iter().filter(|u| u.0 >= 0).copied().max_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((mode, mu)) = fastest {
        let spectrum = report.spectrum(mode).ok_or_else(|| CliError::Usage(format!("no spectrum for mode {mode}")))?;
        let k = spectrum.eigenvalues.iter().position(|&x| x == mu).unwrap_or(0);
        let direction = eigenvector_perturbation(wave, n.n_max, mode, &spectrum.eigenvectors[k]).map_err(glspiral::Error::from)?;
        start.axpy(Complex64::new(n.perturbation, 0.0), &direction);
    }
    let noise = random_smooth_field(n.n_max, n.n_max, wave.domain().grid(), ctx.seed);
    start.axpy(Complex64::new(n.noise, 0.0), &noise);
    Ok(start)
}

fn simulate(ctx: &Context, free: bool) -> Result<Outcome, CliError> {
    let (vortex, wave) = ctx.profiles()?;
    let n = &ctx.config.numerics;
    let mut out = Outcome::default();
    note_vortex(&mut out, &wave);
    let (feedback, report) = if free {
        let report = unstable_report(&vortex, n.b_min, &ctx.spectrum_settings()).map_err(glspiral::Error::from)?;
        (None, report)
    } else {
        let choice = ctx.control(&vortex, ctx.config.control.and_then(|c| c.b))?;
        let tau = ctx.config.control.map_or(0.0, |c| c.tau);
        let triple = ControlTriple::noninvasive(&wave, tau, choice.zeta, ctx.iota()).map_err(glspiral::Error::from)?;
        out.line("b", choice.b);
        out.line("tau", tau);
        out.line("zeta", choice.zeta);
        (Some(Feedback { triple, b: choice.b }), choice.report)
    };
    let start = perturbed_start(ctx, &wave, &report)?;
    let settings = SimulationSettings { dt: n.dt, n_max: n.n_max, exec: ctx.exec, ..Default::default() };
    let mut sim = Simulator::new(&wave, start, feedback, &settings).map_err(glspiral::Error::from)?;
    let samples = sim.run(n.t_end, n.output_every).map_err(glspiral::Error::from)?;
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    out.line("controlled", !free);
    out.line("t_end", last.t);
    out.line("initial_distance", format!("{:.6e}", first.distance));
    out.line("final_distance", format!("{:.6e}", last.distance));
    out.line("distance_ratio", format!("{:.6e}", last.distance / first.distance));
    out.line("final_energy", last.energy);
    if ctx.wants_csv() {
        ctx.write(&mut out, "timeseries.csv", &io::timeseries_to_csv(&samples)?)?;
        ctx.write(&mut out, "snapshot.csv", &io::snapshot_to_csv(&sim.state(), wave.domain().grid())?)?;
    }
    Ok(out)
}

fn render(ctx: &Context) -> Result<Outcome, CliError> {
    let (_, wave) = ctx.profiles()?;
    let t = ctx.config.numerics.render_time;
    let mut out = Outcome::default();
    out.line("arms", 2 * wave.m);
    out.line("time", t);
    ctx.write(&mut out, "pattern.svg", &render_svg(&wave, t))?;
    Ok(out)
}

fn manifest(ctx: &Context, command: Command, outcome: &Outcome) -> String {
    let mut text = String::new();
    text.push_str(&format!("command = {}\n", command.name()));
    text.push_str(&format!("glspiral = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("seed = {}\n", ctx.seed));
    text.push_str(&format!("threads = {}\n", rayon::current_num_threads()));
    text.push_str(&format!("parallel = {}\n", ctx.exec.is_parallel()));
    for file in &outcome.files {
        let name = file.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        text.push_str(&format!("file = {name}\n"));
    }
    text.push_str("\n[results]\n");
    for line in &outcome.lines {
        text.push_str(line);
        text.push('\n');
    }
    text.push_str("\n[config]\n");
    text.push_str(&ctx.config_text);
    if !ctx.config_text.ends_with('\n') {
        text.push('\n');
    }
    text
}

/// Runs `command` and writes `manifest.txt` next to its outputs.
pub fn run(ctx: &Context, command: Command) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(&ctx.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", ctx.out_dir.display())))?;
    let mut outcome = match command {
        Command::Profile => profile(ctx),
        Command::Spectrum => spectrum(ctx),
        Command::Verdict => verdict(ctx),
        Command::Thresholds => thresholds(ctx),
        Command::Sweep => sweep(ctx),
        Command::Simulate { free } => simulate(ctx, free),
        Command::Render => render(ctx),
    }?;
    let path = ctx.out_dir.join("manifest.txt");
    io::write_file(&path, &manifest(ctx, command, &outcome))?;
    outcome.files.push(path);
    Ok(outcome)
}

/// Output directory: `--out` relative to the working directory, otherwise
/// `[output] directory` relative to the configuration file.
pub fn output_dir(config: &RunConfig, cli_out: Option<&Path>) -> PathBuf {
    match cli_out {
        Some(p) => p.to_path_buf(),
        None => config.resolve(&config.output.directory),
    }
}
