//! Time integration of the controlled Ginzburg–Landau equation
//!
//! ```text
//! ∂t Ψ = (1 + iη) ΔΨ + λ (1 - (1 + iβ)|Ψ|²) Ψ + b (Ψ - h S[Ψ(t - τ)])
//! ```
//!
//! in azimuthal Fourier modes on the radial grid. The linear part is
//! implicit per mode and the cubic term and delayed feedback are explicit
//! (ARS(2,2,2) IMEX Runge–Kutta). Integration runs in a frame rotating with
//! the target wave, where the target is stationary.

mod spectral;
mod stepper;

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::control::{ControlError, ControlTriple, Reflection};
use crate::discretization::{DiscretizationError, Domain, RadialGrid};
use crate::exec::Exec;
use crate::profile::SpiralProfile;
use crate::spectrum::ModeEigenvector;

pub use spectral::Azimuthal;
pub use stepper::{Feedback, Sample, SimulationSettings, Simulator, IMEX_GAMMA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulatorError {
    #[error("delay history holds {available} of {needed} snapshots")]
    HistoryCold { needed: usize, available: usize },
    #[error("field norm {norm} exceeded the blow-up guard at t = {t}")]
    BlowupDetected { t: f64, norm: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid simulation settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Control(#[from] ControlError),
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Fourier coefficients `c_k(s_i)`, `|k| ≤ n_max`, of `Ψ(s, φ) = Σ c_k(s) e^{ikφ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    n_max: usize,
    nodes: usize,
    modes: Vec<Vec<Complex64>>,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(n_max: usize, nodes: usize) -> Self {
        Self { n_max, nodes, modes: vec![vec![zero(); nodes]; 2 * n_max + 1], t: 0.0 }
    }

    /// `e^{imφ} u(s)` for the profile's own winding number `m`.
    pub fn from_profile(profile: &SpiralProfile, n_max: usize) -> Result<Self, SimulatorError> {
        if profile.m as usize > n_max {
            return Err(SimulatorError::GridMismatch(format!("winding number {} exceeds n_max = {n_max}", profile.m)));
        }
        let mut s = Self::zeros(n_max, profile.u.len());
        s.mode_mut(profile.m as i64).copy_from_slice(&profile.u);
        Ok(s)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    fn index(&self, k: i64) -> usize {
        assert!(k.unsigned_abs() as usize <= self.n_max, "mode {k} outside ±{}", self.n_max);
        (k + self.n_max as i64) as usize
    }

    pub fn mode(&self, k: i64) -> &[Complex64] {
        &self.modes[self.index(k)]
    }

    pub fn mode_mut(&mut self, k: i64) -> &mut [Complex64] {
        let i = self.index(k);
        &mut self.modes[i]
    }

    /// Modes in order `-n_max..=n_max`.
    pub fn modes(&self) -> &[Vec<Complex64>] {
        &self.modes
    }

    pub(crate) fn modes_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.modes
    }

    pub fn same_shape(&self, other: &FieldState) -> bool {
        self.n_max == other.n_max && self.nodes == other.nodes
    }

    /// `⟨self, other⟩ = ∫ conj(self) other dA` (the radial weights carry
    /// the azimuthal `2π`).
    pub fn inner(&self, other: &FieldState, weights: &[f64]) -> Complex64 {
        let mut acc = zero();
        for (a, b) in self.modes.iter().zip(&other.modes) {
            for ((x, y), w) in a.iter().zip(b).zip(weights) {
                acc += w * x.conj() * y;
            }
        }
        acc
    }

    pub fn norm(&self, weights: &[f64]) -> f64 {
        self.inner(self, weights).re.max(0.0).sqrt()
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.modes.iter_mut().flatten().for_each(|z| *z *= factor);
    }

    /// `self += factor · other`.
    pub fn axpy(&mut self, factor: Complex64, other: &FieldState) {
        for (a, b) in self.modes.iter_mut().zip(&other.modes) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += factor * y;
            }
        }
    }

    pub fn gauge_rotated(&self, omega: f64) -> Self {
        let mut s = self.clone();
        s.scale(Complex64::from_polar(1.0, omega));
        s
    }

    /// The spatial shift `S`: mode `k` times `e^{-ikζ}`, composed with the
    /// radial reversal when `reflect` is set.
    pub fn shifted(&self, zeta: f64, reflect: bool) -> Self {
        let mut s = self.clone();
        let n = self.n_max as i64;
        for k in -n..=n {
            let phase = Complex64::from_polar(1.0, -(k as f64) * zeta);
            let c = s.mode_mut(k);
            if reflect {
                c.reverse();
            }
            c.iter_mut().for_each(|z| *z *= phase);
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.modes.iter().flatten().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.modes.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Past states `(u_k, U_k)` at step starts and at the internal stage time,
/// oldest first, for a delay of `depth` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayHistory {
    depth: usize,
    entries: VecDeque<(FieldState, FieldState)>,
}

impl DelayHistory {
    pub fn new(depth: usize) -> Self {
        Self { depth, entries: VecDeque::with_capacity(depth + 1) }
    }

    /// History sampled on the orbit `e^{i frequency t} target` for the
    /// `depth` steps preceding `t_now`; stage samples are taken
    /// `stage_offset` after each step start.
    pub fn from_orbit(target: &FieldState, frequency: f64, t_now: f64, dt: f64, depth: usize, stage_offset: f64) -> Self {
        let mut h = Self::new(depth);
        for k in (1..=depth).rev() {
            let t = t_now - k as f64 * dt;
            let mut u = target.gauge_rotated(frequency * t);
            u.t = t;
            let mut stage = target.gauge_rotated(frequency * (t + stage_offset));
            stage.t = t + stage_offset;
            h.push(u, stage);
        }
        h
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_warm(&self) -> bool {
        self.entries.len() >= self.depth
    }

    /// Entry from `depth` steps ago, or `None` for an undelayed control.
    pub fn delayed(&self) -> Result<Option<&(FieldState, FieldState)>, SimulatorError> {
        if self.depth == 0 {
            return Ok(None);
        }
        if !self.is_warm() {
            return Err(SimulatorError::HistoryCold { needed: self.depth, available: self.entries.len() });
        }
        Ok(self.entries.front())
    }

    pub fn push(&mut self, state: FieldState, stage: FieldState) {
        if self.depth == 0 {
            return;
        }
        self.entries.push_back((state, stage));
        while self.entries.len() > self.depth {
            self.entries.pop_front();
        }
    }

    pub fn rotate(&mut self, omega: f64) {
        let f = Complex64::from_polar(1.0, omega);
        for (a, b) in &mut self.entries {
            a.scale(f);
            b.scale(f);
        }
    }
}

fn check_grid(state: &FieldState, domain: &Domain) -> Result<(), SimulatorError> {
    if state.nodes() != domain.grid().len() {
        return Err(SimulatorError::GridMismatch(format!(
            "state has {} radial nodes, grid has {}",
            state.nodes(),
            domain.grid().len()
        )));
    }
    Ok(())
}

/// `(1 + iη) ΔΨ + λ (1 - (1 + iβ)|Ψ|²) Ψ` in mode space.
pub fn rhs_uncontrolled(state: &FieldState, domain: &Domain, lambda: f64, eta: f64, beta: f64) -> Result<FieldState, SimulatorError> {
    check_grid(state, domain)?;
    let nl = Complex64::new(1.0, beta);
    let cubic = Azimuthal::new(state.n_max()).pointwise(state, Exec::Sequential, |z| -lambda * nl * z.norm_sqr() * z);
    let kin = Complex64::new(1.0, eta);
    let n = state.n_max() as i64;
    let mut out = FieldState::zeros(state.n_max(), state.nodes());
    out.t = state.t;
    for k in -n..=n {
        let lap = domain.laplacian(k)?;
        let lc = lap.apply(state.mode(k));
        let c = state.mode(k);
        for (i, o) in out.mode_mut(k).iter_mut().enumerate() {
            *o = kin * lc[i] + lambda * c[i] + cubic[i][(k + n) as usize];
        }
    }
    Ok(out)
}

/// `b (Ψ - h S[Ψ(t - τ)])` with the delayed state taken from `history`
/// (the current state itself when the history has depth zero).
pub fn apply_control(state: &FieldState, history: &DelayHistory, triple: &ControlTriple, b: f64) -> Result<FieldState, SimulatorError> {
    let delayed = match history.delayed()? {
        Some((u, _)) => u,
        None => state,
    };
    if !delayed.same_shape(state) {
        return Err(SimulatorError::GridMismatch("history and state differ in shape".into()));
    }
    let mut out = state.clone();
    let shifted = delayed.shifted(triple.zeta, triple.iota == Reflection::Minus);
    out.axpy(-triple.h, &shifted);
    out.scale(Complex64::new(b, 0.0));
    Ok(out)
}

/// `min_ω ‖Ψ - e^{iω} T‖` for the target `T = e^{imφ} u`; the minimiser is
/// `ω = arg ⟨T, Ψ⟩`. The orbit of a rotating wave is its gauge orbit, so
/// the result does not depend on time.
pub fn distance_to_orbit(state: &FieldState, profile: &SpiralProfile) -> Result<f64, SimulatorError> {
    check_grid(state, profile.domain())?;
    let target = FieldState::from_profile(profile, state.n_max())?;
    Ok(distance_to_target(state, &target, profile.domain().grid().weights()))
}

pub(crate) fn distance_to_target(state: &FieldState, target: &FieldState, weights: &[f64]) -> f64 {
    let phase = target.inner(state, weights).arg();
    let mut d = state.clone();
    d.axpy(-Complex64::from_polar(1.0, phase), target);
    d.norm(weights)
}

/// `∫ |∇Ψ|² - λ (|Ψ|² - |Ψ|⁴/2) dA`, plus `(α1/α2) ∮ |Ψ|²` for Robin
/// conditions (carried by the boundary closure of the discrete Laplacian).
pub fn energy(state: &FieldState, domain: &Domain, lambda: f64, exec: Exec) -> Result<f64, SimulatorError> {
    check_grid(state, domain)?;
    let w = domain.grid().weights();
    let n = state.n_max() as i64;
    let mut gradient = 0.0;
    for k in -n..=n {
        let lap = domain.laplacian(k)?;
        let c = state.mode(k);
        let lc = lap.apply(c);
        gradient -= c.iter().zip(&lc).zip(w).map(|((x, y), w)| w * (x.conj() * y).re).sum::<f64>();
    }
    let potential = Azimuthal::new(state.n_max()).integrate(state, w, exec, |z| {
        let r = z.norm_sqr();
        r - 0.5 * r * r
    });
    Ok(gradient - lambda * potential)
}

/// Unit-norm perturbation along the eigenvector `(p, iq)` of the
/// mode-`n` linearisation (`n ≥ 0`): `(p - q) e^{i(m+n)φ} + (p + q) e^{i(m-n)φ}`,
/// or `(p + iq) e^{imφ}` for `n = 0`.
pub fn eigenvector_perturbation(profile: &SpiralProfile, n_max: usize, n: i64, v: &ModeEigenvector) -> Result<FieldState, SimulatorError> {
    let m = profile.m as i64;
    if n < 0 || (m + n) as usize > n_max || (m - n).unsigned_abs() as usize > n_max {
        return Err(SimulatorError::GridMismatch(format!("modes {}..{} exceed n_max = {n_max}", m - n, m + n)));
    }
    let nodes = profile.u.len();
    if v.p.len() != nodes || v.q.len() != nodes {
        return Err(SimulatorError::GridMismatch("eigenvector length differs from the grid".into()));
    }
    let mut s = FieldState::zeros(n_max, nodes);
    if n == 0 {
        for (i, c) in s.mode_mut(m).iter_mut().enumerate() {
            *c = Complex64::new(v.p[i], v.q[i]);
        }
    } else {
        for (i, c) in s.mode_mut(m + n).iter_mut().enumerate() {
            *c = Complex64::new(v.p[i] - v.q[i], 0.0);
        }
        for (i, c) in s.mode_mut(m - n).iter_mut().enumerate() {
            *c = Complex64::new(v.p[i] + v.q[i], 0.0);
        }
    }
    let norm = s.norm(profile.domain().grid().weights());
    s.scale(Complex64::new(1.0 / norm, 0.0));
    Ok(s)
}

/// Seeded smooth random field of unit norm on modes `|k| ≤ k_max`. Mode `k`
/// carries the factor `(a/a_max)^{|k|}` so it is regular at the pole.
pub fn random_smooth_field(n_max: usize, k_max: usize, grid: &RadialGrid, seed: u64) -> FieldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radii = grid.radii();
    let a_max = radii.iter().fold(0.0f64, |m, &a| m.max(a));
    let s_star = grid.s_star();
    let mut state = FieldState::zeros(n_max, grid.len());
    let kk = k_max.min(n_max) as i64;
    for k in -kk..=kk {
        let coeffs: Vec<Complex64> = (0..4).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let decay = 1.0 / (1.0 + k.abs() as f64);
        for (i, c) in state.mode_mut(k).iter_mut().enumerate() {
            let s = grid.nodes()[i];
            let envelope = (radii[i] / a_max).powi(k.abs() as i32);
            let series: Complex64 = coeffs.iter().enumerate().map(|(l, r)| r * (l as f64 * std::f64::consts::PI * s / s_star).cos()).sum();
            *c = decay * envelope * series;
        }
    }
    let norm = state.norm(grid.weights());
    state.scale(Complex64::new(1.0 / norm, 0.0));
    state
}
