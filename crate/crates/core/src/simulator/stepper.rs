use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{distance_to_target, energy, Azimuthal, DelayHistory, FieldState, SimulatorError};
use crate::control::{ControlError, ControlTriple, Reflection};
use crate::discretization::{Domain, ModeLaplacian};
use crate::exec::Exec;
use crate::linalg::TridiagonalLu;
use crate::profile::SpiralProfile;

/// Implicit diagonal coefficient of the ARS(2,2,2) scheme.
pub const IMEX_GAMMA: f64 = 1.0 - FRAC_1_SQRT_2;
const IMEX_DELTA: f64 = 1.0 - 1.0 / (2.0 * IMEX_GAMMA);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationSettings {
    pub dt: f64,
    pub n_max: usize,
    /// Rotation rate of the computational frame; `None` co-rotates with the
    /// target wave.
    pub frame_omega: Option<f64>,
    /// Runs stop with `BlowupDetected` above this field norm.
    pub blowup_norm: f64,
    pub exec: Exec,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self { dt: 1e-3, n_max: 16, frame_omega: None, blowup_norm: 1e6, exec: Exec::Parallel }
    }
}

/// Control gain together with the triple it multiplies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feedback {
    pub triple: ControlTriple,
    pub b: f64,
}

/// Diagnostics at one output time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub distance: f64,
    pub energy: f64,
    pub control_norm: f64,
    pub field_norm: f64,
}

/// One controlled (or free) run from a given initial state.
#[derive(Clone, Debug)]
pub struct Simulator {
    domain: Arc<Domain>,
    lambda: f64,
    beta: f64,
    target: FieldState,
    frame_omega: f64,
    solvers: Vec<TridiagonalLu<Complex64>>,
    azimuthal: Azimuthal,
    dt: f64,
    feedback: Option<Feedback>,
    delay_steps: usize,
    /// `h e^{iΩ_f τ}`: the delayed-term factor seen in the rotating frame.
    delayed_factor: Complex64,
    history: DelayHistory,
    state: FieldState,
    steps: u64,
    blowup_norm: f64,
    exec: Exec,
}

impl Simulator {
    /// Starts at `t = 0` from `initial` (lab frame). The delay is rounded to
    /// a whole number of steps; a noninvasive triple is rebuilt for the
    /// rounded delay. The history is warmed up with target-orbit samples.
    pub fn new(
        profile: &SpiralProfile,
        initial: FieldState,
        feedback: Option<Feedback>,
        settings: &SimulationSettings,
    ) -> Result<Self, SimulatorError> {
        let dt = settings.dt;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimulatorError::InvalidSettings(format!("time step {dt} must be positive")));
        }
        let target = FieldState::from_profile(profile, settings.n_max)?;
        if !initial.same_shape(&target) {
            return Err(SimulatorError::GridMismatch(format!(
                "initial state has n_max {} and {} nodes, expected {} and {}",
                initial.n_max(),
                initial.nodes(),
                target.n_max(),
                target.nodes()
            )));
        }
        let domain = profile.domain().clone();
        let frame_omega = settings.frame_omega.unwrap_or(profile.omega);

        let mut delay_steps = 0;
        let feedback = match feedback {
            Some(fb) => {
                delay_steps = (fb.triple.tau / dt).round() as usize;
                let tau = delay_steps as f64 * dt;
                let t = &fb.triple;
                if t.iota == Reflection::Minus && !domain.grid().reflection_symmetric() {
                    return Err(ControlError::IotaUnsupported("the grid is not reflection symmetric".into()).into());
                }
                let triple = if t.ensure_noninvasive(profile).is_ok() {
                    ControlTriple::noninvasive(profile, tau, t.zeta, t.iota)?
                } else {
                    ControlTriple { tau, ..*t }
                };
                Some(Feedback { triple, b: fb.b })
            }
            None => None,
        };
        let b = feedback.map_or(0.0, |f| f.b);
        let delayed_factor = feedback.map_or(Complex64::new(0.0, 0.0), |f| {
            f.triple.h * Complex64::from_polar(1.0, frame_omega * f.triple.tau)
        });

        let kin = Complex64::new(1.0, profile.eta);
        let shift = Complex64::new(profile.lambda + b, frame_omega);
        let gdt = IMEX_GAMMA * dt;
        let mut solvers = Vec::with_capacity(settings.n_max + 1);
        for k in 0..=settings.n_max as i64 {
            let lap: ModeLaplacian = domain.laplacian(k)?;
            let lower: Vec<Complex64> = lap.lower().iter().map(|&x| -gdt * kin * x).collect();
            let upper: Vec<Complex64> = lap.upper().iter().map(|&x| -gdt * kin * x).collect();
            let diag: Vec<Complex64> = lap.diag().iter().map(|&x| 1.0 - gdt * (kin * x + shift)).collect();
            let lu = TridiagonalLu::new(&lower, &diag, &upper)
                .ok_or_else(|| SimulatorError::InvalidSettings(format!("implicit operator of mode {k} is singular")))?;
            solvers.push(lu);
        }
        let history = DelayHistory::from_orbit(&target, frame_omega - profile.omega, 0.0, dt, delay_steps, gdt);
        let mut state = initial;
        state.t = 0.0;
        Ok(Self {
            domain,
            lambda: profile.lambda,
            beta: profile.beta,
            target,
            frame_omega,
            solvers,
            azimuthal: Azimuthal::new(settings.n_max),
            dt,
            feedback,
            delay_steps,
            delayed_factor,
            history,
            state,
            steps: 0,
            blowup_norm: settings.blowup_norm,
            exec: settings.exec,
        })
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Delay actually used, `round(τ/Δt) Δt`.
    pub fn delay(&self) -> f64 {
        self.delay_steps as f64 * self.dt
    }

    pub fn delay_steps(&self) -> usize {
        self.delay_steps
    }

    pub fn feedback(&self) -> Option<&Feedback> {
        self.feedback.as_ref()
    }

    pub fn history(&self) -> &DelayHistory {
        &self.history
    }

    /// State in the rotating frame.
    pub fn frame_state(&self) -> &FieldState {
        &self.state
    }

    /// State in the laboratory frame.
    pub fn state(&self) -> FieldState {
        let mut s = self.state.gauge_rotated(-self.frame_omega * self.state.t);
        s.t = self.state.t;
        s
    }

    /// Applies the gauge rotation `e^{iω}` to the state and the history.
    pub fn rotate_gauge(&mut self, omega: f64) {
        self.state.scale(Complex64::from_polar(1.0, omega));
        self.history.rotate(omega);
    }

    /// Cubic term plus the delayed part of the feedback.
    fn explicit(&self, v: &FieldState, delayed: Option<&FieldState>) -> FieldState {
        let coef = -self.lambda * Complex64::new(1.0, self.beta);
        let rows = self.azimuthal.pointwise(v, self.exec, |z| coef * z.norm_sqr() * z);
        let mut out = FieldState::zeros(v.n_max(), v.nodes());
        out.t = v.t;
        for (idx, mode) in out.modes_mut().iter_mut().enumerate() {
            for (i, c) in mode.iter_mut().enumerate() {
                *c = rows[i][idx];
            }
        }
        if let Some(fb) = &self.feedback {
            let src = delayed.unwrap_or(v);
            let shifted = src.shifted(fb.triple.zeta, fb.triple.iota == Reflection::Minus);
            out.axpy(-fb.b * self.delayed_factor, &shifted);
        }
        out
    }

    fn solve_implicit(&self, rhs: &mut FieldState) {
        let n = rhs.n_max() as i64;
        let solvers = &self.solvers;
        self.exec.for_each_mut(rhs.modes_mut(), |idx, mode| {
            let k = (idx as i64 - n).unsigned_abs() as usize;
            solvers[k].solve_in_place(mode);
        });
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<(), SimulatorError> {
        let dt = self.dt;
        let gdt = IMEX_GAMMA * dt;
        let u = &self.state;
        let (du, dstage) = match self.history.delayed()? {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let k1 = self.explicit(u, du);
        let mut stage = u.clone();
        stage.axpy(Complex64::new(gdt, 0.0), &k1);
        self.solve_implicit(&mut stage);
        stage.t = u.t + gdt;
        let k2 = self.explicit(&stage, dstage);

        // L U2 = (U2 - u - γΔt K1) / (γΔt)
        let mut lin = stage.clone();
        lin.axpy(Complex64::new(-1.0, 0.0), u);
        lin.axpy(Complex64::new(-gdt, 0.0), &k1);
        lin.scale(Complex64::new(1.0 / gdt, 0.0));

        let mut next = u.clone();
        next.axpy(Complex64::new(dt * IMEX_DELTA, 0.0), &k1);
        next.axpy(Complex64::new(dt * (1.0 - IMEX_DELTA), 0.0), &k2);
        next.axpy(Complex64::new(dt * (1.0 - IMEX_GAMMA), 0.0), &lin);
        self.solve_implicit(&mut next);

        self.steps += 1;
        next.t = self.steps as f64 * dt;
        let norm = next.norm(self.domain.grid().weights());
        if !next.is_finite() || norm > self.blowup_norm {
            return Err(SimulatorError::BlowupDetected { t: next.t, norm });
        }
        let previous = std::mem::replace(&mut self.state, next);
        self.history.push(previous, stage);
        Ok(())
    }

    /// Norm of `b (Ψ - h S[Ψ(t - τ)])` at the current time.
    pub fn control_norm(&self) -> Result<f64, SimulatorError> {
        let Some(fb) = &self.feedback else {
            return Ok(0.0);
        };
        let delayed = match self.history.delayed()? {
            Some((u, _)) => u,
            None => &self.state,
        };
        let mut c = self.state.clone();
        let shifted = delayed.shifted(fb.triple.zeta, fb.triple.iota == Reflection::Minus);
        c.axpy(-self.delayed_factor, &shifted);
        Ok(fb.b.abs() * c.norm(self.domain.grid().weights()))
    }

    pub fn sample(&self) -> Result<Sample, SimulatorError> {
        let w = self.domain.grid().weights();
        Ok(Sample {
            t: self.state.t,
            distance: distance_to_target(&self.state, &self.target, w),
            energy: energy(&self.state, &self.domain, self.lambda, self.exec)?,
            control_norm: self.control_norm()?,
            field_norm: self.state.norm(w),
        })
    }

    /// Integrates to `t_end`, sampling at the start, every `output_every`
    /// steps and at the end.
    pub fn run(&mut self, t_end: f64, output_every: usize) -> Result<Vec<Sample>, SimulatorError> {
        let total = ((t_end - self.state.t) / self.dt).round().max(0.0) as u64;
        let every = output_every.max(1) as u64;
        let mut samples = vec![self.sample()?];
        for k in 1..=total {
            self.step()?;
            if k % every == 0 || k == total {
                samples.push(self.sample()?);
            }
        }
        Ok(samples)
    }
}
