//! Vortex equilibria and rotating spiral waves.
//!
//! A spiral wave is `Ψ(t, s, φ) = e^{-iΩt} u(s) e^{imφ}` where the radial
//! profile solves
//!
//! ```text
//! 0 = (1 + iη) Δ_m u + iΩ u + λ (1 - (1 + iβ)|u|²) u.
//! ```
//!
//! For `η = β = 0` the solution is a real vortex equilibrium with `Ω = 0`.
//! Vortices are found by natural continuation in `λ` from the pitchfork at
//! the `j`-th eigenvalue of `-Δ_m`; rotating waves by continuation in
//! `(η, β)` with `Ω` as an extra unknown and a linear phase condition
//! removing the gauge freedom `u ↦ e^{iω}u`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::discretization::{eigen_delta_m, DiscretizationError, Domain, ModeLaplacian};
use crate::linalg::TridiagonalLu;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("no branch j = {j} at lambda = {lambda}: bifurcation value is {threshold}")]
    BranchNotReached { j: u32, lambda: f64, threshold: f64 },
    #[error("Newton iteration diverged (last residual {residual:e})")]
    NewtonDivergence { residual: f64 },
    #[error("converged to nodal class {found}, expected {expected}")]
    WrongNodalClass { expected: u32, found: u32 },
    #[error("continuation stalled at {parameter} = {value} (last residual {residual:e})")]
    ContinuationStalled { parameter: &'static str, value: f64, residual: f64 },
    #[error("profile is not real (max |Im u| = {max_imag:e})")]
    NonrealProfile { max_imag: f64 },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
}

/// Tuning knobs for the continuation solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationSettings {
    /// First continuation point sits at `λ_j (1 + first_offset)`.
    pub first_offset: f64,
    /// Initial `λ` step as a fraction of `λ_j`.
    pub initial_step: f64,
    /// Give up when the `λ` step falls below this fraction of `λ_j`.
    pub min_step: f64,
    /// Newton stops once the weighted residual drops below this.
    pub newton_tol: f64,
    /// Residual accepted when Newton stagnates at round-off level.
    pub accept_tol: f64,
    pub max_newton: usize,
    /// Largest admissible `|η|`, `|β|`.
    pub max_kinetic: f64,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self {
            first_offset: 0.02,
            initial_step: 0.02,
            min_step: 1e-7,
            newton_tol: 1e-11,
            accept_tol: 1e-9,
            max_newton: 30,
            max_kinetic: 0.2,
        }
    }
}

/// A converged spiral-wave profile on a fixed domain.
#[derive(Clone, Debug)]
pub struct SpiralProfile {
    domain: Arc<Domain>,
    pub m: u32,
    pub j: u32,
    pub lambda: f64,
    pub eta: f64,
    pub beta: f64,
    pub omega: f64,
    pub u: Vec<Complex64>,
    /// Real reference for the phase condition `Σ w Im(u) ref = 0`.
    reference: Vec<f64>,
}

impl SpiralProfile {
    /// Wraps externally supplied data, e.g. a profile read from disk. The
    /// gauge reference is the normalised real part.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        domain: Arc<Domain>,
        m: u32,
        j: u32,
        lambda: f64,
        eta: f64,
        beta: f64,
        omega: f64,
        u: Vec<Complex64>,
    ) -> Result<Self, ProfileError> {
        if u.len() != domain.grid().len() {
            return Err(ProfileError::OutOfRange(format!(
                "profile has {} values but the grid has {} nodes",
                u.len(),
                domain.grid().len()
            )));
        }
        let re: Vec<f64> = u.iter().map(|z| z.re).collect();
        let norm = domain.grid().norm(&re);
        let reference = re.iter().map(|x| x / norm).collect();
        Ok(Self { domain, m, j, lambda, eta, beta, omega, u, reference })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    /// True for `η = β = 0`.
    pub fn is_variational(&self) -> bool {
        self.eta == 0.0 && self.beta == 0.0
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.u.iter().map(|z| z.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.u.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Weighted norm of the spiral wave equation residual.
    pub fn residual(&self) -> Result<f64, ProfileError> {
        let lap = self.domain.laplacian(self.m as i64)?;
        let g = spiral_residual(&lap, &self.u, self.lambda, self.eta, self.beta, self.omega);
        Ok(complex_norm(self.domain.grid().weights(), &g))
    }

    /// Cubic interpolation of `u` at arc length `s`.
    pub fn value_at(&self, s: f64) -> Complex64 {
        let grid = self.domain.grid();
        let n = grid.len();
        let x = (s / grid.ds() - 0.5).clamp(0.0, (n - 1) as f64);
        let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let t = x - base as f64;
        let mut value = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let mut weight = 1.0;
            for l in 0..4 {
                if l != k {
                    weight *= (t - l as f64) / (k as f64 - l as f64);
                }
            }
            value += self.u[base + k] * weight;
        }
        value
    }

    /// Lyapunov energy `∫ |∇Ψ|² - λ(|Ψ|² - |Ψ|⁴/2) dV` of the profile,
    /// boundary term included through the discrete Laplacian.
    pub fn energy(&self) -> Result<f64, ProfileError> {
        let lap = self.domain.laplacian(self.m as i64)?;
        let w = self.domain.grid().weights();
        let lu = lap.apply(&self.u);
        let mut e = 0.0;
        for i in 0..self.u.len() {
            let r = self.u[i].norm_sqr();
            e += w[i] * (-(self.u[i].conj() * lu[i]).re - self.lambda * (r - 0.5 * r * r));
        }
        Ok(e)
    }
}

/// `(1 + iη) Δ_m u + iΩ u + λ (1 - (1 + iβ)|u|²) u`.
pub fn spiral_residual(lap: &ModeLaplacian, u: &[Complex64], lambda: f64, eta: f64, beta: f64, omega: f64) -> Vec<Complex64> {
    let lu = lap.apply(u);
    let kin = Complex64::new(1.0, eta);
    let nl = Complex64::new(1.0, beta);
    u.iter()
        .zip(&lu)
        .map(|(&z, &l)| kin * l + Complex64::new(0.0, omega) * z + lambda * (1.0 - nl * z.norm_sqr()) * z)
        .collect()
}

fn complex_norm(weights: &[f64], v: &[Complex64]) -> f64 {
    weights.iter().zip(v).map(|(w, z)| w * z.norm_sqr()).sum::<f64>().sqrt()
}

/// The first `count` bifurcation values `λ_k^m`, i.e. eigenvalues of `-Δ_m`.
pub fn bifurcation_values(domain: &Domain, m: u32, count: usize) -> Result<Vec<f64>, ProfileError> {
    let lap = domain.laplacian(m as i64)?;
    Ok(eigen_delta_m(&lap, count)?.into_iter().map(|p| p.value).collect())
}

/// Number of sign changes of a real profile over the interior nodes;
/// values below `1e-12 max|u|` are skipped.
pub fn nodal_class(profile: &SpiralProfile) -> Result<u32, ProfileError> {
    let max_imag = profile.max_imag();
    let scale = profile.u.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max_imag > 1e-9 * scale.max(1.0) {
        return Err(ProfileError::NonrealProfile { max_imag });
    }
    Ok(sign_changes(&profile.real_part()))
}

fn sign_changes(u: &[f64]) -> u32 {
    let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut last = 0.0;
    let mut count = 0;
    for &x in u {
        if x.abs() <= 1e-12 * peak {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = x;
    }
    count
}

/// Newton's method for the real vortex equation at fixed `λ`.
/// Returns the iteration count, or the last residual on failure.
fn vortex_newton(lap: &ModeLaplacian, weights: &[f64], lambda: f64, u: &mut [f64], settings: &ContinuationSettings) -> Result<usize, f64> {
    let n = u.len();
    let mut lu = vec![0.0; n];
    let mut previous = f64::INFINITY;
    for it in 0..=settings.max_newton {
        lap.apply_into(u, &mut lu);
        let mut rhs: Vec<f64> = (0..n).map(|i| -(lu[i] + lambda * (1.0 - u[i] * u[i]) * u[i])).collect();
        let res = weights.iter().zip(&rhs).map(|(w, r)| w * r * r).sum::<f64>().sqrt();
        if !res.is_finite() || res > 1e8 {
            return Err(res);
        }
        if res < settings.newton_tol || (res < settings.accept_tol && res > 0.5 * previous) {
            return Ok(it);
        }
        if it == settings.max_newton {
            return Err(res);
        }
        previous = res;
        let diag: Vec<f64> = (0..n).map(|i| lap.diag()[i] + lambda * (1.0 - 3.0 * u[i] * u[i])).collect();
        let jac = TridiagonalLu::new(lap.lower(), &diag, lap.upper()).ok_or(res)?;
        jac.solve_in_place(&mut rhs);
        u.iter_mut().zip(&rhs).for_each(|(x, d)| *x += d);
    }
    Err(previous)
}

/// Tangent `du/dλ = -J⁻¹ (1 - u²) u` of the vortex branch.
fn vortex_tangent(lap: &ModeLaplacian, lambda: f64, u: &[f64]) -> Option<Vec<f64>> {
    let diag: Vec<f64> = (0..u.len()).map(|i| lap.diag()[i] + lambda * (1.0 - 3.0 * u[i] * u[i])).collect();
    let jac = TridiagonalLu::new(lap.lower(), &diag, lap.upper())?;
    let mut t: Vec<f64> = u.iter().map(|x| -(1.0 - x * x) * x).collect();
    jac.solve_in_place(&mut t);
    Some(t)
}

/// Real vortex equilibrium of nodal class `j` at parameter `lambda`.
pub fn solve_vortex_equilibrium(
    domain: Arc<Domain>,
    m: u32,
    j: u32,
    lambda: f64,
    settings: &ContinuationSettings,
) -> Result<SpiralProfile, ProfileError> {
    let lap = domain.laplacian(m as i64)?;
    let grid = domain.grid();
    let weights = grid.weights();
    let wanted = j as usize + 1;
    if wanted > grid.len() / 4 {
        return Err(ProfileError::OutOfRange(format!("nodal class {j} is not resolved by {} nodes", grid.len())));
    }
    let pairs = eigen_delta_m(&lap, wanted)?;
    let critical = &pairs[j as usize];
    let threshold = critical.value;
    if !(lambda > threshold) {
        return Err(ProfileError::BranchNotReached { j, lambda, threshold });
    }
    let phi = &critical.vector;

    // Leading-order pitchfork amplitude: project the equation on φ.
    let amplitude = |lam: f64| {
        let quartic: f64 = weights.iter().zip(phi).map(|(w, p)| w * p.powi(4)).sum();
        ((lam - threshold) / (lam * quartic)).sqrt()
    };
    let mut lam = (threshold * (1.0 + settings.first_offset)).min(0.5 * (threshold + lambda));
    let mut u: Vec<f64>;
    let mut offset = lam - threshold;
    loop {
        let a = amplitude(lam);
        u = phi.iter().map(|p| a * p).collect();
        match vortex_newton(&lap, weights, lam, &mut u, settings) {
            Ok(_) => break,
            Err(residual) => {
                offset *= 0.5;
                lam = threshold + offset;
                if offset < settings.min_step * threshold {
                    return Err(ProfileError::NewtonDivergence { residual });
                }
            }
        }
    }

    let mut step = settings.initial_step * threshold;
    let mut last_residual = 0.0;
    while lam < lambda {
        let next = (lam + step).min(lambda);
        let mut trial = u.clone();
        if let Some(t) = vortex_tangent(&lap, lam, &u) {
            trial.iter_mut().zip(&t).for_each(|(x, d)| *x += (next - lam) * d);
        }
        match vortex_newton(&lap, weights, next, &mut trial, settings) {
            Ok(iterations) if grid.dot(&trial, phi) > 0.0 => {
                u = trial;
                lam = next;
                if iterations <= 4 {
                    step = (1.5 * step).min(lambda);
                }
            }
            outcome => {
                if let Err(r) = outcome {
                    last_residual = r;
                }
                step *= 0.5;
                if step < settings.min_step * threshold {
                    return Err(ProfileError::ContinuationStalled { parameter: "lambda", value: lam, residual: last_residual });
                }
            }
        }
    }

    let found = sign_changes(&u);
    if found != j {
        return Err(ProfileError::WrongNodalClass { expected: j, found });
    }
    let norm = grid.norm(&u);
    let reference = u.iter().map(|x| x / norm).collect();
    Ok(SpiralProfile {
        domain,
        m,
        j,
        lambda,
        eta: 0.0,
        beta: 0.0,
        omega: 0.0,
        u: u.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        reference,
    })
}

/// Rotating spiral wave at kinetic parameters `(eta, beta)`, continued
/// along the straight path from the vortex `profile`.
pub fn continue_rotating_wave(
    profile: &SpiralProfile,
    eta: f64,
    beta: f64,
    settings: &ContinuationSettings,
) -> Result<SpiralProfile, ProfileError> {
    if !profile.is_variational() {
        return Err(ProfileError::OutOfRange("continuation must start from a vortex equilibrium".into()));
    }
    if eta.abs() > settings.max_kinetic || beta.abs() > settings.max_kinetic {
        return Err(ProfileError::OutOfRange(format!(
            "|eta|, |beta| must not exceed {} (got {eta}, {beta})",
            settings.max_kinetic
        )));
    }
    if eta == 0.0 && beta == 0.0 {
        return Ok(profile.clone());
    }
    let lap = profile.domain.laplacian(profile.m as i64)?;
    let n = profile.u.len();
    let mut x = DVector::zeros(2 * n + 1);
    for i in 0..n {
        x[i] = profile.u[i].re;
        x[n + i] = profile.u[i].im;
    }
    x[2 * n] = profile.omega;

    let mut t = 0.0;
    let mut dt: f64 = 0.25;
    let mut previous: Option<(f64, DVector<f64>)> = None;
    while t < 1.0 {
        let next = (t + dt).min(1.0);
        let mut trial = match &previous {
            Some((tp, xp)) => &x + (&x - xp) * ((next - t) / (t - tp)),
            None => x.clone(),
        };
        let outcome = rotating_newton(&lap, profile, next * eta, next * beta, &mut trial, settings);
        match outcome {
            Ok(iterations) => {
                previous = Some((t, std::mem::replace(&mut x, trial)));
                t = next;
                if iterations <= 4 {
                    dt = (1.5 * dt).min(0.5);
                }
            }
            Err(r) => {
                dt *= 0.5;
                if dt < 1e-4 {
                    return Err(ProfileError::ContinuationStalled { parameter: "path", value: t, residual: r });
                }
            }
        }
    }
    Ok(SpiralProfile {
        domain: profile.domain.clone(),
        m: profile.m,
        j: profile.j,
        lambda: profile.lambda,
        eta,
        beta,
        omega: x[2 * n],
        u: (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect(),
        reference: profile.reference.clone(),
    })
}

/// Newton's method on `(Re u, Im u, Ω)` with the phase condition as the
/// last equation.
fn rotating_newton(
    lap: &ModeLaplacian,
    base: &SpiralProfile,
    eta: f64,
    beta: f64,
    x: &mut DVector<f64>,
    settings: &ContinuationSettings,
) -> Result<usize, f64> {
    let n = base.u.len();
    let w = base.domain.grid().weights();
    let refp = &base.reference;
    let lambda = base.lambda;
    let mut previous = f64::INFINITY;
    for it in 0..=settings.max_newton {
        let u: Vec<Complex64> = (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect();
        let omega = x[2 * n];
        let g = spiral_residual(lap, &u, lambda, eta, beta, omega);
        let phase: f64 = (0..n).map(|i| w[i] * refp[i] * x[n + i]).sum();
        let res = complex_norm(w, &g) + phase.abs();
        if !res.is_finite() || res > 1e8 {
            return Err(res);
        }
        if res < settings.newton_tol || (res < settings.accept_tol && res > 0.5 * previous) {
            return Ok(it);
        }
        if it == settings.max_newton {
            return Err(res);
        }
        previous = res;

        let dim = 2 * n + 1;
        let mut jac = DMatrix::zeros(dim, dim);
        for i in 0..n {
            let (p, q) = (u[i].re, u[i].im);
            let r = p * p + q * q;
            let mut put = |row: usize, col: usize, v: f64| jac[(row, col)] += v;
            // Laplacian couplings: Re G has Δp - ηΔq, Im G has Δq + ηΔp.
            let mut stencil = vec![(i, lap.diag()[i])];
            if i > 0 {
                stencil.push((i - 1, lap.lower()[i - 1]));
            }
            if i + 1 < n {
                stencil.push((i + 1, lap.upper()[i]));
            }
            for &(col, v) in &stencil {
                put(i, col, v);
                put(i, n + col, -eta * v);
                put(n + i, col, eta * v);
                put(n + i, n + col, v);
            }
            put(i, i, lambda * (1.0 - r) - 2.0 * lambda * p * p + 2.0 * lambda * beta * p * q);
            put(i, n + i, -omega - 2.0 * lambda * p * q + lambda * beta * (r + 2.0 * q * q));
            put(i, 2 * n, -q);
            put(n + i, i, omega - 2.0 * lambda * p * q - lambda * beta * (r + 2.0 * p * p));
            put(n + i, n + i, lambda * (1.0 - r) - 2.0 * lambda * q * q - 2.0 * lambda * beta * p * q);
            put(n + i, 2 * n, p);
            jac[(2 * n, n + i)] = w[i] * refp[i];
        }
        let mut rhs = DVector::zeros(dim);
        for i in 0..n {
            rhs[i] = -g[i].re;
            rhs[n + i] = -g[i].im;
        }
        rhs[2 * n] = -phase;
        let delta = jac.lu().solve(&rhs).ok_or(res)?;
        *x += delta;
    }
    Err(previous)
}
