//! Mode-by-mode spectra of the linearisation about a vortex equilibrium.
//!
//! Writing a perturbation as `V = (P + iQ) e^{imφ}` and expanding `P`, `Q`
//! in Fourier modes `e^{inφ}` splits the linearisation into operators on
//! pairs `(P_n, Q_n)`:
//!
//! ```text
//! L_n = | Δ_n - m²/a² + λ(1 - 3u²)     -2imn/a²                 |
//!       | +2imn/a²                     Δ_n - m²/a² + λ(1 - u²)  |
//! ```
//!
//! Conjugating with `diag(1, i)` turns `L_n` into a real matrix that is
//! symmetric in the quadrature inner product, so its spectrum is real. The
//! eigenproblem is solved in that form; each eigenvector is mapped back and
//! its complex Rayleigh quotient is checked for a vanishing imaginary part.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::discretization::{DiscretizationError, ModeLaplacian};
use crate::exec::Exec;
use crate::linalg::symmetric_eigen_descending;
use crate::profile::SpiralProfile;

/// Eigenvalues with `|μ|` below this count as zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-7;
/// Largest tolerated imaginary part of a Rayleigh quotient.
pub const REALNESS_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("spectral analysis needs a real vortex equilibrium (eta = beta = 0)")]
    NonvariationalProfile,
    #[error("eigen solver failed for mode {n}: {reason}")]
    EigenSolverFailure { n: i64, reason: String },
    #[error("mode {n}: eigenvalue {mu} has imaginary part {imag:e}")]
    ComplexLeak { n: i64, mu: f64, imag: f64 },
    #[error("no cutoff found up to mode {max_mode} (threshold {threshold})")]
    CutoffNotFound { max_mode: i64, threshold: f64 },
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
}

/// Behaviour under the reflection `s ↦ s* - s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// `L_n` in structured form.
#[derive(Clone, Debug)]
pub struct LinearizationMode {
    pub n: i64,
    lap: ModeLaplacian,
    /// `-m²/a² + λ(1 - 3u²)`
    potential_p: Vec<f64>,
    /// `-m²/a² + λ(1 - u²)`
    potential_q: Vec<f64>,
    /// `2mn/a²`
    coupling: Vec<f64>,
    weights: Vec<f64>,
}

fn require_variational(profile: &SpiralProfile) -> Result<(), SpectrumError> {
    let scale = profile.u.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    if !profile.is_variational() || profile.omega != 0.0 || profile.max_imag() > 1e-9 * scale {
        return Err(SpectrumError::NonvariationalProfile);
    }
    Ok(())
}

/// Builds `L_n` for a vortex equilibrium.
pub fn assemble_linearization_mode(profile: &SpiralProfile, n: i64) -> Result<LinearizationMode, SpectrumError> {
    require_variational(profile)?;
    let domain = profile.domain();
    let lap = domain.laplacian(n)?;
    let grid = domain.grid();
    let m = profile.m as f64;
    let lambda = profile.lambda;
    let mut potential_p = Vec::with_capacity(grid.len());
    let mut potential_q = Vec::with_capacity(grid.len());
    let mut coupling = Vec::with_capacity(grid.len());
    for (a, z) in grid.radii().iter().zip(&profile.u) {
        let u2 = z.re * z.re;
        let inv = 1.0 / (a * a);
        potential_p.push(-m * m * inv + lambda * (1.0 - 3.0 * u2));
        potential_q.push(-m * m * inv + lambda * (1.0 - u2));
        coupling.push(2.0 * m * n as f64 * inv);
    }
    Ok(LinearizationMode { n, lap, potential_p, potential_q, coupling, weights: grid.weights().to_vec() })
}

impl LinearizationMode {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(P, Q) ↦ L_n (P, Q)` on complex radial functions.
    pub fn apply(&self, p: &[Complex64], q: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut lp = self.lap.apply(p);
        let mut lq = self.lap.apply(q);
        let i = Complex64::i();
        for k in 0..p.len() {
            lp[k] += self.potential_p[k] * p[k] - i * self.coupling[k] * q[k];
            lq[k] += self.potential_q[k] * q[k] + i * self.coupling[k] * p[k];
        }
        (lp, lq)
    }

    /// Dense complex `2N × 2N` matrix, `P` block first.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.len();
        let lap = self.lap.to_dense();
        let i = Complex64::i();
        DMatrix::from_fn(2 * n, 2 * n, |r, c| {
            let (br, rr) = (r / n, r % n);
            let (bc, cc) = (c / n, c % n);
            let mut v = Complex64::new(0.0, 0.0);
            if br == bc {
                v += lap[(rr, cc)];
                if rr == cc {
                    v += if br == 0 { self.potential_p[rr] } else { self.potential_q[rr] };
                }
            } else if rr == cc {
                v += if br == 0 { -i * self.coupling[rr] } else { i * self.coupling[rr] };
            }
            v
        })
    }

    /// The real symmetric matrix `W^{1/2} D⁻¹ L_n D W^{-1/2}`, `D = diag(1, i)`.
    fn symmetric_form(&self) -> DMatrix<f64> {
        let n = self.len();
        let off = self.lap.symmetric_offdiag();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            for (block, pot) in [(0, &self.potential_p), (n, &self.potential_q)] {
                m[(block + k, block + k)] = self.lap.diag()[k] + pot[k];
                if k + 1 < n {
                    m[(block + k, block + k + 1)] = off[k];
                    m[(block + k + 1, block + k)] = off[k];
                }
            }
            m[(k, n + k)] = self.coupling[k];
            m[(n + k, k)] = self.coupling[k];
        }
        m
    }
}

/// Eigenvector `(p, i q)` of `L_n`, stored through its real parts `p`, `q`
/// and normalised in the weighted norm.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeEigenvector {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl ModeEigenvector {
    pub fn p_complex(&self) -> Vec<Complex64> {
        self.p.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    pub fn q_complex(&self) -> Vec<Complex64> {
        self.q.iter().map(|&x| Complex64::new(0.0, x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpectrum {
    pub n: i64,
    /// Leading eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Largest eigenvalue of `L_n`.
    pub principal: f64,
    /// Reflection parity per eigenvector on reflection-symmetric surfaces;
    /// `None` entries mark eigenvectors without a definite parity.
    pub parities: Option<Vec<Option<Parity>>>,
    pub eigenvectors: Vec<ModeEigenvector>,
}

fn reflection_parity(weights: &[f64], parts: &[&[f64]]) -> Option<Parity> {
    let n = weights.len();
    let mut overlap = 0.0;
    let mut norm = 0.0;
    for v in parts {
        for i in 0..n {
            overlap += weights[i] * v[i] * v[n - 1 - i];
            norm += weights[i] * v[i] * v[i];
        }
    }
    let ratio = overlap / norm;
    if ratio > 1.0 - 1e-6 {
        Some(Parity::Even)
    } else if ratio < -1.0 + 1e-6 {
        Some(Parity::Odd)
    } else {
        None
    }
}

/// Leading `count` eigenvalues of `L_n` with eigenvectors and parities.
pub fn mode_spectrum(profile: &SpiralProfile, n: i64, count: usize) -> Result<ModeSpectrum, SpectrumError> {
    let op = assemble_linearization_mode(profile, n)?;
    let size = op.len();
    if count == 0 || count > size / 2 {
        return Err(SpectrumError::EigenSolverFailure { n, reason: format!("count {count} outside 1..={}", size / 2) });
    }
    let (values, vectors) = symmetric_eigen_descending(op.symmetric_form());
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SpectrumError::EigenSolverFailure { n, reason: "non-finite eigenvalue".into() });
    }
    let w = &op.weights;
    let mut eigenvectors = Vec::with_capacity(count);
    for k in 0..count {
        let mut p: Vec<f64> = (0..size).map(|i| vectors[(i, k)] / w[i].sqrt()).collect();
        let mut q: Vec<f64> = (0..size).map(|i| vectors[(size + i, k)] / w[i].sqrt()).collect();
        let norm = (0..size).map(|i| w[i] * (p[i] * p[i] + q[i] * q[i])).sum::<f64>().sqrt();
        p.iter_mut().chain(q.iter_mut()).for_each(|x| *x /= norm);

        let v = ModeEigenvector { p, q };
        let (pc, qc) = (v.p_complex(), v.q_complex());
        let (lp, lq) = op.apply(&pc, &qc);
        let rayleigh: Complex64 = (0..size).map(|i| w[i] * (pc[i].conj() * lp[i] + qc[i].conj() * lq[i])).sum();
        if rayleigh.im.abs() > REALNESS_TOL {
            return Err(SpectrumError::ComplexLeak { n, mu: values[k], imag: rayleigh.im });
        }
        eigenvectors.push(v);
    }
    let parities = profile.domain().grid().reflection_symmetric().then(|| {
        eigenvectors.iter().map(|v| reflection_parity(w, &[&v.p, &v.q])).collect()
    });
    Ok(ModeSpectrum { n, eigenvalues: values[..count].to_vec(), principal: values[0], parities, eigenvectors })
}

/// Spectrum of the gauge-direction operator `Δ_m + λ(1 - u²)` on radial
/// functions (the `Q` block of `L_0`).
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub parities: Option<Vec<Option<Parity>>>,
    /// Eigenvalues above the zero-mode tolerance.
    pub unstable_dimension: usize,
    /// Eigenvalues within the zero-mode tolerance.
    pub zero_modes: usize,
}

pub fn restricted_spectrum(profile: &SpiralProfile, count: usize) -> Result<RestrictedSpectrum, SpectrumError> {
    let op = assemble_linearization_mode(profile, 0)?;
    let size = op.len();
    if count == 0 || count > size / 2 {
        return Err(SpectrumError::EigenSolverFailure { n: 0, reason: format!("count {count} outside 1..={}", size / 2) });
    }
    let off = op.lap.symmetric_offdiag();
    let mut dense = DMatrix::zeros(size, size);
    for k in 0..size {
        dense[(k, k)] = op.lap.diag()[k] + op.potential_q[k];
        if k + 1 < size {
            dense[(k, k + 1)] = off[k];
            dense[(k + 1, k)] = off[k];
        }
    }
    let (values, vectors) = symmetric_eigen_descending(dense);
    let w = &op.weights;
    let eigenvectors: Vec<Vec<f64>> = (0..count)
        .map(|k| {
            let v: Vec<f64> = (0..size).map(|i| vectors[(i, k)] / w[i].sqrt()).collect();
            let norm = (0..size).map(|i| w[i] * v[i] * v[i]).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let parities = profile
        .domain()
        .grid()
        .reflection_symmetric()
        .then(|| eigenvectors.iter().map(|v| reflection_parity(w, &[v])).collect());
    let eigenvalues = values[..count].to_vec();
    let unstable_dimension = eigenvalues.iter().filter(|&&x| x > ZERO_MODE_TOL).count();
    let zero_modes = eigenvalues.iter().filter(|&&x| x.abs() <= ZERO_MODE_TOL).count();
    Ok(RestrictedSpectrum { eigenvalues, eigenvectors, parities, unstable_dimension, zero_modes })
}

/// Settings shared by the spectral scans.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumSettings {
    /// Eigenvalues kept per mode.
    pub count: usize,
    /// Consecutive modes below threshold required to accept a cutoff.
    pub confirm: usize,
    pub exec: Exec,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self { count: 12, confirm: 3, exec: Exec::Parallel }
    }
}

/// Result of the outward scan over Fourier modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Cutoff {
    /// Modes with `|n| ≥ n_cut` have principal eigenvalue below `threshold`.
    pub n_cut: i64,
    pub threshold: f64,
    /// Spectra for `n = 0, 1, …` as far as the scan went (at least `n_cut`).
    pub spectra: Vec<ModeSpectrum>,
}

/// Smallest `n_cut` such that `μ*_n < -2|b_min| - 0.1` for all `|n| ≥ n_cut`,
/// confirmed on `settings.confirm` consecutive modes.
pub fn active_mode_cutoff(profile: &SpiralProfile, b_min: f64, settings: &SpectrumSettings) -> Result<Cutoff, SpectrumError> {
    let threshold = -2.0 * b_min.abs() - 0.1;
    let grid = profile.domain().grid();
    let max_mode = grid.max_mode();
    let count = settings.count.min(grid.len() / 2);
    let batch = if settings.exec.is_parallel() { 4 } else { 1 };
    let mut spectra: Vec<ModeSpectrum> = Vec::new();
    let mut run_start: Option<i64> = None;
    let mut next = 0i64;
    while next <= max_mode {
        let hi = (next + batch as i64 - 1).min(max_mode);
        let batch_spectra = settings
            .exec
            .map_range(next as usize..hi as usize + 1, |n| mode_spectrum(profile, n as i64, count));
        for s in batch_spectra {
            let s = s?;
            if s.principal < threshold {
                run_start.get_or_insert(s.n);
            } else {
                run_start = None;
            }
            spectra.push(s);
            if let Some(start) = run_start {
                if spectra.len() as i64 - start >= settings.confirm as i64 {
                    spectra.truncate((start as usize).max(1) + settings.confirm);
                    return Ok(Cutoff { n_cut: start, threshold, spectra });
                }
            }
        }
        next = hi + 1;
    }
    Err(SpectrumError::CutoffNotFound { max_mode, threshold })
}

/// Everything the control analysis needs about an equilibrium.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub m: u32,
    pub j: u32,
    pub b_min: f64,
    pub n_cut: i64,
    /// `μ_j^*`, the largest principal eigenvalue over all modes.
    pub mu_star: f64,
    /// `(n, μ̂)` with `μ̂ > -2|b_min|`, both signs of `n`, gauge zero excluded.
    pub unstable: Vec<(i64, f64)>,
    pub zero_mode_multiplicity: usize,
    /// Spectra for `n = 0..n_cut` (negative modes are mirror images).
    pub spectra: Vec<ModeSpectrum>,
    /// True when parities are known (reflection-symmetric surfaces).
    pub has_parities: bool,
}

impl SpectrumReport {
    pub fn spectrum(&self, n: i64) -> Option<&ModeSpectrum> {
        self.spectra.get(n.unsigned_abs() as usize)
    }
}

/// Scans all active modes and collects the unstable and centre data.
pub fn unstable_report(profile: &SpiralProfile, b_min: f64, settings: &SpectrumSettings) -> Result<SpectrumReport, SpectrumError> {
    let cutoff = active_mode_cutoff(profile, b_min, settings)?;
    let mu_star = cutoff.spectra.iter().map(|s| s.principal).fold(f64::NEG_INFINITY, f64::max);
    let mut spectra = cutoff.spectra;
    spectra.truncate((cutoff.n_cut as usize).max(1));
    let floor = -2.0 * b_min.abs();
    let mut unstable = Vec::new();
    let mut zero_mode_multiplicity = 0;
    for s in &spectra {
        for &mu in &s.eigenvalues {
            if s.n == 0 && mu.abs() <= ZERO_MODE_TOL {
                zero_mode_multiplicity += 1;
                continue;
            }
            if mu > floor {
                unstable.push((s.n, mu));
                if s.n != 0 {
                    unstable.push((-s.n, mu));
                }
            }
        }
    }
    Ok(SpectrumReport {
        m: profile.m,
        j: profile.j,
        b_min,
        n_cut: cutoff.n_cut,
        mu_star,
        unstable,
        zero_mode_multiplicity,
        has_parities: profile.domain().grid().reflection_symmetric(),
        spectra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Domain;
    use crate::geometry::{BoundaryCondition, SurfaceSpec};
    use crate::profile::{bifurcation_values, continue_rotating_wave, solve_vortex_equilibrium, ContinuationSettings};
    use std::sync::Arc;

    fn vortex(surface: SurfaceSpec, bc: BoundaryCondition, nodes: usize, m: u32, j: u32, factor: f64) -> SpiralProfile {
        let d = Arc::new(Domain::new(surface, bc, nodes).unwrap());
        let lam = factor * bifurcation_values(&d, m, j as usize + 1).unwrap()[j as usize];
        solve_vortex_equilibrium(d, m, j, lam, &ContinuationSettings::default()).unwrap()
    }

    fn disk_vortex(nodes: usize) -> SpiralProfile {
        let d = Arc::new(Domain::new(SurfaceSpec::disk(), BoundaryCondition::neumann(), nodes).unwrap());
        solve_vortex_equilibrium(d, 1, 0, 50.0, &ContinuationSettings::default()).unwrap()
    }

    #[test]
    fn zero_mode_couplings_vanish_and_gauge_mode_is_kernel() {
        let p = disk_vortex(64);
        let op = assemble_linearization_mode(&p, 0).unwrap();
        let dense = op.to_dense();
        let n = op.len();
        for r in 0..n {
            for c in 0..n {
                assert_eq!(dense[(r, n + c)], Complex64::new(0.0, 0.0));
                assert_eq!(dense[(n + r, c)], Complex64::new(0.0, 0.0));
            }
        }
        let zero = vec![Complex64::new(0.0, 0.0); n];
        let (lp, lq) = op.apply(&zero, &p.u);
        let norm = |v: &[Complex64]| v.iter().zip(p.domain().grid().weights()).map(|(z, w)| w * z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm(&lp) == 0.0 && norm(&lq) < 1e-8);
    }

    #[test]
    fn symmetric_route_matches_general_complex_eigensolver() {
        let p = disk_vortex(40);
        for n in [1i64, 3] {
            let spec = mode_spectrum(&p, n, 6).unwrap();
            let general = assemble_linearization_mode(&p, n).unwrap().to_dense().schur().eigenvalues().unwrap();
            let mut reference: Vec<Complex64> = general.iter().copied().collect();
            assert!(reference.iter().all(|z| z.im.abs() < 1e-6));
            reference.sort_by(|a, b| b.re.total_cmp(&a.re));
            for k in 0..6 {
                assert!((reference[k].re - spec.eigenvalues[k]).abs() < 1e-7 * spec.eigenvalues[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn opposite_modes_share_spectra() {
        let p = disk_vortex(64);
        for n in 1..4 {
            let a = mode_spectrum(&p, n, 8).unwrap();
            let b = mode_spectrum(&p, -n, 8).unwrap();
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn eigenvectors_satisfy_the_eigen_equation() {
        let p = disk_vortex(64);
        let op = assemble_linearization_mode(&p, 2).unwrap();
        let spec = mode_spectrum(&p, 2, 4).unwrap();
        for (mu, v) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
            let (pc, qc) = (v.p_complex(), v.q_complex());
            let (lp, lq) = op.apply(&pc, &qc);
            let err: f64 = (0..pc.len()).map(|i| (lp[i] - mu * pc[i]).norm() + (lq[i] - mu * qc[i]).norm()).fold(0.0, f64::max);
            assert!(err < 1e-6 * mu.abs().max(1.0) * 1e3, "{err}");
        }
    }

    #[test]
    fn restricted_unstable_dimension_equals_nodal_class() {
        for j in 0..3u32 {
            let p = vortex(SurfaceSpec::sphere(), BoundaryCondition::dirichlet(), 96, 1, j, 1.5);
            let r = restricted_spectrum(&p, 8).unwrap();
            assert_eq!(r.unstable_dimension, j as usize, "j={j}: {:?}", r.eigenvalues);
            assert_eq!(r.zero_modes, 1);
            for (k, parity) in r.parities.as_ref().unwrap().iter().enumerate() {
                let expected = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
                assert_eq!(*parity, Some(expected), "j={j} k={k}");
            }
        }
        let disk = disk_vortex(64);
        let r = restricted_spectrum(&disk, 6).unwrap();
        assert_eq!((r.unstable_dimension, r.zero_modes), (0, 1));
        assert!(r.parities.is_none());
    }

    #[test]
    fn rotating_waves_are_rejected() {
        let p = disk_vortex(48);
        let wave = continue_rotating_wave(&p, 0.02, 0.01, &ContinuationSettings::default()).unwrap();
        assert_eq!(mode_spectrum(&wave, 1, 4).unwrap_err(), SpectrumError::NonvariationalProfile);
    }

    #[test]
    fn large_modes_decay_quadratically() {
        // Quadratic fit through three well-separated modes: the leading
        // coefficient approaches -1/max(a)² = -1 on the unit disk.
        let p = disk_vortex(128);
        let ns = [12i64, 18, 24];
        let mu: Vec<f64> = ns.iter().map(|&n| mode_spectrum(&p, n, 1).unwrap().principal).collect();
        let (x0, x1, x2) = (ns[0] as f64, ns[1] as f64, ns[2] as f64);
        // Coefficient of n² in the interpolating polynomial in n.
        let c2 = mu[0] / ((x0 - x1) * (x0 - x2)) + mu[1] / ((x1 - x0) * (x1 - x2)) + mu[2] / ((x2 - x0) * (x2 - x1));
        assert!(c2 < 0.0 && (c2 + 1.0).abs() < 0.15, "c2 = {c2}");
    }

    #[test]
    fn cutoff_and_report() {
        let p = disk_vortex(96);
        let s = SpectrumSettings::default();
        let cut = active_mode_cutoff(&p, 0.0, &s).unwrap();
        let spectra: Vec<f64> = cut.spectra.iter().map(|x| x.principal).collect();
        for (n, &mu) in spectra.iter().enumerate() {
            if n as i64 >= cut.n_cut {
                assert!(mu < -0.1);
            }
        }
        assert!(spectra[(cut.n_cut - 1) as usize] >= -0.1);
        let seq = active_mode_cutoff(&p, -1.0, &SpectrumSettings { exec: Exec::Sequential, ..s }).unwrap();
        let par = active_mode_cutoff(&p, -1.0, &s).unwrap();
        assert_eq!(seq, par);
        assert!(seq.n_cut >= cut.n_cut);

        let report = unstable_report(&p, -1.0, &s).unwrap();
        assert!(report.mu_star > 0.0);
        assert_eq!(report.zero_mode_multiplicity, 1);
        assert!(report.unstable.iter().all(|&(_, mu)| mu > -2.0));
        assert!(report.spectra.iter().all(|x| x.principal <= report.mu_star + 1e-8));
        for &(n, mu) in &report.unstable {
            assert!(report.unstable.contains(&(-n, mu)));
        }
    }

    #[test]
    fn sphere_j1_is_unstable() {
        let d = Arc::new(Domain::new(SurfaceSpec::sphere(), BoundaryCondition::dirichlet(), 96).unwrap());
        let p = solve_vortex_equilibrium(d, 1, 1, 10.0, &ContinuationSettings::default()).unwrap();
        let report = unstable_report(&p, 0.0, &SpectrumSettings::default()).unwrap();
        assert!(report.mu_star > 0.0);
        assert_eq!(report.zero_mode_multiplicity, 1);
        for s in &report.spectra {
            assert!(s.parities.as_ref().unwrap().iter().take(4).all(|x| x.is_some()));
        }
    }
}
