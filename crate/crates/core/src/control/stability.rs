//! Stability verdicts, stabilizing shifts and gain/delay thresholds.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::roots::{char_roots_mode, CharProblem, CharRoot, SearchBox};
use super::{normalize_angle, ControlError, ControlTriple, Reflection};
use crate::exec::Exec;
use crate::profile::SpiralProfile;
use crate::spectrum::{unstable_report, ModeSpectrum, SpectrumError, SpectrumReport, SpectrumSettings, ZERO_MODE_TOL};

/// Gap kept between the stabilizing gain and the closed-form threshold.
pub const B_SAFETY: f64 = 0.05;
/// Smallest `1 - χ cos nζ` treated as a nonzero shift.
const SHIFT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerdictSettings {
    /// Lowest real part searched when `τ > 0`; `None` picks `-min(1, 1/τ)`.
    /// At `τ = 0` every root is located exactly.
    pub floor: Option<f64>,
    /// Roots closer than this to the origin count as zero.
    pub zero_tol: f64,
    pub exec: Exec,
}

impl Default for VerdictSettings {
    fn default() -> Self {
        Self { floor: None, zero_tol: 1e-6, exec: Exec::Parallel }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityVerdict {
    /// Largest real part over nontrivial roots, or the search floor if no
    /// root lies above it.
    pub margin: f64,
    /// True when `margin` is the search floor rather than a root.
    pub margin_is_bound: bool,
    /// The gauge root at the origin is present and simple.
    pub simple_zero: bool,
    /// Rightmost root per mode `n` (the floor where none was found).
    pub per_mode: Vec<(i64, f64)>,
    /// All nontrivial roots of the resonant mode `n = 0` lie in the open left half-plane.
    pub resonant_mode_ok: bool,
    /// Eigenvalues beyond those retained per mode cannot produce roots above `min(margin, 0)`.
    pub coverage_ok: bool,
    /// Nontrivial roots for `n ≥ 0`; those of `-n` are their conjugates.
    pub roots: Vec<CharRoot>,
}

impl StabilityVerdict {
    pub fn stable(&self) -> bool {
        self.margin < 0.0 && self.simple_zero
    }
}

/// Reflection signs `χ` to consider for eigenvector `k` of `spectrum`.
fn signs(spectrum: &ModeSpectrum, k: usize, iota: Reflection, j: u32) -> &'static [f64] {
    match iota {
        Reflection::Plus => &[1.0],
        Reflection::Minus => {
            let parity = spectrum.parities.as_ref().and_then(|p| p.get(k).copied().flatten());
            match parity {
                Some(p) => {
                    let s = if j % 2 == 1 { -p.sign() } else { p.sign() };
                    if s > 0.0 {
                        &[1.0]
                    } else {
                        &[-1.0]
                    }
                }
                None => &[1.0, -1.0],
            }
        }
    }
}

/// Index of the gauge eigenvalue in the `n = 0` spectrum.
fn gauge_index(report: &SpectrumReport) -> Option<usize> {
    let s = report.spectrum(0)?;
    s.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, mu)| mu.abs() <= ZERO_MODE_TOL)
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k)
}

fn check_common(profile: &SpiralProfile, triple: &ControlTriple, b: f64, report: &SpectrumReport) -> Result<(), ControlError> {
    if !(b <= 0.0) {
        return Err(ControlError::InvalidGain { b });
    }
    if b < report.b_min {
        return Err(ControlError::CutoffInconsistent { b, b_min: report.b_min });
    }
    if triple.iota == Reflection::Minus && !profile.domain().surface().boundary_empty() {
        return Err(ControlError::IotaUnsupported("the surface has a boundary".into()));
    }
    triple.ensure_noninvasive(profile)
}

/// Assembles the characteristic roots of every retained `(n, μ̂, χ)` for
/// `0 ≤ n < n_cut` and decides linear stability.
pub fn stability_verdict(
    profile: &SpiralProfile,
    triple: &ControlTriple,
    b: f64,
    report: &SpectrumReport,
    settings: &VerdictSettings,
) -> Result<StabilityVerdict, ControlError> {
    check_common(profile, triple, b, report)?;
    let tau = triple.tau;
    let floor = if tau == 0.0 { None } else { Some(settings.floor.unwrap_or(-(1.0f64).min(1.0 / tau))) };
    let gauge = gauge_index(report);

    let mut problems = Vec::new();
    for s in &report.spectra {
        for (k, &mu_hat) in s.eigenvalues.iter().enumerate() {
            for &chi in signs(s, k, triple.iota, profile.j) {
                let is_gauge = s.n == 0 && Some(k) == gauge;
                problems.push((CharProblem { mu_hat, n: s.n, b, tau, zeta: triple.zeta, chi }, is_gauge));
            }
        }
    }
    let solved = settings.exec.map(&problems, |(p, _)| {
        let lowest = floor.unwrap_or(p.mu_hat + 2.0 * b - 0.5);
        match SearchBox::enclosing(p, lowest) {
            Some(rect) => char_roots_mode(p, &rect),
            None => Ok(Vec::new()),
        }
    });

    let mut roots = Vec::new();
    let mut trivial_found = false;
    for ((_, is_gauge), found) in problems.iter().zip(solved) {
        let mut found = found?;
        if *is_gauge && !trivial_found {
            if let Some((idx, r)) = found.iter().enumerate().min_by(|a, b| a.1.z().norm().total_cmp(&b.1.z().norm())) {
                if r.z().norm() < settings.zero_tol {
                    found.remove(idx);
                    trivial_found = true;
                }
            }
        }
        roots.extend(found);
    }
    let simple_zero = trivial_found && !roots.iter().any(|r| r.z().norm() < settings.zero_tol);
    let rightmost = roots.iter().map(|r| r.mu).fold(f64::NEG_INFINITY, f64::max);
    let (margin, margin_is_bound) = match floor {
        Some(f) if rightmost < f => (f, true),
        _ if rightmost == f64::NEG_INFINITY => (f64::NEG_INFINITY, true),
        _ => (rightmost, false),
    };

    let mut per_mode = Vec::new();
    for s in &report.spectra {
        let best = roots.iter().filter(|r| r.n == s.n).map(|r| r.mu).fold(f64::NEG_INFINITY, f64::max);
        let value = match floor {
            Some(f) => best.max(f),
            None => best,
        };
        per_mode.push((s.n, value));
        if s.n != 0 {
            per_mode.push((-s.n, value));
        }
    }
    per_mode.sort_by_key(|&(n, _)| n);
    let resonant_mode_ok = roots.iter().filter(|r| r.n == 0).all(|r| r.mu < 0.0);
    let ceiling = margin.min(0.0);
    let coverage_ok = report.spectra.iter().all(|s| {
        let lowest = s.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY);
        let p = CharProblem { mu_hat: lowest, n: s.n, b, tau, zeta: triple.zeta, chi: 1.0 };
        p.real_part_bound() < ceiling
    });
    Ok(StabilityVerdict { margin, margin_is_bound, simple_zero, per_mode, resonant_mode_ok, coverage_ok, roots })
}

/// Real root `μ > 0` of `μ - μ* - b(1 - e^{-τμ})`: the unstable real
/// eigenvalue that a purely delayed control (`ζ = 0`) cannot remove.
/// Returns `None` unless `μ* > 0`, `b ≤ 0` and `τ ≥ 0`.
pub fn pure_delay_failure_witness(mu_star: f64, b: f64, tau: f64) -> Option<CharRoot> {
    if !(mu_star > 0.0 && b <= 0.0 && tau >= 0.0) {
        return None;
    }
    let j = |mu: f64| mu - mu_star - b * (1.0 - (-tau * mu).exp());
    let mu = if tau == 0.0 || b == 0.0 {
        mu_star
    } else {
        let (mut lo, mut hi) = (0.0, mu_star);
        while hi - lo > 1e-15 * hi {
            let mid = 0.5 * (lo + hi);
            if j(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Some(CharRoot { mu, nu: 0.0, n: 0, mu_hat: mu_star, chi: None, residual: j(mu).abs() })
}

/// Shifts `ζ` that move every listed unstable mode.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleShifts {
    modes: Vec<i64>,
    both_signs: bool,
}

/// Predicate and margin for the spatial shift. For `j = 0` only `χ = 1`
/// occurs; otherwise both reflection signs are considered.
pub fn admissible_shifts(unstable_modes: &[i64], j: u32) -> AdmissibleShifts {
    let mut modes: Vec<i64> = unstable_modes.iter().map(|n| n.abs()).filter(|&n| n != 0).collect();
    modes.sort_unstable();
    modes.dedup();
    AdmissibleShifts { modes, both_signs: j != 0 }
}

impl AdmissibleShifts {
    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    /// `min_n (1 - cos nζ)`, or `min_n (1 - |cos nζ|)` with both signs.
    /// Infinite when no mode is listed.
    pub fn margin(&self, zeta: f64) -> f64 {
        self.modes
            .iter()
            .map(|&n| {
                let c = (n as f64 * zeta).cos();
                if self.both_signs {
                    1.0 - c.abs()
                } else {
                    1.0 - c
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_admissible(&self, zeta: f64) -> bool {
        self.margin(zeta) > SHIFT_TOL
    }

    /// Shift in `[0, 2π)` with the largest margin, and that margin.
    pub fn best(&self) -> (f64, f64) {
        if self.modes.is_empty() {
            return (PI, f64::INFINITY);
        }
        const SAMPLES: usize = 7200;
        let h = TAU / SAMPLES as f64;
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 0..SAMPLES {
            let z = k as f64 * h;
            let m = self.margin(z);
            if m > best.1 + 1e-15 {
                best = (z, m);
            }
        }
        // Golden-section refinement within one sample of the grid optimum.
        let (mut a, mut b) = (best.0 - h, best.0 + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.margin(c) >= self.margin(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let z = 0.5 * (a + b);
        let m = self.margin(z);
        if m > best.1 {
            (normalize_angle(z), m)
        } else {
            best
        }
    }
}

/// Most negative gain the undelayed closed form requires, minus [`B_SAFETY`].
///
/// Every retained eigenvalue `μ̂ ≥ 0` of every mode (other than the gauge
/// zero) must satisfy `μ̂ + b(1 - χ cos nζ) < 0`. On reflection-symmetric
/// surfaces the sign `χ` follows from the eigenvector parity; otherwise the
/// worst sign is used.
pub fn find_b_threshold(profile: &SpiralProfile, zeta: f64, iota: Reflection, report: &SpectrumReport) -> Result<f64, ControlError> {
    let triple = ControlTriple::noninvasive(profile, 0.0, zeta, iota)?;
    let gauge = gauge_index(report);
    let mut required = 0.0f64;
    for s in &report.spectra {
        for (k, &mu_hat) in s.eigenvalues.iter().enumerate() {
            if mu_hat < -ZERO_MODE_TOL || (s.n == 0 && Some(k) == gauge) {
                continue;
            }
            for &chi in signs(s, k, iota, profile.j) {
                let factor = 1.0 - chi * (s.n as f64 * triple.zeta).cos();
                if factor <= SHIFT_TOL {
                    return Err(ControlError::ZetaInadmissible { zeta: triple.zeta, n: s.n });
                }
                required = required.max(mu_hat / factor);
            }
        }
    }
    let b_tilde = -required - B_SAFETY;
    if b_tilde < report.b_min {
        return Err(ControlError::CutoffInconsistent { b: b_tilde, b_min: report.b_min });
    }
    Ok(b_tilde)
}

/// Threshold gain together with a spectral report whose cutoff covers it,
/// enlarging `b_min` as needed.
pub fn find_b_threshold_with_cutoff(
    profile: &SpiralProfile,
    zeta: f64,
    iota: Reflection,
    b_min: f64,
    settings: &SpectrumSettings,
) -> Result<(f64, SpectrumReport), crate::Error> {
    let mut b_min = b_min.min(-B_SAFETY);
    for _ in 0..8 {
        let report = unstable_report(profile, b_min, settings)?;
        match find_b_threshold(profile, zeta, iota, &report) {
            Ok(b) => return Ok((b, report)),
            Err(ControlError::CutoffInconsistent { b, .. }) => b_min = 1.5 * b,
            Err(e) => return Err(e.into()),
        }
    }
    Err(SpectrumError::CutoffNotFound { max_mode: profile.domain().grid().max_mode(), threshold: 2.0 * b_min }.into())
}

/// `ln(1 + δ/|b|) / δ`: for smaller delays no root whose undelayed
/// eigenvalue lies at or below `-2δ` reaches real part `-δ`.
pub fn delay_lower_bound(delta: f64, b: f64) -> f64 {
    if b == 0.0 {
        f64::INFINITY
    } else {
        (delta / b.abs()).ln_1p() / delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauSettings {
    /// Largest delay examined; `None` means twenty times the lower bound.
    pub tau_max: Option<f64>,
    /// Width of the final bisection bracket.
    pub tol: f64,
    pub verdict: VerdictSettings,
}

impl Default for TauSettings {
    fn default() -> Self {
        Self { tau_max: None, tol: 1e-4, verdict: VerdictSettings::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauThreshold {
    /// Largest delay verified stable below the first crossing (or `tau_max`).
    pub tau_tilde: f64,
    pub tau_lower_bound: f64,
    /// Half of the undelayed spectral gap.
    pub delta: f64,
    /// True if a crossing was found below `tau_max`.
    pub crossed: bool,
    pub margin_at_zero: f64,
}

/// Follows the verdict in `τ` from the stable undelayed configuration up to
/// the first loss of stability.
pub fn find_tau_threshold(
    profile: &SpiralProfile,
    zeta: f64,
    iota: Reflection,
    b: f64,
    report: &SpectrumReport,
    settings: &TauSettings,
) -> Result<TauThreshold, ControlError> {
    let at = |tau: f64, floor: Option<f64>| -> Result<StabilityVerdict, ControlError> {
        let triple = ControlTriple::noninvasive(profile, tau, zeta, iota)?;
        stability_verdict(profile, &triple, b, report, &VerdictSettings { floor, ..settings.verdict })
    };
    let start = at(0.0, None)?;
    if !start.stable() {
        return Err(ControlError::NoStableStart { margin: start.margin });
    }
    let delta = -start.margin / 2.0;
    let lower = delay_lower_bound(delta, b);
    if !lower.is_finite() {
        return Ok(TauThreshold { tau_tilde: f64::INFINITY, tau_lower_bound: lower, delta, crossed: false, margin_at_zero: start.margin });
    }
    let tau_max = settings.tau_max.unwrap_or(20.0 * lower);
    let floor = Some(-delta);
    let base = lower / 20.0;
    let mut step = base;
    let mut stable_tau = 0.0f64;
    let result = |tau_tilde, crossed| TauThreshold { tau_tilde, tau_lower_bound: lower, delta, crossed, margin_at_zero: start.margin };
    loop {
        if stable_tau >= tau_max {
            return Ok(result(tau_max, false));
        }
        let tau = (stable_tau + step).min(tau_max);
        match at(tau, floor) {
            Ok(v) if v.stable() => {
                stable_tau = tau;
                step = base;
            }
            Ok(_) => {
                let (mut lo, mut hi) = (stable_tau, tau);
                while hi - lo > settings.tol {
                    let mid = 0.5 * (lo + hi);
                    if at(mid, floor)?.stable() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(result(lo, true));
            }
            Err(e @ (ControlError::WindingMismatch { .. } | ControlError::BoxTooSmall(_))) => {
                step *= 0.5;
                if step < 1e-6 * base {
                    return Err(e);
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Root of a single `(n, μ̂)` datum at `τ = 0`, used by callers that need the
/// closed form without a search box.
pub fn undelayed_root(mu_hat: f64, n: i64, b: f64, zeta: f64, chi: f64) -> Complex64 {
    let nz = n as f64 * zeta;
    Complex64::new(mu_hat + b * (1.0 - chi * nz.cos()), chi * b * nz.sin())
}
