//! Delayed feedback control of spiral waves.
//!
//! The feedback term is `b (Ψ(t) - h S[Ψ(t - τ)])`, where `S` rotates the
//! azimuth by `ζ` and, for [`Reflection::Minus`], also reflects the radial
//! coordinate `s ↦ s* - s` of a closed surface. The factor `h` is chosen so
//! that the control vanishes on the target wave.

mod roots;
mod stability;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::SpiralProfile;

pub use roots::{char_roots_mode, newton, winding_number, CharProblem, CharRoot, SearchBox, ROOT_RESIDUAL_TOL};
pub use stability::{
    admissible_shifts, find_b_threshold, find_tau_threshold, pure_delay_failure_witness, stability_verdict, AdmissibleShifts,
    delay_lower_bound, find_b_threshold_with_cutoff, undelayed_root, StabilityVerdict, TauSettings, TauThreshold, VerdictSettings,
    B_SAFETY,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("radial reflection unsupported: {0}")]
    IotaUnsupported(String),
    #[error("invalid control triple: {0}")]
    InvalidTriple(String),
    #[error("control gain must be nonpositive, got {b}")]
    InvalidGain { b: f64 },
    #[error("search box too small: {0}")]
    BoxTooSmall(String),
    #[error("mode {n}: winding count {winding} but {found} roots refined")]
    WindingMismatch { n: i64, winding: i64, found: i64 },
    #[error("shift zeta = {zeta} cannot move the unstable eigenvalue of mode {n}")]
    ZetaInadmissible { zeta: f64, n: i64 },
    #[error("undelayed control is not stabilizing (margin {margin})")]
    NoStableStart { margin: f64 },
    #[error("gain {b} lies beyond the spectral cutoff computed for b_min = {b_min}")]
    CutoffInconsistent { b: f64, b_min: f64 },
    #[error("factor h = {h} does not make the control vanish on the profile")]
    InvasiveTriple { h: Complex64 },
}

/// Whether the spatial shift includes the radial reflection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reflection {
    /// Rotation by `ζ` only.
    #[default]
    Plus,
    /// Rotation by `ζ` composed with `s ↦ s* - s`.
    Minus,
}

impl Reflection {
    pub fn name(self) -> &'static str {
        match self {
            Reflection::Plus => "plus",
            Reflection::Minus => "minus",
        }
    }
}

/// Feedback factor, delay and spatial shift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlTriple {
    pub h: Complex64,
    pub tau: f64,
    pub iota: Reflection,
    /// Normalised to `[0, 2π)`.
    pub zeta: f64,
}

pub fn normalize_angle(zeta: f64) -> f64 {
    let z = zeta.rem_euclid(TAU);
    if z >= TAU {
        0.0
    } else {
        z
    }
}

impl ControlTriple {
    pub fn new(h: Complex64, tau: f64, iota: Reflection, zeta: f64) -> Result<Self, ControlError> {
        if (h.norm() - 1.0).abs() > 1e-12 {
            return Err(ControlError::InvalidTriple(format!("|h| = {} is not 1", h.norm())));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(ControlError::InvalidTriple(format!("delay {tau} must be finite and nonnegative")));
        }
        if !zeta.is_finite() {
            return Err(ControlError::InvalidTriple(format!("shift {zeta} is not finite")));
        }
        Ok(Self { h, tau, iota, zeta: normalize_angle(zeta) })
    }

    /// The triple whose control term vanishes on `profile`.
    pub fn noninvasive(profile: &SpiralProfile, tau: f64, zeta: f64, iota: Reflection) -> Result<Self, ControlError> {
        let h = multiplicative_factor(profile, tau, zeta, iota)?;
        Self::new(h, tau, iota, zeta)
    }

    /// Checks that the control term vanishes on `profile`.
    pub fn ensure_noninvasive(&self, profile: &SpiralProfile) -> Result<(), ControlError> {
        let mut c = self.h * Complex64::from_polar(1.0, profile.omega * self.tau - profile.m as f64 * self.zeta);
        if self.iota == Reflection::Minus && profile.j % 2 == 1 {
            c = -c;
        }
        if (c - 1.0).norm() < 1e-9 {
            Ok(())
        } else {
            Err(ControlError::InvasiveTriple { h: self.h })
        }
    }
}

/// `h = e^{i(-Ωτ + mζ)}`, times `(-1)^j` when the shift reflects.
pub fn multiplicative_factor(profile: &SpiralProfile, tau: f64, zeta: f64, iota: Reflection) -> Result<Complex64, ControlError> {
    let phase = Complex64::from_polar(1.0, -profile.omega * tau + profile.m as f64 * zeta);
    match iota {
        Reflection::Plus => Ok(phase),
        Reflection::Minus => {
            let surface = profile.domain().surface();
            if !surface.boundary_empty() {
                return Err(ControlError::IotaUnsupported("the surface has a boundary".into()));
            }
            if !surface.reflection_symmetric() {
                return Err(ControlError::IotaUnsupported("the surface is not reflection symmetric".into()));
            }
            Ok(if profile.j % 2 == 1 { -phase } else { phase })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Domain;
    use crate::geometry::{BoundaryCondition, SurfaceSpec};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn profile(surface: SurfaceSpec, m: u32, j: u32, omega: f64) -> SpiralProfile {
        let bc = if surface.boundary_empty() { BoundaryCondition::dirichlet() } else { BoundaryCondition::neumann() };
        let domain = Arc::new(Domain::new(surface, bc, 64).unwrap());
        let u = vec![Complex64::new(0.0, 0.0); 64];
        SpiralProfile::from_parts(domain, m, j, 10.0, 0.0, 0.0, omega, u).unwrap()
    }

    #[test]
    fn factor_examples() {
        let p = profile(SurfaceSpec::disk(), 2, 0, 0.0);
        assert!((multiplicative_factor(&p, 0.3, PI / 2.0, Reflection::Plus).unwrap() + 1.0).norm() < 1e-12);
        let q = profile(SurfaceSpec::sphere(), 1, 1, 0.0);
        assert!((multiplicative_factor(&q, 0.0, 0.0, Reflection::Minus).unwrap() + 1.0).norm() < 1e-12);
        let r = profile(SurfaceSpec::disk(), 1, 0, 1.0);
        assert!((multiplicative_factor(&r, PI, 0.0, Reflection::Plus).unwrap() + 1.0).norm() < 1e-12);
    }

    #[test]
    fn reflection_needs_closed_symmetric_surface() {
        let p = profile(SurfaceSpec::disk(), 1, 0, 0.0);
        assert!(matches!(multiplicative_factor(&p, 0.0, 0.0, Reflection::Minus), Err(ControlError::IotaUnsupported(_))));
    }

    #[test]
    fn triple_validation() {
        assert!(ControlTriple::new(Complex64::new(1.1, 0.0), 0.0, Reflection::Plus, 0.0).is_err());
        assert!(ControlTriple::new(Complex64::new(1.0, 0.0), -0.1, Reflection::Plus, 0.0).is_err());
        let t = ControlTriple::new(Complex64::new(0.0, 1.0), 0.2, Reflection::Plus, -PI / 2.0).unwrap();
        assert!((t.zeta - 1.5 * PI).abs() < 1e-12);
        let p = profile(SurfaceSpec::disk(), 1, 0, 0.7);
        let good = ControlTriple::noninvasive(&p, 0.4, 1.0, Reflection::Plus).unwrap();
        assert!(good.ensure_noninvasive(&p).is_ok());
        assert!(t.ensure_noninvasive(&p).is_err());
        let q = profile(SurfaceSpec::sphere(), 1, 1, 0.0);
        let minus = ControlTriple::noninvasive(&q, 0.0, 2.0, Reflection::Minus).unwrap();
        assert!(minus.ensure_noninvasive(&q).is_ok());
    }
}
