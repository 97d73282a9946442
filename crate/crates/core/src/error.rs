//! Crate-level error type.
//!
//! Each module has its own error enum; [`Error`] wraps them and sorts them
//! into coarse families that front ends map to exit codes.

use thiserror::Error;

use crate::control::ControlError;
use crate::discretization::DiscretizationError;
use crate::geometry::GeometryError;
use crate::io::IoError;
use crate::profile::ProfileError;
use crate::simulator::SimulatorError;
use crate::spectrum::SpectrumError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Coarse classification of failures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorFamily {
    /// Invalid input data or parameters.
    Config,
    /// A solver did not converge or could not certify its result.
    Solver,
    /// A numerical guard tripped (blow-up, complex leak).
    NumericalGuard,
    /// Reading or writing files failed.
    Io,
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        use ErrorFamily::*;
        match self {
            Error::Geometry(_) => Config,
            Error::Discretization(e) => match e {
                DiscretizationError::EigenSolverFailure(_) => Solver,
                _ => Config,
            },
            Error::Profile(e) => match e {
                ProfileError::BranchNotReached { .. } | ProfileError::OutOfRange(_) => Config,
                _ => Solver,
            },
            Error::Spectrum(e) => match e {
                SpectrumError::ComplexLeak { .. } => NumericalGuard,
                SpectrumError::NonvariationalProfile => Config,
                _ => Solver,
            },
            Error::Control(e) => match e {
                ControlError::WindingMismatch { .. } | ControlError::NoStableStart { .. } | ControlError::BoxTooSmall(_) => Solver,
                _ => Config,
            },
            Error::Simulator(e) => match e {
                SimulatorError::BlowupDetected { .. } => NumericalGuard,
                _ => Config,
            },
            Error::Io(_) => Io,
        }
    }
}
