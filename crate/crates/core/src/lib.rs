//! Spiral waves of the complex Ginzburg-Landau equation on surfaces of
//! revolution.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] describes the surface (meridian profile, boundary data).
//! * [`discretization`] builds the staggered radial grid and the per-mode
//!   Laplacians.
//! * [`profile`] computes vortex equilibria and rotating spiral waves.
//! * [`spectrum`] analyses the linearisation about a vortex, mode by mode.
//! * [`control`] builds noninvasive feedback and solves the delayed
//!   characteristic equations.
//! * [`simulator`] integrates the controlled PDE in time.
//!
//! Data-parallel loops go through [`exec::Exec`], which runs on rayon when
//! the `parallel` feature is enabled and falls back to plain iteration
//! otherwise.

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod discretization;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod profile;
pub mod simulator;
pub mod spectrum;

pub use error::{Error, ErrorFamily, Result};
pub use exec::Exec;
