//! Pseudospectral evaluation of pointwise terms in the azimuthal direction.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::FieldState;
use crate::exec::Exec;

/// Azimuthal transforms for states with modes `-n_max..=n_max`.
///
/// The collocation grid has more than `4 n_max` points, so products of up
/// to four fields are computed without aliasing.
#[derive(Clone)]
pub struct Azimuthal {
    n_max: usize,
    size: usize,
    inverse: Arc<dyn Fft<f64>>,
    forward: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Azimuthal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Azimuthal").field("n_max", &self.n_max).field("size", &self.size).finish()
    }
}

struct Scratch {
    values: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl Azimuthal {
    pub fn new(n_max: usize) -> Self {
        let size = 4 * n_max + 4;
        let mut planner = FftPlanner::new();
        Self { n_max, size, inverse: planner.plan_fft_inverse(size), forward: planner.plan_fft_forward(size) }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn scratch(&self) -> Scratch {
        let len = self.inverse.get_inplace_scratch_len().max(self.forward.get_inplace_scratch_len());
        Scratch { values: vec![Complex64::new(0.0, 0.0); self.size], work: vec![Complex64::new(0.0, 0.0); len] }
    }

    fn slot(&self, k: i64) -> usize {
        k.rem_euclid(self.size as i64) as usize
    }

    /// Field values at the collocation angles for radial node `i`.
    fn synthesize(&self, state: &FieldState, i: usize, s: &mut Scratch) {
        s.values.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let n = self.n_max as i64;
        for k in -n..=n {
            s.values[self.slot(k)] = state.mode(k)[i];
        }
        self.inverse.process_with_scratch(&mut s.values, &mut s.work);
    }

    /// Applies `f` pointwise and returns the retained Fourier modes in
    /// node-major order (`out[i][k + n_max]`).
    pub fn pointwise<F>(&self, state: &FieldState, exec: Exec, f: F) -> Vec<Vec<Complex64>>
    where
        F: Fn(Complex64) -> Complex64 + Sync + Send,
    {
        let n = self.n_max as i64;
        let scale = 1.0 / self.size as f64;
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); 2 * self.n_max + 1]; state.nodes()];
        exec.for_each_mut_init(
            &mut rows,
            || self.scratch(),
            |s, i, row| {
                self.synthesize(state, i, s);
                s.values.iter_mut().for_each(|v| *v = f(*v));
                self.forward.process_with_scratch(&mut s.values, &mut s.work);
                for k in -n..=n {
                    row[(k + n) as usize] = s.values[self.slot(k)] * scale;
                }
            },
        );
        rows
    }

    /// `Σ_i w_i ⟨g(Ψ(s_i, ·))⟩_φ` with the azimuthal mean `⟨·⟩_φ`; exact for
    /// trigonometric integrands of degree at most `4 n_max`.
    pub fn integrate<G>(&self, state: &FieldState, weights: &[f64], exec: Exec, g: G) -> f64
    where
        G: Fn(Complex64) -> f64 + Sync + Send,
    {
        let mut per_node = vec![0.0; state.nodes()];
        let mean = 1.0 / self.size as f64;
        exec.for_each_mut_init(
            &mut per_node,
            || self.scratch(),
            |s, i, out| {
                self.synthesize(state, i, s);
                *out = weights[i] * mean * s.values.iter().map(|&v| g(v)).sum::<f64>();
            },
        );
        per_node.iter().sum()
    }
}
