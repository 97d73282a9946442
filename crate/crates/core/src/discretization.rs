//! Staggered radial grids and the per-mode Laplacians `Δ_n`.
//!
//! Nodes sit at cell centres `s_i = (i + ½)Δs`, so neither the pole nor the
//! far end of the meridian is a node. `Δ_n u = u'' + (a'/a) u' - (n²/a²) u`
//! is discretised in conservative (flux) form,
//!
//! ```text
//! (Δ_n u)_i = [a_{i+½}(u_{i+1} - u_i) - a_{i-½}(u_i - u_{i-1})] / (a_i Δs²) - n² u_i / a_i²
//! ```
//!
//! which is a second-order central scheme. At the pole the face radius
//! vanishes, so the ghost value (even or odd reflection alike) drops out;
//! on closed surfaces the same happens at `s*`. Otherwise the Robin
//! condition `α1 u + α2 u' = 0` is imposed through a ghost node. The flux
//! form makes the matrix exactly symmetric in the quadrature inner product
//! `⟨u, v⟩ = Σ w_i u_i v_i`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::geometry::{BoundaryCondition, SurfaceSpec};
use crate::linalg::{symmetric_eigen_descending, tridiag_apply};

/// Smallest admissible grid.
pub const MIN_NODES: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizationError {
    #[error("mode |n| = {n} is not resolved by {nodes} radial nodes (need |n| <= N/4)")]
    ResolutionExceeded { n: i64, nodes: usize },
    #[error("radial grid needs at least {MIN_NODES} nodes, got {0}")]
    GridTooCoarse(usize),
    #[error("eigen solver failed: {0}")]
    EigenSolverFailure(String),
}

/// Cell-centred grid on `(0, s*)` with quadrature weights `2π a(s_i) Δs`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    n: usize,
    s_star: f64,
    ds: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    a_nodes: Vec<f64>,
    a_faces: Vec<f64>,
    boundary_empty: bool,
    reflection_symmetric: bool,
}

/// Builds the staggered grid with `n` cells.
pub fn build_grid(surface: &SurfaceSpec, n: usize) -> Result<RadialGrid, DiscretizationError> {
    if n < MIN_NODES {
        return Err(DiscretizationError::GridTooCoarse(n));
    }
    let s_star = surface.s_star();
    let ds = s_star / n as f64;
    let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * ds).collect();
    let mut a_nodes: Vec<f64> = nodes.iter().map(|&s| surface.a(s)).collect();
    let mut a_faces: Vec<f64> = (0..=n).map(|k| surface.a(k as f64 * ds)).collect();
    a_faces[0] = 0.0;
    if surface.boundary_empty() {
        a_faces[n] = 0.0;
    }
    let reflection_symmetric = surface.reflection_symmetric();
    if reflection_symmetric {
        // Make index reversal an exact symmetry of the discrete operators.
        for i in 0..n / 2 {
            let avg = 0.5 * (a_nodes[i] + a_nodes[n - 1 - i]);
            a_nodes[i] = avg;
            a_nodes[n - 1 - i] = avg;
        }
        for k in 0..=n / 2 {
            let avg = 0.5 * (a_faces[k] + a_faces[n - k]);
            a_faces[k] = avg;
            a_faces[n - k] = avg;
        }
    }
    let weights = a_nodes.iter().map(|a| 2.0 * PI * a * ds).collect();
    Ok(RadialGrid {
        n,
        s_star,
        ds,
        nodes,
        weights,
        a_nodes,
        a_faces,
        boundary_empty: surface.boundary_empty(),
        reflection_symmetric,
    })
}

impl RadialGrid {
    /// Number of nodes `N`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn s_star(&self) -> f64 {
        self.s_star
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `a(s_i)` at the nodes.
    pub fn radii(&self) -> &[f64] {
        &self.a_nodes
    }

    /// `a` at the `N + 1` cell faces `kΔs`.
    pub fn face_radii(&self) -> &[f64] {
        &self.a_faces
    }

    pub fn boundary_empty(&self) -> bool {
        self.boundary_empty
    }

    pub fn reflection_symmetric(&self) -> bool {
        self.reflection_symmetric
    }

    /// Weighted inner product `Σ w_i x_i y_i` of real vectors.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        self.weights.iter().zip(x).zip(y).map(|((w, a), b)| w * a * b).sum()
    }

    /// Weighted norm of a real vector.
    pub fn norm(&self, x: &[f64]) -> f64 {
        self.dot(x, x).sqrt()
    }

    /// Largest `|n|` the grid resolves.
    pub fn max_mode(&self) -> i64 {
        (self.n / 4) as i64
    }
}

/// A surface, its boundary data and a radial grid: everything the
/// operators need.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    surface: SurfaceSpec,
    bc: BoundaryCondition,
    grid: RadialGrid,
}

impl Domain {
    pub fn new(surface: SurfaceSpec, bc: BoundaryCondition, nodes: usize) -> Result<Self, DiscretizationError> {
        let grid = build_grid(&surface, nodes)?;
        Ok(Self { surface, bc, grid })
    }

    pub fn surface(&self) -> &SurfaceSpec {
        &self.surface
    }

    pub fn bc(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// `Δ_n` on this domain.
    pub fn laplacian(&self, n: i64) -> Result<ModeLaplacian, DiscretizationError> {
        assemble_delta_n(&self.grid, &self.bc, n)
    }
}

/// Tridiagonal matrix of `Δ_n` on a [`RadialGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModeLaplacian {
    n: i64,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    weights: Vec<f64>,
}

/// Assembles `Δ_n` with the pole closure and, on surfaces with boundary,
/// the Robin closure at `s*`.
pub fn assemble_delta_n(grid: &RadialGrid, bc: &BoundaryCondition, n: i64) -> Result<ModeLaplacian, DiscretizationError> {
    let nodes = grid.len();
    if n.unsigned_abs() as usize > nodes / 4 {
        return Err(DiscretizationError::ResolutionExceeded { n, nodes });
    }
    let ds2 = grid.ds * grid.ds;
    let a = &grid.a_nodes;
    let f = &grid.a_faces;
    let n2 = (n * n) as f64;
    let mut lower = vec![0.0; nodes - 1];
    let mut upper = vec![0.0; nodes - 1];
    let mut diag = vec![0.0; nodes];
    for i in 0..nodes {
        let scale = 1.0 / (a[i] * ds2);
        diag[i] = -(f[i] + f[i + 1]) * scale - n2 / (a[i] * a[i]);
        if i > 0 {
            lower[i - 1] = f[i] * scale;
        }
        if i + 1 < nodes {
            upper[i] = f[i + 1] * scale;
        }
    }
    if !grid.boundary_empty {
        // Ghost value u_N = g u_{N-1} from α1 (u_N + u_{N-1})/2 + α2 (u_N - u_{N-1})/Δs = 0.
        let (a1, a2) = (bc.alpha1(), bc.alpha2());
        let g = (a2 / grid.ds - 0.5 * a1) / (a2 / grid.ds + 0.5 * a1);
        let last = nodes - 1;
        diag[last] += f[nodes] * g / (a[last] * ds2);
    }
    Ok(ModeLaplacian { n, lower, diag, upper, weights: grid.weights.clone() })
}

impl ModeLaplacian {
    pub fn mode(&self) -> i64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// `y = Δ_n x` for real or complex `x`.
    pub fn apply_into<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        tridiag_apply(&self.lower, &self.diag, &self.upper, x, y);
    }

    pub fn apply<T>(&self, x: &[T]) -> Vec<T>
    where
        T: Copy + Default + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let mut y = vec![T::default(); x.len()];
        self.apply_into(x, &mut y);
        y
    }

    /// Dense copy of the matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.upper[i];
                m[(i + 1, i)] = self.lower[i];
            }
        }
        m
    }

    /// Off-diagonal of `W^{1/2} Δ_n W^{-1/2}`, which is symmetric; the
    /// diagonal is unchanged by the similarity.
    pub fn symmetric_offdiag(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (l * u).max(0.0).sqrt()).collect()
    }

    /// Largest `|w_i A_ij - w_j A_ji|`, relative to the largest entry of `W A`.
    pub fn weighted_asymmetry(&self) -> f64 {
        let w = &self.weights;
        let mut scale: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            scale = scale.max((w[i] * self.diag[i]).abs());
            if i + 1 < self.len() {
                let left = w[i] * self.upper[i];
                let right = w[i + 1] * self.lower[i];
                scale = scale.max(left.abs()).max(right.abs());
                worst = worst.max((left - right).abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// One eigenpair of `-Δ_m`; the vector has unit weighted norm.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// The `count` smallest eigenvalues of `-Δ_m`, ascending, with eigenvectors
/// normalised in the weighted norm and signed to be positive near the pole.
pub fn eigen_delta_m(op: &ModeLaplacian, count: usize) -> Result<Vec<EigenPair>, DiscretizationError> {
    let nodes = op.len();
    if count > nodes / 4 {
        return Err(DiscretizationError::EigenSolverFailure(format!(
            "requested {count} eigenpairs from {nodes} nodes (limit N/4)"
        )));
    }
    let off = op.symmetric_offdiag();
    let mut dense = DMatrix::zeros(nodes, nodes);
    for i in 0..nodes {
        dense[(i, i)] = -op.diag[i];
        if i + 1 < nodes {
            dense[(i, i + 1)] = -off[i];
            dense[(i + 1, i)] = -off[i];
        }
    }
    let (values, vectors) = symmetric_eigen_descending(dense);
    let mut pairs = Vec::with_capacity(count);
    for k in 0..count {
        let col = nodes - 1 - k;
        let value = values[col];
        if !value.is_finite() {
            return Err(DiscretizationError::EigenSolverFailure("non-finite eigenvalue".into()));
        }
        let mut vector: Vec<f64> = (0..nodes).map(|i| vectors[(i, col)] / op.weights[i].sqrt()).collect();
        let norm = vector.iter().zip(&op.weights).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
        let peak = vector.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let first = vector.iter().find(|x| x.abs() > 1e-3 * peak).copied().unwrap_or(1.0);
        let sign = if first < 0.0 { -1.0 } else { 1.0 };
        vector.iter_mut().for_each(|x| *x *= sign / norm);
        pairs.push(EigenPair { value, vector });
    }
    for w in pairs.windows(2) {
        if w[1].value - w[0].value <= 1e-12 * w[1].value.abs().max(1.0) {
            return Err(DiscretizationError::EigenSolverFailure(format!(
                "eigenvalues {} and {} are not separated",
                w[0].value, w[1].value
            )));
        }
    }
    Ok(pairs)
}


#[cfg(test)]
mod tests {
    use super::oracles::*;
    use super::*;
    use proptest::prelude::*;

    fn lowest(surface: &SurfaceSpec, bc: BoundaryCondition, m: i64, n: usize, count: usize) -> Vec<EigenPair> {
        let grid = build_grid(surface, n).unwrap();
        eigen_delta_m(&assemble_delta_n(&grid, &bc, m).unwrap(), count).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn oracle_sanity() {
        assert!((bessel_j(0, 0.0) - 1.0).abs() < 1e-15);
        let j11 = first_root(|x| bessel_j(1, x), 0.5);
        assert!((j11 - 3.831705970207512).abs() < 1e-12);
    }

    #[test]
    fn grid_area_and_staggering() {
        let sphere = build_grid(&SurfaceSpec::sphere(), 256).unwrap();
        assert!((sphere.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 2e-4);
        assert!((sphere.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 10.0 / (256.0f64).powi(2));
        let disk = build_grid(&SurfaceSpec::disk(), 64).unwrap();
        assert!((disk.weights().iter().sum::<f64>() - PI).abs() < 1e-3);
        for g in [&sphere, &disk] {
            assert!(g.radii().iter().all(|&a| a > 0.0));
            assert!(g.nodes()[0] > 0.0 && *g.nodes().last().unwrap() < g.s_star());
        }
        let n = sphere.len();
        for i in 0..n {
            assert!((sphere.nodes()[i] + sphere.nodes()[n - 1 - i] - PI).abs() < 1e-14);
            assert_eq!(sphere.radii()[i], sphere.radii()[n - 1 - i]);
        }
        assert!(matches!(build_grid(&SurfaceSpec::disk(), 16), Err(DiscretizationError::GridTooCoarse(16))));
    }

    #[test]
    fn disk_dirichlet_matches_bessel_zeros() {
        for (m, start) in [(1u32, 0.5), (2, 0.5)] {
            let zero = first_root(|x| bessel_j(m, x), start);
            let ev = lowest(&SurfaceSpec::disk(), BoundaryCondition::dirichlet(), m as i64, 512, 3);
            assert!(rel(ev[0].value, zero * zero) < 1e-3, "m={m}: {} vs {}", ev[0].value, zero * zero);
        }
    }

    #[test]
    fn disk_neumann_matches_bessel_derivative_zero() {
        let zero = first_root(|x| bessel_j_prime(1, x), 0.5);
        assert!((zero * zero - 3.3900).abs() < 1e-4);
        let ev = lowest(&SurfaceSpec::disk(), BoundaryCondition::neumann(), 1, 512, 3);
        assert!(rel(ev[0].value, zero * zero) < 1e-3);
    }

    #[test]
    fn disk_robin_matches_bessel_robin_zero() {
        // α1 J_1(k) + α2 k J_1'(k) = 0 for the first eigenvalue k².
        let bc = BoundaryCondition::new(2.0, 1.0).unwrap();
        let zero = first_root(|k| 2.0 * bessel_j(1, k) + k * bessel_j_prime(1, k), 0.5);
        let ev = lowest(&SurfaceSpec::disk(), bc, 1, 512, 2);
        assert!(rel(ev[0].value, zero * zero) < 1e-3);
    }

    #[test]
    fn sphere_matches_legendre() {
        let ev = lowest(&SurfaceSpec::sphere(), BoundaryCondition::dirichlet(), 1, 512, 4);
        for (k, pair) in ev.iter().enumerate() {
            let l = (k + 1) as f64;
            assert!(rel(pair.value, l * (l + 1.0)) < 1e-3, "k={k}: {}", pair.value);
        }
        // Eigenvectors are the associated Legendre functions P_l^1(cos s).
        let grid = build_grid(&SurfaceSpec::sphere(), 512).unwrap();
        for (k, pair) in ev.iter().take(2).enumerate() {
            let p: Vec<f64> = grid.nodes().iter().map(|s| assoc_legendre(k as u32 + 1, 1, s.cos())).collect();
            let cos = grid.dot(&p, &pair.vector).abs() / grid.norm(&p);
            assert!((cos - 1.0).abs() < 1e-5, "k={k}: {cos}");
        }
    }

    #[test]
    fn second_order_convergence() {
        let cases = [
            (SurfaceSpec::disk(), BoundaryCondition::dirichlet(), 1),
            (SurfaceSpec::disk(), BoundaryCondition::neumann(), 2),
            (SurfaceSpec::sphere(), BoundaryCondition::dirichlet(), 1),
        ];
        for (surface, bc, m) in cases {
            let e: Vec<Vec<EigenPair>> = [64, 128, 256].iter().map(|&n| lowest(&surface, bc, m, n, 3)).collect();
            for k in 0..3 {
                let ratio = (e[0][k].value - e[1][k].value) / (e[1][k].value - e[2][k].value);
                assert!((3.5..=4.5).contains(&ratio), "{:?} m={m} k={k}: ratio {ratio}", surface.kind());
            }
        }
    }

    #[test]
    fn neumann_constant_kernel_and_ordering() {
        let grid = build_grid(&SurfaceSpec::disk(), 128).unwrap();
        let op = assemble_delta_n(&grid, &BoundaryCondition::neumann(), 0).unwrap();
        let ones = vec![1.0; grid.len()];
        assert!(op.apply(&ones).iter().all(|v: &f64| v.abs() < 1e-8));
        let ev = lowest(&SurfaceSpec::sphere(), BoundaryCondition::dirichlet(), 2, 128, 6);
        assert!(ev.windows(2).all(|w| w[0].value < w[1].value));
        assert!(ev[0].value > 0.0);
    }

    #[test]
    fn resolution_guard() {
        let grid = build_grid(&SurfaceSpec::disk(), 64).unwrap();
        assert!(assemble_delta_n(&grid, &BoundaryCondition::dirichlet(), 16).is_ok());
        assert!(matches!(
            assemble_delta_n(&grid, &BoundaryCondition::dirichlet(), -17),
            Err(DiscretizationError::ResolutionExceeded { n: -17, nodes: 64 })
        ));
        let op = assemble_delta_n(&grid, &BoundaryCondition::dirichlet(), 1).unwrap();
        assert!(eigen_delta_m(&op, 17).is_err());
    }

    proptest! {
        #[test]
        fn weighted_symmetry_and_mode_sign(n in -8i64..=8, nodes in 32usize..160, a1 in 0.0f64..5.0, a2 in 0.0f64..5.0, sphere in any::<bool>()) {
            prop_assume!(a1 + a2 > 1e-3);
            let surface = if sphere { SurfaceSpec::sphere() } else { SurfaceSpec::disk() };
            let grid = build_grid(&surface, nodes).unwrap();
            let bc = BoundaryCondition::new(a1, a2).unwrap();
            let op = assemble_delta_n(&grid, &bc, n).unwrap();
            prop_assert!(op.weighted_asymmetry() < 1e-8);
            let neg = assemble_delta_n(&grid, &bc, -n).unwrap();
            prop_assert_eq!(op.diag(), neg.diag());
            prop_assert_eq!(op.lower(), neg.lower());
            prop_assert_eq!(op.upper(), neg.upper());
        }
    }
}
