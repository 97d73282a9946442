//! Roots of the delayed characteristic equation
//!
//! ```text
//! f(z) = z - μ̂ - b (1 - χ e^{-τz} e^{-inζ}) = 0
//! ```
//!
//! inside a rectangle of the complex plane. The number of roots is
//! certified by the argument principle on the rectangle boundary; roots are
//! isolated by recursive subdivision and polished by damped Newton.

use num_complex::Complex64;

use super::ControlError;

/// Roots are polished until `|f| < NEWTON_TOL (1 + |z|)`.
const NEWTON_TOL: f64 = 1e-13;
/// Roots with a larger residual are reported as failures.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;
const MAX_SUBDIVISION_DEPTH: usize = 60;
const EDGE_SEGMENTS: usize = 32;
const MAX_EDGE_DEPTH: usize = 40;
/// Off-centre split fractions; roots on symmetry lines (for instance the
/// real axis) never sit on a split.
const SPLITS: [f64; 4] = [0.5371, 0.4629, 0.5813, 0.4187];

/// One instance of the characteristic equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharProblem {
    pub mu_hat: f64,
    pub n: i64,
    pub b: f64,
    pub tau: f64,
    pub zeta: f64,
    /// `+1` or `-1`.
    pub chi: f64,
}

impl CharProblem {
    /// `b χ e^{-inζ}`, the coefficient of `e^{-τz}`.
    fn coefficient(&self) -> Complex64 {
        self.b * self.chi * Complex64::from_polar(1.0, -(self.n as f64) * self.zeta)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        z - self.mu_hat - self.b + self.coefficient() * (-self.tau * z).exp()
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        1.0 - self.tau * self.coefficient() * (-self.tau * z).exp()
    }

    /// Residuals of the real and imaginary parts of the equation.
    pub fn residual(&self, z: Complex64) -> f64 {
        self.eval(z).norm()
    }

    /// Every root satisfies `Re z ≤` this value: from
    /// `|z - μ̂ - b| = |b| e^{-τ Re z}`.
    pub fn real_part_bound(&self) -> f64 {
        let shift = self.mu_hat + self.b;
        let amp = self.b.abs();
        if amp == 0.0 {
            return shift;
        }
        if self.tau == 0.0 {
            return shift + amp;
        }
        // g(μ) = μ - shift - amp e^{-τμ} is increasing.
        let g = |mu: f64| mu - shift - amp * (-self.tau * mu).exp();
        let mut lo = shift;
        let mut hi = shift + amp;
        while g(lo) > 0.0 {
            lo -= (hi - lo).max(1.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-14 * hi.abs().max(1.0) {
                break;
            }
        }
        hi
    }

    /// Largest `|Im z|` of a root with `Re z ≥ mu_floor`.
    pub fn imag_part_bound(&self, mu_floor: f64) -> f64 {
        self.b.abs() * (-self.tau * mu_floor).exp()
    }
}

/// Axis-aligned rectangle `[mu_min, mu_max] × [nu_min, nu_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchBox {
    pub mu_min: f64,
    pub mu_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
}

impl SearchBox {
    /// Smallest padded box holding every root with `Re z ≥ floor`, or `None`
    /// if no root can lie there.
    pub fn enclosing(problem: &CharProblem, floor: f64) -> Option<Self> {
        let top = problem.real_part_bound();
        if top < floor {
            return None;
        }
        let height = problem.imag_part_bound(floor) + 0.5;
        Some(Self { mu_min: floor, mu_max: top + 0.5, nu_min: -height, nu_max: height })
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.mu_min - slack && z.re <= self.mu_max + slack && z.im >= self.nu_min - slack && z.im <= self.nu_max + slack
    }

    fn diameter(&self) -> f64 {
        (self.mu_max - self.mu_min).hypot(self.nu_max - self.nu_min)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.mu_min, self.nu_min),
            Complex64::new(self.mu_max, self.nu_min),
            Complex64::new(self.mu_max, self.nu_max),
            Complex64::new(self.mu_min, self.nu_max),
        ]
    }

    fn split(&self, fraction: f64) -> [SearchBox; 4] {
        let mu = self.mu_min + fraction * (self.mu_max - self.mu_min);
        let nu = self.nu_min + (1.0 - fraction) * (self.nu_max - self.nu_min);
        [
            SearchBox { mu_min: self.mu_min, mu_max: mu, nu_min: self.nu_min, nu_max: nu },
            SearchBox { mu_min: mu, mu_max: self.mu_max, nu_min: self.nu_min, nu_max: nu },
            SearchBox { mu_min: self.mu_min, mu_max: mu, nu_min: nu, nu_max: self.nu_max },
            SearchBox { mu_min: mu, mu_max: self.mu_max, nu_min: nu, nu_max: self.nu_max },
        ]
    }
}

/// A root `μ + iν` of the characteristic equation for one `(n, μ̂, χ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharRoot {
    pub mu: f64,
    pub nu: f64,
    pub n: i64,
    pub mu_hat: f64,
    /// `None` where no reflection sign is involved.
    pub chi: Option<f64>,
    pub residual: f64,
}

impl CharRoot {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.mu, self.nu)
    }
}

/// Winding number of `f` around the boundary of `rect`, or `None` if `f`
/// comes too close to zero on the boundary to resolve.
pub fn winding_number(problem: &CharProblem, rect: &SearchBox) -> Option<i64> {
    let corners = rect.corners();
    let mut total = 0.0;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let mut z0 = a;
        let mut f0 = problem.eval(z0);
        for k in 1..=EDGE_SEGMENTS {
            let z1 = a + (b - a) * (k as f64 / EDGE_SEGMENTS as f64);
            let f1 = problem.eval(z1);
            total += arg_change(problem, z0, f0, z1, f1, 0)?;
            z0 = z1;
            f0 = f1;
        }
    }
    let turns = total / std::f64::consts::TAU;
    let rounded = turns.round();
    ((turns - rounded).abs() < 0.05).then_some(rounded as i64)
}

fn arg_change(problem: &CharProblem, z0: Complex64, f0: Complex64, z1: Complex64, f1: Complex64, depth: usize) -> Option<f64> {
    let small = f0.norm().min(f1.norm());
    if !small.is_finite() || small == 0.0 {
        return None;
    }
    let mid = 0.5 * (z0 + z1);
    let slope = problem.derivative(mid).norm() * (z1 - z0).norm();
    if (f1 - f0).norm() <= 0.3 * small && slope <= 0.3 * small {
        return Some((f1 / f0).arg());
    }
    if depth >= MAX_EDGE_DEPTH {
        return None;
    }
    let fm = problem.eval(mid);
    Some(arg_change(problem, z0, f0, mid, fm, depth + 1)? + arg_change(problem, mid, fm, z1, f1, depth + 1)?)
}

/// Damped Newton iteration; returns a root with small residual or `None`.
pub fn newton(problem: &CharProblem, start: Complex64) -> Option<Complex64> {
    let mut z = start;
    let mut fz = problem.eval(z);
    for _ in 0..200 {
        if fz.norm() < NEWTON_TOL * (1.0 + z.norm()) {
            return Some(z);
        }
        let d = problem.derivative(z);
        if d.norm() == 0.0 || !d.norm().is_finite() {
            return None;
        }
        let step = fz / d;
        let mut alpha = 1.0;
        loop {
            let trial = z - alpha * step;
            let ft = problem.eval(trial);
            if ft.norm() < fz.norm() || alpha < 1e-6 {
                let stalled = (trial - z).norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm());
                z = trial;
                fz = ft;
                if stalled {
                    return (fz.norm() < ROOT_RESIDUAL_TOL).then_some(z);
                }
                break;
            }
            alpha *= 0.5;
        }
        if !z.norm().is_finite() {
            return None;
        }
    }
    (fz.norm() < ROOT_RESIDUAL_TOL).then_some(z)
}

/// Every root of `problem` inside `rect`, counted with multiplicity.
///
/// The box must hold every root with real part at least `rect.mu_min`;
/// otherwise `BoxTooSmall` is returned.
pub fn char_roots_mode(problem: &CharProblem, rect: &SearchBox) -> Result<Vec<CharRoot>, ControlError> {
    if !(problem.b <= 0.0) {
        return Err(ControlError::InvalidGain { b: problem.b });
    }
    if !(problem.tau >= 0.0 && problem.tau.is_finite()) {
        return Err(ControlError::BoxTooSmall(format!("delay must be nonnegative, got {}", problem.tau)));
    }
    if !(rect.mu_max > rect.mu_min && rect.nu_max > rect.nu_min) {
        return Err(ControlError::BoxTooSmall("empty rectangle".into()));
    }
    let top = problem.real_part_bound();
    let height = problem.imag_part_bound(rect.mu_min);
    if rect.mu_max <= top || rect.nu_max <= height || rect.nu_min >= -height {
        return Err(ControlError::BoxTooSmall(format!(
            "roots with real part >= {} may lie up to real part {top} and |imag| {height}",
            rect.mu_min
        )));
    }
    let (count, rect) = certified_count(problem, rect)?;
    let mut roots = Vec::with_capacity(count as usize);
    isolate(problem, &rect, count, 0, &mut roots)?;
    if roots.len() as i64 != count {
        return Err(ControlError::WindingMismatch { n: problem.n, winding: count, found: roots.len() as i64 });
    }
    Ok(roots
        .into_iter()
        .map(|z| CharRoot {
            mu: z.re,
            nu: z.im,
            n: problem.n,
            mu_hat: problem.mu_hat,
            chi: Some(problem.chi),
            residual: problem.residual(z),
        })
        .collect())
}

/// Winding count, nudging the rectangle outward if a root sits on its edge.
fn certified_count(problem: &CharProblem, rect: &SearchBox) -> Result<(i64, SearchBox), ControlError> {
    let mut r = *rect;
    for attempt in 0..8 {
        if let Some(k) = winding_number(problem, &r) {
            return Ok((k, r));
        }
        let pad = 1e-7 * (attempt as f64 + 1.0) * r.diameter().max(1.0);
        r = SearchBox { mu_min: r.mu_min - pad, mu_max: r.mu_max + 0.7 * pad, nu_min: r.nu_min - 0.9 * pad, nu_max: r.nu_max + 1.1 * pad };
    }
    Err(ControlError::WindingMismatch { n: problem.n, winding: -1, found: 0 })
}

fn isolate(problem: &CharProblem, rect: &SearchBox, count: i64, depth: usize, out: &mut Vec<Complex64>) -> Result<(), ControlError> {
    if count == 0 {
        return Ok(());
    }
    let slack = 1e-9 * rect.diameter().max(1e-12);
    if count == 1 || rect.diameter() < 1e-9 {
        let c = rect.corners();
        let centre = 0.5 * (c[0] + c[2]);
        let starts = [centre, 0.75 * c[0] + 0.25 * c[2], 0.25 * c[0] + 0.75 * c[2], 0.75 * c[1] + 0.25 * c[3], 0.25 * c[1] + 0.75 * c[3]];
        for s in starts {
            if let Some(z) = newton(problem, s) {
                if rect.contains(z, slack) {
                    for _ in 0..count {
                        out.push(z);
                    }
                    return Ok(());
                }
            }
        }
        if rect.diameter() < 1e-9 {
            return Err(ControlError::WindingMismatch { n: problem.n, winding: count, found: 0 });
        }
    }
    if depth >= MAX_SUBDIVISION_DEPTH {
        return Err(ControlError::WindingMismatch { n: problem.n, winding: count, found: 0 });
    }
    for fraction in SPLITS {
        let parts = rect.split(fraction);
        let counts: Option<Vec<i64>> = parts.iter().map(|p| winding_number(problem, p)).collect();
        if let Some(counts) = counts {
            if counts.iter().sum::<i64>() == count && counts.iter().all(|&k| k >= 0) {
                for (part, k) in parts.iter().zip(counts) {
                    isolate(problem, part, k, depth + 1, out)?;
                }
                return Ok(());
            }
        }
    }
    Err(ControlError::WindingMismatch { n: problem.n, winding: count, found: 0 })
}
