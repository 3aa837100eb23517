//! Dressed-state solution of the degenerate three-level atom.
//!
//! With every coupling sharing one time dependence, `V_jk(t) = K_jk·V(t)`, the
//! combinations `c_j = a_1 + x_j a_2 + y_j a_3` evolve by pure phases
//! `exp(-i z_j A(t))` where `A(t)` is the action of `V`. The `y_j` are the
//! roots of a cubic in the coupling ratios; `x_j` and `z_j` follow from the
//! fixed-point relations
//!
//! ```text
//! x z = α + ε₂ x + y,   y z = β + x + ε₃ y,   z = ε₁ + α x + β y.
//! ```

use crate::cubic::{Cubic, CubicError};
use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Below this `|y|` a root is treated as the zero root and placed last.
pub const ZERO_ROOT_TOL: f64 = 1e-9;
/// Smallest `|Δ|` accepted for the basis matrix.
pub const SINGULAR_TOL: f64 = 1e-9;
/// Largest fixed-point residual accepted for a recovered `(x, y, z)` triple.
pub const FIXED_POINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DressedError {
    #[error("coupling ratios must be finite")]
    NonFinite,
    #[error("level 1 decouples or the cubic loses its degree (leading coefficient {c3:e})")]
    Degenerate { c3: f64 },
    #[error("repeated root y = {root}; the dressed basis is singular")]
    RepeatedRoot { root: f64 },
    #[error(
        "complex roots (relative discriminant {discriminant:e}); outside the real-spectrum regime"
    )]
    ComplexRoots { discriminant: f64 },
    #[error("basis matrix is singular (|Δ| = {det:e})")]
    SingularBasis { det: f64 },
    #[error("no x consistent with root y = {y} (residual {residual:e})")]
    NoConsistentX { y: f64, residual: f64 },
}

impl From<CubicError> for DressedError {
    fn from(e: CubicError) -> Self {
        match e {
            CubicError::Degenerate { c3 } => DressedError::Degenerate { c3 },
            CubicError::RepeatedRoot { root } => DressedError::RepeatedRoot { root },
            CubicError::ComplexRoots { discriminant } => {
                DressedError::ComplexRoots { discriminant }
            }
            CubicError::NonFinite => DressedError::NonFinite,
        }
    }
}

/// Shape of the interaction relative to `V(t) = V₂₃(t)`:
/// `α = V₁₂/V₂₃`, `β = V₁₃/V₂₃`, `ε_j = V_jj/V₂₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRatios {
    pub alpha: f64,
    pub beta: f64,
    pub eps: [f64; 3],
}

impl CouplingRatios {
    /// Ratios with vanishing diagonal couplings.
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            eps: [0.0; 3],
        }
    }

    pub fn with_eps(alpha: f64, beta: f64, eps: [f64; 3]) -> Self {
        Self { alpha, beta, eps }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.eps.iter().all(|e| e.is_finite())
    }

    /// Symmetric matrix `K` with `V_jk(t) = K_jk·V(t)`.
    pub fn coupling_matrix(&self) -> [[f64; 3]; 3] {
        let [e1, e2, e3] = self.eps;
        [
            [e1, self.alpha, self.beta],
            [self.alpha, e2, 1.0],
            [self.beta, 1.0, e3],
        ]
    }

    /// The cubic in `y` whose roots label the dressed states. Reduces to
    /// `(β²−α²)y³ + α(2−α²−β²)y² + (2α²−β²−1)y + α(β²−1)` when all `ε_j = 0`.
    pub fn cubic(&self) -> Cubic {
        let (a, b) = (self.alpha, self.beta);
        let [e1, e2, e3] = self.eps;
        Cubic::new(
            (b * b - a * a) + a * b * (e2 - e3),
            a * (2.0 - a * a - b * b) + b * (2.0 * e1 - e2 - e3) + a * (e1 - e3) * (e2 - e3),
            (2.0 * a * a - b * b - 1.0) + a * b * (2.0 * e3 - e1 - e2) + (e1 - e2) * (e1 - e3),
            a * (b * b - 1.0) - b * (e1 - e2),
        )
    }

    /// Residuals of the two fixed-point relations at `(x, y)`.
    pub fn fixed_point_residuals(&self, x: f64, y: f64) -> (f64, f64) {
        let [e1, e2, e3] = self.eps;
        let z = e1 + self.alpha * x + self.beta * y;
        (
            x * z - (self.alpha + e2 * x + y),
            y * z - (self.beta + x + e3 * y),
        )
    }
}

/// Probability amplitudes `a_i` at a given action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState {
    pub action: f64,
    pub a: [C64; 3],
}

impl AmplitudeState {
    pub fn initial() -> Self {
        Self {
            action: 0.0,
            a: [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> PopulationSample {
        PopulationSample::from_amplitudes(&self.a)
    }
}

/// Occupation probabilities `(P₁, P₂, P₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PopulationSample {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl PopulationSample {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Self {
        Self { p1, p2, p3 }
    }

    pub fn from_amplitudes(a: &[C64; 3]) -> Self {
        Self::new(a[0].norm_sqr(), a[1].norm_sqr(), a[2].norm_sqr())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    pub fn total(&self) -> f64 {
        self.p1 + self.p2 + self.p3
    }

    /// Population of level `1`, `2` or `3`.
    pub fn level(&self, level: usize) -> f64 {
        match level {
            1 => self.p1,
            2 => self.p2,
            3 => self.p3,
            _ => panic!("level must be 1, 2 or 3, got {level}"),
        }
    }

    /// Swap levels 2 and 3.
    pub fn swap_23(self) -> Self {
        Self::new(self.p1, self.p3, self.p2)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.p1 - other.p1)
            .abs()
            .max((self.p2 - other.p2).abs())
            .max((self.p3 - other.p3).abs())
    }
}

/// Eigen-structure of the dressed states: rows `(1, x_j, y_j)` of `ℳ`, the
/// phases `z_j`, `Δ = det ℳ` and `ℳ⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedBasis {
    ratios: CouplingRatios,
    x: [f64; 3],
    y: [f64; 3],
    z: [f64; 3],
    det: f64,
    m: Matrix3<f64>,
    m_inv: Matrix3<f64>,
}

impl DressedBasis {
    pub fn ratios(&self) -> &CouplingRatios {
        &self.ratios
    }
    pub fn x(&self) -> [f64; 3] {
        self.x
    }
    pub fn y(&self) -> [f64; 3] {
        self.y
    }
    pub fn z(&self) -> [f64; 3] {
        self.z
    }
    pub fn det(&self) -> f64 {
        self.det
    }
    pub fn m(&self) -> &Matrix3<f64> {
        &self.m
    }
    pub fn m_inv(&self) -> &Matrix3<f64> {
        &self.m_inv
    }

    /// Largest fixed-point residual over the three dressed states.
    pub fn max_fixed_point_residual(&self) -> f64 {
        (0..3)
            .map(|j| {
                let (r1, r2) = self.ratios.fixed_point_residuals(self.x[j], self.y[j]);
                r1.abs().max(r2.abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Three real roots `y_j` of the dressed-state cubic. A root with
/// `|y| < 1e-9` goes last; the others are sorted in descending order.
pub fn solve_cubic(ratios: &CouplingRatios) -> Result<[f64; 3], DressedError> {
    if !ratios.is_finite() {
        return Err(DressedError::NonFinite);
    }
    let mut roots = ratios.cubic().real_roots()?;
    roots.sort_by(|a, b| {
        let za = a.abs() < ZERO_ROOT_TOL;
        let zb = b.abs() < ZERO_ROOT_TOL;
        za.cmp(&zb).then(b.total_cmp(a))
    });
    Ok(roots)
}

pub fn build_dressed_basis(ratios: &CouplingRatios) -> Result<DressedBasis, DressedError> {
    let roots = solve_cubic(ratios)?;
    let mut x = [0.0; 3];
    let mut y = [0.0; 3];
    for j in 0..3 {
        let (xj, yj) = recover_x(ratios, roots[j])?;
        x[j] = xj;
        y[j] = yj;
    }
    let [e1, _, _] = ratios.eps;
    let z = [0, 1, 2].map(|j| e1 + ratios.alpha * x[j] + ratios.beta * y[j]);

    let det = x[0] * y[1] + x[1] * y[2] + x[2] * y[0] - x[0] * y[2] - x[1] * y[0] - x[2] * y[1];
    if !(det.abs() > SINGULAR_TOL) {
        return Err(DressedError::SingularBasis { det });
    }

    #[rustfmt::skip]
    let m = Matrix3::new(
        1.0, x[0], y[0],
        1.0, x[1], y[1],
        1.0, x[2], y[2],
    );
    #[rustfmt::skip]
    let m_inv = Matrix3::new(
        x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0],
        y[1] - y[2],               y[2] - y[0],               y[0] - y[1],
        x[2] - x[1],               x[0] - x[2],               x[1] - x[0],
    ) / det;

    Ok(DressedBasis {
        ratios: *ratios,
        x,
        y,
        z,
        det,
        m,
        m_inv,
    })
}

/// Recover `x` for a root `y`, then polish the pair on both fixed-point
/// relations. Returns the polished `(x, y)`.
fn recover_x(r: &CouplingRatios, y: f64) -> Result<(f64, f64), DressedError> {
    let (a, b) = (r.alpha, r.beta);
    let [e1, e2, e3] = r.eps;

    // The y-relation is linear in x: x (αy − 1) = β + (ε₃ − ε₁) y − β y².
    let denom = a * y - 1.0;
    let numer = b + (e3 - e1) * y - b * y * y;
    let x0 = if denom.abs() > 1e-8 * (a * y).abs().max(1.0) {
        numer / denom
    } else {
        // αy ≈ 1: fall back on the x-relation, α x² + (ε₁ + βy − ε₂) x − (α + y) = 0.
        let lin = e1 + b * y - e2;
        let candidates: Vec<f64> = if a.abs() < 1e-14 {
            vec![(a + y) / lin]
        } else {
            let disc = lin * lin + 4.0 * a * (a + y);
            if disc < 0.0 {
                return Err(DressedError::NoConsistentX {
                    y,
                    residual: disc.abs(),
                });
            }
            let s = disc.sqrt();
            vec![(-lin + s) / (2.0 * a), (-lin - s) / (2.0 * a)]
        };
        candidates
            .into_iter()
            .filter(|x| x.is_finite())
            .min_by(|p, q| residual_norm(r, *p, y).total_cmp(&residual_norm(r, *q, y)))
            .ok_or(DressedError::NoConsistentX {
                y,
                residual: f64::INFINITY,
            })?
    };

    let (mut x, mut y) = (x0, y);
    let mut res = residual_norm(r, x, y);
    for _ in 0..6 {
        if res == 0.0 {
            break;
        }
        let z = e1 + a * x + b * y;
        let (f1, f2) = r.fixed_point_residuals(x, y);
        let j11 = z + a * x - e2;
        let j12 = b * x - 1.0;
        let j21 = a * y - 1.0;
        let j22 = z + b * y - e3;
        let jdet = j11 * j22 - j12 * j21;
        if jdet == 0.0 || !jdet.is_finite() {
            break;
        }
        let dx = (f1 * j22 - f2 * j12) / jdet;
        let dy = (j11 * f2 - j21 * f1) / jdet;
        let (nx, ny) = (x - dx, y - dy);
        let nres = residual_norm(r, nx, ny);
        if !(nres < res) {
            break;
        }
        x = nx;
        y = ny;
        res = nres;
    }

    if !(res < FIXED_POINT_TOL) {
        return Err(DressedError::NoConsistentX { y, residual: res });
    }
    Ok((x, y))
}

fn residual_norm(r: &CouplingRatios, x: f64, y: f64) -> f64 {
    let (f1, f2) = r.fixed_point_residuals(x, y);
    f1.abs().max(f2.abs())
}

/// `a_i(A) = Σ_j ℳ⁻¹_ij exp(−i z_j A)`.
pub fn amplitudes_at(basis: &DressedBasis, action: f64) -> AmplitudeState {
    let phases = basis.z.map(|z| C64::from_polar(1.0, -z * action));
    let mut a = [C64::new(0.0, 0.0); 3];
    for (i, ai) in a.iter_mut().enumerate() {
        for (j, ph) in phases.iter().enumerate() {
            *ai += basis.m_inv[(i, j)] * ph;
        }
    }
    AmplitudeState { action, a }
}

/// Populations from the cosine sums
/// `P_k = Σ_i ℳ⁻¹_ki² + 2 Σ_{i<j} ℳ⁻¹_ki ℳ⁻¹_kj cos((z_i − z_j) A)`.
pub fn populations_general(basis: &DressedBasis, action: f64) -> PopulationSample {
    let z = basis.z;
    let c12 = ((z[0] - z[1]) * action).cos();
    let c13 = ((z[0] - z[2]) * action).cos();
    let c23 = ((z[1] - z[2]) * action).cos();
    let p = [0, 1, 2].map(|k| {
        let w = [
            basis.m_inv[(k, 0)],
            basis.m_inv[(k, 1)],
            basis.m_inv[(k, 2)],
        ];
        w[0] * w[0]
            + w[1] * w[1]
            + w[2] * w[2]
            + 2.0 * (w[0] * w[1] * c12 + w[0] * w[2] * c13 + w[1] * w[2] * c23)
    });
    PopulationSample::new(p[0], p[1], p[2])
}
