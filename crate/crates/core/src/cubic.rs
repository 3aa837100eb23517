//! Real roots of a cubic `c3·y³ + c2·y² + c1·y + c0 = 0`.
//!
//! Three distinct real roots are found with the trigonometric form of the
//! depressed cubic and polished by Newton iteration. When the discriminant is
//! too close to zero for the closed form to be trusted, the roots of the
//! companion matrix are used instead.

use nalgebra::Matrix3;
use std::f64::consts::PI;
use thiserror::Error;

/// Relative discriminant below which the companion-matrix path takes over.
pub const DISCRIMINANT_TOL: f64 = 1e-9;
/// Minimum separation of two roots, relative to `max(1, |y|)`.
pub const ROOT_SEPARATION_TOL: f64 = 1e-9;
/// Separation below which companion-matrix roots count as repeated. A double
/// root comes back split by about `sqrt(eps)`.
pub const COMPANION_SEPARATION_TOL: f64 = 1e-7;
/// Leading coefficient, relative to the largest one, below which the cubic is
/// treated as having lost its degree.
pub const LEADING_COEFF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum CubicError {
    #[error("leading coefficient vanishes (|c3| = {c3:e}); the cubic has lost its degree")]
    Degenerate { c3: f64 },
    #[error("cubic has a repeated root near {root}")]
    RepeatedRoot { root: f64 },
    #[error("cubic has complex roots (relative discriminant {discriminant:e})")]
    ComplexRoots { discriminant: f64 },
    #[error("non-finite coefficient")]
    NonFinite,
}

/// Coefficients ordered from the cubic term down to the constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Cubic {
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    pub fn eval(&self, y: f64) -> f64 {
        ((self.c3 * y + self.c2) * y + self.c1) * y + self.c0
    }

    fn derivative(&self, y: f64) -> f64 {
        (3.0 * self.c3 * y + 2.0 * self.c2) * y + self.c1
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.c3
            .abs()
            .max(self.c2.abs())
            .max(self.c1.abs())
            .max(self.c0.abs())
    }

    /// `|p(y)|` divided by the largest coefficient magnitude.
    pub fn relative_residual(&self, y: f64) -> f64 {
        self.eval(y).abs() / self.scale()
    }

    /// Three distinct real roots, in no particular order.
    pub fn real_roots(&self) -> Result<[f64; 3], CubicError> {
        if ![self.c3, self.c2, self.c1, self.c0]
            .iter()
            .all(|c| c.is_finite())
        {
            return Err(CubicError::NonFinite);
        }
        let scale = self.scale();
        if scale == 0.0 || self.c3.abs() <= LEADING_COEFF_TOL * scale {
            return Err(CubicError::Degenerate { c3: self.c3 });
        }

        let b = self.c2 / self.c3;
        let c = self.c1 / self.c3;
        let d = self.c0 / self.c3;
        let p = c - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        let four_p3 = 4.0 * p * p * p;
        let q2_27 = 27.0 * q * q;
        let denom = four_p3.abs() + q2_27;
        if denom == 0.0 {
            // p = q = 0: triple root.
            return Err(CubicError::RepeatedRoot { root: -b / 3.0 });
        }
        let rel_disc = -(four_p3 + q2_27) / denom;

        let mut roots = if rel_disc > DISCRIMINANT_TOL {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            let mut r = [0.0; 3];
            for (k, slot) in r.iter_mut().enumerate() {
                *slot = m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - b / 3.0;
            }
            r
        } else if rel_disc < -DISCRIMINANT_TOL {
            return Err(CubicError::ComplexRoots {
                discriminant: rel_disc,
            });
        } else {
            let r = self.companion_roots()?;
            check_separation(&r, COMPANION_SEPARATION_TOL)?;
            r
        };

        check_separation(&roots, ROOT_SEPARATION_TOL)?;
        let min_gap = min_gap(&roots);
        for y in roots.iter_mut() {
            *y = self.polish(*y, min_gap / 3.0);
        }
        check_separation(&roots, ROOT_SEPARATION_TOL)?;
        Ok(roots)
    }

    /// Roots of the monic companion matrix. Used only near a vanishing
    /// discriminant, where the trigonometric form loses accuracy.
    fn companion_roots(&self) -> Result<[f64; 3], CubicError> {
        let b = self.c2 / self.c3;
        let c = self.c1 / self.c3;
        let d = self.c0 / self.c3;
        #[rustfmt::skip]
        let companion = Matrix3::new(
            -b, -c, -d,
            1.0, 0.0, 0.0,
            0.0, 1.0, 0.0,
        );
        let eig = companion.complex_eigenvalues();
        // A double root may come back as a pair with a tiny imaginary part
        // (~sqrt(eps)); its real parts coincide and the separation check
        // reports it as repeated.
        let mut roots = [0.0; 3];
        for (slot, z) in roots.iter_mut().zip(eig.iter()) {
            if z.im.abs() > 1e-6 * z.re.abs().max(1.0) {
                return Err(CubicError::ComplexRoots {
                    discriminant: -z.im * z.im,
                });
            }
            *slot = z.re;
        }
        Ok(roots)
    }

    /// Newton polish that never moves a root by more than `max_step` and only
    /// accepts steps that lower the residual.
    fn polish(&self, mut y: f64, max_step: f64) -> f64 {
        let start = y;
        for _ in 0..8 {
            let f = self.eval(y);
            let df = self.derivative(y);
            if f == 0.0 || df == 0.0 {
                break;
            }
            let next = y - f / df;
            if !next.is_finite()
                || (next - start).abs() > max_step
                || self.eval(next).abs() >= f.abs()
            {
                break;
            }
            y = next;
        }
        y
    }
}

fn min_gap(roots: &[f64; 3]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            gap = gap.min((roots[i] - roots[j]).abs());
        }
    }
    gap
}

fn check_separation(roots: &[f64; 3], rel_tol: f64) -> Result<(), CubicError> {
    for i in 0..3 {
        for j in (i + 1)..3 {
            let tol = rel_tol * roots[i].abs().max(roots[j].abs()).max(1.0);
            if (roots[i] - roots[j]).abs() <= tol {
                return Err(CubicError::RepeatedRoot {
                    root: 0.5 * (roots[i] + roots[j]),
                });
            }
        }
    }
    Ok(())
}
