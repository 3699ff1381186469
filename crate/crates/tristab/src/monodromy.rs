//! Floquet analysis of the essential periodic system.
//!
//! The fundamental solution of `zeta' = J B2bar(theta) zeta` over one period
//! is a real symplectic 4x4 matrix, so its characteristic polynomial is
//! palindromic and the four multipliers split into two pairs governed by the
//! quadratic `rho^2 + c3 rho + (c2 - 2) = 0` in `rho = lambda + 1/lambda`.
//! Everything downstream (classification, curve tracing, region maps) reads
//! off these two `rho` values.

use crate::reduction::{essential_system, j4, ReductionError};
use crate::rk;
use nalgebra::Matrix4;
use num_complex::Complex64;
use thiserror::Error;

/// Tolerance on `||rho| - 2|` and on the pair-collision discriminant used to
/// separate the four open stability classes from the transition set.
pub const CLASSIFY_TOL: f64 = 1e-8;
/// Symplectic defect allowed in the integrated fundamental solution,
/// relative to `max(1, |gamma|^2)`: the defect entries are sums of products
/// of gamma entries, so roundoff scales with the squared norm.
pub const SYMPLECTIC_TOL: f64 = 1e-9;
/// Base step count of the fixed-step integrator; scaled by 1/(1 - e).
const BASE_STEPS: f64 = 4000.0;

#[derive(Debug, Error, PartialEq)]
pub enum MonodromyError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("step count overflow at e = {e}: supported range is e <= 0.99")]
    StepUnderflow { e: f64 },
    #[error(
        "symplectic defect {defect:.3e} at (beta, e) = ({beta}, {e}) exceeds {SYMPLECTIC_TOL:.0e}"
    )]
    SymplecticDefect { beta: f64, e: f64, defect: f64 },
}

/// Fundamental solution of the essential system at theta = 2 pi, with its
/// multiplier data.
#[derive(Debug, Clone, PartialEq)]
pub struct EssentialMonodromy {
    pub gamma: Matrix4<f64>,
    pub beta: f64,
    pub e: f64,
    /// max-norm of gamma^T J gamma - J, relative to max(1, |gamma|^2).
    pub symplectic_defect: f64,
    /// Traces of the two multiplier pairs, roots of rho^2 + c3 rho + (c2 - 2).
    pub rho: (Complex64, Complex64),
    /// The four Floquet multipliers, closed under conjugation and inversion.
    pub multipliers: [Complex64; 4],
}

/// Linear stability classes of the essential monodromy.
///
/// `Boundary` is an explicit extra outcome for the measure-zero transition
/// set, where the four open-region labels do not apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    /// Two multiplier pairs on the unit circle, off the real axis.
    EE,
    /// One pair on the circle, one real pair off {0, +-1}.
    EH,
    /// All multipliers real, off {0, +-1}.
    HH,
    /// A non-real quadruple off both the circle and the real axis.
    CS,
    Boundary(BoundaryDetail),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryDetail {
    /// A multiplier pair sits at +1.
    MultiplierAtPlusOne,
    /// A multiplier pair sits at -1.
    MultiplierAtMinusOne,
    /// The two pairs collide on the unit circle (rho double, |rho| < 2).
    KreinCollision,
}

impl StabilityClass {
    pub fn label(&self) -> &'static str {
        match self {
            StabilityClass::EE => "EE",
            StabilityClass::EH => "EH",
            StabilityClass::HH => "HH",
            StabilityClass::CS => "CS",
            StabilityClass::Boundary(_) => "BOUNDARY",
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self, StabilityClass::Boundary(_))
    }

    /// True for HH and CS, the unstable side of the k-curve.
    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, StabilityClass::HH | StabilityClass::CS)
    }

    /// Same top-level class, ignoring boundary detail.
    pub fn same_kind(&self, other: &StabilityClass) -> bool {
        self.label() == other.label()
    }
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl serde::Serialize for StabilityClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

fn step_count(e: f64) -> Result<usize, MonodromyError> {
    if !(0.0..1.0).contains(&e) || 1.0 - e < 1e-3 {
        return Err(MonodromyError::StepUnderflow { e });
    }
    Ok((BASE_STEPS / (1.0 - e)).ceil() as usize)
}

pub fn symplectic_defect(gamma: &Matrix4<f64>) -> f64 {
    let j = j4();
    (gamma.transpose() * j * gamma - j).abs().max()
}

/// Symplectic defect scaled by `max(1, |gamma|_max^2)`.
pub fn relative_symplectic_defect(gamma: &Matrix4<f64>) -> f64 {
    let norm = gamma.abs().max();
    symplectic_defect(gamma) / norm.powi(2).max(1.0)
}

/// Integrates the essential system over one period and extracts multipliers.
pub fn fundamental_solution(beta: f64, e: f64) -> Result<EssentialMonodromy, MonodromyError> {
    let sys = essential_system(beta, e)?;
    let steps = step_count(e)?;
    let j = j4();
    let gamma = rk::integrate_fixed(
        |theta, z: &Matrix4<f64>| j * (sys.b2_bar(theta) * z),
        Matrix4::identity(),
        0.0,
        std::f64::consts::TAU,
        steps,
    );
    let defect = relative_symplectic_defect(&gamma);
    if !(defect < SYMPLECTIC_TOL) {
        return Err(MonodromyError::SymplecticDefect { beta, e, defect });
    }
    let (rho, multipliers) = split_gamma(&gamma);
    Ok(EssentialMonodromy {
        gamma,
        beta,
        e,
        symplectic_defect: defect,
        rho,
        multipliers,
    })
}

/// Coefficients (c3, c2) of the palindromic characteristic polynomial
/// `lambda^4 + c3 lambda^3 + c2 lambda^2 + c3 lambda + 1`.
fn palindromic_coefficients(gamma: &Matrix4<f64>) -> (f64, f64) {
    let c3 = -gamma.trace();
    let mut c2 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            c2 += gamma[(i, i)] * gamma[(j, j)] - gamma[(i, j)] * gamma[(j, i)];
        }
    }
    (c3, c2)
}

fn split_gamma(gamma: &Matrix4<f64>) -> ((Complex64, Complex64), [Complex64; 4]) {
    let (c3, c2) = palindromic_coefficients(gamma);
    // rho^2 + c3 rho + (c2 - 2) = 0
    let disc = c3 * c3 - 4.0 * (c2 - 2.0);
    let (r1, r2) = if disc >= 0.0 {
        let sq = disc.sqrt();
        let a = (-c3 - sq) / 2.0;
        let b = (-c3 + sq) / 2.0;
        (Complex64::new(a.min(b), 0.0), Complex64::new(a.max(b), 0.0))
    } else {
        let sq = (-disc).sqrt();
        (
            Complex64::new(-c3 / 2.0, -sq / 2.0),
            Complex64::new(-c3 / 2.0, sq / 2.0),
        )
    };

    let mut multipliers = [Complex64::new(0.0, 0.0); 4];
    for (i, rho) in [r1, r2].into_iter().enumerate() {
        // lambda^2 - rho lambda + 1 = 0
        let root = (rho * rho - 4.0).sqrt();
        let lambda = (rho + root) / 2.0;
        let partner = if lambda.norm() > 0.0 {
            1.0 / lambda
        } else {
            (rho - root) / 2.0
        };
        multipliers[2 * i] = lambda;
        multipliers[2 * i + 1] = partner;
    }
    ((r1, r2), multipliers)
}

/// Splits the monodromy's palindromic quartic into the two pair traces.
pub fn multiplier_split(mon: &EssentialMonodromy) -> (Complex64, Complex64) {
    split_gamma(&mon.gamma).0
}

/// Classifies a computed monodromy by its pair traces.
pub fn classify_monodromy(mon: &EssentialMonodromy) -> StabilityClass {
    let (c3, c2) = palindromic_coefficients(&mon.gamma);
    let disc = c3 * c3 - 4.0 * (c2 - 2.0);
    let tol = CLASSIFY_TOL;

    if disc < -tol {
        return StabilityClass::CS;
    }
    if disc.abs() <= tol {
        // double rho: the two pairs collide
        let rho = -c3 / 2.0;
        return if rho.abs() < 2.0 - tol {
            StabilityClass::Boundary(BoundaryDetail::KreinCollision)
        } else if rho.abs() > 2.0 + tol {
            StabilityClass::HH
        } else if rho > 0.0 {
            StabilityClass::Boundary(BoundaryDetail::MultiplierAtPlusOne)
        } else {
            StabilityClass::Boundary(BoundaryDetail::MultiplierAtMinusOne)
        };
    }

    let sq = disc.sqrt();
    let mut elliptic = 0;
    let mut hyperbolic = 0;
    for rho in [(-c3 - sq) / 2.0, (-c3 + sq) / 2.0] {
        if (rho.abs() - 2.0).abs() <= tol {
            return if rho > 0.0 {
                StabilityClass::Boundary(BoundaryDetail::MultiplierAtPlusOne)
            } else {
                StabilityClass::Boundary(BoundaryDetail::MultiplierAtMinusOne)
            };
        }
        if rho.abs() < 2.0 {
            elliptic += 1;
        } else {
            hyperbolic += 1;
        }
    }
    match (elliptic, hyperbolic) {
        (2, 0) => StabilityClass::EE,
        (1, 1) => StabilityClass::EH,
        (0, 2) => StabilityClass::HH,
        _ => unreachable!("pair counts always sum to 2"),
    }
}

/// Integrates and classifies the essential system at `(beta, e)`.
pub fn classify(beta: f64, e: f64) -> Result<StabilityClass, MonodromyError> {
    Ok(classify_monodromy(&fundamental_solution(beta, e)?))
}

/// Dimension of `ker(gamma - I)` by complete-pivot elimination.
///
/// The rank tolerance is `1e-6 * |gamma - I|_max`; when the matrix itself is
/// below `1e-6` in max-norm the kernel is the whole space.
pub fn nullity(mon: &EssentialMonodromy) -> usize {
    let a = mon.gamma - Matrix4::identity();
    let scale = a.abs().max();
    if scale < 1e-6 {
        return 4;
    }
    let tol = 1e-6 * scale;

    let mut w = a;
    let mut row_used = [false; 4];
    let mut col_used = [false; 4];
    let mut rank = 0;
    for _ in 0..4 {
        let mut best = (0usize, 0usize, 0.0f64);
        for r in 0..4 {
            if row_used[r] {
                continue;
            }
            for c in 0..4 {
                if col_used[c] {
                    continue;
                }
                if w[(r, c)].abs() > best.2 {
                    best = (r, c, w[(r, c)].abs());
                }
            }
        }
        let (pr, pc, pivot) = best;
        if pivot <= tol {
            break;
        }
        rank += 1;
        row_used[pr] = true;
        col_used[pc] = true;
        for r in 0..4 {
            if row_used[r] {
                continue;
            }
            let factor = w[(r, pc)] / w[(pr, pc)];
            for c in 0..4 {
                w[(r, c)] -= factor * w[(pr, c)];
            }
        }
    }
    4 - rank
}
