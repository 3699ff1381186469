//! Full nonlinear charged three-body dynamics, variational flow, and the
//! end-to-end cross checks.
//!
//! The 12x12 monodromy of an elliptic triangle solution carries eight unit
//! multipliers (translations plus the Kepler period degeneracy) and four
//! multipliers that must coincide with those of the essential 4x4 system at
//! the same `(beta, e)`. Unit multipliers sit in nontrivial Jordan blocks,
//! so they are counted by a winding-number contour around 1 instead of by
//! rank tests, and membership of the essential multipliers is checked
//! through determinant residuals rather than an eigensolve.

use crate::centralconfig::{delta_matrix, BodySetup, CentralConfiguration};
use crate::kepler::{solve_time_state, KeplerError, OrbitParams};
use crate::monodromy::EssentialMonodromy;
use crate::rk;
use nalgebra::{DMatrix, Matrix2, SMatrix, SVector, Vector2};
use num_complex::Complex64;
use thiserror::Error;

const COLLISION_TOL: f64 = 1e-12;
/// Relative symplectic defect allowed in the 12x12 variational flow.
const FULL_SYMPLECTIC_TOL: f64 = 1e-7;
/// Relative energy drift allowed over one period.
const ENERGY_DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("bodies {i} and {j} closer than {COLLISION_TOL:.0e}")]
    Collision { i: usize, j: usize },
    #[error(transparent)]
    Kepler(#[from] KeplerError),
    #[error("12x12 symplectic defect {defect:.3e} exceeds {FULL_SYMPLECTIC_TOL:.0e}")]
    SymplecticDefect { defect: f64 },
    #[error("relative energy drift {drift:.3e} exceeds {ENERGY_DRIFT_TOL:.0e}")]
    EnergyDrift { drift: f64 },
}

/// Positions and momenta of the three bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: [Vector2<f64>; 3],
    pub p: [Vector2<f64>; 3],
}

impl PhaseState {
    pub fn to_vector(&self) -> SVector<f64, 12> {
        let mut v = SVector::zeros();
        for i in 0..3 {
            v[2 * i] = self.q[i].x;
            v[2 * i + 1] = self.q[i].y;
            v[6 + 2 * i] = self.p[i].x;
            v[6 + 2 * i + 1] = self.p[i].y;
        }
        v
    }

    pub fn from_vector(v: &SVector<f64, 12>) -> Self {
        let at = |k: usize| Vector2::new(v[k], v[k + 1]);
        PhaseState {
            q: [at(0), at(2), at(4)],
            p: [at(6), at(8), at(10)],
        }
    }
}

fn pair_couplings(setup: &BodySetup) -> [(usize, usize, f64); 3] {
    let m = setup.masses();
    let d = delta_matrix(setup);
    [
        (0, 1, m[0] * m[1] * d.d12),
        (1, 2, m[1] * m[2] * d.d23),
        (2, 0, m[2] * m[0] * d.d31),
    ]
}

fn forces(q: &[Vector2<f64>; 3], setup: &BodySetup) -> Result<[Vector2<f64>; 3], DynamicsError> {
    let mut f = [Vector2::zeros(); 3];
    for (i, j, c) in pair_couplings(setup) {
        let d = q[j] - q[i];
        let r = d.norm();
        if r < COLLISION_TOL {
            return Err(DynamicsError::Collision { i, j });
        }
        let pull = d * (c / (r * r * r));
        f[i] += pull;
        f[j] -= pull;
    }
    Ok(f)
}

/// Hamiltonian vector field of the charged three-body problem.
pub fn full_rhs(state: &PhaseState, setup: &BodySetup) -> Result<PhaseState, DynamicsError> {
    let m = setup.masses();
    let f = forces(&state.q, setup)?;
    Ok(PhaseState {
        q: [state.p[0] / m[0], state.p[1] / m[1], state.p[2] / m[2]],
        p: f,
    })
}

/// `H = sum |p_i|^2 / 2 m_i - U(q)`.
pub fn hamiltonian(state: &PhaseState, setup: &BodySetup) -> f64 {
    let m = setup.masses();
    let mut h = 0.0;
    for i in 0..3 {
        h += state.p[i].norm_squared() / (2.0 * m[i]);
    }
    for (i, j, c) in pair_couplings(setup) {
        h -= c / (state.q[i] - state.q[j]).norm();
    }
    h
}

/// Total linear momentum and the scalar angular momentum `sum q_i x p_i`.
pub fn momenta(state: &PhaseState) -> (Vector2<f64>, f64) {
    let mut linear = Vector2::zeros();
    let mut angular = 0.0;
    for i in 0..3 {
        linear += state.p[i];
        angular += state.q[i].x * state.p[i].y - state.q[i].y * state.p[i].x;
    }
    (linear, angular)
}

/// Jacobian of the force half of the field, a symmetric 6x6 block matrix.
fn force_jacobian(q: &[Vector2<f64>; 3], setup: &BodySetup) -> SMatrix<f64, 6, 6> {
    let mut k = SMatrix::<f64, 6, 6>::zeros();
    for (i, j, c) in pair_couplings(setup) {
        let d = q[j] - q[i];
        let r2 = d.norm_squared();
        let r = r2.sqrt();
        let g = (Matrix2::identity() - d * d.transpose() * (3.0 / r2)) * (1.0 / (r * r2));
        // d p_i / d q_j = c G, diagonal blocks accumulate -c G
        let add = |k: &mut SMatrix<f64, 6, 6>, row: usize, col: usize, blk: Matrix2<f64>| {
            for a in 0..2 {
                for b in 0..2 {
                    k[(2 * row + a, 2 * col + b)] += blk[(a, b)];
                }
            }
        };
        add(&mut k, i, j, g * c);
        add(&mut k, j, i, g * c);
        add(&mut k, i, i, g * -c);
        add(&mut k, j, j, g * -c);
    }
    k
}

/// The homographic state `q_i = r R(theta) a_i`, `p_i = m_i dq_i/dt` at time `t`.
pub fn elliptic_state(
    config: &CentralConfiguration,
    setup: &BodySetup,
    params: &OrbitParams,
    t: f64,
) -> Result<PhaseState, KeplerError> {
    let s = solve_time_state(params, t)?;
    let (sin, cos) = s.theta.sin_cos();
    let rot = Matrix2::new(cos, -sin, sin, cos);
    let jrot = Matrix2::new(-sin, -cos, cos, -sin);
    let m = setup.masses();
    let mut q = [Vector2::zeros(); 3];
    let mut p = [Vector2::zeros(); 3];
    for i in 0..3 {
        let a = config.position(i);
        q[i] = rot * a * s.r;
        p[i] = (rot * a * s.r_dot + jrot * a * (s.r * s.theta_dot)) * m[i];
    }
    Ok(PhaseState { q, p })
}

/// Max-norm residual of `dp_i/dt = dU/dq_i` along the homographic solution,
/// with the left side from central differences of `elliptic_state`.
pub fn orbit_residual(
    config: &CentralConfiguration,
    setup: &BodySetup,
    params: &OrbitParams,
    times: &[f64],
) -> Result<f64, DynamicsError> {
    let h = 1e-6 * params.period;
    let mut worst = 0.0f64;
    for &t in times {
        let plus = elliptic_state(config, setup, params, t + h)?;
        let minus = elliptic_state(config, setup, params, t - h)?;
        let mid = elliptic_state(config, setup, params, t)?;
        let f = forces(&mid.q, setup)?;
        for i in 0..3 {
            let dp = (plus.p[i] - minus.p[i]) / (2.0 * h);
            worst = worst.max((dp - f[i]).abs().max());
        }
    }
    Ok(worst)
}

/// Monodromy of the linearized flow around one period of a solution.
#[derive(Debug, Clone)]
pub struct FullMonodromy {
    pub matrix: SMatrix<f64, 12, 12>,
    pub period: f64,
    /// Relative energy drift of the nonlinear trajectory over the period.
    pub energy_drift: f64,
    /// Symplectic defect of the monodromy relative to max(1, |M|^2).
    pub symplectic_defect: f64,
    pub final_state: PhaseState,
}

fn j12_defect(m: &SMatrix<f64, 12, 12>) -> f64 {
    // J for the (q, p) ordering: [[0, I], [-I, 0]].
    let mut j = SMatrix::<f64, 12, 12>::zeros();
    for i in 0..6 {
        j[(i, 6 + i)] = 1.0;
        j[(6 + i, i)] = -1.0;
    }
    let defect = (m.transpose() * j * m - j).abs().max();
    defect / m.abs().max().powi(2).max(1.0)
}

/// Integrates state plus 12x12 variational flow from `state0` over `period`.
pub fn monodromy_from_state(
    state0: &PhaseState,
    setup: &BodySetup,
    period: f64,
    steps: usize,
) -> Result<FullMonodromy, DynamicsError> {
    let m = setup.masses();
    let mut failure: Option<DynamicsError> = None;

    // Column 0 is the nonlinear state, columns 1..=12 the variational matrix.
    let mut y0 = SMatrix::<f64, 12, 13>::zeros();
    y0.set_column(0, &state0.to_vector());
    for i in 0..12 {
        y0[(i, i + 1)] = 1.0;
    }

    let y1 = rk::integrate_fixed(
        |_t, y: &SMatrix<f64, 12, 13>| {
            let state = PhaseState::from_vector(&y.fixed_view::<12, 1>(0, 0).into_owned());
            let mut out = SMatrix::<f64, 12, 13>::zeros();
            let f = match forces(&state.q, setup) {
                Ok(f) => f,
                Err(err) => {
                    failure.get_or_insert(err);
                    return out;
                }
            };
            for i in 0..3 {
                let v = state.p[i] / m[i];
                out[(2 * i, 0)] = v.x;
                out[(2 * i + 1, 0)] = v.y;
                out[(6 + 2 * i, 0)] = f[i].x;
                out[(6 + 2 * i + 1, 0)] = f[i].y;
            }
            let k = force_jacobian(&state.q, setup);
            for col in 1..13 {
                let phi_q = y.fixed_view::<6, 1>(0, col).into_owned();
                let phi_p = y.fixed_view::<6, 1>(6, col).into_owned();
                for i in 0..3 {
                    out[(2 * i, col)] = phi_p[2 * i] / m[i];
                    out[(2 * i + 1, col)] = phi_p[2 * i + 1] / m[i];
                }
                let dp = k * phi_q;
                for r in 0..6 {
                    out[(6 + r, col)] = dp[r];
                }
            }
            out
        },
        y0,
        0.0,
        period,
        steps,
    );
    if let Some(err) = failure {
        return Err(err);
    }

    let final_state = PhaseState::from_vector(&y1.fixed_view::<12, 1>(0, 0).into_owned());
    let matrix = y1.fixed_view::<12, 12>(0, 1).into_owned();

    let h0 = hamiltonian(state0, setup);
    let h1 = hamiltonian(&final_state, setup);
    let energy_drift = (h1 - h0).abs() / h0.abs().max(1.0);
    if !(energy_drift < ENERGY_DRIFT_TOL) {
        return Err(DynamicsError::EnergyDrift {
            drift: energy_drift,
        });
    }
    let symplectic_defect = j12_defect(&matrix);
    if !(symplectic_defect < FULL_SYMPLECTIC_TOL) {
        return Err(DynamicsError::SymplecticDefect {
            defect: symplectic_defect,
        });
    }

    Ok(FullMonodromy {
        matrix,
        period,
        energy_drift,
        symplectic_defect,
        final_state,
    })
}

/// Monodromy of the elliptic triangle solution over its `2 pi` period.
///
/// The step count grows with the curvature peak near perihelion,
/// `(1 - e)^{-3/2}`.
pub fn full_monodromy(
    config: &CentralConfiguration,
    setup: &BodySetup,
    params: &OrbitParams,
) -> Result<FullMonodromy, DynamicsError> {
    let state0 = elliptic_state(config, setup, params, 0.0)?;
    let steps = (4000.0 / (1.0 - params.e).powf(1.5)).ceil() as usize;
    monodromy_from_state(&state0, setup, params.period, steps)
}

/// Complex determinant of `M - lambda I` by LU decomposition.
fn det_shifted(m: &SMatrix<f64, 12, 12>, lambda: Complex64) -> Complex64 {
    let mut a = DMatrix::<Complex64>::zeros(12, 12);
    for r in 0..12 {
        for c in 0..12 {
            a[(r, c)] = Complex64::new(m[(r, c)], 0.0);
        }
        a[(r, r)] -= lambda;
    }
    a.lu().determinant()
}

fn operator_1_norm(m: &SMatrix<f64, 12, 12>) -> f64 {
    (0..12)
        .map(|c| (0..12).map(|r| m[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Number of characteristic roots inside `|lambda - center| < radius`,
/// counted by the winding number of `det(M - lambda I)` along the contour.
pub fn count_roots_in_disc(
    m: &SMatrix<f64, 12, 12>,
    center: f64,
    radius: f64,
    samples: usize,
) -> i64 {
    let values: Vec<Complex64> = (0..samples)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / samples as f64;
            det_shifted(
                m,
                Complex64::new(center + radius * phi.cos(), radius * phi.sin()),
            )
        })
        .collect();
    let mut winding = 0.0;
    for k in 0..samples {
        let a = values[k];
        let b = values[(k + 1) % samples];
        winding += (b / a).arg();
    }
    (winding / std::f64::consts::TAU).round() as i64
}

/// Radius of the unit-multiplier counting contour. Jordan blocks spread the
/// eight unit multipliers by roughly the square root of the integration
/// defect, which stays well inside this.
const UNIT_CONTOUR_RADIUS: f64 = 1e-3;
const UNIT_CONTOUR_SAMPLES: usize = 1024;
/// Determinant residual allowed for an essential multiplier to count as a
/// member of the full spectrum.
const MEMBERSHIP_TOL: f64 = 1e-5;

#[derive(Debug, Clone, serde::Serialize)]
pub struct EmbeddingReport {
    /// Eigenvalues of the 12x12 monodromy as (re, im) pairs, for reporting.
    pub multipliers_full: Vec<[f64; 2]>,
    pub multipliers_essential: Vec<[f64; 2]>,
    /// |det(M - lambda I)| / |M|_1^2 for each essential multiplier.
    pub residuals: Vec<f64>,
    /// Characteristic roots inside the contour around 1; must be 8.
    pub unit_multiplier_count: i64,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Checks that the essential multipliers embed in the full spectrum and
/// that exactly eight unit multipliers remain.
pub fn embedding_check(full: &FullMonodromy, essential: &EssentialMonodromy) -> EmbeddingReport {
    let norm1 = operator_1_norm(&full.matrix);
    let mut residuals = Vec::with_capacity(4);
    let mut failures = Vec::new();
    for lambda in essential.multipliers {
        let residual = det_shifted(&full.matrix, lambda).norm() / (norm1 * norm1);
        if !(residual < MEMBERSHIP_TOL) {
            failures.push(format!(
                "essential multiplier {lambda} missing from full spectrum \
                 (residual {residual:.3e})"
            ));
        }
        residuals.push(residual);
    }

    let unit_multiplier_count =
        count_roots_in_disc(&full.matrix, 1.0, UNIT_CONTOUR_RADIUS, UNIT_CONTOUR_SAMPLES);
    if unit_multiplier_count != 8 {
        failures.push(format!(
            "expected 8 unit multipliers, contour count gives {unit_multiplier_count}"
        ));
    }

    let multipliers_full = full
        .matrix
        .complex_eigenvalues()
        .iter()
        .map(|z| [z.re, z.im])
        .collect();

    EmbeddingReport {
        multipliers_full,
        multipliers_essential: essential.multipliers.iter().map(|z| [z.re, z.im]).collect(),
        residuals,
        unit_multiplier_count,
        pass: failures.is_empty(),
        failures,
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ActionReport {
    pub action_numeric: f64,
    pub action_formula: f64,
    pub rel_diff: f64,
}

/// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
const GL_WEIGHTS: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// Compares the action of one period of the elliptic solution against the
/// closed-form minimum value.
///
/// The action is written pairwise,
/// `sum m_i m_j int(|v_i - v_j|^2 / 2 + delta_ij / |q_i - q_j|) dt`,
/// and integrated by composite Gauss-Legendre quadrature (64 panels of 8
/// nodes). With the period normalized to `2 pi` the closed form is
/// `3 pi sum m_i m_j delta_ij^{2/3}`. The constructed solutions wind once
/// around each pairwise collision, which is the loop class the closed form
/// refers to.
pub fn action_check(
    config: &CentralConfiguration,
    setup: &BodySetup,
    params: &OrbitParams,
) -> Result<ActionReport, DynamicsError> {
    let m = setup.masses();
    let deltas = delta_matrix(setup);
    let tau = params.period;

    let integrand = |t: f64| -> Result<f64, DynamicsError> {
        let s = elliptic_state(config, setup, params, t)?;
        let mut value = 0.0;
        for (i, j, _) in pair_couplings(setup) {
            let dv = s.p[i] / m[i] - s.p[j] / m[j];
            let dq = s.q[i] - s.q[j];
            value += m[i] * m[j] * (0.5 * dv.norm_squared() + deltas.pair(i, j) / dq.norm());
        }
        Ok(value)
    };

    let panels = 64;
    let width = tau / panels as f64;
    let mut action_numeric = 0.0;
    for panel in 0..panels {
        let mid = (panel as f64 + 0.5) * width;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            action_numeric += w * 0.5 * width * integrand(mid + 0.5 * width * x)?;
        }
    }

    let coupling_sum = m[0] * m[1] * deltas.d12.powf(2.0 / 3.0)
        + m[1] * m[2] * deltas.d23.powf(2.0 / 3.0)
        + m[2] * m[0] * deltas.d31.powf(2.0 / 3.0);
    let action_formula = coupling_sum
        * 3.0
        * 2f64.powf(-1.0 / 3.0)
        * std::f64::consts::PI.powf(2.0 / 3.0)
        * tau.powf(1.0 / 3.0);

    Ok(ActionReport {
        action_numeric,
        action_formula,
        rel_diff: (action_numeric - action_formula).abs() / action_formula.abs(),
    })
}
