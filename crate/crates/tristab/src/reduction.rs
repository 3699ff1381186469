//! Symplectic reduction of the linearized dynamics at an elliptic triangle
//! solution.
//!
//! The coordinate change built from the central configuration splits the
//! 12-dimensional linearization into a Kepler block and an essential 4x4
//! block. After diagonalizing the constant symmetric matrix `D~` by a
//! rotation, the essential coefficient matrix depends on the bodies only
//! through `beta`, giving the reduced periodic system
//! `zeta' = J B2bar(theta) zeta`.

use crate::centralconfig::{delta_matrix, BodySetup, CentralConfiguration};
use crate::kepler::OrbitParams;
use nalgebra::{Matrix2, Matrix4, Matrix6, Vector2};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("beta = {0} outside [0, 9]")]
    BetaRange(f64),
    #[error("eccentricity {0} outside [0, 1)")]
    EccentricityRange(f64),
}

/// 2x2 rotation by pi/2; the complex structure on the plane.
pub fn j2() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// 4x4 symplectic unit for the (momentum, position) ordering of the
/// essential variables.
pub fn j4() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j.fixed_view_mut::<2, 2>(0, 2)
        .copy_from(&(-Matrix2::identity()));
    j.fixed_view_mut::<2, 2>(2, 0)
        .copy_from(&Matrix2::identity());
    j
}

pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// K = diag(2, -1): radial/tangential curvature of the Kepler potential.
pub fn matrix_k() -> Matrix2<f64> {
    Matrix2::new(2.0, 0.0, 0.0, -1.0)
}

/// K1 = diag(1, 0): projector onto the radial direction.
pub fn matrix_k1() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, 0.0, 0.0)
}

/// The basis matrix of the symplectic coordinate change and its blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct MeyerSchmidtBasis {
    /// Full 6x6 basis with block rows [I, A_i, B_i].
    pub a_full: Matrix6<f64>,
    /// A_i = (a_i, J a_i).
    pub a_blocks: [Matrix2<f64>; 3],
    /// B_i, the momentum-side blocks fixed by A^T M A = I.
    pub b_blocks: [Matrix2<f64>; 3],
    /// rho_i = sqrt(m1 m2 m3) / m_i.
    pub rho: [f64; 3],
}

pub fn meyer_schmidt_basis(config: &CentralConfiguration, setup: &BodySetup) -> MeyerSchmidtBasis {
    let m = setup.masses();
    let alpha = config.alpha;
    let [t1, t2, t3] = config.angles_rad;
    let root = (m[0] * m[1] * m[2]).sqrt();
    let rho = [root / m[0], root / m[1], root / m[2]];

    let a_col = |i: usize| Vector2::new(config.positions[i][0], config.positions[i][1]);
    let a_blocks: [Matrix2<f64>; 3] = std::array::from_fn(|i| {
        let a = a_col(i);
        let ja = j2() * a;
        Matrix2::new(a.x, ja.x, a.y, ja.y)
    });

    let b_blocks = [
        Matrix2::identity() * (rho[0] * t1.sin() / alpha),
        rotation(t3) * (-rho[1] * t2.sin() / alpha),
        rotation(-t2) * (-rho[2] * t3.sin() / alpha),
    ];

    let mut a_full = Matrix6::zeros();
    for i in 0..3 {
        a_full
            .fixed_view_mut::<2, 2>(2 * i, 0)
            .copy_from(&Matrix2::identity());
        a_full
            .fixed_view_mut::<2, 2>(2 * i, 2)
            .copy_from(&a_blocks[i]);
        a_full
            .fixed_view_mut::<2, 2>(2 * i, 4)
            .copy_from(&b_blocks[i]);
    }

    MeyerSchmidtBasis {
        a_full,
        a_blocks,
        b_blocks,
        rho,
    }
}

/// Hessian blocks of the transformed Hamiltonian at the elliptic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianBlocks {
    pub h_zz: Matrix2<f64>,
    pub h_zw: Matrix2<f64>,
    pub h_ww: Matrix2<f64>,
    /// d1..d4, the mass/angle coefficients of the w-block (d2 = d3).
    pub d: [f64; 4],
}

/// The coefficients d1, d2 = d3, d4 of the w-block; masses and angles only.
pub fn d_coefficients(config: &CentralConfiguration, setup: &BodySetup) -> [f64; 4] {
    let m = setup.masses();
    let [_, t2, t3] = config.angles_rad;
    let dd = t2 - t3;
    let d1 = m[0] * dd.cos().powi(2) + m[1] * t2.cos().powi(2) + m[2] * t3.cos().powi(2);
    let d2 = m[0] * dd.cos() * dd.sin() + m[1] * t2.cos() * t2.sin() - m[2] * t3.cos() * t3.sin();
    let d4 = m[0] * dd.sin().powi(2) + m[1] * t2.sin().powi(2) + m[2] * t3.sin().powi(2);
    [d1, d2, d2, d4]
}

pub fn hessian_blocks(
    config: &CentralConfiguration,
    setup: &BodySetup,
    params: &OrbitParams,
    theta: f64,
) -> HessianBlocks {
    let e = params.e;
    let denom = 1.0 + e * theta.cos();
    let d = d_coefficients(config, setup);
    let h_zz = Matrix2::new(-(2.0 - e * theta.cos()) / denom, 0.0, 0.0, 1.0);
    let h_ww = Matrix2::new(
        1.0 - 3.0 * d[0] / denom,
        -3.0 * d[1] / denom,
        -3.0 * d[2] / denom,
        1.0 - 3.0 * d[3] / denom,
    );
    HessianBlocks {
        h_zz,
        h_zw: Matrix2::zeros(),
        h_ww,
        d,
    }
}

/// Max-norm deviations of the finite-difference Hessian of the reduced
/// potential from its closed forms.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HessianResiduals {
    pub zz: f64,
    pub zw: f64,
    pub ww: f64,
}

/// Differences the analytic gradient of the reduced potential
/// `U(z, w) = sum m_i m_j delta_ij / |(A_i - A_j) z + (B_i - B_j) w|`
/// at the equilibrium `(z, w) = ((sigma, 0), (0, 0))` and compares the
/// resulting Hessian blocks against the closed forms
/// `U_zz = (mu/sigma^3) K`, `U_zw = 0`, `U_ww = (mu/sigma^3)(-I + 3 D)`.
pub fn hessian_fd_check(
    config: &CentralConfiguration,
    setup: &BodySetup,
    params: &OrbitParams,
) -> HessianResiduals {
    let basis = meyer_schmidt_basis(config, setup);
    let deltas = delta_matrix(setup);
    let m = setup.masses();
    let sigma = params.sigma;

    let pairs = [(0usize, 1usize), (1, 2), (2, 0)];
    // Gradient of U in the 4 variables (z1, z2, w1, w2).
    let grad = |z: Vector2<f64>, w: Vector2<f64>| -> [f64; 4] {
        let mut g = [0.0; 4];
        for &(i, j) in &pairs {
            let x = basis.a_blocks[i] - basis.a_blocks[j];
            let y = basis.b_blocks[i] - basis.b_blocks[j];
            let u = x * z + y * w;
            let scale = m[i] * m[j] * deltas.pair(i, j) / u.norm().powi(3);
            let gz = x.transpose() * u * (-scale);
            let gw = y.transpose() * u * (-scale);
            g[0] += gz.x;
            g[1] += gz.y;
            g[2] += gw.x;
            g[3] += gw.y;
        }
        g
    };

    let h = 1e-5 * sigma;
    let z0 = Vector2::new(sigma, 0.0);
    let w0 = Vector2::zeros();
    let mut hess = [[0.0f64; 4]; 4];
    for col in 0..4 {
        let mut dz = Vector2::zeros();
        let mut dw = Vector2::zeros();
        if col < 2 {
            dz[col] = h;
        } else {
            dw[col - 2] = h;
        }
        let plus = grad(z0 + dz, w0 + dw);
        let minus = grad(z0 - dz, w0 - dw);
        for row in 0..4 {
            hess[row][col] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }

    let scale = config.mu / sigma.powi(3);
    let d = d_coefficients(config, setup);
    let u_zz = matrix_k() * scale;
    let u_ww = (Matrix2::new(d[0], d[1], d[2], d[3]) * 3.0 - Matrix2::identity()) * scale;

    let mut res = HessianResiduals {
        zz: 0.0,
        zw: 0.0,
        ww: 0.0,
    };
    for r in 0..2 {
        for c in 0..2 {
            res.zz = res.zz.max((hess[r][c] - u_zz[(r, c)]).abs());
            res.zw = res.zw.max(hess[r][c + 2].abs()).max(hess[r + 2][c].abs());
            res.ww = res.ww.max((hess[r + 2][c + 2] - u_ww[(r, c)]).abs());
        }
    }
    res
}

/// The essential 4x4 periodic system, parametrized by `(beta, e)`.
///
/// `b2_bar` is the diagonalized coefficient matrix; `d_tilde` and `rotation`
/// record how a configuration-built system maps onto it. Built from bare
/// `(beta, e)` the rotation is the identity and `d_tilde` is already
/// diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct EssentialSystem {
    pub beta: f64,
    pub e: f64,
    pub d_tilde: Matrix2<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub rotation: Matrix2<f64>,
    sqrt_gap: f64,
}

impl EssentialSystem {
    pub fn new(beta: f64, e: f64) -> Result<Self, ReductionError> {
        if !(0.0..=9.0).contains(&beta) {
            return Err(ReductionError::BetaRange(beta));
        }
        if !(0.0..1.0).contains(&e) {
            return Err(ReductionError::EccentricityRange(e));
        }
        let sqrt_gap = (9.0 - beta).sqrt();
        let lambda1 = (-1.0 - sqrt_gap) / 2.0;
        let lambda2 = (-1.0 + sqrt_gap) / 2.0;
        Ok(Self {
            beta,
            e,
            d_tilde: Matrix2::new(lambda1, 0.0, 0.0, lambda2),
            lambda1,
            lambda2,
            rotation: Matrix2::identity(),
            sqrt_gap,
        })
    }

    /// Builds `D~` from the configuration's d-coefficients and diagonalizes
    /// it by a rotation.
    ///
    /// Eigenvalues are ordered `lambda1 <= lambda2`; the first eigenvector
    /// takes a nonnegative first component (nonnegative second if the first
    /// vanishes), which makes the rotation deterministic. A degenerate
    /// spectrum (beta = 9) returns the identity rotation.
    pub fn from_config(
        config: &CentralConfiguration,
        setup: &BodySetup,
        e: f64,
    ) -> Result<Self, ReductionError> {
        if !(0.0..1.0).contains(&e) {
            return Err(ReductionError::EccentricityRange(e));
        }
        let d = d_coefficients(config, setup);
        let d_tilde = Matrix2::new(1.0 - 3.0 * d[0], -3.0 * d[1], -3.0 * d[2], 1.0 - 3.0 * d[3]);

        let mid = 0.5 * (d_tilde[(0, 0)] + d_tilde[(1, 1)]);
        let half_gap =
            (0.25 * (d_tilde[(0, 0)] - d_tilde[(1, 1)]).powi(2) + d_tilde[(0, 1)].powi(2)).sqrt();
        let lambda1 = mid - half_gap;
        let lambda2 = mid + half_gap;

        let rotation = if half_gap < 1e-12 {
            Matrix2::identity()
        } else {
            // Eigenvector of lambda1 from the better-conditioned row of
            // (D~ - lambda1 I).
            let v_a = Vector2::new(d_tilde[(0, 1)], lambda1 - d_tilde[(0, 0)]);
            let v_b = Vector2::new(lambda1 - d_tilde[(1, 1)], d_tilde[(0, 1)]);
            let mut v = if v_a.norm() >= v_b.norm() { v_a } else { v_b };
            v /= v.norm();
            if v.x < -1e-12 || (v.x.abs() <= 1e-12 && v.y < 0.0) {
                v = -v;
            }
            let w = j2() * v;
            Matrix2::new(v.x, w.x, v.y, w.y)
        };

        let beta = config.beta;
        let sqrt_gap = (9.0 - beta.min(9.0)).sqrt();
        Ok(Self {
            beta,
            e,
            d_tilde,
            lambda1,
            lambda2,
            rotation,
            sqrt_gap,
        })
    }

    /// The diagonalized essential coefficient matrix at true anomaly `theta`.
    #[inline]
    pub fn b2_bar(&self, theta: f64) -> Matrix4<f64> {
        let ec = self.e * theta.cos();
        let denom = 2.0 * (1.0 + ec);
        let low1 = (2.0 * ec - 1.0 - self.sqrt_gap) / denom;
        let low2 = (2.0 * ec - 1.0 + self.sqrt_gap) / denom;
        Matrix4::new(
            1.0, 0.0, 0.0, 1.0, //
            0.0, 1.0, -1.0, 0.0, //
            0.0, -1.0, low1, 0.0, //
            1.0, 0.0, 0.0, low2,
        )
    }

    /// The un-rotated essential coefficient matrix built from `D~`.
    pub fn b2_raw(&self, theta: f64) -> Matrix4<f64> {
        let ec = self.e * theta.cos();
        let low = (Matrix2::identity() * ec + self.d_tilde) / (1.0 + ec);
        let mut b = Matrix4::zeros();
        b.fixed_view_mut::<2, 2>(0, 0)
            .copy_from(&Matrix2::identity());
        b.fixed_view_mut::<2, 2>(0, 2).copy_from(&(-j2()));
        b.fixed_view_mut::<2, 2>(2, 0).copy_from(&j2());
        b.fixed_view_mut::<2, 2>(2, 2).copy_from(&low);
        b
    }
}

/// Constructs the essential system for bare parameters.
pub fn essential_system(beta: f64, e: f64) -> Result<EssentialSystem, ReductionError> {
    EssentialSystem::new(beta, e)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DiagonalizationReport {
    /// max over sampled theta of |diag(R,R)^T B2(theta) diag(R,R) - B2bar(theta)|.
    pub max_residual: f64,
    /// |det D~ + 2 - beta/4|.
    pub det_identity_residual: f64,
}

/// Verifies that the configuration-built system rotates onto the
/// beta-parametrized one.
pub fn diagonalization_check(
    config: &CentralConfiguration,
    setup: &BodySetup,
    e: f64,
    thetas: &[f64],
) -> Result<DiagonalizationReport, ReductionError> {
    let sys = EssentialSystem::from_config(config, setup, e)?;
    let r = sys.rotation;
    let mut a_hat = Matrix4::zeros();
    a_hat.fixed_view_mut::<2, 2>(0, 0).copy_from(&r);
    a_hat.fixed_view_mut::<2, 2>(2, 2).copy_from(&r);

    let mut max_residual = 0.0f64;
    for &theta in thetas {
        let diff = a_hat.transpose() * sys.b2_raw(theta) * a_hat - sys.b2_bar(theta);
        max_residual = max_residual.max(diff.abs().max());
    }
    let det_identity_residual = (sys.d_tilde.determinant() + 2.0 - sys.beta / 4.0).abs();
    Ok(DiagonalizationReport {
        max_residual,
        det_identity_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centralconfig::build_configuration;
    use crate::kepler::orbit_params;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn newtonian_equal() -> (BodySetup, CentralConfiguration) {
        let s = BodySetup::new([1.0, 1.0, 1.0], [0.0; 3]).unwrap();
        let c = build_configuration(&s).unwrap();
        (s, c)
    }

    fn charged_sample() -> (BodySetup, CentralConfiguration) {
        let s = BodySetup::new([0.5, 0.3, 0.2], [0.1, -0.2, 0.05]).unwrap();
        let c = build_configuration(&s).unwrap();
        (s, c)
    }

    fn mass_matrix(setup: &BodySetup) -> Matrix6<f64> {
        let m = setup.masses();
        Matrix6::from_diagonal(&nalgebra::Vector6::new(m[0], m[0], m[1], m[1], m[2], m[2]))
    }

    #[test]
    fn rho_for_equal_masses() {
        let (s, c) = newtonian_equal();
        let basis = meyer_schmidt_basis(&c, &s);
        for r in basis.rho {
            assert_abs_diff_eq!(r, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        }
    }

    fn check_basis_identities(s: &BodySetup, c: &CentralConfiguration) {
        let basis = meyer_schmidt_basis(c, s);
        let gram = basis.a_full.transpose() * mass_matrix(s) * basis.a_full;
        assert!(
            (gram - Matrix6::identity()).abs().max() < 1e-12,
            "A^T M A != I"
        );

        let [b1, b2, b3] = basis.b_blocks;
        let [a1, a2, a3] = basis.a_blocks;
        let [r1, r2, r3] = basis.rho;
        assert!(((b1 - b2) - a3.transpose() / r3).abs().max() < 1e-12);
        assert!(((b2 - b3) - a1.transpose() / r1).abs().max() < 1e-12);
        assert!(((b3 - b1) - a2.transpose() / r2).abs().max() < 1e-12);
        // B_i defined through the A-differences as well.
        assert!((b1 - (a3 - a2).transpose() * r1).abs().max() < 1e-12);
        assert!((b2 - (a1 - a3).transpose() * r2).abs().max() < 1e-12);
        assert!((b3 - (a2 - a1).transpose() * r3).abs().max() < 1e-12);
        for bi in [b1, b2, b3] {
            for bj in [b1, b2, b3] {
                assert!(
                    (bi * bj - bj * bi).abs().max() < 1e-12,
                    "B blocks must commute"
                );
            }
        }
    }

    #[test]
    fn basis_identities_hold() {
        let (s, c) = newtonian_equal();
        check_basis_identities(&s, &c);
        let (s, c) = charged_sample();
        check_basis_identities(&s, &c);
    }

    #[test]
    fn hessian_blocks_closed_forms() {
        let (s, c) = charged_sample();
        let params = orbit_params(c.mu, 0.0).unwrap();
        for theta in [0.0, 1.0, 2.5] {
            let h = hessian_blocks(&c, &s, &params, theta);
            assert_abs_diff_eq!(h.h_zz[(0, 0)], -2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(h.h_zz[(1, 1)], 1.0, epsilon = 1e-14);
            assert_eq!(h.h_zw, Matrix2::zeros());
            assert_eq!(h.d[1], h.d[2]);
            assert_abs_diff_eq!(h.d[0] + h.d[3], 1.0, epsilon = 1e-14);
        }
        // the 1 + e cos(theta) denominator shows up directly at theta = 0
        let params = orbit_params(c.mu, 0.5).unwrap();
        let h = hessian_blocks(&c, &s, &params, 0.0);
        assert_abs_diff_eq!(h.h_zz[(0, 0)], -(2.0 - 0.5) / 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(h.h_ww[(0, 0)], 1.0 - 3.0 * h.d[0] / 1.5, epsilon = 1e-14);
    }

    #[test]
    fn equal_mass_d_tilde_is_minus_half_identity() {
        let (s, c) = newtonian_equal();
        let sys = EssentialSystem::from_config(&c, &s, 0.0).unwrap();
        assert!((sys.d_tilde - Matrix2::identity() * -0.5).abs().max() < 1e-12);
        assert_abs_diff_eq!(sys.lambda1, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sys.lambda2, -0.5, epsilon = 1e-12);
        assert_eq!(sys.rotation, Matrix2::identity());
    }

    #[test]
    fn fd_hessian_matches_closed_forms() {
        let (s, c) = newtonian_equal();
        let params = orbit_params(c.mu, 0.0).unwrap();
        let res = hessian_fd_check(&c, &s, &params);
        assert!(res.zz < 1e-6 && res.zw < 1e-6 && res.ww < 1e-6, "{res:?}");
        assert!(res.zw < 1e-8, "U_zw vanishes analytically, got {}", res.zw);

        let (s, c) = charged_sample();
        let params = orbit_params(c.mu, 0.3).unwrap();
        let res = hessian_fd_check(&c, &s, &params);
        assert!(res.zz < 1e-6 && res.zw < 1e-6 && res.ww < 1e-6, "{res:?}");
    }

    #[test]
    fn essential_lower_right_limits() {
        let sys = essential_system(9.0, 0.0).unwrap();
        let b = sys.b2_bar(0.7);
        assert_abs_diff_eq!(b[(2, 2)], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(3, 3)], -0.5, epsilon = 1e-14);

        let sys = essential_system(0.0, 0.0).unwrap();
        let b = sys.b2_bar(1.3);
        assert_abs_diff_eq!(b[(2, 2)], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(3, 3)], 1.0, epsilon = 1e-14);

        assert!(essential_system(9.5, 0.0).is_err());
        assert!(essential_system(-0.1, 0.0).is_err());
        assert!(essential_system(1.0, 1.0).is_err());
    }

    #[test]
    fn b2_bar_is_symmetric_and_periodic() {
        let sys = essential_system(4.2, 0.55).unwrap();
        for k in 0..16 {
            let theta = k as f64 * TAU / 16.0;
            let b = sys.b2_bar(theta);
            assert!((b - b.transpose()).abs().max() < 1e-15);
            assert!((b - sys.b2_bar(theta + TAU)).abs().max() < 1e-14);
        }
    }

    #[test]
    fn b2_bar_depends_only_on_beta() {
        // Equal masses with and without equal charges both give beta = 9.
        let s1 = BodySetup::new([1.0, 1.0, 1.0], [0.0; 3]).unwrap();
        let s2 = BodySetup::new([1.0, 1.0, 1.0], [0.1, 0.1, 0.1]).unwrap();
        let c1 = build_configuration(&s1).unwrap();
        let c2 = build_configuration(&s2).unwrap();
        let a = EssentialSystem::from_config(&c1, &s1, 0.4).unwrap();
        let b = EssentialSystem::from_config(&c2, &s2, 0.4).unwrap();
        for k in 0..32 {
            let theta = k as f64 * TAU / 32.0;
            assert!((a.b2_bar(theta) - b.b2_bar(theta)).abs().max() < 1e-12);
        }
    }

    #[test]
    fn diagonalization_residuals() {
        let thetas: Vec<f64> = (0..64).map(|k| k as f64 * TAU / 64.0).collect();

        let (s, c) = newtonian_equal();
        let report = diagonalization_check(&c, &s, 0.0, &thetas).unwrap();
        assert!(report.max_residual < 1e-12, "{report:?}");

        let s = BodySetup::new([0.5, 0.3, 0.2], [0.0; 3]).unwrap();
        let c = build_configuration(&s).unwrap();
        let report = diagonalization_check(&c, &s, 0.3, &thetas).unwrap();
        assert!(report.max_residual < 1e-10, "{report:?}");
        assert!(report.det_identity_residual < 1e-12, "{report:?}");
    }

    #[test]
    fn d_tilde_trace_and_determinant() {
        for (s, c) in [newtonian_equal(), charged_sample()] {
            let sys = EssentialSystem::from_config(&c, &s, 0.0).unwrap();
            assert_abs_diff_eq!(sys.d_tilde.trace(), -1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                sys.d_tilde.determinant(),
                c.beta / 4.0 - 2.0,
                epsilon = 1e-12
            );
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn reduction_identities_on_random_setups(
                m1 in 0.1f64..2.0, m2 in 0.1f64..2.0, m3 in 0.1f64..2.0,
                e1 in -0.15f64..0.15, e2 in -0.15f64..0.15, e3 in -0.15f64..0.15,
            ) {
                let s = BodySetup::new([m1, m2, m3], [e1, e2, e3]).unwrap();
                let Ok(c) = build_configuration(&s) else { return Ok(()); };
                let basis = meyer_schmidt_basis(&c, &s);
                let gram = basis.a_full.transpose() * mass_matrix(&s) * basis.a_full;
                prop_assert!((gram - Matrix6::identity()).abs().max() < 1e-12);

                let sys = EssentialSystem::from_config(&c, &s, 0.0).unwrap();
                prop_assert!((sys.d_tilde.trace() + 1.0).abs() < 1e-12);
                prop_assert!(
                    (sys.d_tilde.determinant() - (c.beta / 4.0 - 2.0)).abs() < 1e-12
                );
            }
        }
    }
}
