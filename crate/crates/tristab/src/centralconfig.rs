//! Non-collinear central configurations of the charged three-body problem.
//!
//! A triangle configuration is central exactly when its side lengths are
//! proportional to the cube roots of the couplings `delta_ij`, so the whole
//! construction is: couplings -> side ratios -> inner angles (law of
//! cosines) -> normalized positions. The moment normalization
//! `sum m_i |a_i|^2 = 1` fixes the overall scale and makes the shape
//! parameter `beta = 36 alpha^2` well defined.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rejects angles below this as numerically collinear.
const COLLINEAR_ANGLE_TOL: f64 = 1e-6;
/// Slack allowed when clamping law-of-cosines arguments into [-1, 1].
const COSINE_CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("mass {index} is not positive: {value}")]
    NonPositiveMass { index: usize, value: f64 },
    #[error("mass {index} is not finite")]
    NonFiniteMass { index: usize },
    #[error("delta_{i}{j} non-positive: {value} (net repulsion between bodies {i} and {j})")]
    NonPositiveDelta { i: usize, j: usize, value: f64 },
    #[error(
        "cube roots of deltas violate the triangle inequality: \
         {lhs_a:.6} + {lhs_b:.6} <= {rhs:.6}"
    )]
    DegenerateTriangle { lhs_a: f64, lhs_b: f64, rhs: f64 },
    #[error("inner angle theta_{index} = {value:.3e} rad is numerically collinear")]
    NumericallyCollinear { index: usize, value: f64 },
    #[error("gravitational parameter mu = {value:.6e} is not positive")]
    NonPositiveMu { value: f64 },
}

/// Three masses and three charges, with masses normalized to unit sum.
///
/// Charges are kept exactly as given; only the masses are rescaled, so the
/// coupling ratios `e_i / m_i` change under normalization the same way they
/// would if the caller had normalized by hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBodySetup")]
pub struct BodySetup {
    masses: [f64; 3],
    charges: [f64; 3],
}

#[derive(Deserialize)]
struct RawBodySetup {
    masses: [f64; 3],
    charges: [f64; 3],
}

impl TryFrom<RawBodySetup> for BodySetup {
    type Error = ConfigError;
    fn try_from(raw: RawBodySetup) -> Result<Self, ConfigError> {
        BodySetup::new(raw.masses, raw.charges)
    }
}

impl BodySetup {
    /// Validates and normalizes. Idempotent: normalizing twice is a no-op.
    pub fn new(masses: [f64; 3], charges: [f64; 3]) -> Result<Self, ConfigError> {
        for (index, &m) in masses.iter().enumerate() {
            if !m.is_finite() {
                return Err(ConfigError::NonFiniteMass { index });
            }
            if m <= 0.0 {
                return Err(ConfigError::NonPositiveMass { index, value: m });
            }
        }
        let total: f64 = masses.iter().sum();
        Ok(Self {
            masses: [masses[0] / total, masses[1] / total, masses[2] / total],
            charges,
        })
    }

    pub fn masses(&self) -> [f64; 3] {
        self.masses
    }

    pub fn charges(&self) -> [f64; 3] {
        self.charges
    }
}

/// The pairwise couplings `delta_ij = 1 - (e_i/m_i)(e_j/m_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaMatrix {
    pub d12: f64,
    pub d23: f64,
    pub d31: f64,
}

impl DeltaMatrix {
    /// Coupling for an unordered body pair, 0-indexed.
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.d12,
            (1, 2) => self.d23,
            (0, 2) => self.d31,
            _ => panic!("invalid body pair ({i}, {j})"),
        }
    }
}

pub fn delta_matrix(setup: &BodySetup) -> DeltaMatrix {
    let m = setup.masses;
    let e = setup.charges;
    let r = [e[0] / m[0], e[1] / m[1], e[2] / m[2]];
    DeltaMatrix {
        d12: 1.0 - r[0] * r[1],
        d23: 1.0 - r[1] * r[2],
        d31: 1.0 - r[2] * r[0],
    }
}

/// Accepts iff all couplings are positive and their cube roots satisfy the
/// three strict triangle inequalities.
pub fn admissible(deltas: &DeltaMatrix) -> Result<(), ConfigError> {
    let named = [
        (0usize, 1usize, deltas.d12),
        (1, 2, deltas.d23),
        (2, 0, deltas.d31),
    ];
    for &(i, j, d) in &named {
        if !(d > 0.0) {
            return Err(ConfigError::NonPositiveDelta {
                i: i + 1,
                j: j + 1,
                value: d,
            });
        }
    }
    let s = [deltas.d12.cbrt(), deltas.d23.cbrt(), deltas.d31.cbrt()];
    for k in 0..3 {
        let (a, b, c) = (s[k], s[(k + 1) % 3], s[(k + 2) % 3]);
        if a + b <= c {
            return Err(ConfigError::DegenerateTriangle {
                lhs_a: a,
                lhs_b: b,
                rhs: c,
            });
        }
    }
    Ok(())
}

/// A non-collinear central configuration, moment-normalized.
///
/// Internally everything is dimensionless: masses sum to one, the
/// mass-weighted moment of the positions is one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralConfiguration {
    /// Inner angles of the triangle, radians, summing to pi.
    pub angles_rad: [f64; 3],
    /// Planar positions a_1, a_2, a_3 with the mass-weighted center at the origin.
    pub positions: [[f64; 2]; 3],
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    /// Side scale: k = delta_ij^{1/3} / |a_i - a_j| for every pair.
    pub k: f64,
}

impl CentralConfiguration {
    pub fn position(&self, i: usize) -> Vector2<f64> {
        Vector2::new(self.positions[i][0], self.positions[i][1])
    }
}

fn clamped_acos(x: f64) -> Result<f64, ConfigError> {
    if x.abs() > 1.0 + COSINE_CLAMP_TOL {
        // Should be unreachable behind `admissible`, but keep the guard.
        return Err(ConfigError::DegenerateTriangle {
            lhs_a: x,
            lhs_b: 0.0,
            rhs: 1.0,
        });
    }
    Ok(x.clamp(-1.0, 1.0).acos())
}

/// Builds the central configuration determined by the masses and charges.
///
/// Side lengths are proportional to `delta^{1/3}`, with the side opposite
/// `theta_1` proportional to `delta_23^{1/3}`. Positions put body 1 above the
/// horizontal axis and bodies 2, 3 on either side of it.
pub fn build_configuration(setup: &BodySetup) -> Result<CentralConfiguration, ConfigError> {
    let deltas = delta_matrix(setup);
    admissible(&deltas)?;
    let m = setup.masses;

    // Unnormalized side lengths: s_l opposite theta_l.
    let s1 = deltas.d23.cbrt();
    let s2 = deltas.d31.cbrt();
    let s3 = deltas.d12.cbrt();

    let theta1 = clamped_acos((s2 * s2 + s3 * s3 - s1 * s1) / (2.0 * s2 * s3))?;
    let theta2 = clamped_acos((s3 * s3 + s1 * s1 - s2 * s2) / (2.0 * s3 * s1))?;
    let theta3 = std::f64::consts::PI - theta1 - theta2;
    let angles = [theta1, theta2, theta3];
    for (index, &t) in angles.iter().enumerate() {
        if t < COLLINEAR_ANGLE_TOL {
            return Err(ConfigError::NumericallyCollinear {
                index: index + 1,
                value: t,
            });
        }
    }

    let (sin1, sin2, sin3) = (theta1.sin(), theta2.sin(), theta3.sin());
    let alpha =
        (m[1] * m[2] * sin1 * sin1 + m[2] * m[0] * sin2 * sin2 + m[0] * m[1] * sin3 * sin3).sqrt();
    let beta = 36.0 * alpha * alpha;

    let (c2, c3) = (theta2.cos(), theta3.cos());
    let s23 = (theta2 + theta3).sin();
    let a1 = [
        (m[1] * c2 * sin3 - m[2] * sin2 * c3) / alpha,
        (m[1] + m[2]) * sin2 * sin3 / alpha,
    ];
    let a2 = [
        (-m[0] * c2 * sin3 - m[2] * s23) / alpha,
        -m[0] * sin2 * sin3 / alpha,
    ];
    let a3 = [
        (m[1] * s23 + m[0] * sin2 * c3) / alpha,
        -m[0] * sin2 * sin3 / alpha,
    ];
    let positions = [a1, a2, a3];

    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let k = deltas.d12.cbrt() / dist(a1, a2);
    let mu = m[0] * m[1] * deltas.d12 / dist(a1, a2)
        + m[1] * m[2] * deltas.d23 / dist(a2, a3)
        + m[2] * m[0] * deltas.d31 / dist(a3, a1);
    if !(mu > 0.0) {
        return Err(ConfigError::NonPositiveMu { value: mu });
    }

    Ok(CentralConfiguration {
        angles_rad: angles,
        positions,
        alpha,
        beta,
        mu,
        k,
    })
}

/// Max-norm residual of the central-configuration equation
/// `lambda M a + dU/dq (a) = 0` with the multiplier `lambda = U(a)/(Ma . a)`.
pub fn cc_residual(config: &CentralConfiguration, setup: &BodySetup) -> f64 {
    let deltas = delta_matrix(setup);
    let m = setup.masses;
    let a: Vec<Vector2<f64>> = (0..3).map(|i| config.position(i)).collect();

    let mut potential = 0.0;
    let mut moment = 0.0;
    for i in 0..3 {
        moment += m[i] * a[i].norm_squared();
        for j in (i + 1)..3 {
            potential += m[i] * m[j] * deltas.pair(i, j) / (a[i] - a[j]).norm();
        }
    }
    let lambda = potential / moment;

    let mut residual = 0.0f64;
    for i in 0..3 {
        let mut grad_u = Vector2::zeros();
        for j in 0..3 {
            if j == i {
                continue;
            }
            let d = a[i] - a[j];
            grad_u -= m[i] * m[j] * deltas.pair(i, j) / d.norm().powi(3) * d;
        }
        let row = lambda * m[i] * a[i] + grad_u;
        residual = residual.max(row[0].abs()).max(row[1].abs());
    }
    residual
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, PI};

    fn setup(m: [f64; 3], e: [f64; 3]) -> BodySetup {
        BodySetup::new(m, e).unwrap()
    }

    #[test]
    fn zero_charges_give_unit_deltas() {
        let d = delta_matrix(&setup([0.5, 0.3, 0.2], [0.0; 3]));
        assert_eq!((d.d12, d.d23, d.d31), (1.0, 1.0, 1.0));
    }

    #[test]
    fn equal_small_charges() {
        let d = delta_matrix(&setup([1.0, 1.0, 1.0], [0.1, 0.1, 0.1]));
        assert_abs_diff_eq!(d.d12, 0.91, epsilon = 1e-15);
        assert_abs_diff_eq!(d.d23, 0.91, epsilon = 1e-15);
        assert_abs_diff_eq!(d.d31, 0.91, epsilon = 1e-15);
    }

    #[test]
    fn strong_pair_charge_goes_negative() {
        let d = delta_matrix(&setup([1.0, 1.0, 1.0], [0.4, 0.4, 0.0]));
        assert_abs_diff_eq!(d.d12, -0.44, epsilon = 1e-15);
        assert_eq!(d.d23, 1.0);
        assert_eq!(d.d31, 1.0);
    }

    #[test]
    fn admissibility_verdicts() {
        assert!(admissible(&DeltaMatrix {
            d12: 1.0,
            d23: 1.0,
            d31: 1.0
        })
        .is_ok());
        let neg = admissible(&DeltaMatrix {
            d12: -0.44,
            d23: 1.0,
            d31: 1.0,
        });
        assert!(matches!(
            neg,
            Err(ConfigError::NonPositiveDelta { i: 1, j: 2, .. })
        ));
        // cube roots 2, 0.1, 0.1: 0.1 + 0.1 < 2
        let flat = admissible(&DeltaMatrix {
            d12: 8.0,
            d23: 0.001,
            d31: 0.001,
        });
        assert!(matches!(flat, Err(ConfigError::DegenerateTriangle { .. })));
    }

    #[test]
    fn mass_normalization_is_idempotent() {
        let s = setup([2.0, 3.0, 5.0], [0.1, -0.2, 0.3]);
        let twice = BodySetup::new(s.masses(), s.charges()).unwrap();
        assert_eq!(s, twice);
        assert_abs_diff_eq!(s.masses().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn newtonian_equal_masses_is_equilateral_beta_nine() {
        let cfg = build_configuration(&setup([1.0, 1.0, 1.0], [0.0; 3])).unwrap();
        for t in cfg.angles_rad {
            assert_abs_diff_eq!(t, FRAC_PI_3, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(cfg.beta, 9.0, epsilon = 1e-12);
    }

    #[test]
    fn newtonian_unequal_masses_beta() {
        // Zero charges keep the triangle equilateral regardless of masses;
        // beta = 27 (m1 m2 + m2 m3 + m3 m1).
        let cfg = build_configuration(&setup([0.5, 0.3, 0.2], [0.0; 3])).unwrap();
        for t in cfg.angles_rad {
            assert_abs_diff_eq!(t, FRAC_PI_3, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(cfg.beta, 8.37, epsilon = 1e-12);
    }

    #[test]
    fn charged_equilateral_scale() {
        let cfg = build_configuration(&setup([1.0, 1.0, 1.0], [0.1, 0.1, 0.1])).unwrap();
        assert_abs_diff_eq!(cfg.beta, 9.0, epsilon = 1e-12);
        let expected_k = 0.91f64.cbrt() * cfg.alpha / FRAC_PI_3.sin();
        assert_abs_diff_eq!(cfg.k, expected_k, epsilon = 1e-14);
        assert_abs_diff_eq!(cfg.mu, cfg.k.powi(3), epsilon = 1e-14);
    }

    fn check_invariants(s: &BodySetup) {
        let cfg = build_configuration(s).unwrap();
        let m = s.masses();
        let d = delta_matrix(s);

        assert_abs_diff_eq!(cfg.angles_rad.iter().sum::<f64>(), PI, epsilon = 1e-12);

        let mut center = Vector2::zeros();
        let mut moment = 0.0;
        for i in 0..3 {
            center += m[i] * cfg.position(i);
            moment += m[i] * cfg.position(i).norm_squared();
        }
        assert!(center.norm() < 1e-12, "center of mass {center}");
        assert_abs_diff_eq!(moment, 1.0, epsilon = 1e-12);

        // Side lengths sin(theta_l) / alpha and the sine-ratio law.
        let pairs = [(0, 1, 2, d.d12), (1, 2, 0, d.d23), (2, 0, 1, d.d31)];
        for &(i, j, l, dlt) in &pairs {
            let side = (cfg.position(i) - cfg.position(j)).norm();
            assert_abs_diff_eq!(side, cfg.angles_rad[l].sin() / cfg.alpha, epsilon = 1e-12);
            assert_abs_diff_eq!(cfg.k, dlt.cbrt() / side, epsilon = 1e-12);
        }
        let ratio0 = cfg.angles_rad[0].sin() / d.d23.cbrt();
        let ratio1 = cfg.angles_rad[1].sin() / d.d31.cbrt();
        let ratio2 = cfg.angles_rad[2].sin() / d.d12.cbrt();
        assert_abs_diff_eq!(ratio0, ratio1, epsilon = 1e-12);
        assert_abs_diff_eq!(ratio1, ratio2, epsilon = 1e-12);

        // beta from the defining mass formula vs 36 alpha^2.
        let [t1, t2, t3] = cfg.angles_rad;
        let beta_direct = 36.0
            * (m[0] * m[1] * t3.sin().powi(2)
                + m[0] * m[2] * t2.sin().powi(2)
                + m[1] * m[2] * t1.sin().powi(2));
        assert_abs_diff_eq!(cfg.beta, beta_direct, epsilon = 1e-12);

        assert_abs_diff_eq!(cfg.mu / cfg.k.powi(3), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn invariants_on_sample_setups() {
        check_invariants(&setup([1.0, 1.0, 1.0], [0.0; 3]));
        check_invariants(&setup([0.5, 0.3, 0.2], [0.1, -0.2, 0.05]));
        check_invariants(&setup([0.4, 0.35, 0.25], [0.3, 0.1, -0.1]));
    }

    #[test]
    fn residual_detects_central_configurations() {
        let newtonian = setup([1.0, 1.0, 1.0], [0.0; 3]);
        let cfg = build_configuration(&newtonian).unwrap();
        assert!(cc_residual(&cfg, &newtonian) < 1e-12);

        let charged = setup([0.5, 0.3, 0.2], [0.1, -0.2, 0.05]);
        let cfg = build_configuration(&charged).unwrap();
        assert!(cc_residual(&cfg, &charged) < 1e-10);

        let mut off = cfg;
        off.positions[0][0] += 1e-3;
        assert!(cc_residual(&off, &charged) > 1e-5);
    }

    #[test]
    fn strong_charges_rejected_after_normalization() {
        let s = setup([1.0, 1.0, 1.0], [2.0, 2.0, 2.0]);
        let err = build_configuration(&s).unwrap_err();
        assert!(matches!(err, ConfigError::NonPositiveDelta { .. }));
    }

    #[test]
    fn json_round_trip_field_names() {
        let s = setup([1.0, 1.0, 1.0], [0.1, 0.1, 0.1]);
        let cfg = build_configuration(&s).unwrap();
        let sj = serde_json::to_value(s).unwrap();
        assert!(sj.get("masses").is_some() && sj.get("charges").is_some());
        let cj = serde_json::to_value(cfg).unwrap();
        for field in ["angles_rad", "positions", "alpha", "beta", "mu", "k"] {
            assert!(cj.get(field).is_some(), "missing field {field}");
        }
        let back: BodySetup = serde_json::from_value(sj).unwrap();
        assert_eq!(back, s);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn admissible_setups_satisfy_normalizations(
                m1 in 0.1f64..2.0, m2 in 0.1f64..2.0, m3 in 0.1f64..2.0,
                e1 in -0.15f64..0.15, e2 in -0.15f64..0.15, e3 in -0.15f64..0.15,
            ) {
                let s = BodySetup::new([m1, m2, m3], [e1, e2, e3]).unwrap();
                if let Ok(cfg) = build_configuration(&s) {
                    let m = s.masses();
                    let center: Vector2<f64> =
                        (0..3).map(|i| m[i] * cfg.position(i)).sum();
                    let moment: f64 =
                        (0..3).map(|i| m[i] * cfg.position(i).norm_squared()).sum();
                    prop_assert!(center.norm() < 1e-12);
                    prop_assert!((moment - 1.0).abs() < 1e-12);
                    prop_assert!(cfg.beta > 0.0 && cfg.beta <= 9.0 + 1e-12);
                    prop_assert!(cc_residual(&cfg, &s) < 1e-10);
                }
            }
        }
    }
}
