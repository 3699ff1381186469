//! Brute-force verification that the shape parameter `beta = 36 f` ranges
//! over exactly `[0, 9]`.
//!
//! For fixed triangle angles, `f(m) = lambda_1 m_2 m_3 + lambda_2 m_3 m_1 +
//! lambda_3 m_1 m_2` is a quadratic on the mass simplex whose unique
//! interior critical point exists iff the triangle is acute, and there
//! `f(m*) = lambda_1 lambda_2 lambda_3 / S = 1/4` identically. The sweep
//! below checks the bound without using that structure: it maximizes `36 f`
//! over a mass grid crossed with random triangles.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BetaRangeError {
    #[error("invalid simplex point: {0}")]
    InvalidMasses(String),
    #[error("invalid triangle angles: {0}")]
    InvalidAngles(String),
}

/// Nonnegative masses summing to one (zeros allowed, unlike `BodySetup`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplexPoint {
    m: [f64; 3],
}

impl SimplexPoint {
    pub fn new(m: [f64; 3]) -> Result<Self, BetaRangeError> {
        for &mi in &m {
            if !mi.is_finite() || mi < -1e-15 {
                return Err(BetaRangeError::InvalidMasses(format!(
                    "component {mi} negative or non-finite"
                )));
            }
        }
        let total: f64 = m.iter().sum();
        if total <= 0.0 {
            return Err(BetaRangeError::InvalidMasses("zero total mass".into()));
        }
        Ok(Self {
            m: [
                (m[0] / total).max(0.0),
                (m[1] / total).max(0.0),
                (m[2] / total).max(0.0),
            ],
        })
    }

    pub fn masses(&self) -> [f64; 3] {
        self.m
    }
}

/// Inner angles of a triangle with their squared sines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleAngles {
    pub theta: [f64; 3],
    pub lambda: [f64; 3],
}

impl TriangleAngles {
    pub fn new(theta: [f64; 3]) -> Result<Self, BetaRangeError> {
        for &t in &theta {
            if !(t > 0.0 && t < std::f64::consts::PI) {
                return Err(BetaRangeError::InvalidAngles(format!(
                    "angle {t} outside (0, pi)"
                )));
            }
        }
        let sum: f64 = theta.iter().sum();
        if (sum - std::f64::consts::PI).abs() > 1e-9 {
            return Err(BetaRangeError::InvalidAngles(format!(
                "angles sum to {sum}, not pi"
            )));
        }
        Ok(Self {
            theta,
            lambda: [
                theta[0].sin().powi(2),
                theta[1].sin().powi(2),
                theta[2].sin().powi(2),
            ],
        })
    }

    pub fn is_acute(&self) -> bool {
        self.theta.iter().all(|&t| t < std::f64::consts::FRAC_PI_2)
    }
}

/// `f(m) = lambda_1 m_2 m_3 + lambda_2 m_3 m_1 + lambda_3 m_1 m_2`;
/// `beta = 36 f`.
pub fn f_value(m: &SimplexPoint, angles: &TriangleAngles) -> f64 {
    let [m1, m2, m3] = m.m;
    let [l1, l2, l3] = angles.lambda;
    l1 * m2 * m3 + l2 * m3 * m1 + l3 * m1 * m2
}

/// `S = 2(l1 l2 + l2 l3 + l3 l1) - (l1^2 + l2^2 + l3^2)`; positive for every
/// non-degenerate triangle by the Heron factorization.
pub fn s_value(angles: &TriangleAngles) -> f64 {
    let [l1, l2, l3] = angles.lambda;
    2.0 * (l1 * l2 + l2 * l3 + l3 * l1) - (l1 * l1 + l2 * l2 + l3 * l3)
}

/// Interior critical point of `f` on the mass simplex, if it exists.
#[derive(Debug, Clone, PartialEq)]
pub enum CriticalMasses {
    Interior {
        masses: SimplexPoint,
        f_star: f64,
    },
    /// No interior critical point: the listed 0-indexed components of `m*`
    /// come out non-positive (the triangle has a non-acute angle there).
    Boundary {
        nonpositive: Vec<usize>,
    },
}

pub fn critical_masses(angles: &TriangleAngles) -> CriticalMasses {
    let [l1, l2, l3] = angles.lambda;
    let s = s_value(angles);
    let multiplier = 2.0 * l1 * l2 * l3 / s;
    let raw = [
        (l2 + l3 - l1) / (2.0 * l2 * l3) * multiplier,
        (l3 + l1 - l2) / (2.0 * l3 * l1) * multiplier,
        (l1 + l2 - l3) / (2.0 * l1 * l2) * multiplier,
    ];
    let nonpositive: Vec<usize> = (0..3).filter(|&i| raw[i] <= 0.0).collect();
    if !nonpositive.is_empty() {
        return CriticalMasses::Boundary { nonpositive };
    }
    let masses = SimplexPoint::new(raw).expect("positive critical masses form a simplex point");
    let f_star = f_value(&masses, angles);
    CriticalMasses::Interior { masses, f_star }
}

/// Outcome of the brute-force sweep.
#[derive(Debug, Clone, Serialize)]
pub struct BruteMaxResult {
    pub max_beta: f64,
    pub argmax_masses: [f64; 3],
    pub argmax_theta: [f64; 3],
    /// Maximum with one mass pinned to zero (simplex boundary).
    pub boundary_max: f64,
}

/// Best grid point for a single sampled triangle; rows of the CSV dump.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AngleSampleBest {
    pub theta: [f64; 3],
    pub masses: [f64; 3],
    pub beta: f64,
}

/// Angles uniform over the simplex `theta_1 + theta_2 + theta_3 = pi`.
fn sample_angles(rng: &mut StdRng) -> [f64; 3] {
    loop {
        let g: [f64; 3] = [
            -(rng.gen::<f64>().ln()),
            -(rng.gen::<f64>().ln()),
            -(rng.gen::<f64>().ln()),
        ];
        let total = g[0] + g[1] + g[2];
        let theta = [
            std::f64::consts::PI * g[0] / total,
            std::f64::consts::PI * g[1] / total,
            std::f64::consts::PI * g[2] / total,
        ];
        // reject numerically collinear draws
        if theta.iter().all(|&t| t > 1e-6) {
            return theta;
        }
    }
}

/// Maximizes `36 f` over the mass grid (step `grid_step`) crossed with
/// `angle_samples` random triangles. Deterministic for a fixed seed; the
/// per-sample maxima are reduced in sample order.
pub fn brute_max_detailed(
    grid_step: f64,
    angle_samples: usize,
    seed: u64,
) -> (BruteMaxResult, Vec<AngleSampleBest>) {
    assert!(
        grid_step > 0.0 && grid_step <= 1e-2,
        "grid step must be in (0, 1e-2]"
    );
    let n = (1.0 / grid_step).round() as usize;
    let h = 1.0 / n as f64;

    let mut rng = StdRng::seed_from_u64(seed);
    let samples: Vec<TriangleAngles> = (0..angle_samples)
        .map(|_| TriangleAngles::new(sample_angles(&mut rng)).expect("sampled angles valid"))
        .collect();

    let per_sample: Vec<(AngleSampleBest, f64)> = samples
        .par_iter()
        .map(|angles| {
            let [l1, l2, l3] = angles.lambda;
            let mut best = (0.0f64, [1.0, 0.0, 0.0]);
            let mut boundary_best = 0.0f64;
            for i in 0..=n {
                let m1 = i as f64 * h;
                for j in 0..=(n - i) {
                    let m2 = j as f64 * h;
                    let m3 = 1.0 - m1 - m2;
                    let f = l1 * m2 * m3 + l2 * m3 * m1 + l3 * m1 * m2;
                    if f > best.0 {
                        best = (f, [m1, m2, m3]);
                    }
                    if (i == 0 || j == 0 || j == n - i) && f > boundary_best {
                        boundary_best = f;
                    }
                }
            }
            (
                AngleSampleBest {
                    theta: angles.theta,
                    masses: best.1,
                    beta: 36.0 * best.0,
                },
                36.0 * boundary_best,
            )
        })
        .collect();

    let mut result = BruteMaxResult {
        max_beta: f64::NEG_INFINITY,
        argmax_masses: [0.0; 3],
        argmax_theta: [0.0; 3],
        boundary_max: 0.0,
    };
    for (best, boundary) in &per_sample {
        if best.beta > result.max_beta {
            result.max_beta = best.beta;
            result.argmax_masses = best.masses;
            result.argmax_theta = best.theta;
        }
        result.boundary_max = result.boundary_max.max(*boundary);
    }
    (result, per_sample.into_iter().map(|(b, _)| b).collect())
}

pub fn brute_max(grid_step: f64, angle_samples: usize, seed: u64) -> BruteMaxResult {
    brute_max_detailed(grid_step, angle_samples, seed).0
}

/// `beta` evaluated along a continuous path from a near-collinear isoceles
/// triangle to the equilateral equal-mass configuration. The values sweep
/// (up to sampling resolution) all of `(0, 9]`, which together with the closed-form
/// style bounds demonstrates the range constructively.
pub fn beta_path(samples: usize) -> Vec<f64> {
    let masses = SimplexPoint::new([1.0, 1.0, 1.0]).expect("equal masses");
    let eps = 1e-3;
    (0..samples)
        .map(|k| {
            let s = k as f64 / (samples - 1) as f64;
            let base = eps + s * (std::f64::consts::FRAC_PI_3 - eps);
            let theta = [base, base, std::f64::consts::PI - 2.0 * base];
            let angles = TriangleAngles::new(theta).expect("path angles valid");
            36.0 * f_value(&masses, &angles)
        })
        .collect()
}
