//! Fixed-step order-8 explicit Runge-Kutta integration for small dense
//! states.
//!
//! The tableau is the 11-stage Cooper-Verner method built on sqrt(21). The
//! systems integrated here are linear or smooth and non-stiff, so a fixed
//! step with a step count chosen by the caller (scaled against the
//! 1/(1 - e) coefficient peak) is both simpler and more reproducible than
//! adaptive control.

use nalgebra::SMatrix;
use std::sync::OnceLock;

const STAGES: usize = 11;

struct Tableau {
    a: [[f64; STAGES]; STAGES],
    b: [f64; STAGES],
    c: [f64; STAGES],
}

fn tableau() -> &'static Tableau {
    static TABLEAU: OnceLock<Tableau> = OnceLock::new();
    TABLEAU.get_or_init(|| {
        let s = 21f64.sqrt();
        let mut a = [[0.0; STAGES]; STAGES];
        a[1][0] = 1.0 / 2.0;
        a[2][0] = 1.0 / 4.0;
        a[2][1] = 1.0 / 4.0;
        a[3][0] = 1.0 / 7.0;
        a[3][1] = (-7.0 - 3.0 * s) / 98.0;
        a[3][2] = (21.0 + 5.0 * s) / 49.0;
        a[4][0] = (11.0 + s) / 84.0;
        a[4][2] = (18.0 + 4.0 * s) / 63.0;
        a[4][3] = (21.0 - s) / 252.0;
        a[5][0] = (5.0 + s) / 48.0;
        a[5][2] = (9.0 + s) / 36.0;
        a[5][3] = (-231.0 + 14.0 * s) / 360.0;
        a[5][4] = (63.0 - 7.0 * s) / 80.0;
        a[6][0] = (10.0 - s) / 42.0;
        a[6][2] = (-432.0 + 92.0 * s) / 315.0;
        a[6][3] = (633.0 - 145.0 * s) / 90.0;
        a[6][4] = (-504.0 + 115.0 * s) / 70.0;
        a[6][5] = (63.0 - 13.0 * s) / 35.0;
        a[7][0] = 1.0 / 14.0;
        a[7][4] = (14.0 - 3.0 * s) / 126.0;
        a[7][5] = (13.0 - 3.0 * s) / 63.0;
        a[7][6] = 1.0 / 9.0;
        a[8][0] = 1.0 / 32.0;
        a[8][4] = (91.0 - 21.0 * s) / 576.0;
        a[8][5] = 11.0 / 72.0;
        a[8][6] = (-385.0 - 75.0 * s) / 1152.0;
        a[8][7] = (63.0 + 13.0 * s) / 128.0;
        a[9][0] = 1.0 / 14.0;
        a[9][4] = 1.0 / 9.0;
        a[9][5] = (-733.0 - 147.0 * s) / 2205.0;
        a[9][6] = (515.0 + 111.0 * s) / 504.0;
        a[9][7] = (-51.0 - 11.0 * s) / 56.0;
        a[9][8] = (132.0 + 28.0 * s) / 245.0;
        a[10][4] = (-42.0 + 7.0 * s) / 18.0;
        a[10][5] = (-18.0 + 28.0 * s) / 45.0;
        a[10][6] = (-273.0 - 53.0 * s) / 72.0;
        a[10][7] = (301.0 + 53.0 * s) / 72.0;
        a[10][8] = (28.0 - 28.0 * s) / 45.0;
        a[10][9] = (49.0 - 7.0 * s) / 18.0;

        let b = [
            1.0 / 20.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            49.0 / 180.0,
            16.0 / 45.0,
            49.0 / 180.0,
            1.0 / 20.0,
        ];
        let mut c = [0.0; STAGES];
        for i in 0..STAGES {
            c[i] = a[i].iter().sum();
        }
        Tableau { a, b, c }
    })
}

/// Advances `y' = f(t, y)` from `t0` to `t1` in `steps` equal steps.
pub fn integrate_fixed<const R: usize, const C: usize, F>(
    mut rhs: F,
    y0: SMatrix<f64, R, C>,
    t0: f64,
    t1: f64,
    steps: usize,
) -> SMatrix<f64, R, C>
where
    F: FnMut(f64, &SMatrix<f64, R, C>) -> SMatrix<f64, R, C>,
{
    assert!(steps > 0, "integration needs at least one step");
    let tab = tableau();
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let mut k = [SMatrix::<f64, R, C>::zeros(); STAGES];
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        k[0] = rhs(t, &y);
        for i in 1..STAGES {
            let mut yi = y;
            for j in 0..i {
                let a = tab.a[i][j];
                if a != 0.0 {
                    yi += k[j] * (h * a);
                }
            }
            k[i] = rhs(t + tab.c[i] * h, &yi);
        }
        for i in 0..STAGES {
            y += k[i] * (h * tab.b[i]);
        }
    }
    y
}

/// Like [`integrate_fixed`] but reports the state after each of `segments`
/// equal sub-intervals (the last entry is the state at `t1`).
pub fn integrate_segments<const R: usize, const C: usize, F>(
    mut rhs: F,
    y0: SMatrix<f64, R, C>,
    t0: f64,
    t1: f64,
    segments: usize,
    steps_per_segment: usize,
) -> Vec<(f64, SMatrix<f64, R, C>)>
where
    F: FnMut(f64, &SMatrix<f64, R, C>) -> SMatrix<f64, R, C>,
{
    let mut out = Vec::with_capacity(segments);
    let mut y = y0;
    let dt = (t1 - t0) / segments as f64;
    for seg in 0..segments {
        let a = t0 + seg as f64 * dt;
        let b = if seg + 1 == segments { t1 } else { a + dt };
        y = integrate_fixed(&mut rhs, y, a, b, steps_per_segment);
        out.push((b, y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, SMatrix, Vector1};

    #[test]
    fn tableau_row_sums_and_weights() {
        let tab = tableau();
        assert!((tab.b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // quadrature consistency sum(b_i c_i) = 1/2
        let bc: f64 = (0..STAGES).map(|i| tab.b[i] * tab.c[i]).sum();
        assert!((bc - 0.5).abs() < 1e-15);
        let expected_c = [
            0.0,
            0.5,
            0.5,
            (7.0 + 21f64.sqrt()) / 14.0,
            (7.0 + 21f64.sqrt()) / 14.0,
            0.5,
            (7.0 - 21f64.sqrt()) / 14.0,
            (7.0 - 21f64.sqrt()) / 14.0,
            0.5,
            (7.0 + 21f64.sqrt()) / 14.0,
            1.0,
        ];
        for i in 0..STAGES {
            assert!((tab.c[i] - expected_c[i]).abs() < 1e-14, "c[{i}]");
        }
    }

    #[test]
    fn eighth_order_convergence_on_nonlinear_problem() {
        // y' = y cos t, exact solution exp(sin t).
        let rhs = |t: f64, y: &Vector1<f64>| y * t.cos();
        let exact = (6.0f64.sin()).exp();
        let err = |steps: usize| {
            (integrate_fixed(rhs, Vector1::new(1.0), 0.0, 6.0, steps)[0] - exact).abs()
        };
        let e1 = err(10);
        let e2 = err(20);
        assert!(
            e2 > 1e-14,
            "step too small to measure order (e2 = {e2:.3e})"
        );
        let order = (e1 / e2).log2();
        assert!(
            order > 7.5,
            "observed order {order:.2} (e1 = {e1:.3e}, e2 = {e2:.3e})"
        );
    }

    #[test]
    fn matches_matrix_exponential_for_constant_system() {
        let a = Matrix4::new(
            0.0, 1.0, 0.3, 0.0, //
            -1.0, 0.0, 0.0, 0.2, //
            0.1, 0.0, 0.0, 1.0, //
            0.0, 0.1, -1.0, 0.0,
        );
        let flow = integrate_fixed(
            |_t, y: &Matrix4<f64>| a * y,
            Matrix4::identity(),
            0.0,
            2.0,
            200,
        );
        let exact = (a * 2.0).exp();
        assert!((flow - exact).abs().max() < 1e-12);
    }

    #[test]
    fn segments_agree_with_single_run() {
        let rhs = |t: f64, y: &SMatrix<f64, 2, 1>| SMatrix::<f64, 2, 1>::new(y[1], -t.sin() - y[0]);
        let y0 = SMatrix::<f64, 2, 1>::new(1.0, 0.0);
        let full = integrate_fixed(rhs, y0, 0.0, 4.0, 64);
        let segs = integrate_segments(rhs, y0, 0.0, 4.0, 8, 8);
        assert_eq!(segs.len(), 8);
        assert!((segs.last().unwrap().1 - full).abs().max() < 1e-14);
    }
}
