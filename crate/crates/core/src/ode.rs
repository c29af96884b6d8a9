//! Adaptive Dormand–Prince 5(4) integrator for integer-order ODE systems.
//!
//! Used as an independent oracle for the limiting (α → 0, α → 1) forms of
//! the oscillator, where the fractional term degenerates to u − u0 or u̇.

use crate::error::{Error, Result};

const MAX_STEPS: usize = 1_000_000;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate y' = f(t, y) from `t0` with initial state `y0` and return the
/// state at each (ascending) sample time. `tol` bounds the local error per
/// step, relative and absolute.
pub fn integrate<F>(f: F, t0: f64, y0: &[f64], samples: &[f64], tol: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if samples.windows(2).any(|w| w[1] < w[0]) || samples.first().is_some_and(|&s| s < t0) {
        return Err(Error::Config(
            "ODE samples must be ascending from t0".into(),
        ));
    }
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut h = 1e-3;
    let mut k = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut out = Vec::with_capacity(samples.len());
    let mut steps = 0;
    let atol = tol;
    let rtol = tol;

    f(t, &y, &mut k[0]);
    for &target in samples {
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::NoConvergence {
                    what: "ODE integration",
                    iterations: MAX_STEPS,
                });
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..dim {
                    stage[i] = y[i] + step * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
                }
                f(t + C[s] * step, &stage, &mut k[s]);
            }
            // stage 7 is evaluated at the fifth-order solution itself (FSAL)
            for i in 0..dim {
                y_new[i] = y[i] + step * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
            }
            let err = (0..dim)
                .map(|i| {
                    let e = step * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                    let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
                    (e / sc).powi(2)
                })
                .sum::<f64>()
                / dim as f64;
            let err = err.sqrt();
            if !err.is_finite() {
                return Err(Error::NoConvergence {
                    what: "ODE integration (non-finite error estimate)",
                    iterations: steps,
                });
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 && last {
                // keep the pre-truncation step size for the next interval
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::NoConvergence {
                    what: "ODE integration (step size underflow)",
                    iterations: steps,
                });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Solve a1 ü + c u̇ + k u = b with u(0) = u0, u̇(0) = v0 at the given
/// times; returns u only.
#[allow(clippy::too_many_arguments)]
pub fn linear_oscillator(
    a1: f64,
    c: f64,
    k: f64,
    b: f64,
    u0: f64,
    v0: f64,
    samples: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = (b - c * y[1] - k * y[0]) / a1;
    };
    Ok(integrate(rhs, 0.0, &[u0, v0], samples, tol)?
        .into_iter()
        .map(|y| y[0])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_motion() {
        let ys = linear_oscillator(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, &[0.5, 1.0, 3.0], 1e-12).unwrap();
        for (y, t) in ys.iter().zip([0.5, 1.0, 3.0]) {
            assert!((y - t).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_half_period() {
        let ys = linear_oscillator(1.0, 0.0, 1.0, 0.0, 1.0, 0.0, &[PI], 1e-12).unwrap();
        assert!((ys[0] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn exponential_growth() {
        let ys = integrate(
            |_, y, dy| dy[0] = y[0],
            0.0,
            &[1.0],
            &[0.0, 1.0, 2.0],
            1e-13,
        )
        .unwrap();
        assert_eq!(ys[0][0], 1.0);
        assert!((ys[2][0] - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn rejects_unsorted_samples() {
        assert!(integrate(|_, _, dy| dy[0] = 0.0, 0.0, &[1.0], &[1.0, 0.5], 1e-10).is_err());
    }
}
