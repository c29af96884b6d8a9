//! Spectral-radius stability check of the explicit step map.
//!
//! The homogeneous part of the step system maps (q, u̇, u)_{n−1} to
//! (q, u̇, u)_n through A_n = L_n⁻¹ R_n. A run is reported stable when
//! ρ(A_n) ≤ 1 at every step. The report is diagnostic; it never aborts a
//! solve.

use num_complex::Complex64;
use serde::Serialize;

use crate::derivative::{coefficient, CoefficientRow};
use crate::error::{Error, Result};
use crate::explicit::step_operators;
use crate::linalg::Mat3;
use crate::model::{OscillatorProblem, SolutionTrace};

/// Slack on ρ ≤ 1 for round-off.
pub const RHO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// ρ(A_n) for n = 1..=N.
    pub rho: Vec<f64>,
    pub max_rho: f64,
    pub satisfied: bool,
    /// True when the orders came from a computed trace (state-dependent α).
    pub trace_conditional: bool,
}

impl StabilityReport {
    fn from_radii(rho: Vec<f64>, trace_conditional: bool) -> Self {
        let max_rho = rho.iter().copied().fold(0.0, f64::max);
        Self {
            satisfied: max_rho <= 1.0 + RHO_TOLERANCE,
            rho,
            max_rho,
            trace_conditional,
        }
    }
}

/// Eigenvalues of a 3×3 matrix from its characteristic cubic
/// λ³ − tr·λ² + m₂·λ − det = 0.
///
/// One real root is found in closed form (trigonometric branch for three
/// real roots, Cardano otherwise), polished by Newton, and the remaining
/// quadratic factor gives the other two, possibly complex.
pub fn eigenvalues(a: &Mat3) -> Result<[Complex64; 3]> {
    if !a.is_finite() {
        return Err(Error::Domain {
            function: "eigenvalues",
            value: f64::NAN,
            expected: "finite matrix entries",
        });
    }
    // monic λ³ + b λ² + c λ + d
    let b = -a.trace();
    let c = a.minor_sum();
    let d = -a.det();
    let r = polish(real_cubic_root(b, c, d), b, c, d);
    // λ³ + bλ² + cλ + d = (λ − r)(λ² + e λ + f)
    let e = b + r;
    // product of the other two roots; −d/r is the better form unless r is
    // small relative to them
    let f = if r != 0.0 && r.abs().powi(3) >= d.abs() {
        -d / r
    } else {
        c + r * e
    };
    let (z1, z2) = quadratic_roots(e, f);
    Ok([Complex64::new(r, 0.0), z1, z2])
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &Mat3) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn real_cubic_root(b: f64, c: f64, d: f64) -> f64 {
    // λ = x − b/3 gives x³ + p x + q = 0
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let x = if p == 0.0 {
        (-q).cbrt()
    } else if disc > 0.0 {
        let s = disc.sqrt();
        // pick the sign that avoids cancellation
        let w = (-q / 2.0 - q.signum() * s).cbrt();
        if w == 0.0 {
            0.0
        } else {
            w - p / (3.0 * w)
        }
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        // largest of the three real roots
        m * theta.cos()
    };
    x - shift
}

fn polish(mut x: f64, b: f64, c: f64, d: f64) -> f64 {
    for _ in 0..3 {
        let f = ((x + b) * x + c) * x + d;
        let df = (3.0 * x + 2.0 * b) * x + c;
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let step = f / df;
        let next = x - step;
        // keep Newton only when it actually reduces the residual
        let f_next = ((next + b) * next + c) * next + d;
        if f_next.abs() < f.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Roots of z² + e z + f.
fn quadratic_roots(e: f64, f: f64) -> (Complex64, Complex64) {
    let disc = e * e - 4.0 * f;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = -0.5 * (e + e.signum() * s);
        if big == 0.0 {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        (Complex64::new(big, 0.0), Complex64::new(f / big, 0.0))
    } else {
        let re = -0.5 * e;
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(re, im), Complex64::new(re, -im))
    }
}

/// A = L⁻¹ R for given coefficient values and last two row weights.
pub(crate) fn amplification_from_parts(
    step: usize,
    a1: f64,
    a2: f64,
    a3: f64,
    h: f64,
    c_last: f64,
    c_prev: f64,
) -> Result<Mat3> {
    let (lhs, rhs) = step_operators(a1, a2, a3, h, c_last, c_prev);
    let inv = lhs.inverse().ok_or_else(|| Error::StepFailure {
        step,
        reason: "singular step matrix".into(),
    })?;
    let a = inv * rhs;
    if !a.is_finite() {
        return Err(Error::StepFailure {
            step,
            reason: "non-finite amplification matrix".into(),
        });
    }
    Ok(a)
}

/// A_n for step n, with the row built for α(t_n).
pub fn amplification_matrix(
    n: usize,
    problem: &OscillatorProblem,
    row: &CoefficientRow,
) -> Result<Mat3> {
    if row.n() != n {
        return Err(Error::Index(format!(
            "row is for step {}, not {n}",
            row.n()
        )));
    }
    let t = problem.grid.time(n);
    amplification_from_parts(
        n,
        problem.a1.eval(t),
        problem.a2.eval(t),
        problem.a3.eval(t),
        problem.grid.h(),
        row.last(),
        row.get(n - 1),
    )
}

fn radius_at(problem: &OscillatorProblem, n: usize, alpha: f64) -> Result<f64> {
    let h = problem.grid.h();
    let t = problem.grid.time(n);
    // only the last two weights enter A_n
    let c_last = coefficient(n, n, h, alpha)?;
    let c_prev = if n > 1 {
        coefficient(n, n - 1, h, alpha)?
    } else {
        0.0
    };
    let a = amplification_from_parts(
        n,
        problem.a1.eval(t),
        problem.a2.eval(t),
        problem.a3.eval(t),
        h,
        c_last,
        c_prev,
    )?;
    spectral_radius(&a)
}

/// ρ(A_n) for every step of a time-only problem.
pub fn stability_report(problem: &OscillatorProblem) -> Result<StabilityReport> {
    if !problem.alpha.is_time_only() {
        return Err(Error::Unsupported(
            "stability report without a trace needs a time-only order".into(),
        ));
    }
    let grid = problem.grid;
    let rho = (1..=grid.steps())
        .map(|n| {
            let alpha = problem
                .alpha
                .at_time(grid.time(n))
                .map_err(|e| e.at_node(n))?;
            radius_at(problem, n, alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport::from_radii(rho, false))
}

/// ρ(A_n) along a computed trace, using the orders the solve actually used.
pub fn stability_report_along(
    problem: &OscillatorProblem,
    trace: &SolutionTrace,
) -> Result<StabilityReport> {
    let rho = (1..trace.len())
        .map(|n| radius_at(problem, n, trace.alpha_used[n]))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport::from_radii(
        rho,
        !problem.alpha.is_time_only(),
    ))
}
