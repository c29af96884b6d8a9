//! Step-by-step solver for linear oscillators with a time-only order.
//!
//! Each step solves the 3×3 system
//!
//! ```text
//! ⎡ a1       a2·c_n/2   a3 ⎤ ⎡q_n ⎤   ⎡ 0     −a2(c_{n−1}+c_n)/2  0 ⎤ ⎡q_{n−1} ⎤   ⎡g_n⎤
//! ⎢ h²/4     −h         1  ⎥ ⎢u̇_n ⎥ = ⎢ −h²/4  0                  1 ⎥ ⎢u̇_{n−1}⎥ + ⎢ 0 ⎥
//! ⎣ −h/2     1          0  ⎦ ⎣u_n ⎦   ⎣ h/2   1                  0 ⎦ ⎣u_{n−1}⎦   ⎣ 0 ⎦
//! ```
//!
//! where the last two rows are the trapezoidal velocity/displacement updates
//! and g_n collects the forcing and the older part of the memory sum:
//! g_n = p_n − a2[Σ_{r=1}^{n−2} c_r u̇_r^m + (c_{n−1}/2) u̇_{n−2}].

use crate::derivative::{dot, CoefficientRow, VelocityHistory};
use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::model::{
    initial_acceleration, OscillatorProblem, SolutionTrace, SolveFailure, StepState,
};
use crate::stability::spectral_radius;

/// Steps whose left-hand matrix has a larger condition number fail.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMatrices {
    pub step: usize,
    pub lhs: Mat3,
    pub rhs: Mat3,
    pub load: f64,
}

/// L and R for coefficient values (a1, a2, a3) and the last two weights
/// c_n^n, c_{n−1}^n of the row.
pub(crate) fn step_operators(
    a1: f64,
    a2: f64,
    a3: f64,
    h: f64,
    c_last: f64,
    c_prev: f64,
) -> (Mat3, Mat3) {
    let c1 = 0.5 * h * h;
    let c2 = h;
    let lhs = Mat3([
        [a1, 0.5 * a2 * c_last, a3],
        [0.5 * c1, -h, 1.0],
        [-0.5 * c2, 1.0, 0.0],
    ]);
    let rhs = Mat3([
        [0.0, -0.5 * a2 * (c_prev + c_last), 0.0],
        [-0.5 * c1, 0.0, 1.0],
        [0.5 * c2, 1.0, 0.0],
    ]);
    (lhs, rhs)
}

/// Assemble the step-n system. `hist` must hold the n − 1 completed steps.
pub fn build_step(
    n: usize,
    problem: &OscillatorProblem,
    row: &CoefficientRow,
    hist: &VelocityHistory,
) -> Result<StepMatrices> {
    if n == 0 || row.n() != n {
        return Err(Error::Index(format!(
            "step {n} with a row for step {}",
            row.n()
        )));
    }
    if hist.len() + 1 < n {
        return Err(Error::Index(format!(
            "step {n} needs {} completed steps, history has {}",
            n - 1,
            hist.len()
        )));
    }
    let t = problem.grid.time(n);
    let (a1, a2, a3) = (problem.a1.eval(t), problem.a2.eval(t), problem.a3.eval(t));
    let c_last = row.last();
    let c_prev = row.get(n - 1);
    let (lhs, rhs) = step_operators(a1, a2, a3, problem.grid.h(), c_last, c_prev);

    let mut memory = 0.0;
    if n >= 2 {
        memory += dot(&row.weights()[..n - 2], &hist.means()[..n - 2]);
        memory += 0.5 * c_prev * hist.endpoint(n - 2);
    }
    let load = problem.p.eval(t) - a2 * memory;
    Ok(StepMatrices {
        step: n,
        lhs,
        rhs,
        load,
    })
}

/// Solve L x = R·prev + [g, 0, 0]ᵀ for x = (q_n, u̇_n, u_n).
pub fn solve_step(mats: &StepMatrices, prev: StepState) -> Result<StepState> {
    let cond = mats.lhs.condition();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::StepFailure {
            step: mats.step,
            reason: format!("step matrix is singular or ill-conditioned (cond = {cond:e})"),
        });
    }
    let mut b = mats.rhs.mul_vec(prev.as_array());
    b[0] += mats.load;
    let x = mats.lhs.solve(b).ok_or_else(|| Error::StepFailure {
        step: mats.step,
        reason: "singular step matrix".into(),
    })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::StepFailure {
            step: mats.step,
            reason: "non-finite step solution".into(),
        });
    }
    Ok(StepState::from_array(x))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExplicitOptions {
    /// Record ρ(L⁻¹R) at every step.
    pub spectral_radius: bool,
}

/// Solve a linear problem with a time-only order.
pub fn solve(
    problem: &OscillatorProblem,
    options: ExplicitOptions,
) -> std::result::Result<SolutionTrace, SolveFailure> {
    let fail = |source: Error, partial: SolutionTrace| SolveFailure { source, partial };
    let empty = || SolutionTrace::start(problem, f64::NAN);

    if !problem.alpha.is_time_only() {
        return Err(fail(
            Error::Unsupported("explicit solver needs a time-only order".into()),
            empty(),
        ));
    }
    if problem.nonlinear.is_some() {
        return Err(fail(
            Error::Unsupported("explicit solver does not take a nonlinear restoring term".into()),
            empty(),
        ));
    }
    let q0 = initial_acceleration(problem).map_err(|e| fail(e, empty()))?;

    let grid = problem.grid;
    let mut trace = SolutionTrace::start(problem, q0);
    let mut radii = options.spectral_radius.then(|| vec![f64::NAN]);
    let mut prev = StepState::new(q0, problem.v0, problem.u0);

    for n in 1..=grid.steps() {
        let t = grid.time(n);
        let step = problem
            .alpha
            .at_time(t)
            .map_err(|e| e.at_node(n))
            .and_then(|alpha| {
                let row = CoefficientRow::new(n, grid.h(), alpha)?;
                let mats = build_step(n, problem, &row, &trace.history)?;
                let next = solve_step(&mats, prev)?;
                let rho = match radii {
                    Some(_) => {
                        let inv = mats.lhs.inverse().ok_or_else(|| Error::StepFailure {
                            step: n,
                            reason: "singular step matrix".into(),
                        })?;
                        Some(spectral_radius(&(inv * mats.rhs))?)
                    }
                    None => None,
                };
                Ok((alpha, next, rho))
            });
        match step {
            Ok((alpha, next, rho)) => {
                trace.push(t, next, alpha);
                if let (Some(r), Some(rho)) = (radii.as_mut(), rho) {
                    r.push(rho);
                }
                prev = next;
            }
            Err(e) => {
                trace.rho = radii;
                return Err(fail(e, trace));
            }
        }
    }
    trace.rho = radii;
    Ok(trace)
}
