//! Step-by-step solver for state-dependent orders and nonlinear restoring
//! terms.
//!
//! The trapezoidal updates express (u̇_n, u_n) as affine functions of the
//! unknown acceleration q_n, so each step reduces to one scalar equation
//!
//! ```text
//! a1 q_n + a2 Σ_r c_r^n(α*) u̇_r^m + a3 u_n + f(u_n, u̇_n) − p_n = 0,
//! α* = α(t_n, u_n(q_n), u̇_n(q_n))
//! ```
//!
//! solved by a secant iteration with bisection fallback. The weights depend
//! on α*, hence on q_n, and are rebuilt whenever α* moves.

use crate::derivative::{dot, CoefficientRow, VelocityHistory};
use crate::error::{Error, Result};
use crate::model::{
    initial_acceleration, OscillatorProblem, SolutionTrace, SolveFailure, StepState,
};

/// Orders closer than this reuse the previous coefficient row.
const ROW_CACHE_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSolveConfig {
    /// Step-size tolerance on q, absolute plus relative: |Δq| ≤ tol_q·(1 + |q|).
    pub tol_q: f64,
    /// Residual tolerance relative to max(1, |p_n|, |a3 u_n|).
    pub tol_res: f64,
    pub max_iters: usize,
}

impl Default for RootSolveConfig {
    fn default() -> Self {
        Self {
            tol_q: 1e-15,
            tol_res: 1e-11,
            max_iters: 50,
        }
    }
}

impl RootSolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_q > 0.0 && self.tol_res > 0.0) || self.max_iters < 2 {
            return Err(Error::Config(format!("invalid root-solve config {self:?}")));
        }
        Ok(())
    }
}

/// (u̇_n, u_n) from q_n via the trapezoidal velocity and displacement
/// updates.
pub fn state_from_q(q: f64, prev: StepState, h: f64) -> (f64, f64) {
    let qs = q + prev.q;
    let udot = prev.udot + 0.5 * h * qs;
    let u = prev.u + h * udot - 0.25 * h * h * qs;
    (udot, u)
}

/// Residual evaluator for one step, caching the weight row per order value.
struct StepEquation<'a> {
    n: usize,
    t: f64,
    h: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    p: f64,
    prev: StepState,
    problem: &'a OscillatorProblem,
    hist: &'a VelocityHistory,
    // (alpha, c_n^n, Σ_{r<n} c_r^n u̇_r^m)
    cached: Option<(f64, f64, f64)>,
}

struct Evaluation {
    residual: f64,
    state: StepState,
    alpha: f64,
    scale: f64,
}

impl<'a> StepEquation<'a> {
    fn new(
        n: usize,
        problem: &'a OscillatorProblem,
        prev: StepState,
        hist: &'a VelocityHistory,
    ) -> Result<Self> {
        if n == 0 || hist.len() + 1 < n {
            return Err(Error::Index(format!(
                "step {n} needs {} completed steps, history has {}",
                n.saturating_sub(1),
                hist.len()
            )));
        }
        let t = problem.grid.time(n);
        Ok(Self {
            n,
            t,
            h: problem.grid.h(),
            a1: problem.a1.eval(t),
            a2: problem.a2.eval(t),
            a3: problem.a3.eval(t),
            p: problem.p.eval(t),
            prev,
            problem,
            hist,
            cached: None,
        })
    }

    fn weights(&mut self, alpha: f64) -> Result<(f64, f64)> {
        if let Some((a, last, memory)) = self.cached {
            if (a - alpha).abs() < ROW_CACHE_TOLERANCE {
                return Ok((last, memory));
            }
        }
        let row = CoefficientRow::new(self.n, self.h, alpha)?;
        let k = self.n - 1;
        let memory = dot(&row.weights()[..k], &self.hist.means()[..k]);
        self.cached = Some((alpha, row.last(), memory));
        Ok((row.last(), memory))
    }

    fn eval(&mut self, q: f64) -> Result<Evaluation> {
        let (udot, u) = state_from_q(q, self.prev, self.h);
        let alpha = self
            .problem
            .alpha
            .eval(self.t, u, udot)
            .map_err(|e| match e {
                Error::OrderOutOfRange { alpha, t, .. } => Error::OrderOutOfRange {
                    alpha,
                    t,
                    node: Some(self.n),
                    trial_q: Some(q),
                },
                other => other,
            })?;
        let (c_last, memory) = self.weights(alpha)?;
        let newest_mean = 0.5 * (self.prev.udot + udot);
        let derivative = memory + c_last * newest_mean;
        let residual =
            self.a1 * q + self.a2 * derivative + self.a3 * u + self.problem.restoring(u, udot)
                - self.p;
        let scale = 1f64.max(self.p.abs()).max((self.a3 * u).abs());
        Ok(Evaluation {
            residual,
            state: StepState::new(q, udot, u),
            alpha,
            scale,
        })
    }
}

/// Residual of the step-n equation at trial acceleration `q`.
pub fn residual(
    q: f64,
    n: usize,
    problem: &OscillatorProblem,
    prev: StepState,
    hist: &VelocityHistory,
) -> Result<f64> {
    Ok(StepEquation::new(n, problem, prev, hist)?.eval(q)?.residual)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: StepState,
    pub alpha: f64,
    pub residual: f64,
    /// Residual evaluations used.
    pub iterations: usize,
}

/// Solve the step-n equation for q_n, starting from q_{n−1}.
pub fn solve_step_nonlinear(
    n: usize,
    problem: &OscillatorProblem,
    prev: StepState,
    hist: &VelocityHistory,
    cfg: &RootSolveConfig,
) -> Result<StepOutcome> {
    cfg.validate()?;
    let mut eq = StepEquation::new(n, problem, prev, hist)?;
    let done = |e: &Evaluation, iterations: usize| StepOutcome {
        state: e.state,
        alpha: e.alpha,
        residual: e.residual,
        iterations,
    };
    let converged = |e: &Evaluation| e.residual.abs() <= cfg.tol_res * e.scale;

    let mut a = eq.eval(prev.q)?;
    if converged(&a) {
        return Ok(done(&a, 1));
    }
    let mut b = eq.eval(prev.q * (1.0 + 1e-6) + 1e-6)?;
    let mut iterations = 2;
    // (q_neg, q_pos): residual negative at the first, positive at the second
    let mut bracket: Option<(f64, f64)> = None;
    let update_bracket = |e: &Evaluation, other: &Evaluation, br: &mut Option<(f64, f64)>| {
        let (q, r) = (e.state.q, e.residual);
        match br {
            Some((neg, pos)) => {
                if r < 0.0 {
                    *neg = q;
                } else if r > 0.0 {
                    *pos = q;
                }
            }
            None if r.signum() != other.residual.signum() => {
                *br = Some(if r < 0.0 {
                    (q, other.state.q)
                } else {
                    (other.state.q, q)
                });
            }
            None => {}
        }
    };
    update_bracket(&b, &a, &mut bracket);

    loop {
        if converged(&b) {
            // one more secant step is nearly free and removes the error left
            // by the finite-difference slope of the first iterations
            let next = b.state.q - b.residual * (b.state.q - a.state.q) / (b.residual - a.residual);
            if iterations < cfg.max_iters && next.is_finite() && next != b.state.q {
                if let Ok(c) = eq.eval(next) {
                    iterations += 1;
                    if c.residual.abs() < b.residual.abs() {
                        return Ok(done(&c, iterations));
                    }
                }
            }
            return Ok(done(&b, iterations));
        }
        if iterations >= cfg.max_iters {
            break;
        }
        let (qa, qb) = (a.state.q, b.state.q);
        let slope = (b.residual - a.residual) / (qb - qa);
        let mut next = qb - b.residual / slope;
        if let Some((neg, pos)) = bracket {
            let (lo, hi) = if neg < pos { (neg, pos) } else { (pos, neg) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
        } else if !next.is_finite() {
            break;
        }
        let step = (next - qb).abs();
        let c = eq.eval(next)?;
        iterations += 1;
        update_bracket(&c, &b, &mut bracket);
        a = b;
        b = c;
        if step <= cfg.tol_q * (1.0 + qb.abs()) && !converged(&b) {
            // stalled: the iterate no longer moves but the residual is still large
            break;
        }
    }
    Err(Error::RootSolve {
        step: n,
        iterations,
        last_q: b.state.q,
        residual: b.residual,
    })
}

/// Solve the full problem step by step.
pub fn solve(
    problem: &OscillatorProblem,
    cfg: &RootSolveConfig,
) -> std::result::Result<SolutionTrace, SolveFailure> {
    let empty = || SolutionTrace::start(problem, f64::NAN);
    cfg.validate().map_err(|source| SolveFailure {
        source,
        partial: empty(),
    })?;
    let q0 = initial_acceleration(problem).map_err(|source| SolveFailure {
        source,
        partial: empty(),
    })?;
    let mut trace = SolutionTrace::start(problem, q0);
    let mut iterations = Vec::with_capacity(problem.grid.steps() + 1);
    iterations.push(0);
    let mut prev = StepState::new(q0, problem.v0, problem.u0);

    for n in 1..=problem.grid.steps() {
        match solve_step_nonlinear(n, problem, prev, &trace.history, cfg) {
            Ok(out) => {
                trace.push(problem.grid.time(n), out.state, out.alpha);
                iterations.push(out.iterations);
                prev = out.state;
            }
            Err(source) => {
                trace.iterations = Some(iterations);
                return Err(SolveFailure {
                    source,
                    partial: trace,
                });
            }
        }
    }
    trace.iterations = Some(iterations);
    Ok(trace)
}
