//! Problem definition and solution trace shared by both solvers.
//!
//! The oscillator is
//!
//! ```text
//! a1(t) ü + a2(t) D^α u + a3(t) u + f(u, u̇) = p(t),   u(0) = u0, u̇(0) = v0
//! ```
//!
//! where the order α may depend on time only or on the current state.

use std::fmt;
use std::sync::Arc;

use crate::derivative::{check_order, CoefficientRow, Grid, VelocityHistory};
use crate::error::{Error, Result};

/// A real function of time.
#[derive(Clone)]
pub struct TimeFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl TimeFn {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

impl fmt::Debug for TimeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TimeFn")
    }
}

impl From<f64> for TimeFn {
    fn from(value: f64) -> Self {
        Self::constant(value)
    }
}

/// Nonlinear restoring term f(u, u̇).
#[derive(Clone)]
pub struct RestoringFn(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl RestoringFn {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, u: f64, udot: f64) -> f64 {
        (self.0)(u, udot)
    }
}

impl fmt::Debug for RestoringFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RestoringFn")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    /// α = α(t); the solver may precompute one row per node.
    TimeOnly,
    /// α = α(t, u, u̇); each step is a nonlinear solve.
    StateDependent,
}

/// The derivative order as a function of (t, u, u̇).
#[derive(Clone)]
pub struct AlphaSpec {
    kind: OrderKind,
    eval: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
}

impl AlphaSpec {
    pub fn time_only<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: OrderKind::TimeOnly,
            eval: Arc::new(move |t, _, _| f(t)),
        }
    }

    pub fn constant(alpha: f64) -> Self {
        Self::time_only(move |_| alpha)
    }

    pub fn state_dependent<F>(f: F) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: OrderKind::StateDependent,
            eval: Arc::new(f),
        }
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn is_time_only(&self) -> bool {
        self.kind == OrderKind::TimeOnly
    }

    /// Raw order value, no range check.
    #[inline]
    pub fn raw(&self, t: f64, u: f64, udot: f64) -> f64 {
        (self.eval)(t, u, udot)
    }

    /// Order value, rejected (not clamped) outside (0, 1).
    pub fn eval(&self, t: f64, u: f64, udot: f64) -> Result<f64> {
        check_order(self.raw(t, u, udot), t)
    }

    /// Order of a time-only spec. State arguments are NaN so a closure
    /// that wrongly reads them fails the range check.
    pub fn at_time(&self, t: f64) -> Result<f64> {
        self.eval(t, f64::NAN, f64::NAN)
    }
}

impl fmt::Debug for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlphaSpec")
            .field("kind", &self.kind)
            .finish()
    }
}

/// The unknown triple (q_n, u̇_n, u_n) with q = ü.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepState {
    pub q: f64,
    pub udot: f64,
    pub u: f64,
}

impl StepState {
    pub fn new(q: f64, udot: f64, u: f64) -> Self {
        Self { q, udot, u }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.q, self.udot, self.u]
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        Self::new(x[0], x[1], x[2])
    }
}

#[derive(Debug, Clone)]
pub struct OscillatorProblem {
    pub a1: TimeFn,
    pub a2: TimeFn,
    pub a3: TimeFn,
    pub p: TimeFn,
    pub nonlinear: Option<RestoringFn>,
    pub alpha: AlphaSpec,
    pub u0: f64,
    pub v0: f64,
    pub grid: Grid,
}

impl OscillatorProblem {
    /// Constant-coefficient problem with zero forcing.
    pub fn new(a1: f64, a2: f64, a3: f64, alpha: AlphaSpec, u0: f64, v0: f64, grid: Grid) -> Self {
        Self {
            a1: a1.into(),
            a2: a2.into(),
            a3: a3.into(),
            p: TimeFn::constant(0.0),
            nonlinear: None,
            alpha,
            u0,
            v0,
            grid,
        }
    }

    pub fn with_forcing(mut self, p: TimeFn) -> Self {
        self.p = p;
        self
    }

    pub fn with_coefficients(mut self, a1: TimeFn, a2: TimeFn, a3: TimeFn) -> Self {
        self.a1 = a1;
        self.a2 = a2;
        self.a3 = a3;
        self
    }

    pub fn with_nonlinear(mut self, f: RestoringFn) -> Self {
        self.nonlinear = Some(f);
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_step(self, h: f64) -> Result<Self> {
        let grid = Grid::new(self.grid.horizon(), h)?;
        Ok(self.with_grid(grid))
    }

    #[inline]
    pub fn restoring(&self, u: f64, udot: f64) -> f64 {
        self.nonlinear.as_ref().map_or(0.0, |f| f.eval(u, udot))
    }

    /// True when the explicit step system applies: time-only order and no
    /// nonlinear restoring term.
    pub fn is_linear_explicit(&self) -> bool {
        self.alpha.is_time_only() && self.nonlinear.is_none()
    }
}

/// q_0 = (p(0) − a3(0)·u0 − f(u0, v0)) / a1(0), with (D^α u)_0 = 0 for a
/// continuous integrand.
pub fn initial_acceleration(problem: &OscillatorProblem) -> Result<f64> {
    let a1 = problem.a1.eval(0.0);
    if a1 == 0.0 || !a1.is_finite() {
        return Err(Error::Degenerate(format!("a1(0) = {a1}")));
    }
    let rhs = problem.p.eval(0.0)
        - problem.a3.eval(0.0) * problem.u0
        - problem.restoring(problem.u0, problem.v0);
    Ok(rhs / a1)
}

/// Nodal solution arrays, all of length N + 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub udot: Vec<f64>,
    pub uddot: Vec<f64>,
    /// Order used at each node. Node 0 holds the unchecked value α(0, u0,
    /// v0); it never enters a derivative since (D^α u)_0 = 0.
    pub alpha_used: Vec<f64>,
    /// Spectral radius of the step amplification matrix, when requested.
    pub rho: Option<Vec<f64>>,
    /// Root-solve iteration counts (implicit solver only).
    pub iterations: Option<Vec<usize>>,
    pub history: VelocityHistory,
}

impl SolutionTrace {
    pub(crate) fn start(problem: &OscillatorProblem, q0: f64) -> Self {
        let cap = problem.grid.steps() + 1;
        let mut trace = Self {
            t: Vec::with_capacity(cap),
            u: Vec::with_capacity(cap),
            udot: Vec::with_capacity(cap),
            uddot: Vec::with_capacity(cap),
            alpha_used: Vec::with_capacity(cap),
            rho: None,
            iterations: None,
            history: VelocityHistory::with_capacity(problem.v0, cap - 1),
        };
        trace.t.push(0.0);
        trace.u.push(problem.u0);
        trace.udot.push(problem.v0);
        trace.uddot.push(q0);
        trace
            .alpha_used
            .push(problem.alpha.raw(0.0, problem.u0, problem.v0));
        trace
    }

    pub(crate) fn push(&mut self, t: f64, state: StepState, alpha: f64) {
        self.t.push(t);
        self.u.push(state.u);
        self.udot.push(state.udot);
        self.uddot.push(state.q);
        self.alpha_used.push(alpha);
        self.history.push(state.udot);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.t.len().saturating_sub(1)
    }

    pub fn state(&self, n: usize) -> StepState {
        StepState::new(self.uddot[n], self.udot[n], self.u[n])
    }

    pub fn peak_abs_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// A solve that stopped early, with everything computed before the failure.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{source}")]
pub struct SolveFailure {
    pub source: Error,
    pub partial: SolutionTrace,
}

impl From<SolveFailure> for Error {
    fn from(f: SolveFailure) -> Self {
        f.source
    }
}

/// Residual of the discrete equation at every node n ≥ 1, recomputed from
/// the trace alone, each divided by max(1, |p_n|, |a1 q_n|, |a3 u_n|).
///
/// The order is re-evaluated from `problem.alpha` at the stored state and
/// the derivative is rebuilt from the stored velocities.
pub fn discrete_residuals(problem: &OscillatorProblem, trace: &SolutionTrace) -> Result<Vec<f64>> {
    let hist = VelocityHistory::from_velocities(&trace.udot)?;
    let h = problem.grid.h();
    (1..trace.len())
        .map(|n| {
            let t = trace.t[n];
            let (q, v, u) = (trace.uddot[n], trace.udot[n], trace.u[n]);
            let alpha = problem.alpha.eval(t, u, v).map_err(|e| e.at_node(n))?;
            let row = CoefficientRow::new(n, h, alpha)?;
            let dvo = crate::derivative::vo_derivative_at(&row, &hist)?;
            let (a1, a2, a3, p) = (
                problem.a1.eval(t),
                problem.a2.eval(t),
                problem.a3.eval(t),
                problem.p.eval(t),
            );
            let res = a1 * q + a2 * dvo + a3 * u + problem.restoring(u, v) - p;
            let scale = 1f64.max(p.abs()).max((a1 * q).abs()).max((a3 * u).abs());
            Ok(res / scale)
        })
        .collect()
}
