//! Numerical solution of variable-order fractional differential equations
//! of Caputo type.
//!
//! The crate discretizes the variable-order derivative
//!
//! ```text
//! D^{α(t)} u(t) = 1/Γ(1 − α(t)) ∫₀ᵗ (t − x)^{−α(t)} u̇(x) dx,   0 < α < 1
//! ```
//!
//! by product quadrature with step-mean velocities ([`derivative`]), and
//! integrates the fractional oscillator
//!
//! ```text
//! a1(t) ü + a2(t) D^α u + a3(t) u + f(u, u̇) = p(t)
//! ```
//!
//! either with a linear 3×3 step system when α depends on time only
//! ([`explicit`]), or with a scalar nonlinear solve per step when α depends
//! on the state or a nonlinear restoring force is present ([`implicit`]).
//! [`stability`] reports the spectral radius of the step map and
//! [`reference`] holds the benchmark scenarios with their exact solutions.
//!
//! ```
//! use vofde::{explicit, AlphaSpec, ExplicitOptions, Grid, OscillatorProblem};
//!
//! let grid = Grid::new(1.0, 1e-2).unwrap();
//! let alpha = AlphaSpec::time_only(|t| 0.8 * (1.0 - (-t).exp()) + 0.1);
//! let problem = OscillatorProblem::new(1.0, 1.0, 25.0, alpha, 1.0, 10.0, grid);
//! let trace = explicit::solve(&problem, ExplicitOptions::default()).unwrap();
//! assert_eq!(trace.len(), 101);
//! ```

// NaN-rejecting `!(x > 0.0)` tests and failures that carry their partial
// trace are both deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::result_large_err)]

pub mod cli;
pub mod derivative;
pub mod error;
pub mod explicit;
pub mod implicit;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod quadrature;
pub mod reference;
pub mod special;
pub mod stability;

pub use derivative::{
    caputo_quadrature_oracle, coefficient, coefficient_row, vo_derivative_at, vo_derivative_series,
    CoefficientRow, Grid, VelocityHistory,
};
pub use error::{Error, Result};
pub use explicit::ExplicitOptions;
pub use implicit::RootSolveConfig;
pub use model::{
    discrete_residuals, initial_acceleration, AlphaSpec, OrderKind, OscillatorProblem, RestoringFn,
    SolutionTrace, SolveFailure, StepState, TimeFn,
};
pub use stability::StabilityReport;
