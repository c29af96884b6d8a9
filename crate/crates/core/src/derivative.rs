//! Discrete variable-order Caputo derivative.
//!
//! On a uniform grid t_n = n·h the velocity is replaced by its mean over
//! each step, so the derivative at t_n becomes a weighted sum
//!
//! ```text
//! (D^α u)_n = Σ_{r=1}^{n} c_r^n · u̇_r^m,    u̇_r^m = (u̇_{r−1} + u̇_r) / 2
//! ```
//!
//! with weights that are exact integrals of the kernel over each step:
//!
//! ```text
//! c_r^n = 1/Γ(1−α) ∫_{(r−1)h}^{rh} (nh − x)^{−α} dx
//!       = h^{1−α} / [Γ(1−α)(α−1)] · [(n−r)^{1−α} − (n−r+1)^{1−α}]
//! ```
//!
//! The order α = α(t_n) is frozen across the whole history of row n.

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::gamma;

/// Uniform time grid on [0, T] with N = ceil(T/h) steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    h: f64,
    steps: usize,
}

impl Grid {
    /// Grid covering `[0, t_total]` with step `h`.
    ///
    /// A quotient within 1e-9 (relative) of an integer is treated as that
    /// integer, so `T = 1, h = 0.001` gives exactly 1000 steps.
    pub fn new(t_total: f64, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Config(format!("step h must be positive, got {h}")));
        }
        if !(t_total.is_finite() && t_total > 0.0) {
            return Err(Error::Config(format!(
                "horizon T must be positive, got {t_total}"
            )));
        }
        let ratio = t_total / h;
        let nearest = ratio.round();
        let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            ratio.ceil()
        };
        Ok(Self {
            h,
            steps: (steps as usize).max(1),
        })
    }

    pub fn with_steps(h: f64, steps: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) || steps == 0 {
            return Err(Error::Config(format!(
                "invalid grid: h = {h}, steps = {steps}"
            )));
        }
        Ok(Self { h, steps })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of steps N; the grid has N + 1 nodes.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.h
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.time(n)).collect()
    }
}

/// Rejects orders outside the open interval (0, 1).
pub fn check_order(alpha: f64, t: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(alpha)
    } else {
        Err(Error::OrderOutOfRange {
            alpha,
            t,
            node: None,
            trial_q: None,
        })
    }
}

/// Step-invariant factor h^{1−α} / [Γ(1−α)(1−α)] of one coefficient row.
///
/// As α → 1 the 1/Γ(1−α) factor vanishes like (1−α), which cancels the
/// 1/(1−α) blow-up of the integrated kernel; the product stays near
/// h^{1−α} and is formed explicitly so neither factor is used alone.
fn row_scale(h: f64, alpha: f64) -> Result<f64> {
    let beta = 1.0 - alpha;
    Ok((beta * h.ln()).exp() / (gamma(beta)? * beta))
}

/// (m+1)^β − m^β, evaluated as m^β · expm1(β·ln(1 + 1/m)) to avoid the
/// cancellation between two nearly equal powers when β is small.
#[inline]
fn kernel_increment(m: usize, beta: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let m = m as f64;
    (beta * m.ln()).exp() * (beta * (1.0 / m).ln_1p()).exp_m1()
}

/// Single weight c_r^n.
pub fn coefficient(n: usize, r: usize, h: f64, alpha: f64) -> Result<f64> {
    if r == 0 || r > n {
        return Err(Error::Index(format!(
            "coefficient index r = {r} outside 1..={n}"
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain {
            function: "coefficient",
            value: h,
            expected: "h > 0",
        });
    }
    check_order(alpha, n as f64 * h)?;
    Ok(row_scale(h, alpha)? * kernel_increment(n - r, 1.0 - alpha))
}

/// Weights c_1^n … c_n^n for one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    n: usize,
    alpha: f64,
    weights: Vec<f64>,
}

impl CoefficientRow {
    pub fn new(n: usize, h: f64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Index("coefficient row needs n >= 1".into()));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Domain {
                function: "coefficient_row",
                value: h,
                expected: "h > 0",
            });
        }
        check_order(alpha, n as f64 * h)?;
        let scale = row_scale(h, alpha)?;
        let beta = 1.0 - alpha;
        let weights = (1..=n)
            .map(|r| scale * kernel_increment(n - r, beta))
            .collect();
        Ok(Self { n, alpha, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Weights indexed from zero: `weights()[r - 1] = c_r^n`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// c_r^n with the convention c_0^n = 0.
    pub fn get(&self, r: usize) -> f64 {
        if r == 0 {
            0.0
        } else {
            self.weights[r - 1]
        }
    }

    pub fn last(&self) -> f64 {
        self.weights[self.n - 1]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Convenience wrapper around [`CoefficientRow::new`].
pub fn coefficient_row(n: usize, h: f64, alpha: f64) -> Result<CoefficientRow> {
    CoefficientRow::new(n, h, alpha)
}

/// Endpoint velocities u̇_0, u̇_1, … and their step means.
///
/// Means are derived on push and never set independently.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityHistory {
    endpoints: Vec<f64>,
    means: Vec<f64>,
}

impl VelocityHistory {
    pub fn new(initial_velocity: f64) -> Self {
        Self {
            endpoints: vec![initial_velocity],
            means: Vec::new(),
        }
    }

    pub fn with_capacity(initial_velocity: f64, steps: usize) -> Self {
        let mut endpoints = Vec::with_capacity(steps + 1);
        endpoints.push(initial_velocity);
        Self {
            endpoints,
            means: Vec::with_capacity(steps),
        }
    }

    /// Rebuild from nodal velocities u̇_0 … u̇_N.
    pub fn from_velocities(velocities: &[f64]) -> Result<Self> {
        let (&first, rest) = velocities
            .split_first()
            .ok_or_else(|| Error::Index("velocity history needs u̇_0".into()))?;
        let mut hist = Self::with_capacity(first, rest.len());
        for &v in rest {
            hist.push(v);
        }
        Ok(hist)
    }

    pub fn push(&mut self, velocity: f64) {
        let prev = *self.endpoints.last().expect("history holds u̇_0");
        self.endpoints.push(velocity);
        self.means.push(0.5 * (prev + velocity));
    }

    /// Number of completed steps.
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    /// u̇_r^m for r = 1..=len, indexed from zero.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// u̇_0 … u̇_len.
    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }

    pub fn mean(&self, r: usize) -> f64 {
        self.means[r - 1]
    }

    pub fn endpoint(&self, k: usize) -> f64 {
        self.endpoints[k]
    }

    pub fn truncate(&mut self, steps: usize) {
        self.means.truncate(steps);
        self.endpoints.truncate(steps + 1);
    }
}

/// Σ_{r=1}^{n} c_r^n u̇_r^m over the first `row.n()` history entries.
pub fn vo_derivative_at(row: &CoefficientRow, hist: &VelocityHistory) -> Result<f64> {
    if hist.len() < row.n() {
        return Err(Error::Index(format!(
            "history has {} steps, row needs {}",
            hist.len(),
            row.n()
        )));
    }
    Ok(dot(row.weights(), &hist.means()[..row.n()]))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Discrete derivative at nodes 1..=N from nodal velocities u̇_0 … u̇_N.
pub fn vo_derivative_series<A>(velocities: &[f64], alpha: A, grid: &Grid) -> Result<Vec<f64>>
where
    A: Fn(f64) -> f64,
{
    if velocities.len() != grid.steps() + 1 {
        return Err(Error::Index(format!(
            "expected {} velocity samples, got {}",
            grid.steps() + 1,
            velocities.len()
        )));
    }
    let hist = VelocityHistory::from_velocities(velocities)?;
    (1..=grid.steps())
        .map(|n| {
            let t = grid.time(n);
            let row = CoefficientRow::new(n, grid.h(), alpha(t)).map_err(|e| e.at_node(n))?;
            vo_derivative_at(&row, &hist)
        })
        .collect()
}

/// Direct evaluation of 1/Γ(1−α) ∫₀ᵗ (t−x)^{−α} u̇(x) dx.
///
/// The substitution s = (t−x)^{1−α} turns the weakly singular integral into
/// 1/Γ(2−α) ∫₀^{t^{1−α}} u̇(t − s^{1/(1−α)}) ds, which has a bounded
/// integrand and is handled by adaptive Gauss–Kronrod.
pub fn caputo_quadrature_oracle<F>(u_dot: F, alpha: f64, t: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_order(alpha, t)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain {
            function: "caputo_quadrature_oracle",
            value: t,
            expected: "t > 0",
        });
    }
    let beta = 1.0 - alpha;
    let norm = gamma(beta + 1.0)?;
    let upper = t.powf(beta);
    let inv_beta = 1.0 / beta;
    let integral = quadrature::integrate(
        |s| u_dot((t - s.powf(inv_beta)).max(0.0)),
        0.0,
        upper,
        tol.max(1e-14) * norm,
    )?;
    Ok(integral / norm)
}
