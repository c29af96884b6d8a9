//! Benchmark scenarios with exact solutions and manufactured forcings.
//!
//! | name        | problem                                                     |
//! |-------------|-------------------------------------------------------------|
//! | `ex1i`      | D^α t², α = (50t + 49)/100                                  |
//! | `ex1ii`     | D^α t², α = 1 − e^{−t}                                      |
//! | `ex2i`      | ü + D^α u + 25u = 0, α = 0.9999 − 1e-9·e^{−t} (≈ 1)         |
//! | `ex2ii`     | same, α = 1e-10(1 − e^{−t}) (≈ 0)                           |
//! | `ex2iii_*`  | same, α ∈ {≈1, 1 − e^{−t}, 0.8, 0.8(1 − e^{−t}), 0.5(1 − e^{−t})} |
//! | `ex3i/ii`   | ü + 0.4 D^α u + 4u = 0, α = d − k·tanh\|u̇\|                   |
//! | `ex3iii`    | same with u̇0 = 10, α = 1 − 0.5·tanh\|u̇\|                      |
//! | `ex4`       | Duffing ü + 0.2 D^α u + u + u³ = p, exact u = t²            |
//! | `ex5`       | variable coefficients, exact u = e^t                        |
//!
//! Limit scenarios (ex2i/ii, ex3i/ii) are checked against the integer-order
//! equations they degenerate to, solved in closed form here and cross-checked
//! with the [`crate::ode`] integrator.

use std::f64::consts::E;

use crate::derivative::{caputo_quadrature_oracle, Grid};
use crate::error::{Error, Result};
use crate::model::{AlphaSpec, OscillatorProblem, RestoringFn, TimeFn};
use crate::special::{gamma, regularized_lower_gamma};

/// Stand-in for α = 1, which is outside the admissible open interval.
pub const ORDER_NEAR_ONE: f64 = 1.0 - 1e-10;

/// Exact displacement with its first two derivatives.
#[derive(Debug, Clone)]
pub struct ExactMotion {
    pub u: TimeFn,
    pub udot: TimeFn,
    pub uddot: TimeFn,
}

#[derive(Debug, Clone)]
pub enum GroundTruth {
    /// Solves the fractional equation exactly (forcing built from it).
    Manufactured(ExactMotion),
    /// Solves the integer-order limit the scenario approximates.
    Limit(TimeFn),
    None,
}

impl GroundTruth {
    pub fn displacement(&self) -> Option<&TimeFn> {
        match self {
            GroundTruth::Manufactured(m) => Some(&m.u),
            GroundTruth::Limit(u) => Some(u),
            GroundTruth::None => None,
        }
    }
}

/// Derivative benchmark: a known function, its velocity, an order and the
/// exact variable-order derivative.
#[derive(Debug, Clone)]
pub struct DerivativeCase {
    pub u_dot: TimeFn,
    pub alpha: TimeFn,
    pub exact: TimeFn,
    pub grid: Grid,
}

#[derive(Debug, Clone)]
pub enum ScenarioKind {
    Derivative(DerivativeCase),
    Oscillator {
        problem: OscillatorProblem,
        truth: GroundTruth,
    },
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub kind: ScenarioKind,
}

impl Scenario {
    pub fn problem(&self) -> Option<&OscillatorProblem> {
        match &self.kind {
            ScenarioKind::Oscillator { problem, .. } => Some(problem),
            ScenarioKind::Derivative(_) => None,
        }
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        match &self.kind {
            ScenarioKind::Oscillator { truth, .. } => Some(truth),
            ScenarioKind::Derivative(_) => None,
        }
    }

    pub fn has_ground_truth(&self) -> bool {
        match &self.kind {
            ScenarioKind::Derivative(_) => true,
            ScenarioKind::Oscillator { truth, .. } => truth.displacement().is_some(),
        }
    }

    /// Residual of the continuous equation with the manufactured solution
    /// substituted, the fractional term evaluated by direct quadrature.
    pub fn manufactured_residual(&self, t: f64) -> Result<f64> {
        let (problem, exact) = match &self.kind {
            ScenarioKind::Oscillator {
                problem,
                truth: GroundTruth::Manufactured(m),
            } => (problem, m),
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} has no manufactured solution",
                    self.name
                )))
            }
        };
        let (u, v, acc) = (exact.u.eval(t), exact.udot.eval(t), exact.uddot.eval(t));
        let alpha = problem.alpha.eval(t, u, v)?;
        let dvo = caputo_quadrature_oracle(|x| exact.udot.eval(x), alpha, t, 1e-13)?;
        Ok(problem.a1.eval(t) * acc
            + problem.a2.eval(t) * dvo
            + problem.a3.eval(t) * u
            + problem.restoring(u, v)
            - problem.p.eval(t))
    }
}

/// Scenario identifiers with one-line descriptions.
pub const REGISTRY: &[(&str, &str)] = &[
    ("ex1i", "VO derivative of t^2, alpha = (50t+49)/100, [0,1]"),
    ("ex1ii", "VO derivative of t^2, alpha = 1 - exp(-t), [0,1]"),
    (
        "ex2i",
        "fractional oscillator, alpha ~ 1 (d=0.9999, k=1e-9), [0,5]",
    ),
    (
        "ex2ii",
        "fractional oscillator, alpha ~ 0 (d=k=1e-10), [0,5]",
    ),
    (
        "ex2iii_a",
        "fractional oscillator, alpha = 1 (proxy 1-1e-10), [0,5]",
    ),
    (
        "ex2iii_b",
        "fractional oscillator, alpha = 1 - exp(-t), [0,5]",
    ),
    ("ex2iii_c", "fractional oscillator, alpha = 0.8, [0,5]"),
    (
        "ex2iii_d",
        "fractional oscillator, alpha = 0.8(1 - exp(-t)), [0,5]",
    ),
    (
        "ex2iii_e",
        "fractional oscillator, alpha = 0.5(1 - exp(-t)), [0,5]",
    ),
    ("ex3i", "implicit order d - k tanh|v|, alpha ~ 1, [0,5]"),
    ("ex3ii", "implicit order d - k tanh|v|, alpha ~ 0, [0,5]"),
    ("ex3iii", "implicit order 1 - 0.5 tanh|v|, v0 = 10, [0,5]"),
    (
        "ex4",
        "Duffing oscillator, alpha = 1 - exp(-t), exact u = t^2, [0,1]",
    ),
    (
        "ex5",
        "variable coefficients, alpha = 1 - 0.5 exp(-t), exact u = e^t, [0,1]",
    ),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(n, _)| *n)
}

/// Build a registered scenario on a grid with step `h`.
pub fn scenario(name: &str, h: f64) -> Result<Scenario> {
    let (name, description) = REGISTRY
        .iter()
        .copied()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown scenario '{name}'")))?;
    let kind = match name {
        "ex1i" => example1(Example1::Linear, h)?,
        "ex1ii" => example1(Example1::Exponential, h)?,
        "ex2i" => example2(0.9999, 1e-9, h, Some(LimitVariant::NearOne))?,
        "ex2ii" => example2(1e-10, 1e-10, h, Some(LimitVariant::NearZero))?,
        "ex2iii_a" => example2_order(AlphaSpec::constant(ORDER_NEAR_ONE), h)?,
        "ex2iii_b" => example2_order(AlphaSpec::time_only(|t| 1.0 - (-t).exp()), h)?,
        "ex2iii_c" => example2_order(AlphaSpec::constant(0.8), h)?,
        "ex2iii_d" => example2_order(AlphaSpec::time_only(|t| 0.8 * (1.0 - (-t).exp())), h)?,
        "ex2iii_e" => example2_order(AlphaSpec::time_only(|t| 0.5 * (1.0 - (-t).exp())), h)?,
        "ex3i" => example3(0.9999, 1e-9, 0.0, 1.0, h, Some(LimitVariant::NearOne))?,
        "ex3ii" => example3(1e-10, 1e-10, 0.0, 1.0, h, Some(LimitVariant::NearZero))?,
        "ex3iii" => example3(1.0, 0.5, 0.0, 10.0, h, None)?,
        "ex4" => example4(h)?,
        "ex5" => example5(h)?,
        _ => unreachable!("registry and builder out of sync"),
    };
    Ok(Scenario {
        name,
        description,
        kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example1 {
    /// α = (50t + 49)/100
    Linear,
    /// α = 1 − e^{−t}
    Exponential,
}

/// Exact D^{α(t)} t² for the two order functions.
///
/// With constant-in-history α the derivative is 2t^{2−α}/Γ(3−α); both forms
/// below are that expression with α substituted.
pub fn example1_exact_vofd(variant: Example1, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain {
            function: "example1_exact_vofd",
            value: t,
            expected: "t > 0",
        });
    }
    match variant {
        Example1::Linear => {
            let alpha = (50.0 * t + 49.0) / 100.0;
            let exponent = (151.0 - 50.0 * t) / 100.0;
            Ok(20000.0 * t.powf(exponent)
                / ((50.0 * t - 151.0) * (50.0 * t - 51.0))
                / gamma(1.0 - alpha)?)
        }
        Example1::Exponential => {
            let alpha = 1.0 - (-t).exp();
            Ok(2.0 * (2.0 * t).exp() * t.powf((-t).exp() + 1.0)
                / (t.exp() + 1.0)
                / gamma(1.0 - alpha)?)
        }
    }
}

fn example1(variant: Example1, h: f64) -> Result<ScenarioKind> {
    let alpha = match variant {
        Example1::Linear => TimeFn::new(|t| (50.0 * t + 49.0) / 100.0),
        Example1::Exponential => TimeFn::new(|t: f64| 1.0 - (-t).exp()),
    };
    let exact = TimeFn::new(move |t| {
        if t > 0.0 {
            example1_exact_vofd(variant, t).expect("positive t")
        } else {
            0.0
        }
    });
    Ok(ScenarioKind::Derivative(DerivativeCase {
        u_dot: TimeFn::new(|t| 2.0 * t),
        alpha,
        exact,
        grid: Grid::new(1.0, h)?,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitVariant {
    /// α → 1: a1 ü + a2 u̇ + a3 u = 0.
    NearOne,
    /// α → 0: a1 ü + (a2 + a3) u = a2 u0.
    NearZero,
}

/// Constant-coefficient oscillator data for the limit solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub u0: f64,
    pub v0: f64,
}

impl OscillatorParams {
    /// a1 = 1, a2 = 2ξω, a3 = ω².
    pub fn from_damping(xi: f64, omega: f64, u0: f64, v0: f64) -> Self {
        Self {
            a1: 1.0,
            a2: 2.0 * xi * omega,
            a3: omega * omega,
            u0,
            v0,
        }
    }
}

/// Closed-form solution of the integer-order limit equations.
///
/// NearOne is the standard underdamped response
/// e^{−ξωt}[(u̇0 + ξω u0)/ω_D · sin ω_D t + u0 cos ω_D t].
/// NearZero is the shifted harmonic response around the static offset
/// a2 u0/(a2 + a3), matching both initial conditions.
pub fn example2_exact_limits(variant: LimitVariant, t: f64, p: &OscillatorParams) -> f64 {
    match variant {
        LimitVariant::NearOne => {
            let omega = (p.a3 / p.a1).sqrt();
            let xi = p.a2 / (2.0 * (p.a1 * p.a3).sqrt());
            let omega_d = omega * (1.0 - xi * xi).sqrt();
            (-xi * omega * t).exp()
                * ((p.v0 + xi * omega * p.u0) / omega_d * (omega_d * t).sin()
                    + p.u0 * (omega_d * t).cos())
        }
        LimitVariant::NearZero => {
            let k = p.a2 + p.a3;
            let omega = (k / p.a1).sqrt();
            let offset = p.a2 * p.u0 / k;
            offset + (p.u0 - offset) * (omega * t).cos() + p.v0 / omega * (omega * t).sin()
        }
    }
}

fn oscillator(
    params: OscillatorParams,
    alpha: AlphaSpec,
    t_total: f64,
    h: f64,
) -> Result<OscillatorProblem> {
    Ok(OscillatorProblem::new(
        params.a1,
        params.a2,
        params.a3,
        alpha,
        params.u0,
        params.v0,
        Grid::new(t_total, h)?,
    ))
}

fn limit_truth(variant: Option<LimitVariant>, params: OscillatorParams) -> GroundTruth {
    match variant {
        Some(v) => GroundTruth::Limit(TimeFn::new(move |t| example2_exact_limits(v, t, &params))),
        None => GroundTruth::None,
    }
}

pub fn example2_params() -> OscillatorParams {
    OscillatorParams::from_damping(0.1, 5.0, 1.0, 10.0)
}

fn example2(d: f64, k: f64, h: f64, limit: Option<LimitVariant>) -> Result<ScenarioKind> {
    let params = example2_params();
    let alpha = AlphaSpec::time_only(move |t| d - k * (-t).exp());
    Ok(ScenarioKind::Oscillator {
        problem: oscillator(params, alpha, 5.0, h)?,
        truth: limit_truth(limit, params),
    })
}

fn example2_order(alpha: AlphaSpec, h: f64) -> Result<ScenarioKind> {
    Ok(ScenarioKind::Oscillator {
        problem: oscillator(example2_params(), alpha, 5.0, h)?,
        truth: GroundTruth::None,
    })
}

pub fn example3_params(u0: f64, v0: f64) -> OscillatorParams {
    OscillatorParams::from_damping(0.1, 2.0, u0, v0)
}

/// α = d − k·tanh|u̇|.
pub fn tanh_velocity_order(d: f64, k: f64) -> AlphaSpec {
    AlphaSpec::state_dependent(move |_, _, v: f64| d - k * v.abs().tanh())
}

fn example3(
    d: f64,
    k: f64,
    u0: f64,
    v0: f64,
    h: f64,
    limit: Option<LimitVariant>,
) -> Result<ScenarioKind> {
    let params = example3_params(u0, v0);
    Ok(ScenarioKind::Oscillator {
        problem: oscillator(params, tanh_velocity_order(d, k), 5.0, h)?,
        truth: limit_truth(limit, params),
    })
}

/// The constant-order companion run of `ex3iii` (α = 1, via the proxy).
pub fn example3_case_iii_constant(h: f64) -> Result<OscillatorProblem> {
    oscillator(
        example3_params(0.0, 10.0),
        AlphaSpec::constant(ORDER_NEAR_ONE),
        5.0,
        h,
    )
}

/// p(t) = 2 + t² + t⁶ + 0.2·D^{1−e^{−t}} t².
pub fn example4_forcing(t: f64) -> f64 {
    let vo = if t > 0.0 {
        example1_exact_vofd(Example1::Exponential, t).expect("positive t")
    } else {
        0.0
    };
    2.0 + t * t + t.powi(6) + 0.2 * vo
}

fn example4(h: f64) -> Result<ScenarioKind> {
    let grid = Grid::new(1.0, h)?;
    let problem = OscillatorProblem::new(
        1.0,
        0.2,
        1.0,
        AlphaSpec::time_only(|t| 1.0 - (-t).exp()),
        0.0,
        0.0,
        grid,
    )
    .with_forcing(TimeFn::new(example4_forcing))
    .with_nonlinear(RestoringFn::new(|u, _| u * u * u));
    let exact = ExactMotion {
        u: TimeFn::new(|t| t * t),
        udot: TimeFn::new(|t| 2.0 * t),
        uddot: TimeFn::constant(2.0),
    };
    Ok(ScenarioKind::Oscillator {
        problem,
        truth: GroundTruth::Manufactured(exact),
    })
}

/// Order of the variable-coefficient scenario.
pub fn example5_order(t: f64) -> f64 {
    1.0 - 0.5 * (-t).exp()
}

/// p(t) = [(1 + t²) + 0.1 t^{1/2} P(1−α, t) + (10 + e^{−t})] e^t with P the
/// regularized lower incomplete gamma; D^α e^t = e^t P(1−α, t).
pub fn example5_forcing(t: f64) -> f64 {
    let s = 1.0 - example5_order(t);
    let ratio = regularized_lower_gamma(s, t).expect("s > 0, t >= 0");
    ((1.0 + t * t) + 0.1 * t.sqrt() * ratio + (10.0 + (-t).exp())) * t.exp()
}

fn example5(h: f64) -> Result<ScenarioKind> {
    let grid = Grid::new(1.0, h)?;
    let problem = OscillatorProblem::new(
        1.0,
        0.0,
        0.0,
        AlphaSpec::time_only(example5_order),
        1.0,
        1.0,
        grid,
    )
    .with_coefficients(
        TimeFn::new(|t| 1.0 + t * t),
        TimeFn::new(|t: f64| 0.1 * t.sqrt()),
        TimeFn::new(|t: f64| 10.0 + (-t).exp()),
    )
    .with_forcing(TimeFn::new(example5_forcing));
    let exact = ExactMotion {
        u: TimeFn::new(f64::exp),
        udot: TimeFn::new(f64::exp),
        uddot: TimeFn::new(f64::exp),
    };
    Ok(ScenarioKind::Oscillator {
        problem,
        truth: GroundTruth::Manufactured(exact),
    })
}

/// Value of the `ex1ii` derivative at t = 1: 2e²/((e + 1)Γ(e^{−1})).
pub fn example1_exponential_at_one() -> f64 {
    2.0 * E * E / ((E + 1.0) * gamma((-1f64).exp()).expect("positive"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode;

    #[test]
    fn registry_builds_every_scenario() {
        for name in names() {
            let s = scenario(name, 0.01).unwrap();
            assert_eq!(s.name, name);
        }
        assert!(scenario("ex9", 0.01).is_err());
    }

    #[test]
    fn example1_exact_matches_quadrature() {
        for t in [0.05, 0.2, 0.5, 0.77, 1.0] {
            let a_lin = (50.0 * t + 49.0) / 100.0;
            let q = caputo_quadrature_oracle(|x| 2.0 * x, a_lin, t, 1e-13).unwrap();
            let e = example1_exact_vofd(Example1::Linear, t).unwrap();
            assert!((q - e).abs() < 1e-8, "t = {t}: {q} vs {e}");

            let a_exp = 1.0 - (-t).exp();
            let q = caputo_quadrature_oracle(|x| 2.0 * x, a_exp, t, 1e-13).unwrap();
            let e = example1_exact_vofd(Example1::Exponential, t).unwrap();
            assert!((q - e).abs() < 1e-8, "t = {t}: {q} vs {e}");
        }
    }

    #[test]
    fn example1_endpoint_values() {
        let v = example1_exact_vofd(Example1::Exponential, 1.0).unwrap();
        assert!((v - example1_exponential_at_one()).abs() < 1e-14);
        assert!(example1_exact_vofd(Example1::Linear, 1e-9).unwrap().abs() < 1e-8);
        assert!(example1_exact_vofd(Example1::Linear, 0.0).is_err());
    }

    #[test]
    fn limit_solutions_satisfy_initial_conditions() {
        let p = example2_params();
        for v in [LimitVariant::NearOne, LimitVariant::NearZero] {
            assert!((example2_exact_limits(v, 0.0, &p) - 1.0).abs() < 1e-15);
            let d = 1e-6;
            let slope =
                (example2_exact_limits(v, d, &p) - example2_exact_limits(v, -d, &p)) / (2.0 * d);
            assert!((slope - 10.0).abs() < 1e-6);
        }
    }

    #[test]
    fn limit_solutions_match_ode_integration() {
        let samples: Vec<f64> = (1..=50).map(|i| i as f64 * 0.1).collect();
        for p in [example2_params(), example3_params(0.0, 1.0)] {
            let near_one =
                ode::linear_oscillator(p.a1, p.a2, p.a3, 0.0, p.u0, p.v0, &samples, 1e-13).unwrap();
            let near_zero = ode::linear_oscillator(
                p.a1,
                0.0,
                p.a2 + p.a3,
                p.a2 * p.u0,
                p.u0,
                p.v0,
                &samples,
                1e-13,
            )
            .unwrap();
            for (i, &t) in samples.iter().enumerate() {
                assert!(
                    (near_one[i] - example2_exact_limits(LimitVariant::NearOne, t, &p)).abs()
                        < 1e-10
                );
                assert!(
                    (near_zero[i] - example2_exact_limits(LimitVariant::NearZero, t, &p)).abs()
                        < 1e-10
                );
            }
        }
    }

    #[test]
    fn forcing_values() {
        assert_eq!(example4_forcing(0.0), 2.0);
        let expected = 4.0 + 0.2 * example1_exponential_at_one();
        assert!((example4_forcing(1.0) - expected).abs() < 1e-13);
        assert!((example5_forcing(0.0) - 12.0).abs() < 1e-15);
    }

    #[test]
    fn manufactured_residuals_vanish() {
        for name in ["ex4", "ex5"] {
            let s = scenario(name, 0.01).unwrap();
            for i in 1..=10 {
                let t = i as f64 * 0.1;
                let r = s.manufactured_residual(t).unwrap();
                assert!(r.abs() < 1e-8, "{name} t = {t}: {r}");
            }
        }
        assert!(scenario("ex2i", 0.01)
            .unwrap()
            .manufactured_residual(0.5)
            .is_err());
    }
}
