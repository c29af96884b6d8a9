use vofde::derivative::VelocityHistory;
use vofde::implicit::{self, solve_step_nonlinear};
use vofde::model::{initial_acceleration, StepState};
use vofde::reference::{self, example3_case_iii_constant, GroundTruth, ScenarioKind};
use vofde::{caputo_quadrature_oracle, explicit, ExplicitOptions, RootSolveConfig};

#[test]
fn exact_derivatives_agree_with_quadrature() {
    for name in ["ex1i", "ex1ii"] {
        let s = reference::scenario(name, 1e-2).unwrap();
        let ScenarioKind::Derivative(case) = s.kind else {
            panic!()
        };
        for i in 1..=40 {
            let t = i as f64 / 40.0;
            let q = caputo_quadrature_oracle(|x| case.u_dot.eval(x), case.alpha.eval(t), t, 1e-13)
                .unwrap();
            assert!((q - case.exact.eval(t)).abs() < 1e-8, "{name} at {t}");
        }
    }
}

#[test]
fn manufactured_scenarios_are_consistent() {
    for name in reference::names() {
        let s = reference::scenario(name, 1e-2).unwrap();
        if let Some(GroundTruth::Manufactured(_)) = s.truth() {
            for i in 1..=20 {
                let t = i as f64 / 20.0;
                assert!(
                    s.manufactured_residual(t).unwrap().abs() <= 1e-8,
                    "{name} at {t}"
                );
            }
        }
    }
}

#[test]
fn duffing_first_step_matches_exact_acceleration() {
    let s = reference::scenario("ex4", 1e-3).unwrap();
    let p = s.problem().unwrap();
    let q0 = initial_acceleration(p).unwrap();
    assert_eq!(q0, 2.0);
    let out = solve_step_nonlinear(
        1,
        p,
        StepState::new(q0, 0.0, 0.0),
        &VelocityHistory::new(0.0),
        &RootSolveConfig::default(),
    )
    .unwrap();
    assert!((out.state.q - 2.0).abs() < 1e-3);
}

#[test]
fn velocity_dependent_order_changes_the_response() {
    let s = reference::scenario("ex3iii", 1e-3).unwrap();
    let vo = implicit::solve(s.problem().unwrap(), &RootSolveConfig::default()).unwrap();
    let constant = explicit::solve(
        &example3_case_iii_constant(1e-3).unwrap(),
        ExplicitOptions::default(),
    )
    .unwrap();
    assert_eq!(vo.len(), constant.len());
    let gap =
        vo.u.iter()
            .zip(&constant.u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    assert!(gap > 0.1 * constant.peak_abs_u(), "gap {gap}");
    // 1 − 0.5 tanh|u̇| stays inside (0.5, 1)
    assert!(vo.alpha_used[1..].iter().all(|&a| a > 0.5 && a < 1.0));
}

#[test]
fn root_solves_take_few_iterations() {
    for name in ["ex3i", "ex3ii", "ex3iii", "ex4"] {
        let s = reference::scenario(name, 1e-3).unwrap();
        let trace = implicit::solve(s.problem().unwrap(), &RootSolveConfig::default()).unwrap();
        let mut its = trace.iterations.unwrap()[1..].to_vec();
        its.sort_unstable();
        assert!(
            its[its.len() / 2] <= 5,
            "{name}: median {}",
            its[its.len() / 2]
        );
    }
}
