//! Command-line front end.
//!
//! `vofde list`, `vofde scenario --name ex4 --h 1e-3 --out dir`, or
//! `vofde run --config run.json`. Outputs go into the `out_path` directory:
//! `trace.csv`, `stability.json` and `convergence.csv`.
//!
//! A config file is one JSON document:
//!
//! ```json
//! {
//!   "problem": {
//!     "a1": 1.0, "a2": 1.0, "a3": 25.0,
//!     "order": {"form": "exp_decay", "params": {"d": 0.8, "k": 0.8}},
//!     "u0": 1.0, "v0": 10.0, "t_total": 5.0
//!   },
//!   "h": 0.001,
//!   "outputs": ["trace", "stability"],
//!   "out_path": "out"
//! }
//! ```
//!
//! or `"scenario": "ex4"` in place of `"problem"`. Functions are either a
//! bare number or `{"form": ..., "params": {...}}` with forms `constant`,
//! `polynomial`, `exp_decay`, `power`, `tanh_abs_velocity` (orders only) and
//! `scenario` (a field of a registered scenario).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::derivative::{vo_derivative_series, Grid};
use crate::error::Error;
use crate::explicit::{self, ExplicitOptions};
use crate::implicit::{self, RootSolveConfig};
use crate::model::{AlphaSpec, OscillatorProblem, RestoringFn, SolutionTrace, TimeFn};
use crate::reference::{self, DerivativeCase, Scenario, ScenarioKind};
use crate::stability::{stability_report, stability_report_along, StabilityReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_STABILITY_IMPLICIT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "vofde",
    version,
    about = "Variable-order fractional oscillator solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a registered scenario.
    Scenario {
        #[arg(long)]
        name: String,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        stability: bool,
        /// Comma-separated step sizes for a convergence table.
        #[arg(long, value_delimiter = ',')]
        convergence: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the scenario registry.
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Trace,
    Stability,
    Convergence,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FnSpec {
    Value(f64),
    Form(Form),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(
    tag = "form",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum Form {
    Constant {
        value: f64,
    },
    /// Σ coeffs[i] tⁱ
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// d − k e^{−rate·t}
    ExpDecay {
        d: f64,
        k: f64,
        #[serde(default = "one")]
        rate: f64,
    },
    /// c t^p
    Power {
        c: f64,
        p: f64,
    },
    /// d − k tanh|u̇|
    TanhAbsVelocity {
        d: f64,
        k: f64,
    },
    /// A field (`a1`, `a2`, `a3`, `forcing` or `order`) of a registered
    /// scenario.
    Scenario {
        name: String,
        field: String,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(
    tag = "form",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum NonlinearSpec {
    /// k u³
    Cubic {
        k: f64,
    },
    Scenario {
        name: String,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    pub a1: FnSpec,
    pub a2: FnSpec,
    pub a3: FnSpec,
    #[serde(default)]
    pub forcing: Option<FnSpec>,
    pub order: FnSpec,
    #[serde(default)]
    pub nonlinear: Option<NonlinearSpec>,
    pub u0: f64,
    pub v0: f64,
    pub t_total: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub problem: Option<InlineProblem>,
    pub h: f64,
    pub outputs: BTreeSet<Output>,
    #[serde(default)]
    pub convergence_steps: Vec<f64>,
    pub out_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn from_lib(e: Error) -> CliError {
    match e {
        Error::Config(m) => CliError::Config(m),
        other => CliError::Solver(other.to_string()),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub stability: Option<StabilityReport>,
    pub exit_code: i32,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(CliError::Config(format!(
                "h must be positive, got {}",
                self.h
            )));
        }
        match (&self.scenario, &self.problem) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either scenario or problem, not both".into(),
                ))
            }
            (None, None) => return Err(CliError::Config("missing scenario or problem".into())),
            (None, Some(p)) if !(p.t_total.is_finite() && p.t_total > 0.0) => {
                return Err(CliError::Config(format!(
                    "t_total must be positive, got {}",
                    p.t_total
                )))
            }
            _ => {}
        }
        if self.outputs.is_empty() {
            return Err(CliError::Config("no outputs requested".into()));
        }
        if self.outputs.contains(&Output::Convergence) {
            if self.convergence_steps.is_empty() {
                return Err(CliError::Config(
                    "convergence requested without convergence_steps".into(),
                ));
            }
            if let Some(h) = self
                .convergence_steps
                .iter()
                .find(|h| !(h.is_finite() && **h > 0.0))
            {
                return Err(CliError::Config(format!(
                    "convergence step {h} is not positive"
                )));
            }
        }
        Ok(())
    }
}

fn time_fn(spec: &FnSpec, what: &str) -> Result<TimeFn, CliError> {
    let form = match spec {
        FnSpec::Value(v) => return Ok(TimeFn::constant(*v)),
        FnSpec::Form(f) => f,
    };
    Ok(match form.clone() {
        Form::Constant { value } => TimeFn::constant(value),
        Form::Polynomial { coeffs } => {
            if coeffs.is_empty() {
                return Err(CliError::Config(format!("{what}: empty polynomial")));
            }
            TimeFn::new(move |t| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c))
        }
        Form::ExpDecay { d, k, rate } => TimeFn::new(move |t: f64| d - k * (-rate * t).exp()),
        Form::Power { c, p } => TimeFn::new(move |t: f64| c * t.powf(p)),
        Form::TanhAbsVelocity { .. } => {
            return Err(CliError::Config(format!(
                "{what}: tanh_abs_velocity is only allowed for the order"
            )))
        }
        Form::Scenario { name, field } => {
            let p = scenario_problem(&name)?;
            match field.as_str() {
                "a1" => p.a1,
                "a2" => p.a2,
                "a3" => p.a3,
                "forcing" => p.p,
                other => {
                    return Err(CliError::Config(format!(
                        "{what}: scenario field '{other}' is not a time function"
                    )))
                }
            }
        }
    })
}

fn order_spec(spec: &FnSpec) -> Result<AlphaSpec, CliError> {
    match spec {
        FnSpec::Value(v) => Ok(AlphaSpec::constant(*v)),
        FnSpec::Form(Form::TanhAbsVelocity { d, k }) => Ok(reference::tanh_velocity_order(*d, *k)),
        FnSpec::Form(Form::Scenario { name, field }) if field == "order" => {
            Ok(scenario_problem(name)?.alpha)
        }
        other => {
            let f = time_fn(other, "order")?;
            Ok(AlphaSpec::time_only(move |t| f.eval(t)))
        }
    }
}

fn scenario_problem(name: &str) -> Result<OscillatorProblem, CliError> {
    // the step is irrelevant; only the data functions are borrowed
    let s = reference::scenario(name, 0.1).map_err(from_lib)?;
    s.problem()
        .cloned()
        .ok_or_else(|| CliError::Config(format!("scenario '{name}' is not an oscillator")))
}

impl InlineProblem {
    pub fn build(&self, h: f64) -> Result<OscillatorProblem, CliError> {
        let grid = Grid::new(self.t_total, h).map_err(from_lib)?;
        let mut p = OscillatorProblem::new(
            0.0,
            0.0,
            0.0,
            order_spec(&self.order)?,
            self.u0,
            self.v0,
            grid,
        )
        .with_coefficients(
            time_fn(&self.a1, "a1")?,
            time_fn(&self.a2, "a2")?,
            time_fn(&self.a3, "a3")?,
        );
        if let Some(f) = &self.forcing {
            p = p.with_forcing(time_fn(f, "forcing")?);
        }
        match &self.nonlinear {
            None => {}
            Some(NonlinearSpec::Cubic { k }) => {
                let k = *k;
                p = p.with_nonlinear(RestoringFn::new(move |u, _| k * u * u * u));
            }
            Some(NonlinearSpec::Scenario { name }) => {
                let f = scenario_problem(name)?.nonlinear.ok_or_else(|| {
                    CliError::Config(format!("scenario '{name}' has no nonlinear term"))
                })?;
                p = p.with_nonlinear(f);
            }
        }
        Ok(p)
    }
}

/// Pick the linear step system when it applies, the root solve otherwise.
pub fn solve_problem(
    problem: &OscillatorProblem,
) -> Result<SolutionTrace, crate::model::SolveFailure> {
    if problem.is_linear_explicit() {
        explicit::solve(problem, ExplicitOptions::default())
    } else {
        implicit::solve(problem, &RootSolveConfig::default())
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV of the oscillator trace; `rho` is indexed by node with node 0 blank.
pub fn trace_csv(trace: &SolutionTrace, rho: Option<&[f64]>) -> String {
    let mut out = String::from("t,u,udot,uddot,alpha");
    if rho.is_some() {
        out.push_str(",rho");
    }
    out.push('\n');
    for n in 0..trace.len() {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            fmt_num(trace.t[n]),
            fmt_num(trace.u[n]),
            fmt_num(trace.udot[n]),
            fmt_num(trace.uddot[n]),
            fmt_num(trace.alpha_used[n])
        );
        if let Some(r) = rho {
            out.push(',');
            if n > 0 {
                if let Some(v) = r.get(n - 1) {
                    out.push_str(&fmt_num(*v));
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Discrete and exact derivative of a derivative benchmark at every node.
pub fn derivative_table(case: &DerivativeCase) -> Result<Vec<(f64, f64, f64, f64)>, CliError> {
    let times = case.grid.times();
    let velocities: Vec<f64> = times.iter().map(|&t| case.u_dot.eval(t)).collect();
    let series =
        vo_derivative_series(&velocities, |t| case.alpha.eval(t), &case.grid).map_err(from_lib)?;
    let mut rows = vec![(0.0, 0.0, 0.0, case.alpha.eval(0.0))];
    for (n, d) in series.into_iter().enumerate() {
        let t = times[n + 1];
        rows.push((t, d, case.exact.eval(t), case.alpha.eval(t)));
    }
    Ok(rows)
}

fn derivative_csv(rows: &[(f64, f64, f64, f64)]) -> String {
    let mut out = String::from("t,vofd,exact,alpha\n");
    for &(t, d, e, a) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num(t),
            fmt_num(d),
            fmt_num(e),
            fmt_num(a)
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub steps: usize,
    pub max_abs_error: f64,
    /// error of the previous row over this row's error.
    pub observed_ratio: Option<f64>,
}

/// Max nodal error against the scenario's ground truth for each step size.
pub fn convergence_study(name: &str, steps: &[f64]) -> Result<Vec<ConvergenceRow>, CliError> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(steps.len());
    for &h in steps {
        let s = reference::scenario(name, h).map_err(from_lib)?;
        let (n, err) = scenario_error(&s)?;
        let observed_ratio = rows.last().map(|prev| prev.max_abs_error / err);
        rows.push(ConvergenceRow {
            h,
            steps: n,
            max_abs_error: err,
            observed_ratio,
        });
    }
    Ok(rows)
}

fn scenario_error(s: &Scenario) -> Result<(usize, f64), CliError> {
    match &s.kind {
        ScenarioKind::Derivative(case) => {
            let rows = derivative_table(case)?;
            let err = rows
                .iter()
                .skip(1)
                .map(|r| (r.1 - r.2).abs())
                .fold(0.0, f64::max);
            Ok((case.grid.steps(), err))
        }
        ScenarioKind::Oscillator { problem, truth } => {
            let exact = truth.displacement().ok_or_else(|| {
                CliError::Config(format!("scenario '{}' has no ground truth", s.name))
            })?;
            let trace =
                solve_problem(problem).map_err(|f| CliError::Solver(f.source.to_string()))?;
            let err = trace
                .t
                .iter()
                .zip(&trace.u)
                .map(|(&t, &u)| (u - exact.eval(t)).abs())
                .fold(0.0, f64::max);
            Ok((problem.grid.steps(), err))
        }
    }
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("h,N,max_abs_error,observed_ratio\n");
    for r in rows {
        let ratio = r.observed_ratio.map(fmt_num).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num(r.h),
            r.steps,
            fmt_num(r.max_abs_error),
            ratio
        );
    }
    out
}

fn write_file(
    dir: &Path,
    name: &str,
    contents: &str,
    summary: &mut RunSummary,
) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    summary.files.push(path);
    Ok(())
}

/// Execute a validated configuration and write its outputs.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cfg.out_path.display())))?;
    let mut summary = RunSummary::default();

    let (scenario, problem) = match (&cfg.scenario, &cfg.problem) {
        (Some(name), _) => {
            let s = reference::scenario(name, cfg.h).map_err(from_lib)?;
            let p = s.problem().cloned();
            (Some(s), p)
        }
        (None, Some(inline)) => (None, Some(inline.build(cfg.h)?)),
        (None, None) => unreachable!("validated"),
    };

    if cfg.outputs.contains(&Output::Convergence) {
        let name = scenario.as_ref().map(|s| s.name).ok_or_else(|| {
            CliError::Config("convergence needs a scenario with ground truth".into())
        })?;
        let rows = convergence_study(name, &cfg.convergence_steps)?;
        write_file(
            &cfg.out_path,
            "convergence.csv",
            &convergence_csv(&rows),
            &mut summary,
        )?;
    }

    let want_trace = cfg.outputs.contains(&Output::Trace);
    let want_stability = cfg.outputs.contains(&Output::Stability);
    let Some(problem) = problem else {
        // derivative benchmark
        if want_stability {
            return Err(CliError::Config(
                "stability applies to oscillator problems only".into(),
            ));
        }
        if want_trace {
            if let Some(ScenarioKind::Derivative(case)) = scenario.as_ref().map(|s| &s.kind) {
                let rows = derivative_table(case)?;
                write_file(
                    &cfg.out_path,
                    "trace.csv",
                    &derivative_csv(&rows),
                    &mut summary,
                )?;
            }
        }
        return Ok(summary);
    };

    if !(want_trace || want_stability) {
        return Ok(summary);
    }
    let (trace, failure) = match solve_problem(&problem) {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.source)),
    };

    let mut rho = None;
    if want_stability && failure.is_none() {
        let report = if problem.alpha.is_time_only() {
            stability_report(&problem)
        } else {
            stability_report_along(&problem, &trace)
        }
        .map_err(from_lib)?;
        if report.trace_conditional {
            summary.warnings.push(
                "order depends on the state: stability report is conditional on the computed trace"
                    .into(),
            );
            summary.exit_code = EXIT_STABILITY_IMPLICIT;
        }
        if !report.satisfied {
            summary.warnings.push(format!(
                "spectral radius exceeds 1 (max rho = {:e})",
                report.max_rho
            ));
        }
        let json = serde_json::to_string_pretty(&report).map_err(config_err)?;
        write_file(&cfg.out_path, "stability.json", &json, &mut summary)?;
        rho = Some(report.rho.clone());
        summary.stability = Some(report);
    }
    if want_trace {
        write_file(
            &cfg.out_path,
            "trace.csv",
            &trace_csv(&trace, rho.as_deref()),
            &mut summary,
        )?;
    }
    if let Some(e) = failure {
        return Err(CliError::Solver(format!(
            "{e}; partial trace with {} nodes written",
            trace.len()
        )));
    }
    Ok(summary)
}

fn list() -> String {
    reference::REGISTRY
        .iter()
        .map(|(n, d)| format!("{n:<10} {d}\n"))
        .collect()
}

/// Parse arguments, run, print diagnostics and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match cli.command {
        Command::List => {
            print!("{}", list());
            return EXIT_OK;
        }
        Command::Run { config } => fs::read_to_string(&config)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))
            .and_then(|text| RunConfig::from_json(&text)),
        Command::Scenario {
            name,
            h,
            stability,
            convergence,
            out,
        } => {
            let mut outputs = BTreeSet::from([Output::Trace]);
            if stability {
                outputs.insert(Output::Stability);
            }
            if convergence.is_some() {
                outputs.insert(Output::Convergence);
            }
            Ok(RunConfig {
                scenario: Some(name),
                problem: None,
                h,
                outputs,
                convergence_steps: convergence.unwrap_or_default(),
                out_path: out,
            })
        }
    };
    match cfg.and_then(|c| run(&c)) {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for f in &summary.files {
                println!("{}", f.display());
            }
            summary.exit_code
        }
        Err(e) => {
            eprintln!("vofde: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inline_problem() {
        let text = r#"{
            "problem": {
                "a1": {"form": "polynomial", "params": {"coeffs": [1, 0, 1]}},
                "a2": {"form": "power", "params": {"c": 0.1, "p": 0.5}},
                "a3": {"form": "exp_decay", "params": {"d": 10, "k": -1}},
                "forcing": {"form": "scenario", "params": {"name": "ex5", "field": "forcing"}},
                "order": {"form": "exp_decay", "params": {"d": 1, "k": 0.5}},
                "u0": 1, "v0": 1, "t_total": 1
            },
            "h": 0.1,
            "outputs": ["trace"],
            "out_path": "unused"
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let p = cfg.problem.unwrap().build(cfg.h).unwrap();
        assert_eq!(p.grid.steps(), 10);
        assert!((p.a1.eval(2.0) - 5.0).abs() < 1e-15);
        assert!((p.a2.eval(4.0) - 0.2).abs() < 1e-15);
        assert!((p.a3.eval(0.0) - 11.0).abs() < 1e-15);
        assert!((p.alpha.at_time(0.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.p.eval(0.0), 12.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"scenario": "ex4", "h": 0, "outputs": ["trace"], "out_path": "x"}"#,
            r#"{"scenario": "ex4", "h": 0.1, "outputs": ["convergence"], "out_path": "x"}"#,
            r#"{"h": 0.1, "outputs": ["trace"], "out_path": "x"}"#,
            r#"{"scenario": "ex4", "h": 0.1, "outputs": ["plot"], "out_path": "x"}"#,
            r#"{"scenario": "ex4", "h": 0.1, "outputs": [], "out_path": "x"}"#,
            "not json",
        ];
        for text in bad {
            assert!(
                matches!(RunConfig::from_json(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn tanh_form_only_for_order() {
        let spec = FnSpec::Form(Form::TanhAbsVelocity { d: 1.0, k: 0.5 });
        assert!(time_fn(&spec, "a1").is_err());
        assert!(!order_spec(&spec).unwrap().is_time_only());
    }

    #[test]
    fn csv_has_full_precision() {
        let s = reference::scenario("ex2iii_c", 0.5).unwrap();
        let trace = solve_problem(s.problem().unwrap()).unwrap();
        let csv = trace_csv(&trace, None);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,u,udot,uddot,alpha"));
        let row: Vec<f64> = lines
            .nth(1)
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(row[1], trace.u[1]);
        assert_eq!(csv.lines().count(), trace.len() + 1);
    }

    #[test]
    fn convergence_ratios() {
        let rows = convergence_study("ex1ii", &[0.004, 0.002, 0.001]).unwrap();
        assert_eq!(rows[0].observed_ratio, None);
        assert!(rows
            .windows(2)
            .all(|w| w[1].max_abs_error < w[0].max_abs_error));
        assert_eq!(rows[2].steps, 1000);
        assert!(convergence_study("ex2iii_c", &[0.01]).is_err());
    }
}
