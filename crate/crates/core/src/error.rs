use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: argument {value} outside the domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    /// Order value outside the open interval (0, 1).
    #[error("order {alpha} outside (0, 1) at t = {t}{}{}", fmt_node(*.node), fmt_trial(*.trial_q))]
    OrderOutOfRange {
        alpha: f64,
        t: f64,
        node: Option<usize>,
        trial_q: Option<f64>,
    },

    #[error("index error: {0}")]
    Index(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    /// Singular or near-singular step system.
    #[error("step {step} failed: {reason}")]
    StepFailure { step: usize, reason: String },

    #[error(
        "step {step}: root solve did not converge in {iterations} iterations \
         (last q = {last_q}, residual = {residual})"
    )]
    RootSolve {
        step: usize,
        iterations: usize,
        last_q: f64,
        residual: f64,
    },

    #[error("adaptive quadrature exceeded depth {depth} on [{a}, {b}]")]
    QuadratureDepth { depth: usize, a: f64, b: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),
}

fn fmt_node(node: Option<usize>) -> String {
    node.map(|n| format!(" (node {n})")).unwrap_or_default()
}

fn fmt_trial(q: Option<f64>) -> String {
    q.map(|q| format!(" (trial q = {q})")).unwrap_or_default()
}

impl Error {
    /// Attach a node index to an order-domain error.
    pub(crate) fn at_node(self, n: usize) -> Self {
        match self {
            Error::OrderOutOfRange {
                alpha, t, trial_q, ..
            } => Error::OrderOutOfRange {
                alpha,
                t,
                node: Some(n),
                trial_q,
            },
            other => other,
        }
    }
}
