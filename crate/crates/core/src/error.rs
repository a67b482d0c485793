use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad surface descriptor: {0}")]
    BadDescriptor(String),
    #[error("degenerate chart: {0}")]
    DegenerateChart(String),
    #[error("point ({0}, {1}) lies outside the parameter domain")]
    OutOfDomain(f64, f64),
    #[error("degenerate image surface: |d1 y x d2 y| = {0:e} below threshold")]
    DegenerateImage(f64),
    #[error("not an isometry: {0}")]
    NotAnIsometry(String),
    #[error("requested expansion order {requested} exceeds 2N = {max}")]
    OrderTooHigh { requested: usize, max: usize },
    #[error("inconclusive fit: log-log residual {0:e}")]
    InconclusiveFit(f64),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("surface is not a plate")]
    NotAPlate,
    #[error("tubular neighbourhood violated: h * max|kappa| = {0}")]
    TubularViolation(f64),
    #[error("hierarchy fails the order-{order} isometry constraint (|A_{index}| = {defect:e})")]
    InsufficientOrder {
        order: usize,
        index: usize,
        defect: f64,
    },
    #[error("surface is not elliptic")]
    NotElliptic,
    #[error("Newton iteration diverged after {iterations} steps (defects: {trace:?})")]
    NewtonDiverged { iterations: usize, trace: Vec<f64> },
    #[error("beta = {0} is outside the regime beta > 2")]
    OutOfRegime(f64),
    #[error("alpha = {0} is negative")]
    NegativeAlpha(f64),
    #[error("energies at machine zero; exponent fit is degenerate")]
    FitDegenerate,
    #[error("recovery-sequence constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Solver-type failures map to exit code 2 in the CLI; everything else is a
    /// validation error.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure(_)
                | Error::NewtonDiverged { .. }
                | Error::InconclusiveFit(_)
                | Error::FitDegenerate
        )
    }
}
