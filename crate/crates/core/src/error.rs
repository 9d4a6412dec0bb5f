use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid branch divisor: {0}")]
    InvalidDivisor(String),

    #[error("path node {point} lies within {radius:e} of branch point {branch}")]
    PathTooCloseToBranchPoint {
        point: String,
        branch: String,
        radius: f64,
    },

    #[error("start value w = {w} does not square to the sextic at the path start (rel. error {rel_err:e})")]
    InconsistentStart { w: String, rel_err: f64 },

    #[error("normalization system is degenerate (condition number {cond:e})")]
    DegenerateSystem { cond: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("no slit-avoiding path to {0}")]
    PathRoutingFailure(String),

    #[error("trajectory stalled near {0}")]
    TrajectoryStalled(String),

    #[error("weights out of range: {0}")]
    WeightOutOfRange(String),

    #[error("iterates left the {expected} cell: {detail}")]
    WrongCell { expected: String, detail: String },

    #[error("discriminant does not change sign on the search interval [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("sheet convention violated: {0}")]
    BranchInconsistency(String),

    #[error("differential evaluated at its pole {0}")]
    PoleEvaluation(String),

    #[error("residue and quadrature disagree for {quantity}: relative difference {rel:e}")]
    ResidueMismatch { quantity: String, rel: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl Error {
    /// Errors that signal an infeasible or unsupported request rather than a
    /// numerical breakdown.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::WeightOutOfRange(_) | Error::Unsupported(_) | Error::WrongCell { .. }
        )
    }
}
