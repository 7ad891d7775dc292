use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("polynomial has empty support")]
    EmptySupport,
    #[error("support is degenerate: all exponents lie on one line")]
    DegenerateSupport,
    #[error("point outside (C*)^2: {0}")]
    Domain(String),
    #[error("invalid polynomial JSON: {0}")]
    Json(String),
    #[error("singular point encountered near log coordinates ({u}, {v})")]
    Singularity { u: f64, v: f64 },
    #[error("corrector failed to converge near log coordinates ({u}, {v})")]
    CorrectorFailed { u: f64, v: f64 },
    #[error("logarithmic Gauss direction undefined: both components vanish")]
    UndefinedDirection,
    #[error("degenerate resultant at theta = {theta}")]
    DegenerateResultant { theta: f64 },
    #[error("eigen-solver failed to converge on a degree {0} polynomial")]
    RootFinding(usize),
    #[error("angle lift ambiguous on arc {arc} at point {index}")]
    LiftAmbiguity { arc: usize, index: usize },
    #[error("too many degenerate fiber samples: {failed} of {total}")]
    ScanDegenerate { failed: usize, total: usize },
    #[error("arc end at ({u}, {v}) matches no side of the Newton polygon")]
    UnassignableEnd { u: f64, v: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
