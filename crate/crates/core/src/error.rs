use thiserror::Error;

pub type Result<T> = std::result::Result<T, LfppError>;

#[derive(Debug, Error)]
pub enum LfppError {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("mollification scale {epsilon} is finer than two lattice cells (spacing {spacing})")]
    MollificationTooFine { epsilon: f64, spacing: f64 },
    #[error("region resolves to no lattice sites")]
    EmptyRegion,
    #[error("site {0:?} is outside the grid mask")]
    OutOfRegion((usize, usize)),
    #[error("annulus is too thin: width {width} < {min}")]
    DegenerateAnnulus { width: f64, min: f64 },
    #[error("{0} trials is not enough for a confidence interval (need at least 20)")]
    InsufficientTrials(usize),
    #[error("degenerate design: {0}")]
    DegenerateFit(String),
    #[error("mollified values do not cover the requested region")]
    NotCovered,
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
