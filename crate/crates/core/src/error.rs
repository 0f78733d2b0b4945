use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("space has no points")]
    EmptySpace,
    #[error("distance matrix is not a metric: {axiom} fails at {at:?}")]
    NonMetric { axiom: &'static str, at: Vec<usize> },
    #[error("invalid space spec: {0}")]
    InvalidSpace(String),
    #[error("operands live on different spaces")]
    SpaceMismatch,
    #[error("point index {index} out of range for a space of {n} points")]
    PointOutOfRange { index: usize, n: usize },
    #[error("{what} is not a probability measure (total mass {total})")]
    NotProbability { what: &'static str, total: String },
    #[error("negative mass {value} at point {index}")]
    NegativeMass { index: usize, value: String },
    #[error("mass vector has length {got}, space has {expected} points")]
    LengthMismatch { expected: usize, got: usize },
    #[error("first measure has mass {first} exceeding second measure mass {second}")]
    MassOrder { first: String, second: String },
    #[error("measure has zero total mass")]
    ZeroMass,
    #[error("{what} must satisfy {constraint}, got {value}")]
    InvalidParameter { what: &'static str, constraint: &'static str, value: String },
    #[error("subset enumeration over {n} points exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("malformed flow network: {0}")]
    MalformedNetwork(String),
    #[error("unknown hypothesis {0:?}")]
    UnknownHypothesis(String),
    #[error("invalid loss problem: {0}")]
    InvalidLossProblem(String),
    #[error("space is not midpoint-complete at the requested budget (pair {x}, {y})")]
    NotMidpointComplete { x: usize, y: usize },
    #[error("operation requires equal priors (T = 1), got T = {0}")]
    PriorNotEqual(String),
    #[error("unknown check {0:?}")]
    UnknownCheck(String),
    #[error("cannot parse {0:?} as a rational number")]
    ParseNumber(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("certificate violated: {0}")]
    Certificate(String),
}
