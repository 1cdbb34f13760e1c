use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("linear system is infeasible")]
    Infeasible,
    #[error("columns are linearly independent, no circuit exists")]
    NoCircuit,
    #[error("enumeration budget exceeded: {candidates} candidate supports exceed budget {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },
    #[error("zero step: coordinate {index} blocks immediately")]
    ZeroStep { index: usize },
    #[error("direction has no negative entry, step is unbounded")]
    Unbounded,
    #[error("point is not a vertex: {0}")]
    NotAVertex(String),
    #[error("polyhedron is empty")]
    Empty,
    #[error("objective is unbounded below")]
    UnboundedLp,
    #[error("need at least 2 independent equality rows, got {0}")]
    TooFewRows(usize),
    #[error("start point is infeasible")]
    StartInfeasible,
    #[error("invalid target: {0}")]
    TargetInvalid(String),
    #[error("objective is not dual feasible for the target basis: {0}")]
    NotDualFeasible(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no walk found within the search budget")]
    NotFoundWithinBudget,
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::InternalInvariantViolation(msg.into())
}
