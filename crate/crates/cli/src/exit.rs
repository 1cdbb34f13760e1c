//! Stable exit codes.
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | file could not be read or written         |
//! | 2    | usage error                               |
//! | 3    | malformed instance, trace or vector       |
//! | 4    | `Ax = b` is inconsistent                  |
//! | 5    | polyhedron is empty                       |
//! | 6    | objective unbounded                       |
//! | 7    | verification failed                       |
//! | 8    | enumeration budget exceeded               |
//! | 9    | oracle found no walk within its budgets   |
//! | 10   | internal invariant violated               |
//! | 11   | start or target invalid                   |
//! | 12   | objective not dual feasible               |

use std::fmt;
use std::path::PathBuf;

use circuitwalk::Error;

#[derive(Debug)]
pub enum CliError {
    Io(PathBuf, std::io::Error),
    Usage(String),
    Library(Error),
    VerificationFailed(String),
    /// A benchmark trial failed; carries a command line reproducing it.
    Trial(Box<CliError>, String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io(..) => 1,
            CliError::Usage(_) => 2,
            CliError::VerificationFailed(_) => 7,
            CliError::Trial(inner, _) => inner.code(),
            CliError::Library(error) => match error {
                Error::Parse(_) | Error::Dimension(_) | Error::TooFewRows(_) => 3,
                Error::Infeasible => 4,
                Error::Empty => 5,
                Error::UnboundedLp => 6,
                Error::BudgetExceeded { .. } => 8,
                Error::NotFoundWithinBudget => 9,
                Error::StartInfeasible | Error::TargetInvalid(_) | Error::NotAVertex(_) => 11,
                Error::NotDualFeasible(_) => 12,
                Error::InternalInvariantViolation(_)
                | Error::NoCircuit
                | Error::ZeroStep { .. }
                | Error::Unbounded => 10,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(path, error) => write!(f, "{}: {error}", path.display()),
            CliError::Usage(message) => write!(f, "{message}"),
            CliError::Library(error) => write!(f, "{error}"),
            CliError::VerificationFailed(message) => write!(f, "verification failed: {message}"),
            CliError::Trial(inner, repro) => write!(f, "{inner}\nreproduce with: {repro}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        CliError::Library(error)
    }
}
