use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed instance: {0}")]
    Malformed(String),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown cost function {0:?}")]
    UnknownCostFunction(String),

    #[error("guard exceeded: {what} needs {needed}, limit is {limit}")]
    GuardExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("cost function {0} is not grouping at the required arity")]
    NotGrouping(String),

    #[error("invalid graph: {}", .0.join("; "))]
    InvalidGraph(Vec<String>),

    #[error("invalid clique: {0}")]
    InvalidClique(String),

    #[error("outside proof regime: {0}")]
    OutsideProofRegime(String),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}

/// Size limits for the exponential procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guard {
    /// Maximum number of states (shift vectors, DP cells, clique candidates).
    pub max_states: u128,
    /// Maximum number of warping-path tuples the brute-force mean oracle visits.
    pub max_paths: u128,
}

impl Default for Guard {
    fn default() -> Self {
        Guard {
            max_states: 50_000_000,
            max_paths: 200_000_000,
        }
    }
}

impl Guard {
    pub fn with_max_states(max_states: u128) -> Self {
        Guard {
            max_states,
            ..Guard::default()
        }
    }

    pub(crate) fn check_states(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.max_states {
            return Err(Error::GuardExceeded {
                what,
                needed,
                limit: self.max_states,
            });
        }
        Ok(())
    }

    pub(crate) fn check_paths(&self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.max_paths {
            return Err(Error::GuardExceeded {
                what,
                needed,
                limit: self.max_paths,
            });
        }
        Ok(())
    }
}
