use thiserror::Error;

use crate::model::Allocation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("malformed profile: {0}")]
    MalformedProfile(String),
    #[error("inconsistent utilities for agent {agent}: {detail}")]
    InconsistentUtilities { agent: usize, detail: String },
    #[error("invalid capacity: {0}")]
    InvalidCapacity(String),
    #[error("no complete feasible allocation exists under the capacity constraints")]
    InfeasibleCapacities,
    #[error("allocation does not fit the instance: {0}")]
    AllocationMismatch(String),
    #[error("allocation is not complete")]
    IncompleteAllocation,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("no circulation satisfies the arc lower bounds")]
    Infeasible,
    #[error("arc {arc} has lower bound above upper bound")]
    BadArc { arc: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WelfareError {
    #[error("partial allocation has no feasible completion")]
    NoFeasibleCompletion,
    #[error("branch-and-bound budget of {budget} nodes exhausted")]
    BudgetExceeded {
        budget: u64,
        /// Best allocation found before the budget ran out, if any.
        incumbent: Option<Box<Allocation>>,
    },
    #[error("welfare threshold {threshold} exceeds the maximum utilitarian welfare {optimum}")]
    UnsatisfiableThreshold { threshold: f64, optimum: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FairnessError {
    #[error("necessary-envy checks need single-signed utilities; {0}")]
    UnsupportedSignMode(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrrError {
    #[error("goal oracle budget exceeded ({budget} nodes)")]
    GoalOracleBudgetExceeded { budget: u64 },
    #[error("share weights must be positive and one per agent")]
    BadShareWeights,
    #[error(transparent)]
    Welfare(WelfareError),
}

impl From<WelfareError> for CrrError {
    fn from(err: WelfareError) -> Self {
        match err {
            WelfareError::BudgetExceeded { budget, .. } => {
                CrrError::GoalOracleBudgetExceeded { budget }
            }
            other => CrrError::Welfare(other),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown alternative {alternative} on line {line}")]
    UnknownAlternative { line: usize, alternative: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IoError {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
