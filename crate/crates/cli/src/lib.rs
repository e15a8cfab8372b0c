//! Command-line front end for the `vine_nav` simulator and planner.

pub mod commands;
pub mod files;
pub mod svg;

use thiserror::Error;
use vine_nav::PlanError;

pub use files::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("deployment failed: {0}")]
    Simulate(String),
    #[error("unreachable: {0}")]
    Unreachable(String),
    #[error("infeasible waypoint: {0}")]
    Infeasible(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    /// Process exit status: 2 parse, 3 deployment, 4 unreachable, 5 infeasible, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Argument(_) => 2,
            CliError::Simulate(_) => 3,
            CliError::Unreachable(_) => 4,
            CliError::Infeasible(_) => 5,
            CliError::Io { .. } | CliError::Other(_) => 1,
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Unreachable => CliError::Unreachable(e.to_string()),
            PlanError::InfeasibleWaypoint(_) | PlanError::DepletedParticles(_) => CliError::Infeasible(e.to_string()),
            PlanError::InvalidConfig(_) | PlanError::Uncertainty(_) => CliError::Argument(e.to_string()),
            PlanError::Kinematics(_) => CliError::Simulate(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
