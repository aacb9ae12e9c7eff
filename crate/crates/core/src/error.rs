use std::fmt;

use crate::model::AgentId;

/// Outcome of the power-law runaway test, carried inside [`Error::NoSolution`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunawayBound {
    /// Total investment stays below `x_tot_limit` as costs vanish.
    Finite(f64),
    /// Optimal total investment diverges as costs vanish.
    Divergent,
}

impl fmt::Display for RunawayBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunawayBound::Finite(x) => write!(f, "finite limit x_tot = N/(gamma_p - N) = {x}"),
            RunawayBound::Divergent => write!(f, "divergent: N >= gamma_p, x_tot = N/(gamma_p - N) has no positive value"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error(
        "self-consistency has no solution for N = {n}, c_bar = {c_bar} within x_tot <= {bracket}; runaway bound: {bound}"
    )]
    NoSolution {
        n: usize,
        c_bar: f64,
        bracket: f64,
        bound: RunawayBound,
    },

    #[error("every agent was driven out of the market")]
    EmptyMarket,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: u64, residual: f64 },

    #[error("agent {agent} has a non-linear cost curve; {operation} requires linear costs")]
    UnsupportedCost {
        agent: AgentId,
        operation: &'static str,
    },

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
