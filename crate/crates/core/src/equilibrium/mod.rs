//! Nash equilibria of the commons game.
//!
//! With linear costs the whole equilibrium is fixed by the total investment
//! `x_tot`, which acts as a mean field: it solves
//! `P(x_tot) + (x_tot/N) P'(x_tot) = c_bar` and depends on the population
//! only through `N` and the mean effective cost. Individual investments are
//! then linear in the cost, `x_i = (c_max - c_i)/(-P')` with
//! `c_max = P(x_tot)`, and payoffs follow a quadratic dispersion relation.
//!
//! Non-linear costs go through [`equilibrate_general`], which keeps track of
//! which branch of the stationarity condition each agent sits on and is
//! therefore history dependent.

mod cooperative;
mod decimation;
mod general;
mod nash;
mod response;
mod selfconsistency;
mod state;

pub use cooperative::cooperative_state;
pub use decimation::{decimate, decimate_with_trace, DecimationRound};
pub use general::equilibrate_general;
pub use nash::{best_unilateral_gain, nash_report, NashReport};
pub use response::{
    c_node, dispersion_payoff, optimal_investment_concave, optimal_investment_linear,
    optimal_investment_with_slope, stationarity_discriminant, stationary_roots, x_node, RootBranch,
    Stationary, StationaryRoots,
};
pub use selfconsistency::{
    large_n_limit, oligarch_alpha, runaway_bound, self_consistency_residual, solve_x_tot,
};
pub use state::{AgentOutcome, EquilibriumKind, EquilibriumState};

/// Numerical settings shared by the equilibrium solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Largest accepted self-consistency residual.
    pub root_tol: f64,
    pub max_bisect_iters: u32,
    /// Cap on decimation / active-set rounds.
    pub max_rounds: u32,
    /// Largest total investment searched when the bracket has to be grown
    /// (power-law commons). No root below it is reported as runaway.
    pub max_bracket: f64,
    /// Tolerance of the first-order Nash check on returned states.
    pub nash_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            root_tol: 1e-12,
            max_bisect_iters: 200,
            max_rounds: 10_000,
            max_bracket: 100.0,
            nash_tol: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let positive = [
            ("root_tol", self.root_tol),
            ("max_bracket", self.max_bracket),
            ("nash_tol", self.nash_tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(crate::Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        if self.max_bisect_iters == 0 || self.max_rounds == 0 {
            return Err(crate::Error::InvalidParameter {
                name: "max_iters",
                value: 0.0,
                reason: "iteration caps must be positive",
            });
        }
        Ok(())
    }
}

/// Bisection for a nonincreasing `f` with `f(lo) >= 0 >= f(hi)`.
///
/// Runs until the bracket is exhausted in floating point and returns the
/// upper end, i.e. the side where `f <= 0`.
pub(crate) fn bisect_decreasing(
    mut f: impl FnMut(f64) -> crate::Result<f64>,
    mut lo: f64,
    mut hi: f64,
    max_iters: u32,
) -> crate::Result<f64> {
    for _ in 0..max_iters {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
