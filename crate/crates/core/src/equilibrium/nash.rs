use crate::error::Result;
use crate::model::{AgentId, Population, Productivity};

use super::state::EquilibriumState;

/// First-order Nash diagnostics of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct NashReport {
    /// Largest `|dE_i/dx_i|` over investing agents.
    pub max_survivor_gradient: f64,
    /// Largest gradient at zero investment over agents out of the market
    /// (positive means re-entry would pay off).
    pub max_reentry_gradient: f64,
    /// Survivors with a nonpositive payoff.
    pub unprofitable: Vec<AgentId>,
}

impl NashReport {
    pub fn is_nash(&self, tol: f64) -> bool {
        self.max_survivor_gradient <= tol && self.max_reentry_gradient <= tol && self.unprofitable.is_empty()
    }

    pub fn worst(&self) -> f64 {
        self.max_survivor_gradient.max(self.max_reentry_gradient)
    }
}

/// Local Nash check: survivors sit at a stationary point with positive
/// payoff, and no excluded agent gains by investing a vanishing amount.
pub fn nash_report(population: &Population, productivity: &Productivity, state: &EquilibriumState) -> Result<NashReport> {
    let mut report = NashReport {
        max_survivor_gradient: 0.0,
        max_reentry_gradient: f64::NEG_INFINITY,
        unprofitable: Vec::new(),
    };
    for (agent, outcome) in population.iter().zip(&state.outcomes) {
        let g = agent.payoff_gradient(outcome.investment, state.x_tot, productivity)?;
        if outcome.survived {
            report.max_survivor_gradient = report.max_survivor_gradient.max(g.abs());
            if !(outcome.payoff > 0.0) {
                report.unprofitable.push(agent.id);
            }
        } else {
            report.max_reentry_gradient = report.max_reentry_gradient.max(g);
        }
    }
    Ok(report)
}

/// Largest payoff gain agent `position` can realize by a unilateral
/// deviation to any of `points` evenly spaced investments on
/// `[0, 2 x_i + 1]`, the other agents held fixed.
///
/// Deviations outside the domain of the productivity or cost curve are
/// skipped.
pub fn best_unilateral_gain(
    population: &Population,
    productivity: &Productivity,
    state: &EquilibriumState,
    position: usize,
    points: usize,
) -> Result<f64> {
    let agent = &population.agents()[position];
    let x_i = state.outcomes[position].investment;
    let others = (state.x_tot - x_i).max(0.0);
    let base = agent.payoff(x_i, state.x_tot, productivity)?;
    let span = 2.0 * x_i + 1.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..points {
        let x = span * k as f64 / (points - 1).max(1) as f64;
        if agent.curve.domain_limit().is_some_and(|limit| x >= limit) {
            continue;
        }
        if productivity.capacity().is_some_and(|cap| x + others > cap) {
            continue;
        }
        let e = agent.payoff(x, others + x, productivity)?;
        best = best.max(e - base);
    }
    Ok(best)
}
