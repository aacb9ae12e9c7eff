use crate::error::{Error, Result};
use crate::model::{Population, Productivity};

use super::response::optimal_investment_with_slope;
use super::selfconsistency::solve_x_tot;
use super::state::{EquilibriumKind, EquilibriumState};
use super::SolverConfig;

/// One pass of the decimation loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecimationRound {
    pub n: usize,
    pub c_bar: f64,
    pub x_tot: f64,
    pub c_max: f64,
    /// Agents dropped at the end of this round.
    pub removed: usize,
}

/// Nash equilibrium of linear-cost agents by iterated decimation.
///
/// Each round solves the total investment for the current survivors, sets
/// `c_max = P(x_tot)` and drops everyone with `c_eff >= c_max` (they would
/// invest a nonpositive amount). Stops when nobody is dropped.
pub fn decimate(population: &Population, productivity: &Productivity, cfg: &SolverConfig) -> Result<EquilibriumState> {
    decimate_with_trace(population, productivity, cfg).map(|(state, _)| state)
}

pub fn decimate_with_trace(
    population: &Population,
    productivity: &Productivity,
    cfg: &SolverConfig,
) -> Result<(EquilibriumState, Vec<DecimationRound>)> {
    productivity.validate()?;
    cfg.validate()?;
    if let Some(agent) = population.iter().find(|a| !a.curve.is_linear()) {
        return Err(Error::UnsupportedCost {
            agent: agent.id,
            operation: "decimation",
        });
    }
    let mut survivors: Vec<usize> = (0..population.len()).collect();
    let mut trace = Vec::new();
    loop {
        if survivors.is_empty() {
            return Err(Error::EmptyMarket);
        }
        if trace.len() as u32 >= cfg.max_rounds {
            return Err(Error::NonConvergence {
                iterations: trace.len() as u64,
                residual: survivors.len() as f64,
            });
        }
        let n = survivors.len();
        let c_bar = population.mean_effective_cost(&survivors);
        let x_tot = solve_x_tot(n, c_bar, productivity, cfg)?;
        let c_max = productivity.value(x_tot)?;
        let before = survivors.len();
        // Marginal agents (c_eff == c_max) earn nothing and leave.
        survivors.retain(|&i| population.agents()[i].effective_cost() < c_max);
        trace.push(DecimationRound {
            n,
            c_bar,
            x_tot,
            c_max,
            removed: before - survivors.len(),
        });
        if survivors.len() == before {
            let slope = productivity.slope(x_tot)?;
            let mut investments = vec![0.0; population.len()];
            for &i in &survivors {
                let c = population.agents()[i].effective_cost();
                investments[i] = optimal_investment_with_slope(c, c_max, slope);
            }
            let state = EquilibriumState::from_investments(
                population,
                productivity,
                &investments,
                EquilibriumKind::Nash,
                trace.len() as u32,
            )?;
            return Ok((state, trace));
        }
    }
}
