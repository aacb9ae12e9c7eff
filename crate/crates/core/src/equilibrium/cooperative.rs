use crate::error::{Error, Result};
use crate::model::{Population, Productivity};

use super::selfconsistency::solve_x_tot;
use super::state::{EquilibriumKind, EquilibriumState};
use super::SolverConfig;

/// Equal-share cooperative protocol: survivors invest `x_tot/N` each, with
/// `x_tot` maximizing `(P(x_tot) - c_bar) x_tot` as a single investor
/// with the mean cost would. Agent `i` earns `(c_max - c_i) x_tot / N`, so
/// agents with `c_i >= c_max` still drop out and the loop repeats as in
/// decimation.
pub fn cooperative_state(population: &Population, productivity: &Productivity, cfg: &SolverConfig) -> Result<EquilibriumState> {
    productivity.validate()?;
    cfg.validate()?;
    if let Some(agent) = population.iter().find(|a| !a.curve.is_linear()) {
        return Err(Error::UnsupportedCost {
            agent: agent.id,
            operation: "cooperation",
        });
    }
    let mut survivors: Vec<usize> = (0..population.len()).collect();
    let mut rounds = 0u32;
    loop {
        if survivors.is_empty() {
            return Err(Error::EmptyMarket);
        }
        rounds += 1;
        if rounds > cfg.max_rounds {
            return Err(Error::NonConvergence {
                iterations: rounds as u64,
                residual: survivors.len() as f64,
            });
        }
        let c_bar = population.mean_effective_cost(&survivors);
        // single-investor optimum is the N = 1 self-consistency
        let x_tot = solve_x_tot(1, c_bar, productivity, cfg)?;
        let c_max = productivity.value(x_tot)?;
        let before = survivors.len();
        survivors.retain(|&i| population.agents()[i].effective_cost() < c_max);
        if survivors.len() == before {
            let share = x_tot / survivors.len() as f64;
            let mut investments = vec![0.0; population.len()];
            for &i in &survivors {
                investments[i] = share;
            }
            return EquilibriumState::from_investments(
                population,
                productivity,
                &investments,
                EquilibriumKind::Cooperative,
                rounds,
            );
        }
    }
}
