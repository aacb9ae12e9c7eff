use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{Agent, CostCurve, Population, Productivity};

use super::nash::nash_report;
use super::response::{stationary_roots, Stationary};
use super::state::{EquilibriumKind, EquilibriumState};
use super::{bisect_decreasing, SolverConfig};

/// Productivity and slope, with a finite commons saturating at capacity.
fn frozen_field(productivity: &Productivity, x_tot: f64) -> Result<(f64, f64)> {
    let x = productivity.capacity().map_or(x_tot, |cap| x_tot.min(cap));
    Ok((productivity.value(x)?, productivity.slope(x)?))
}

/// Stable stationary investment of an agent already in the market, with the
/// commons frozen at `(p, dp)`. `None` when no positive profitable
/// stationary point exists.
fn stable_target(agent: &Agent, p: f64, dp: f64) -> Option<f64> {
    let c = agent.effective_cost();
    let x = match agent.curve {
        CostCurve::Linear => (p - c) / -dp,
        CostCurve::Logarithmic { curvature } => match stationary_roots(c, p, dp, curvature) {
            Stationary::NoStationaryPoint => return None,
            Stationary::Roots(r) => r.stable_root(),
        },
    };
    if !(x > 0.0) {
        return None;
    }
    let curve_cost = agent.curve.value(x).ok()?;
    let payoff = x * p - c * curve_cost;
    (payoff > 0.0).then_some(x)
}

/// Whether an agent currently at `x` lies in the basin of its stable root.
/// For concave costs the lower (unstable) root is a threshold: agents below
/// it are driven out.
fn in_basin(agent: &Agent, x: f64, p: f64, dp: f64) -> bool {
    if x <= 0.0 {
        return agent.effective_cost() < p;
    }
    match agent.curve {
        CostCurve::Logarithmic { curvature } if curvature > 0.0 => {
            match stationary_roots(agent.effective_cost(), p, dp, curvature) {
                Stationary::NoStationaryPoint => false,
                Stationary::Roots(r) => x > r.x_minus,
            }
        }
        _ => true,
    }
}

/// Nash equilibrium for arbitrary cost curves, starting from `initial`
/// investments (population order).
///
/// Agents are tracked as active (sitting on their stable stationary branch)
/// or out. For a given active set the total investment is the unique root
/// of `sum_i x_i*(x_tot) = x_tot`, found by bisection. Active agents without
/// a profitable stationary point then leave, and outside agents whose
/// gradient at zero is positive (`c_eff < c_max`) enter; this repeats until
/// the set is stable.
///
/// With concave costs (`gamma > 1`) an agent can hold a position that a
/// newcomer with the same cost could not reach from a small investment, so
/// the result depends on `initial`.
pub fn equilibrate_general(
    population: &Population,
    productivity: &Productivity,
    cfg: &SolverConfig,
    initial: &[f64],
) -> Result<EquilibriumState> {
    productivity.validate()?;
    cfg.validate()?;
    if initial.len() != population.len() {
        return Err(Error::InvalidPopulation(format!(
            "{} initial investments for {} agents",
            initial.len(),
            population.len()
        )));
    }
    for (agent, &x) in population.iter().zip(initial) {
        agent.curve.value(x)?;
    }

    let agents = population.agents();
    let x0: f64 = initial.iter().sum();
    let (p0, dp0) = frozen_field(productivity, x0)?;
    let mut active: Vec<bool> = agents
        .iter()
        .zip(initial)
        .map(|(a, &x)| x > 0.0 && in_basin(a, x, p0, dp0))
        .collect();

    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut rounds = 0u32;
    let x_tot = loop {
        rounds += 1;
        if rounds > cfg.max_rounds || !seen.insert(active.clone()) {
            return Err(Error::NonConvergence {
                iterations: rounds as u64,
                residual: f64::NAN,
            });
        }
        let x_tot = solve_active(agents, &active, productivity, cfg)?;
        let (p, dp) = frozen_field(productivity, x_tot)?;

        let mut changed = false;
        for (i, agent) in agents.iter().enumerate() {
            if active[i] && stable_target(agent, p, dp).is_none() {
                active[i] = false;
                changed = true;
            }
        }
        if changed {
            continue;
        }
        for (i, agent) in agents.iter().enumerate() {
            if !active[i] && agent.effective_cost() < p {
                active[i] = true;
                changed = true;
            }
        }
        if !changed {
            break x_tot;
        }
    };

    let (p, dp) = frozen_field(productivity, x_tot)?;
    let investments: Vec<f64> = agents
        .iter()
        .zip(&active)
        .map(|(a, &on)| if on { stable_target(a, p, dp).unwrap_or(0.0) } else { 0.0 })
        .collect();
    let state = EquilibriumState::from_investments(
        population,
        productivity,
        &investments,
        EquilibriumKind::Nash,
        rounds,
    )?;
    let report = nash_report(population, productivity, &state)?;
    if !report.is_nash(cfg.nash_tol) {
        return Err(Error::NonConvergence {
            iterations: rounds as u64,
            residual: report.worst(),
        });
    }
    Ok(state)
}

/// Root of `sum over active agents of their stable investment at x_tot,
/// minus x_tot`. The sum is nonincreasing in `x_tot`.
fn solve_active(agents: &[Agent], active: &[bool], productivity: &Productivity, cfg: &SolverConfig) -> Result<f64> {
    let excess = |x_tot: f64| -> Result<f64> {
        let (p, dp) = frozen_field(productivity, x_tot)?;
        let supply: f64 = agents
            .iter()
            .zip(active)
            .filter(|(_, &on)| on)
            .map(|(a, _)| stable_target(a, p, dp).unwrap_or(0.0))
            .sum();
        Ok(supply - x_tot)
    };
    if excess(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let upper = match productivity.capacity() {
        Some(cap) => cap,
        None => {
            let mut hi = 1.0f64;
            loop {
                if excess(hi)? <= 0.0 {
                    break hi;
                }
                if hi >= cfg.max_bracket {
                    let n = active.iter().filter(|&&a| a).count();
                    let c_bar = agents
                        .iter()
                        .zip(active)
                        .filter(|(_, &on)| on)
                        .map(|(a, _)| a.effective_cost())
                        .sum::<f64>()
                        / n as f64;
                    let bound = match *productivity {
                        Productivity::PowerLaw { exponent } => super::runaway_bound(exponent, n),
                        _ => crate::RunawayBound::Divergent,
                    };
                    return Err(Error::NoSolution {
                        n,
                        c_bar,
                        bracket: cfg.max_bracket,
                        bound,
                    });
                }
                hi = (2.0 * hi).min(cfg.max_bracket);
            }
        }
    };
    bisect_decreasing(excess, 0.0, upper, cfg.max_bisect_iters)
}
