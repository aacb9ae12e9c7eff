use crate::equilibrium::c_node;
use crate::error::{Error, Result};
use crate::model::{AgentId, CostCurve, Population, Productivity};

use super::flow::{FlowConfig, GradientFlow, TrajectoryRecord};

/// Quasi-static cost reduction: every stage lowers the listed agents' costs
/// by `decrement` (never below `floor`) and relaxes the flow again.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSchedule {
    pub agents: Vec<AgentId>,
    pub decrement: f64,
    pub floor: f64,
    pub max_stages: usize,
}

impl CostSchedule {
    pub fn new(agents: Vec<AgentId>) -> Self {
        CostSchedule {
            agents,
            decrement: 1e-4,
            floor: 1e-6,
            max_stages: 100_000,
        }
    }
}

/// Relaxed state at the end of one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub index: usize,
    pub c_max: f64,
    pub watched_investment: f64,
    /// Saddle-node cost of the watched agent at this stage's `c_max`.
    pub watched_c_node: f64,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuddenDeathRecord {
    /// The least efficient agent not on the schedule; its cost stays fixed.
    pub watched: AgentId,
    pub stages: Vec<Stage>,
    pub trajectory: TrajectoryRecord,
    /// First stage whose relaxed state has the watched agent out.
    pub exit_stage: Option<usize>,
}

impl SuddenDeathRecord {
    /// Watched investment at the last stationary state before its exit.
    pub fn last_stationary_before_exit(&self) -> Option<f64> {
        let k = self.exit_stage?;
        k.checked_sub(1).map(|i| self.stages[i].watched_investment)
    }
}

/// Squeeze scenario: twenty near-identical agents (costs 0.1 + 5e-5 i), an
/// oligarch (id 20, cost 0.08) whose cost the returned schedule lowers, and
/// for `gamma <= 1` a fringe agent (id 21) just below the profitability edge.
pub fn squeeze_scenario(gamma: f64) -> Result<(Population, CostSchedule)> {
    let curve = CostCurve::from_curvature(gamma)?;
    let mut costs: Vec<f64> = (0..20).map(|i| 0.10 + 5e-5 * i as f64).collect();
    costs.push(0.08);
    if gamma <= 1.0 {
        costs.push(0.1049);
    }
    Ok((Population::from_costs(&costs, curve)?, CostSchedule::new(vec![AgentId(20)])))
}

/// Relaxes from `initial`, then walks the cost schedule until the watched
/// agent drops out or the schedule is exhausted.
pub fn sudden_death_experiment(
    population: &Population,
    productivity: &Productivity,
    initial: &[f64],
    schedule: &CostSchedule,
    cfg: &FlowConfig,
) -> Result<SuddenDeathRecord> {
    if !(schedule.decrement > 0.0 && schedule.floor >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "decrement",
            value: schedule.decrement,
            reason: "schedule must lower costs",
        });
    }
    let scheduled: Vec<usize> = schedule
        .agents
        .iter()
        .map(|&id| {
            population
                .position(id)
                .ok_or_else(|| Error::InvalidPopulation(format!("scheduled agent {id} not in population")))
        })
        .collect::<Result<_>>()?;

    let mut flow = GradientFlow::new(population, productivity, initial, cfg)?;
    relax(&mut flow)?;

    let watched = (0..population.len())
        .filter(|i| !scheduled.contains(i) && flow.investments()[*i] > 0.0)
        .max_by(|&a, &b| {
            let (ca, cb) = (population.agents()[a].effective_cost(), population.agents()[b].effective_cost());
            ca.total_cmp(&cb)
        })
        .ok_or(Error::EmptyMarket)?;
    let watched_agent = population.agents()[watched];
    let gamma = watched_agent.curve.curvature();

    let stage_of = |flow: &GradientFlow, index: usize| -> Result<Stage> {
        let c_max = productivity.value(flow.investments().iter().sum())?;
        Ok(Stage {
            index,
            c_max,
            watched_investment: flow.investments()[watched],
            watched_c_node: if gamma > 0.0 { c_node(c_max, gamma) } else { f64::INFINITY },
            step: flow.step_count(),
        })
    };

    let mut stages = vec![stage_of(&flow, 0)?];
    let mut exit_stage = None;
    let mut pop = population.clone();
    for index in 1..=schedule.max_stages {
        if scheduled.is_empty() {
            break;
        }
        let mut moved = false;
        for &i in &scheduled {
            let agent = pop.agents()[i];
            let lowered = (agent.cost - schedule.decrement).max(schedule.floor);
            if lowered < agent.cost {
                pop = pop.with_cost(agent.id, lowered)?;
                moved = true;
            }
        }
        if !moved {
            break;
        }
        flow.set_population(pop.clone());
        relax(&mut flow)?;
        stages.push(stage_of(&flow, index)?);
        if flow.investments()[watched] == 0.0 {
            exit_stage = Some(index);
            break;
        }
    }
    let run = flow.finish(true);
    Ok(SuddenDeathRecord {
        watched: watched_agent.id,
        stages,
        trajectory: run.trajectory,
        exit_stage,
    })
}

fn relax(flow: &mut GradientFlow) -> Result<()> {
    let start = flow.step_count();
    if flow.relax()? {
        Ok(())
    } else {
        Err(Error::NonConvergence {
            iterations: flow.step_count() - start,
            residual: flow.residual(),
        })
    }
}
