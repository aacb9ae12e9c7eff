use crate::equilibrium::{EquilibriumKind, EquilibriumState};
use crate::error::{Error, Result};
use crate::model::{AgentId, Population, Productivity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    /// Learning rate of the gradient ascent.
    pub step_size: f64,
    /// Converged once no investment moves by this much in one step.
    pub convergence_tol: f64,
    pub max_steps: u64,
    /// Keep every k-th step in the trajectory (the last step is always kept).
    pub record_every: u64,
    /// Halve the step size after this many consecutive sign flips of the
    /// change in total investment.
    pub oscillation_window: u32,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            step_size: 0.01,
            convergence_tol: 1e-10,
            max_steps: 10_000_000,
            record_every: 1000,
            oscillation_window: 10,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("step_size", self.step_size), ("convergence_tol", self.convergence_tol)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        if self.record_every == 0 || self.max_steps == 0 || self.oscillation_window == 0 {
            return Err(Error::InvalidParameter {
                name: "flow counters",
                value: 0.0,
                reason: "max_steps, record_every and oscillation_window must be positive",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitEvent {
    pub agent: AgentId,
    /// Step at which the investment reached zero for good.
    pub step: u64,
}

/// Thinned time series of a gradient-flow run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub ids: Vec<AgentId>,
    pub steps: Vec<u64>,
    /// One row of investments (population order) per recorded step.
    pub x: Vec<Vec<f64>>,
    pub x_tot: Vec<f64>,
    pub exit_events: Vec<ExitEvent>,
}

impl TrajectoryRecord {
    fn push(&mut self, step: u64, x: &[f64]) {
        if self.steps.last() == Some(&step) {
            return;
        }
        self.steps.push(step);
        self.x.push(x.to_vec());
        self.x_tot.push(x.iter().sum());
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Investment series of one agent.
    pub fn series(&self, id: AgentId) -> Option<Vec<f64>> {
        let k = self.ids.iter().position(|&a| a == id)?;
        Some(self.x.iter().map(|row| row[k]).collect())
    }

    pub fn exit_step(&self, id: AgentId) -> Option<u64> {
        self.exit_events.iter().find(|e| e.agent == id).map(|e| e.step)
    }
}

/// One simultaneous gradient step: `x_i' = max(0, x_i + eta dE_i/dx_i)`, all
/// gradients taken from the same snapshot of `x_tot`.
pub fn flow_step(population: &Population, productivity: &Productivity, x: &[f64], cfg: &FlowConfig) -> Result<Vec<f64>> {
    let mut next = vec![0.0; x.len()];
    step_into(population, productivity, x, cfg.step_size, &mut next)?;
    Ok(next)
}

fn step_into(population: &Population, productivity: &Productivity, x: &[f64], eta: f64, out: &mut [f64]) -> Result<()> {
    assert_eq!(x.len(), population.len(), "one investment per agent");
    let x_tot: f64 = x.iter().sum();
    let p = productivity.value(x_tot)?;
    let dp = productivity.slope(x_tot)?;
    for ((agent, &xi), slot) in population.iter().zip(x).zip(out.iter_mut()) {
        let gradient = agent.weight * (p + xi * dp) - agent.cost * agent.curve.marginal(xi)?;
        let mut moved = (xi + eta * gradient).max(0.0);
        if let Some(limit) = agent.curve.domain_limit() {
            moved = moved.min(limit * (1.0 - 1e-12));
        }
        *slot = moved;
    }
    Ok(())
}

/// Result of relaxing a gradient flow, converged or not.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRun {
    pub trajectory: TrajectoryRecord,
    pub final_x: Vec<f64>,
    pub converged: bool,
    pub steps: u64,
    /// Largest single-step change at the end of the run.
    pub residual: f64,
    /// Step size in use at the end (after any oscillation halvings).
    pub step_size: f64,
}

/// Stateful gradient flow. Costs may be swapped between relaxations, which
/// is how quasi-static experiments drive the system.
#[derive(Debug, Clone)]
pub struct GradientFlow<'a> {
    population: Population,
    productivity: &'a Productivity,
    cfg: FlowConfig,
    x: Vec<f64>,
    scratch: Vec<f64>,
    eta: f64,
    step: u64,
    zero_since: Vec<Option<u64>>,
    trajectory: TrajectoryRecord,
    last_residual: f64,
}

impl<'a> GradientFlow<'a> {
    pub fn new(population: &Population, productivity: &'a Productivity, initial: &[f64], cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        productivity.validate()?;
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
        productivity.value(initial.iter().sum())?;
        let mut trajectory = TrajectoryRecord {
            ids: population.iter().map(|a| a.id).collect(),
            ..Default::default()
        };
        trajectory.push(0, initial);
        Ok(GradientFlow {
            population: population.clone(),
            productivity,
            cfg: *cfg,
            x: initial.to_vec(),
            scratch: vec![0.0; initial.len()],
            eta: cfg.step_size,
            step: 0,
            zero_since: vec![None; initial.len()],
            trajectory,
            last_residual: f64::INFINITY,
        })
    }

    pub fn investments(&self) -> &[f64] {
        &self.x
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn step_size(&self) -> f64 {
        self.eta
    }

    /// Largest single-step change in the last step taken.
    pub fn residual(&self) -> f64 {
        self.last_residual
    }

    pub fn set_population(&mut self, population: Population) {
        assert_eq!(population.len(), self.population.len(), "agents cannot be added mid-flow");
        self.population = population;
    }

    /// Steps until converged or `max_steps` further steps were taken.
    /// Returns whether the flow converged.
    pub fn relax(&mut self) -> Result<bool> {
        let mut flips = 0u32;
        let mut last_sign = 0.0f64;
        for _ in 0..self.cfg.max_steps {
            step_into(&self.population, self.productivity, &self.x, self.eta, &mut self.scratch)?;
            self.step += 1;
            let mut delta = 0.0f64;
            let mut d_tot = 0.0;
            for (i, (&old, &new)) in self.x.iter().zip(&self.scratch).enumerate() {
                delta = delta.max((new - old).abs());
                d_tot += new - old;
                if new == 0.0 && old > 0.0 {
                    self.zero_since[i] = Some(self.step);
                } else if new > 0.0 {
                    self.zero_since[i] = None;
                }
            }
            std::mem::swap(&mut self.x, &mut self.scratch);
            self.last_residual = delta;

            let sign = if d_tot > 0.0 { 1.0 } else if d_tot < 0.0 { -1.0 } else { 0.0 };
            flips = if sign != 0.0 && sign == -last_sign { flips + 1 } else { 0 };
            last_sign = sign;
            if flips >= self.cfg.oscillation_window {
                self.eta *= 0.5;
                flips = 0;
            }

            if self.step.is_multiple_of(self.cfg.record_every) {
                self.trajectory.push(self.step, &self.x);
            }
            if delta < self.cfg.convergence_tol {
                self.trajectory.push(self.step, &self.x);
                return Ok(true);
            }
        }
        self.trajectory.push(self.step, &self.x);
        Ok(false)
    }

    pub fn finish(mut self, converged: bool) -> FlowRun {
        self.trajectory.exit_events = self
            .zero_since
            .iter()
            .zip(&self.trajectory.ids)
            .filter_map(|(since, &agent)| since.map(|step| ExitEvent { agent, step }))
            .collect();
        FlowRun {
            trajectory: self.trajectory,
            final_x: self.x,
            converged,
            steps: self.step,
            residual: self.last_residual,
            step_size: self.eta,
        }
    }

    pub fn trajectory(&self) -> &TrajectoryRecord {
        &self.trajectory
    }
}

/// Relaxes the gradient flow from `initial`; non-convergence is reported in
/// the returned run, not as an error.
pub fn run_flow(population: &Population, productivity: &Productivity, initial: &[f64], cfg: &FlowConfig) -> Result<FlowRun> {
    let mut flow = GradientFlow::new(population, productivity, initial, cfg)?;
    let converged = flow.relax()?;
    Ok(flow.finish(converged))
}

/// Relaxes to a stationary state and returns it as an equilibrium.
pub fn run_to_convergence(
    population: &Population,
    productivity: &Productivity,
    initial: &[f64],
    cfg: &FlowConfig,
) -> Result<(TrajectoryRecord, EquilibriumState)> {
    let run = run_flow(population, productivity, initial, cfg)?;
    if !run.converged {
        return Err(Error::NonConvergence {
            iterations: run.steps,
            residual: run.residual,
        });
    }
    let state = EquilibriumState::from_investments(population, productivity, &run.final_x, EquilibriumKind::Nash, 1)?;
    Ok((run.trajectory, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{c_node, decimate, equilibrate_general, nash_report, SolverConfig};
    use crate::model::{Agent, CostCurve};

    fn fig4(gamma: f64) -> Population {
        let mut costs: Vec<f64> = (0..30).map(|i| 0.15 + i as f64 * 0.002).collect();
        costs.push(0.1);
        Population::from_costs(&costs, CostCurve::from_curvature(gamma).unwrap()).unwrap()
    }

    #[test]
    fn step_matches_payoff_gradient() {
        let pop = fig4(1.5);
        let p = Productivity::Exponential;
        let x: Vec<f64> = (0..pop.len()).map(|i| 0.01 * i as f64).collect();
        let cfg = FlowConfig { step_size: 0.1, ..Default::default() };
        let next = flow_step(&pop, &p, &x, &cfg).unwrap();
        let x_tot: f64 = x.iter().sum();
        for ((agent, &xi), &xn) in pop.iter().zip(&x).zip(&next) {
            let g = agent.payoff_gradient(xi, x_tot, &p).unwrap();
            assert!((xn - (xi + 0.1 * g).max(0.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let pop = fig4(0.0);
        let p = Productivity::Exponential;
        let eq = decimate(&pop, &p, &SolverConfig::default()).unwrap();
        let x = eq.investments();
        let next = flow_step(&pop, &p, &x, &FlowConfig::default()).unwrap();
        for (a, b) in x.iter().zip(&next) {
            assert!((a - b).abs() < 1e-14);
        }
        let run = run_flow(&pop, &p, &x, &FlowConfig::default()).unwrap();
        assert!(run.converged);
        assert!(run.steps <= 2);
    }

    #[test]
    fn lone_agent_starts_investing() {
        let pop = Population::from_costs(&[0.15], CostCurve::Linear).unwrap();
        let next = flow_step(&pop, &Productivity::Exponential, &[0.0], &FlowConfig::default()).unwrap();
        assert!((next[0] - 0.01 * 0.85).abs() < 1e-15);
    }

    #[test]
    fn beyond_saddle_node_investment_shrinks() {
        let gamma = 1.5;
        let c_max: f64 = 0.15;
        let cost = c_node(c_max, gamma) * 1.01;
        // frozen field: all other investment fixed so that P = c_max
        let agent = Agent::new(0, cost, CostCurve::Logarithmic { curvature: gamma }).unwrap();
        let others = -c_max.ln();
        for x in [0.0, 0.05, 1.0 / 6.0, 0.3, 0.8] {
            let g = agent.payoff_gradient(x, others + x, &Productivity::Exponential).unwrap();
            // the full gradient includes the agent's own effect on x_tot
            let frozen = (1.0 - x) * c_max - cost / (1.0 + gamma * x);
            assert!(frozen < 0.0);
            assert!(g < 0.0 || x == 0.0, "x {x}: {g}");
        }
    }

    #[test]
    fn converges_to_general_solver_state() {
        let p = Productivity::Exponential;
        for (gamma, n) in [(0.5, 12), (1.0, 7), (1.5, 5)] {
            let pop = fig4(gamma);
            let init = vec![0.5; pop.len()];
            let (traj, state) = run_to_convergence(&pop, &p, &init, &FlowConfig::default()).unwrap();
            assert_eq!(state.n_survivors(), n, "gamma {gamma}");
            let reference = equilibrate_general(&pop, &p, &SolverConfig::default(), &init).unwrap();
            for (a, b) in state.outcomes.iter().zip(&reference.outcomes) {
                assert!((a.investment - b.investment).abs() < 1e-6, "gamma {gamma}: {a:?} vs {b:?}");
            }
            assert!(nash_report(&pop, &p, &state).unwrap().is_nash(1e-8));
            assert_eq!(traj.exit_events.len(), pop.len() - n);
            for (row, &x_tot) in traj.x.iter().zip(&traj.x_tot) {
                assert!(row.iter().all(|&x| x >= 0.0));
                assert!((row.iter().sum::<f64>() - x_tot).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weak_curvature_forgets_initial_condition() {
        let p = Productivity::Exponential;
        for gamma in [0.5, 0.0, -0.5] {
            let pop = fig4(gamma);
            let finals: Vec<Vec<f64>> = [0.01, 0.5, 1.0]
                .iter()
                .map(|&x0| run_to_convergence(&pop, &p, &vec![x0; pop.len()], &FlowConfig::default()).unwrap().1.investments())
                .collect();
            for other in &finals[1..] {
                for (a, b) in finals[0].iter().zip(other) {
                    assert!((a - b).abs() < 1e-6, "gamma {gamma}");
                }
            }
        }
    }

    #[test]
    fn step_from_equilibrium_barely_moves_total() {
        let p = Productivity::Exponential;
        let pop = fig4(1.5);
        let cfg = FlowConfig::default();
        let (_, eq) = run_to_convergence(&pop, &p, &vec![0.5; pop.len()], &cfg).unwrap();
        let x = eq.investments();
        let next = flow_step(&pop, &p, &x, &cfg).unwrap();
        let shift: f64 = next.iter().sum::<f64>() - eq.x_tot;
        assert!(shift.abs() <= pop.len() as f64 * cfg.step_size * 1e-8);
    }

    #[test]
    fn oscillation_halves_step() {
        let pop = Population::from_costs(&[0.1; 20], CostCurve::Linear).unwrap();
        let cfg = FlowConfig { step_size: 1.2, ..Default::default() };
        let run = run_flow(&pop, &Productivity::Exponential, &[0.2; 20], &cfg).unwrap();
        assert!(run.converged);
        assert!(run.step_size < 1.2);
    }

    #[test]
    fn non_convergence_is_reported() {
        let pop = fig4(1.5);
        let cfg = FlowConfig { max_steps: 10, ..Default::default() };
        let init = vec![0.5; pop.len()];
        let run = run_flow(&pop, &Productivity::Exponential, &init, &cfg).unwrap();
        assert!(!run.converged);
        assert!(matches!(
            run_to_convergence(&pop, &Productivity::Exponential, &init, &cfg),
            Err(Error::NonConvergence { iterations: 10, .. })
        ));
    }
}
