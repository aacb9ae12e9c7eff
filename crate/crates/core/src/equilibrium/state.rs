use crate::error::{Error, Result};
use crate::model::{AgentId, Population, Productivity};

/// Payoffs below this are flagged as borderline survivors.
const BORDERLINE_PAYOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    /// Selfish (Nash) optimum.
    Nash,
    /// Equal-share cooperative protocol.
    Cooperative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentOutcome {
    pub id: AgentId,
    pub cost: f64,
    pub effective_cost: f64,
    pub curvature: f64,
    pub investment: f64,
    pub payoff: f64,
    pub survived: bool,
}

/// Converged state of the commons. Outcomes are in population order and
/// include the agents that left the market (with zero investment).
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumState {
    pub kind: EquilibriumKind,
    pub x_tot: f64,
    /// `P(x_tot)`.
    pub c_max: f64,
    /// Mean effective cost over the survivors.
    pub c_bar: f64,
    pub outcomes: Vec<AgentOutcome>,
    /// Survivors whose payoff is positive but below 1e-12.
    pub borderline: Vec<AgentId>,
    /// Decimation or active-set rounds used.
    pub rounds: u32,
}

impl EquilibriumState {
    /// Builds the state from investments in population order. `x_tot` is
    /// their sum, `c_max` its productivity, and an agent survives iff it
    /// invests a positive amount.
    pub fn from_investments(
        population: &Population,
        productivity: &Productivity,
        investments: &[f64],
        kind: EquilibriumKind,
        rounds: u32,
    ) -> Result<Self> {
        assert_eq!(population.len(), investments.len(), "one investment per agent");
        let x_tot: f64 = investments.iter().sum();
        let c_max = productivity.value(x_tot)?;
        let mut outcomes = Vec::with_capacity(population.len());
        let mut borderline = Vec::new();
        let mut cost_sum = 0.0;
        let mut n = 0usize;
        for (agent, &x) in population.iter().zip(investments) {
            let payoff = agent.payoff(x, x_tot, productivity)?;
            let survived = x > 0.0;
            if survived {
                n += 1;
                cost_sum += agent.effective_cost();
                if payoff < BORDERLINE_PAYOFF {
                    borderline.push(agent.id);
                }
            }
            outcomes.push(AgentOutcome {
                id: agent.id,
                cost: agent.cost,
                effective_cost: agent.effective_cost(),
                curvature: agent.curve.curvature(),
                investment: x,
                payoff,
                survived,
            });
        }
        if n == 0 {
            return Err(Error::EmptyMarket);
        }
        Ok(EquilibriumState {
            kind,
            x_tot,
            c_max,
            c_bar: cost_sum / n as f64,
            outcomes,
            borderline,
            rounds,
        })
    }

    pub fn n_survivors(&self) -> usize {
        self.outcomes.iter().filter(|o| o.survived).count()
    }

    pub fn survivors(&self) -> impl Iterator<Item = &AgentOutcome> {
        self.outcomes.iter().filter(|o| o.survived)
    }

    pub fn survivor_ids(&self) -> Vec<AgentId> {
        self.survivors().map(|o| o.id).collect()
    }

    pub fn total_payoff(&self) -> f64 {
        self.survivors().map(|o| o.payoff).sum()
    }

    pub fn mean_payoff(&self) -> f64 {
        self.total_payoff() / self.n_survivors() as f64
    }

    pub fn get(&self, id: AgentId) -> Option<&AgentOutcome> {
        self.outcomes.iter().find(|o| o.id == id)
    }

    pub fn investments(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.investment).collect()
    }
}
