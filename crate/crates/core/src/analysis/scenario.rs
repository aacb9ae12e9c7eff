use crate::equilibrium::{cooperative_state, decimate, equilibrate_general, solve_x_tot, EquilibriumState, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{Agent, CostCurve, Population, Productivity};

/// Regularly spaced cost grid `c_min + i delta_c`, optionally followed by
/// low-cost oligarchs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub c_min: f64,
    pub delta_c: f64,
    pub n_start: usize,
    pub oligarch_costs: Vec<f64>,
    /// Cost curvature shared by all agents; 0 is linear.
    pub gamma: f64,
    pub productivity: Productivity,
    /// Apply the equal-share protocol to the selfish survivors.
    pub cooperative: bool,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            c_min: 0.15,
            delta_c: 0.002,
            n_start: 30,
            oligarch_costs: Vec::new(),
            gamma: 0.0,
            productivity: Productivity::Exponential,
            cooperative: false,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_min > 0.0 && self.c_min.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c_min",
                value: self.c_min,
                reason: "must be positive",
            });
        }
        if !(self.delta_c >= 0.0 && self.delta_c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delta_c",
                value: self.delta_c,
                reason: "must be non-negative",
            });
        }
        if self.n_start == 0 {
            return Err(Error::InvalidParameter {
                name: "n_start",
                value: 0.0,
                reason: "need at least one grid agent",
            });
        }
        self.productivity.validate()?;
        CostCurve::from_curvature(self.gamma).map(|_| ())
    }
}

/// Grid agents get ids `0..n_start`, oligarchs the ids after them.
pub fn build_scenario(spec: &ScenarioSpec) -> Result<Population> {
    spec.validate()?;
    let curve = CostCurve::from_curvature(spec.gamma)?;
    let costs: Vec<f64> = (0..spec.n_start)
        .map(|i| spec.c_min + i as f64 * spec.delta_c)
        .chain(spec.oligarch_costs.iter().copied())
        .collect();
    Population::from_costs(&costs, curve)
}

/// Equilibrium of a scenario: decimation for linear costs (followed by the
/// cooperative protocol on the survivors when requested), the history
/// dependent solver started from uniform investments `x0` otherwise.
pub fn run_scenario(spec: &ScenarioSpec, cfg: &SolverConfig, x0: f64) -> Result<(Population, EquilibriumState)> {
    let pop = build_scenario(spec)?;
    if spec.gamma == 0.0 {
        let selfish = decimate(&pop, &spec.productivity, cfg)?;
        if !spec.cooperative {
            return Ok((pop, selfish));
        }
        let kept: Vec<usize> = (0..pop.len()).filter(|&i| selfish.outcomes[i].survived).collect();
        let survivors = pop.subset(&kept)?;
        let state = cooperative_state(&survivors, &spec.productivity, cfg)?;
        return Ok((survivors, state));
    }
    if spec.cooperative {
        return Err(Error::UnsupportedCost {
            agent: pop.agents()[0].id,
            operation: "cooperation",
        });
    }
    let state = equilibrate_general(&pop, &spec.productivity, cfg, &vec![x0; pop.len()])?;
    Ok((pop, state))
}

/// `n` linear-cost agents evenly spread over `[c_bar - spread, c_bar + spread]`.
pub fn uniform_spread_population(n: usize, c_bar: f64, spread: f64) -> Result<Population> {
    if n == 0 {
        return Err(Error::InvalidPopulation("empty population".into()));
    }
    let costs: Vec<f64> = if n == 1 {
        vec![c_bar]
    } else {
        (0..n)
            .map(|i| c_bar - spread + 2.0 * spread * i as f64 / (n - 1) as f64)
            .collect()
    };
    Population::from_costs(&costs, CostCurve::Linear)
}

/// Stand-in for a vanishing per-unit cost; costs must stay positive.
pub const OLIGARCH_COST: f64 = f64::MIN_POSITIVE;

/// One oligarch with (numerically) vanishing cost and `n - 1` bulk agents
/// whose costs bring the mean to exactly `c_bar`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoClassScenario {
    pub population: Population,
    pub x_tot: f64,
    pub c_max: f64,
    /// Exact bulk offset: bulk cost is `c_bar + alpha (c_max - c_bar)`.
    pub alpha: f64,
    pub bulk_cost: f64,
}

impl TwoClassScenario {
    /// Equilibrium payoff of a bulk agent, `(1 - alpha)^2 (c_max - c_bar)^2 / c_max`.
    pub fn bulk_payoff(&self, c_bar: f64) -> f64 {
        let gap = (1.0 - self.alpha) * (self.c_max - c_bar);
        gap * gap / self.c_max
    }
}

/// Two-class population on an exponential commons. The equilibrium depends
/// on costs only through `n` and `c_bar`, so `x_tot` is fixed first and the
/// bulk cost follows from the mean.
pub fn oligarch_two_class_scenario(n: usize, c_bar: f64, cfg: &SolverConfig) -> Result<TwoClassScenario> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: n as f64,
            reason: "needs an oligarch and at least one bulk agent",
        });
    }
    if !(c_bar > 0.0 && c_bar < 1.0) {
        return Err(Error::Domain {
            what: "c_bar",
            value: c_bar,
            domain: "(0, 1)".into(),
        });
    }
    let p = Productivity::Exponential;
    let x_tot = solve_x_tot(n, c_bar, &p, cfg)?;
    let c_max = p.value(x_tot)?;
    let bulk_cost = (n as f64 * c_bar - OLIGARCH_COST) / (n - 1) as f64;
    let alpha = (bulk_cost - c_bar) / (c_max - c_bar);
    if alpha >= 1.0 {
        return Err(Error::InfeasibleScenario(format!(
            "bulk cost {bulk_cost} is not below c_max = {c_max} (alpha = {alpha})"
        )));
    }
    let mut agents = vec![Agent::new(0, OLIGARCH_COST, CostCurve::Linear)?];
    for id in 1..n as u32 {
        agents.push(Agent::new(id, bulk_cost, CostCurve::Linear)?);
    }
    Ok(TwoClassScenario {
        population: Population::new(agents)?,
        x_tot,
        c_max,
        alpha,
        bulk_cost,
    })
}
