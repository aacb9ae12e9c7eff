//! Model primitives: productivity of the commons, dimensionless cost curves,
//! agents and their payoffs.
//!
//! An agent investing `x_i` into a commons with total investment `x_tot`
//! receives
//!
//! ```text
//! E_i = r_i * x_i * P(x_tot) - c_i * C_i(x_i)
//! ```
//!
//! where `P` is the productivity law ([`Productivity`]), `C_i` the
//! dimensionless cost curve ([`CostCurve`]) normalized to `C(0) = 0`,
//! `C'(0) = 1`, `c_i` the per-unit cost and `r_i` the return weight.
//! Equilibrium formulas only ever see the effective cost `c_i / r_i`.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Below this magnitude a logarithmic curvature is evaluated through its
/// second-order Taylor expansion.
pub const TAYLOR_CURVATURE: f64 = 1e-9;

/// Productivity law `P(x_tot)` of the commons; `P(0) = 1`, strictly decreasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Productivity {
    /// `P = exp(-x_tot)`.
    Exponential,
    /// `P = (1 + x_tot)^(-exponent)`.
    PowerLaw { exponent: f64 },
    /// `P = 1 - x_tot / x_max`, a commons of finite size.
    LinearFinite { x_max: f64 },
}

impl Productivity {
    pub fn power_law(exponent: f64) -> Result<Self> {
        let p = Productivity::PowerLaw { exponent };
        p.validate()?;
        Ok(p)
    }

    pub fn linear_finite(x_max: f64) -> Result<Self> {
        let p = Productivity::LinearFinite { x_max };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Productivity::Exponential => Ok(()),
            Productivity::PowerLaw { exponent } if !(exponent > 0.0 && exponent.is_finite()) => {
                Err(Error::InvalidParameter {
                    name: "gamma_p",
                    value: exponent,
                    reason: "power-law exponent must be positive and finite",
                })
            }
            Productivity::LinearFinite { x_max } if !(x_max > 0.0 && x_max.is_finite()) => {
                Err(Error::InvalidParameter {
                    name: "x_max",
                    value: x_max,
                    reason: "carrying capacity must be positive and finite",
                })
            }
            _ => Ok(()),
        }
    }

    /// Upper end of the domain, if the commons is finite.
    pub fn capacity(&self) -> Option<f64> {
        match *self {
            Productivity::LinearFinite { x_max } => Some(x_max),
            _ => None,
        }
    }

    fn check_domain(&self, x_tot: f64) -> Result<()> {
        self.validate()?;
        let ok = match *self {
            Productivity::LinearFinite { x_max } => (0.0..=x_max).contains(&x_tot),
            _ => x_tot >= 0.0 && x_tot.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "x_tot",
                value: x_tot,
                domain: match self.capacity() {
                    Some(x_max) => format!("[0, {x_max}]"),
                    None => "[0, inf)".to_string(),
                },
            })
        }
    }

    /// `P(x_tot)`. Exactly 1 at zero, exactly 0 at a finite capacity.
    pub fn value(&self, x_tot: f64) -> Result<f64> {
        self.check_domain(x_tot)?;
        Ok(match *self {
            Productivity::Exponential => (-x_tot).exp(),
            Productivity::PowerLaw { exponent } => (1.0 + x_tot).powf(-exponent),
            Productivity::LinearFinite { x_max } => 1.0 - x_tot / x_max,
        })
    }

    /// `P'(x_tot)`, always negative.
    pub fn slope(&self, x_tot: f64) -> Result<f64> {
        self.check_domain(x_tot)?;
        Ok(match *self {
            Productivity::Exponential => -(-x_tot).exp(),
            Productivity::PowerLaw { exponent } => -exponent * (1.0 + x_tot).powf(-exponent - 1.0),
            Productivity::LinearFinite { x_max } => -1.0 / x_max,
        })
    }
}

impl fmt::Display for Productivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Productivity::Exponential => write!(f, "exponential"),
            Productivity::PowerLaw { exponent } => write!(f, "power-law(gamma_p={exponent})"),
            Productivity::LinearFinite { x_max } => write!(f, "linear-finite(x_max={x_max})"),
        }
    }
}

/// Dimensionless cost curve `C(x)` with `C(0) = 0` and `C'(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostCurve {
    /// `C(x) = x`: constant marginal cost.
    Linear,
    /// `C(x) = ln(1 + gamma x) / gamma`. Concave for `gamma > 0` (economies of
    /// scale), convex with domain `x < 1/|gamma|` for `gamma < 0`.
    Logarithmic { curvature: f64 },
}

impl CostCurve {
    /// `Linear` for a zero curvature, `Logarithmic` otherwise.
    pub fn from_curvature(curvature: f64) -> Result<Self> {
        if !curvature.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: curvature,
                reason: "curvature must be finite",
            });
        }
        Ok(if curvature == 0.0 {
            CostCurve::Linear
        } else {
            CostCurve::Logarithmic { curvature }
        })
    }

    /// Curvature `gamma`; 0 for linear costs.
    pub fn curvature(&self) -> f64 {
        match *self {
            CostCurve::Linear => 0.0,
            CostCurve::Logarithmic { curvature } => curvature,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, CostCurve::Linear)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CostCurve::Logarithmic { curvature } if curvature == 0.0 || !curvature.is_finite() => {
                Err(Error::InvalidParameter {
                    name: "gamma",
                    value: curvature,
                    reason: "logarithmic curvature must be finite and nonzero",
                })
            }
            _ => Ok(()),
        }
    }

    /// Exclusive upper bound on investments (convex logarithmic costs only).
    pub fn domain_limit(&self) -> Option<f64> {
        match *self {
            CostCurve::Logarithmic { curvature } if curvature < 0.0 => Some(-1.0 / curvature),
            _ => None,
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        self.validate()?;
        let below_limit = self.domain_limit().is_none_or(|limit| x < limit);
        if x >= 0.0 && x.is_finite() && below_limit {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "x_i",
                value: x,
                domain: match self.domain_limit() {
                    Some(limit) => format!("[0, {limit})"),
                    None => "[0, inf)".to_string(),
                },
            })
        }
    }

    /// `C(x)`.
    pub fn value(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match *self {
            CostCurve::Linear => x,
            CostCurve::Logarithmic { curvature } if curvature.abs() < TAYLOR_CURVATURE => {
                x - 0.5 * curvature * x * x
            }
            CostCurve::Logarithmic { curvature } => (curvature * x).ln_1p() / curvature,
        })
    }

    /// `C'(x)`.
    pub fn marginal(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match *self {
            CostCurve::Linear => 1.0,
            CostCurve::Logarithmic { curvature } if curvature.abs() < TAYLOR_CURVATURE => {
                1.0 - curvature * x
            }
            CostCurve::Logarithmic { curvature } => 1.0 / (1.0 + curvature * x),
        })
    }

    /// `C''(x)`.
    pub fn curvature_at(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match *self {
            CostCurve::Linear => 0.0,
            CostCurve::Logarithmic { curvature } => {
                let d = 1.0 + curvature * x;
                -curvature / (d * d)
            }
        })
    }
}

/// Monetary cost `c * C(x)`.
pub fn cost_value(curve: &CostCurve, c: f64, x: f64) -> Result<f64> {
    Ok(c * curve.value(x)?)
}

/// Stable identity of an agent; survives reordering and decimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    /// Per-unit (initial marginal) cost `c_i > 0`.
    pub cost: f64,
    pub curve: CostCurve,
    /// Return weight `r_i > 0`.
    pub weight: f64,
}

impl Agent {
    pub fn new(id: u32, cost: f64, curve: CostCurve) -> Result<Self> {
        Self::weighted(id, cost, curve, 1.0)
    }

    pub fn weighted(id: u32, cost: f64, curve: CostCurve, weight: f64) -> Result<Self> {
        let agent = Agent {
            id: AgentId(id),
            cost,
            curve,
            weight,
        };
        agent.validate()?;
        Ok(agent)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c",
                value: self.cost,
                reason: "per-unit cost must be positive and finite",
            });
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: self.weight,
                reason: "return weight must be positive and finite",
            });
        }
        self.curve.validate()
    }

    /// Effective cost `c / r` used by every equilibrium formula.
    pub fn effective_cost(&self) -> f64 {
        self.cost / self.weight
    }

    pub fn with_cost(&self, cost: f64) -> Result<Self> {
        let agent = Agent { cost, ..*self };
        agent.validate()?;
        Ok(agent)
    }

    /// Payoff `r x_i P(x_tot) - c C(x_i)`.
    pub fn payoff(&self, x_i: f64, x_tot: f64, productivity: &Productivity) -> Result<f64> {
        check_share(x_i, x_tot)?;
        let p = productivity.value(x_tot)?;
        let cost = cost_value(&self.curve, self.cost, x_i)?;
        Ok(self.weight * x_i * p - cost)
    }

    /// `dE_i/dx_i` with the other agents held fixed, so `x_tot` moves one-for-one.
    pub fn payoff_gradient(&self, x_i: f64, x_tot: f64, productivity: &Productivity) -> Result<f64> {
        check_share(x_i, x_tot)?;
        let p = productivity.value(x_tot)?;
        let dp = productivity.slope(x_tot)?;
        Ok(self.weight * (p + x_i * dp) - self.cost * self.curve.marginal(x_i)?)
    }
}

fn check_share(x_i: f64, x_tot: f64) -> Result<()> {
    // Sums of nonnegative shares may land an ulp below a single share.
    if x_i <= x_tot + 1e-12 * (1.0 + x_tot.abs()) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "x_i",
            value: x_i,
            domain: format!("[0, x_tot = {x_tot}]"),
        })
    }
}

pub fn payoff(agent: &Agent, x_i: f64, x_tot: f64, productivity: &Productivity) -> Result<f64> {
    agent.payoff(x_i, x_tot, productivity)
}

pub fn payoff_gradient(agent: &Agent, x_i: f64, x_tot: f64, productivity: &Productivity) -> Result<f64> {
    agent.payoff_gradient(x_i, x_tot, productivity)
}

/// Ordered, nonempty collection of agents with unique identities.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    agents: Vec<Agent>,
}

impl Population {
    pub fn new(agents: Vec<Agent>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::InvalidPopulation("population is empty".into()));
        }
        let mut seen = HashSet::with_capacity(agents.len());
        for agent in &agents {
            agent.validate()?;
            if !seen.insert(agent.id) {
                return Err(Error::InvalidPopulation(format!("duplicate agent id {}", agent.id)));
            }
        }
        Ok(Population { agents })
    }

    /// Agents with ids `0..costs.len()` sharing one cost curve.
    pub fn from_costs(costs: &[f64], curve: CostCurve) -> Result<Self> {
        let agents = costs
            .iter()
            .enumerate()
            .map(|(i, &c)| Agent::new(i as u32, c, curve))
            .collect::<Result<Vec<_>>>()?;
        Population::new(agents)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Agent> {
        self.agents.iter()
    }

    pub fn get(&self, id: AgentId) -> Option<&Agent> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn position(&self, id: AgentId) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }

    /// Sub-population at the given positions, in order.
    pub fn subset(&self, positions: &[usize]) -> Result<Population> {
        Population::new(positions.iter().map(|&i| self.agents[i]).collect())
    }

    /// A copy with one agent's per-unit cost replaced.
    pub fn with_cost(&self, id: AgentId, cost: f64) -> Result<Population> {
        let mut agents = self.agents.clone();
        let agent = agents
            .iter_mut()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::InvalidPopulation(format!("no agent with id {id}")))?;
        *agent = agent.with_cost(cost)?;
        Ok(Population { agents })
    }

    /// A copy with an extra agent appended.
    pub fn with_agent(&self, agent: Agent) -> Result<Population> {
        let mut agents = self.agents.clone();
        agents.push(agent);
        Population::new(agents)
    }

    pub fn all_linear(&self) -> bool {
        self.agents.iter().all(|a| a.curve.is_linear())
    }

    /// Arithmetic mean of the effective costs at the given positions.
    pub fn mean_effective_cost(&self, positions: &[usize]) -> f64 {
        if positions.is_empty() {
            return f64::NAN;
        }
        positions.iter().map(|&i| self.agents[i].effective_cost()).sum::<f64>() / positions.len() as f64
    }

    pub fn next_id(&self) -> u32 {
        self.agents.iter().map(|a| a.id.0).max().map_or(0, |m| m + 1)
    }
}

impl<'a> IntoIterator for &'a Population {
    type Item = &'a Agent;
    type IntoIter = std::slice::Iter<'a, Agent>;

    fn into_iter(self) -> Self::IntoIter {
        self.agents.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn productivity_is_normalized_at_zero() {
        for p in [
            Productivity::Exponential,
            Productivity::PowerLaw { exponent: 2.0 },
            Productivity::LinearFinite { x_max: 2.0 },
        ] {
            assert_eq!(p.value(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn productivity_examples() {
        let p = Productivity::Exponential;
        assert!(close(p.value(1.691).unwrap(), 0.184, 1e-3));
        assert_eq!(p.slope(0.0).unwrap(), -1.0);

        let lin = Productivity::LinearFinite { x_max: 2.0 };
        assert_eq!(lin.value(1.0).unwrap(), 0.5);
        assert_eq!(lin.value(2.0).unwrap(), 0.0);
        for x in [0.0, 0.3, 1.9, 2.0] {
            assert_eq!(lin.slope(x).unwrap(), -0.5);
        }

        let pl = Productivity::PowerLaw { exponent: 2.0 };
        assert!(close(pl.slope(1.0).unwrap(), -0.25, 1e-15));
        let fd = central_difference(|x| pl.value(x).unwrap(), 1.0, 1e-6);
        assert!(close(fd, -0.25, 1e-9));
    }

    #[test]
    fn productivity_domain_errors() {
        let lin = Productivity::LinearFinite { x_max: 2.0 };
        assert!(matches!(lin.value(2.0 + 1e-12), Err(Error::Domain { .. })));
        assert!(matches!(lin.slope(3.0), Err(Error::Domain { .. })));
        assert!(Productivity::Exponential.value(-1e-3).is_err());
        assert!(Productivity::power_law(0.0).is_err());
        assert!(Productivity::linear_finite(-1.0).is_err());
        assert!(Productivity::PowerLaw { exponent: -1.0 }.value(1.0).is_err());
    }

    #[test]
    fn cost_examples() {
        assert!(close(cost_value(&CostCurve::Linear, 0.2, 3.0).unwrap(), 0.6, 1e-15));
        let log1 = CostCurve::Logarithmic { curvature: 1.0 };
        assert!(close(cost_value(&log1, 1.0, std::f64::consts::E - 1.0).unwrap(), 1.0, 1e-15));

        let near_zero = CostCurve::Logarithmic { curvature: 1e-12 };
        let a = cost_value(&near_zero, 1.0, 0.01).unwrap();
        let b = cost_value(&CostCurve::Linear, 1.0, 0.01).unwrap();
        assert!(close(a, b, 1e-4));
    }

    #[test]
    fn taylor_branch_matches_closed_form_at_threshold() {
        let x = 0.3;
        let g = TAYLOR_CURVATURE;
        let taylor = CostCurve::Logarithmic { curvature: 0.5 * g }.value(x).unwrap();
        let closed = CostCurve::Logarithmic { curvature: 2.0 * g }.value(x).unwrap();
        assert!(close(taylor, closed, 1e-9));
    }

    #[test]
    fn convex_cost_domain() {
        let convex = CostCurve::Logarithmic { curvature: -2.0 };
        assert_eq!(convex.domain_limit(), Some(0.5));
        assert!(convex.value(0.49).is_ok());
        assert!(matches!(convex.value(0.5), Err(Error::Domain { .. })));
        assert!(CostCurve::Logarithmic { curvature: 0.0 }.validate().is_err());
        assert_eq!(CostCurve::from_curvature(0.0).unwrap(), CostCurve::Linear);
    }

    #[test]
    fn cost_normalization_slope_at_origin() {
        for curve in [
            CostCurve::Linear,
            CostCurve::Logarithmic { curvature: 1.5 },
            CostCurve::Logarithmic { curvature: -0.7 },
            CostCurve::Logarithmic { curvature: 3e-10 },
        ] {
            assert_eq!(curve.value(0.0).unwrap(), 0.0);
            assert_eq!(curve.marginal(0.0).unwrap(), 1.0);
            let h = 1e-8;
            let c = 0.37;
            let ratio = cost_value(&curve, c, h).unwrap() / h;
            assert!(((ratio - c) / c).abs() < 1e-4, "{curve:?}: {ratio}");
        }
    }

    #[test]
    fn payoff_examples() {
        let p = Productivity::Exponential;
        let agent = Agent::new(0, 0.15, CostCurve::Linear).unwrap();
        assert!(close(agent.payoff(0.698, 0.698, &p).unwrap(), 0.243, 1e-3));
        assert_eq!(agent.payoff(0.0, 1.3, &p).unwrap(), 0.0);

        let agent = Agent::new(0, 0.5, CostCurve::Linear).unwrap();
        let expected = (-1.0f64).exp() - 0.5;
        assert!(close(agent.payoff(1.0, 1.0, &p).unwrap(), expected, 1e-15));
        assert!(close(expected, -0.1321, 1e-4));
    }

    #[test]
    fn gradient_at_origin_is_profitability_gap() {
        let p = Productivity::Exponential;
        let c_max: f64 = 0.179;
        let x_tot = -c_max.ln();
        let marginal = Agent::new(0, c_max, CostCurve::Linear).unwrap();
        assert!(marginal.payoff_gradient(0.0, x_tot, &p).unwrap().abs() < 1e-15);
        let cheap = Agent::new(1, 0.1, CostCurve::Logarithmic { curvature: 1.5 }).unwrap();
        assert!(close(cheap.payoff_gradient(0.0, x_tot, &p).unwrap(), 0.079, 1e-3));
    }

    #[test]
    fn population_rejects_duplicates_and_empty() {
        assert!(Population::new(vec![]).is_err());
        let a = Agent::new(3, 0.2, CostCurve::Linear).unwrap();
        assert!(Population::new(vec![a, a]).is_err());
        assert!(Agent::new(0, 0.0, CostCurve::Linear).is_err());
        assert!(Agent::weighted(0, 0.1, CostCurve::Linear, -1.0).is_err());
    }

    #[test]
    fn mean_effective_cost_over_subset() {
        let agents = vec![
            Agent::weighted(0, 0.2, CostCurve::Linear, 2.0).unwrap(),
            Agent::new(1, 0.3, CostCurve::Linear).unwrap(),
            Agent::new(2, 0.5, CostCurve::Linear).unwrap(),
        ];
        let pop = Population::new(agents).unwrap();
        assert!(close(pop.mean_effective_cost(&[0, 1]), 0.2, 1e-15));
        assert!(close(pop.mean_effective_cost(&[0, 1, 2]), 0.3, 1e-15));
    }

    fn productivity_strategy() -> impl Strategy<Value = Productivity> {
        prop_oneof![
            Just(Productivity::Exponential),
            (0.2f64..5.0).prop_map(|exponent| Productivity::PowerLaw { exponent }),
            (0.5f64..10.0).prop_map(|x_max| Productivity::LinearFinite { x_max }),
        ]
    }

    fn curve_strategy() -> impl Strategy<Value = CostCurve> {
        prop_oneof![
            Just(CostCurve::Linear),
            (0.05f64..3.0).prop_map(|curvature| CostCurve::Logarithmic { curvature }),
            (-3.0f64..-0.05).prop_map(|curvature| CostCurve::Logarithmic { curvature }),
        ]
    }

    proptest! {
        #[test]
        fn productivity_strictly_decreasing(p in productivity_strategy(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let scale = p.capacity().unwrap_or(20.0);
            let (lo, hi) = (a.min(b) * scale, a.max(b) * scale);
            prop_assume!(hi - lo > 1e-9 * scale);
            prop_assert!(p.value(lo).unwrap() > p.value(hi).unwrap());
            prop_assert!(p.slope(lo).unwrap() < 0.0);
        }

        #[test]
        fn slope_matches_finite_difference(p in productivity_strategy(), u in 0.01f64..0.99) {
            let x = u * p.capacity().unwrap_or(10.0);
            let h = 1e-6;
            let fd = central_difference(|x| p.value(x).unwrap(), x, h);
            let analytic = p.slope(x).unwrap();
            prop_assert!((fd - analytic).abs() <= 1e-6 * (1.0 + analytic.abs()));
        }

        #[test]
        fn gradient_matches_finite_difference(
            p in productivity_strategy(),
            curve in curve_strategy(),
            c in 0.01f64..1.0,
            r in 0.5f64..2.0,
            share in 0.05f64..0.95,
            others_frac in 0.0f64..0.9,
        ) {
            let agent = Agent::weighted(0, c, curve, r).unwrap();
            let x_limit = curve.domain_limit().unwrap_or(f64::INFINITY).min(3.0);
            let x_i = share * x_limit;
            let others = others_frac * p.capacity().map_or(3.0, |cap| (cap - x_i).max(0.0));
            prop_assume!(p.capacity().is_none_or(|cap| x_i + others + 1e-5 < cap));
            let h = 1e-6;
            let fd = central_difference(|x| agent.payoff(x, x + others, &p).unwrap(), x_i, h);
            let g = agent.payoff_gradient(x_i, x_i + others, &p).unwrap();
            prop_assert!((fd - g).abs() <= 1e-6 * (1.0 + g.abs()), "fd {} vs {}", fd, g);
        }

        #[test]
        fn return_weight_reduces_to_rescaled_cost(
            p in productivity_strategy(),
            curve in curve_strategy(),
            c in 0.01f64..1.0,
            r in 0.2f64..5.0,
            share in 0.0f64..0.95,
            others_frac in 0.0f64..0.9,
        ) {
            let x_limit = curve.domain_limit().unwrap_or(f64::INFINITY).min(3.0);
            let x_i = share * x_limit;
            let others = others_frac * p.capacity().map_or(3.0, |cap| (cap - x_i).max(0.0));
            prop_assume!(p.capacity().is_none_or(|cap| x_i + others <= cap));
            let weighted = Agent::weighted(0, c, curve, r).unwrap();
            let rescaled = Agent::new(0, c / r, curve).unwrap();
            let lhs = weighted.payoff(x_i, x_i + others, &p).unwrap();
            let rhs = r * rescaled.payoff(x_i, x_i + others, &p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
