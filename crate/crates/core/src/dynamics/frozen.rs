use crate::equilibrium::{c_node, optimal_investment_concave, x_node, Stationary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// Vanishing flow slope: a bifurcation point.
    Marginal,
}

impl Stability {
    fn from_slope(slope: f64, scale: f64) -> Self {
        if slope.abs() <= 1e-12 * scale.max(1.0) {
            Stability::Marginal
        } else if slope < 0.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

/// Non-negative stationary investments of one cost under a frozen commons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub c: f64,
    pub x_minus: Option<(f64, Stability)>,
    pub x_plus: Option<(f64, Stability)>,
    /// Stability of the exit line `x = 0`.
    pub axis: Stability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrozenFlowDiagram {
    pub gamma: f64,
    pub c_max: f64,
    pub branches: Vec<BranchPoint>,
    /// `(c_node, x_node)`.
    pub saddle_node: (f64, f64),
    /// `(c_max, 0)`.
    pub transcritical: (f64, f64),
}

/// Flow `dE/dx` of a logarithmic-cost agent when `P = c_max` and
/// `P' = -c_max` are held fixed.
pub fn frozen_gradient(c: f64, x: f64, gamma: f64, c_max: f64) -> f64 {
    (1.0 - x) * c_max - c / (1.0 + gamma * x)
}

pub fn frozen_gradient_slope(c: f64, x: f64, gamma: f64, c_max: f64) -> f64 {
    let d = 1.0 + gamma * x;
    -c_max + c * gamma / (d * d)
}

fn check(gamma: f64, c_max: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "frozen diagram needs concave costs (gamma > 0)",
        });
    }
    if !(c_max > 0.0 && c_max < 1.0) {
        return Err(Error::Domain {
            what: "c_max",
            value: c_max,
            domain: "(0, 1)".into(),
        });
    }
    Ok(())
}

/// Bifurcation diagram of a single agent against a frozen commons.
pub fn frozen_flow(costs: &[f64], gamma: f64, c_max: f64) -> Result<FrozenFlowDiagram> {
    check(gamma, c_max)?;
    let classify = |c: f64, x: f64| {
        (x >= 0.0).then(|| (x, Stability::from_slope(frozen_gradient_slope(c, x, gamma, c_max), c_max)))
    };
    let branches = costs
        .iter()
        .map(|&c| {
            let (x_minus, x_plus) = match optimal_investment_concave(c, c_max, gamma) {
                Stationary::Roots(r) => (classify(c, r.x_minus), classify(c, r.x_plus)),
                Stationary::NoStationaryPoint => (None, None),
            };
            let axis = Stability::from_slope(c_max - c, c_max);
            BranchPoint { c, x_minus, x_plus, axis }
        })
        .collect();
    Ok(FrozenFlowDiagram {
        gamma,
        c_max,
        branches,
        saddle_node: (c_node(c_max, gamma), x_node(gamma)),
        transcritical: (c_max, 0.0),
    })
}

/// Locates the fold numerically: the cost at which the discriminant of
/// `gamma c_max x^2 - c_max (gamma - 1) x + (c - c_max) = 0` vanishes.
pub fn detect_fold(c_max: f64, gamma: f64) -> Result<f64> {
    check(gamma, c_max)?;
    let disc = |c: f64| {
        let b = c_max * (gamma - 1.0);
        b * b + 4.0 * gamma * c_max * (c_max - c)
    };
    let mut lo = c_max;
    if disc(lo) <= 0.0 {
        return Ok(lo);
    }
    let mut hi = 2.0 * c_max;
    while disc(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if disc(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
