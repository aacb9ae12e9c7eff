//! Individual best responses at a given state of the commons.

use crate::error::{Error, Result};
use crate::model::Productivity;

/// Linear-cost optimum on an exponential commons, `max(0, 1 - c/c_max)`.
pub fn optimal_investment_linear(c_eff: f64, c_max: f64) -> f64 {
    (1.0 - c_eff / c_max).max(0.0)
}

/// Linear-cost optimum for a general productivity law, `max(0, (c_max - c)/(-P'))`.
pub fn optimal_investment_with_slope(c_eff: f64, c_max: f64, slope: f64) -> f64 {
    ((c_max - c_eff) / -slope).max(0.0)
}

/// Which root of the stationarity quadratic the gradient flow settles on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootBranch {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryRoots {
    pub x_minus: f64,
    pub x_plus: f64,
    pub stable: RootBranch,
}

impl StationaryRoots {
    pub fn stable_root(&self) -> f64 {
        match self.stable {
            RootBranch::Minus => self.x_minus,
            RootBranch::Plus => self.x_plus,
        }
    }

    pub fn unstable_root(&self) -> f64 {
        match self.stable {
            RootBranch::Minus => self.x_plus,
            RootBranch::Plus => self.x_minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stationary {
    /// The cost exceeds the saddle-node value; the gradient never vanishes.
    NoStationaryPoint,
    Roots(StationaryRoots),
}

impl Stationary {
    pub fn roots(&self) -> Option<StationaryRoots> {
        match self {
            Stationary::Roots(r) => Some(*r),
            Stationary::NoStationaryPoint => None,
        }
    }
}

/// Half-sum `B` and product `Q` of the roots of
/// `(p + x dp)(1 + gamma x) = c_eff`, written as `x^2 - 2B x + Q = 0`.
fn quadratic_terms(c_eff: f64, p: f64, dp: f64, gamma: f64) -> (f64, f64) {
    let lead = gamma * dp;
    let half_sum = -(dp + gamma * p) / (2.0 * lead);
    let product = (p - c_eff) / lead;
    (half_sum, product)
}

/// Discriminant `B^2 - Q` of the logarithmic-cost stationarity condition
/// with the commons frozen at productivity `p` and slope `dp`.
pub fn stationarity_discriminant(c_eff: f64, p: f64, dp: f64, gamma: f64) -> f64 {
    let (b, q) = quadratic_terms(c_eff, p, dp, gamma);
    b * b - q
}

/// Roots of `(p + x dp)(1 + gamma x) = c_eff` for logarithmic costs with
/// the commons frozen at productivity `p` and slope `dp < 0`.
///
/// The upper root is dynamically stable for concave costs (`gamma > 0`),
/// the lower one for convex costs.
pub fn stationary_roots(c_eff: f64, p: f64, dp: f64, gamma: f64) -> Stationary {
    let (b, q) = quadratic_terms(c_eff, p, dp, gamma);
    let mut disc = b * b - q;
    // Rounding at the saddle node itself.
    let slack = 4.0 * f64::EPSILON * (b * b + q.abs());
    if disc < 0.0 && disc >= -slack {
        disc = 0.0;
    }
    if !(disc >= 0.0) {
        return Stationary::NoStationaryPoint;
    }
    let s = disc.sqrt();
    // Large-magnitude root first; the other from the product avoids
    // cancellation when gamma is tiny.
    let big = if b < 0.0 { b - s } else { b + s };
    let small = if big != 0.0 { q / big } else { 0.0 };
    let (x_minus, x_plus) = if big < small { (big, small) } else { (small, big) };
    Stationary::Roots(StationaryRoots {
        x_minus,
        x_plus,
        stable: if gamma > 0.0 { RootBranch::Plus } else { RootBranch::Minus },
    })
}

/// Stationary investments for logarithmic costs on an exponential commons
/// with profitability boundary `c_max`:
/// `x = (gamma-1)/(2 gamma) +- sqrt(((gamma-1)/(2 gamma))^2 + (c_max - c)/(gamma c_max))`.
pub fn optimal_investment_concave(c_eff: f64, c_max: f64, gamma: f64) -> Stationary {
    stationary_roots(c_eff, c_max, -c_max, gamma)
}

/// Saddle-node cost `c_max (gamma+1)^2 / (4 gamma)` beyond which no
/// stationary investment exists. Infinite at `gamma = 0`.
pub fn c_node(c_max: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return f64::INFINITY;
    }
    c_max * (gamma + 1.0) * (gamma + 1.0) / (4.0 * gamma)
}

/// Investment at the saddle node, `(gamma - 1)/(2 gamma)`.
pub fn x_node(gamma: f64) -> f64 {
    (gamma - 1.0) / (2.0 * gamma)
}

/// Equilibrium payoff `(c_max - c)^2 / (-P'(x_tot))` of a linear-cost agent
/// with effective cost `c_eff`, where `c_max = P(x_tot)`.
pub fn dispersion_payoff(c_eff: f64, x_tot: f64, productivity: &Productivity) -> Result<f64> {
    let c_max = productivity.value(x_tot)?;
    let slope = productivity.slope(x_tot)?;
    if c_eff > c_max {
        return Err(Error::Domain {
            what: "c_eff",
            value: c_eff,
            domain: format!("[0, c_max = {c_max}]"),
        });
    }
    let gap = c_max - c_eff;
    Ok(gap * gap / -slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_examples() {
        assert_eq!(optimal_investment_linear(0.3, 0.3), 0.0);
        assert_eq!(optimal_investment_linear(0.0, 0.4), 1.0);
        assert_eq!(optimal_investment_linear(0.5, 0.4), 0.0);
        let x = optimal_investment_linear(0.15, 0.184);
        assert!((x - 0.1848).abs() < 5e-3);
        // exponential slope reproduces the exponential formula
        let c_max = 0.184;
        assert!((optimal_investment_with_slope(0.15, c_max, -c_max) - x).abs() < 1e-15);
    }

    #[test]
    fn small_curvature_recovers_linear_root() {
        let (c, c_max) = (0.12, 0.2);
        for gamma in [1e-6, 1e-9, 1e-12, -1e-9] {
            let roots = optimal_investment_concave(c, c_max, gamma).roots().unwrap();
            assert!((roots.stable_root() - (1.0 - c / c_max)).abs() < 1e-5, "{gamma}: {roots:?}");
        }
    }

    #[test]
    fn double_root_at_saddle_node() {
        let gamma = 1.5;
        let c_max = 0.2;
        let roots = optimal_investment_concave(c_node(c_max, gamma), c_max, gamma).roots().unwrap();
        assert!((roots.x_minus - 1.0 / 6.0).abs() < 1e-7);
        assert!((roots.x_plus - 1.0 / 6.0).abs() < 1e-7);
        assert!(matches!(
            optimal_investment_concave(c_node(c_max, gamma) * (1.0 + 1e-9), c_max, gamma),
            Stationary::NoStationaryPoint
        ));
    }

    #[test]
    fn unit_curvature_at_boundary() {
        let roots = optimal_investment_concave(0.3, 0.3, 1.0).roots().unwrap();
        assert_eq!(roots.x_minus, 0.0);
        assert_eq!(roots.x_plus, 0.0);
        assert_eq!(roots.stable, RootBranch::Plus);
    }

    #[test]
    fn convex_costs_take_lower_root() {
        let gamma = -1.0;
        let (c, c_max) = (0.1, 0.2);
        let roots = optimal_investment_concave(c, c_max, gamma).roots().unwrap();
        assert_eq!(roots.stable, RootBranch::Minus);
        // (1 - x)(1 - x) c_max = c
        assert!((roots.stable_root() - (1.0 - (c / c_max).sqrt())).abs() < 1e-14);
    }

    #[test]
    fn roots_solve_stationarity() {
        for gamma in [-2.0, -0.3, 0.4, 1.0, 1.5, 3.0] {
            for c in [0.05, 0.15, 0.2, 0.21] {
                let c_max = 0.2;
                if let Stationary::Roots(r) = optimal_investment_concave(c, c_max, gamma) {
                    for x in [r.x_minus, r.x_plus] {
                        let lhs = (1.0 + x * (gamma - 1.0) - gamma * x * x) * c_max;
                        assert!((lhs - c).abs() < 1e-12, "gamma {gamma} c {c} x {x}");
                    }
                }
            }
        }
    }

    #[test]
    fn c_node_values() {
        assert_eq!(c_node(0.3, 1.0), 0.3);
        assert!((c_node(0.2, 1.5) - 0.2 * 6.25 / 6.0).abs() < 1e-15);
        assert!((c_node(0.2, 1.5) - 0.20833).abs() < 1e-5);
        assert!(c_node(0.2, 1e-6) > 1e4);
        assert!(c_node(0.2, 1e-6) > c_node(0.2, 1e-3));
        for gamma in [0.1, 0.5, 0.99, 1.01, 2.0, 10.0] {
            assert!(c_node(0.2, gamma) > 0.2);
        }
    }

    #[test]
    fn discriminant_vanishes_at_c_node() {
        for gamma in [1.1, 1.5, 3.0, 0.5] {
            let c_max = 0.17;
            let d = stationarity_discriminant(c_node(c_max, gamma), c_max, -c_max, gamma);
            assert!(d.abs() < 1e-14, "gamma {gamma}: {d}");
        }
    }

    #[test]
    fn dispersion_examples() {
        let p = Productivity::Exponential;
        let x_tot: f64 = 1.691;
        let c_max = (-x_tot).exp();
        assert_eq!(dispersion_payoff(c_max, x_tot, &p).unwrap(), 0.0);
        assert!((dispersion_payoff(0.0, x_tot, &p).unwrap() - c_max).abs() < 1e-15);
        assert!(dispersion_payoff(c_max + 1e-9, x_tot, &p).is_err());

        // at the rounded boundary c_max = 0.184
        let x_tot = -(0.184f64).ln();
        let e = dispersion_payoff(0.15, x_tot, &p).unwrap();
        assert!((e - 0.00628).abs() < 5e-6, "{e}");
        let agent = crate::model::Agent::new(0, 0.15, crate::model::CostCurve::Linear).unwrap();
        let x_i = optimal_investment_linear(0.15, 0.184);
        let direct = agent.payoff(x_i, x_tot, &p).unwrap();
        assert!((direct - e).abs() <= 1e-10 * e);

        let fin = Productivity::LinearFinite { x_max: 2.0 };
        let e = dispersion_payoff(0.1, 1.0, &fin).unwrap();
        assert!((e - 0.4 * 0.4 * 2.0).abs() < 1e-15);
    }
}
