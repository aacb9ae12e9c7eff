use crate::error::{Error, Result, RunawayBound};
use crate::model::Productivity;

use super::{bisect_decreasing, SolverConfig};

/// `P(x) + (x/n) P'(x) - c_bar`; zero at the linear-cost equilibrium.
pub fn self_consistency_residual(x_tot: f64, n: usize, c_bar: f64, productivity: &Productivity) -> Result<f64> {
    let p = productivity.value(x_tot)?;
    let dp = productivity.slope(x_tot)?;
    Ok(p + x_tot / n as f64 * dp - c_bar)
}

/// Total investment of `n` selfish agents with linear costs and mean
/// effective cost `c_bar`.
///
/// Returns 0 when `c_bar >= 1`. For a power-law commons in the runaway
/// regime (`n >= gamma_p`) the root moves off to infinity as `c_bar -> 0`;
/// when it lies beyond `cfg.max_bracket` the result is
/// [`Error::NoSolution`] carrying the runaway bound.
pub fn solve_x_tot(n: usize, c_bar: f64, productivity: &Productivity, cfg: &SolverConfig) -> Result<f64> {
    productivity.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: 0.0,
            reason: "need at least one agent",
        });
    }
    if !(c_bar >= 0.0 && c_bar.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "c_bar",
            value: c_bar,
            reason: "mean cost must be nonnegative and finite",
        });
    }
    if c_bar >= 1.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let upper = match *productivity {
        Productivity::LinearFinite { x_max } => return Ok((1.0 - c_bar) * nf / (nf + 1.0) * x_max),
        Productivity::Exponential => nf,
        Productivity::PowerLaw { exponent } => match runaway_bound(exponent, n) {
            // The residual equals -c_bar at N/(gamma_p - N).
            RunawayBound::Finite(limit) => limit,
            RunawayBound::Divergent => {
                let mut hi = 1.0f64;
                loop {
                    if self_consistency_residual(hi, n, c_bar, productivity)? <= 0.0 {
                        break hi;
                    }
                    if hi >= cfg.max_bracket {
                        return Err(Error::NoSolution {
                            n,
                            c_bar,
                            bracket: cfg.max_bracket,
                            bound: RunawayBound::Divergent,
                        });
                    }
                    hi = (2.0 * hi).min(cfg.max_bracket);
                }
            }
        },
    };
    let residual = |x: f64| self_consistency_residual(x, n, c_bar, productivity);
    let root = bisect_decreasing(residual, 0.0, upper, cfg.max_bisect_iters)?;
    let r = residual(root)?;
    if r.abs() > cfg.root_tol {
        return Err(Error::NonConvergence {
            iterations: cfg.max_bisect_iters as u64,
            residual: r,
        });
    }
    Ok(root)
}

/// Limit of the total investment for `N -> infinity`, i.e. the root of
/// `P(x) = c_bar`.
pub fn large_n_limit(c_bar: f64, productivity: &Productivity) -> Result<f64> {
    productivity.validate()?;
    if !(c_bar > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c_bar",
            value: c_bar,
            reason: "large-N limit needs a positive mean cost",
        });
    }
    if c_bar >= 1.0 {
        return Ok(0.0);
    }
    Ok(match *productivity {
        Productivity::Exponential => (1.0 / c_bar).ln(),
        Productivity::PowerLaw { exponent } => (1.0 / c_bar).powf(1.0 / exponent) - 1.0,
        Productivity::LinearFinite { x_max } => (1.0 - c_bar) * x_max,
    })
}

/// Fate of the total investment of `n` agents on a power-law commons as
/// the mean cost vanishes: finite `N/(gamma_p - N)` or divergent when
/// `N >= gamma_p`.
pub fn runaway_bound(exponent: f64, n: usize) -> RunawayBound {
    let nf = n as f64;
    if nf >= exponent {
        RunawayBound::Divergent
    } else {
        RunawayBound::Finite(nf / (exponent - nf))
    }
}

/// Offset fraction `alpha = N/(N-1) / x_tot` of the bulk in the
/// single-oligarch construction (large-N form).
pub fn oligarch_alpha(n: usize, x_tot: f64) -> f64 {
    let nf = n as f64;
    nf / (nf - 1.0) / x_tot
}
