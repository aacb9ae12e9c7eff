use crate::equilibrium::{decimate, dispersion_payoff, solve_x_tot, EquilibriumState, SolverConfig};
use crate::error::{Error, Result};
use crate::model::Productivity;

use super::scenario::uniform_spread_population;

/// Ordinary least squares `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Largest absolute residual.
    pub max_residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::InvalidParameter {
            name: "points",
            value: n as f64,
            reason: "need at least two (x, y) pairs of equal length",
        });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            value: mx,
            reason: "abscissae must not all coincide",
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let slope_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        max_residual: residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudyResult {
    pub n_values: Vec<usize>,
    pub e_values: Vec<f64>,
    /// Finite-N closed form `c_bar/(1 - x_tot/N) (x_tot/N)^2`; exponential
    /// commons only.
    pub closed_form: Option<Vec<f64>>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
}

fn check_n_values(n_values: &[usize]) -> Result<()> {
    if n_values.len() < 3 || n_values.windows(2).any(|w| w[1] <= w[0]) || n_values[0] < 2 {
        return Err(Error::InvalidParameter {
            name: "N_values",
            value: n_values.len() as f64,
            reason: "need at least three strictly increasing sizes, all >= 2",
        });
    }
    Ok(())
}

fn check_c_bar(c_bar: f64) -> Result<()> {
    if !(c_bar > 0.0 && c_bar < 1.0) {
        return Err(Error::Domain {
            what: "c_bar",
            value: c_bar,
            domain: "(0, 1)".into(),
        });
    }
    Ok(())
}

fn log_slope(n_values: &[usize], e_values: &[f64]) -> Result<LineFit> {
    let lx: Vec<f64> = n_values.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = e_values.iter().map(|e| e.ln()).collect();
    fit_line(&lx, &ly)
}

/// Payoff of identical agents at cost `c_bar` as the population grows.
pub fn poverty_scaling_study(
    c_bar: f64,
    n_values: &[usize],
    productivity: &Productivity,
    cfg: &SolverConfig,
) -> Result<ScalingStudyResult> {
    check_c_bar(c_bar)?;
    check_n_values(n_values)?;
    let mut e_values = Vec::with_capacity(n_values.len());
    let mut closed = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let x_tot = solve_x_tot(n, c_bar, productivity, cfg)?;
        e_values.push(dispersion_payoff(c_bar, x_tot, productivity)?);
        let share = x_tot / n as f64;
        closed.push(c_bar / (1.0 - share) * share * share);
    }
    let fit = log_slope(n_values, &e_values)?;
    Ok(ScalingStudyResult {
        n_values: n_values.to_vec(),
        e_values,
        closed_form: matches!(productivity, Productivity::Exponential).then_some(closed),
        fitted_slope: fit.slope,
        slope_stderr: fit.slope_stderr,
    })
}

/// Largest survivor payoff of populations spread evenly over
/// `c_bar +- relative_spread (c_max - c_bar)`. Keeping the spread a fixed
/// fraction of the window means nobody is decimated at any size.
pub fn uniform_spread_study(
    c_bar: f64,
    relative_spread: f64,
    n_values: &[usize],
    productivity: &Productivity,
    cfg: &SolverConfig,
) -> Result<ScalingStudyResult> {
    check_c_bar(c_bar)?;
    check_n_values(n_values)?;
    if !(0.0..1.0).contains(&relative_spread) {
        return Err(Error::InvalidParameter {
            name: "relative_spread",
            value: relative_spread,
            reason: "must lie in [0, 1)",
        });
    }
    let mut e_values = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let x_tot = solve_x_tot(n, c_bar, productivity, cfg)?;
        let window = productivity.value(x_tot)? - c_bar;
        let pop = uniform_spread_population(n, c_bar, relative_spread * window)?;
        let state = decimate(&pop, productivity, cfg)?;
        e_values.push(state.survivors().map(|o| o.payoff).fold(0.0, f64::max));
    }
    let fit = log_slope(n_values, &e_values)?;
    Ok(ScalingStudyResult {
        n_values: n_values.to_vec(),
        e_values,
        closed_form: None,
        fitted_slope: fit.slope,
        slope_stderr: fit.slope_stderr,
    })
}

/// Relative cost window `x_tot/(N - x_tot)` above the mean within which
/// agents stay profitable; equals `(c_max - c_bar)/c_bar`.
pub fn participation_window(n: usize, c_bar: f64, productivity: &Productivity, cfg: &SolverConfig) -> Result<f64> {
    if !matches!(productivity, Productivity::Exponential) {
        return Err(Error::InvalidParameter {
            name: "productivity",
            value: f64::NAN,
            reason: "the window identity holds for the exponential commons only",
        });
    }
    check_c_bar(c_bar)?;
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            value: 0.0,
            reason: "must be positive",
        });
    }
    let x_tot = solve_x_tot(n, c_bar, productivity, cfg)?;
    Ok(x_tot / (n as f64 - x_tot))
}

/// Relative profit margin `(c_max - c)/c`.
pub fn profit_margin(c_eff: f64, c_max: f64) -> Result<f64> {
    if !(c_eff > 0.0) {
        return Err(Error::Domain {
            what: "c_eff",
            value: c_eff,
            domain: "(0, inf)".into(),
        });
    }
    Ok((c_max - c_eff) / c_eff)
}

/// Splits the mean survivor payoff into `(c_max - c_bar)^2/c_max` and
/// `var(c)/c_max` (exponential commons, linear costs).
pub fn mean_payoff_decomposition(state: &EquilibriumState) -> Result<(f64, f64)> {
    let n = state.n_survivors();
    if n == 0 {
        return Err(Error::EmptyMarket);
    }
    let c_bar = state.c_bar;
    let variance = state
        .survivors()
        .map(|o| (o.effective_cost - c_bar) * (o.effective_cost - c_bar))
        .sum::<f64>()
        / n as f64;
    let gap = state.c_max - c_bar;
    Ok((gap * gap / state.c_max, variance / state.c_max))
}

/// Fraction of survivors with cost in `[c_bar, c_max)`.
pub fn fraction_in_window(state: &EquilibriumState) -> f64 {
    let n = state.n_survivors();
    if n == 0 {
        return 0.0;
    }
    let inside = state
        .survivors()
        .filter(|o| o.effective_cost >= state.c_bar && o.effective_cost < state.c_max)
        .count();
    inside as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{oligarch_two_class_scenario, uniform_spread_population};
    use crate::model::{CostCurve, Population};

    const SIZES: [usize; 7] = [10, 20, 40, 80, 160, 320, 640];

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!(f.slope_stderr < 1e-15);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn poverty_slope() {
        let cfg = SolverConfig::default();
        for c_bar in [0.1, 0.2, 0.5] {
            let r = poverty_scaling_study(c_bar, &SIZES, &Productivity::Exponential, &cfg).unwrap();
            assert!((-2.05..=-1.95).contains(&r.fitted_slope), "{c_bar}: {}", r.fitted_slope);
            for (e, closed) in r.e_values.iter().zip(r.closed_form.as_ref().unwrap()) {
                assert!((e - closed).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn poverty_matches_direct_equilibrium() {
        let cfg = SolverConfig::default();
        let p = Productivity::Exponential;
        let r = poverty_scaling_study(0.2, &SIZES[..4], &p, &cfg).unwrap();
        for (&n, &e) in r.n_values.iter().zip(&r.e_values) {
            let pop = Population::from_costs(&vec![0.2; n], CostCurve::Linear).unwrap();
            let state = decimate(&pop, &p, &cfg).unwrap();
            assert!((state.outcomes[0].payoff - e).abs() < 1e-12 * (1.0 + e));
        }
    }

    #[test]
    fn scaling_preconditions() {
        let cfg = SolverConfig::default();
        let p = Productivity::Exponential;
        assert!(poverty_scaling_study(0.2, &[1, 2, 4], &p, &cfg).is_err());
        assert!(poverty_scaling_study(0.2, &[10, 20], &p, &cfg).is_err());
        assert!(poverty_scaling_study(0.2, &[10, 10, 20], &p, &cfg).is_err());
        assert!(poverty_scaling_study(1.2, &SIZES, &p, &cfg).is_err());
    }

    #[test]
    fn uniform_spread_poverty() {
        let cfg = SolverConfig::default();
        let p = Productivity::Exponential;
        let r = uniform_spread_study(0.2, 0.5, &SIZES, &p, &cfg).unwrap();
        assert!((-2.1..=-1.9).contains(&r.fitted_slope), "{}", r.fitted_slope);
        // everybody suffers: the cumulative payoff vanishes too
        let totals: Vec<f64> = SIZES
            .iter()
            .map(|&n| {
                let x_tot = solve_x_tot(n, 0.2, &p, &cfg).unwrap();
                let pop = uniform_spread_population(n, 0.2, 0.5 * ((-x_tot).exp() - 0.2)).unwrap();
                let state = decimate(&pop, &p, &cfg).unwrap();
                assert_eq!(state.n_survivors(), n);
                state.total_payoff()
            })
            .collect();
        assert!(totals.windows(2).all(|w| w[1] < w[0]));
        assert!(totals.last().unwrap() < &0.01);
    }

    #[test]
    fn window_identity_and_values() {
        let cfg = SolverConfig::default();
        let p = Productivity::Exponential;
        for (n, c_bar) in [(50, 0.005), (18, 0.167), (3, 0.5), (1000, 0.01)] {
            let w = participation_window(n, c_bar, &p, &cfg).unwrap();
            let x_tot = solve_x_tot(n, c_bar, &p, &cfg).unwrap();
            let c_max = (-x_tot).exp();
            assert!((w - (c_max - c_bar) / c_bar).abs() < 1e-10);
            assert!((w - profit_margin(c_bar, c_max).unwrap()).abs() < 1e-10);
        }
        assert!((participation_window(18, 0.167, &p, &cfg).unwrap() - 0.1037).abs() < 1e-3);
        for c_bar in [0.003, 0.005, 0.008] {
            let w = participation_window(50, c_bar, &p, &cfg).unwrap();
            assert!((w - 0.12).abs() <= 0.02, "{c_bar}: {w}");
        }
        assert!(participation_window(10, 0.999999, &p, &cfg).unwrap() < 1e-6);
        assert!(participation_window(10, 0.1, &Productivity::LinearFinite { x_max: 2.0 }, &cfg).is_err());
    }

    #[test]
    fn margins() {
        assert_eq!(profit_margin(0.2, 0.2).unwrap(), 0.0);
        assert_eq!(profit_margin(0.1, 0.2).unwrap(), 1.0);
        assert!(profit_margin(0.0, 0.2).is_err());
    }

    #[test]
    fn decomposition_sums_to_mean() {
        let cfg = SolverConfig::default();
        let p = Productivity::Exponential;
        let pop = Population::from_costs(&[0.2; 9], CostCurve::Linear).unwrap();
        let state = decimate(&pop, &p, &cfg).unwrap();
        let (gap, var) = mean_payoff_decomposition(&state).unwrap();
        assert!(var < 1e-25);
        assert!((gap - state.mean_payoff()).abs() < 1e-12);

        let costs: Vec<f64> = (0..30).map(|i| 0.15 + 0.002 * i as f64).collect();
        let pop = Population::from_costs(&costs, CostCurve::Linear).unwrap();
        let state = decimate(&pop, &p, &cfg).unwrap();
        let (gap, var) = mean_payoff_decomposition(&state).unwrap();
        assert!((gap + var - state.mean_payoff()).abs() < 1e-10);
        assert!((gap + var - 0.040 / 18.0).abs() < 1e-3);
        assert!(fraction_in_window(&state) > 0.0);

        let s = oligarch_two_class_scenario(40, 0.1, &cfg).unwrap();
        let state = decimate(&s.population, &p, &cfg).unwrap();
        let (gap, var) = mean_payoff_decomposition(&state).unwrap();
        assert!((gap + var - state.mean_payoff()).abs() < 1e-10);
        assert!(var > gap);
        // the oligarch alone contributes about c_bar^2 / N to the variance
        let oligarch = 0.1 * 0.1 / 40.0;
        assert!((var * state.c_max - oligarch).abs() < 0.1 * oligarch);
    }

    #[test]
    fn oligarch_keeps_finite_share() {
        let cfg = SolverConfig::default();
        for n in [5, 10, 20, 40, 80, 160, 1000] {
            let s = oligarch_two_class_scenario(n, 0.1, &cfg).unwrap();
            let state = decimate(&s.population, &Productivity::Exponential, &cfg).unwrap();
            let e0 = state.outcomes[0].payoff;
            // E(0) = c_max approaches c_bar from above
            assert!(e0 > 0.1);
            assert!(state.total_payoff() >= e0);
        }
    }
}
