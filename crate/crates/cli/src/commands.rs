use std::path::Path;

use anyhow::bail;
use commons_core::analysis::{
    build_scenario, fraction_in_window, poverty_scaling_study, profit_margin, reproduce_table, run_scenario,
    table_scenarios, TableRow,
};
use commons_core::dynamics::{frozen_flow, run_flow, BranchPoint};
use commons_core::equilibrium::{c_node, dispersion_payoff, equilibrate_general, large_n_limit, solve_x_tot, x_node};
use commons_core::model::{Agent, CostCurve};

use crate::output::{emit, num, num3, CsvDoc};
use crate::scenario::LoadedScenario;
use crate::{Study, TableMismatch, UsageError};

fn doc(name: &str, sc: &LoadedScenario) -> CsvDoc {
    CsvDoc::new(name, &sc.sha256, &sc.file.to_toml())
}

pub fn equilibrate(sc: &LoadedScenario, out: Option<&Path>) -> anyhow::Result<()> {
    let spec = sc.file.spec();
    let (_, state) = run_scenario(&spec, &sc.file.solver(), sc.file.dynamics.x0)?;

    let mut agents = doc("equilibrate", sc);
    agents.row(["agent_id", "c", "gamma", "x_i", "E_i", "survived"])?;
    for o in &state.outcomes {
        agents.row([
            o.id.0.to_string(),
            num(o.cost),
            num(o.curvature),
            num(o.investment),
            num(o.payoff),
            o.survived.to_string(),
        ])?;
    }

    let mut summary = doc("equilibrate summary", sc);
    summary.row(["N", "x_tot", "E_tot", "c_bar", "c_max"])?;
    summary.row([
        state.n_survivors().to_string(),
        num3(state.x_tot),
        num3(state.total_payoff()),
        num3(state.c_bar),
        num3(state.c_max),
    ])?;
    eprintln!(
        "{} survivors, x_tot = {:.6}, c_max = {:.6}",
        state.n_survivors(),
        state.x_tot,
        state.c_max
    );
    emit(out, vec![(None, agents.render()?), (Some("summary"), summary.render()?)])
}

pub fn dispersion(sc: &LoadedScenario, out: Option<&Path>, tolerance: Option<f64>) -> anyhow::Result<()> {
    let spec = sc.file.spec();
    if spec.gamma != 0.0 || spec.cooperative {
        bail!(UsageError(
            "the dispersion relation needs a selfish equilibrium with linear costs (gamma = 0, cooperative = false)".into()
        ));
    }
    let (pop, state) = run_scenario(&spec, &sc.file.solver(), 0.0)?;
    let mut d = doc("dispersion", sc);
    d.row(["agent_id", "c", "E_analytic", "E_numeric"])?;
    let mut worst = 0.0f64;
    for o in state.survivors() {
        let analytic = dispersion_payoff(o.effective_cost, state.x_tot, &spec.productivity)?;
        worst = worst.max((analytic - o.payoff).abs() / (1.0 + o.payoff));
        d.row([o.id.0.to_string(), num(o.cost), num(analytic), num(o.payoff)])?;
    }
    let tol = tolerance.unwrap_or(1e-10);
    if worst > tol {
        eprintln!("warning: dispersion mismatch {worst:e} exceeds {tol:e}");
    }
    eprintln!("{} of {} agents survive; max relative mismatch {worst:e}", state.n_survivors(), pop.len());
    emit(out, vec![(None, d.render()?)])
}

pub fn dynamics(sc: &LoadedScenario, out: Option<&Path>, tolerance: Option<f64>) -> anyhow::Result<()> {
    let spec = sc.file.spec();
    let mut flow = sc.file.flow();
    if let Some(t) = tolerance {
        flow.convergence_tol = t;
    }
    let dyn_cfg = &sc.file.dynamics;
    let mut pop = build_scenario(&spec)?;
    let mut initial = if dyn_cfg.start_at_equilibrium {
        equilibrate_general(&pop, &spec.productivity, &sc.file.solver(), &vec![dyn_cfg.x0; pop.len()])?.investments()
    } else {
        vec![dyn_cfg.x0; pop.len()]
    };
    if let Some(entrant) = &dyn_cfg.entrant {
        let curve = CostCurve::from_curvature(spec.gamma)?;
        pop = pop.with_agent(Agent::new(pop.next_id(), entrant.c, curve)?)?;
        initial.push(entrant.x0);
    }
    let run = run_flow(&pop, &spec.productivity, &initial, &flow)?;
    let traj = &run.trajectory;

    let mut t = doc("dynamics", sc);
    let mut header = vec!["step".to_string(), "x_tot".to_string()];
    header.extend(traj.ids.iter().map(|id| format!("x_{id}")));
    header.push("converged".into());
    t.row(&header)?;
    let last = traj.len().saturating_sub(1);
    for (k, ((step, x_tot), row)) in traj.steps.iter().zip(&traj.x_tot).zip(&traj.x).enumerate() {
        let mut fields = vec![step.to_string(), num(*x_tot)];
        fields.extend(row.iter().map(|&x| num(x)));
        fields.push(if k == last { run.converged.to_string() } else { String::new() });
        t.row(&fields)?;
    }

    let mut exits = doc("dynamics exits", sc);
    exits.row(["agent_id", "c", "step"])?;
    for e in &traj.exit_events {
        let cost = pop.get(e.agent).map_or(f64::NAN, |a| a.cost);
        exits.row([e.agent.0.to_string(), num(cost), e.step.to_string()])?;
    }

    let survivors = run.final_x.iter().filter(|&&x| x > 0.0).count();
    eprintln!(
        "{} steps, {} survivors, {} exits, converged = {}",
        run.steps,
        survivors,
        traj.exit_events.len(),
        run.converged
    );
    emit(out, vec![(None, t.render()?), (Some("exits"), exits.render()?)])?;
    if !run.converged {
        return Err(commons_core::Error::NonConvergence {
            iterations: run.steps,
            residual: run.residual,
        }
        .into());
    }
    Ok(())
}

pub struct GridArgs {
    pub gamma: Option<f64>,
    pub c_max: f64,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: usize,
}

pub fn bifurcation(sc: &LoadedScenario, out: Option<&Path>, grid: &GridArgs) -> anyhow::Result<()> {
    let gamma = grid.gamma.unwrap_or(sc.file.gamma);
    if !(gamma > 0.0) {
        bail!(UsageError(format!("bifurcation needs gamma > 0, got {gamma}")));
    }
    if !(grid.c_max > 0.0 && grid.c_max < 1.0) {
        bail!(UsageError(format!("--c-max must lie in (0, 1), got {}", grid.c_max)));
    }
    if grid.points < 2 {
        bail!(UsageError("--points must be at least 2".into()));
    }
    let node = c_node(grid.c_max, gamma);
    let from = grid.from.unwrap_or(0.5 * grid.c_max);
    let to = grid.to.unwrap_or(1.1 * node.max(grid.c_max));
    if !(to > from) {
        bail!(UsageError(format!("empty cost grid [{from}, {to}]")));
    }
    let costs: Vec<f64> = (0..grid.points)
        .map(|i| from + (to - from) * i as f64 / (grid.points - 1) as f64)
        .collect();
    let diagram = frozen_flow(&costs, gamma, grid.c_max)?;

    let mut d = doc("bifurcation", sc);
    d.comment(format!("gamma = {}", num(gamma)));
    d.comment(format!("c_max_frozen = {}", num(grid.c_max)));
    d.row(["c", "x_minus", "x_plus", "stability_minus", "stability_plus"])?;
    for BranchPoint { c, x_minus, x_plus, .. } in &diagram.branches {
        let value = |r: &Option<(f64, _)>| r.map_or(String::new(), |(x, _)| num(x));
        let label = |r: &Option<(f64, commons_core::dynamics::Stability)>| {
            r.map_or(String::new(), |(_, s)| s.as_str().to_string())
        };
        d.row([num(*c), value(x_minus), value(x_plus), label(x_minus), label(x_plus)])?;
    }
    d.footer("c_node", diagram.saddle_node.0);
    d.footer("x_node", x_node(gamma));
    d.footer("c_max", grid.c_max);
    emit(out, vec![(None, d.render()?)])
}

pub struct SweepArgs {
    pub study: Study,
    pub c_bars: Vec<f64>,
    pub n_values: Vec<usize>,
}

pub fn sweep(sc: &LoadedScenario, out: Option<&Path>, args: &SweepArgs) -> anyhow::Result<()> {
    let spec = sc.file.spec();
    let solver = sc.file.solver();
    let prod = spec.productivity;
    let mut d = doc("sweep", sc);
    match args.study {
        Study::Scaling => {
            let c_bars = if args.c_bars.is_empty() { vec![0.1, 0.2, 0.5] } else { args.c_bars.clone() };
            let ns = if args.n_values.is_empty() { vec![10, 20, 40, 80, 160, 320, 640] } else { args.n_values.clone() };
            d.row(["c_bar", "N", "E", "E_closed_form"])?;
            let mut slopes = Vec::new();
            for &c_bar in &c_bars {
                let r = poverty_scaling_study(c_bar, &ns, &prod, &solver)?;
                for (k, (&n, &e)) in r.n_values.iter().zip(&r.e_values).enumerate() {
                    let closed = r.closed_form.as_ref().map_or(String::new(), |c| num(c[k]));
                    d.row([num(c_bar), n.to_string(), num(e), closed])?;
                }
                eprintln!("c_bar = {c_bar}: slope {:.4} +- {:.4}", r.fitted_slope, r.slope_stderr);
                slopes.push(format!("slope,{},{},{}", num(c_bar), num(r.fitted_slope), num(r.slope_stderr)));
            }
            for s in slopes {
                d.footer_line(s);
            }
        }
        Study::Window => {
            let c_bars = if args.c_bars.is_empty() {
                (1..100).map(|i| i as f64 / 100.0).collect()
            } else {
                args.c_bars.clone()
            };
            let ns = if args.n_values.is_empty() { vec![1, 2, 5, 10, 50, 1_000_000] } else { args.n_values.clone() };
            d.row(["c_bar", "N", "x_tot", "delta_c", "delta_c_large_n"])?;
            for &n in &ns {
                for &c_bar in &c_bars {
                    let x_tot = solve_x_tot(n, c_bar, &prod, &solver)?;
                    let window = (prod.value(x_tot)? - c_bar) / c_bar;
                    let asymptote = large_n_limit(c_bar, &prod)? / n as f64;
                    d.row([num(c_bar), n.to_string(), num(x_tot), num(window), num(asymptote)])?;
                }
            }
            for &c_bar in &c_bars {
                d.row([num(c_bar), "inf".into(), num(large_n_limit(c_bar, &prod)?), num(0.0), num(0.0)])?;
            }
        }
        Study::Margin => {
            let (_, state) = run_scenario(&spec, &solver, sc.file.dynamics.x0)?;
            d.comment(format!("c_bar = {}", num(state.c_bar)));
            d.comment(format!("c_max = {}", num(state.c_max)));
            d.comment(format!("window = {}", num(profit_margin(state.c_bar, state.c_max)?)));
            d.comment(format!("fraction_in_window = {}", num(fraction_in_window(&state))));
            d.row(["agent_id", "c", "x_i", "E_i", "margin"])?;
            for o in state.survivors() {
                d.row([
                    o.id.0.to_string(),
                    num(o.cost),
                    num(o.investment),
                    num(o.payoff),
                    num(profit_margin(o.effective_cost, state.c_max)?),
                ])?;
            }
        }
    }
    emit(out, vec![(None, d.render()?)])
}

pub fn reproduce(sc: &LoadedScenario, out: Option<&Path>, tolerance: Option<f64>) -> anyhow::Result<()> {
    let tol = tolerance.unwrap_or(1e-3);
    let mut scenarios = table_scenarios(sc.file.delta_c);
    for s in &mut scenarios {
        s.c_min = sc.file.c_min;
    }
    let report = reproduce_table(&scenarios, &sc.file.solver(), tol)?;
    let mut d = doc("reproduce-table", sc);
    d.comment(format!("tolerance = {tol}"));
    d.row(["row", "field", "paper_value", "computed", "delta"])?;
    for c in &report.cells {
        let fmt = |v: f64| if c.field == TableRow::FIELDS[0] { format!("{v:.0}") } else { num3(v) };
        d.row([c.row.to_string(), c.field.to_string(), fmt(c.paper), fmt(c.computed), num3(c.delta)])?;
    }
    emit(out, vec![(None, d.render()?)])?;
    let failed: Vec<_> = report.failures().collect();
    for c in &failed {
        eprintln!(
            "row {} {}: paper {} computed {} (delta {:.3})",
            c.row, c.field, c.paper, c.computed, c.delta
        );
    }
    if !failed.is_empty() {
        bail!(TableMismatch(failed.len()));
    }
    eprintln!("all {} cells within {tol}", report.cells.len());
    Ok(())
}
