// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod scenario;

const SCENARIO_HELP: &str = "\
Scenario file (TOML). Every key is optional; without a file the defaults are
used, which describe thirty agents with linear costs 0.15 + 0.002 i on an
exponential commons:

  c_min = 0.15            # lowest grid cost
  delta_c = 0.002         # grid spacing
  n_start = 30            # grid agents before decimation
  oligarch_costs = []     # extra low-cost agents, e.g. [0.1]
  gamma = 0.0             # cost curvature (0 linear, >0 concave, <0 convex)
  cooperative = false     # equal-share protocol on the selfish survivors

  [productivity]          # kind = exponential | power_law (gamma_p) | linear_finite (x_max)
  kind = \"exponential\"

  [solver]                # root_tol, max_bisect_iters, max_rounds, max_bracket, nash_tol
  [flow]                  # step_size, convergence_tol, max_steps, record_every, oscillation_window
  [dynamics]              # x0 = 0.5, start_at_equilibrium = false, entrant = { c, x0 }";

/// Selfish investors on a degradable commons: equilibria, dynamics, studies.
///
/// Exit codes: 0 success, 1 I/O failure, 2 usage or scenario error,
/// 3 no self-consistent solution (runaway), 4 empty market,
/// 5 non-convergence, 6 reference-table mismatch.
#[derive(Parser)]
#[command(name = "commons-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true, value_name = "FILE", long_help = SCENARIO_HELP)]
    scenario: Option<PathBuf>,

    /// Output file; companion files get a tag before the extension. Stdout if absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Root tolerance (equilibrate), flow convergence tolerance (dynamics),
    /// agreement check (dispersion) or comparison gate (reproduce-table).
    #[arg(long, global = true, value_name = "T")]
    tolerance: Option<f64>,

    /// Accepted for compatibility; all computations are deterministic.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the equilibrium: per-agent CSV plus a `.summary` CSV.
    Equilibrate,
    /// Compare dispersion-relation payoffs with direct evaluation.
    Dispersion,
    /// Relax the gradient flow: trajectory CSV plus an `.exits` CSV.
    Dynamics,
    /// Frozen-commons bifurcation diagram of a concave-cost agent.
    Bifurcation {
        /// Cost curvature (> 0); defaults to the scenario's gamma.
        #[arg(long)]
        gamma: Option<f64>,
        /// Frozen productivity c_max.
        #[arg(long, default_value_t = 0.15)]
        c_max: f64,
        /// First grid cost [default: c_max / 2].
        #[arg(long)]
        from: Option<f64>,
        /// Last grid cost [default: 1.1 c_node].
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Curve families and scaling tables.
    Sweep {
        #[arg(value_enum)]
        study: Study,
        /// Mean costs, comma separated.
        #[arg(long = "c-bar", value_delimiter = ',')]
        c_bar: Vec<f64>,
        /// Population sizes, comma separated.
        #[arg(long = "n", value_delimiter = ',')]
        n: Vec<usize>,
    },
    /// Recompute the six reference scenarios and compare cell by cell.
    ReproduceTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    /// Payoff of identical agents against N, with log-log slope.
    Scaling,
    /// Total investment and participation window against c_bar per N.
    Window,
    /// Profit margins of the scenario's survivors.
    Margin,
}

/// Bad invocation or scenario content.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug)]
pub struct TableMismatch(pub usize);

impl std::fmt::Display for TableMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} table cells outside tolerance", self.0)
    }
}

impl std::error::Error for TableMismatch {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use commons_core::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    if err.downcast_ref::<TableMismatch>().is_some() {
        return 6;
    }
    match err.downcast_ref::<E>() {
        Some(E::NoSolution { .. }) => 3,
        Some(E::EmptyMarket) => 4,
        Some(E::NonConvergence { .. }) => 5,
        Some(_) => 2,
        None => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut sc = scenario::load(cli.scenario.as_deref())?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Equilibrate => {
            if let Some(t) = cli.tolerance {
                sc.file.solver.root_tol = t;
            }
            commands::equilibrate(&sc, out)
        }
        Command::Dispersion => commands::dispersion(&sc, out, cli.tolerance),
        Command::Dynamics => commands::dynamics(&sc, out, cli.tolerance),
        Command::Bifurcation { gamma, c_max, from, to, points } => commands::bifurcation(
            &sc,
            out,
            &commands::GridArgs {
                gamma: *gamma,
                c_max: *c_max,
                from: *from,
                to: *to,
                points: *points,
            },
        ),
        Command::Sweep { study, c_bar, n } => commands::sweep(
            &sc,
            out,
            &commands::SweepArgs {
                study: *study,
                c_bars: c_bar.clone(),
                n_values: n.clone(),
            },
        ),
        Command::ReproduceTable => commands::reproduce(&sc, out, cli.tolerance),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
