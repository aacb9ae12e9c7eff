//! Scenario builders and quantitative studies on top of the solvers.

mod scenario;
mod studies;
mod table;

pub use scenario::{
    build_scenario, oligarch_two_class_scenario, run_scenario, uniform_spread_population, ScenarioSpec,
    TwoClassScenario, OLIGARCH_COST,
};
pub use studies::{
    fit_line, fraction_in_window, mean_payoff_decomposition, participation_window, poverty_scaling_study,
    profit_margin, uniform_spread_study, LineFit, ScalingStudyResult,
};
pub use table::{reproduce_table, table_scenarios, TableCell, TableReport, TableRow, PAPER_TABLE};
