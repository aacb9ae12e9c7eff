//! Gradient-flow adaptation of investments.
//!
//! Every agent follows its own payoff gradient, `x_i <- max(0, x_i + eta dE_i/dx_i)`,
//! with all gradients taken from the same snapshot. Projection at zero is
//! market exit; an exited agent keeps being evaluated and re-enters as soon as
//! its gradient at the origin turns positive.

mod flow;
mod frozen;
mod sudden_death;

pub use flow::{flow_step, run_flow, run_to_convergence, ExitEvent, FlowConfig, FlowRun, GradientFlow, TrajectoryRecord};
pub use frozen::{detect_fold, frozen_flow, frozen_gradient, frozen_gradient_slope, BranchPoint, FrozenFlowDiagram, Stability};
pub use sudden_death::{squeeze_scenario, sudden_death_experiment, CostSchedule, Stage, SuddenDeathRecord};
