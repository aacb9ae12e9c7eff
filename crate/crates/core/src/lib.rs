//! Selfish investors exploiting a degradable common-pool resource.
//!
//! Agents invest `x_i >= 0` into a commons whose productivity `P(x_tot)`
//! falls with the total investment. This crate computes the resulting Nash
//! equilibria (decimation of unprofitable agents, dispersion relations,
//! cooperative baselines, concave-cost roots and their saddle-node
//! structure), runs the gradient-flow adaptation of investments, and hosts
//! the quantitative studies built on top (poverty scaling, participation
//! windows, oligarch constructions, the reference table).
//!
//! ```
//! use commons_core::equilibrium::{decimate, SolverConfig};
//! use commons_core::model::{CostCurve, Population, Productivity};
//!
//! let costs: Vec<f64> = (0..30).map(|i| 0.15 + 0.002 * i as f64).collect();
//! let pop = Population::from_costs(&costs, CostCurve::Linear).unwrap();
//! let state = decimate(&pop, &Productivity::Exponential, &SolverConfig::default()).unwrap();
//! assert_eq!(state.n_survivors(), 18);
//! ```

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod equilibrium;
mod error;
pub mod model;

pub use error::{Error, Result, RunawayBound};
