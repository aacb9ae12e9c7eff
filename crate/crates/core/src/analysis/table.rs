use crate::equilibrium::SolverConfig;
use crate::error::Result;

use super::scenario::{run_scenario, ScenarioSpec};

/// One row of the reference results: survivors, total investment, total
/// payoff, mean and maximal per-unit cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub n: usize,
    pub x_tot: f64,
    pub e_tot: f64,
    pub c_bar: f64,
    pub c_max: f64,
}

impl TableRow {
    pub const FIELDS: [&'static str; 5] = ["N", "x_tot", "E_tot", "c_bar", "c_max"];

    pub fn values(&self) -> [f64; 5] {
        [self.n as f64, self.x_tot, self.e_tot, self.c_bar, self.c_max]
    }
}

/// Reference values for the six built-in scenarios.
pub const PAPER_TABLE: [TableRow; 6] = [
    TableRow { n: 18, x_tot: 1.691, e_tot: 0.040, c_bar: 0.167, c_max: 0.184 },
    TableRow { n: 1, x_tot: 0.698, e_tot: 0.243, c_bar: 0.150, c_max: 0.497 },
    TableRow { n: 18, x_tot: 0.673, e_tot: 0.231, c_bar: 0.167, c_max: 0.510 },
    TableRow { n: 16, x_tot: 1.720, e_tot: 0.061, c_bar: 0.160, c_max: 0.179 },
    TableRow { n: 2, x_tot: 1.184, e_tot: 0.219, c_bar: 0.125, c_max: 0.306 },
    TableRow { n: 16, x_tot: 0.683, e_tot: 0.236, c_bar: 0.160, c_max: 0.505 },
];

/// Grid `0.15 + 0.002 i`, thirty agents (a single one for rows 2 and 5),
/// oligarch at 0.1 in rows 4-6, cooperation in rows 3 and 6.
pub fn table_scenarios(delta_c: f64) -> [ScenarioSpec; 6] {
    let make = |n_start: usize, oligarch: bool, cooperative: bool| ScenarioSpec {
        c_min: 0.15,
        delta_c,
        n_start,
        oligarch_costs: if oligarch { vec![0.1] } else { Vec::new() },
        cooperative,
        ..Default::default()
    };
    [
        make(30, false, false),
        make(1, false, false),
        make(30, false, true),
        make(30, true, false),
        make(1, true, false),
        make(30, true, true),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    /// 1-based row number.
    pub row: usize,
    pub field: &'static str,
    pub paper: f64,
    /// Full-precision computed value.
    pub computed: f64,
    /// Difference at the reference's three-decimal reporting precision.
    pub delta: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub rows: Vec<TableRow>,
    pub cells: Vec<TableCell>,
    pub tolerance: f64,
}

impl TableReport {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TableCell> {
        self.cells.iter().filter(|c| !c.pass)
    }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Computes the six rows for the given scenarios and compares them with the
/// reference values, rounding computed values to three decimals.
pub fn reproduce_table(scenarios: &[ScenarioSpec], cfg: &SolverConfig, tolerance: f64) -> Result<TableReport> {
    let mut rows = Vec::with_capacity(scenarios.len());
    let mut cells = Vec::new();
    for (k, (spec, paper)) in scenarios.iter().zip(PAPER_TABLE.iter()).enumerate() {
        let (_, state) = run_scenario(spec, cfg, 0.0)?;
        let row = TableRow {
            n: state.n_survivors(),
            x_tot: state.x_tot,
            e_tot: state.total_payoff(),
            c_bar: state.c_bar,
            c_max: state.c_max,
        };
        for ((field, reference), computed) in TableRow::FIELDS.iter().zip(paper.values()).zip(row.values()) {
            let delta = round3(computed) - reference;
            cells.push(TableCell {
                row: k + 1,
                field,
                paper: reference,
                computed,
                delta,
                pass: delta.abs() <= tolerance + 1e-9,
            });
        }
        rows.push(row);
    }
    Ok(TableReport { rows, cells, tolerance })
}
