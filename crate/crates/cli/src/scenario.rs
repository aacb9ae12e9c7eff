//! Scenario files: TOML documents describing a population and solver knobs.
//!
//! Every key is optional; an empty file is the thirty-agent grid
//! `0.15 + 0.002 i` with linear costs on an exponential commons.

use std::path::Path;

use anyhow::Context;
use commons_core::analysis::ScenarioSpec;
use commons_core::dynamics::FlowConfig;
use commons_core::equilibrium::SolverConfig;
use commons_core::model::Productivity;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::UsageError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum ProductivityFile {
    #[default]
    Exponential,
    PowerLaw { gamma_p: f64 },
    LinearFinite { x_max: f64 },
}


impl From<ProductivityFile> for Productivity {
    fn from(p: ProductivityFile) -> Self {
        match p {
            ProductivityFile::Exponential => Productivity::Exponential,
            ProductivityFile::PowerLaw { gamma_p } => Productivity::PowerLaw { exponent: gamma_p },
            ProductivityFile::LinearFinite { x_max } => Productivity::LinearFinite { x_max },
        }
    }
}

impl From<Productivity> for ProductivityFile {
    fn from(p: Productivity) -> Self {
        match p {
            Productivity::Exponential => ProductivityFile::Exponential,
            Productivity::PowerLaw { exponent } => ProductivityFile::PowerLaw { gamma_p: exponent },
            Productivity::LinearFinite { x_max } => ProductivityFile::LinearFinite { x_max },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverFile {
    pub root_tol: f64,
    pub max_bisect_iters: u32,
    pub max_rounds: u32,
    pub max_bracket: f64,
    pub nash_tol: f64,
}

impl Default for SolverFile {
    fn default() -> Self {
        SolverConfig::default().into()
    }
}

impl From<SolverConfig> for SolverFile {
    fn from(c: SolverConfig) -> Self {
        SolverFile {
            root_tol: c.root_tol,
            max_bisect_iters: c.max_bisect_iters,
            max_rounds: c.max_rounds,
            max_bracket: c.max_bracket,
            nash_tol: c.nash_tol,
        }
    }
}

impl From<&SolverFile> for SolverConfig {
    fn from(f: &SolverFile) -> Self {
        SolverConfig {
            root_tol: f.root_tol,
            max_bisect_iters: f.max_bisect_iters,
            max_rounds: f.max_rounds,
            max_bracket: f.max_bracket,
            nash_tol: f.nash_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowFile {
    pub step_size: f64,
    pub convergence_tol: f64,
    pub max_steps: u64,
    pub record_every: u64,
    pub oscillation_window: u32,
}

impl Default for FlowFile {
    fn default() -> Self {
        FlowConfig::default().into()
    }
}

impl From<FlowConfig> for FlowFile {
    fn from(c: FlowConfig) -> Self {
        FlowFile {
            step_size: c.step_size,
            convergence_tol: c.convergence_tol,
            max_steps: c.max_steps,
            record_every: c.record_every,
            oscillation_window: c.oscillation_window,
        }
    }
}

impl From<&FlowFile> for FlowConfig {
    fn from(f: &FlowFile) -> Self {
        FlowConfig {
            step_size: f.step_size,
            convergence_tol: f.convergence_tol,
            max_steps: f.max_steps,
            record_every: f.record_every,
            oscillation_window: f.oscillation_window,
        }
    }
}

/// Extra agent placed into a running market, e.g. to probe entry barriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrantFile {
    pub c: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsFile {
    /// Uniform initial investment.
    pub x0: f64,
    /// Start the incumbents from their equilibrium instead of `x0`.
    pub start_at_equilibrium: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entrant: Option<EntrantFile>,
}

impl Default for DynamicsFile {
    fn default() -> Self {
        DynamicsFile {
            x0: 0.5,
            start_at_equilibrium: false,
            entrant: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub c_min: f64,
    pub delta_c: f64,
    pub n_start: usize,
    pub oligarch_costs: Vec<f64>,
    pub gamma: f64,
    pub cooperative: bool,
    pub productivity: ProductivityFile,
    pub solver: SolverFile,
    pub flow: FlowFile,
    pub dynamics: DynamicsFile,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile::from_parts(&ScenarioSpec::default(), SolverConfig::default(), FlowConfig::default())
    }
}

impl ScenarioFile {
    pub fn from_parts(spec: &ScenarioSpec, solver: SolverConfig, flow: FlowConfig) -> Self {
        ScenarioFile {
            c_min: spec.c_min,
            delta_c: spec.delta_c,
            n_start: spec.n_start,
            oligarch_costs: spec.oligarch_costs.clone(),
            gamma: spec.gamma,
            cooperative: spec.cooperative,
            productivity: spec.productivity.into(),
            solver: solver.into(),
            flow: flow.into(),
            dynamics: DynamicsFile::default(),
        }
    }

    pub fn spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            c_min: self.c_min,
            delta_c: self.delta_c,
            n_start: self.n_start,
            oligarch_costs: self.oligarch_costs.clone(),
            gamma: self.gamma,
            productivity: self.productivity.clone().into(),
            cooperative: self.cooperative,
        }
    }

    pub fn solver(&self) -> SolverConfig {
        (&self.solver).into()
    }

    pub fn flow(&self) -> FlowConfig {
        (&self.flow).into()
    }

    pub fn parse(text: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|e| UsageError(format!("invalid scenario file: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// Parsed scenario plus the hash of the bytes it came from.
pub struct LoadedScenario {
    pub file: ScenarioFile,
    pub sha256: String,
}

pub fn load(path: Option<&Path>) -> anyhow::Result<LoadedScenario> {
    let (text, source) = match path {
        Some(p) => (
            std::fs::read_to_string(p).with_context(|| format!("reading scenario {}", p.display()))?,
            p.display().to_string(),
        ),
        None => (String::new(), "<defaults>".to_string()),
    };
    let file = ScenarioFile::parse(&text).map_err(|e| UsageError(format!("{source}: {}", e.0)))?;
    Ok(LoadedScenario {
        file,
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default_grid() {
        let f = ScenarioFile::parse("").unwrap();
        assert_eq!(f, ScenarioFile::default());
        assert_eq!(f.spec(), ScenarioSpec::default());
    }

    #[test]
    fn round_trip() {
        let spec = ScenarioSpec {
            c_min: 0.1,
            delta_c: 0.0,
            n_start: 7,
            oligarch_costs: vec![0.01, 0.02],
            gamma: -0.5,
            productivity: Productivity::PowerLaw { exponent: 2.5 },
            cooperative: true,
        };
        let mut f = ScenarioFile::from_parts(&spec, SolverConfig::default(), FlowConfig::default());
        f.dynamics.entrant = Some(EntrantFile { c: 0.155, x0: 1e-4 });
        let back = ScenarioFile::parse(&f.to_toml()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.spec(), spec);
        for p in [Productivity::Exponential, Productivity::LinearFinite { x_max: 3.0 }] {
            let g = ScenarioFile::from_parts(&ScenarioSpec { productivity: p, ..spec.clone() }, SolverConfig::default(), FlowConfig::default());
            assert_eq!(ScenarioFile::parse(&g.to_toml()).unwrap().spec().productivity, p);
        }
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = ScenarioFile::parse("c_min = 0.1\nbogus_key = 3\n").unwrap_err();
        assert!(e.0.contains("bogus_key"), "{}", e.0);
        let e = ScenarioFile::parse("[solver]\nroot_tolerance = 1e-9\n").unwrap_err();
        assert!(e.0.contains("root_tolerance"), "{}", e.0);
        let e = ScenarioFile::parse("[productivity]\nkind = \"power_law\"\ngamma_p = 2\nx_max = 1\n").unwrap_err();
        assert!(e.0.contains("x_max"), "{}", e.0);
    }

    #[test]
    fn parse_errors_cite_lines() {
        let e = ScenarioFile::parse("c_min = 0.1\n\nn_start = \"many\"\n").unwrap_err();
        assert!(e.0.contains("line 3"), "{}", e.0);
    }
}
