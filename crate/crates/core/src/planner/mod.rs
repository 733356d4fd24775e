//! Capacity-expansion and fixed-capacity dispatch LPs built from a
//! [`GridModel`], and the decode layer that turns LP solutions into
//! dispatch, capacity, emissions and price series.

mod build;
mod decode;
mod export;
mod perturb;

pub use build::{build_expansion_lp, build_model, build_operational_lp};
pub use decode::{solve_model, solve_model_full};
pub use export::write_dispatch_outputs;
pub(crate) use export::csv_bytes;
pub use perturb::{perturb_demand, Perturbation};

use crate::flex::FlexError;
use crate::grid::{GridError, GridModel};
use crate::lp::{LpError, LpProblem};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("model build failed: {0}")]
    ModelBuild(String),
    #[error("fixed capacities do not cover {0}")]
    MissingCapacity(String),
    #[error("{mode} model is infeasible")]
    Infeasible { mode: ModelMode },
    #[error("{mode} model is unbounded")]
    Unbounded { mode: ModelMode },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Flex(#[from] FlexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelMode {
    CapacityExpansion,
    OperationalFixed,
}

impl fmt::Display for ModelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelMode::CapacityExpansion => "capacity-expansion",
            ModelMode::OperationalFixed => "operational",
        })
    }
}

/// New and retired capacity decided by a prior solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Capacities {
    /// generator id -> (new MW, retired MW)
    pub generators: BTreeMap<String, (f64, f64)>,
    /// storage id -> (new MW, new MWh)
    pub storage: BTreeMap<String, (f64, f64)>,
    /// line id -> new MW
    pub lines: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorVars {
    pub new: usize,
    pub retired: usize,
    pub generation: Vec<usize>,
    /// Committed capacity and start-ups, for units with linearized commitment.
    pub commitment: Option<(Vec<usize>, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageVars {
    pub new_power: usize,
    pub new_energy: usize,
    pub charge: Vec<usize>,
    pub discharge: Vec<usize>,
    pub soc: Vec<usize>,
    pub balance_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineVars {
    pub new: usize,
    pub forward: Vec<usize>,
    pub backward: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlexVars {
    pub served: Vec<usize>,
    pub cumulative: Option<Vec<usize>>,
}

/// Where every entity/hour lives in the LP.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelIndex {
    pub generators: Vec<GeneratorVars>,
    pub storage: Vec<StorageVars>,
    pub lines: Vec<LineVars>,
    pub flex: Vec<FlexVars>,
    /// `[zone][hour]`, absent when load shedding is disabled.
    pub non_served: Vec<Vec<Option<usize>>>,
    /// Power-balance equality rows, `[zone][hour]`.
    pub balance_rows: Vec<Vec<usize>>,
    pub clean_share_rows: Vec<Option<usize>>,
    pub co2_cap_row: Option<usize>,
    /// Hour each variable belongs to, if any.
    pub var_hour: Vec<Option<usize>>,
    /// Hour each `<=` row belongs to, if any.
    pub ineq_row_hour: Vec<Option<usize>>,
    /// Emissions coefficients (tCO2 per unit of the variable).
    pub emissions: Vec<(usize, f64)>,
}

/// A built LP plus its registry.
#[derive(Debug, Clone)]
pub struct ExpansionModel {
    pub problem: LpProblem,
    pub index: ModelIndex,
    pub mode: ModelMode,
    /// Constant cost not carried by the LP objective (fixed O&M on existing
    /// capacity in expansion mode).
    pub cost_offset: f64,
    /// Objective coefficients that are not system cost (emission penalties).
    pub penalty_terms: Vec<(usize, f64)>,
    pub grid: GridModel,
}

impl ExpansionModel {
    /// System cost `C(x)` as a coefficient vector over LP variables.
    pub fn cost_vector(&self) -> Vec<f64> {
        let mut c = self.problem.objective.clone();
        for &(j, p) in &self.penalty_terms {
            c[j] -= p;
        }
        c
    }

    /// Total emissions `E(x)` as a coefficient vector over LP variables.
    pub fn emissions_vector(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.problem.num_vars()];
        for &(j, v) in &self.index.emissions {
            e[j] += v;
        }
        e
    }

    /// Adds non-cost objective terms, e.g. an emissions penalty on served
    /// flexible charging.
    pub fn add_penalty_terms(&mut self, terms: &[(usize, f64)]) {
        for &(j, p) in terms {
            self.problem.objective[j] += p;
            self.penalty_terms.push((j, p));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorResult {
    pub id: String,
    pub zone_id: String,
    pub existing_mw: f64,
    pub new_mw: f64,
    pub retired_mw: f64,
    pub generation: Vec<f64>,
    pub curtailment: Vec<f64>,
}

impl GeneratorResult {
    pub fn capacity_mw(&self) -> f64 {
        self.existing_mw - self.retired_mw + self.new_mw
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageResult {
    pub id: String,
    pub zone_id: String,
    pub existing_power_mw: f64,
    pub existing_energy_mwh: f64,
    pub new_power_mw: f64,
    pub new_energy_mwh: f64,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    pub soc: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineResult {
    pub id: String,
    pub existing_mw: f64,
    pub new_mw: f64,
    /// Net flow from `from_zone` to `to_zone` (sending-end MW).
    pub flow: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexResult {
    pub id: String,
    pub zone_id: String,
    pub served: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchResult {
    pub mode: ModelMode,
    pub zone_ids: Vec<String>,
    /// Investment + fixed O&M + operating cost, $ over the horizon.
    pub total_cost: f64,
    pub investment_cost: f64,
    pub operational_cost: f64,
    pub generators: Vec<GeneratorResult>,
    pub storage: Vec<StorageResult>,
    pub lines: Vec<LineResult>,
    pub flex: Vec<FlexResult>,
    /// tCO2, `[zone][hour]`.
    pub emissions: Vec<Vec<f64>>,
    /// Served consumption incl. flexible charging net of shedding, MWh, `[zone][hour]`.
    pub demand: Vec<Vec<f64>>,
    /// Power-balance duals, $/MWh, `[zone][hour]`.
    pub prices: Vec<Vec<f64>>,
    pub non_served: Vec<Vec<f64>>,
}

impl DispatchResult {
    pub fn total_emissions(&self) -> f64 {
        self.emissions.iter().flatten().sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.iter().flatten().sum()
    }

    pub fn horizon(&self) -> usize {
        self.emissions.first().map_or(0, Vec::len)
    }

    /// System-wide emissions per hour.
    pub fn hourly_emissions(&self) -> Vec<f64> {
        let h = self.horizon();
        (0..h).map(|t| self.emissions.iter().map(|z| z[t]).sum()).collect()
    }

    pub fn capacities(&self) -> Capacities {
        Capacities {
            generators: self.generators.iter().map(|g| (g.id.clone(), (g.new_mw, g.retired_mw))).collect(),
            storage: self.storage.iter().map(|s| (s.id.clone(), (s.new_power_mw, s.new_energy_mwh))).collect(),
            lines: self.lines.iter().map(|l| (l.id.clone(), l.new_mw)).collect(),
        }
    }
}
