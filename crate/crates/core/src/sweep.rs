//! Scenario sweeps: the Cartesian product of EV penetration, cost
//! sensitivities, flexibility modes and perturbation targets, each cell
//! solved independently and summarized in one long-format CSV.

use crate::flex::{with_flex_mode, FlexMode};
use crate::grid::{GridError, GridModel};
use crate::io::{sig12, write_atomic};
use crate::metrics::{
    average_emission_rate, long_run_report, write_consequential_json, ConsequentialReport, MetricsError, Scope,
};
use crate::planner::{csv_bytes, write_dispatch_outputs, DispatchResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    Invalid(String),
    #[error("{path}: parse error at line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which zones receive the EV perturbation in each run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetZones {
    /// `"all"` or `"each-separately"`.
    Keyword(String),
    List(Vec<String>),
}

impl Default for TargetZones {
    fn default() -> Self {
        TargetZones::Keyword("all".into())
    }
}

impl TargetZones {
    /// Expands to one `(label, zones)` pair per run; an empty zone list
    /// means every zone. `each-separately` covers the zones that host EV
    /// charging, since the others have nothing to perturb.
    pub fn expand(&self, grid: &GridModel) -> Result<Vec<(String, Vec<String>)>, SweepError> {
        match self {
            TargetZones::Keyword(k) if k == "all" => Ok(vec![("all".into(), Vec::new())]),
            TargetZones::Keyword(k) if k == "each-separately" => {
                let hosts: Vec<_> = grid
                    .zones
                    .iter()
                    .filter(|z| grid.flexible_loads.iter().any(|l| l.zone_id == z.id && l.total_energy() > 0.0))
                    .map(|z| (z.id.clone(), vec![z.id.clone()]))
                    .collect();
                if hosts.is_empty() {
                    return Err(SweepError::Invalid("no zone hosts EV charging to perturb".into()));
                }
                Ok(hosts)
            }
            TargetZones::Keyword(k) => Err(SweepError::Invalid(format!(
                "target_zones must be \"all\", \"each-separately\" or a list of zones, got \"{k}\""
            ))),
            TargetZones::List(zones) => {
                if zones.is_empty() {
                    return Err(SweepError::Invalid("target_zones list is empty".into()));
                }
                for z in zones {
                    grid.zone_index(z)?;
                }
                Ok(vec![(zones.join("+"), zones.clone())])
            }
        }
    }
}

fn default_ev_multipliers() -> Vec<f64> {
    (0..7).map(|k| 0.85 + 0.05 * k as f64).collect()
}

fn unit_list() -> Vec<f64> {
    vec![1.0]
}

fn default_modes() -> Vec<FlexMode> {
    vec![FlexMode::NoFlex]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_ev_multipliers")]
    pub ev_multipliers: Vec<f64>,
    #[serde(default = "unit_list")]
    pub renewable_capex_multipliers: Vec<f64>,
    #[serde(default = "unit_list")]
    pub gas_price_multipliers: Vec<f64>,
    #[serde(default = "default_modes")]
    pub flexibility_modes: Vec<FlexMode>,
    #[serde(default)]
    pub target_zones: TargetZones,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            ev_multipliers: default_ev_multipliers(),
            renewable_capex_multipliers: unit_list(),
            gas_price_multipliers: unit_list(),
            flexibility_modes: default_modes(),
            target_zones: TargetZones::default(),
        }
    }
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, shown: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| SweepError::Parse {
            path: shown.to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let lists = [
            ("ev_multipliers", &self.ev_multipliers),
            ("renewable_capex_multipliers", &self.renewable_capex_multipliers),
            ("gas_price_multipliers", &self.gas_price_multipliers),
        ];
        for (name, list) in lists {
            if list.is_empty() {
                return Err(SweepError::Invalid(format!("{name} is empty")));
            }
            if let Some(v) = list.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(SweepError::Invalid(format!("{name} contains {v}; multipliers must be positive")));
            }
        }
        if self.flexibility_modes.is_empty() {
            return Err(SweepError::Invalid("flexibility_modes is empty".into()));
        }
        Ok(())
    }

    /// SHA-256 of the spec's canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    /// Every run in a fixed order: EV multiplier, capex, gas price,
    /// flexibility mode, then target.
    pub fn cells(&self, grid: &GridModel) -> Result<Vec<SweepCell>, SweepError> {
        self.validate()?;
        let targets = self.target_zones.expand(grid)?;
        let mut out = Vec::new();
        for &ev in &self.ev_multipliers {
            for &capex in &self.renewable_capex_multipliers {
                for &gas in &self.gas_price_multipliers {
                    for &mode in &self.flexibility_modes {
                        for (label, zones) in &targets {
                            out.push(SweepCell {
                                run_id: format!("run{:04}", out.len()),
                                ev_multiplier: ev,
                                renewable_capex_multiplier: capex,
                                gas_price_multiplier: gas,
                                flex_mode: mode,
                                target_label: label.clone(),
                                target_zones: zones.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub run_id: String,
    pub ev_multiplier: f64,
    pub renewable_capex_multiplier: f64,
    pub gas_price_multiplier: f64,
    pub flex_mode: FlexMode,
    pub target_label: String,
    /// Empty means all zones.
    pub target_zones: Vec<String>,
}

impl SweepCell {
    /// The scenario with this cell's flexibility set and its multipliers
    /// (on top of any in the scenario config) applied to the data.
    pub fn grid(&self, base: &GridModel) -> Result<GridModel, GridError> {
        let mut g = with_flex_mode(base, self.flex_mode);
        g.config.ev_penetration_multiplier *= self.ev_multiplier;
        g.config.cost_multipliers.renewable_capex *= self.renewable_capex_multiplier;
        g.config.cost_multipliers.gas_price *= self.gas_price_multiplier;
        g.resolved()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Success,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub ev_multiplier: f64,
    pub renewable_capex_multiplier: f64,
    pub gas_price_multiplier: f64,
    pub flex_mode: FlexMode,
    pub target_zones: String,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Paths relative to the sweep output directory.
    pub outputs: Vec<String>,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub spec_hash: String,
    pub runs: Vec<RunRecord>,
}

impl RunManifest {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.status == RunStatus::Failed).count()
    }
}

struct RunOutcome {
    record: RunRecord,
    rows: Vec<(String, f64)>,
}

fn execute(cell: &SweepCell, grid: &GridModel, out: &Path) -> RunOutcome {
    let started = Instant::now();
    let dir = out.join("runs").join(&cell.run_id);
    let attempt = || -> Result<(Vec<(String, f64)>, Vec<String>), String> {
        let g = cell.grid(grid).map_err(|e| e.to_string())?;
        let fraction = g.config.perturbation_fraction;
        let (report, base, _) = long_run_report(&g, fraction, &cell.target_zones).map_err(|e| e.to_string())?;
        let rows = metric_rows(&report, &base).map_err(|e| e.to_string())?;
        let mut files = write_dispatch_outputs(&base, &g, &dir).map_err(|e| e.to_string())?;
        let cj = dir.join("consequential.json");
        write_consequential_json(&report, &cj).map_err(|e| e.to_string())?;
        files.push(cj);
        let rel = files
            .iter()
            .map(|p| p.strip_prefix(out).unwrap_or(p).to_string_lossy().replace('\\', "/"))
            .collect();
        Ok((rows, rel))
    };
    let result = attempt();
    let wall = started.elapsed().as_secs_f64();
    let mut record = RunRecord {
        run_id: cell.run_id.clone(),
        ev_multiplier: cell.ev_multiplier,
        renewable_capex_multiplier: cell.renewable_capex_multiplier,
        gas_price_multiplier: cell.gas_price_multiplier,
        flex_mode: cell.flex_mode,
        target_zones: cell.target_label.clone(),
        status: RunStatus::Success,
        error: None,
        outputs: Vec::new(),
        wall_clock_s: wall,
    };
    match result {
        Ok((rows, outputs)) => {
            record.outputs = outputs;
            RunOutcome { record, rows }
        }
        Err(e) => {
            log::warn!("{} failed: {e}", cell.run_id);
            // A failed run leaves no partial outputs behind.
            let _ = std::fs::remove_dir_all(&dir);
            record.status = RunStatus::Failed;
            record.error = Some(e);
            RunOutcome { record, rows: Vec::new() }
        }
    }
}

/// Metrics reported per run, in output order.
fn metric_rows(report: &ConsequentialReport, base: &DispatchResult) -> Result<Vec<(String, f64)>, MetricsError> {
    let mut rows = vec![
        ("lr_mer".to_string(), report.lr_mer),
        ("sr_mer".to_string(), report.sr_rate().unwrap_or(f64::NAN)),
        ("aer".to_string(), average_emission_rate(base, &Scope::System)?),
        ("base_total_emissions_tco2".to_string(), report.base_total_emissions),
        ("emissions_delta_tco2".to_string(), report.emissions_delta()),
        ("delta_demand_mwh".to_string(), report.delta_demand_mwh),
        ("base_total_cost".to_string(), base.total_cost),
        ("cost_delta".to_string(), report.pert_total_cost - report.base_total_cost),
    ];
    if let Some(n) = &report.per_ev_normalization {
        rows.push(("emissions_delta_per_1000_ev_tco2".into(), n.emissions_delta_per_1000_ev));
    }
    for gen in &base.generators {
        rows.push((format!("new_mw:{}", gen.id), gen.new_mw));
    }
    for c in &report.capacity_deltas {
        rows.push((format!("new_mw_delta:{}", c.unit), c.new_mw_delta));
    }
    Ok(rows)
}

/// Runs every cell of `spec` on up to `parallel` threads and writes
/// `sweep_results.csv`, `manifest.json` and one directory per run under
/// `out`. Failed runs are recorded in the manifest; the sweep continues.
pub fn run_sweep(
    grid: &GridModel,
    scenario_path: &str,
    spec: &SweepSpec,
    parallel: usize,
    out: &Path,
) -> Result<RunManifest, SweepError> {
    let cells = spec.cells(grid)?;
    std::fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| SweepError::Invalid(format!("thread pool: {e}")))?;
    log::info!("sweep: {} runs on {} threads", cells.len(), parallel.max(1));
    // `collect` keeps cell order regardless of completion order.
    let outcomes: Vec<RunOutcome> = pool.install(|| cells.par_iter().map(|c| execute(c, grid, out)).collect());

    let mut rows = Vec::new();
    for (cell, o) in cells.iter().zip(&outcomes) {
        for (metric, value) in &o.rows {
            rows.push(vec![
                cell.run_id.clone(),
                sig12(cell.ev_multiplier),
                sig12(cell.renewable_capex_multiplier),
                sig12(cell.gas_price_multiplier),
                cell.flex_mode.to_string(),
                cell.target_label.clone(),
                metric.clone(),
                sig12(*value),
            ]);
        }
    }
    let header = [
        "run_id",
        "ev_multiplier",
        "renewable_capex_multiplier",
        "gas_price_multiplier",
        "flex_mode",
        "target_zones",
        "metric",
        "value",
    ];
    write_atomic(&out.join("sweep_results.csv"), &csv_bytes(&header, rows)?)?;
    let manifest = RunManifest {
        scenario: scenario_path.to_string(),
        spec_hash: spec.hash(),
        runs: outcomes.into_iter().map(|o| o.record).collect(),
    };
    write_atomic(&out.join("manifest.json"), &serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?)?;
    Ok(manifest)
}
