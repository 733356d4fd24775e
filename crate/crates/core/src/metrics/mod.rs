//! Emission-impact metrics: average rate, short-run marginal rates by
//! uniform perturbation and by duality, and the long-run marginal rate from
//! paired capacity-expansion solves.

mod long_run;
mod srme;

pub use long_run::{
    attribute_rates, icev_comparison, long_run_mer, long_run_mer_detailed, long_run_report, IcevComparison,
};
pub use srme::{srme_dual, srme_dual_full, srme_uniform, DualDiagnostics};

use crate::grid::GridError;
use crate::io::{sig12, write_atomic};
use crate::planner::{DispatchResult, PlanError};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no served demand in scope {0}")]
    ZeroDemand(String),
    #[error("emissions step is infeasible under the cost cap")]
    CostCapInfeasible,
    #[error("perturbed case for zone {zone} is infeasible")]
    InfeasiblePerturbation { zone: String },
    #[error("demand delta {delta} MWh is too small for a long-run rate")]
    DegenerateDelta { delta: f64 },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    System,
    Zone(String),
}

/// Emissions over served consumption within `scope`.
pub fn average_emission_rate(result: &DispatchResult, scope: &Scope) -> Result<f64, MetricsError> {
    let (e, d) = match scope {
        Scope::System => (result.total_emissions(), result.total_demand()),
        Scope::Zone(id) => {
            let z = result
                .zone_ids
                .iter()
                .position(|x| x == id)
                .ok_or_else(|| GridError::UnknownZone(id.clone()))?;
            (result.emissions[z].iter().sum(), result.demand[z].iter().sum())
        }
    };
    if d.abs() < 1e-12 {
        let name = match scope {
            Scope::System => "system".to_string(),
            Scope::Zone(z) => z.clone(),
        };
        return Err(MetricsError::ZeroDemand(name));
    }
    Ok(e / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RateMethod {
    Srme1,
    Srme2,
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMethod::Srme1 => "srme1",
            RateMethod::Srme2 => "srme2",
        })
    }
}

impl FromStr for RateMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "srme1" => Ok(RateMethod::Srme1),
            "srme2" => Ok(RateMethod::Srme2),
            _ => Err(format!("unknown rate method `{s}`")),
        }
    }
}

/// Zone × hour marginal emission rates, tCO2/MWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionRateSeries {
    pub method: RateMethod,
    pub zone_ids: Vec<String>,
    /// `[zone][hour]`
    pub rates: Vec<Vec<f64>>,
    /// Same emission deltas normalized by the perturbation of total zonal
    /// energy over the horizon instead of the hourly load (SRME1 only).
    pub annual_basis_rates: Option<Vec<Vec<f64>>>,
    /// Hours whose base solution is degenerate, so the rate is basis-dependent.
    pub degenerate: Vec<bool>,
    /// Labels of the solves the rates were derived from.
    pub provenance: Vec<String>,
}

impl EmissionRateSeries {
    pub fn horizon(&self) -> usize {
        self.rates.first().map_or(0, Vec::len)
    }

    pub fn zone_rates(&self, zone: &str) -> Option<&[f64]> {
        self.zone_ids.iter().position(|z| z == zone).map(|i| self.rates[i].as_slice())
    }

    /// Demand-weighted mean rate over `weights[zone][hour]` (same zone order).
    pub fn weighted_mean(&self, weights: &[Vec<f64>]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (r, w) in self.rates.iter().zip(weights) {
            for (a, b) in r.iter().zip(w) {
                num += a * b;
                den += b;
            }
        }
        num / den
    }
}

const SRME_HEADER: [&str; 6] = ["hour", "zone", "method", "rate_tco2_per_mwh", "rate_annual_load_basis", "degenerate"];

/// Writes one or more rate series to `srme.csv`-style long format.
pub fn write_srme_csv(series: &[&EmissionRateSeries], path: &Path) -> std::io::Result<()> {
    let mut rows = Vec::new();
    for s in series {
        for t in 0..s.horizon() {
            for (z, id) in s.zone_ids.iter().enumerate() {
                rows.push(vec![
                    t.to_string(),
                    id.clone(),
                    s.method.to_string(),
                    sig12(s.rates[z][t]),
                    s.annual_basis_rates.as_ref().map(|a| sig12(a[z][t])).unwrap_or_default(),
                    u8::from(s.degenerate.get(t).copied().unwrap_or(false)).to_string(),
                ]);
            }
        }
    }
    write_atomic(path, &crate::planner::csv_bytes(&SRME_HEADER, rows)?)
}

/// Reads rates back from an `srme.csv` file.
pub fn read_srme_csv(path: &Path) -> Result<Vec<EmissionRateSeries>, GridError> {
    let parse_err = |line: Option<usize>, message: String| GridError::Parse {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| parse_err(None, e.to_string()))?;
    let mut out: Vec<EmissionRateSeries> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = Some(i + 2);
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        let field = |k: usize| rec.get(k).ok_or_else(|| parse_err(line, format!("missing column {}", SRME_HEADER[k])));
        let hour: usize = field(0)?.parse().map_err(|e| parse_err(line, format!("hour: {e}")))?;
        let zone = field(1)?.to_string();
        let method: RateMethod = field(2)?.parse().map_err(|e: String| parse_err(line, e))?;
        let rate: f64 = field(3)?.parse().map_err(|e| parse_err(line, format!("rate: {e}")))?;
        let alt = field(4)?;
        let alt = if alt.is_empty() { None } else { Some(alt.parse::<f64>().map_err(|e| parse_err(line, e.to_string()))?) };
        let degenerate = field(5)? == "1";

        let pos = match out.iter().position(|s| s.method == method) {
            Some(p) => p,
            None => {
                out.push(EmissionRateSeries {
                    method,
                    zone_ids: Vec::new(),
                    rates: Vec::new(),
                    annual_basis_rates: alt.map(|_| Vec::new()),
                    degenerate: Vec::new(),
                    provenance: vec![path.display().to_string()],
                });
                out.len() - 1
            }
        };
        let s = &mut out[pos];
        let z = match s.zone_ids.iter().position(|x| *x == zone) {
            Some(z) => z,
            None => {
                s.zone_ids.push(zone);
                s.rates.push(Vec::new());
                if let Some(a) = s.annual_basis_rates.as_mut() {
                    a.push(Vec::new());
                }
                s.zone_ids.len() - 1
            }
        };
        if s.rates[z].len() != hour {
            return Err(parse_err(line, format!("hour {hour} out of sequence for zone {}", s.zone_ids[z])));
        }
        s.rates[z].push(rate);
        if let (Some(a), Some(v)) = (s.annual_basis_rates.as_mut(), alt) {
            a[z].push(v);
        }
        if s.degenerate.len() == hour {
            s.degenerate.push(degenerate);
        }
    }
    Ok(out)
}

/// Per-technology change in built and retired capacity between two solves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityDelta {
    pub unit: String,
    pub kind: String,
    pub new_mw_delta: f64,
    pub retired_mw_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerEvNormalization {
    pub added_vehicles: f64,
    pub emissions_delta_per_1000_ev: f64,
    pub demand_delta_mwh_per_1000_ev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsequentialReport {
    pub base_total_emissions: f64,
    pub pert_total_emissions: f64,
    pub delta_demand_mwh: f64,
    pub lr_mer: f64,
    /// EV energy delta weighted by short-run rates, tCO2.
    pub sr_attributed: Option<f64>,
    /// EV energy delta times the base average rate, tCO2.
    pub aer_attributed: Option<f64>,
    pub base_total_cost: f64,
    pub pert_total_cost: f64,
    pub capacity_deltas: Vec<CapacityDelta>,
    pub per_ev_normalization: Option<PerEvNormalization>,
}

impl ConsequentialReport {
    pub fn emissions_delta(&self) -> f64 {
        self.pert_total_emissions - self.base_total_emissions
    }

    /// Short-run attribution expressed as a rate per MWh of added demand.
    pub fn sr_rate(&self) -> Option<f64> {
        self.sr_attributed.map(|a| a / self.delta_demand_mwh)
    }
}

pub fn write_consequential_json(report: &ConsequentialReport, path: &Path) -> std::io::Result<()> {
    write_atomic(path, &serde_json::to_vec_pretty(report)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::ModelMode;

    fn result(emissions: Vec<Vec<f64>>, demand: Vec<Vec<f64>>) -> DispatchResult {
        let nz = emissions.len();
        DispatchResult {
            mode: ModelMode::OperationalFixed,
            zone_ids: (0..nz).map(|z| format!("z{z}")).collect(),
            total_cost: 0.0,
            investment_cost: 0.0,
            operational_cost: 0.0,
            generators: vec![],
            storage: vec![],
            lines: vec![],
            flex: vec![],
            non_served: vec![vec![0.0; emissions[0].len()]; nz],
            prices: vec![vec![0.0; emissions[0].len()]; nz],
            emissions,
            demand,
        }
    }

    #[test]
    fn aer_basic() {
        let r = result(vec![vec![60.0, 40.0]], vec![vec![250.0, 250.0]]);
        assert!((average_emission_rate(&r, &Scope::System).unwrap() - 0.2).abs() < 1e-15);
        let clean = result(vec![vec![0.0, 0.0]], vec![vec![10.0, 10.0]]);
        assert_eq!(average_emission_rate(&clean, &Scope::System).unwrap(), 0.0);
        let empty = result(vec![vec![0.0]], vec![vec![0.0]]);
        assert!(matches!(average_emission_rate(&empty, &Scope::System), Err(MetricsError::ZeroDemand(_))));
        assert!(average_emission_rate(&r, &Scope::Zone("nope".into())).is_err());
    }

    #[test]
    fn srme_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("srme.csv");
        let s1 = EmissionRateSeries {
            method: RateMethod::Srme1,
            zone_ids: vec!["a".into(), "b".into()],
            rates: vec![vec![0.1 / 3.0, -0.2], vec![1.0 / 0.81, 0.4]],
            annual_basis_rates: Some(vec![vec![1e-5, 2e-5], vec![3e-5, 4e-5]]),
            degenerate: vec![false, true],
            provenance: vec![],
        };
        let s2 = EmissionRateSeries { method: RateMethod::Srme2, annual_basis_rates: None, ..s1.clone() };
        write_srme_csv(&[&s1, &s2], &p).unwrap();
        let back = read_srme_csv(&p).unwrap();
        assert_eq!(back.len(), 2);
        for (orig, got) in [&s1, &s2].into_iter().zip(&back) {
            assert_eq!(got.zone_ids, orig.zone_ids);
            assert_eq!(got.degenerate, orig.degenerate);
            for (a, b) in orig.rates.iter().flatten().zip(got.rates.iter().flatten()) {
                assert_eq!(sig12(*a), sig12(*b));
                assert!((a - b).abs() <= 1e-11 * a.abs());
            }
        }
        // Writing what was read reproduces the file byte for byte.
        let p2 = dir.path().join("again.csv");
        write_srme_csv(&back.iter().collect::<Vec<_>>(), &p2).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    }
}
