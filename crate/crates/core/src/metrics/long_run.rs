use super::{
    average_emission_rate, srme_dual, CapacityDelta, ConsequentialReport, EmissionRateSeries, MetricsError,
    PerEvNormalization, Scope,
};
use crate::grid::GridModel;
use crate::planner::{build_expansion_lp, perturb_demand, solve_model, DispatchResult, Perturbation};
use serde::{Deserialize, Serialize};

/// Smallest demand change for which a long-run rate is reported, MWh.
const MIN_DELTA_MWH: f64 = 1.0;

pub fn long_run_mer(grid: &GridModel, fraction: f64, target_zones: &[String]) -> Result<ConsequentialReport, MetricsError> {
    long_run_mer_detailed(grid, fraction, target_zones).map(|(r, _, _)| r)
}

/// Solves capacity expansion at the base and at EV charging scaled by
/// `1 + fraction` in `target_zones` (all zones when empty), returning the
/// report together with both dispatch results.
pub fn long_run_mer_detailed(
    grid: &GridModel,
    fraction: f64,
    target_zones: &[String],
) -> Result<(ConsequentialReport, DispatchResult, DispatchResult), MetricsError> {
    let pert_grid = perturb_demand(grid, target_zones, &Perturbation::ScaleEv(fraction))?;
    let base = solve_model(&build_expansion_lp(grid)?)?;
    let pert = solve_model(&build_expansion_lp(&pert_grid)?)?;
    let report = compare(grid, &base, &pert, fraction, target_zones)?;
    Ok((report, base, pert))
}

/// Long-run rate with the short-run (dual rates at the base build) and
/// average-rate attributions filled in.
pub fn long_run_report(
    grid: &GridModel,
    fraction: f64,
    target_zones: &[String],
) -> Result<(ConsequentialReport, DispatchResult, DispatchResult), MetricsError> {
    let (mut report, base, pert) = long_run_mer_detailed(grid, fraction, target_zones)?;
    let rates = srme_dual(grid, &base.capacities())?;
    let aer = average_emission_rate(&base, &Scope::System)?;
    attribute_rates(&mut report, &base, &pert, Some(&rates), Some(aer));
    Ok((report, base, pert))
}

pub(crate) fn compare(
    grid: &GridModel,
    base: &DispatchResult,
    pert: &DispatchResult,
    fraction: f64,
    target_zones: &[String],
) -> Result<ConsequentialReport, MetricsError> {
    let delta_demand = pert.total_demand() - base.total_demand();
    if delta_demand.abs() < MIN_DELTA_MWH {
        return Err(MetricsError::DegenerateDelta { delta: delta_demand });
    }
    let (eb, ep) = (base.total_emissions(), pert.total_emissions());

    let mut capacity_deltas: Vec<CapacityDelta> = base
        .generators
        .iter()
        .zip(&pert.generators)
        .zip(&grid.generators)
        .map(|((b, p), spec)| CapacityDelta {
            unit: b.id.clone(),
            kind: serde_json::to_value(spec.kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            new_mw_delta: p.new_mw - b.new_mw,
            retired_mw_delta: p.retired_mw - b.retired_mw,
        })
        .collect();
    capacity_deltas.extend(base.storage.iter().zip(&pert.storage).map(|(b, p)| CapacityDelta {
        unit: b.id.clone(),
        kind: "storage".into(),
        new_mw_delta: p.new_power_mw - b.new_power_mw,
        retired_mw_delta: 0.0,
    }));
    capacity_deltas.extend(base.lines.iter().zip(&pert.lines).map(|(b, p)| CapacityDelta {
        unit: b.id.clone(),
        kind: "transmission".into(),
        new_mw_delta: p.new_mw - b.new_mw,
        retired_mw_delta: 0.0,
    }));

    let per_ev_normalization = grid.config.ev_fleet_size.filter(|n| *n > 0.0).and_then(|fleet| {
        let energy = |all: bool| -> f64 {
            grid.flexible_loads
                .iter()
                .filter(|l| all || target_zones.is_empty() || target_zones.contains(&l.zone_id))
                .map(|l| l.total_energy())
                .sum()
        };
        let total = energy(true);
        if total <= 0.0 {
            return None;
        }
        let added = fleet * fraction * energy(false) / total;
        (added != 0.0).then(|| PerEvNormalization {
            added_vehicles: added,
            emissions_delta_per_1000_ev: (ep - eb) / added * 1000.0,
            demand_delta_mwh_per_1000_ev: delta_demand / added * 1000.0,
        })
    });

    Ok(ConsequentialReport {
        base_total_emissions: eb,
        pert_total_emissions: ep,
        delta_demand_mwh: delta_demand,
        lr_mer: (ep - eb) / delta_demand,
        sr_attributed: None,
        aer_attributed: None,
        base_total_cost: base.total_cost,
        pert_total_cost: pert.total_cost,
        capacity_deltas,
        per_ev_normalization,
    })
}

/// Fills the short-run and average-rate attributions: hourly demand changes
/// between the two solves weighted by `rates`, and the total change times `aer`.
pub fn attribute_rates(
    report: &mut ConsequentialReport,
    base: &DispatchResult,
    pert: &DispatchResult,
    rates: Option<&EmissionRateSeries>,
    aer: Option<f64>,
) {
    if let Some(series) = rates {
        let mut total = 0.0;
        for (z, id) in base.zone_ids.iter().enumerate() {
            if let Some(r) = series.zone_rates(id) {
                for (t, rate) in r.iter().enumerate() {
                    total += rate * (pert.demand[z][t] - base.demand[z][t]);
                }
            }
        }
        report.sr_attributed = Some(total);
    }
    if let Some(a) = aer {
        report.aer_attributed = Some(a * report.delta_demand_mwh);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcevComparison {
    pub ev_tco2_per_vehicle: f64,
    pub pct_reduction: f64,
    pub fleet_savings_tco2: f64,
}

/// Annual per-vehicle EV emissions at the long-run rate against a fixed
/// ICEV figure. `pct_reduction` is a fraction (0.83 = 83 %).
pub fn icev_comparison(report: &ConsequentialReport, n_vehicles: f64, ev_annual_mwh: f64, icev_tco2: f64) -> IcevComparison {
    debug_assert!(n_vehicles > 0.0);
    let ev = report.lr_mer * ev_annual_mwh;
    IcevComparison {
        ev_tco2_per_vehicle: ev,
        pct_reduction: 1.0 - ev / icev_tco2,
        fleet_savings_tco2: n_vehicles * (icev_tco2 - ev),
    }
}
