use super::{EmissionRateSeries, MetricsError, RateMethod};
use crate::grid::GridModel;
use crate::lp::{solve, LpSolution, LpStatus};
use crate::planner::{
    build_operational_lp, perturb_demand, solve_model_full, Capacities, ExpansionModel, PlanError, Perturbation,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const DEGENERACY_TOL: f64 = 1e-9;
/// Relative headroom on the cost cap of the emissions step.
const COST_CAP_SLACK: f64 = 1e-7;

/// Hours touched by a basic variable or basic slack resting on a bound.
/// Entities without an hour (policy rows, capacity variables) mark every hour.
pub(crate) fn degenerate_hours(model: &ExpansionModel, sol: &LpSolution) -> Vec<bool> {
    let h = model.grid.horizon();
    let p = &model.problem;
    let mut flags = vec![false; h];
    let hours = sol
        .degenerate_basic_vars(p, DEGENERACY_TOL)
        .into_iter()
        .filter(|&j| p.lower[j] != p.upper[j])
        .map(|j| model.index.var_hour[j])
        .chain(sol.degenerate_slack_rows(p, DEGENERACY_TOL).into_iter().map(|i| model.index.ineq_row_hour[i]));
    for hour in hours {
        match hour {
            Some(t) => flags[t] = true,
            None => flags.iter_mut().for_each(|f| *f = true),
        }
    }
    flags
}

/// Raises fixed demand in each requested zone by `srme1_fraction` in every
/// hour and divides the change in system-wide hourly emissions by the added
/// zonal load of that hour. Hours with no zonal load get a rate of zero.
pub fn srme_uniform(grid: &GridModel, caps: &Capacities, zones: &[String]) -> Result<EmissionRateSeries, MetricsError> {
    let frac = grid.config.srme1_fraction;
    for z in zones {
        grid.zone_index(z)?;
    }
    let base_model = build_operational_lp(grid, caps)?;
    let (base, base_sol) = solve_model_full(&base_model)?;
    let base_hourly = base.hourly_emissions();

    let per_zone: Vec<Result<(Vec<f64>, Vec<f64>), MetricsError>> = zones
        .par_iter()
        .map(|zone| {
            let pert = perturb_demand(grid, std::slice::from_ref(zone), &Perturbation::UniformAll(frac))?;
            let model = build_operational_lp(&pert, caps)?;
            let res = match solve_model_full(&model) {
                Ok((r, _)) => r,
                Err(PlanError::Infeasible { .. }) => return Err(MetricsError::InfeasiblePerturbation { zone: zone.clone() }),
                Err(e) => return Err(e.into()),
            };
            let load = &grid.zones[grid.zone_index(zone)?].demand;
            let annual: f64 = load.iter().sum();
            let delta: Vec<f64> = res.hourly_emissions().iter().zip(&base_hourly).map(|(p, b)| p - b).collect();
            let hourly = delta.iter().zip(load).map(|(d, l)| if *l > 0.0 { d / (frac * l) } else { 0.0 }).collect();
            let yearly = delta.iter().map(|d| if annual > 0.0 { d / (frac * annual) } else { 0.0 }).collect();
            Ok((hourly, yearly))
        })
        .collect();
    let mut rates = Vec::with_capacity(zones.len());
    let mut annual = Vec::with_capacity(zones.len());
    for r in per_zone {
        let (a, b) = r?;
        rates.push(a);
        annual.push(b);
    }
    let mut provenance = vec!["operational base".to_string()];
    provenance.extend(zones.iter().map(|z| format!("operational +{frac} uniform in {z}")));
    Ok(EmissionRateSeries {
        method: RateMethod::Srme1,
        zone_ids: zones.to_vec(),
        rates,
        annual_basis_rates: Some(annual),
        degenerate: degenerate_hours(&base_model, &base_sol),
        provenance,
    })
}

/// Quantities from the two solves behind a dual-based rate series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualDiagnostics {
    /// Minimum operating cost from the cost step.
    pub cost_bar: f64,
    /// Operating cost of the emissions-minimizing step.
    pub step2_cost: f64,
    /// `|step2_cost - cost_bar| / max(1, |cost_bar|)`.
    pub cost_rel_gap: f64,
    /// Dual of the cost cap in the emissions step (>= 0).
    pub lambda: f64,
    pub base_emissions: f64,
    pub step2_emissions: f64,
    /// Cost-step prices, `[zone][hour]`.
    pub mu_base: Vec<Vec<f64>>,
    /// Emissions-step balance duals, `[zone][hour]`.
    pub mu_second: Vec<Vec<f64>>,
}

pub fn srme_dual(grid: &GridModel, caps: &Capacities) -> Result<EmissionRateSeries, MetricsError> {
    srme_dual_full(grid, caps).map(|(s, _)| s)
}

/// Cost-minimizing solve followed by an emissions-minimizing solve capped at
/// the optimal cost; rates are `mu_second - lambda * mu_base` for all zones
/// and hours at once.
pub fn srme_dual_full(grid: &GridModel, caps: &Capacities) -> Result<(EmissionRateSeries, DualDiagnostics), MetricsError> {
    let model = build_operational_lp(grid, caps)?;
    srme_dual_on(&model)
}

pub(crate) fn srme_dual_on(model: &ExpansionModel) -> Result<(EmissionRateSeries, DualDiagnostics), MetricsError> {
    let (base, sol1) = solve_model_full(model)?;
    let cost = model.cost_vector();
    let emis = model.emissions_vector();
    let cost_bar: f64 = cost.iter().zip(&sol1.x).map(|(c, x)| c * x).sum();
    let mu_base = base.prices.clone();

    let mut step2 = model.problem.clone();
    step2.objective = emis.clone();
    let cap_coeffs: Vec<(usize, f64)> = cost.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(j, c)| (j, *c)).collect();
    let cap_row = step2.add_le(cap_coeffs, cost_bar + COST_CAP_SLACK * cost_bar.abs().max(1.0));
    let sol2 = solve(&step2).map_err(PlanError::from)?;
    match sol2.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(MetricsError::CostCapInfeasible),
        LpStatus::Unbounded => return Err(PlanError::Unbounded { mode: model.mode }.into()),
    }
    let lambda = sol2.ineq_duals[cap_row];
    let mu_second: Vec<Vec<f64>> =
        model.index.balance_rows.iter().map(|row| row.iter().map(|&r| sol2.eq_duals[r]).collect()).collect();
    let rates = mu_second
        .iter()
        .zip(&mu_base)
        .map(|(m2, m1)| m2.iter().zip(m1).map(|(a, b)| a - lambda * b).collect())
        .collect();
    let step2_cost: f64 = cost.iter().zip(&sol2.x).map(|(c, x)| c * x).sum();
    let diagnostics = DualDiagnostics {
        cost_bar,
        step2_cost,
        cost_rel_gap: (step2_cost - cost_bar).abs() / cost_bar.abs().max(1.0),
        lambda,
        base_emissions: base.total_emissions(),
        step2_emissions: emis.iter().zip(&sol2.x).map(|(e, x)| e * x).sum(),
        mu_base,
        mu_second,
    };
    log::debug!(
        "srme2: C_bar={:.6} step2 cost={:.6} lambda={:.6e}",
        diagnostics.cost_bar,
        diagnostics.step2_cost,
        diagnostics.lambda
    );
    let series = EmissionRateSeries {
        method: RateMethod::Srme2,
        zone_ids: base.zone_ids.clone(),
        rates,
        annual_basis_rates: None,
        degenerate: degenerate_hours(model, &sol1),
        provenance: vec![format!("{} cost step", model.mode), format!("{} emissions step", model.mode)],
    };
    Ok((series, diagnostics))
}
