use super::{FlexError, FlexMode};
use crate::grid::GridModel;
use crate::io::{sig12, write_atomic};
use crate::metrics::{long_run_mer_detailed, srme_dual, srme_uniform, ConsequentialReport, EmissionRateSeries, RateMethod};
use crate::planner::{
    build_expansion_lp, build_operational_lp, csv_bytes, perturb_demand, solve_model, Capacities, DispatchResult,
    Perturbation,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

/// Tolerance on per-load energy totals, MWh.
pub const ENERGY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleSource {
    CostMin,
    MinimizeSrme1,
    MinimizeSrme2,
    Fixed,
}

impl fmt::Display for ScheduleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleSource::CostMin => "cost_min",
            ScheduleSource::MinimizeSrme1 => "min_srme1",
            ScheduleSource::MinimizeSrme2 => "min_srme2",
            ScheduleSource::Fixed => "fixed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSchedule {
    pub load_id: String,
    pub zone_id: String,
    pub served: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingSchedule {
    pub source: ScheduleSource,
    pub loads: Vec<LoadSchedule>,
}

impl ChargingSchedule {
    pub fn from_dispatch(result: &DispatchResult, source: ScheduleSource) -> Self {
        ChargingSchedule {
            source,
            loads: result
                .flex
                .iter()
                .map(|f| LoadSchedule { load_id: f.id.clone(), zone_id: f.zone_id.clone(), served: f.served.clone() })
                .collect(),
        }
    }

    /// Served charging summed per zone, `[zone][hour]` in `zone_ids` order.
    pub fn by_zone(&self, zone_ids: &[String], horizon: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; horizon]; zone_ids.len()];
        for l in &self.loads {
            if let Some(z) = zone_ids.iter().position(|id| *id == l.zone_id) {
                for (t, v) in l.served.iter().enumerate() {
                    out[z][t] += v;
                }
            }
        }
        out
    }

    /// Euclidean distance between two schedules over the same loads.
    pub fn distance(&self, other: &ChargingSchedule) -> f64 {
        self.loads
            .iter()
            .zip(&other.loads)
            .flat_map(|(a, b)| a.served.iter().zip(&b.served).map(|(x, y)| (x - y) * (x - y)))
            .sum::<f64>()
            .sqrt()
    }

    /// `sum rate[zone][t] * served[t]` over all loads.
    pub fn rate_weighted(&self, rates: &EmissionRateSeries) -> f64 {
        self.loads
            .iter()
            .filter_map(|l| rates.zone_rates(&l.zone_id).map(|r| r.iter().zip(&l.served).map(|(a, b)| a * b).sum::<f64>()))
            .sum()
    }

    /// Checks every load against the grid's requested energy.
    pub fn check_against(&self, grid: &GridModel) -> Result<(), FlexError> {
        for load in &grid.flexible_loads {
            let s = self.loads.iter().find(|s| s.load_id == load.id).ok_or_else(|| FlexError::ScheduleMismatch {
                load: load.id.clone(),
                expected: load.total_energy(),
                actual: 0.0,
            })?;
            let expected = load.total_energy();
            let actual: f64 = s.served.iter().sum();
            if s.served.len() != grid.horizon()
                || s.served.iter().any(|v| *v < -ENERGY_TOLERANCE)
                || (actual - expected).abs() > ENERGY_TOLERANCE
            {
                return Err(FlexError::ScheduleMismatch { load: load.id.clone(), expected, actual });
            }
        }
        Ok(())
    }
}

/// Copy of `grid` with every flexible load switched to `mode`.
pub fn with_flex_mode(grid: &GridModel, mode: FlexMode) -> GridModel {
    let (advance, delay) = mode.advance_delay();
    let mut out = grid.clone();
    for l in &mut out.flexible_loads {
        l.max_advance_hours = advance;
        l.max_delay_hours = delay;
    }
    out
}

/// Replaces each flexible load's request with the scheduled profile and
/// removes its flexibility.
pub fn apply_fixed_schedule(grid: &GridModel, schedule: &ChargingSchedule) -> Result<GridModel, FlexError> {
    schedule.check_against(grid)?;
    let mut out = grid.clone();
    for l in &mut out.flexible_loads {
        let s = schedule.loads.iter().find(|s| s.load_id == l.id).expect("checked above");
        l.baseline_profile = s.served.iter().map(|v| v.max(0.0)).collect();
        l.penetration_scale = 1.0;
        l.max_advance_hours = 0;
        l.max_delay_hours = 0;
        l.max_charge_rate_mw = None;
    }
    Ok(out)
}

/// Cost-minimizing schedule, from an expansion solve or, with `caps`, an
/// operational solve.
pub fn cost_min_schedule(grid: &GridModel, caps: Option<&Capacities>) -> Result<(ChargingSchedule, DispatchResult), FlexError> {
    let model = match caps {
        Some(c) => build_operational_lp(grid, c)?,
        None => build_expansion_lp(grid)?,
    };
    let r = solve_model(&model)?;
    Ok((ChargingSchedule::from_dispatch(&r, ScheduleSource::CostMin), r))
}

/// Flexible loads are pinned to `schedule`, then capacity expansion is
/// solved at the base and with charging scaled up by the configured
/// perturbation fraction.
pub fn evaluate_fixed_schedule(grid: &GridModel, schedule: &ChargingSchedule) -> Result<ConsequentialReport, FlexError> {
    evaluate_fixed_schedule_detailed(grid, schedule).map(|(r, _, _)| r)
}

pub fn evaluate_fixed_schedule_detailed(
    grid: &GridModel,
    schedule: &ChargingSchedule,
) -> Result<(ConsequentialReport, DispatchResult, DispatchResult), FlexError> {
    let fixed = apply_fixed_schedule(grid, schedule)?;
    Ok(long_run_mer_detailed(&fixed, grid.config.perturbation_fraction, &[])?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Operational emissions change from scaling the current schedule by the
    /// perturbation fraction, tCO2.
    pub consequential_tco2: f64,
    pub rel_change: f64,
    pub schedule_delta_norm: f64,
    /// Rate-weighted charging of the previous schedule under this iteration's rates.
    pub proxy_before: f64,
    /// Same for the re-solved schedule.
    pub proxy_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// Consequential check of the cost-minimizing starting schedule.
    pub initial_consequential_tco2: f64,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations_used: usize,
}

fn consequential_check(grid: &GridModel, caps: &Capacities, schedule: &ChargingSchedule) -> Result<f64, FlexError> {
    let fixed = apply_fixed_schedule(grid, schedule)?;
    let pert = perturb_demand(&fixed, &[], &Perturbation::ScaleEv(grid.config.perturbation_fraction))?;
    let base = solve_model(&build_operational_lp(&fixed, caps)?)?;
    let up = solve_model(&build_operational_lp(&pert, caps)?)?;
    Ok(up.total_emissions() - base.total_emissions())
}

fn rates_for(grid: &GridModel, caps: &Capacities, method: RateMethod) -> Result<EmissionRateSeries, FlexError> {
    let zones: Vec<String> = grid.zones.iter().map(|z| z.id.clone()).collect();
    Ok(match method {
        RateMethod::Srme1 => srme_uniform(grid, caps, &zones)?,
        RateMethod::Srme2 => srme_dual(grid, caps)?,
    })
}

/// Emissions-signal scheduling at fixed capacity.
///
/// Each iteration freezes marginal rates computed with the current schedule
/// pinned, re-solves the flexible operational model with `penalty` $/tCO2 on
/// rate-weighted charging, and re-runs the consequential check. Stops once
/// the check moves by less than the convergence threshold (relative) or the
/// iteration budget is spent; the latter is reported, not raised.
pub fn schedule_min_srme(
    grid: &GridModel,
    caps: &Capacities,
    method: RateMethod,
    penalty: f64,
) -> Result<(ChargingSchedule, IterationTrace), FlexError> {
    let source = match method {
        RateMethod::Srme1 => ScheduleSource::MinimizeSrme1,
        RateMethod::Srme2 => ScheduleSource::MinimizeSrme2,
    };
    let (mut current, _) = cost_min_schedule(grid, Some(caps))?;
    let mut last_check = consequential_check(grid, caps, &current)?;
    let mut trace = IterationTrace {
        initial_consequential_tco2: last_check,
        records: Vec::new(),
        converged: false,
        iterations_used: 0,
    };

    for k in 1..=grid.config.max_iterations {
        let pinned = apply_fixed_schedule(grid, &current)?;
        let rates = rates_for(&pinned, caps, method)?;

        let mut model = build_operational_lp(grid, caps)?;
        let mut terms = Vec::new();
        for (load, vars) in grid.flexible_loads.iter().zip(&model.index.flex) {
            if let Some(r) = rates.zone_rates(&load.zone_id) {
                terms.extend(vars.served.iter().zip(r).filter(|(_, rate)| **rate != 0.0).map(|(&j, rate)| (j, penalty * rate)));
            }
        }
        model.add_penalty_terms(&terms);
        let next = ChargingSchedule::from_dispatch(&solve_model(&model)?, source);

        let check = consequential_check(grid, caps, &next)?;
        let rel_change = (check - last_check).abs() / last_check.abs().max(1e-9);
        let record = IterationRecord {
            iteration: k,
            consequential_tco2: check,
            rel_change,
            schedule_delta_norm: next.distance(&current),
            proxy_before: current.rate_weighted(&rates),
            proxy_after: next.rate_weighted(&rates),
        };
        log::info!(
            "iteration {k}: consequential {:.6} tCO2, change {:.3e}, proxy {:.6} -> {:.6}",
            record.consequential_tco2,
            record.rel_change,
            record.proxy_before,
            record.proxy_after
        );
        trace.records.push(record);
        trace.iterations_used = k;
        current = next;
        last_check = check;
        if rel_change < grid.config.convergence_threshold {
            trace.converged = true;
            break;
        }
    }
    current.source = source;
    Ok((current, trace))
}

/// `schedule.csv`: served charging per zone and hour.
pub fn write_schedule_csv(schedule: &ChargingSchedule, grid: &GridModel, path: &Path) -> std::io::Result<()> {
    let zone_ids: Vec<String> = grid.zones.iter().map(|z| z.id.clone()).collect();
    let h = grid.horizon();
    let m = schedule.by_zone(&zone_ids, h);
    let mut rows = Vec::new();
    for t in 0..h {
        for (z, id) in zone_ids.iter().enumerate() {
            if grid.flexible_loads.iter().any(|l| l.zone_id == *id) {
                rows.push(vec![t.to_string(), id.clone(), schedule.source.to_string(), sig12(m[z][t])]);
            }
        }
    }
    write_atomic(path, &csv_bytes(&["hour", "zone", "source", "served_mw"], rows)?)
}

/// `iteration_trace.csv`.
pub fn write_trace_csv(trace: &IterationTrace, path: &Path) -> std::io::Result<()> {
    let mut rows = vec![vec![
        "0".to_string(),
        sig12(trace.initial_consequential_tco2),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]];
    rows.extend(trace.records.iter().map(|r| {
        vec![
            r.iteration.to_string(),
            sig12(r.consequential_tco2),
            sig12(r.rel_change),
            sig12(r.schedule_delta_norm),
            sig12(r.proxy_before),
            sig12(r.proxy_after),
        ]
    }));
    write_atomic(
        path,
        &csv_bytes(
            &["iteration", "consequential_tco2", "rel_change", "schedule_delta_norm", "proxy_before", "proxy_after"],
            rows,
        )?,
    )
}
