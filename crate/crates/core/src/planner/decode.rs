use super::{
    DispatchResult, ExpansionModel, FlexResult, GeneratorResult, LineResult, PlanError, StorageResult,
};
use crate::grid::GeneratorKind;
use crate::lp::{solve, LpSolution, LpStatus};

pub fn solve_model(model: &ExpansionModel) -> Result<DispatchResult, PlanError> {
    solve_model_full(model).map(|(r, _)| r)
}

/// Solves and decodes, also handing back the raw LP solution for callers
/// that need duals beyond the balance rows.
pub fn solve_model_full(model: &ExpansionModel) -> Result<(DispatchResult, LpSolution), PlanError> {
    let sol = solve(&model.problem)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(PlanError::Infeasible { mode: model.mode }),
        LpStatus::Unbounded => return Err(PlanError::Unbounded { mode: model.mode }),
    }
    Ok((decode(model, &sol), sol))
}

fn decode(model: &ExpansionModel, sol: &LpSolution) -> DispatchResult {
    let grid = &model.grid;
    let idx = &model.index;
    let x = &sol.x;
    let h = grid.horizon();
    let nz = grid.zones.len();
    let zone_of = |id: &str| grid.zones.iter().position(|z| z.id == id).unwrap();
    let vals = |vars: &[usize]| vars.iter().map(|&j| x[j]).collect::<Vec<f64>>();

    let cost = model.cost_vector();
    let mut investment = model.cost_offset;
    let mut invest_var = |j: usize| investment += cost[j] * x[j];

    let mut emissions = vec![vec![0.0; h]; nz];
    let mut generators = Vec::with_capacity(grid.generators.len());
    for (g, v) in grid.generators.iter().zip(&idx.generators) {
        invest_var(v.new);
        invest_var(v.retired);
        let z = zone_of(&g.zone_id);
        let generation = vals(&v.generation);
        for (t, &q) in generation.iter().enumerate() {
            emissions[z][t] += q * g.emissions_factor;
        }
        let capacity = g.existing_cap_mw - x[v.retired] + x[v.new];
        let curtailment = match g.kind {
            GeneratorKind::Thermal => vec![0.0; h],
            _ => (0..h).map(|t| (g.availability(t) * capacity - generation[t]).max(0.0)).collect(),
        };
        generators.push(GeneratorResult {
            id: g.id.clone(),
            zone_id: g.zone_id.clone(),
            existing_mw: g.existing_cap_mw,
            new_mw: x[v.new],
            retired_mw: x[v.retired],
            generation,
            curtailment,
        });
    }

    let mut demand: Vec<Vec<f64>> = grid.zones.iter().map(|z| z.demand.clone()).collect();
    let storage = grid
        .storage_units
        .iter()
        .zip(&idx.storage)
        .map(|(s, v)| {
            invest_var(v.new_power);
            invest_var(v.new_energy);
            StorageResult {
                id: s.id.clone(),
                zone_id: s.zone_id.clone(),
                existing_power_mw: s.existing_power_mw,
                existing_energy_mwh: s.existing_energy_mwh,
                new_power_mw: x[v.new_power],
                new_energy_mwh: x[v.new_energy],
                charge: vals(&v.charge),
                discharge: vals(&v.discharge),
                soc: vals(&v.soc),
            }
        })
        .collect();
    let lines = grid
        .lines
        .iter()
        .zip(&idx.lines)
        .map(|(l, v)| {
            invest_var(v.new);
            LineResult {
                id: l.id.clone(),
                existing_mw: l.capacity_mw,
                new_mw: x[v.new],
                flow: (0..h).map(|t| x[v.forward[t]] - x[v.backward[t]]).collect(),
            }
        })
        .collect();
    let flex = grid
        .flexible_loads
        .iter()
        .zip(&idx.flex)
        .map(|(f, v)| {
            let served = vals(&v.served);
            let z = zone_of(&f.zone_id);
            for (t, s) in served.iter().enumerate() {
                demand[z][t] += s;
            }
            FlexResult { id: f.id.clone(), zone_id: f.zone_id.clone(), served }
        })
        .collect();

    let non_served: Vec<Vec<f64>> =
        idx.non_served.iter().map(|row| row.iter().map(|v| v.map_or(0.0, |j| x[j])).collect()).collect();
    for z in 0..nz {
        for t in 0..h {
            demand[z][t] -= non_served[z][t];
        }
    }
    let prices = idx.balance_rows.iter().map(|row| row.iter().map(|&r| sol.eq_duals[r]).collect()).collect();

    let total_cost = model.cost_offset + cost.iter().zip(x).map(|(c, v)| c * v).sum::<f64>();
    DispatchResult {
        mode: model.mode,
        zone_ids: grid.zones.iter().map(|z| z.id.clone()).collect(),
        total_cost,
        investment_cost: investment,
        operational_cost: total_cost - investment,
        generators,
        storage,
        lines,
        flex,
        emissions,
        demand,
        prices,
        non_served,
    }
}
