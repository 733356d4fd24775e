use super::{
    Capacities, ExpansionModel, FlexVars, GeneratorVars, LineVars, ModelIndex, ModelMode, PlanError, StorageVars,
};
use crate::flex::{build_flex_constraints, FlexMode};
use crate::grid::{GeneratorKind, GridModel};
use crate::lp::LpProblem;

/// Investment and operations co-optimized; build/retire decisions free
/// where the entity allows them.
pub fn build_expansion_lp(grid: &GridModel) -> Result<ExpansionModel, PlanError> {
    build_model(grid, ModelMode::CapacityExpansion, None)
}

/// Same constraint structure with investment and retirement pinned to
/// `fixed`; the objective keeps only operating terms.
pub fn build_operational_lp(grid: &GridModel, fixed: &Capacities) -> Result<ExpansionModel, PlanError> {
    for g in grid.generators.iter().filter(|g| g.buildable || g.retirable) {
        if !fixed.generators.contains_key(&g.id) {
            return Err(PlanError::MissingCapacity(format!("generator {}", g.id)));
        }
    }
    for s in grid.storage_units.iter().filter(|s| s.buildable) {
        if !fixed.storage.contains_key(&s.id) {
            return Err(PlanError::MissingCapacity(format!("storage {}", s.id)));
        }
    }
    for l in grid.lines.iter().filter(|l| l.expandable) {
        if !fixed.lines.contains_key(&l.id) {
            return Err(PlanError::MissingCapacity(format!("line {}", l.id)));
        }
    }
    build_model(grid, ModelMode::OperationalFixed, Some(fixed))
}

struct Builder {
    p: LpProblem,
    var_hour: Vec<Option<usize>>,
    ineq_row_hour: Vec<Option<usize>>,
}

impl Builder {
    fn var(&mut self, cost: f64, lower: f64, upper: f64, hour: Option<usize>) -> usize {
        self.var_hour.push(hour);
        self.p.add_bounded_var(cost, lower, upper)
    }

    fn le(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64, hour: Option<usize>) -> usize {
        self.ineq_row_hour.push(hour);
        self.p.add_le(coeffs, rhs)
    }

    fn eq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.p.add_eq(coeffs, rhs)
    }
}

/// Builds the LP from the grid data as given. Multipliers stored in the
/// config are not applied here; pass [`GridModel::resolved`] output when the
/// scenario carries any.
pub fn build_model(grid: &GridModel, mode: ModelMode, fixed: Option<&Capacities>) -> Result<ExpansionModel, PlanError> {
    grid.validate().map_err(|e| PlanError::ModelBuild(e.to_string()))?;
    let h = grid.horizon();
    let nz = grid.zones.len();
    let yf = grid.config.year_fraction();
    let expansion = mode == ModelMode::CapacityExpansion;
    let zone_of = |id: &str| grid.zones.iter().position(|z| z.id == id).expect("validated zone reference");
    let pinned = |map_value: Option<f64>| map_value.unwrap_or(0.0);

    let mut b = Builder { p: LpProblem::new(), var_hour: Vec::new(), ineq_row_hour: Vec::new() };
    let mut cost_offset = 0.0;
    let mut emissions = Vec::new();
    // Terms of each power-balance row, [zone][hour].
    let mut balance: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); h]; nz];
    let mut clean_supply: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nz];
    let mut flex_consumption: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nz];

    let mut gen_vars = Vec::with_capacity(grid.generators.len());
    for g in &grid.generators {
        let z = zone_of(&g.zone_id);
        let (new, retired) = if expansion {
            let new_ub = if g.buildable { f64::INFINITY } else { 0.0 };
            let ret_ub = if g.retirable { g.existing_cap_mw } else { 0.0 };
            cost_offset += yf * g.fixed_om * g.existing_cap_mw;
            (
                b.var(yf * (g.inv_cost_annual + g.fixed_om), 0.0, new_ub, None),
                b.var(-yf * g.fixed_om, 0.0, ret_ub, None),
            )
        } else {
            let (n, r) = fixed.and_then(|f| f.generators.get(&g.id).copied()).unwrap_or((0.0, 0.0));
            if n < 0.0 || r < 0.0 || r > g.existing_cap_mw * (1.0 + 1e-9) + 1e-9 {
                return Err(PlanError::ModelBuild(format!("generator {}: fixed new {n} / retired {r} out of range", g.id)));
            }
            (b.var(0.0, n, n, None), b.var(0.0, r, r, None))
        };
        let mc = g.marginal_cost();
        let generation: Vec<usize> = (0..h).map(|t| b.var(mc, 0.0, f64::INFINITY, Some(t))).collect();
        for (t, &v) in generation.iter().enumerate() {
            balance[z][t].push((v, 1.0));
            if g.emissions_factor != 0.0 {
                emissions.push((v, g.emissions_factor));
            }
            if g.is_clean {
                clean_supply[z].push((v, 1.0));
            }
        }
        let commitment = if g.has_commitment() {
            let commit: Vec<usize> = (0..h).map(|t| b.var(0.0, 0.0, f64::INFINITY, Some(t))).collect();
            let startup: Vec<usize> = (0..h).map(|t| b.var(g.startup_cost, 0.0, f64::INFINITY, Some(t))).collect();
            for t in 0..h {
                b.le(vec![(generation[t], 1.0), (commit[t], -1.0)], 0.0, Some(t));
                if g.min_stable_fraction > 0.0 {
                    b.le(vec![(commit[t], g.min_stable_fraction), (generation[t], -1.0)], 0.0, Some(t));
                }
                b.le(vec![(commit[t], 1.0), (new, -1.0), (retired, 1.0)], g.existing_cap_mw, Some(t));
                let prev = commit[(t + h - 1) % h];
                if h > 1 {
                    b.le(vec![(commit[t], 1.0), (prev, -1.0), (startup[t], -1.0)], 0.0, Some(t));
                }
            }
            Some((commit, startup))
        } else {
            for t in 0..h {
                let a = if g.kind == GeneratorKind::Thermal { 1.0 } else { g.availability(t) };
                let mut row = vec![(generation[t], 1.0)];
                if a != 0.0 {
                    row.push((new, -a));
                    row.push((retired, a));
                }
                b.le(row, a * g.existing_cap_mw, Some(t));
            }
            None
        };
        gen_vars.push(GeneratorVars { new, retired, generation, commitment });
    }

    let mut storage_vars = Vec::with_capacity(grid.storage_units.len());
    for s in &grid.storage_units {
        let z = zone_of(&s.zone_id);
        let (new_power, new_energy) = if expansion {
            let ub = if s.buildable { f64::INFINITY } else { 0.0 };
            (b.var(yf * s.inv_cost_power, 0.0, ub, None), b.var(yf * s.inv_cost_energy, 0.0, ub, None))
        } else {
            let (p, e) = fixed.and_then(|f| f.storage.get(&s.id).copied()).unwrap_or((0.0, 0.0));
            (b.var(0.0, p, p, None), b.var(0.0, e, e, None))
        };
        let charge: Vec<usize> = (0..h).map(|t| b.var(0.0, 0.0, f64::INFINITY, Some(t))).collect();
        let discharge: Vec<usize> = (0..h).map(|t| b.var(s.var_om, 0.0, f64::INFINITY, Some(t))).collect();
        let soc: Vec<usize> = (0..h).map(|t| b.var(0.0, 0.0, f64::INFINITY, Some(t))).collect();
        let mut balance_rows = Vec::with_capacity(h);
        for t in 0..h {
            b.le(vec![(charge[t], 1.0), (new_power, -1.0)], s.existing_power_mw, Some(t));
            b.le(vec![(discharge[t], 1.0), (new_power, -1.0)], s.existing_power_mw, Some(t));
            b.le(vec![(soc[t], 1.0), (new_energy, -1.0)], s.existing_energy_mwh, Some(t));
            let prev = soc[(t + h - 1) % h];
            let mut row = vec![(soc[t], 1.0), (charge[t], -s.charge_efficiency), (discharge[t], 1.0 / s.discharge_efficiency)];
            if h > 1 {
                row.push((prev, -1.0));
            } else {
                row[0].1 = 0.0;
            }
            balance_rows.push(b.eq(row, 0.0));
            balance[z][t].push((discharge[t], 1.0));
            balance[z][t].push((charge[t], -1.0));
        }
        storage_vars.push(StorageVars { new_power, new_energy, charge, discharge, soc, balance_rows });
    }

    let mut line_vars = Vec::with_capacity(grid.lines.len());
    for l in &grid.lines {
        let (from, to) = (zone_of(&l.from_zone), zone_of(&l.to_zone));
        let new = if expansion {
            b.var(yf * l.expansion_cost, 0.0, if l.expandable { f64::INFINITY } else { 0.0 }, None)
        } else {
            let n = pinned(fixed.and_then(|f| f.lines.get(&l.id).copied()));
            b.var(0.0, n, n, None)
        };
        let forward: Vec<usize> = (0..h).map(|t| b.var(0.0, 0.0, f64::INFINITY, Some(t))).collect();
        let backward: Vec<usize> = (0..h).map(|t| b.var(0.0, 0.0, f64::INFINITY, Some(t))).collect();
        let keep = 1.0 - l.loss_fraction;
        for t in 0..h {
            b.le(vec![(forward[t], 1.0), (new, -1.0)], l.capacity_mw, Some(t));
            b.le(vec![(backward[t], 1.0), (new, -1.0)], l.capacity_mw, Some(t));
            balance[from][t].push((forward[t], -1.0));
            balance[to][t].push((forward[t], keep));
            balance[to][t].push((backward[t], -1.0));
            balance[from][t].push((backward[t], keep));
        }
        line_vars.push(LineVars { new, forward, backward });
    }

    let mut flex_vars = Vec::with_capacity(grid.flexible_loads.len());
    for f in &grid.flexible_loads {
        let z = zone_of(&f.zone_id);
        let set = build_flex_constraints(f, FlexMode::of_load(f))?;
        let (served, cumulative) = match &set.pinned {
            Some(profile) => ((0..h).map(|t| b.var(0.0, profile[t], profile[t], Some(t))).collect::<Vec<_>>(), None),
            None => {
                let served: Vec<usize> = (0..h).map(|t| b.var(0.0, 0.0, set.rate_cap, Some(t))).collect();
                let cumulative: Vec<usize> = (0..h)
                    .map(|t| b.var(0.0, set.cumulative_lower[t], set.cumulative_upper[t], Some(t)))
                    .collect();
                for t in 0..h {
                    let mut row = vec![(cumulative[t], 1.0), (served[t], -1.0)];
                    if t > 0 {
                        row.push((cumulative[t - 1], -1.0));
                    }
                    b.eq(row, 0.0);
                }
                (served, Some(cumulative))
            }
        };
        for (t, &v) in served.iter().enumerate() {
            balance[z][t].push((v, -1.0));
            flex_consumption[z].push((v, 1.0));
        }
        flex_vars.push(FlexVars { served, cumulative });
    }

    let non_served: Vec<Vec<Option<usize>>> = (0..nz)
        .map(|z| {
            (0..h)
                .map(|t| {
                    grid.config.nse_penalty.map(|pen| {
                        let v = b.var(pen, 0.0, f64::INFINITY, Some(t));
                        balance[z][t].push((v, 1.0));
                        v
                    })
                })
                .collect()
        })
        .collect();

    let mut balance_rows = vec![Vec::with_capacity(h); nz];
    for (z, zone) in grid.zones.iter().enumerate() {
        for t in 0..h {
            let terms = std::mem::take(&mut balance[z][t]);
            balance_rows[z].push(b.eq(terms, zone.demand[t]));
        }
    }

    let mut clean_share_rows = vec![None; nz];
    for (z, zone) in grid.zones.iter().enumerate() {
        let share = zone.clean_share_min;
        if share > 0.0 {
            let mut row: Vec<(usize, f64)> = flex_consumption[z].iter().map(|&(v, _)| (v, share)).collect();
            row.extend(clean_supply[z].iter().map(|&(v, _)| (v, -1.0)));
            let fixed_demand: f64 = zone.demand.iter().sum();
            clean_share_rows[z] = Some(b.le(row, -share * fixed_demand, None));
        }
    }
    let co2_cap_row = grid.config.co2_cap_tons.map(|cap| b.le(emissions.clone(), cap, None));

    let index = ModelIndex {
        generators: gen_vars,
        storage: storage_vars,
        lines: line_vars,
        flex: flex_vars,
        non_served,
        balance_rows,
        clean_share_rows,
        co2_cap_row,
        var_hour: b.var_hour,
        ineq_row_hour: b.ineq_row_hour,
        emissions,
    };
    if expansion {
        // Sanity: nothing pinned in expansion mode beyond entity permissions.
        debug_assert!(index.generators.len() == grid.generators.len());
    }
    Ok(ExpansionModel {
        problem: b.p,
        index,
        mode,
        cost_offset: if expansion { cost_offset } else { 0.0 },
        penalty_terms: Vec::new(),
        grid: grid.clone(),
    })
}
