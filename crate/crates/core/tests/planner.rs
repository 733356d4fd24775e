mod common;

use common::grids::*;
use gridmarg::grid::{GridModel, HOURS_PER_YEAR};
use gridmarg::planner::{
    build_expansion_lp, build_operational_lp, perturb_demand, solve_model, write_dispatch_outputs, Capacities,
    DispatchResult, ModelMode, PlanError, Perturbation,
};

fn expansion(grid: &GridModel) -> DispatchResult {
    solve_model(&build_expansion_lp(grid).unwrap()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn flat_demand_single_thermal() {
    let g = one_zone(vec![50.0; 24], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
    let m = build_expansion_lp(&g).unwrap();
    assert_eq!(m.index.balance_rows[0].len(), 24);
    let r = solve_model(&m).unwrap();
    for t in 0..24 {
        assert!((r.generators[0].generation[t] - 50.0).abs() < 1e-9);
        assert!((r.emissions[0][t] - 45.0).abs() < 1e-9);
        assert!((r.prices[0][t] - 20.0).abs() < 1e-9);
    }
    assert!(close(r.total_cost, 24.0 * 50.0 * 20.0, 1e-12));
}

#[test]
fn shortfall_is_shed_at_penalty_price() {
    let g = one_zone(vec![120.0; 24], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
    let r = expansion(&g);
    for t in 0..24 {
        assert!((r.non_served[0][t] - 20.0).abs() < 1e-9);
        assert!((r.prices[0][t] - 9000.0).abs() < 1e-6);
        assert!((r.demand[0][t] - 100.0).abs() < 1e-9);
    }
}

#[test]
fn shedding_disabled_makes_shortfall_infeasible() {
    let mut g = one_zone(vec![120.0; 4], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
    g.config.nse_penalty = None;
    let err = solve_model(&build_expansion_lp(&g).unwrap()).unwrap_err();
    assert!(matches!(err, PlanError::Infeasible { mode: ModelMode::CapacityExpansion }));
}

fn breakeven_toy(wind_annual_cost: f64) -> GridModel {
    one_zone(
        vec![50.0; 24],
        vec![thermal("coal", "z", 100.0, 20.0, 0.9), buildable_renewable("wind", "z", wind_annual_cost, vec![0.5; 24])],
    )
}

#[test]
fn wind_built_below_breakeven_only() {
    // A MW of wind costs cost * H / 8760 over the horizon and saves
    // 0.5 * H MWh of coal at $20, so it pays off iff cost < 87,600 $/MW-yr.
    let breakeven = 20.0 * 0.5 * HOURS_PER_YEAR;
    let cheap = expansion(&breakeven_toy(0.5 * breakeven));
    assert!((cheap.generators[1].new_mw - 100.0).abs() < 1e-6);
    assert!(cheap.generators[0].generation.iter().all(|&g| g.abs() < 1e-6));
    assert!(cheap.total_emissions().abs() < 1e-6);

    let dear = expansion(&breakeven_toy(1.5 * breakeven));
    assert!(dear.generators[1].new_mw.abs() < 1e-9);
    assert!((dear.total_emissions() - 24.0 * 45.0).abs() < 1e-6);
}

#[test]
fn pinned_zero_wind_runs_all_coal() {
    let g = breakeven_toy(10_000.0);
    let mut caps = Capacities::default();
    caps.generators.insert("wind".into(), (0.0, 0.0));
    let r = solve_model(&build_operational_lp(&g, &caps).unwrap()).unwrap();
    assert!(r.generators[0].generation.iter().all(|&x| (x - 50.0).abs() < 1e-9));
    assert!(matches!(build_operational_lp(&g, &Capacities::default()), Err(PlanError::MissingCapacity(_))));
}

#[test]
fn operational_resolve_is_a_fixed_point() {
    let mut g = breakeven_toy(30_000.0);
    g.zones[0].demand = (0..24).map(|t| 40.0 + 3.0 * t as f64).collect();
    g.generators[1].capacity_factor_profile = Some((0..24).map(|t| 0.2 + 0.03 * t as f64).collect());
    g.generators.push(thermal("gas", "z", 80.0, 45.0, 0.4));
    let base = expansion(&g);
    let op = solve_model(&build_operational_lp(&g, &base.capacities()).unwrap()).unwrap();
    assert!(close(op.total_cost, base.operational_cost, 1e-6), "{} vs {}", op.total_cost, base.operational_cost);
    for (a, b) in base.generators.iter().zip(&op.generators) {
        for t in 0..24 {
            assert!((a.generation[t] - b.generation[t]).abs() < 1e-6);
        }
    }
}

fn arbitrage_toy() -> GridModel {
    let mut g = one_zone(
        vec![20.0, 150.0],
        vec![thermal("coal", "z", 100.0, 20.0, 0.9), thermal("gas", "z", 100.0, 50.0, 0.4)],
    );
    g.storage_units.push(battery("bat", "z", 30.0, 40.0, 1.0));
    g
}

#[test]
fn storage_charges_cheap_and_discharges_dear() {
    let r = expansion(&arbitrage_toy());
    let s = &r.storage[0];
    assert!((s.charge[0] - 30.0).abs() < 1e-9 && s.discharge[0].abs() < 1e-9);
    assert!((s.discharge[1] - 30.0).abs() < 1e-9 && s.charge[1].abs() < 1e-9);
    assert!((r.prices[0][0] - 20.0).abs() < 1e-9);
    assert!((r.prices[0][1] - 50.0).abs() < 1e-9);
    // 50*20 + 100*20 + 20*50: the 30 MWh moved saves the 30 $/MWh spread.
    assert!(close(r.total_cost, 4000.0, 1e-12));
}

#[test]
fn cyclic_storage_wraps_around() {
    let mut g = one_zone(
        (0..24).map(|t| if (8..18).contains(&t) { 40.0 } else { 90.0 }).collect(),
        vec![thermal("coal", "z", 70.0, 20.0, 0.9), thermal("gas", "z", 100.0, 50.0, 0.4)],
    );
    g.storage_units.push(battery("bat", "z", 25.0, 100.0, 0.9));
    let r = expansion(&g);
    let s = &r.storage[0];
    let h = 24;
    for t in 0..h {
        let prev = s.soc[(t + h - 1) % h];
        let lhs = s.soc[t] - prev - 0.9 * s.charge[t] + s.discharge[t] / 0.9;
        assert!(lhs.abs() < 1e-6, "hour {t}: {lhs}");
        assert!(s.soc[t] >= -1e-9 && s.soc[t] <= 100.0 + 1e-9);
    }
    assert!(s.discharge.iter().sum::<f64>() > 1.0);
}

#[test]
fn co2_cap_dual_is_the_carbon_price() {
    let mut g = one_zone(
        vec![80.0; 4],
        vec![thermal("coal", "z", 100.0, 20.0, 0.9), thermal("gas", "z", 100.0, 50.0, 0.4)],
    );
    g.config.co2_cap_tons = Some(250.0);
    let m = build_expansion_lp(&g).unwrap();
    let (r, sol) = gridmarg::planner::solve_model_full(&m).unwrap();
    let gamma = sol.ineq_duals[m.index.co2_cap_row.unwrap()];
    // Switching coal to gas saves 0.5 t per MWh at 30 $/MWh.
    assert!((gamma - 60.0).abs() < 1e-6);
    assert!((r.total_emissions() - 250.0).abs() < 1e-6);

    let cost_at = |cap: f64| {
        let mut g2 = g.clone();
        g2.config.co2_cap_tons = Some(cap);
        expansion(&g2).total_cost
    };
    assert!(close(cost_at(249.0) - r.total_cost, gamma, 1e-9));
    assert!(close(r.total_cost - cost_at(251.0), gamma, 1e-9));
}

#[test]
fn one_mw_demand_step_costs_the_hour_price() {
    let g = one_zone(
        (0..24).map(|t| 60.0 + 2.5 * t as f64 + if t % 5 == 0 { 0.7 } else { 0.0 }).collect(),
        vec![
            thermal("coal", "z", 70.0, 20.0, 0.9),
            thermal("gas", "z", 50.0, 47.0, 0.4),
            thermal("peaker", "z", 60.0, 90.0, 0.6),
        ],
    );
    let caps = Capacities::default();
    let base = solve_model(&build_operational_lp(&g, &caps).unwrap()).unwrap();
    for t in [0, 3, 9, 15, 23] {
        let p = perturb_demand(&g, &[], &Perturbation::SingleHour { zone: "z".into(), hour: t, mw: 1.0 }).unwrap();
        let r = solve_model(&build_operational_lp(&p, &caps).unwrap()).unwrap();
        assert!((r.total_cost - base.total_cost - base.prices[0][t]).abs() < 1e-4, "hour {t}");
    }
}

#[test]
fn price_equals_marginal_unit_cost() {
    let mut gas = thermal("gas", "z", 50.0, 2.0, 0.4);
    gas.fuel_price = 3.5;
    gas.heat_rate = 7.2;
    let g = one_zone(vec![95.0; 6], vec![thermal("coal", "z", 70.0, 20.0, 0.9), gas, thermal("oil", "z", 40.0, 120.0, 0.8)]);
    let r = expansion(&g);
    for t in 0..6 {
        assert!((r.prices[0][t] - (3.5 * 7.2 + 2.0)).abs() < 1e-6);
    }
}

#[test]
fn two_zone_balance_and_emissions_accounting() {
    let h = 6;
    let mut g = one_zone((0..h).map(|t| 30.0 + 10.0 * t as f64).collect(), vec![thermal("coal", "z", 200.0, 20.0, 0.9)]);
    g.zones.push(zone("w", (0..h).map(|t| 80.0 - 5.0 * t as f64).collect()));
    g.generators.push(thermal("gas", "w", 60.0, 45.0, 0.4));
    g.generators.push(renewable("solar", "w", 50.0, (0..h).map(|t| [0.0, 0.3, 0.8, 1.0, 0.6, 0.1][t]).collect()));
    g.lines.push(line("zw", "z", "w", 40.0, 0.0));
    g.storage_units.push(battery("bat", "w", 10.0, 20.0, 0.95));
    g.flexible_loads.push(ev("ev", "w", vec![5.0; h], 2, 2, None));
    let r = expansion(&g);
    for (zi, zid) in r.zone_ids.iter().enumerate() {
        for t in 0..h {
            let mut supply: f64 =
                r.generators.iter().filter(|x| &x.zone_id == zid).map(|x| x.generation[t]).sum::<f64>();
            supply += r.storage.iter().filter(|s| &s.zone_id == zid).map(|s| s.discharge[t] - s.charge[t]).sum::<f64>();
            let flow = r.lines[0].flow[t];
            supply += if zi == 0 { -flow } else { flow };
            supply += r.non_served[zi][t];
            let flex: f64 = r.flex.iter().filter(|f| &f.zone_id == zid).map(|f| f.served[t]).sum();
            assert!((supply - flex - g.zones[zi].demand[t]).abs() < 1e-5, "zone {zid} hour {t}");
        }
    }
    let by_unit: f64 = r
        .generators
        .iter()
        .zip(&g.generators)
        .map(|(x, spec)| x.generation.iter().sum::<f64>() * spec.emissions_factor)
        .sum();
    assert!((by_unit - r.total_emissions()).abs() <= 1e-12 * by_unit.max(1.0));
    let served: f64 = r.flex[0].served.iter().sum();
    assert!((served - 5.0 * h as f64).abs() < 1e-6);
}

#[test]
fn relaxing_capacity_never_raises_cost() {
    let cases: Vec<GridModel> = vec![
        one_zone(vec![120.0; 4], vec![thermal("coal", "z", 100.0, 20.0, 0.9), thermal("gas", "z", 10.0, 50.0, 0.4)]),
        breakeven_toy(60_000.0),
        arbitrage_toy(),
        one_zone(vec![30.0, 60.0, 90.0], vec![thermal("a", "z", 50.0, 10.0, 1.0), thermal("b", "z", 50.0, 30.0, 0.5)]),
        {
            let mut g = one_zone(vec![70.0; 5], vec![thermal("a", "z", 40.0, 15.0, 1.0)]);
            g.zones.push(zone("w", vec![10.0; 5]));
            g.generators.push(thermal("b", "w", 100.0, 25.0, 0.3));
            g.lines.push(line("l", "w", "z", 20.0, 0.05));
            g
        },
    ];
    for (k, g) in cases.iter().enumerate() {
        let base = expansion(g).total_cost;
        for i in 0..g.generators.len() {
            let mut relaxed = g.clone();
            relaxed.generators[i].existing_cap_mw += 25.0;
            let c = expansion(&relaxed).total_cost;
            assert!(c <= base + 1e-6 * base.abs().max(1.0), "case {k} gen {i}: {c} > {base}");
        }
    }
}

#[test]
fn commitment_enforces_min_stable_output() {
    let mut coal = thermal("coal", "z", 100.0, 20.0, 0.9);
    coal.min_stable_fraction = 0.5;
    coal.startup_cost = 40.0;
    let g = one_zone(vec![10.0, 60.0, 60.0, 10.0], vec![coal, thermal("gas", "z", 100.0, 50.0, 0.4)]);
    let m = build_expansion_lp(&g).unwrap();
    let (commit, _) = m.index.generators[0].commitment.clone().unwrap();
    let (r, sol) = gridmarg::planner::solve_model_full(&m).unwrap();
    for t in 0..4 {
        let u = sol.x[commit[t]];
        let gen = r.generators[0].generation[t];
        assert!(gen <= u + 1e-9 && 0.5 * u <= gen + 1e-9);
    }
}

#[test]
fn exports_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let g = arbitrage_toy();
    let r = expansion(&g);
    let files = write_dispatch_outputs(&r, &g, dir.path()).unwrap();
    assert_eq!(files.len(), 5);
    let prices = std::fs::read_to_string(dir.path().join("prices.csv")).unwrap();
    assert_eq!(prices.lines().next(), Some("hour,zone,usd_per_mwh"));
    assert_eq!(prices.lines().count(), 3);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!((summary["total_cost"].as_f64().unwrap() - 4000.0).abs() < 1e-6);
}
