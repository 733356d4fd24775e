mod common;

use common::grids::*;
use gridmarg::flex::{
    apply_fixed_schedule, cost_min_schedule, evaluate_fixed_schedule, schedule_min_srme, with_flex_mode,
    write_schedule_csv, write_trace_csv, ChargingSchedule, FlexError, FlexMode, LoadSchedule, ScheduleSource,
};
use gridmarg::grid::{Generator, GeneratorKind, GridModel};
use gridmarg::metrics::RateMethod;
use gridmarg::planner::{build_operational_lp, solve_model, Capacities};

fn pulse(h: usize, hour: usize, mwh: f64) -> Vec<f64> {
    let mut v = vec![0.0; h];
    v[hour] = mwh;
    v
}

fn operational_cost(g: &GridModel) -> f64 {
    solve_model(&build_operational_lp(g, &Capacities::default()).unwrap()).unwrap().total_cost
}

fn fixed_at(g: &GridModel, hour: usize, mwh: f64) -> GridModel {
    let s = ChargingSchedule {
        source: ScheduleSource::Fixed,
        loads: vec![LoadSchedule { load_id: "ev".into(), zone_id: "z".into(), served: pulse(g.horizon(), hour, mwh) }],
    };
    apply_fixed_schedule(g, &s).unwrap()
}

#[test]
fn no_flex_schedule_is_the_baseline() {
    let profile: Vec<f64> = (0..24).map(|t| 1.0 + (t % 5) as f64).collect();
    let mut g = one_zone(vec![40.0; 24], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
    g.flexible_loads.push(ev("ev", "z", profile.clone(), 0, 0, None));
    let (s, _) = cost_min_schedule(&g, None).unwrap();
    assert_eq!(s.loads[0].served, profile);
}

#[test]
fn delay_window_with_flat_prices_is_indifferent() {
    let h = 30;
    let mut g = one_zone(vec![30.0; h], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
    g.flexible_loads.push(ev("ev", "z", pulse(h, 18, 10.0), 0, 8, None));
    let optimal = operational_cost(&g);
    for hour in 18..=26 {
        assert!((operational_cost(&fixed_at(&g, hour, 10.0)) - optimal).abs() < 1e-6, "hour {hour}");
    }
    let (s, _) = cost_min_schedule(&g, Some(&Capacities::default())).unwrap();
    let served = &s.loads[0].served;
    assert!(served[..18].iter().all(|v| v.abs() < 1e-9) && served[27..].iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn delay_window_finds_the_cheap_hour() {
    let h = 30;
    let mut hydro = renewable("hydro", "z", 50.0, pulse(h, 23, 1.0));
    hydro.kind = GeneratorKind::HydroLike;
    hydro.var_om = 5.0;
    let mut g = one_zone(vec![30.0; h], vec![thermal("coal", "z", 100.0, 20.0, 0.9), hydro]);
    g.flexible_loads.push(ev("ev", "z", pulse(h, 18, 10.0), 0, 8, None));
    let (s, _) = cost_min_schedule(&g, Some(&Capacities::default())).unwrap();
    assert!((s.loads[0].served[23] - 10.0).abs() < 1e-9, "{:?}", s.loads[0].served);
    // Enumerating every single-hour placement agrees.
    let best = (18..=26).min_by(|&a, &b| {
        operational_cost(&fixed_at(&g, a, 10.0)).partial_cmp(&operational_cost(&fixed_at(&g, b, 10.0))).unwrap()
    });
    assert_eq!(best, Some(23));
}

#[test]
fn wide_window_fills_solar_hours_first() {
    // 60 MWh requested at 18:00, 10 MW cap, +-12 h. Free solar covers
    // 10:00-14:00 with room to spare, so the greedy oracle puts 50 MWh there.
    let h = 36;
    let cf: Vec<f64> = (0..h).map(|t| if (10..15).contains(&t) { 1.0 } else { 0.0 }).collect();
    let mut g = one_zone(vec![30.0; h], vec![thermal("coal", "z", 200.0, 20.0, 0.9), renewable("solar", "z", 100.0, cf)]);
    g.flexible_loads.push(ev("ev", "z", pulse(h, 18, 60.0), 12, 12, Some(10.0)));
    let (s, r) = cost_min_schedule(&g, Some(&Capacities::default())).unwrap();
    let served = &s.loads[0].served;
    let solar: f64 = served[10..15].iter().sum();
    assert!((solar - 50.0).abs() < 1e-9);
    assert!(served.iter().all(|v| *v <= 10.0 + 1e-9));
    assert!(served[..6].iter().chain(&served[31..]).all(|v| v.abs() < 1e-9));
    // Greedy cost: base coal 30 MW * 31 non-solar hours + 10 MWh coal for the rest.
    let base_coal = 30.0 * (h - 5) as f64;
    assert!((r.total_cost - 20.0 * (base_coal + 10.0)).abs() < 1e-6);
}

#[test]
fn infeasible_window_is_rejected() {
    let h = 6;
    let mut g = one_zone(vec![30.0; h], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
    g.flexible_loads.push(ev("ev", "z", pulse(h, 5, 10.0), 0, 3, Some(1.0)));
    let err = cost_min_schedule(&g, None).unwrap_err();
    assert!(matches!(err, FlexError::InfeasibleWindow { hour: 5, .. }), "{err}");
}

#[test]
fn pinned_load_above_rate_cap_is_rejected() {
    let h = 4;
    let mut g = one_zone(vec![30.0; h], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
    g.flexible_loads.push(ev("ev", "z", vec![1.0, 4.0, 1.0, 1.0], 0, 0, Some(3.0)));
    g.validate().unwrap();
    let err = cost_min_schedule(&g, None).unwrap_err();
    assert!(matches!(err, FlexError::InfeasibleWindow { hour: 1, .. }), "{err}");
}

#[test]
fn mismatched_schedule_is_rejected() {
    let h = 4;
    let mut g = one_zone(vec![30.0; h], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
    g.flexible_loads.push(ev("ev", "z", vec![1.0; h], 0, 2, None));
    let s = ChargingSchedule {
        source: ScheduleSource::Fixed,
        loads: vec![LoadSchedule { load_id: "ev".into(), zone_id: "z".into(), served: vec![1.0, 1.0, 1.0, 0.9] }],
    };
    assert!(matches!(evaluate_fixed_schedule(&g, &s), Err(FlexError::ScheduleMismatch { .. })));
}

fn shifting_toy(h: usize) -> GridModel {
    let demand: Vec<f64> = (0..h).map(|t| 40.0 + 25.0 * ((t as f64) * 0.5).sin()).collect();
    let mut g = one_zone(demand, vec![thermal("cheap", "z", 50.0, 10.0, 0.5), thermal("dear", "z", 100.0, 30.0, 0.5)]);
    g.flexible_loads.push(ev("ev", "z", (0..h).map(|t| 2.0 + (t % 3) as f64).collect(), 2, 2, Some(8.0)));
    g
}

#[test]
fn uniform_rates_leave_the_cost_schedule_alone() {
    let g = shifting_toy(12);
    let caps = Capacities::default();
    let (cost_min, _) = cost_min_schedule(&g, Some(&caps)).unwrap();
    for method in [RateMethod::Srme1, RateMethod::Srme2] {
        let (s, trace) = schedule_min_srme(&g, &caps, method, 1000.0).unwrap();
        assert!(s.distance(&cost_min) < 1e-6, "{method}: {:?} vs {:?}", s.loads[0].served, cost_min.loads[0].served);
        assert!(trace.converged);
    }
}

#[test]
fn zero_rate_hour_attracts_all_shiftable_energy() {
    // Coal is maxed out in hour 3 where a costly clean unit is marginal, so
    // hour 3 has a zero rate while every other hour runs coal at 0.9.
    let h = 7;
    let mut demand = vec![40.0; h];
    demand[3] = 100.0;
    let mut g = one_zone(
        demand,
        vec![thermal("coal", "z", 90.0, 20.0, 0.9), renewable("clean", "z", 100.0, vec![1.0; h])],
    );
    g.generators[1].var_om = 50.0;
    g.flexible_loads.push(ev("ev", "z", vec![1.0; h], 3, 3, Some(5.0)));
    let caps = Capacities::default();
    let (cost_min, _) = cost_min_schedule(&g, Some(&caps)).unwrap();
    assert!(cost_min.loads[0].served[3].abs() < 1e-9);
    let (s, trace) = schedule_min_srme(&g, &caps, RateMethod::Srme2, 1000.0).unwrap();
    assert!((s.loads[0].served[3] - 5.0).abs() < 1e-9, "{:?}", s.loads[0].served);
    assert!(trace.converged && trace.iterations_used <= 2, "{trace:?}");
    let total: f64 = s.loads[0].served.iter().sum();
    assert!((total - h as f64).abs() < 1e-9);
}

#[test]
fn fixed_cost_min_schedule_reproduces_the_flexible_optimum() {
    let h = 24;
    let mut g = one_zone(
        (0..h).map(|t| 50.0 + 20.0 * ((t as f64) * 0.3).cos()).collect(),
        vec![
            thermal("coal", "z", 40.0, 20.0, 0.9),
            buildable_gas(),
            buildable_renewable("solar", "z", 25_000.0, solar_cf(h)),
        ],
    );
    g.flexible_loads.push(ev("ev", "z", (0..h).map(|t| if t >= 17 { 6.0 } else { 1.0 }).collect(), 12, 12, None));
    let (s, flexible) = cost_min_schedule(&g, None).unwrap();
    let report = evaluate_fixed_schedule(&g, &s).unwrap();
    assert!((report.base_total_cost - flexible.total_cost).abs() <= 1e-6 * flexible.total_cost.abs().max(1.0));
}

fn buildable_gas() -> Generator {
    Generator { buildable: true, inv_cost_annual: 60_000.0, ..thermal("gas", "z", 30.0, 45.0, 0.4) }
}

#[test]
fn flex_mode_override_and_writers() {
    let g = shifting_toy(6);
    let w = with_flex_mode(&g, FlexMode::DelayOnly(8));
    assert_eq!((w.flexible_loads[0].max_advance_hours, w.flexible_loads[0].max_delay_hours), (0, 8));
    let (s, trace) = schedule_min_srme(&g, &Capacities::default(), RateMethod::Srme2, 1000.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_schedule_csv(&s, &g, &dir.path().join("schedule.csv")).unwrap();
    write_trace_csv(&trace, &dir.path().join("iteration_trace.csv")).unwrap();
    let sched = std::fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
    assert_eq!(sched.lines().next(), Some("hour,zone,source,served_mw"));
    assert_eq!(sched.lines().count(), 7);
    let tr = std::fs::read_to_string(dir.path().join("iteration_trace.csv")).unwrap();
    assert!(tr.starts_with("iteration,consequential_tco2,rel_change,schedule_delta_norm"));
    assert_eq!(tr.lines().count(), 2 + trace.records.len());
}
