//! Fixed-seed inputs for the benchmarks.

use gridmarg::grid::{FlexibleLoad, Generator, GeneratorKind, GridModel, ScenarioConfig, StorageUnit, Zone};
use gridmarg::lp::LpProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A feasible LP with `n` box-constrained variables, `m` dense
/// `<=` rows and one equality row.
pub fn random_lp(n: usize, m: usize, seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = LpProblem::new();
    for _ in 0..n {
        p.add_bounded_var(rng.gen_range(-5.0..5.0), 0.0, rng.gen_range(1.0..10.0));
    }
    // Every row keeps some slack at x = 0.5, which also meets the equality.
    for _ in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(0.0..3.0))).collect();
        let at_half: f64 = coeffs.iter().map(|(_, a)| 0.5 * a).sum();
        p.add_le(coeffs, at_half + rng.gen_range(1.0..10.0));
    }
    p.add_eq((0..n).map(|j| (j, 1.0)).collect(), 0.5 * n as f64);
    p
}

fn thermal(id: &str, cap: f64, cost: f64, ef: f64) -> Generator {
    Generator {
        id: id.into(),
        zone_id: "z".into(),
        kind: GeneratorKind::Thermal,
        existing_cap_mw: cap,
        buildable: false,
        retirable: false,
        inv_cost_annual: 0.0,
        fixed_om: 0.0,
        var_om: cost,
        heat_rate: 1.0,
        fuel_price: 0.0,
        emissions_factor: ef,
        capacity_factor_profile: None,
        min_stable_fraction: 0.0,
        startup_cost: 0.0,
        is_clean: false,
    }
}

/// One zone over `hours`: coal with a minimum stable level, gas, buildable
/// solar, a battery and a flexible EV load that may move 12 h either way.
pub fn day_ahead_system(hours: usize) -> GridModel {
    let demand = (0..hours)
        .map(|t| match t % 24 {
            17..=21 => 85.0,
            7..=16 => 60.0,
            _ => 55.0,
        })
        .collect();
    let solar_cf = (0..hours)
        .map(|t| {
            let h = (t % 24) as f64;
            if (7.0..=19.0).contains(&h) {
                (std::f64::consts::PI * (h - 7.0) / 12.0).sin()
            } else {
                0.0
            }
        })
        .collect();
    let coal = Generator { min_stable_fraction: 0.6, startup_cost: 300.0, ..thermal("coal", 70.0, 20.0, 0.9) };
    let solar = Generator {
        kind: GeneratorKind::VariableRenewable,
        buildable: true,
        inv_cost_annual: 20_000.0,
        heat_rate: 0.0,
        capacity_factor_profile: Some(solar_cf),
        is_clean: true,
        ..thermal("solar", 0.0, 0.0, 0.0)
    };
    GridModel {
        zones: vec![Zone { id: "z".into(), demand, clean_share_min: 0.0 }],
        generators: vec![coal, thermal("gas", 100.0, 40.0, 0.4), solar],
        storage_units: vec![StorageUnit {
            id: "bat".into(),
            zone_id: "z".into(),
            existing_power_mw: 10.0,
            existing_energy_mwh: 40.0,
            buildable: false,
            inv_cost_power: 0.0,
            inv_cost_energy: 0.0,
            charge_efficiency: 0.9,
            discharge_efficiency: 0.9,
            var_om: 0.0,
        }],
        lines: vec![],
        flexible_loads: vec![FlexibleLoad {
            id: "ev".into(),
            zone_id: "z".into(),
            baseline_profile: (0..hours).map(|t| if (17..22).contains(&(t % 24)) { 8.0 } else { 0.0 }).collect(),
            max_advance_hours: 12,
            max_delay_hours: 12,
            max_charge_rate_mw: None,
            penetration_scale: 1.0,
        }],
        config: ScenarioConfig::new(hours),
    }
}
