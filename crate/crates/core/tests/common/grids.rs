//! Small grid builders shared by the integration tests.

use gridmarg::grid::{
    FlexibleLoad, Generator, GeneratorKind, GridModel, ScenarioConfig, StorageUnit, TransmissionLine, Zone,
};

/// Thermal unit whose marginal cost is exactly `cost` (heat rate 1, no fuel).
pub fn thermal(id: &str, zone: &str, cap: f64, cost: f64, ef: f64) -> Generator {
    Generator {
        id: id.into(),
        zone_id: zone.into(),
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

pub fn renewable(id: &str, zone: &str, cap: f64, cf: Vec<f64>) -> Generator {
    Generator {
        kind: GeneratorKind::VariableRenewable,
        heat_rate: 0.0,
        capacity_factor_profile: Some(cf),
        is_clean: true,
        ..thermal(id, zone, cap, 0.0, 0.0)
    }
}

pub fn buildable_renewable(id: &str, zone: &str, annual_cost: f64, cf: Vec<f64>) -> Generator {
    Generator { buildable: true, inv_cost_annual: annual_cost, ..renewable(id, zone, 0.0, cf) }
}

pub fn battery(id: &str, zone: &str, power: f64, energy: f64, eta: f64) -> StorageUnit {
    StorageUnit {
        id: id.into(),
        zone_id: zone.into(),
        existing_power_mw: power,
        existing_energy_mwh: energy,
        buildable: false,
        inv_cost_power: 0.0,
        inv_cost_energy: 0.0,
        charge_efficiency: eta,
        discharge_efficiency: eta,
        var_om: 0.0,
    }
}

pub fn line(id: &str, from: &str, to: &str, cap: f64, loss: f64) -> TransmissionLine {
    TransmissionLine {
        id: id.into(),
        from_zone: from.into(),
        to_zone: to.into(),
        capacity_mw: cap,
        expandable: false,
        expansion_cost: 0.0,
        loss_fraction: loss,
    }
}

pub fn ev(id: &str, zone: &str, profile: Vec<f64>, advance: usize, delay: usize, rate: Option<f64>) -> FlexibleLoad {
    FlexibleLoad {
        id: id.into(),
        zone_id: zone.into(),
        baseline_profile: profile,
        max_advance_hours: advance,
        max_delay_hours: delay,
        max_charge_rate_mw: rate,
        penetration_scale: 1.0,
    }
}

pub fn zone(id: &str, demand: Vec<f64>) -> Zone {
    Zone { id: id.into(), demand, clean_share_min: 0.0 }
}

pub fn one_zone(demand: Vec<f64>, generators: Vec<Generator>) -> GridModel {
    let h = demand.len();
    GridModel {
        zones: vec![zone("z", demand)],
        generators,
        storage_units: vec![],
        lines: vec![],
        flexible_loads: vec![],
        config: ScenarioConfig::new(h),
    }
}

/// Bell-shaped solar availability peaking at 13:00, zero outside 7..=19.
pub fn solar_cf(h: usize) -> Vec<f64> {
    (0..h)
        .map(|t| {
            let hour = (t % 24) as f64;
            if (7.0..=19.0).contains(&hour) {
                (std::f64::consts::PI * (hour - 7.0) / 12.0).sin().max(0.0)
            } else {
                0.0
            }
        })
        .collect()
}
