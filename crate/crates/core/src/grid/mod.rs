//! Zonal power-system data model: zones, generators, storage, transmission,
//! flexible EV loads, policies and run configuration.

mod io;
mod sensitivity;

pub use io::{load_scenario, parse_scenario_str, write_scenario};
pub use sensitivity::{annualize, apply_sensitivity, capital_recovery_factor, scale_ev_penetration};

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

/// Hours in a year; annual fixed costs are charged pro rata for the modeled horizon.
pub const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("{path}: parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { path: String, line: Option<usize>, message: String },
    #[error("invalid {entity}.{field}: {message}")]
    Validation { entity: String, field: String, message: String },
    #[error("{entity}.{field}: series file {path} not found")]
    MissingSeries { entity: String, field: String, path: String },
    #[error("unknown zone {0}")]
    UnknownZone(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(entity: &str, field: &str, message: impl Into<String>) -> GridError {
    GridError::Validation { entity: entity.to_string(), field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub id: String,
    /// Fixed (non-EV) hourly load, MW.
    pub demand: Vec<f64>,
    /// Minimum share of zonal consumption met by clean generators.
    pub clean_share_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Thermal,
    VariableRenewable,
    HydroLike,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub zone_id: String,
    pub kind: GeneratorKind,
    pub existing_cap_mw: f64,
    pub buildable: bool,
    pub retirable: bool,
    /// Annualized investment cost, $/MW-yr.
    pub inv_cost_annual: f64,
    /// $/MW-yr on surviving capacity.
    pub fixed_om: f64,
    /// $/MWh; negative values carry a production subsidy.
    pub var_om: f64,
    /// MMBtu/MWh.
    pub heat_rate: f64,
    /// $/MMBtu.
    pub fuel_price: f64,
    /// tCO2/MWh.
    pub emissions_factor: f64,
    pub capacity_factor_profile: Option<Vec<f64>>,
    pub min_stable_fraction: f64,
    /// $/MW started.
    pub startup_cost: f64,
    pub is_clean: bool,
}

impl Generator {
    /// Short-run marginal cost, $/MWh.
    pub fn marginal_cost(&self) -> f64 {
        self.var_om + self.heat_rate * self.fuel_price
    }

    pub fn availability(&self, hour: usize) -> f64 {
        self.capacity_factor_profile.as_ref().map_or(1.0, |p| p[hour])
    }

    /// Thermal units with a minimum stable level or a start-up cost get the
    /// linearized commitment formulation.
    pub fn has_commitment(&self) -> bool {
        self.kind == GeneratorKind::Thermal && (self.min_stable_fraction > 0.0 || self.startup_cost > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageUnit {
    pub id: String,
    pub zone_id: String,
    #[serde(default)]
    pub existing_power_mw: f64,
    #[serde(default)]
    pub existing_energy_mwh: f64,
    #[serde(default)]
    pub buildable: bool,
    #[serde(default)]
    pub inv_cost_power: f64,
    #[serde(default)]
    pub inv_cost_energy: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    #[serde(default)]
    pub var_om: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionLine {
    pub id: String,
    pub from_zone: String,
    pub to_zone: String,
    pub capacity_mw: f64,
    #[serde(default)]
    pub expandable: bool,
    #[serde(default)]
    pub expansion_cost: f64,
    #[serde(default)]
    pub loss_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlexibleLoad {
    pub id: String,
    pub zone_id: String,
    /// Requested charging, MW per hour.
    pub baseline_profile: Vec<f64>,
    pub max_advance_hours: usize,
    pub max_delay_hours: usize,
    /// `None` means three times the peak of the effective baseline.
    pub max_charge_rate_mw: Option<f64>,
    pub penetration_scale: f64,
}

/// Multiplier applied to the peak hourly request when no rate cap is given.
pub const DEFAULT_CHARGE_RATE_MULTIPLE: f64 = 3.0;

impl FlexibleLoad {
    /// Requested charging after `penetration_scale`.
    pub fn effective_baseline(&self) -> Vec<f64> {
        self.baseline_profile.iter().map(|v| v * self.penetration_scale).collect()
    }

    pub fn charge_rate_cap(&self) -> f64 {
        self.max_charge_rate_mw.unwrap_or_else(|| {
            DEFAULT_CHARGE_RATE_MULTIPLE * self.effective_baseline().iter().fold(0f64, |a, &b| a.max(b))
        })
    }

    pub fn total_energy(&self) -> f64 {
        self.effective_baseline().iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostMultipliers {
    #[serde(default = "one")]
    pub renewable_capex: f64,
    #[serde(default = "one")]
    pub gas_price: f64,
}

impl Default for CostMultipliers {
    fn default() -> Self {
        Self { renewable_capex: 1.0, gas_price: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub horizon_hours: usize,
    #[serde(default = "one")]
    pub ev_penetration_multiplier: f64,
    #[serde(default = "defaults::perturbation_fraction")]
    pub perturbation_fraction: f64,
    #[serde(default = "defaults::srme1_fraction")]
    pub srme1_fraction: f64,
    #[serde(default = "defaults::emissions_penalty")]
    pub emissions_penalty: f64,
    #[serde(default = "defaults::convergence_threshold")]
    pub convergence_threshold: f64,
    #[serde(default = "defaults::max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub cost_multipliers: CostMultipliers,
    /// $/MWh of unserved energy; `null` disables load shedding.
    #[serde(default = "defaults::nse_penalty")]
    pub nse_penalty: Option<f64>,
    #[serde(default = "defaults::icev_tco2_per_year")]
    pub icev_tco2_per_year: f64,
    #[serde(default = "defaults::ev_annual_mwh")]
    pub ev_annual_mwh: f64,
    #[serde(default)]
    pub co2_cap_tons: Option<f64>,
    /// Number of EVs represented by the flexible loads, for per-1,000-EV outputs.
    #[serde(default)]
    pub ev_fleet_size: Option<f64>,
}

mod defaults {
    pub fn perturbation_fraction() -> f64 {
        0.05
    }
    pub fn srme1_fraction() -> f64 {
        0.03
    }
    pub fn emissions_penalty() -> f64 {
        1000.0
    }
    pub fn convergence_threshold() -> f64 {
        0.01
    }
    pub fn max_iterations() -> usize {
        10
    }
    pub fn nse_penalty() -> Option<f64> {
        Some(9000.0)
    }
    pub fn icev_tco2_per_year() -> f64 {
        3.0
    }
    pub fn ev_annual_mwh() -> f64 {
        3.0
    }
}

impl ScenarioConfig {
    pub fn new(horizon_hours: usize) -> Self {
        Self {
            horizon_hours,
            ev_penetration_multiplier: 1.0,
            perturbation_fraction: defaults::perturbation_fraction(),
            srme1_fraction: defaults::srme1_fraction(),
            emissions_penalty: defaults::emissions_penalty(),
            convergence_threshold: defaults::convergence_threshold(),
            max_iterations: defaults::max_iterations(),
            cost_multipliers: CostMultipliers::default(),
            nse_penalty: defaults::nse_penalty(),
            icev_tco2_per_year: defaults::icev_tco2_per_year(),
            ev_annual_mwh: defaults::ev_annual_mwh(),
            co2_cap_tons: None,
            ev_fleet_size: None,
        }
    }

    /// Fraction of a year represented by the horizon.
    pub fn year_fraction(&self) -> f64 {
        self.horizon_hours as f64 / HOURS_PER_YEAR
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    pub zones: Vec<Zone>,
    pub generators: Vec<Generator>,
    pub storage_units: Vec<StorageUnit>,
    pub lines: Vec<TransmissionLine>,
    pub flexible_loads: Vec<FlexibleLoad>,
    pub config: ScenarioConfig,
}

impl GridModel {
    pub fn horizon(&self) -> usize {
        self.config.horizon_hours
    }

    pub fn zone_index(&self, id: &str) -> Result<usize, GridError> {
        self.zones.iter().position(|z| z.id == id).ok_or_else(|| GridError::UnknownZone(id.to_string()))
    }

    /// Applies the multipliers stored in the config (EV penetration and cost
    /// sensitivities) and resets them to one, so the call is idempotent.
    pub fn resolved(&self) -> Result<GridModel, GridError> {
        let mut g = apply_sensitivity(self, self.config.cost_multipliers)?;
        g = scale_ev_penetration(&g, self.config.ev_penetration_multiplier)?;
        g.config.cost_multipliers = CostMultipliers::default();
        g.config.ev_penetration_multiplier = 1.0;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let h = self.config.horizon_hours;
        let cfg = &self.config;
        if h == 0 {
            return Err(invalid("config", "horizon_hours", "must be positive"));
        }
        if self.zones.is_empty() {
            return Err(invalid("zones", "zones", "at least one zone is required"));
        }
        for (name, v) in [
            ("ev_penetration_multiplier", cfg.ev_penetration_multiplier),
            ("cost_multipliers.renewable_capex", cfg.cost_multipliers.renewable_capex),
            ("cost_multipliers.gas_price", cfg.cost_multipliers.gas_price),
            ("perturbation_fraction", cfg.perturbation_fraction),
            ("srme1_fraction", cfg.srme1_fraction),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid("config", name, format!("must be positive, got {v}")));
            }
        }
        if !(cfg.convergence_threshold > 0.0) {
            return Err(invalid("config", "convergence_threshold", "must be positive"));
        }
        if cfg.max_iterations == 0 {
            return Err(invalid("config", "max_iterations", "must be at least 1"));
        }
        if let Some(p) = cfg.nse_penalty {
            if !(p > 0.0 && p.is_finite()) {
                return Err(invalid("config", "nse_penalty", "must be positive or null"));
            }
        }

        let mut zone_ids = HashSet::new();
        for z in &self.zones {
            check_id(&z.id, "zone")?;
            if !zone_ids.insert(z.id.as_str()) {
                return Err(invalid(&z.id, "id", "duplicate zone id"));
            }
            check_series(&z.id, "demand", &z.demand, h)?;
            if z.demand.iter().any(|&d| d < 0.0) {
                return Err(invalid(&z.id, "demand", "must be non-negative"));
            }
            if !(0.0..=1.0).contains(&z.clean_share_min) {
                return Err(invalid(&z.id, "clean_share_min", "must lie in [0, 1]"));
            }
        }
        let zone_ref = |entity: &str, field: &str, zone: &str| {
            if zone_ids.contains(zone) {
                Ok(())
            } else {
                Err(invalid(entity, field, format!("unknown zone {zone}")))
            }
        };

        let mut ids = HashSet::new();
        let mut unique = |id: &str| {
            if ids.insert(id.to_string()) {
                Ok(())
            } else {
                Err(invalid(id, "id", "duplicate entity id"))
            }
        };
        for g in &self.generators {
            check_id(&g.id, "generator")?;
            unique(&g.id)?;
            zone_ref(&g.id, "zone_id", &g.zone_id)?;
            for (f, v) in [
                ("existing_cap_mw", g.existing_cap_mw),
                ("inv_cost_annual", g.inv_cost_annual),
                ("fixed_om", g.fixed_om),
                ("heat_rate", g.heat_rate),
                ("fuel_price", g.fuel_price),
                ("emissions_factor", g.emissions_factor),
                ("startup_cost", g.startup_cost),
            ] {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(invalid(&g.id, f, format!("must be finite and non-negative, got {v}")));
                }
            }
            if !g.var_om.is_finite() {
                return Err(invalid(&g.id, "var_om", "must be finite"));
            }
            if !(0.0..1.0).contains(&g.min_stable_fraction) {
                return Err(invalid(&g.id, "min_stable_fraction", "must lie in [0, 1)"));
            }
            match (&g.kind, &g.capacity_factor_profile) {
                (GeneratorKind::Thermal, _) if g.heat_rate <= 0.0 => {
                    return Err(invalid(&g.id, "heat_rate", "thermal generators need heat_rate > 0"));
                }
                (GeneratorKind::VariableRenewable, None) => {
                    return Err(invalid(&g.id, "capacity_factor_profile", "required for variable renewables"));
                }
                _ => {}
            }
            if let Some(p) = &g.capacity_factor_profile {
                check_series(&g.id, "capacity_factor_profile", p, h)?;
                if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                    return Err(invalid(&g.id, "capacity_factor_profile", "entries must lie in [0, 1]"));
                }
            }
        }
        for s in &self.storage_units {
            check_id(&s.id, "storage")?;
            unique(&s.id)?;
            zone_ref(&s.id, "zone_id", &s.zone_id)?;
            for (f, v) in [("charge_efficiency", s.charge_efficiency), ("discharge_efficiency", s.discharge_efficiency)] {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(invalid(&s.id, f, "must lie in (0, 1]"));
                }
            }
            for (f, v) in [
                ("existing_power_mw", s.existing_power_mw),
                ("existing_energy_mwh", s.existing_energy_mwh),
                ("inv_cost_power", s.inv_cost_power),
                ("inv_cost_energy", s.inv_cost_energy),
            ] {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(invalid(&s.id, f, "must be finite and non-negative"));
                }
            }
            if !s.var_om.is_finite() {
                return Err(invalid(&s.id, "var_om", "must be finite"));
            }
        }
        for l in &self.lines {
            check_id(&l.id, "line")?;
            unique(&l.id)?;
            zone_ref(&l.id, "from_zone", &l.from_zone)?;
            zone_ref(&l.id, "to_zone", &l.to_zone)?;
            if l.from_zone == l.to_zone {
                return Err(invalid(&l.id, "to_zone", "line must connect two distinct zones"));
            }
            if !(l.capacity_mw >= 0.0 && l.capacity_mw.is_finite()) {
                return Err(invalid(&l.id, "capacity_mw", "must be finite and non-negative"));
            }
            if !(l.expansion_cost >= 0.0) {
                return Err(invalid(&l.id, "expansion_cost", "must be non-negative"));
            }
            if !(0.0..1.0).contains(&l.loss_fraction) {
                return Err(invalid(&l.id, "loss_fraction", "must lie in [0, 1)"));
            }
        }
        for f in &self.flexible_loads {
            check_id(&f.id, "flexible load")?;
            unique(&f.id)?;
            zone_ref(&f.id, "zone_id", &f.zone_id)?;
            check_series(&f.id, "baseline_profile", &f.baseline_profile, h)?;
            if f.baseline_profile.iter().any(|&v| v < 0.0) {
                return Err(invalid(&f.id, "baseline_profile", "must be non-negative"));
            }
            if !(f.penetration_scale > 0.0 && f.penetration_scale.is_finite()) {
                return Err(invalid(&f.id, "penetration_scale", "must be positive"));
            }
            if let Some(r) = f.max_charge_rate_mw {
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(invalid(&f.id, "max_charge_rate_mw", "must be finite and non-negative"));
                }
            }
        }
        Ok(())
    }
}

fn check_id(id: &str, what: &str) -> Result<(), GridError> {
    if id.is_empty() || !id.is_ascii() {
        return Err(invalid(id, "id", format!("{what} ids must be non-empty ASCII")));
    }
    Ok(())
}

fn check_series(entity: &str, field: &str, s: &[f64], h: usize) -> Result<(), GridError> {
    if s.len() != h {
        return Err(invalid(entity, field, format!("series has {} values, horizon is {h}", s.len())));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(invalid(entity, field, "series contains non-finite values"));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

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

    pub fn one_zone(demand: Vec<f64>, generators: Vec<Generator>) -> GridModel {
        let h = demand.len();
        GridModel {
            zones: vec![Zone { id: "z".into(), demand, clean_share_min: 0.0 }],
            generators,
            storage_units: vec![],
            lines: vec![],
            flexible_loads: vec![],
            config: ScenarioConfig::new(h),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn valid_minimal_model() {
        let g = one_zone(vec![50.0; 24], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
        g.validate().unwrap();
        assert_eq!(g.horizon(), 24);
    }

    #[test]
    fn short_series_names_entity_and_field() {
        let mut g = one_zone(vec![50.0; 24], vec![thermal("coal", "z", 100.0, 20.0, 0.9)]);
        g.zones[0].demand.pop();
        match g.validate() {
            Err(GridError::Validation { entity, field, .. }) => {
                assert_eq!(entity, "z");
                assert_eq!(field, "demand");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_zone_reference() {
        let g = one_zone(vec![1.0; 2], vec![thermal("coal", "nowhere", 1.0, 1.0, 0.0)]);
        assert!(matches!(g.validate(), Err(GridError::Validation { field, .. }) if field == "zone_id"));
    }

    #[test]
    fn thermal_needs_heat_rate() {
        let mut gen = thermal("coal", "z", 1.0, 1.0, 0.0);
        gen.heat_rate = 0.0;
        let g = one_zone(vec![1.0; 2], vec![gen]);
        assert!(g.validate().is_err());
    }

    #[test]
    fn inflexible_rate_cap_defaults_to_peak() {
        let mut g = one_zone(vec![1.0; 2], vec![]);
        g.flexible_loads.push(FlexibleLoad {
            id: "ev".into(),
            zone_id: "z".into(),
            baseline_profile: vec![1.0, 4.0],
            max_advance_hours: 0,
            max_delay_hours: 0,
            max_charge_rate_mw: Some(3.0),
            penetration_scale: 1.0,
        });
        // Checked when window constraints are built, not here.
        g.validate().unwrap();
        g.flexible_loads[0].max_charge_rate_mw = None;
        g.validate().unwrap();
        assert_eq!(g.flexible_loads[0].charge_rate_cap(), 12.0);
    }
}
