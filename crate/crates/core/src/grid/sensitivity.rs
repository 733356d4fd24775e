use super::{invalid, CostMultipliers, GeneratorKind, GridError, GridModel};

/// Scales renewable investment costs and thermal fuel prices; every other
/// field is copied unchanged.
pub fn apply_sensitivity(grid: &GridModel, multipliers: CostMultipliers) -> Result<GridModel, GridError> {
    let CostMultipliers { renewable_capex, gas_price } = multipliers;
    if !(renewable_capex > 0.0 && renewable_capex.is_finite()) {
        return Err(invalid("cost_multipliers", "renewable_capex", "must be positive"));
    }
    if !(gas_price > 0.0 && gas_price.is_finite()) {
        return Err(invalid("cost_multipliers", "gas_price", "must be positive"));
    }
    let mut out = grid.clone();
    for g in &mut out.generators {
        match g.kind {
            GeneratorKind::VariableRenewable if renewable_capex != 1.0 => g.inv_cost_annual *= renewable_capex,
            GeneratorKind::Thermal if gas_price != 1.0 => g.fuel_price *= gas_price,
            _ => {}
        }
    }
    Ok(out)
}

/// Multiplies every flexible-load baseline profile; fixed demand is untouched.
pub fn scale_ev_penetration(grid: &GridModel, multiplier: f64) -> Result<GridModel, GridError> {
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(invalid("config", "ev_penetration_multiplier", "must be positive"));
    }
    let mut out = grid.clone();
    if multiplier != 1.0 {
        for f in &mut out.flexible_loads {
            f.baseline_profile.iter_mut().for_each(|v| *v *= multiplier);
        }
    }
    Ok(out)
}

/// `r (1 + r)^n / ((1 + r)^n - 1)`; `1 / n` when the rate is zero.
pub fn capital_recovery_factor(wacc: f64, lifetime_years: f64) -> f64 {
    if wacc == 0.0 {
        return 1.0 / lifetime_years;
    }
    let g = (1.0 + wacc).powf(lifetime_years);
    wacc * g / (g - 1.0)
}

/// Annualized $/MW-yr from an overnight $/MW cost.
pub fn annualize(overnight_cost: f64, wacc: f64, lifetime_years: f64) -> f64 {
    overnight_cost * capital_recovery_factor(wacc, lifetime_years)
}
