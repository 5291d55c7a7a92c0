//! Levelised cost of electricity, per technology and system-wide.

use crate::error::SimError;
use crate::scenario::TechnologyParams;
use crate::sim::dispatch::HOURS_PER_YEAR;
use crate::types::{PerRegion, PerRegionTech, PerTech, Technology};

/// Capital-recovery (annuity) factor `r(1+r)^L / ((1+r)^L - 1)`, converging
/// to `1/L` as the rate approaches zero.
pub fn annuity_factor(rate: f64, lifetime_years: f64) -> f64 {
    if rate == 0.0 {
        return 1.0 / lifetime_years;
    }
    let growth = (1.0 + rate).powf(lifetime_years);
    rate * growth / (growth - 1.0)
}

/// Levelised cost for one technology, currency per MWh.
///
/// Annualised capital and fixed costs are spread over the yearly energy yield
/// of one kW (`mean capacity factor * 8760 / 1000` MWh), then fuel and
/// variable costs are added. `with_tax` applies the technology levy
/// multiplicatively.
pub fn lcoe_with_fuel_price(
    tech: Technology,
    params: &TechnologyParams,
    current_capex: f64,
    fuel_price: f64,
    discount_rate: f64,
    with_tax: bool,
) -> Result<f64, SimError> {
    let annual_mwh_per_kw = params.mean_capacity_factor() * HOURS_PER_YEAR / 1000.0;
    if annual_mwh_per_kw <= 0.0 {
        return Err(SimError::UndefinedLcoe { tech });
    }
    let fixed =
        (current_capex * annuity_factor(discount_rate, params.lifetime) + params.opex_fixed)
            / annual_mwh_per_kw;
    let value = fixed + fuel_price + params.variable_cost;
    Ok(if with_tax {
        value * (1.0 + params.tax_rate)
    } else {
        value
    })
}

/// [`lcoe_with_fuel_price`] at the technology's base fuel price.
pub fn lcoe(
    tech: Technology,
    params: &TechnologyParams,
    current_capex: f64,
    discount_rate: f64,
    with_tax: bool,
) -> Result<f64, SimError> {
    lcoe_with_fuel_price(
        tech,
        params,
        current_capex,
        params.fuel_cost,
        discount_rate,
        with_tax,
    )
}

/// Generation-weighted mean of per-technology levelised costs, with unserved
/// energy priced at the value of lost load.
pub fn system_lcoe(
    generation: &PerRegionTech<f64>,
    shortage: &PerRegion<f64>,
    per_tech: &PerTech<f64>,
    value_of_lost_load: f64,
) -> Result<f64, SimError> {
    let total_generation = generation.sum();
    if total_generation <= 0.0 {
        return Err(SimError::ZeroGeneration);
    }
    let mut cost = 0.0;
    for (_, t, &g) in generation.iter() {
        cost += g * per_tech[t];
    }
    let total_shortage = shortage.sum();
    cost += total_shortage * value_of_lost_load;
    Ok(cost / (total_generation + total_shortage))
}
