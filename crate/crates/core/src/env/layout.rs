//! Fixed observation layout.
//!
//! Observations are vectors of length [`OBS_LEN`]. Every entry is min-max
//! normalised by the scenario's normalisation block and clipped to
//! `[-0.5, 1.5]`. Blocks over (region, technology) pairs are region-major:
//! index `region * 8 + technology`.
//!
//! | indices | contents                                           | scale block              |
//! |---------|----------------------------------------------------|--------------------------|
//! | 0..16   | energy served last year per (region, tech), MWh    | `generation`             |
//! | 16..18  | total installed capacity per region, GW            | `capacity`               |
//! | 18      | cumulative CO2 since the start year, Gt            | `cumulative_co2`         |
//! | 19      | system levelised cost with taxes                   | `lcoe`                   |
//! | 20      | system levelised cost without taxes                | `lcoe`                   |
//! | 21..37  | cumulative investment per (region, tech), currency | `cumulative_investment`  |
//! | 37..53  | money invested last step per (region, tech)        | `new_investment`         |
//! | 53..61  | fuel price per tech in the last dispatched year    | `fuel_price`             |
//! | 61..69  | fuel spend per tech last year, both regions        | `fuel_cost`              |
//! | 69..77  | carbon cost per tech last year, both regions       | `carbon_cost`            |

use crate::scenario::Scenario;
use crate::sim::SystemState;
use crate::types::{Region, Technology, N_ACTIONS, N_REGIONS, N_TECH};

pub const GEN_START: usize = 0;
pub const CAPACITY_START: usize = GEN_START + N_ACTIONS;
pub const CO2_INDEX: usize = CAPACITY_START + N_REGIONS;
pub const LCOE_WITH_TAX_INDEX: usize = CO2_INDEX + 1;
pub const LCOE_WITHOUT_TAX_INDEX: usize = LCOE_WITH_TAX_INDEX + 1;
pub const CUM_INVEST_START: usize = LCOE_WITHOUT_TAX_INDEX + 1;
pub const NEW_INVEST_START: usize = CUM_INVEST_START + N_ACTIONS;
pub const FUEL_PRICE_START: usize = NEW_INVEST_START + N_ACTIONS;
pub const FUEL_COST_START: usize = FUEL_PRICE_START + N_TECH;
pub const CARBON_COST_START: usize = FUEL_COST_START + N_TECH;
/// Total observation length.
pub const OBS_LEN: usize = CARBON_COST_START + N_TECH;

const _: () = assert!(OBS_LEN == 77);

/// Build the normalised observation for a state whose most recent dispatch
/// was `state.year - 1`.
pub fn build_observation(scenario: &Scenario, state: &SystemState) -> Vec<f64> {
    let norm = &scenario.normalization;
    let last_year = state.year - 1;
    let mut v = vec![0.0; OBS_LEN];

    for (r, t, &g) in state.generation_last_year.iter() {
        v[GEN_START + r.index() * N_TECH + t.index()] = norm.generation.apply(g);
    }
    for r in Region::ALL {
        v[CAPACITY_START + r.index()] = norm.capacity.apply(state.capacity[r].sum());
    }
    v[CO2_INDEX] = norm.cumulative_co2.apply(state.cumulative_co2_gt);
    v[LCOE_WITH_TAX_INDEX] = norm.lcoe.apply(state.lcoe_with_tax);
    v[LCOE_WITHOUT_TAX_INDEX] = norm.lcoe.apply(state.lcoe_without_tax);
    for (r, t, &c) in state.cumulative_investment.iter() {
        v[CUM_INVEST_START + r.index() * N_TECH + t.index()] =
            norm.cumulative_investment.apply(c);
    }
    for (r, t, &c) in state.invest_last_year_cost.iter() {
        v[NEW_INVEST_START + r.index() * N_TECH + t.index()] = norm.new_investment.apply(c);
    }

    let carbon_price = scenario.carbon_price(last_year);
    for t in Technology::ALL {
        let fuel_price = scenario.fuel_price(t, last_year);
        let gen_t = state.generation_last_year.tech_total(t);
        v[FUEL_PRICE_START + t.index()] = norm.fuel_price.apply(fuel_price);
        v[FUEL_COST_START + t.index()] = norm.fuel_cost.apply(gen_t * fuel_price);
        v[CARBON_COST_START + t.index()] = norm.carbon_cost.apply(
            gen_t * scenario.techs[t].emission_factor * carbon_price,
        );
    }
    v
}

/// Map a raw action in `[-1, 1]^16` (clipped if outside) onto capacity
/// additions in `[0, max_build]` GW per (region, technology), region-major.
pub fn decode_action(
    action: &[f64],
    scenario: &Scenario,
) -> crate::types::PerRegionTech<f64> {
    crate::types::PerRegionTech::from_fn(|r, t| {
        let a = action[r.index() * N_TECH + t.index()].clamp(-1.0, 1.0);
        scenario.techs[t].max_build * (a + 1.0) / 2.0
    })
}

/// Inverse of the action scaling, for tests and diagnostics.
pub fn invest_fraction(invest_gw: f64, max_build: f64) -> f64 {
    if max_build <= 0.0 {
        return 0.0;
    }
    (invest_gw / max_build) * 2.0 - 1.0
}
