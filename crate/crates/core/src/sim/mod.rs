//! The techno-economic simulator: yearly capacity evolution and quarterly
//! merit-order dispatch over a two-region system.

pub mod diffusion;
pub mod dispatch;
pub mod lcoe;
pub mod learning;

pub use diffusion::{diffusion_step, preference, share_vector};
pub use dispatch::{available_mwh, dispatch, merit_order, DispatchOutcome, HOURS_PER_QUARTER, HOURS_PER_YEAR};
pub use lcoe::{annuity_factor, lcoe, lcoe_with_fuel_price, system_lcoe};
pub use learning::learned_capex;

use std::sync::Arc;

use crate::error::SimError;
use crate::scenario::{HistoricalMode, Scenario};
use crate::types::{PerRegion, PerRegionTech, PerTech, Region, Technology};

/// Kilowatts in a gigawatt: converts GW of capacity and currency/kW of capex
/// into monetary investment.
pub const KW_PER_GW: f64 = 1.0e6;

/// Mutable state of the simulated power system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    /// The next year to be dispatched.
    pub year: i32,
    /// Installed capacity, GW.
    pub capacity: PerRegionTech<f64>,
    /// Capex per technology after learning, currency per kW.
    pub current_capex: PerTech<f64>,
    /// Cumulative monetary investment, currency.
    pub cumulative_investment: PerRegionTech<f64>,
    /// Cumulative emissions since the start year, GtCO2.
    pub cumulative_co2_gt: f64,
    /// Energy served in the most recently dispatched year, MWh.
    pub generation_last_year: PerRegionTech<f64>,
    /// Unserved energy in the most recently dispatched year, MWh.
    pub shortage_last_year: PerRegion<f64>,
    /// Capacity added in the most recent transition, GW.
    pub invest_last_year_gw: PerRegionTech<f64>,
    /// Money spent in the most recent transition, currency.
    pub invest_last_year_cost: PerRegionTech<f64>,
    /// System levelised cost of the most recently dispatched year.
    pub lcoe_with_tax: f64,
    pub lcoe_without_tax: f64,
}

/// Everything that happened in one simulated year.
#[derive(Clone, Debug, PartialEq)]
pub struct YearRecord {
    /// The year that was dispatched.
    pub year: i32,
    /// Capacity in effect during the year (after the transition), GW.
    pub capacity: PerRegionTech<f64>,
    /// Capacity added by the transition, GW.
    pub investment_gw: PerRegionTech<f64>,
    /// Energy served, MWh.
    pub generation: PerRegionTech<f64>,
    /// Unserved energy, MWh.
    pub shortage: PerRegion<f64>,
    /// Quarterly demand, MWh.
    pub demand: PerRegion<[f64; 4]>,
    /// Emissions added this year, GtCO2.
    pub co2_added_gt: f64,
    /// Cumulative emissions through this year, GtCO2.
    pub cumulative_co2_gt: f64,
    pub lcoe_with_tax: f64,
    pub lcoe_without_tax: f64,
}

impl YearRecord {
    /// Generation mix over both regions; fractions sum to one.
    pub fn generation_mix(&self) -> Option<PerTech<f64>> {
        let total = self.generation.sum();
        if total <= 0.0 {
            return None;
        }
        Some(PerTech::from_fn(|t| self.generation.tech_total(t) / total))
    }
}

/// The simulator: a [`Scenario`] plus mutable [`SystemState`].
#[derive(Clone, Debug)]
pub struct PowerSystem {
    scenario: Arc<Scenario>,
    pub state: SystemState,
}

impl PowerSystem {
    /// A fresh system positioned at the scenario start year, before any
    /// dispatch has happened.
    pub fn new(scenario: Arc<Scenario>) -> PowerSystem {
        let capacity = scenario.initial_capacity();
        let cumulative_investment =
            PerRegionTech::from_fn(|r, t| scenario.regions[r].initial_cumulative_investment[t]);
        let current_capex = PerTech::from_fn(|t| scenario.techs[t].capex);
        let state = SystemState {
            year: scenario.horizon.start_year,
            capacity,
            current_capex,
            cumulative_investment,
            cumulative_co2_gt: 0.0,
            generation_last_year: PerRegionTech::zeros(),
            shortage_last_year: PerRegion::zeros(),
            invest_last_year_gw: PerRegionTech::zeros(),
            invest_last_year_cost: PerRegionTech::zeros(),
            lcoe_with_tax: 0.0,
            lcoe_without_tax: 0.0,
        };
        PowerSystem { scenario, state }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn scenario_arc(&self) -> Arc<Scenario> {
        Arc::clone(&self.scenario)
    }

    /// Demand for (region, current-or-given year, quarter), MWh.
    pub fn demand(&self, region: Region, year: i32, quarter: usize) -> Result<f64, SimError> {
        self.scenario.regions[region]
            .demand
            .quarter(year, quarter)
            .ok_or(SimError::HorizonBounds { year, quarter })
    }

    /// Dispatch one region for one quarter of the current year.
    pub fn dispatch_quarter(
        &self,
        region: Region,
        quarter: usize,
    ) -> Result<DispatchOutcome, SimError> {
        let year = self.state.year;
        let demand = self.demand(region, year, quarter)?;
        let cf = PerTech::from_fn(|t| self.scenario.techs[t].capacity_factor[quarter]);
        let marginal = PerTech::from_fn(|t| self.scenario.techs[t].marginal_cost(year));
        Ok(dispatch(
            &self.state.capacity[region],
            &cf,
            &marginal,
            demand,
        ))
    }

    /// Levelised cost of every technology at current capex and the given
    /// year's fuel prices.
    pub fn per_tech_lcoe(&self, year: i32, with_tax: bool) -> Result<PerTech<f64>, SimError> {
        let mut out = PerTech::zeros();
        for t in Technology::ALL {
            out[t] = lcoe_with_fuel_price(
                t,
                &self.scenario.techs[t],
                self.state.current_capex[t],
                self.scenario.fuel_price(t, year),
                self.scenario.economics.discount_rate,
                with_tax,
            )?;
        }
        Ok(out)
    }

    /// Retire `1/lifetime` of each fleet and add the requested builds.
    /// Every entry must lie in `[0, max_build]`. Spending is priced at the
    /// capex in effect before this year's learning update.
    pub fn apply_investment(&mut self, invest_gw: &PerRegionTech<f64>) -> Result<(), SimError> {
        for (r, t, &v) in invest_gw.iter() {
            let max_build = self.scenario.techs[t].max_build;
            if !(v >= 0.0 && v <= max_build) {
                return Err(SimError::InvestmentBounds {
                    region: r,
                    tech: t,
                    value: v,
                    max_build,
                });
            }
        }
        for r in Region::ALL {
            for t in Technology::ALL {
                let v = invest_gw[(r, t)];
                let retained = self.state.capacity[(r, t)] * self.retention(t);
                let cost = v * self.state.current_capex[t] * KW_PER_GW;
                self.state.capacity[(r, t)] = retained + v;
                self.state.cumulative_investment[(r, t)] += cost;
                self.state.invest_last_year_gw[(r, t)] = v;
                self.state.invest_last_year_cost[(r, t)] = cost;
            }
        }
        self.refresh_capex();
        Ok(())
    }

    /// Fraction of a fleet surviving one year.
    fn retention(&self, t: Technology) -> f64 {
        1.0 - 1.0 / self.scenario.techs[t].lifetime
    }

    /// Force capacity to a prescribed level, booking the investment implied
    /// by anything beyond natural retirement. Shrinkage below the retained
    /// level costs nothing. Used by the historical transitions.
    fn set_capacity(&mut self, target: &PerRegionTech<f64>) {
        for r in Region::ALL {
            for t in Technology::ALL {
                let retained = self.state.capacity[(r, t)] * self.retention(t);
                let implied_gw = (target[(r, t)] - retained).max(0.0);
                let cost = implied_gw * self.state.current_capex[t] * KW_PER_GW;
                self.state.capacity[(r, t)] = target[(r, t)].max(0.0);
                self.state.cumulative_investment[(r, t)] += cost;
                self.state.invest_last_year_gw[(r, t)] = implied_gw;
                self.state.invest_last_year_cost[(r, t)] = cost;
            }
        }
        self.refresh_capex();
    }

    /// Re-derive capex from cumulative investment via the learning curve.
    fn refresh_capex(&mut self) {
        for t in Technology::ALL {
            let params = &self.scenario.techs[t];
            if params.learning_rate <= 0.0 {
                continue;
            }
            self.state.current_capex[t] = learned_capex(
                params.capex,
                params.learning_rate,
                self.scenario.baseline_investment[t],
                self.state.cumulative_investment.tech_total(t),
                self.scenario.economics.capex_floor_fraction,
            );
        }
    }

    /// Dispatch all four quarters of the current year in both regions,
    /// account emissions and levelised costs, and advance the clock.
    fn dispatch_year(&mut self) -> Result<YearRecord, SimError> {
        let year = self.state.year;
        if year > self.scenario.horizon.end_year {
            return Err(SimError::PastHorizon { year });
        }
        let mut generation = PerRegionTech::zeros();
        let mut shortage = PerRegion::zeros();
        let mut demand = PerRegion::splat([0.0; 4]);
        for r in Region::ALL {
            for q in 0..4 {
                let d = self.demand(r, year, q)?;
                let out = self.dispatch_quarter(r, q)?;
                for t in Technology::ALL {
                    generation[(r, t)] += out.generation[t];
                }
                shortage[r] += out.shortage_mwh;
                demand[r][q] = d;
            }
        }
        let mut co2_tonnes = 0.0;
        for (_, t, &g) in generation.iter() {
            co2_tonnes += g * self.scenario.techs[t].emission_factor;
        }
        let co2_added_gt = co2_tonnes / 1.0e9;
        self.state.cumulative_co2_gt += co2_added_gt;

        let voll = self.scenario.economics.value_of_lost_load;
        let lcoe_without_tax =
            system_lcoe(&generation, &shortage, &self.per_tech_lcoe(year, false)?, voll)?;
        let lcoe_with_tax =
            system_lcoe(&generation, &shortage, &self.per_tech_lcoe(year, true)?, voll)?;

        self.state.generation_last_year = generation;
        self.state.shortage_last_year = shortage;
        self.state.lcoe_with_tax = lcoe_with_tax;
        self.state.lcoe_without_tax = lcoe_without_tax;
        self.state.year += 1;

        Ok(YearRecord {
            year,
            capacity: self.state.capacity,
            investment_gw: self.state.invest_last_year_gw,
            generation,
            shortage,
            demand,
            co2_added_gt,
            cumulative_co2_gt: self.state.cumulative_co2_gt,
            lcoe_with_tax,
            lcoe_without_tax,
        })
    }

    /// One control-period year: apply an investment decision, then dispatch.
    /// Only valid strictly before the end year.
    pub fn run_control_year(
        &mut self,
        invest_gw: &PerRegionTech<f64>,
    ) -> Result<YearRecord, SimError> {
        if self.state.year >= self.scenario.horizon.end_year {
            return Err(SimError::PastHorizon {
                year: self.state.year,
            });
        }
        self.apply_investment(invest_gw)?;
        self.dispatch_year()
    }

    /// One year driven by cost-based diffusion: shares drift toward cheaper
    /// technologies and the fleet scales with demand, then the year is
    /// dispatched. Used for diffusion-mode history and as a no-agent
    /// continuation policy.
    pub fn run_diffusion_year(&mut self) -> Result<YearRecord, SimError> {
        if self.state.year >= self.scenario.horizon.end_year {
            return Err(SimError::PastHorizon {
                year: self.state.year,
            });
        }
        let year = self.state.year;
        let costs = self.per_tech_lcoe(year, true)?;
        let mut target = PerRegionTech::zeros();
        for r in Region::ALL {
            let caps = &self.state.capacity[r];
            let total = caps.sum();
            let shares = share_vector(caps).ok_or(SimError::ZeroGeneration)?;
            let next = diffusion_step(
                &shares,
                &costs,
                self.scenario.diffusion.sigma,
                &self.scenario.diffusion.tau,
                1.0,
            );
            let demand = &self.scenario.regions[r].demand;
            let grown = match (demand.annual(year), demand.annual(year - 1)) {
                (Some(now), Some(prev)) if prev > 0.0 => total * (now / prev),
                _ => total,
            };
            for t in Technology::ALL {
                target[(r, t)] = next[t] * grown;
            }
        }
        self.set_capacity(&target);
        self.dispatch_year()
    }

    /// Simulate the historical years `[start_year, control_start_year)`.
    /// The first year dispatches the initial fleet as-is; each later year
    /// applies the configured transition (diffusion or exogenous series)
    /// before dispatching. Only valid on a fresh system.
    pub fn historical_rollout(&mut self) -> Result<Vec<YearRecord>, SimError> {
        if self.state.year != self.scenario.horizon.start_year {
            return Err(SimError::PastHorizon {
                year: self.state.year,
            });
        }
        let control_start = self.scenario.horizon.control_start_year;
        let mut records = Vec::with_capacity(
            (control_start - self.scenario.horizon.start_year) as usize,
        );
        records.push(self.dispatch_year()?);
        while self.state.year < control_start {
            match &self.scenario.historical {
                HistoricalMode::Diffusion => {
                    records.push(self.run_diffusion_year()?);
                }
                HistoricalMode::Exogenous(series) => {
                    let year = self.state.year;
                    let mut target = PerRegionTech::zeros();
                    for r in Region::ALL {
                        let caps = series[r]
                            .capacity(year)
                            .ok_or(SimError::MissingSeriesYear { region: r, year })?;
                        for t in Technology::ALL {
                            target[(r, t)] = caps[t];
                        }
                    }
                    self.set_capacity(&target);
                    records.push(self.dispatch_year()?);
                }
            }
        }
        Ok(records)
    }
}
