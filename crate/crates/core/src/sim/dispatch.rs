//! Quarterly merit-order dispatch.

use crate::types::{PerTech, Technology, N_TECH};

/// Hours in one quarter of a year (8760 / 4).
pub const HOURS_PER_QUARTER: f64 = 2190.0;
/// Hours in a year.
pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Result of dispatching one region for one quarter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispatchOutcome {
    /// Energy served per technology, MWh.
    pub generation: PerTech<f64>,
    /// Demand left unserved after all capacity is exhausted, MWh.
    pub shortage_mwh: f64,
}

/// Technologies ordered by ascending marginal cost; ties keep the canonical
/// technology order (the sort is stable).
pub fn merit_order(marginal_cost: &PerTech<f64>) -> [Technology; N_TECH] {
    let mut order = Technology::ALL;
    order.sort_by(|a, b| marginal_cost[*a].total_cmp(&marginal_cost[*b]));
    order
}

/// Maximum energy one technology can deliver in a quarter, MWh.
/// Capacity is in GW, so the conversion is GW -> MW (x1000) times hours.
pub fn available_mwh(capacity_gw: f64, capacity_factor: f64) -> f64 {
    capacity_gw * 1000.0 * capacity_factor * HOURS_PER_QUARTER
}

/// Serve `demand_mwh` by filling technologies in merit order. Each
/// technology contributes up to its quarterly availability; whatever demand
/// is left at the end is the shortage.
pub fn dispatch(
    capacity_gw: &PerTech<f64>,
    capacity_factor: &PerTech<f64>,
    marginal_cost: &PerTech<f64>,
    demand_mwh: f64,
) -> DispatchOutcome {
    let mut generation = PerTech::zeros();
    let mut remaining = demand_mwh.max(0.0);
    for t in merit_order(marginal_cost) {
        if remaining <= 0.0 {
            break;
        }
        let avail = available_mwh(capacity_gw[t], capacity_factor[t]);
        let g = avail.min(remaining);
        generation[t] = g;
        remaining -= g;
    }
    DispatchOutcome {
        generation,
        shortage_mwh: remaining,
    }
}
