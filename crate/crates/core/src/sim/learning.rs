//! Endogenous learning: capital costs fall as cumulative investment grows.

/// Capex after learning, given cumulative monetary investment in a
/// technology.
///
/// Follows a power law in the ratio of cumulative to baseline investment with
/// exponent `log2(1 - learning_rate)`, i.e. each doubling of cumulative
/// investment multiplies capex by `(1 - learning_rate)`. The result is
/// clamped between `floor_fraction * initial_capex` and the initial capex, so
/// learning can never inflate costs nor push them below the floor.
pub fn learned_capex(
    initial_capex: f64,
    learning_rate: f64,
    baseline_investment: f64,
    cumulative_investment: f64,
    floor_fraction: f64,
) -> f64 {
    if learning_rate <= 0.0 {
        return initial_capex;
    }
    let exponent = (1.0 - learning_rate).log2();
    let ratio = cumulative_investment / baseline_investment;
    let raw = initial_capex * ratio.powf(exponent);
    raw.clamp(initial_capex * floor_fraction, initial_capex)
}
