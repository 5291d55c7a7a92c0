//! Cost-driven diffusion of capacity shares, used for the historical years.
//!
//! Pairs of technologies exchange share mass at a rate set by how strongly
//! one is preferred over the other. Preference is a logistic function of the
//! levelised-cost difference; the exchange is exactly antisymmetric, so the
//! share vector stays on the simplex up to the final clamp-and-renormalise.

use crate::types::{PerTech, N_TECH};

/// Logistic preference for `i` over `j` given their levelised costs:
/// `1 / (1 + exp((lcoe_i - lcoe_j) / sigma))`. Cheaper `i` gives values
/// above one half.
pub fn preference(lcoe_i: f64, lcoe_j: f64, sigma: f64) -> f64 {
    1.0 / (1.0 + ((lcoe_i - lcoe_j) / sigma).exp())
}

/// Capacity shares (summing to one), or `None` when there is no capacity.
pub fn share_vector(capacity: &PerTech<f64>) -> Option<PerTech<f64>> {
    let total = capacity.sum();
    if total <= 0.0 {
        return None;
    }
    Some(PerTech::from_fn(|t| capacity[t] / total))
}

/// One explicit-Euler step of the share-exchange dynamics.
///
/// For each unordered pair `{i, j}` a flow
/// `s_i * s_j / tau[i][j] * (F_ij - F_ji) * dt`
/// moves share from `j` to `i` (negative flow reverses direction). `tau`
/// must be symmetric for the exchange to conserve total share. Shares are
/// clamped at zero and renormalised before returning.
pub fn diffusion_step(
    shares: &PerTech<f64>,
    lcoe: &PerTech<f64>,
    sigma: f64,
    tau: &[[f64; N_TECH]; N_TECH],
    dt: f64,
) -> PerTech<f64> {
    let mut next = *shares;
    for i in 0..N_TECH {
        for j in (i + 1)..N_TECH {
            let f_ij = preference(lcoe.0[i], lcoe.0[j], sigma);
            let f_ji = preference(lcoe.0[j], lcoe.0[i], sigma);
            let flow = shares.0[i] * shares.0[j] / tau[i][j] * (f_ij - f_ji) * dt;
            next.0[i] += flow;
            next.0[j] -= flow;
        }
    }
    for v in &mut next.0 {
        *v = v.max(0.0);
    }
    let total = next.sum();
    if total <= 0.0 {
        // Unreachable for simplex inputs (clamping can only raise the sum
        // above its conserved value of one) but guarded to keep the output
        // well-defined for arbitrary callers.
        return *shares;
    }
    for v in &mut next.0 {
        *v /= total;
    }
    next
}
