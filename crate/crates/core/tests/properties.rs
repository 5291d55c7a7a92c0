//! Randomised invariant checks across the simulator, environment, and agent
//! plumbing. Each property states something that must hold for *every*
//! admissible input, not just the curated fixtures in the unit tests.

use gridrl_core::env::layout::{decode_action, invest_fraction, OBS_LEN};
use gridrl_core::env::{Environment, PowerEnv};
use gridrl_core::nn::checkpoint::{read_net, write_net};
use gridrl_core::nn::{init_policy_style, Activation};
use gridrl_core::scenario::{
    Bounds, DiffusionConfig, DemandSeries, Economics, HistoricalMode, Horizon, Normalization,
    RegionParams, RewardConfig, Scenario, TechnologyParams,
};
use gridrl_core::sim::{
    available_mwh, diffusion_step, dispatch, learned_capex, lcoe_with_fuel_price, merit_order,
    preference, PowerSystem, KW_PER_GW,
};
use gridrl_core::types::{PerRegion, PerRegionTech, PerTech, Region, Technology, N_TECH};
use gridrl_core::ddpg::{ReplayBuffer, Transition};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

fn per_tech(range: std::ops::Range<f64>) -> impl Strategy<Value = PerTech<f64>> {
    prop::array::uniform8(range).prop_map(PerTech)
}

/// Shares on the simplex: draw positive weights and normalise.
fn simplex() -> impl Strategy<Value = PerTech<f64>> {
    prop::array::uniform8(1.0e-3..1.0f64).prop_map(|w| {
        let total: f64 = w.iter().sum();
        PerTech(w.map(|v| v / total))
    })
}

/// A symmetric positive matrix for the share-exchange time constants.
fn symmetric_tau() -> impl Strategy<Value = [[f64; N_TECH]; N_TECH]> {
    prop::collection::vec(2.0..40.0f64, N_TECH * N_TECH).prop_map(|v| {
        let mut tau = [[0.0; N_TECH]; N_TECH];
        for i in 0..N_TECH {
            for j in i..N_TECH {
                let x = v[i * N_TECH + j];
                tau[i][j] = x;
                tau[j][i] = x;
            }
        }
        tau
    })
}

/// Knobs for a randomised but always-valid scenario. Horizons are kept short
/// so a single property case stays cheap.
#[derive(Clone, Debug)]
struct ScenarioSeed {
    capex: PerTech<f64>,
    fuel: PerTech<f64>,
    emission: PerTech<f64>,
    lifetime: PerTech<f64>,
    cf: PerTech<f64>,
    tax: PerTech<f64>,
    learning: PerTech<f64>,
    initial_capacity: PerTech<f64>,
    demand_quarter: f64,
    historical_years: i32,
    control_years: i32,
    sigma: f64,
}

fn scenario_seed() -> impl Strategy<Value = ScenarioSeed> {
    (
        (
            per_tech(500.0..5000.0),
            per_tech(0.0..60.0),
            per_tech(0.0..1.0),
            per_tech(20.0..50.0),
            per_tech(0.2..0.9),
            per_tech(0.0..0.3),
            per_tech(0.0..0.3),
        ),
        per_tech(0.05..0.5),
        1.0e5..8.0e5f64,
        1..4i32,
        2..5i32,
        2.0..20.0f64,
    )
        .prop_map(
            |(
                (capex, fuel, emission, lifetime, cf, tax, learning),
                initial_capacity,
                demand_quarter,
                historical_years,
                control_years,
                sigma,
            )| ScenarioSeed {
                capex,
                fuel,
                emission,
                lifetime,
                cf,
                tax,
                learning,
                initial_capacity,
                demand_quarter,
                historical_years,
                control_years,
                sigma,
            },
        )
}

fn build_scenario(seed: &ScenarioSeed) -> Scenario {
    let techs = PerTech::from_fn(|t| TechnologyParams {
        capex: seed.capex[t],
        opex_fixed: 20.0,
        fuel_cost: seed.fuel[t],
        variable_cost: 2.0,
        emission_factor: seed.emission[t],
        lifetime: seed.lifetime[t],
        capacity_factor: [seed.cf[t]; 4],
        learning_rate: seed.learning[t],
        tax_rate: seed.tax[t],
        max_build: 0.1,
        fuel_price_series: Vec::new(),
    });
    let start_year = 2007;
    let control_start = start_year + seed.historical_years;
    let end_year = control_start + seed.control_years;
    let n_years = (end_year - start_year + 1) as usize;
    let region = |scale: f64| RegionParams {
        demand: DemandSeries {
            start_year,
            quarters: vec![[seed.demand_quarter * scale; 4]; n_years],
        },
        initial_capacity: PerTech::from_fn(|t| seed.initial_capacity[t] * scale),
        initial_cumulative_investment: PerTech::from_fn(|t| {
            seed.initial_capacity[t] * scale * seed.capex[t] * KW_PER_GW
        }),
    };
    let regions = PerRegion([region(1.0), region(0.5)]);
    let baseline_investment = PerTech::from_fn(|t| {
        let total: f64 = Region::ALL
            .iter()
            .map(|&r| regions[r].initial_cumulative_investment[t])
            .sum();
        if total > 0.0 {
            total
        } else {
            1.0e8
        }
    });
    let b = |max: f64| Bounds { min: 0.0, max };
    Scenario {
        horizon: Horizon {
            start_year,
            control_start_year: control_start,
            end_year,
        },
        economics: Economics {
            discount_rate: 0.05,
            value_of_lost_load: 1000.0,
            carbon_price: 25.0,
            carbon_price_series: Vec::new(),
            capex_floor_fraction: 0.2,
        },
        reward: RewardConfig::default(),
        diffusion: DiffusionConfig {
            sigma: seed.sigma,
            tau: [[12.0; N_TECH]; N_TECH],
        },
        historical: HistoricalMode::Diffusion,
        techs,
        regions,
        baseline_investment,
        normalization: Normalization {
            generation: b(2.5e6),
            capacity: b(8.0),
            cumulative_co2: b(0.1),
            lcoe: b(400.0),
            cumulative_investment: b(4.0e9),
            new_investment: b(6.0e8),
            fuel_price: b(120.0),
            fuel_cost: b(3.0e8),
            carbon_cost: b(1.0e8),
        },
    }
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

proptest! {
    /// Served energy plus shortage always equals demand, and no technology
    /// generates beyond its quarterly availability.
    #[test]
    fn dispatch_balances_energy(
        caps in per_tech(0.0..3.0),
        cf in per_tech(0.0..1.0),
        marginal in per_tech(0.0..100.0),
        demand in 0.0..5.0e6f64,
    ) {
        let out = dispatch(&caps, &cf, &marginal, demand);
        let served = out.generation.sum();
        prop_assert!((served + out.shortage_mwh - demand).abs() <= 1e-6 * demand.max(1.0));
        prop_assert!(out.shortage_mwh >= 0.0);
        for t in Technology::ALL {
            let avail = available_mwh(caps[t], cf[t]);
            prop_assert!(out.generation[t] >= 0.0);
            prop_assert!(out.generation[t] <= avail + 1e-9);
        }
    }

    /// Merit order: a technology only generates if everything strictly
    /// cheaper is already running flat out.
    #[test]
    fn dispatch_never_leapfrogs_cheaper_capacity(
        caps in per_tech(0.0..3.0),
        cf in per_tech(0.1..1.0),
        marginal in per_tech(0.0..100.0),
        demand in 1.0e4..5.0e6f64,
    ) {
        let out = dispatch(&caps, &cf, &marginal, demand);
        for t in Technology::ALL {
            if out.generation[t] <= 0.0 {
                continue;
            }
            for u in Technology::ALL {
                if marginal[u] < marginal[t] {
                    let avail = available_mwh(caps[u], cf[u]);
                    prop_assert!(
                        (out.generation[u] - avail).abs() <= 1e-9 * avail.max(1.0),
                        "{u} ran below availability while costlier {t} generated"
                    );
                }
            }
        }
    }

    /// The merit order itself is a permutation sorted by marginal cost.
    #[test]
    fn merit_order_is_sorted_permutation(marginal in per_tech(0.0..100.0)) {
        let order = merit_order(&marginal);
        let mut seen = [false; N_TECH];
        for w in order.windows(2) {
            prop_assert!(marginal[w[0]] <= marginal[w[1]]);
        }
        for t in order {
            prop_assert!(!seen[t.index()]);
            seen[t.index()] = true;
        }
    }
}

// ---------------------------------------------------------------------------
// Diffusion
// ---------------------------------------------------------------------------

proptest! {
    /// The pairwise preferences are complementary probabilities.
    #[test]
    fn preferences_are_complementary(
        a in -200.0..200.0f64,
        b in -200.0..200.0f64,
        sigma in 0.5..50.0f64,
    ) {
        let p = preference(a, b, sigma);
        let q = preference(b, a, sigma);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p + q - 1.0).abs() < 1e-12);
    }

    /// A diffusion step maps the simplex into itself.
    #[test]
    fn diffusion_preserves_the_simplex(
        shares in simplex(),
        costs in per_tech(10.0..300.0),
        sigma in 0.5..50.0f64,
        tau in symmetric_tau(),
        dt in 0.1..1.0f64,
    ) {
        let next = diffusion_step(&shares, &costs, sigma, &tau, dt);
        let total = next.sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "sum drifted to {total}");
        for t in Technology::ALL {
            prop_assert!(next[t] >= 0.0);
        }
    }

    /// Share moves toward the cheaper of two technologies, never away.
    #[test]
    fn diffusion_moves_share_toward_cheaper(
        s0 in 0.05..0.95f64,
        cheap in 10.0..100.0f64,
        premium in 1.0..100.0f64,
        sigma in 0.5..50.0f64,
    ) {
        let mut shares = PerTech::zeros();
        shares.0[0] = s0;
        shares.0[1] = 1.0 - s0;
        let mut costs = PerTech::splat(1.0e6);
        costs.0[0] = cheap;
        costs.0[1] = cheap + premium;
        let tau = [[10.0; N_TECH]; N_TECH];
        let next = diffusion_step(&shares, &costs, sigma, &tau, 1.0);
        prop_assert!(next.0[0] >= shares.0[0] - 1e-12);
        prop_assert!(next.0[1] <= shares.0[1] + 1e-12);
    }
}

// ---------------------------------------------------------------------------
// Learning curve and levelised cost
// ---------------------------------------------------------------------------

proptest! {
    /// Capex after learning is monotone non-increasing in cumulative
    /// investment and stays between the floor and the initial value.
    #[test]
    fn learning_is_monotone_and_clamped(
        initial in 500.0..5000.0f64,
        rate in 0.01..0.5f64,
        baseline in 1.0e7..1.0e9f64,
        lo in 0.0..10.0f64,
        extra in 0.0..10.0f64,
        floor in 0.05..0.9f64,
    ) {
        let a = learned_capex(initial, rate, baseline, baseline * lo, floor);
        let b = learned_capex(initial, rate, baseline, baseline * (lo + extra), floor);
        prop_assert!(b <= a + 1e-9 * initial);
        for v in [a, b] {
            prop_assert!(v <= initial + 1e-9);
            prop_assert!(v >= floor * initial - 1e-9);
        }
    }

    /// The technology levy never lowers a levelised cost.
    #[test]
    fn tax_never_lowers_lcoe(
        capex in 500.0..5000.0f64,
        fuel in 0.0..60.0f64,
        cf in 0.1..0.9f64,
        tax in 0.0..0.5f64,
        rate in 0.0..0.15f64,
    ) {
        let params = TechnologyParams {
            capex,
            opex_fixed: 20.0,
            fuel_cost: fuel,
            variable_cost: 2.0,
            emission_factor: 0.5,
            lifetime: 30.0,
            capacity_factor: [cf; 4],
            learning_rate: 0.0,
            tax_rate: tax,
            max_build: 0.1,
            fuel_price_series: Vec::new(),
        };
        let without = lcoe_with_fuel_price(Technology::Coal, &params, capex, fuel, rate, false)
            .unwrap();
        let with = lcoe_with_fuel_price(Technology::Coal, &params, capex, fuel, rate, true)
            .unwrap();
        prop_assert!(with >= without);
        prop_assert!((with - without * (1.0 + tax)).abs() < 1e-9 * with.abs().max(1.0));
    }
}

// ---------------------------------------------------------------------------
// Whole-system invariants on randomised scenarios
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Adding capacity of the dirtiest technology can only displace cleaner
    /// generation or serve shortage, so yearly emissions never go down.
    #[test]
    fn investing_in_dirtiest_tech_never_cuts_emissions(seed in scenario_seed()) {
        let scenario = build_scenario(&seed);
        let dirtiest = Technology::ALL
            .into_iter()
            .max_by(|a, b| {
                scenario.techs[*a]
                    .emission_factor
                    .total_cmp(&scenario.techs[*b].emission_factor)
            })
            .unwrap();
        let scenario = scenario.into_arc();

        let mut idle = PowerSystem::new(scenario.clone());
        let base = idle.run_control_year(&PerRegionTech::zeros()).unwrap();

        let mut invest = PerRegionTech::zeros();
        for r in Region::ALL {
            invest[(r, dirtiest)] = scenario.techs[dirtiest].max_build;
        }
        let mut dirty = PowerSystem::new(scenario);
        let rec = dirty.run_control_year(&invest).unwrap();

        prop_assert!(
            rec.co2_added_gt >= base.co2_added_gt - 1e-15,
            "emissions fell from {} to {} after building {dirtiest}",
            base.co2_added_gt,
            rec.co2_added_gt
        );
    }

    /// Every observation the environment emits is inside the clipping range,
    /// whatever the action sequence, and episodes end exactly on schedule.
    #[test]
    fn observations_stay_bounded_and_episodes_terminate(
        seed in scenario_seed(),
        actions in prop::collection::vec(prop::array::uniform16(-1.5..1.5f64), 8),
    ) {
        let scenario = build_scenario(&seed);
        let steps = scenario.episode_steps();
        let mut env = PowerEnv::new(scenario.into_arc());
        let obs = env.reset(0).unwrap();
        prop_assert_eq!(obs.len(), OBS_LEN);
        let mut taken = 0;
        'outer: loop {
            for a in &actions {
                let sr = env.step(a).unwrap();
                taken += 1;
                for &x in sr.observation.as_slice() {
                    prop_assert!((-0.5..=1.5).contains(&x), "entry {x} escaped the clip");
                }
                prop_assert!(sr.reward.is_finite());
                if sr.done {
                    break 'outer;
                }
            }
        }
        prop_assert_eq!(taken, steps);
        prop_assert!(env.step(&actions[0]).is_err());
    }

    /// Rolling the same scenario through history twice gives identical
    /// records: the simulator has no hidden nondeterminism.
    #[test]
    fn historical_rollout_is_reproducible(seed in scenario_seed()) {
        let scenario = build_scenario(&seed).into_arc();
        let mut a = PowerSystem::new(scenario.clone());
        let mut b = PowerSystem::new(scenario);
        let ra = a.historical_rollout().unwrap();
        let rb = b.historical_rollout().unwrap();
        prop_assert_eq!(ra, rb);
        prop_assert_eq!(a.state, b.state);
    }
}

// ---------------------------------------------------------------------------
// Action codec
// ---------------------------------------------------------------------------

proptest! {
    /// Decoded investments always land in `[0, max_build]`, and in-range
    /// actions survive the round trip through the inverse map.
    #[test]
    fn action_codec_round_trips(
        seed in scenario_seed(),
        action in prop::array::uniform16(-2.0..2.0f64),
    ) {
        let scenario = build_scenario(&seed);
        let invest = decode_action(&action, &scenario);
        for (r, t, &v) in invest.iter() {
            let max_build = scenario.techs[t].max_build;
            prop_assert!(v >= 0.0);
            prop_assert!(v <= max_build);
            let a = action[r.index() * N_TECH + t.index()];
            if (-1.0..=1.0).contains(&a) {
                prop_assert!((invest_fraction(v, max_build) - a).abs() < 1e-12);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Replay buffer
// ---------------------------------------------------------------------------

proptest! {
    /// After `n` pushes the buffer holds exactly the most recent
    /// `min(n, capacity)` transitions: push `j` lives in slot `j % capacity`,
    /// so older entries are evicted strictly in order.
    #[test]
    fn replay_keeps_exactly_the_newest(
        capacity in 1..64usize,
        n in 0..200usize,
    ) {
        let mut buf = ReplayBuffer::new(capacity);
        for i in 0..n {
            buf.push(Transition {
                state: vec![i as f64],
                action: vec![0.0],
                reward: i as f64,
                next_state: vec![0.0],
                done: false,
            });
        }
        let kept = n.min(capacity);
        prop_assert_eq!(buf.len(), kept);
        for j in (n - kept)..n {
            prop_assert_eq!(buf.get(j % capacity).reward, j as f64);
        }
    }
}

// ---------------------------------------------------------------------------
// Network serialisation
// ---------------------------------------------------------------------------

proptest! {
    /// Binary round trip preserves every parameter bit and the layer shapes.
    #[test]
    fn net_checkpoint_round_trips_bitwise(
        input in 1..6usize,
        hidden in prop::collection::vec(1..8usize, 0..3),
        output in 1..4usize,
        rng_seed in 0..u64::MAX,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let net = init_policy_style(
            input,
            &hidden,
            output,
            Activation::Relu,
            Activation::Tanh,
            &mut rng,
        );
        let mut blob = Vec::new();
        write_net(&net, &mut blob).unwrap();
        let restored = read_net(&mut blob.as_slice()).unwrap();
        prop_assert_eq!(restored.dims(), net.dims());
        let before: Vec<u64> = net.params_flat().iter().map(|v| v.to_bits()).collect();
        let after: Vec<u64> = restored.params_flat().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(before, after);
    }
}
