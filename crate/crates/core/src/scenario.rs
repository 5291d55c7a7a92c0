//! Scenario files: every economic and physical assumption the simulator
//! consumes, read from TOML.
//!
//! The loader works in two passes. `toml` first deserialises into raw
//! span-carrying structs (`Spanned<T>` remembers where each value sits in the
//! source), then semantic validation converts to the domain types below,
//! reporting the source line of any offending value.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use toml::Spanned;

use crate::error::ScenarioError;
use crate::types::{PerRegion, PerRegionTech, PerTech, Region, Technology, N_TECH};

/// Simulation years. History runs `[start_year, control_start_year)`,
/// investment decisions run `[control_start_year, end_year)`, and the terminal
/// observation is dated `end_year`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Horizon {
    pub start_year: i32,
    pub control_start_year: i32,
    pub end_year: i32,
}

impl Horizon {
    /// Number of investment decisions in one episode.
    pub fn episode_steps(&self) -> usize {
        (self.end_year - self.control_start_year) as usize
    }
}

/// Economy-wide constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Economics {
    /// Discount rate used to annuitise capital costs.
    pub discount_rate: f64,
    /// Price per MWh applied to unserved demand in the system-wide levelised
    /// cost (value of lost load).
    pub value_of_lost_load: f64,
    /// Carbon price per tCO2 (accounting quantity reported in observations).
    pub carbon_price: f64,
    /// Step-function overrides of the carbon price: (year, price), sorted.
    pub carbon_price_series: Vec<(i32, f64)>,
    /// Endogenous learning may not push capex below this fraction of its
    /// initial value.
    pub capex_floor_fraction: f64,
}

/// When the scalar reward is emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewardMode {
    /// Emit the reward after every yearly decision.
    PerStep,
    /// Emit zero until the final step, which carries the full value.
    Terminal,
}

/// Weights of the scalar reward
/// `-(co2_weight * cumulative_co2 + lcoe / lcoe_divisor)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardConfig {
    pub mode: RewardMode,
    pub co2_weight: f64,
    pub lcoe_divisor: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            mode: RewardMode::PerStep,
            co2_weight: 1000.0,
            lcoe_divisor: 1000.0,
        }
    }
}

/// Cost-based share-diffusion parameters for the pre-control years.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionConfig {
    /// Cost-sensitivity scale in the pairwise logistic preference.
    pub sigma: f64,
    /// Pairwise switching time constants, symmetric, in years.
    pub tau: [[f64; N_TECH]; N_TECH],
}

/// How capacity evolves during the historical (pre-control) years.
#[derive(Clone, Debug, PartialEq)]
pub enum HistoricalMode {
    /// Capacity shares drift by cost-based diffusion; totals follow demand.
    Diffusion,
    /// Capacity follows a per-region, per-year prescribed series.
    Exogenous(PerRegion<ExogenousSeries>),
}

/// Prescribed capacities for the historical years of one region.
#[derive(Clone, Debug, PartialEq)]
pub struct ExogenousSeries {
    pub start_year: i32,
    /// One entry per year from `start_year`, in GW.
    pub capacity: Vec<PerTech<f64>>,
}

impl ExogenousSeries {
    pub fn capacity(&self, year: i32) -> Option<&PerTech<f64>> {
        if year < self.start_year {
            return None;
        }
        self.capacity.get((year - self.start_year) as usize)
    }
}

/// Static parameters of one technology.
#[derive(Clone, Debug, PartialEq)]
pub struct TechnologyParams {
    /// Overnight capital cost at scenario start, currency per kW.
    pub capex: f64,
    /// Fixed operating cost, currency per kW-year.
    pub opex_fixed: f64,
    /// Base fuel price, currency per MWh generated.
    pub fuel_cost: f64,
    /// Non-fuel variable cost, currency per MWh.
    pub variable_cost: f64,
    /// tCO2 per MWh generated.
    pub emission_factor: f64,
    /// Plant lifetime in years; 1/lifetime of the fleet retires annually.
    pub lifetime: f64,
    /// Availability per quarter, each in (0, 1].
    pub capacity_factor: [f64; 4],
    /// Capex reduction per doubling of cumulative investment, in [0, 1).
    pub learning_rate: f64,
    /// Levies applied multiplicatively to the levelised cost: `(1 + tax_rate)`.
    pub tax_rate: f64,
    /// Maximum capacity addition per region per year, GW.
    pub max_build: f64,
    /// Step-function overrides of the fuel price: (year, price), sorted.
    pub fuel_price_series: Vec<(i32, f64)>,
}

impl TechnologyParams {
    pub fn mean_capacity_factor(&self) -> f64 {
        self.capacity_factor.iter().sum::<f64>() / 4.0
    }

    /// Fuel price in a given year (base value unless a series overrides it).
    pub fn fuel_price(&self, year: i32) -> f64 {
        step_lookup(&self.fuel_price_series, self.fuel_cost, year)
    }

    /// Short-run marginal cost used for merit-order dispatch.
    pub fn marginal_cost(&self, year: i32) -> f64 {
        self.fuel_price(year) + self.variable_cost
    }
}

/// Quarterly demand per region, precomputed for every year of the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandSeries {
    pub start_year: i32,
    /// Quarterly energy demand in MWh, one row per year from `start_year`.
    pub quarters: Vec<[f64; 4]>,
}

impl DemandSeries {
    pub fn quarter(&self, year: i32, q: usize) -> Option<f64> {
        if year < self.start_year || q >= 4 {
            return None;
        }
        self.quarters
            .get((year - self.start_year) as usize)
            .map(|row| row[q])
    }

    pub fn annual(&self, year: i32) -> Option<f64> {
        if year < self.start_year {
            return None;
        }
        self.quarters
            .get((year - self.start_year) as usize)
            .map(|row| row.iter().sum())
    }
}

/// One region's starting point and demand.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionParams {
    pub demand: DemandSeries,
    /// Installed capacity at `start_year`, GW.
    pub initial_capacity: PerTech<f64>,
    /// Monetary book value of the initial fleet, currency.
    pub initial_cumulative_investment: PerTech<f64>,
}

/// Min/max pair used to squash raw quantities into observation space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    /// Min-max normalise and clip to [-0.5, 1.5].
    pub fn apply(&self, x: f64) -> f64 {
        ((x - self.min) / (self.max - self.min)).clamp(-0.5, 1.5)
    }
}

/// Normalisation constants for each observation block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub generation: Bounds,
    pub capacity: Bounds,
    pub cumulative_co2: Bounds,
    pub lcoe: Bounds,
    pub cumulative_investment: Bounds,
    pub new_investment: Bounds,
    pub fuel_price: Bounds,
    pub fuel_cost: Bounds,
    pub carbon_cost: Bounds,
}

/// A fully validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub horizon: Horizon,
    pub economics: Economics,
    pub reward: RewardConfig,
    pub diffusion: DiffusionConfig,
    pub historical: HistoricalMode,
    pub techs: PerTech<TechnologyParams>,
    pub regions: PerRegion<RegionParams>,
    /// Reference cumulative investment per technology against which the
    /// learning curve measures doublings.
    pub baseline_investment: PerTech<f64>,
    pub normalization: Normalization,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Scenario, ScenarioError> {
        let src = std::fs::read_to_string(path)?;
        Scenario::from_toml_str(&src)
    }

    pub fn from_toml_str(src: &str) -> Result<Scenario, ScenarioError> {
        let raw: RawScenario = toml::from_str(src)?;
        validate(raw, src)
    }

    pub fn into_arc(self) -> Arc<Scenario> {
        Arc::new(self)
    }

    pub fn fuel_price(&self, tech: Technology, year: i32) -> f64 {
        self.techs[tech].fuel_price(year)
    }

    pub fn carbon_price(&self, year: i32) -> f64 {
        step_lookup(
            &self.economics.carbon_price_series,
            self.economics.carbon_price,
            year,
        )
    }

    pub fn marginal_cost(&self, tech: Technology, year: i32) -> f64 {
        self.techs[tech].marginal_cost(year)
    }

    pub fn episode_steps(&self) -> usize {
        self.horizon.episode_steps()
    }

    /// Initial capacity per (region, technology), GW.
    pub fn initial_capacity(&self) -> PerRegionTech<f64> {
        PerRegionTech::from_fn(|r, t| self.regions[r].initial_capacity[t])
    }
}

/// Latest value in `series` with year <= `year`, else `base`.
fn step_lookup(series: &[(i32, f64)], base: f64, year: i32) -> f64 {
    let mut value = base;
    for &(y, v) in series {
        if y <= year {
            value = v;
        } else {
            break;
        }
    }
    value
}

// ---------------------------------------------------------------------------
// Raw (span-carrying) representation
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    horizon: RawHorizon,
    economics: RawEconomics,
    #[serde(default)]
    reward: Option<RawReward>,
    diffusion: RawDiffusion,
    #[serde(default)]
    historical: Option<RawHistorical>,
    technology: BTreeMap<String, RawTech>,
    region: BTreeMap<String, RawRegion>,
    normalization: RawNormalization,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHorizon {
    start_year: Spanned<i32>,
    control_start_year: Spanned<i32>,
    end_year: Spanned<i32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEconomics {
    discount_rate: Spanned<f64>,
    value_of_lost_load: Spanned<f64>,
    carbon_price: Spanned<f64>,
    #[serde(default)]
    carbon_price_series: Option<BTreeMap<String, Spanned<f64>>>,
    capex_floor_fraction: Spanned<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReward {
    #[serde(default)]
    mode: Option<Spanned<String>>,
    #[serde(default)]
    co2_weight: Option<Spanned<f64>>,
    #[serde(default)]
    lcoe_divisor: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiffusion {
    sigma: Spanned<f64>,
    #[serde(default)]
    tau: Option<Spanned<f64>>,
    #[serde(default)]
    tau_matrix: Option<Spanned<Vec<Vec<f64>>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHistorical {
    mode: Spanned<String>,
    #[serde(default)]
    capacity: Option<BTreeMap<String, BTreeMap<String, BTreeMap<String, Spanned<f64>>>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTech {
    capex: Spanned<f64>,
    opex_fixed: Spanned<f64>,
    fuel_cost: Spanned<f64>,
    variable_cost: Spanned<f64>,
    emission_factor: Spanned<f64>,
    lifetime: Spanned<f64>,
    capacity_factor: Spanned<Vec<f64>>,
    learning_rate: Spanned<f64>,
    tax_rate: Spanned<f64>,
    max_build: Spanned<f64>,
    #[serde(default)]
    baseline_investment: Option<Spanned<f64>>,
    #[serde(default)]
    fuel_price_series: Option<BTreeMap<String, Spanned<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    demand: RawDemand,
    #[serde(default)]
    initial_capacity: Option<BTreeMap<String, Spanned<f64>>>,
    #[serde(default)]
    initial_cumulative_investment: Option<BTreeMap<String, Spanned<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDemand {
    #[serde(default)]
    base: Option<Spanned<Vec<f64>>>,
    #[serde(default)]
    growth: Option<Spanned<f64>>,
    #[serde(default)]
    series: Option<BTreeMap<String, Spanned<Vec<f64>>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNormalization {
    generation: Spanned<Vec<f64>>,
    capacity: Spanned<Vec<f64>>,
    cumulative_co2: Spanned<Vec<f64>>,
    lcoe: Spanned<Vec<f64>>,
    cumulative_investment: Spanned<Vec<f64>>,
    new_investment: Spanned<Vec<f64>>,
    fuel_price: Spanned<Vec<f64>>,
    fuel_cost: Spanned<Vec<f64>>,
    carbon_cost: Spanned<Vec<f64>>,
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn line(&self, span: &Range<usize>) -> usize {
        let at = span.start.min(self.src.len());
        self.src[..at].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn fail<T>(&self, span: Range<usize>, message: impl Into<String>) -> Result<T, ScenarioError> {
        Err(ScenarioError::Invalid {
            line: self.line(&span),
            message: message.into(),
        })
    }

    fn ensure(
        &self,
        cond: bool,
        span: Range<usize>,
        message: impl Into<String>,
    ) -> Result<(), ScenarioError> {
        if cond {
            Ok(())
        } else {
            self.fail(span, message)
        }
    }
}

/// Error for omissions that have no associated source position.
fn doc_error(message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        line: 1,
        message: message.into(),
    }
}

fn parse_year_key(
    ctx: &Ctx<'_>,
    key: &str,
    span: Range<usize>,
    what: &str,
) -> Result<i32, ScenarioError> {
    match key.parse::<i32>() {
        Ok(y) => Ok(y),
        Err(_) => ctx.fail(span, format!("{what}: year key `{key}` is not an integer")),
    }
}

fn year_series(
    ctx: &Ctx<'_>,
    raw: &BTreeMap<String, Spanned<f64>>,
    what: &str,
) -> Result<Vec<(i32, f64)>, ScenarioError> {
    let mut out = Vec::with_capacity(raw.len());
    for (key, v) in raw {
        let year = parse_year_key(ctx, key, v.span(), what)?;
        ctx.ensure(
            *v.get_ref() >= 0.0 && v.get_ref().is_finite(),
            v.span(),
            format!("{what}: value for {year} must be finite and >= 0"),
        )?;
        out.push((year, *v.get_ref()));
    }
    out.sort_by_key(|&(y, _)| y);
    Ok(out)
}

fn finite(ctx: &Ctx<'_>, v: &Spanned<f64>, what: &str) -> Result<f64, ScenarioError> {
    ctx.ensure(v.get_ref().is_finite(), v.span(), format!("{what} must be finite"))?;
    Ok(*v.get_ref())
}

fn finite_in(
    ctx: &Ctx<'_>,
    v: &Spanned<f64>,
    lo: f64,
    hi: f64,
    lo_incl: bool,
    hi_incl: bool,
    what: &str,
) -> Result<f64, ScenarioError> {
    let x = finite(ctx, v, what)?;
    let lo_ok = if lo_incl { x >= lo } else { x > lo };
    let hi_ok = if hi_incl { x <= hi } else { x < hi };
    let lo_b = if lo_incl { '[' } else { '(' };
    let hi_b = if hi_incl { ']' } else { ')' };
    ctx.ensure(
        lo_ok && hi_ok,
        v.span(),
        format!("{what} must lie in {lo_b}{lo}, {hi}{hi_b}, got {x}"),
    )?;
    Ok(x)
}

fn per_tech_map(
    ctx: &Ctx<'_>,
    raw: &BTreeMap<String, Spanned<f64>>,
    what: &str,
) -> Result<PerTech<f64>, ScenarioError> {
    let mut out = PerTech::zeros();
    for (key, v) in raw {
        let Some(tech) = Technology::from_key(key) else {
            return ctx.fail(v.span(), format!("{what}: unknown technology `{key}`"));
        };
        ctx.ensure(
            v.get_ref().is_finite() && *v.get_ref() >= 0.0,
            v.span(),
            format!("{what}: value for {tech} must be finite and >= 0"),
        )?;
        out[tech] = *v.get_ref();
    }
    Ok(out)
}

fn bounds(ctx: &Ctx<'_>, raw: &Spanned<Vec<f64>>, what: &str) -> Result<Bounds, ScenarioError> {
    let v = raw.get_ref();
    ctx.ensure(
        v.len() == 2,
        raw.span(),
        format!("normalization.{what} must be a [min, max] pair"),
    )?;
    ctx.ensure(
        v[0].is_finite() && v[1].is_finite() && v[1] > v[0],
        raw.span(),
        format!("normalization.{what} must satisfy max > min"),
    )?;
    Ok(Bounds { min: v[0], max: v[1] })
}

fn validate(raw: RawScenario, src: &str) -> Result<Scenario, ScenarioError> {
    let ctx = Ctx { src };

    // Horizon --------------------------------------------------------------
    let start_year = *raw.horizon.start_year.get_ref();
    let control_start_year = *raw.horizon.control_start_year.get_ref();
    let end_year = *raw.horizon.end_year.get_ref();
    ctx.ensure(
        start_year < control_start_year,
        raw.horizon.control_start_year.span(),
        format!("control_start_year ({control_start_year}) must be after start_year ({start_year})"),
    )?;
    ctx.ensure(
        control_start_year < end_year,
        raw.horizon.end_year.span(),
        format!("end_year ({end_year}) must be after control_start_year ({control_start_year})"),
    )?;
    let horizon = Horizon {
        start_year,
        control_start_year,
        end_year,
    };

    // Economics --------------------------------------------------------------
    let economics = Economics {
        discount_rate: finite_in(
            &ctx,
            &raw.economics.discount_rate,
            0.0,
            1.0,
            true,
            false,
            "economics.discount_rate",
        )?,
        value_of_lost_load: {
            let v = finite(&ctx, &raw.economics.value_of_lost_load, "economics.value_of_lost_load")?;
            ctx.ensure(
                v > 0.0,
                raw.economics.value_of_lost_load.span(),
                "economics.value_of_lost_load must be > 0",
            )?;
            v
        },
        carbon_price: {
            let v = finite(&ctx, &raw.economics.carbon_price, "economics.carbon_price")?;
            ctx.ensure(
                v >= 0.0,
                raw.economics.carbon_price.span(),
                "economics.carbon_price must be >= 0",
            )?;
            v
        },
        carbon_price_series: match &raw.economics.carbon_price_series {
            Some(m) => year_series(&ctx, m, "economics.carbon_price_series")?,
            None => Vec::new(),
        },
        capex_floor_fraction: finite_in(
            &ctx,
            &raw.economics.capex_floor_fraction,
            0.0,
            1.0,
            false,
            true,
            "economics.capex_floor_fraction",
        )?,
    };

    // Reward -----------------------------------------------------------------
    let mut reward = RewardConfig::default();
    if let Some(r) = &raw.reward {
        if let Some(mode) = &r.mode {
            reward.mode = match mode.get_ref().as_str() {
                "per-step" => RewardMode::PerStep,
                "terminal" => RewardMode::Terminal,
                other => {
                    return ctx.fail(
                        mode.span(),
                        format!("reward.mode must be `per-step` or `terminal`, got `{other}`"),
                    )
                }
            };
        }
        if let Some(w) = &r.co2_weight {
            reward.co2_weight = finite(&ctx, w, "reward.co2_weight")?;
            ctx.ensure(reward.co2_weight >= 0.0, w.span(), "reward.co2_weight must be >= 0")?;
        }
        if let Some(d) = &r.lcoe_divisor {
            reward.lcoe_divisor = finite(&ctx, d, "reward.lcoe_divisor")?;
            ctx.ensure(reward.lcoe_divisor > 0.0, d.span(), "reward.lcoe_divisor must be > 0")?;
        }
    }

    // Diffusion ----------------------------------------------------------------
    let sigma = finite(&ctx, &raw.diffusion.sigma, "diffusion.sigma")?;
    ctx.ensure(sigma > 0.0, raw.diffusion.sigma.span(), "diffusion.sigma must be > 0")?;
    let tau = match (&raw.diffusion.tau, &raw.diffusion.tau_matrix) {
        (Some(_), Some(m)) => {
            return ctx.fail(m.span(), "give either diffusion.tau or diffusion.tau_matrix, not both")
        }
        (Some(scalar), None) => {
            let v = finite(&ctx, scalar, "diffusion.tau")?;
            ctx.ensure(v > 0.0, scalar.span(), "diffusion.tau must be > 0")?;
            [[v; N_TECH]; N_TECH]
        }
        (None, Some(m)) => {
            let rows = m.get_ref();
            ctx.ensure(
                rows.len() == N_TECH && rows.iter().all(|r| r.len() == N_TECH),
                m.span(),
                format!("diffusion.tau_matrix must be {N_TECH}x{N_TECH}"),
            )?;
            let mut out = [[0.0; N_TECH]; N_TECH];
            for i in 0..N_TECH {
                for j in 0..N_TECH {
                    let v = rows[i][j];
                    ctx.ensure(
                        v.is_finite() && v > 0.0,
                        m.span(),
                        format!("diffusion.tau_matrix[{i}][{j}] must be finite and > 0"),
                    )?;
                    ctx.ensure(
                        rows[j][i] == v,
                        m.span(),
                        format!(
                            "diffusion.tau_matrix must be symmetric; [{i}][{j}] != [{j}][{i}]"
                        ),
                    )?;
                    out[i][j] = v;
                }
            }
            out
        }
        (None, None) => {
            return ctx.fail(raw.diffusion.sigma.span(), "diffusion.tau (or tau_matrix) is required")
        }
    };
    let diffusion = DiffusionConfig { sigma, tau };

    // Technologies ----------------------------------------------------------
    for key in raw.technology.keys() {
        if Technology::from_key(key).is_none() {
            let span = raw.technology[key].capex.span();
            return ctx.fail(span, format!("unknown technology table `{key}`"));
        }
    }
    let mut techs_opt: [Option<TechnologyParams>; N_TECH] = Default::default();
    let mut baseline_explicit: PerTech<Option<f64>> = PerTech::splat(None);
    for (key, rt) in &raw.technology {
        let tech = Technology::from_key(key).expect("checked above");
        let cf_raw = rt.capacity_factor.get_ref();
        ctx.ensure(
            cf_raw.len() == 4,
            rt.capacity_factor.span(),
            format!("technology.{key}.capacity_factor needs 4 quarterly values"),
        )?;
        let mut capacity_factor = [0.0; 4];
        for (q, &cf) in cf_raw.iter().enumerate() {
            ctx.ensure(
                cf.is_finite() && cf > 0.0 && cf <= 1.0,
                rt.capacity_factor.span(),
                format!("technology.{key}.capacity_factor[{q}] must lie in (0, 1], got {cf}"),
            )?;
            capacity_factor[q] = cf;
        }
        let params = TechnologyParams {
            capex: finite_in(&ctx, &rt.capex, 0.0, f64::INFINITY, false, false, &format!("technology.{key}.capex"))?,
            opex_fixed: finite_in(&ctx, &rt.opex_fixed, 0.0, f64::INFINITY, true, false, &format!("technology.{key}.opex_fixed"))?,
            fuel_cost: finite_in(&ctx, &rt.fuel_cost, 0.0, f64::INFINITY, true, false, &format!("technology.{key}.fuel_cost"))?,
            variable_cost: finite_in(&ctx, &rt.variable_cost, 0.0, f64::INFINITY, true, false, &format!("technology.{key}.variable_cost"))?,
            emission_factor: finite_in(&ctx, &rt.emission_factor, 0.0, f64::INFINITY, true, false, &format!("technology.{key}.emission_factor"))?,
            lifetime: {
                let v = finite(&ctx, &rt.lifetime, &format!("technology.{key}.lifetime"))?;
                ctx.ensure(
                    v > 1.0,
                    rt.lifetime.span(),
                    format!("technology.{key}.lifetime must be > 1 year, got {v}"),
                )?;
                v
            },
            capacity_factor,
            learning_rate: finite_in(&ctx, &rt.learning_rate, 0.0, 1.0, true, false, &format!("technology.{key}.learning_rate"))?,
            tax_rate: finite_in(&ctx, &rt.tax_rate, 0.0, f64::INFINITY, true, false, &format!("technology.{key}.tax_rate"))?,
            max_build: finite_in(&ctx, &rt.max_build, 0.0, f64::INFINITY, true, false, &format!("technology.{key}.max_build"))?,
            fuel_price_series: match &rt.fuel_price_series {
                Some(m) => year_series(&ctx, m, &format!("technology.{key}.fuel_price_series"))?,
                None => Vec::new(),
            },
        };
        if let Some(b) = &rt.baseline_investment {
            let v = finite(&ctx, b, &format!("technology.{key}.baseline_investment"))?;
            ctx.ensure(
                v > 0.0,
                b.span(),
                format!("technology.{key}.baseline_investment must be > 0"),
            )?;
            baseline_explicit[tech] = Some(v);
        }
        techs_opt[tech.index()] = Some(params);
    }
    for t in Technology::ALL {
        if techs_opt[t.index()].is_none() {
            return Err(doc_error(format!("missing [technology.{}] table", t.key())));
        }
    }
    let techs = PerTech(techs_opt.map(|o| o.expect("checked above")));

    // Regions -----------------------------------------------------------------
    for key in raw.region.keys() {
        if Region::from_key(key).is_none() {
            return Err(doc_error(format!(
                "unknown region table `{key}` (expected UK and IE)"
            )));
        }
    }
    let mut regions_opt: [Option<(RegionParams, bool)>; 2] = Default::default();
    for (key, rr) in &raw.region {
        let region = Region::from_key(key).expect("checked above");
        let demand = validate_demand(&ctx, key, &rr.demand, &horizon)?;
        let (initial_capacity, has_initial) = match &rr.initial_capacity {
            Some(m) => (
                per_tech_map(&ctx, m, &format!("region.{key}.initial_capacity"))?,
                true,
            ),
            None => (PerTech::zeros(), false),
        };
        let initial_book = match &rr.initial_cumulative_investment {
            Some(m) => Some(per_tech_map(
                &ctx,
                m,
                &format!("region.{key}.initial_cumulative_investment"),
            )?),
            None => None,
        };
        // Default book value: initial capacity priced at initial capex
        // (GW * currency/kW * 1e6 kW/GW).
        let initial_cumulative_investment = match initial_book {
            Some(v) => v,
            None => PerTech::from_fn(|t| initial_capacity[t] * techs[t].capex * 1.0e6),
        };
        regions_opt[region.index()] = Some((
            RegionParams {
                demand,
                initial_capacity,
                initial_cumulative_investment,
            },
            has_initial,
        ));
    }
    for r in Region::ALL {
        if regions_opt[r.index()].is_none() {
            return Err(doc_error(format!("missing [region.{}] table", r.key())));
        }
    }
    let (region_params, has_initial): (Vec<_>, Vec<_>) =
        regions_opt.into_iter().map(|o| o.expect("checked above")).unzip();
    let mut regions = PerRegion([region_params[0].clone(), region_params[1].clone()]);

    // Historical mode -----------------------------------------------------------
    let historical = validate_historical(&ctx, &raw.historical, &horizon)?;

    // In exogenous mode the year-one capacities come from the series itself.
    match &historical {
        HistoricalMode::Exogenous(series) => {
            for r in Region::ALL {
                let first = series[r]
                    .capacity(horizon.start_year)
                    .ok_or_else(|| {
                        doc_error(format!(
                            "historical capacity series for {} must include start year {}",
                            r.key(),
                            horizon.start_year
                        ))
                    })?;
                regions[r].initial_capacity = *first;
                // Recompute default book values unless explicitly provided.
                if raw.region[r.key()].initial_cumulative_investment.is_none() {
                    regions[r].initial_cumulative_investment =
                        PerTech::from_fn(|t| first[t] * techs[t].capex * 1.0e6);
                }
            }
        }
        HistoricalMode::Diffusion => {
            for r in Region::ALL {
                if !has_initial[r.index()] {
                    return Err(doc_error(format!(
                        "region.{}.initial_capacity is required with diffusion history",
                        r.key()
                    )));
                }
                if regions[r].initial_capacity.sum() <= 0.0 {
                    return Err(doc_error(format!(
                        "region.{} initial capacity must be positive in total",
                        r.key()
                    )));
                }
            }
        }
    }

    // Learning baselines ----------------------------------------------------------
    let baseline_investment = PerTech::from_fn(|t| match baseline_explicit[t] {
        Some(v) => v,
        None => Region::ALL
            .iter()
            .map(|&r| regions[r].initial_cumulative_investment[t])
            .sum(),
    });
    for t in Technology::ALL {
        if techs[t].learning_rate > 0.0 && baseline_investment[t] <= 0.0 {
            return Err(doc_error(format!(
                "technology.{} has a learning rate but no positive baseline investment \
                 (set baseline_investment or give it initial capacity)",
                t.key()
            )));
        }
    }

    // Normalization ----------------------------------------------------------------
    let n = &raw.normalization;
    let normalization = Normalization {
        generation: bounds(&ctx, &n.generation, "generation")?,
        capacity: bounds(&ctx, &n.capacity, "capacity")?,
        cumulative_co2: bounds(&ctx, &n.cumulative_co2, "cumulative_co2")?,
        lcoe: bounds(&ctx, &n.lcoe, "lcoe")?,
        cumulative_investment: bounds(&ctx, &n.cumulative_investment, "cumulative_investment")?,
        new_investment: bounds(&ctx, &n.new_investment, "new_investment")?,
        fuel_price: bounds(&ctx, &n.fuel_price, "fuel_price")?,
        fuel_cost: bounds(&ctx, &n.fuel_cost, "fuel_cost")?,
        carbon_cost: bounds(&ctx, &n.carbon_cost, "carbon_cost")?,
    };

    Ok(Scenario {
        horizon,
        economics,
        reward,
        diffusion,
        historical,
        techs,
        regions,
        baseline_investment,
        normalization,
    })
}

fn validate_demand(
    ctx: &Ctx<'_>,
    region_key: &str,
    raw: &RawDemand,
    horizon: &Horizon,
) -> Result<DemandSeries, ScenarioError> {
    let n_years = (horizon.end_year - horizon.start_year + 1) as usize;
    match (&raw.base, &raw.series) {
        (Some(_), Some(s)) => {
            let span = s.values().next().map(|v| v.span()).unwrap_or(0..0);
            ctx.fail(
                span,
                format!("region.{region_key}.demand: give either base(+growth) or series, not both"),
            )
        }
        (Some(base), _) => {
            let b = base.get_ref();
            ctx.ensure(
                b.len() == 4,
                base.span(),
                format!("region.{region_key}.demand.base needs 4 quarterly values"),
            )?;
            for (q, &v) in b.iter().enumerate() {
                ctx.ensure(
                    v.is_finite() && v > 0.0,
                    base.span(),
                    format!("region.{region_key}.demand.base[{q}] must be > 0"),
                )?;
            }
            let growth = match &raw.growth {
                Some(g) => {
                    let v = finite(ctx, g, &format!("region.{region_key}.demand.growth"))?;
                    ctx.ensure(
                        v > -1.0,
                        g.span(),
                        format!("region.{region_key}.demand.growth must be > -1"),
                    )?;
                    v
                }
                None => 0.0,
            };
            let quarters = (0..n_years)
                .map(|i| {
                    let scale = (1.0 + growth).powi(i as i32);
                    [b[0] * scale, b[1] * scale, b[2] * scale, b[3] * scale]
                })
                .collect();
            Ok(DemandSeries {
                start_year: horizon.start_year,
                quarters,
            })
        }
        (None, Some(series)) => {
            if raw.growth.is_some() {
                let span = raw.growth.as_ref().unwrap().span();
                return ctx.fail(
                    span,
                    format!("region.{region_key}.demand.growth only applies to base demand"),
                );
            }
            let mut quarters = vec![None; n_years];
            for (key, v) in series {
                let year = parse_year_key(ctx, key, v.span(), &format!("region.{region_key}.demand.series"))?;
                if year < horizon.start_year || year > horizon.end_year {
                    return ctx.fail(
                        v.span(),
                        format!(
                            "region.{region_key}.demand.series year {year} outside horizon \
                             {}..={}",
                            horizon.start_year, horizon.end_year
                        ),
                    );
                }
                let row = v.get_ref();
                ctx.ensure(
                    row.len() == 4,
                    v.span(),
                    format!("region.{region_key}.demand.series.{year} needs 4 quarterly values"),
                )?;
                for (q, &x) in row.iter().enumerate() {
                    ctx.ensure(
                        x.is_finite() && x > 0.0,
                        v.span(),
                        format!("region.{region_key}.demand.series.{year}[{q}] must be > 0"),
                    )?;
                }
                quarters[(year - horizon.start_year) as usize] =
                    Some([row[0], row[1], row[2], row[3]]);
            }
            let mut out = Vec::with_capacity(n_years);
            for (i, q) in quarters.into_iter().enumerate() {
                match q {
                    Some(row) => out.push(row),
                    None => {
                        return Err(doc_error(format!(
                            "region.{region_key}.demand.series missing year {}",
                            horizon.start_year + i as i32
                        )))
                    }
                }
            }
            Ok(DemandSeries {
                start_year: horizon.start_year,
                quarters: out,
            })
        }
        (None, None) => Err(doc_error(format!(
            "region.{region_key}.demand needs either base(+growth) or series"
        ))),
    }
}

fn validate_historical(
    ctx: &Ctx<'_>,
    raw: &Option<RawHistorical>,
    horizon: &Horizon,
) -> Result<HistoricalMode, ScenarioError> {
    let Some(h) = raw else {
        return Ok(HistoricalMode::Diffusion);
    };
    match h.mode.get_ref().as_str() {
        "diffusion" => {
            if h.capacity.is_some() {
                return ctx.fail(
                    h.mode.span(),
                    "historical.capacity is only used with mode = \"exogenous\"",
                );
            }
            Ok(HistoricalMode::Diffusion)
        }
        "exogenous" => {
            let Some(cap) = &h.capacity else {
                return ctx.fail(h.mode.span(), "historical.capacity table required for exogenous mode");
            };
            let mut series_opt: [Option<ExogenousSeries>; 2] = Default::default();
            for (region_key, years) in cap {
                let Some(region) = Region::from_key(region_key) else {
                    return Err(doc_error(format!(
                        "historical.capacity: unknown region `{region_key}`"
                    )));
                };
                let n_years = (horizon.control_start_year - horizon.start_year) as usize;
                let mut rows = vec![None; n_years];
                for (year_key, techs) in years {
                    let span = techs
                        .values()
                        .next()
                        .map(|v| v.span())
                        .unwrap_or(0..0);
                    let year = parse_year_key(ctx, year_key, span.clone(), "historical.capacity")?;
                    if year < horizon.start_year || year >= horizon.control_start_year {
                        return ctx.fail(
                            span,
                            format!(
                                "historical.capacity year {year} outside {}..{}",
                                horizon.start_year, horizon.control_start_year
                            ),
                        );
                    }
                    let caps = per_tech_map(ctx, techs, "historical.capacity")?;
                    ctx.ensure(
                        caps.sum() > 0.0,
                        span,
                        format!("historical.capacity {region_key}/{year} must be positive in total"),
                    )?;
                    rows[(year - horizon.start_year) as usize] = Some(caps);
                }
                let mut capacity = Vec::with_capacity(n_years);
                for (i, row) in rows.into_iter().enumerate() {
                    match row {
                        Some(c) => capacity.push(c),
                        None => {
                            return Err(doc_error(format!(
                                "historical.capacity.{region_key} missing year {}",
                                horizon.start_year + i as i32
                            )))
                        }
                    }
                }
                series_opt[region.index()] = Some(ExogenousSeries {
                    start_year: horizon.start_year,
                    capacity,
                });
            }
            for r in Region::ALL {
                if series_opt[r.index()].is_none() {
                    return Err(doc_error(format!(
                        "historical.capacity missing region {}",
                        r.key()
                    )));
                }
            }
            let [uk, ie] = series_opt;
            Ok(HistoricalMode::Exogenous(PerRegion([
                uk.expect("checked"),
                ie.expect("checked"),
            ])))
        }
        other => ctx.fail(
            h.mode.span(),
            format!("historical.mode must be `diffusion` or `exogenous`, got `{other}`"),
        ),
    }
}
