//! Episode traces: the per-year record sequence behind an episode, CSV
//! export, and derived summary series.

use std::io;

use crate::error::EnvError;
use crate::sim::YearRecord;
use crate::types::{PerRegion, PerTech, Region, Technology};

/// Year records paired with the reward attributed to each year. Covers the
/// whole simulated horizon: historical years carry the reward formula
/// evaluated at that year's state, control years carry the reward the
/// environment actually emitted.
#[derive(Clone, Debug, Default)]
pub struct EpisodeTrace {
    pub records: Vec<YearRecord>,
    pub rewards: Vec<f64>,
    /// How many leading records belong to the historical (pre-control) years.
    pub historical_len: usize,
}

pub const TRACE_HEADER: &str = "year,tech,region,generation_MWh,capacity_GW,investment_GW,cumulative_co2_Gt,lcoe_with_tax,lcoe_without_tax,reward";

impl EpisodeTrace {
    pub fn control_records(&self) -> &[YearRecord] {
        &self.records[self.historical_len..]
    }

    pub fn control_rewards(&self) -> &[f64] {
        &self.rewards[self.historical_len..]
    }

    /// Cumulative CO2 accrued during the control period only.
    pub fn control_co2_gt(&self) -> f64 {
        let handoff = if self.historical_len == 0 {
            0.0
        } else {
            self.records[self.historical_len - 1].cumulative_co2_gt
        };
        match self.records.last() {
            Some(rec) => rec.cumulative_co2_gt - handoff,
            None => 0.0,
        }
    }

    /// One CSV row per (year, region, technology), years ascending, regions
    /// then technologies in canonical order.
    pub fn write_csv<W: io::Write>(&self, w: &mut W) -> io::Result<()> {
        debug_assert_eq!(self.records.len(), self.rewards.len());
        let mut out = String::with_capacity(64 * 16 * self.records.len() + 128);
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for (rec, &reward) in self.records.iter().zip(&self.rewards) {
            for r in Region::ALL {
                for t in Technology::ALL {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{}\n",
                        rec.year,
                        t.key(),
                        r.key(),
                        rec.generation[(r, t)],
                        rec.capacity[(r, t)],
                        rec.investment_gw[(r, t)],
                        rec.cumulative_co2_gt,
                        rec.lcoe_with_tax,
                        rec.lcoe_without_tax,
                        reward,
                    ));
                }
            }
        }
        w.write_all(out.as_bytes())
    }

    pub fn metrics(&self) -> Result<EpisodeMetrics, EnvError> {
        if self.records.is_empty() {
            return Err(EnvError::EmptyTrace);
        }
        let mut m = EpisodeMetrics {
            years: Vec::with_capacity(self.records.len()),
            rewards: self.rewards.clone(),
            co2_added_gt: Vec::with_capacity(self.records.len()),
            cumulative_co2_gt: Vec::with_capacity(self.records.len()),
            mix: Vec::with_capacity(self.records.len()),
            annual_demand: Vec::with_capacity(self.records.len()),
            final_mix: PerTech::zeros(),
        };
        for rec in &self.records {
            m.years.push(rec.year);
            m.co2_added_gt.push(rec.co2_added_gt);
            m.cumulative_co2_gt.push(rec.cumulative_co2_gt);
            let mix = rec
                .generation_mix()
                .ok_or(EnvError::Sim(crate::error::SimError::ZeroGeneration))?;
            m.mix.push(mix);
            m.annual_demand
                .push(PerRegion::from_fn(|r| rec.demand[r].iter().sum()));
        }
        m.final_mix = *m.mix.last().expect("records checked non-empty");
        Ok(m)
    }
}

/// Per-year series derived from a trace.
#[derive(Clone, Debug)]
pub struct EpisodeMetrics {
    pub years: Vec<i32>,
    pub rewards: Vec<f64>,
    pub co2_added_gt: Vec<f64>,
    pub cumulative_co2_gt: Vec<f64>,
    /// Generation mix over both regions; each row sums to one.
    pub mix: Vec<PerTech<f64>>,
    pub annual_demand: Vec<PerRegion<f64>>,
    pub final_mix: PerTech<f64>,
}

impl EpisodeMetrics {
    /// Mean share of generation from zero-emission technologies over the
    /// final `n` years (or all years if fewer).
    pub fn zero_emission_share_final(&self, n: usize, emission_factor: &PerTech<f64>) -> f64 {
        let rows = self.mix.len().min(n.max(1));
        let start = self.mix.len() - rows;
        let mut acc = 0.0;
        for mix in &self.mix[start..] {
            for t in Technology::ALL {
                if emission_factor[t] == 0.0 {
                    acc += mix[t];
                }
            }
        }
        acc / rows as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::PowerSystem;
    use crate::types::PerRegionTech;

    fn traced_system_with_investment(invest_gw: f64) -> EpisodeTrace {
        let scenario = crate::sim::tests::test_scenario();
        let reward_cfg = scenario.reward;
        let mut sys = PowerSystem::new(scenario.into_arc());
        let hist = sys.historical_rollout().unwrap();
        let historical_len = hist.len();
        let mut trace = EpisodeTrace {
            historical_len,
            ..Default::default()
        };
        for rec in hist {
            let r = crate::env::reward_value(
                &reward_cfg,
                rec.cumulative_co2_gt,
                rec.lcoe_without_tax,
            );
            trace.records.push(rec);
            trace.rewards.push(r);
        }
        for _ in 0..3 {
            let rec = sys
                .run_control_year(&PerRegionTech::splat(invest_gw))
                .unwrap();
            let r = crate::env::reward_value(
                &reward_cfg,
                rec.cumulative_co2_gt,
                rec.lcoe_without_tax,
            );
            trace.records.push(rec);
            trace.rewards.push(r);
        }
        trace
    }

    fn traced_system() -> EpisodeTrace {
        traced_system_with_investment(0.01)
    }

    #[test]
    fn csv_shape_and_order() {
        let trace = traced_system();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        // 13 years (10 historical + 3 control) x 2 regions x 8 technologies.
        assert_eq!(lines.len(), 1 + 13 * 16);
        // First data row: 2007, coal, UK. Ninth: 2007, coal, IE.
        assert!(lines[1].starts_with("2007,coal,UK,"));
        assert!(lines[9].starts_with("2007,coal,IE,"));
        // Rows 2..9 walk the technologies within UK.
        assert!(lines[2].starts_with("2007,ccgt,UK,"));
        assert!(lines[8].starts_with("2007,wave,UK,"));
        // Next year starts after 16 rows.
        assert!(lines[17].starts_with("2008,"));
        // Every row has exactly 10 columns.
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 10, "{line}");
        }
    }

    #[test]
    fn metrics_series_are_consistent() {
        let trace = traced_system();
        let m = trace.metrics().unwrap();
        assert_eq!(m.years.len(), 13);
        assert_eq!(m.years[0], 2007);
        assert_eq!(*m.years.last().unwrap(), 2019);
        // Cumulative CO2 is the running sum of the increments.
        let mut acc = 0.0;
        for (added, cumulative) in m.co2_added_gt.iter().zip(&m.cumulative_co2_gt) {
            acc += added;
            assert!((acc - cumulative).abs() < 1e-12);
        }
        // Mix rows are simplex vectors.
        for mix in &m.mix {
            let total: f64 = mix.0.iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        // Demand is flat in the test scenario.
        assert_eq!(m.annual_demand[0][Region::Uk], 2.0e6);
        assert_eq!(m.annual_demand[0][Region::Ie], 1.0e6);
    }

    #[test]
    fn control_slices() {
        let trace = traced_system();
        assert_eq!(trace.control_records().len(), 3);
        assert_eq!(trace.control_rewards().len(), 3);
        let handoff = trace.records[trace.historical_len - 1].cumulative_co2_gt;
        let expected = trace.records.last().unwrap().cumulative_co2_gt - handoff;
        assert!((trace.control_co2_gt() - expected).abs() < 1e-15);
        assert!(trace.control_co2_gt() > 0.0);
    }

    #[test]
    fn empty_trace_is_an_error() {
        let trace = EpisodeTrace::default();
        assert!(matches!(trace.metrics(), Err(EnvError::EmptyTrace)));
    }

    #[test]
    fn zero_emission_share() {
        // Invest nothing so the fleet stays the initial coal+ccgt one and
        // the clean technologies (which would dispatch first) never appear.
        let trace = traced_system_with_investment(0.0);
        let m = trace.metrics().unwrap();
        let ef = PerTech::from_fn(|t| match t {
            Technology::Coal => 0.9,
            Technology::Ccgt => 0.4,
            _ => 0.0,
        });
        let share = m.zero_emission_share_final(3, &ef);
        assert!(share.abs() < 1e-12);
        let ef_all_clean = PerTech::zeros();
        let share = m.zero_emission_share_final(3, &ef_all_clean);
        assert!((share - 1.0).abs() < 1e-9);
    }
}
