//! The `export-figures` subcommand: reshape run artifacts into one tidy CSV
//! per figure (reward curve, generation mix, emissions, demand), plus
//! optional SVG renderings.
//!
//! Inputs are whatever the run directory holds: `metrics.csv` feeds the
//! reward figure, an episode or baseline trace feeds mix and emissions, and
//! the manifest's scenario stamp feeds the demand series. Missing inputs
//! skip their figures and are listed; the command only fails if nothing at
//! all could be produced.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use gridrl_core::scenario::Scenario;
use gridrl_core::types::{Region, Technology, N_TECH};

use crate::error::{CliError, CliResult};
use crate::metrics::read_metrics;
use crate::svg::{write_line_chart, Series};

#[derive(Args, Debug)]
pub struct ExportFiguresArgs {
    /// Run directory holding metrics.csv / trace CSVs / manifest.toml.
    #[arg(long)]
    pub run: PathBuf,

    /// Where to write the figure CSVs (defaults to the run directory).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Also render each figure as a simple SVG line chart.
    #[arg(long)]
    pub svg: bool,
}

/// Per-year series distilled from a long-format trace CSV.
struct TraceSeries {
    years: Vec<i32>,
    /// Generation share per technology, summed over regions; rows sum to 1.
    mix: Vec<[f64; N_TECH]>,
    cumulative_co2: Vec<f64>,
}

pub fn cmd_export_figures(args: &ExportFiguresArgs) -> CliResult<()> {
    if !args.run.is_dir() {
        return Err(CliError::config(format!(
            "run directory {} does not exist",
            args.run.display()
        )));
    }
    let out = args.out.clone().unwrap_or_else(|| args.run.clone());
    fs::create_dir_all(&out).map_err(|e| {
        CliError::config(format!("cannot create output dir {}: {e}", out.display()))
    })?;

    let mut produced: Vec<&str> = Vec::new();
    let mut missing: Vec<String> = Vec::new();

    // --- fig_reward: straight from the metrics log --------------------------------
    let metrics_path = args.run.join("metrics.csv");
    if metrics_path.exists() {
        let rows = read_metrics(&metrics_path)
            .map_err(|e| CliError::config(format!("{}: {e}", metrics_path.display())))?;
        let mut csv = String::from("iteration,reward_min,reward_mean,reward_max\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                r.iteration, r.reward_min, r.reward_mean, r.reward_max
            ));
        }
        write_file(&out.join("fig_reward.csv"), &csv)?;
        produced.push("fig_reward.csv");
        if args.svg {
            let as_points = |f: fn(&crate::metrics::MetricsRow) -> f64| {
                rows.iter().map(|r| (r.iteration as f64, f(r))).collect::<Vec<_>>()
            };
            write_line_chart(
                &out.join("fig_reward.svg"),
                "Episode reward per training iteration",
                "iteration",
                "reward",
                &[
                    Series { label: "min", points: as_points(|r| r.reward_min) },
                    Series { label: "mean", points: as_points(|r| r.reward_mean) },
                    Series { label: "max", points: as_points(|r| r.reward_max) },
                ],
            )
            .map_err(CliError::io("writing fig_reward.svg"))?;
        }
    } else {
        missing.push("metrics.csv (needed for fig_reward)".to_string());
    }

    // --- fig_mix + fig_emissions: from an episode or baseline trace ---------------
    match find_trace(&args.run) {
        Some(trace_path) => {
            let series = parse_trace(&trace_path)?;

            let mut mix_csv = String::from("year");
            for t in Technology::ALL {
                mix_csv.push(',');
                mix_csv.push_str(t.key());
            }
            mix_csv.push('\n');
            for (year, mix) in series.years.iter().zip(&series.mix) {
                mix_csv.push_str(&year.to_string());
                for share in mix {
                    mix_csv.push_str(&format!(",{share}"));
                }
                mix_csv.push('\n');
            }
            write_file(&out.join("fig_mix.csv"), &mix_csv)?;
            produced.push("fig_mix.csv");

            let mut co2_csv = String::from("year,co2_added_Gt,cumulative_co2_Gt\n");
            let mut previous = 0.0;
            for (year, cum) in series.years.iter().zip(&series.cumulative_co2) {
                co2_csv.push_str(&format!("{},{},{}\n", year, cum - previous, cum));
                previous = *cum;
            }
            write_file(&out.join("fig_emissions.csv"), &co2_csv)?;
            produced.push("fig_emissions.csv");

            if args.svg {
                let mix_series: Vec<Series> = Technology::ALL
                    .iter()
                    .map(|&t| Series {
                        label: t.key(),
                        points: series
                            .years
                            .iter()
                            .zip(&series.mix)
                            .map(|(&y, m)| (y as f64, m[t.index()]))
                            .collect(),
                    })
                    .collect();
                write_line_chart(
                    &out.join("fig_mix.svg"),
                    "Generation mix over time",
                    "year",
                    "share of generation",
                    &mix_series,
                )
                .map_err(CliError::io("writing fig_mix.svg"))?;

                let mut previous = 0.0;
                let added: Vec<(f64, f64)> = series
                    .years
                    .iter()
                    .zip(&series.cumulative_co2)
                    .map(|(&y, &cum)| {
                        let point = (y as f64, cum - previous);
                        previous = cum;
                        point
                    })
                    .collect();
                let cumulative: Vec<(f64, f64)> = series
                    .years
                    .iter()
                    .zip(&series.cumulative_co2)
                    .map(|(&y, &cum)| (y as f64, cum))
                    .collect();
                write_line_chart(
                    &out.join("fig_emissions.svg"),
                    "Carbon emissions",
                    "year",
                    "GtCO2",
                    &[
                        Series { label: "added per year", points: added },
                        Series { label: "cumulative", points: cumulative },
                    ],
                )
                .map_err(CliError::io("writing fig_emissions.svg"))?;
            }
        }
        None => {
            missing.push(
                "trace_ep000.csv or trace.csv (needed for fig_mix and fig_emissions)".to_string(),
            );
        }
    }

    // --- fig_demand: replayed from the scenario named in the manifest -------------
    match scenario_from_manifest(&args.run) {
        Ok(scenario) => {
            let mut csv = String::from("year,region,quarter,demand_MWh\n");
            let horizon = &scenario.horizon;
            for year in horizon.start_year..horizon.end_year {
                for r in Region::ALL {
                    for q in 0..4 {
                        let demand = scenario.regions[r]
                            .demand
                            .quarter(year, q)
                            .expect("demand series covers the horizon");
                        csv.push_str(&format!("{},{},{},{}\n", year, r.key(), q + 1, demand));
                    }
                }
            }
            write_file(&out.join("fig_demand.csv"), &csv)?;
            produced.push("fig_demand.csv");

            if args.svg {
                let annual: Vec<Series> = Region::ALL
                    .iter()
                    .map(|&r| Series {
                        label: r.key(),
                        points: (horizon.start_year..horizon.end_year)
                            .map(|y| {
                                (y as f64, scenario.regions[r].demand.annual(y).unwrap_or(0.0))
                            })
                            .collect(),
                    })
                    .collect();
                write_line_chart(
                    &out.join("fig_demand.svg"),
                    "Annual electricity demand",
                    "year",
                    "MWh",
                    &annual,
                )
                .map_err(CliError::io("writing fig_demand.svg"))?;
            }
        }
        Err(reason) => missing.push(format!("{reason} (needed for fig_demand)")),
    }

    for name in &produced {
        println!("wrote {}", out.join(name).display());
    }
    if !missing.is_empty() {
        println!("missing inputs: {}", missing.join("; "));
    }
    if produced.is_empty() {
        return Err(CliError::config(format!(
            "nothing to export from {}; missing inputs: {}",
            args.run.display(),
            missing.join("; ")
        )));
    }
    Ok(())
}

/// Prefer an evaluation episode trace, fall back to a baseline trace.
fn find_trace(run: &Path) -> Option<PathBuf> {
    let episode = run.join("trace_ep000.csv");
    if episode.exists() {
        return Some(episode);
    }
    let baseline = run.join("trace.csv");
    baseline.exists().then_some(baseline)
}

fn parse_trace(path: &Path) -> CliResult<TraceSeries> {
    let text = fs::read_to_string(path)
        .map_err(CliError::io(format!("reading {}", path.display())))?;
    let mut series = TraceSeries {
        years: Vec::new(),
        mix: Vec::new(),
        cumulative_co2: Vec::new(),
    };
    // Generation per (year, tech), summed over regions, in file order.
    let mut generation: Vec<[f64; N_TECH]> = Vec::new();
    let bad = |line_no: usize, what: &str| {
        CliError::config(format!("{}:{}: {}", path.display(), line_no, what))
    };
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != gridrl_core::env::TRACE_HEADER {
                return Err(bad(1, "unexpected trace header"));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 10 {
            return Err(bad(i + 1, "expected 10 cells"));
        }
        let year: i32 = cells[0].parse().map_err(|_| bad(i + 1, "bad year"))?;
        let tech = Technology::ALL
            .iter()
            .copied()
            .find(|t| t.key() == cells[1])
            .ok_or_else(|| bad(i + 1, "unknown technology"))?;
        let gen: f64 = cells[3].parse().map_err(|_| bad(i + 1, "bad generation"))?;
        let cum: f64 = cells[6].parse().map_err(|_| bad(i + 1, "bad cumulative CO2"))?;
        if series.years.last() != Some(&year) {
            series.years.push(year);
            series.cumulative_co2.push(cum);
            generation.push([0.0; N_TECH]);
        }
        generation.last_mut().expect("pushed above")[tech.index()] += gen;
    }
    if series.years.is_empty() {
        return Err(CliError::config(format!("{} holds no rows", path.display())));
    }
    for row in &generation {
        let total: f64 = row.iter().sum();
        let mut mix = [0.0; N_TECH];
        if total > 0.0 {
            for (m, g) in mix.iter_mut().zip(row) {
                *m = g / total;
            }
        }
        series.mix.push(mix);
    }
    Ok(series)
}

/// Locate and load the scenario recorded in the run's manifest.
fn scenario_from_manifest(run: &Path) -> Result<Scenario, String> {
    let manifest_path = run.join("manifest.toml");
    let text = fs::read_to_string(&manifest_path)
        .map_err(|_| format!("manifest.toml in {}", run.display()))?;
    let value: toml::Value =
        text.parse().map_err(|e| format!("manifest.toml is unreadable: {e}"))?;
    let path = value
        .get("scenario")
        .and_then(|s| s.get("path"))
        .and_then(|p| p.as_str())
        .ok_or_else(|| "manifest.toml lacks a scenario path".to_string())?;
    Scenario::from_path(Path::new(path))
        .map_err(|e| format!("scenario {path} from manifest: {e}"))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(CliError::io(format!("writing {}", path.display())))
}
