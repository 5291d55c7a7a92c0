//! The append-only training metrics log.
//!
//! One CSV row per training iteration. Each row is formatted into a single
//! buffer and handed to one `write_all` on an append-mode file, so a crash
//! leaves either the whole row or nothing — readers never see a torn line.
//! Floating-point cells use Rust's shortest-round-trip formatting, which is
//! deterministic, so identical runs produce byte-identical files (pass a
//! fixed clock to also pin the timing column).

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::Path;

use gridrl_core::ddpg::IterationReport;

pub const METRICS_NAME: &str = "metrics.csv";
pub const METRICS_HEADER: &str =
    "iteration,env_steps_total,reward_min,reward_mean,reward_max,critic_loss,wall_seconds";

pub struct MetricsLog {
    file: File,
    last_env_steps: Option<u64>,
}

impl MetricsLog {
    /// Start a fresh log (truncates), writing the header row.
    pub fn create(path: &Path) -> io::Result<MetricsLog> {
        let mut file = File::create(path)?;
        file.write_all(format!("{METRICS_HEADER}\n").as_bytes())?;
        Ok(MetricsLog {
            file,
            last_env_steps: None,
        })
    }

    /// Append to an existing log, writing the header first if the file is
    /// new or empty.
    pub fn resume(path: &Path) -> io::Result<MetricsLog> {
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            file.write_all(format!("{METRICS_HEADER}\n").as_bytes())?;
        }
        Ok(MetricsLog {
            file,
            last_env_steps: None,
        })
    }

    pub fn write_row(&mut self, report: &IterationReport, wall_seconds: f64) -> io::Result<()> {
        if let Some(last) = self.last_env_steps {
            debug_assert!(report.env_steps_total > last, "env_steps_total must increase");
        }
        self.last_env_steps = Some(report.env_steps_total);
        let line = format!(
            "{},{},{},{},{},{},{:.3}\n",
            report.iteration,
            report.env_steps_total,
            report.reward_min,
            report.reward_mean,
            report.reward_max,
            report.critic_loss,
            wall_seconds,
        );
        self.file.write_all(line.as_bytes())
    }
}

/// One parsed metrics row; used by `export-figures` and the sweep summary.
#[derive(Clone, Copy, Debug)]
pub struct MetricsRow {
    pub iteration: u64,
    pub env_steps_total: u64,
    pub reward_min: f64,
    pub reward_mean: f64,
    pub reward_max: f64,
    pub critic_loss: f64,
    pub wall_seconds: f64,
}

pub fn read_metrics(path: &Path) -> io::Result<Vec<MetricsRow>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != METRICS_HEADER {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("unexpected metrics header in {}", path.display()),
                ));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("metrics row {} has {} cells, expected 7", i + 1, cells.len()),
            ));
        }
        let parse_f = |s: &str| s.parse::<f64>().map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("row {}: {e}", i + 1))
        });
        let parse_u = |s: &str| s.parse::<u64>().map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("row {}: {e}", i + 1))
        });
        rows.push(MetricsRow {
            iteration: parse_u(cells[0])?,
            env_steps_total: parse_u(cells[1])?,
            reward_min: parse_f(cells[2])?,
            reward_mean: parse_f(cells[3])?,
            reward_max: parse_f(cells[4])?,
            critic_loss: parse_f(cells[5])?,
            wall_seconds: parse_f(cells[6])?,
        });
    }
    Ok(rows)
}
