//! CSV renderings of thresholds, simulation traces and experiment results.

use std::io::Write;

use crate::harness::experiment::ExperimentResult;
use crate::policy::{compute_threshold, PolicyError, PolicyParams};
use crate::scheduler::Assignment;

/// Grid of the published threshold table at `alpha = 0.99`.
pub const TABLE_COSTS: [f64; 3] = [0.1, 1.0, 2.5];
pub const TABLE_R: [f64; 2] = [0.90, 0.95];
pub const TABLE_THETA0: [f64; 3] = [0.75, 0.80, 0.90];
pub const TABLE_ALPHA: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub cost_k: f64,
    pub r: f64,
    pub theta0: f64,
    pub mu_th: f64,
    pub segments: usize,
}

pub fn threshold_table() -> Result<Vec<ThresholdRow>, PolicyError> {
    let mut rows = Vec::with_capacity(18);
    for &cost_k in &TABLE_COSTS {
        for &r in &TABLE_R {
            for &theta0 in &TABLE_THETA0 {
                let t = compute_threshold(&PolicyParams::closed_form(TABLE_ALPHA, theta0, r)?, cost_k)?;
                rows.push(ThresholdRow {
                    cost_k,
                    r,
                    theta0,
                    mu_th: t.mu_th,
                    segments: t.segments,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_threshold_table<W: Write>(out: W, rows: &[ThresholdRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["K", "r", "theta0", "mu_th", "M"])?;
    for row in rows {
        w.write_record([
            row.cost_k.to_string(),
            format!("{:.2}", row.r),
            format!("{:.2}", row.theta0),
            format!("{:.4}", row.mu_th),
            row.segments.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn opt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// One row per band assignment: time, band, task id, action, t_tb, trace,
/// mu, mu_th. Filter columns are empty where they do not apply.
pub fn write_assignments<W: Write>(out: W, rows: &[Assignment]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "band", "task", "action", "t_tb", "trace", "mu", "mu_th"])?;
    for a in rows {
        let task = a.task_id.map(|id| id.to_string()).unwrap_or_default();
        w.write_record([
            a.start.to_string(),
            a.band.to_string(),
            task,
            a.action.name().to_string(),
            opt(a.t_tb),
            opt(a.trace),
            opt(a.mu),
            opt(a.mu_th),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean metrics per policy, preceded by a comment line on the occupancy
/// normalization.
pub fn write_metrics<W: Write>(mut out: W, result: &ExperimentResult) -> csv::Result<()> {
    writeln!(out, "# occupancy = busy band-seconds / (bands * duration); scenarios = {}", result.per_scenario.len())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "n_tracking_tasks", "n_surveillances", "probable_drops", "occupancy", "cost", "avg_error"])?;
    for (p, m) in result.policies.iter().zip(&result.means) {
        w.write_record([
            p.name().to_string(),
            m.n_tracking_tasks.to_string(),
            m.n_surveillances.to_string(),
            m.probable_drops.to_string(),
            m.occupancy.to_string(),
            m.cost.to_string(),
            m.avg_error.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_standings<W: Write>(out: W, result: &ExperimentResult) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "best", "runner_up", "honorable_mention", "last"])?;
    for (p, s) in result.policies.iter().zip(&result.standings) {
        w.write_record([
            p.name().to_string(),
            s.best.to_string(),
            s.runner_up.to_string(),
            s.honorable_mention.to_string(),
            s.last.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
