//! Tabular output for runs and fidelity reports, and the worker-profile
//! table format.
//!
//! Run and fidelity tables are plain CSV written by hand (fixed columns,
//! six decimals). Worker profiles round-trip through the `csv` crate with
//! headers `worker_id,phi_exp,phi_mv`.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::augment::WorkerFidelity;
use crate::bandit::{SimulationReport, WorkerProfile};

/// One row of a gate-threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SweepRow {
    /// The agreement threshold swept over.
    pub tau: f64,
    /// Final cumulative mean F1 against the expert.
    pub final_f1: f64,
    /// Mean reward per pull.
    pub mean_reward: f64,
    /// Fraction of evaluations that consulted the expert.
    pub expert_usage: f64,
}

/// Reading a worker-profile table failed.
#[derive(Debug, Error)]
pub enum ProfilesError {
    /// Malformed CSV or unreadable input.
    #[error("profile table: {0}")]
    Csv(#[from] csv::Error),
}

/// Writes a run's per-round curves as CSV: one row per selection round,
/// then a `#`-prefixed summary line (omitted when no round ran).
pub fn write_simulation_csv(out: &mut impl Write, report: &SimulationReport) -> io::Result<()> {
    writeln!(out, "t,cumulative_regret,mean_f1_exp,expert_usage_so_far")?;
    for (i, outcome) in report.outcomes.iter().enumerate() {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6}",
            outcome.t, report.regret_curve[i], report.f1_curve[i], report.expert_usage_curve[i]
        )?;
    }
    if !report.outcomes.is_empty() {
        writeln!(
            out,
            "# final_f1={:.6} expert_usage={:.6} mean_reward={:.6} steps={}",
            report.final_f1,
            report.expert_usage,
            report.mean_reward,
            report.outcomes.len()
        )?;
    }
    Ok(())
}

/// Writes a fidelity report as CSV, one row per worker.
pub fn write_fidelity_csv(out: &mut impl Write, fidelity: &[WorkerFidelity]) -> io::Result<()> {
    writeln!(out, "worker_id,phi_bar,phi_after,abs_delta_f1")?;
    for row in fidelity {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6}",
            row.worker_id,
            row.phi_bar,
            row.phi_after,
            row.abs_delta()
        )?;
    }
    Ok(())
}

/// Writes a gate-threshold sweep as CSV, one row per threshold.
pub fn write_sweep_csv(out: &mut impl Write, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "tau,final_f1,mean_reward,expert_usage")?;
    for row in rows {
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6}",
            row.tau, row.final_f1, row.mean_reward, row.expert_usage
        )?;
    }
    Ok(())
}

/// Reads a worker-profile table (`worker_id,phi_exp,phi_mv` with header).
pub fn read_profiles_csv(input: impl Read) -> Result<Vec<WorkerProfile>, ProfilesError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut profiles = Vec::new();
    for record in reader.deserialize() {
        profiles.push(record?);
    }
    Ok(profiles)
}

/// Writes a worker-profile table (`worker_id,phi_exp,phi_mv` with header).
pub fn write_profiles_csv(
    out: &mut impl Write,
    profiles: &[WorkerProfile],
) -> Result<(), ProfilesError> {
    let mut writer = csv::Writer::from_writer(out);
    for profile in profiles {
        writer.serialize(profile)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
