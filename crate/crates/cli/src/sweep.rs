use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use consensus_dyn::simulator::{run, RunSpec};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::audits::{run_audits, safeness};
use crate::config::{Audits, ScenarioConfig};
use crate::Status;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: usize,
    pub n: usize,
    pub d: usize,
    pub algorithm: String,
    pub seed: u64,
    /// Rounds to the accuracy target, or `not reached`.
    pub t_eps: String,
    pub bound_t: Option<u64>,
    pub worst_alpha: Option<f64>,
    pub empirical_rate: Option<f64>,
    pub converged: bool,
    /// Empty where no bound applies.
    pub within_bound: Option<bool>,
}

fn run_one(scenario: usize, spec: &RunSpec, audits: &Audits) -> Result<(SweepRow, bool)> {
    let trace = run(spec)?;
    let pattern = spec.build_pattern()?;
    let mut summary = run_audits(&trace, &Audits { safeness: false, ..audits.clone() })?;
    if trace.rounds() > 0 {
        summary.safeness = Some(safeness(&trace, &pattern)?);
    }
    let m = &trace.metrics;
    let within_bound = m.bound_t.map(|b| m.t_eps.rounds().is_some_and(|t| t <= b));
    let row = SweepRow {
        scenario,
        n: spec.n,
        d: spec.d,
        algorithm: spec.algorithm.to_string(),
        seed: spec.seed,
        t_eps: m.t_eps.rounds().map_or("not reached".into(), |t| t.to_string()),
        bound_t: m.bound_t,
        worst_alpha: summary.worst_alpha(),
        empirical_rate: m.empirical_rate,
        converged: m.converged,
        within_bound,
    };
    Ok((row, summary.passed()))
}

/// Runs every scenario of the sweep. The safeness audit always runs, since
/// it supplies the `worst_alpha` column.
pub fn sweep_rows(config: &ScenarioConfig) -> Result<(Vec<SweepRow>, bool)> {
    let specs = config.sweep_specs()?;
    info!("sweeping {} scenarios", specs.len());
    let results: Vec<(SweepRow, bool)> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| run_one(i, spec, &config.audits).with_context(|| format!("scenario {i}")))
        .collect::<Result<_>>()?;
    let passed = results.iter().all(|r| r.1);
    Ok((results.into_iter().map(|r| r.0).collect(), passed))
}

pub fn cmd_sweep(config: &ScenarioConfig, out: &Path) -> Result<Status> {
    let (rows, passed) = sweep_rows(config)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(&config.outputs.sweep);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    for row in &rows {
        w.serialize(row)?;
        if row.within_bound == Some(false) {
            warn!("scenario {} exceeded its bound: t_eps {} > {:?}", row.scenario, row.t_eps, row.bound_t);
        }
    }
    w.flush()?;
    let over = rows.iter().filter(|r| r.within_bound == Some(false)).count();
    println!("{} scenarios written to {}; {} over bound", rows.len(), path.display(), over);
    if passed {
        Ok(Status::Ok)
    } else {
        println!("audit violations in the sweep");
        Ok(Status::AuditFailed)
    }
}
