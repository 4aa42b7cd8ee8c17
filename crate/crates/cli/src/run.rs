use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use consensus_dyn::simulator::{run, Metrics, RunSpec, RunTrace};
use consensus_dyn::trace_io::{read_positions, write_deltas, write_margins, write_positions};
use log::info;
use serde::Serialize;

use crate::audits::{run_audits, AuditSummary};
use crate::config::ScenarioConfig;
use crate::Status;

#[derive(Serialize)]
struct Summary<'a> {
    spec: &'a RunSpec,
    metrics: &'a Metrics,
    audits: &'a AuditSummary,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn cmd_run(config: &ScenarioConfig, out: &Path) -> Result<Status> {
    let spec = config.checked_run_spec()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    info!("running {} with n={} d={}", spec.algorithm, spec.n, spec.d);
    let trace = run(&spec)?;
    let audits = run_audits(&trace, &config.audits)?;

    let names = &config.outputs;
    write_positions(create(out, &names.trace)?, &trace.configs)?;
    write_deltas(create(out, &names.deltas)?, &trace.deltas)?;
    write_margins(create(out, &names.margins)?, &trace.margins)?;
    let summary = Summary {
        spec: &trace.spec,
        metrics: &trace.metrics,
        audits: &audits,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    let path = out.join(&names.summary);
    fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;

    let m = &trace.metrics;
    println!(
        "{}: rounds={} converged={} t_eps={} bound={}",
        spec.algorithm,
        m.rounds_run,
        m.converged,
        m.t_eps.rounds().map_or("not reached".into(), |t| t.to_string()),
        m.bound_t.map_or("-".into(), |b| b.to_string()),
    );
    Ok(report_audits(&audits))
}

fn report_audits(audits: &AuditSummary) -> Status {
    if let Some(s) = &audits.safeness {
        println!(
            "safeness: {} (claimed {}, worst {}, {} violations)",
            if s.passed { "ok" } else { "VIOLATED" },
            s.claimed_alpha,
            s.worst_alpha.map_or("-".into(), |w| w.to_string()),
            s.violation_count
        );
    }
    if let Some(m) = &audits.matrices {
        println!("matrices: {}", if m.passed { "ok" } else { "VIOLATED" });
    }
    if let Some(m) = &audits.moreau {
        println!("moreau: {}", if m.passed { "ok" } else { "VIOLATED" });
    }
    if audits.passed() {
        Status::Ok
    } else {
        Status::AuditFailed
    }
}

pub const VERIFY_REPORT: &str = "verify.json";

/// Re-runs the configured audits on positions stored by an earlier `run`
/// and writes their report to [`VERIFY_REPORT`].
pub fn cmd_verify(config: &ScenarioConfig, out: &Path, trace_path: Option<PathBuf>) -> Result<Status> {
    let a = &config.audits;
    if !(a.safeness || a.matrices || a.moreau) {
        bail!("no audit enabled in the config");
    }
    let spec = config.checked_run_spec()?;
    let path = trace_path.unwrap_or_else(|| out.join(&config.outputs.trace));
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let configs = read_positions(file).with_context(|| format!("reading {}", path.display()))?;
    let trace = RunTrace::from_positions(spec, configs).with_context(|| format!("checking {}", path.display()))?;
    info!("verifying {} rounds from {}", trace.rounds(), path.display());
    let audits = run_audits(&trace, a)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let report = out.join(VERIFY_REPORT);
    fs::write(&report, serde_json::to_string_pretty(&audits)? + "\n")
        .with_context(|| format!("writing {}", report.display()))?;
    Ok(report_audits(&audits))
}
