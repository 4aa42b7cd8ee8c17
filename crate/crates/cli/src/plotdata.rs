//! Long-format plot data: one `(round, series, value)` row per point.
//!
//! Series are `log10_delta_<k>` for each component range (rounds where the
//! range is exactly zero are skipped) and `alpha_hat`, the smallest realized
//! safeness margin of the round, when a margins file is available.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use consensus_dyn::trace_io::{fmt_f64, read_margins, read_positions};

#[derive(Clone, Debug, PartialEq)]
pub struct PlotRow {
    pub round: u64,
    pub series: String,
    pub value: f64,
}

pub fn plot_rows(trace: &Path, margins: Option<&Path>) -> Result<Vec<PlotRow>> {
    let file = File::open(trace).with_context(|| format!("opening {}", trace.display()))?;
    let configs = read_positions(file).with_context(|| format!("reading {}", trace.display()))?;
    let mut alpha_hat: BTreeMap<u64, f64> = BTreeMap::new();
    if let Some(path) = margins {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        for (t, _, a) in read_margins(file).with_context(|| format!("reading {}", path.display()))? {
            alpha_hat.entry(t).and_modify(|m| *m = m.min(a)).or_insert(a);
        }
    }
    let mut rows = Vec::new();
    for cfg in &configs {
        for (k, delta) in cfg.deltas().into_iter().enumerate() {
            if delta > 0.0 {
                rows.push(PlotRow {
                    round: cfg.round,
                    series: format!("log10_delta_{k}"),
                    value: delta.log10(),
                });
            }
        }
        if let Some(&a) = alpha_hat.get(&cfg.round) {
            rows.push(PlotRow {
                round: cfg.round,
                series: "alpha_hat".into(),
                value: a,
            });
        }
    }
    Ok(rows)
}

pub fn write_rows<W: Write>(w: W, rows: &[PlotRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["round", "series", "value"])?;
    for r in rows {
        out.write_record([r.round.to_string(), r.series.clone(), fmt_f64(r.value)])?;
    }
    out.flush()?;
    Ok(())
}

pub const PLOT_FILE: &str = "plot.csv";

/// Writes to `out/plot.csv` when an output directory is given, else to
/// stdout. Without an explicit margins file, `margins.csv` next to the trace
/// is used if present.
pub fn cmd_plotdata(trace: &Path, margins: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let sibling = trace.with_file_name("margins.csv");
    let margins = margins.or_else(|| sibling.is_file().then_some(sibling.as_path()));
    let rows = plot_rows(trace, margins)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(PLOT_FILE);
            let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_rows(std::io::BufWriter::new(f), &rows)
        }
        None => write_rows(std::io::stdout().lock(), &rows),
    }
}
