use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Optimal,
    Feasible,
    TimeLimit,
}

/// One solver run, written as a CSV row.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub method: String,
    pub preset: String,
    /// Present iff the run produced a feasible plan.
    pub objective: Option<f64>,
    pub wall_s: f64,
    pub status: RunStatus,
    pub seed: u64,
}

pub fn write_reports<W: Write>(out: W, reports: &[RunReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if reports.is_empty() {
        w.write_record([
            "instance", "method", "preset", "objective", "wall_s", "status", "seed",
        ])?;
    }
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One benchmark run: time until the target optimum was first reached,
/// or the time limit when it was not.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub preset: String,
    pub repeat: usize,
    pub seed: u64,
    pub target: f64,
    pub best: f64,
    pub hit: bool,
    pub time_to_target_s: f64,
}

pub const BENCH_HEADER: [&str; 8] = [
    "instance",
    "preset",
    "repeat",
    "seed",
    "target",
    "best",
    "hit",
    "time_to_target_s",
];

pub fn write_bench_rows<W: Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean time-to-target per instance and preset, with a final row of
/// column averages.
pub fn summary_table(rows: &[BenchRow], instances: &[String], presets: &[String]) -> String {
    let mut out = String::from("instance");
    for p in presets {
        out.push(',');
        out.push_str(p);
    }
    out.push('\n');
    if instances.is_empty() {
        return out;
    }
    let mut totals = vec![0.0; presets.len()];
    for inst in instances {
        out.push_str(inst);
        for (k, p) in presets.iter().enumerate() {
            let times: Vec<f64> = rows
                .iter()
                .filter(|r| &r.instance == inst && &r.preset == p)
                .map(|r| r.time_to_target_s)
                .collect();
            let mean = times.iter().sum::<f64>() / times.len().max(1) as f64;
            totals[k] += mean;
            out.push_str(&format!(",{mean:.3}"));
        }
        out.push('\n');
    }
    out.push_str("average");
    for t in totals {
        out.push_str(&format!(",{:.3}", t / instances.len() as f64));
    }
    out.push('\n');
    out
}
