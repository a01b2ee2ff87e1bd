use std::fs;
use std::path::Path;

use serde::Serialize;

use procrastinate::online::SimTrace;
use procrastinate::Instance;

use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct StretchRow {
    job: u32,
    release: String,
    due: String,
    completion: String,
    stretch: String,
}

#[derive(Serialize)]
struct GanttRow {
    job: u32,
    start: String,
    end: String,
}

/// Writes `stretch.csv` (one row per job) and `gantt.csv` (one row per
/// execution segment) into `dir`, creating it if needed.
///
/// Unfinished jobs get empty completion and stretch cells.
pub fn write_plot_data(dir: &Path, instance: &Instance, trace: &SimTrace) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::software(format!("{}: {e}", dir.display())))?;
    let mut stretch = csv::Writer::from_path(dir.join("stretch.csv"))?;
    for job in &instance.jobs {
        let completion = trace.completions.get(&job.id);
        stretch.serialize(StretchRow {
            job: job.id.0,
            release: job.release.to_decimal_string(),
            due: job.due.to_decimal_string(),
            completion: completion
                .map(|c| c.to_decimal_string())
                .unwrap_or_default(),
            stretch: trace
                .stretches
                .get(&job.id)
                .map(|s| s.to_decimal_string())
                .unwrap_or_default(),
        })?;
    }
    stretch.flush()?;
    let mut gantt = csv::Writer::from_path(dir.join("gantt.csv"))?;
    for seg in &trace.segments {
        gantt.serialize(GanttRow {
            job: seg.job.0,
            start: seg.start.to_decimal_string(),
            end: seg.end.to_decimal_string(),
        })?;
    }
    gantt.flush()?;
    Ok(())
}
