//! On-disk formats. Every number is an exact decimal string: the shortest
//! text that parses back to the same binary value at the recorded
//! precision, so writing a loaded file reproduces it byte for byte.
//!
//! Instance file, schema version 1:
//!
//! | field            | type                                                 |
//! |------------------|------------------------------------------------------|
//! | `schema_version` | integer, always 1                                    |
//! | `name`           | string                                               |
//! | `precision_bits` | integer, precision the decimals were written at      |
//! | `provenance`     | string                                               |
//! | `jobs`           | list of `{id, release, due, work, slope, base}`      |
//!
//! Trace file, schema version 1:
//!
//! | field            | type                                                          |
//! |------------------|---------------------------------------------------------------|
//! | `schema_version` | integer, always 1                                             |
//! | `run`            | `{instance, policy, alpha, cap, precision_bits, offline}`     |
//! | `jobs`           | list of `{id, release, due}`                                  |
//! | `events`         | list of `{time, kind, job}`; `job` is null for idle rows      |
//! | `summary`        | `{jobs: [{id, completion, stretch}], max_stretch, busy_time, late_jobs, missed_due_date}` |
//!
//! The summary is a pure function of `jobs` and `events`; loading a trace
//! recomputes it and rejects the file on any difference.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};

use procrastinate::offline::{FeasibilityStatus, FeasibilityVerdict};
use procrastinate::online::{EventKind, PolicyKind, PolicySpec, SimTrace};
use procrastinate::{Instance, Job, JobId, PrecisionContext, Real, Schedule};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Decimal number text, syntax-checked on load so that errors carry a
/// line and column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Decimal(pub String);

impl Decimal {
    pub fn of(x: &Real) -> Self {
        Decimal(x.to_decimal_string())
    }

    pub fn value(&self, bits: usize) -> CliResult<Real> {
        Ok(Real::parse_decimal(&self.0, bits)?)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if Real::parse_decimal(&s, 64).is_err() {
            return Err(serde::de::Error::custom(format!(
                "{s:?} is not a decimal number"
            )));
        }
        Ok(Decimal(s))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobRecord {
    pub id: u32,
    pub release: Decimal,
    pub due: Decimal,
    pub work: Decimal,
    pub slope: Decimal,
    pub base: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub name: String,
    pub precision_bits: usize,
    pub provenance: String,
    pub jobs: Vec<JobRecord>,
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance, bits: usize) -> Self {
        let jobs = instance
            .jobs
            .iter()
            .map(|j| JobRecord {
                id: j.id.0,
                release: Decimal::of(&j.release),
                due: Decimal::of(&j.due),
                work: Decimal::of(&j.work),
                slope: Decimal::of(&j.speed.slope),
                base: Decimal::of(&j.speed.base),
            })
            .collect();
        InstanceFile {
            schema_version: SCHEMA_VERSION,
            name: instance.name.clone(),
            precision_bits: bits,
            provenance: instance.provenance.clone(),
            jobs,
        }
    }

    pub fn to_instance(&self, ctx: &PrecisionContext) -> CliResult<Instance> {
        let bits = ctx.bits();
        let mut jobs = Vec::with_capacity(self.jobs.len());
        for rec in &self.jobs {
            let job = Job::new(
                JobId(rec.id),
                rec.release.value(bits)?,
                rec.due.value(bits)?,
                rec.work.value(bits)?,
                rec.base.value(bits)?,
                rec.slope.value(bits)?,
            )
            .map_err(|e| CliError::from(e).context(format!("job {}", rec.id)))?;
            jobs.push(job);
        }
        Ok(Instance::new(
            jobs,
            self.name.clone(),
            self.provenance.clone(),
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInfo {
    pub instance: String,
    pub policy: String,
    pub alpha: Decimal,
    pub cap: Option<Decimal>,
    pub precision_bits: usize,
    /// Offline verdict for the instance, when it was computed.
    pub offline: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobWindow {
    pub id: u32,
    pub release: Decimal,
    pub due: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRow {
    pub time: Decimal,
    pub kind: String,
    pub job: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobOutcome {
    pub id: u32,
    pub completion: Decimal,
    pub stretch: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub jobs: Vec<JobOutcome>,
    /// Null when some released job never completed.
    pub max_stretch: Option<Decimal>,
    pub busy_time: Decimal,
    pub late_jobs: Vec<u32>,
    pub missed_due_date: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub schema_version: u32,
    pub run: RunInfo,
    pub jobs: Vec<JobWindow>,
    pub events: Vec<EventRow>,
    pub summary: Summary,
}

impl TraceFile {
    pub fn from_trace(
        trace: &SimTrace,
        instance: &Instance,
        offline: Option<FeasibilityStatus>,
        ctx: &PrecisionContext,
    ) -> CliResult<Self> {
        let jobs: Vec<JobWindow> = instance
            .jobs
            .iter()
            .map(|j| JobWindow {
                id: j.id.0,
                release: Decimal::of(&j.release),
                due: Decimal::of(&j.due),
            })
            .collect();
        let events: Vec<EventRow> = trace
            .events
            .iter()
            .map(|e| EventRow {
                time: Decimal::of(&e.time),
                kind: e.kind.as_str().to_string(),
                job: e.job.map(|id| id.0),
            })
            .collect();
        let summary = summarize(&jobs, &events, ctx)?;
        Ok(TraceFile {
            schema_version: SCHEMA_VERSION,
            run: RunInfo {
                instance: trace.instance_name.clone(),
                policy: trace.policy.kind.as_str().to_string(),
                alpha: Decimal::of(&trace.policy.alpha),
                cap: trace.policy.speed_cap_factor.as_ref().map(Decimal::of),
                precision_bits: ctx.bits(),
                offline: offline.map(|s| s.as_str().to_string()),
            },
            jobs,
            events,
            summary,
        })
    }

    /// Policy named in the run metadata.
    pub fn policy(&self, ctx: &PrecisionContext) -> CliResult<PolicySpec> {
        let kind: PolicyKind = self.run.policy.parse()?;
        let mut spec = PolicySpec::new(kind, ctx).with_alpha(self.run.alpha.value(ctx.bits())?)?;
        if let Some(cap) = &self.run.cap {
            spec = spec.with_cap(cap.value(ctx.bits())?)?;
        }
        Ok(spec)
    }

    /// Recomputes the summary from the job windows and event rows and
    /// compares it with the stored one.
    pub fn check_consistency(&self) -> CliResult<()> {
        let ctx = PrecisionContext::new(self.run.precision_bits);
        self.policy(&ctx)?;
        let recomputed = summarize(&self.jobs, &self.events, &ctx)?;
        if recomputed != self.summary {
            return Err(CliError::usage(format!(
                "stored summary disagrees with the events: expected {}",
                serde_json::to_string(&recomputed).expect("summary serializes")
            )));
        }
        Ok(())
    }
}

/// Completions, stretches, busy time and lateness from event rows alone.
///
/// Busy time accumulates `Start` to `Preempt`/`Complete` of the same job,
/// in event order, so the result is reproducible bit for bit.
pub fn summarize(
    jobs: &[JobWindow],
    events: &[EventRow],
    ctx: &PrecisionContext,
) -> CliResult<Summary> {
    let bits = ctx.bits();
    let mut windows = BTreeMap::new();
    for w in jobs {
        let (r, d) = (w.release.value(bits)?, w.due.value(bits)?);
        if r >= d {
            return Err(CliError::usage(format!(
                "job {}: release must precede due date",
                w.id
            )));
        }
        if windows.insert(w.id, (r, d)).is_some() {
            return Err(CliError::usage(format!("job {} listed twice", w.id)));
        }
    }
    let mut completions: BTreeMap<u32, Real> = BTreeMap::new();
    let mut released: Vec<u32> = Vec::new();
    let mut running: Option<(u32, Real)> = None;
    let mut busy = ctx.zero();
    let mut last: Option<Real> = None;
    for (k, row) in events.iter().enumerate() {
        let t = row.time.value(bits)?;
        let kind: EventKind = row
            .kind
            .parse()
            .map_err(|e| CliError::from(e).context(format!("event {k}")))?;
        if last.as_ref().is_some_and(|prev| &t < prev) {
            return Err(CliError::usage(format!("event {k} goes back in time")));
        }
        last = Some(t.clone());
        let needs_job = !matches!(kind, EventKind::IdleBegin | EventKind::IdleEnd);
        let job = match (needs_job, row.job) {
            (true, Some(id)) if windows.contains_key(&id) => Some(id),
            (true, Some(id)) => {
                return Err(CliError::usage(format!("event {k} names unknown job {id}")))
            }
            (true, None) => {
                return Err(CliError::usage(format!(
                    "event {k} ({}) names no job",
                    row.kind
                )))
            }
            (false, _) => None,
        };
        match kind {
            EventKind::Release => released.push(job.expect("checked")),
            EventKind::Start => {
                if let Some((id, start)) = running.take() {
                    return Err(CliError::usage(format!(
                        "event {k} starts a job while job {id} runs since {start}"
                    )));
                }
                running = Some((job.expect("checked"), t));
            }
            EventKind::Preempt | EventKind::Complete => {
                let id = job.expect("checked");
                if let Some((run, start)) = running.take() {
                    if run == id {
                        busy += &(&t - &start);
                    } else {
                        running = Some((run, start));
                    }
                }
                if kind == EventKind::Complete && completions.insert(id, t).is_some() {
                    return Err(CliError::usage(format!("job {id} completes twice")));
                }
            }
            EventKind::IdleBegin | EventKind::IdleEnd => {}
        }
    }
    let mut outcomes = Vec::with_capacity(completions.len());
    let mut late = Vec::new();
    let mut worst: Option<Real> = None;
    for (id, c) in &completions {
        let (r, d) = &windows[id];
        let stretch = (c - r) / (d - r);
        if c > d {
            late.push(*id);
        }
        if worst.as_ref().is_none_or(|w| &stretch > w) {
            worst = Some(stretch.clone());
        }
        outcomes.push(JobOutcome {
            id: *id,
            completion: Decimal::of(c),
            stretch: Decimal::of(&stretch),
        });
    }
    let unfinished = released.iter().any(|id| !completions.contains_key(id));
    for id in windows.keys() {
        if !completions.contains_key(id) && !late.contains(id) {
            late.push(*id);
        }
    }
    late.sort_unstable();
    Ok(Summary {
        jobs: outcomes,
        max_stretch: if unfinished {
            None
        } else {
            worst.as_ref().map(Decimal::of)
        },
        busy_time: Decimal::of(&busy),
        missed_due_date: !late.is_empty(),
        late_jobs: late,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
    pub jobs: usize,
}

/// `manifest.json` of a suite directory: one instance file per entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub generator: String,
    pub instances: Vec<ManifestEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRow {
    pub job: u32,
    pub start: Decimal,
    pub end: Decimal,
    pub work: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeficitRow {
    pub job: u32,
    pub missing: Decimal,
}

/// Offline schedule plus its verdict, as written by `solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub schema_version: u32,
    pub instance: String,
    pub precision_bits: usize,
    pub status: String,
    pub margin: Decimal,
    pub busy_time: Decimal,
    pub deficit: Vec<DeficitRow>,
    pub segments: Vec<SegmentRow>,
}

impl ScheduleFile {
    pub fn new(
        instance: &Instance,
        schedule: &Schedule,
        verdict: &FeasibilityVerdict,
        ctx: &PrecisionContext,
    ) -> Self {
        ScheduleFile {
            schema_version: SCHEMA_VERSION,
            instance: instance.name.clone(),
            precision_bits: ctx.bits(),
            status: verdict.status.as_str().to_string(),
            margin: Decimal::of(&verdict.margin),
            busy_time: Decimal::of(&schedule.total_busy_time(ctx.bits())),
            deficit: verdict
                .deficit
                .iter()
                .map(|(id, w)| DeficitRow {
                    job: id.0,
                    missing: Decimal::of(w),
                })
                .collect(),
            segments: schedule
                .segments
                .iter()
                .map(|s| SegmentRow {
                    job: s.job.0,
                    start: Decimal::of(&s.start),
                    end: Decimal::of(&s.end),
                    work: Decimal::of(&s.work_done),
                })
                .collect(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("file types serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    fs::write(path, to_json(value))
        .map_err(|e| CliError::software(format!("{}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Parses JSON, reporting failures as `path:line:column: message`.
pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        // serde_json appends " at line L column C"; the location goes up front instead
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        CliError::usage(format!(
            "{}:{}:{}: {message}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn check_schema(path: &Path, version: u32) -> CliResult<()> {
    if version != SCHEMA_VERSION {
        return Err(CliError::usage(format!(
            "{}: unsupported schema_version {version}, expected {SCHEMA_VERSION}",
            path.display()
        )));
    }
    Ok(())
}

pub fn read_instance_file(path: &Path) -> CliResult<InstanceFile> {
    let file: InstanceFile = parse_json(path, &read_text(path)?)?;
    check_schema(path, file.schema_version)?;
    Ok(file)
}

pub fn read_trace_file(path: &Path) -> CliResult<TraceFile> {
    let file: TraceFile = parse_json(path, &read_text(path)?)?;
    check_schema(path, file.schema_version)?;
    Ok(file)
}
