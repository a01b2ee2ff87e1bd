use std::collections::BTreeMap;
use std::fmt;

use crate::job::{Instance, JobId};
use crate::numeric::{Comparison, PrecisionContext, Real};
use crate::online::SpeedModel;
use crate::schedule::{Schedule, Segment};

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    UnknownJob {
        job: JobId,
    },
    EmptySegment {
        job: JobId,
        start: Real,
        end: Real,
    },
    Overlap {
        first: JobId,
        second: JobId,
        at: Real,
    },
    BeforeRelease {
        job: JobId,
        start: Real,
        release: Real,
    },
    SegmentWork {
        job: JobId,
        start: Real,
        recorded: Real,
        expected: Real,
    },
    WorkMismatch {
        job: JobId,
        done: Real,
        required: Real,
    },
    LateCompletion {
        job: JobId,
        completion: Real,
        due: Real,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownJob { job } => write!(f, "segment refers to unknown job {job}"),
            Violation::EmptySegment { job, start, end } => {
                write!(f, "job {job}: empty segment [{start}, {end}]")
            }
            Violation::Overlap { first, second, at } => {
                write!(f, "jobs {first} and {second} overlap at {at}")
            }
            Violation::BeforeRelease {
                job,
                start,
                release,
            } => {
                write!(f, "job {job} runs at {start} before its release {release}")
            }
            Violation::SegmentWork {
                job,
                start,
                recorded,
                expected,
            } => write!(
                f,
                "job {job}: segment at {start} records work {recorded}, integral gives {expected}"
            ),
            Violation::WorkMismatch {
                job,
                done,
                required,
            } => {
                write!(
                    f,
                    "job {job}: completed work {done} differs from required {required}"
                )
            }
            Violation::LateCompletion {
                job,
                completion,
                due,
            } => {
                write!(
                    f,
                    "job {job} completes at {completion} after due date {due}"
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Checks a schedule against the uncapped speed model.
pub fn validate_schedule(
    instance: &Instance,
    schedule: &Schedule,
    require_due_dates: bool,
    ctx: &PrecisionContext,
) -> ValidationReport {
    validate_schedule_with(
        instance,
        schedule,
        require_due_dates,
        &SpeedModel::Uncapped,
        ctx,
    )
}

pub fn validate_schedule_with(
    instance: &Instance,
    schedule: &Schedule,
    require_due_dates: bool,
    model: &SpeedModel,
    ctx: &PrecisionContext,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut done: BTreeMap<JobId, Real> = BTreeMap::new();
    let mut last_end: BTreeMap<JobId, Real> = BTreeMap::new();

    let mut ordered: Vec<&Segment> = schedule.segments.iter().collect();
    ordered.sort_by(|a, b| a.start.cmp(&b.start));

    for (i, seg) in ordered.iter().enumerate() {
        let Some(job) = instance.job(seg.job) else {
            violations.push(Violation::UnknownJob { job: seg.job });
            continue;
        };
        if seg.start >= seg.end {
            violations.push(Violation::EmptySegment {
                job: seg.job,
                start: seg.start.clone(),
                end: seg.end.clone(),
            });
            continue;
        }
        if let Some(next) = ordered.get(i + 1) {
            if ctx.compare(&seg.end, &next.start) == Comparison::Greater {
                violations.push(Violation::Overlap {
                    first: seg.job,
                    second: next.job,
                    at: next.start.clone(),
                });
            }
        }
        if ctx.compare(&seg.start, &job.release) == Comparison::Less {
            violations.push(Violation::BeforeRelease {
                job: seg.job,
                start: seg.start.clone(),
                release: job.release.clone(),
            });
            continue;
        }
        let start = seg.start.max_of(&job.release);
        match model.work_between(job, &start, &seg.end) {
            Ok(expected) => {
                if !ctx.approx_eq(&expected, &seg.work_done) {
                    violations.push(Violation::SegmentWork {
                        job: seg.job,
                        start: seg.start.clone(),
                        recorded: seg.work_done.clone(),
                        expected,
                    });
                }
            }
            Err(_) => violations.push(Violation::EmptySegment {
                job: seg.job,
                start: seg.start.clone(),
                end: seg.end.clone(),
            }),
        }
        match done.get_mut(&seg.job) {
            Some(w) => *w += &seg.work_done,
            None => {
                done.insert(seg.job, seg.work_done.clone());
            }
        }
        let end = last_end.entry(seg.job).or_insert_with(|| seg.end.clone());
        if seg.end > *end {
            *end = seg.end.clone();
        }
    }

    for job in &instance.jobs {
        let mut total = done.get(&job.id).cloned().unwrap_or_else(|| ctx.zero());
        let flagged = schedule.incomplete.get(&job.id);
        if let Some(missing) = flagged {
            total += missing;
        }
        if !ctx.approx_eq(&total, &job.work) {
            violations.push(Violation::WorkMismatch {
                job: job.id,
                done: total,
                required: job.work.clone(),
            });
        }
        if require_due_dates {
            if flagged.is_some() {
                violations.push(Violation::LateCompletion {
                    job: job.id,
                    completion: last_end
                        .get(&job.id)
                        .cloned()
                        .unwrap_or_else(|| job.release.clone()),
                    due: job.due.clone(),
                });
            } else if let Some(end) = last_end.get(&job.id) {
                if ctx.compare(end, &job.due) == Comparison::Greater {
                    violations.push(Violation::LateCompletion {
                        job: job.id,
                        completion: end.clone(),
                        due: job.due.clone(),
                    });
                }
            }
        }
    }

    ValidationReport { violations }
}
