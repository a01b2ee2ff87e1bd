use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::job::{Instance, JobId};
use crate::numeric::Real;
use crate::online::policy::PolicySpec;
use crate::schedule::{Direction, Schedule, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Release,
    Start,
    Preempt,
    Complete,
    IdleBegin,
    IdleEnd,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Release => "release",
            EventKind::Start => "start",
            EventKind::Preempt => "preempt",
            EventKind::Complete => "complete",
            EventKind::IdleBegin => "idle-begin",
            EventKind::IdleEnd => "idle-end",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "release" => EventKind::Release,
            "start" => EventKind::Start,
            "preempt" => EventKind::Preempt,
            "complete" => EventKind::Complete,
            "idle-begin" => EventKind::IdleBegin,
            "idle-end" => EventKind::IdleEnd,
            other => return Err(Error::Parameter(format!("unknown event kind {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub time: Real,
    pub kind: EventKind,
    /// Absent for idle transitions.
    pub job: Option<JobId>,
}

/// Result of a simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub instance_name: String,
    pub policy: PolicySpec,
    pub events: Vec<Event>,
    /// Execution periods in time order.
    pub segments: Vec<Segment>,
    pub completions: BTreeMap<JobId, Real>,
    pub stretches: BTreeMap<JobId, Real>,
    pub busy_time: Real,
}

impl SimTrace {
    pub fn to_schedule(&self) -> Schedule {
        Schedule::from_segments(self.segments.clone(), Direction::Forward)
    }

    /// Jobs that missed their due date, in id order.
    pub fn late_jobs(&self, instance: &Instance) -> Vec<JobId> {
        instance
            .jobs
            .iter()
            .filter(|j| self.completions.get(&j.id).is_none_or(|c| c > &j.due))
            .map(|j| j.id)
            .collect()
    }
}

/// Largest per-job stretch. Fails if some released job never completed.
pub fn max_stretch(trace: &SimTrace) -> Result<Real> {
    for e in &trace.events {
        if e.kind == EventKind::Release {
            let id = e.job.expect("release names a job");
            if !trace.stretches.contains_key(&id) {
                return Err(Error::IncompleteTrace(id));
            }
        }
    }
    trace
        .stretches
        .values()
        .max()
        .cloned()
        .ok_or_else(|| Error::Parameter("trace has no jobs".into()))
}

/// Running time inside `[r, d]`; with `contained_only`, only jobs whose
/// whole interval lies within the window count.
pub fn busy_time_in_window(
    trace: &SimTrace,
    instance: &Instance,
    r: &Real,
    d: &Real,
    contained_only: bool,
) -> Result<Real> {
    if r >= d {
        return Err(Error::Domain(format!("window [{r}, {d}] is empty")));
    }
    let mut total = Real::zero(r.bits());
    for seg in &trace.segments {
        if contained_only {
            let job = instance
                .job(seg.job)
                .ok_or_else(|| Error::Parameter(format!("trace names unknown job {}", seg.job)))?;
            if &job.release < r || &job.due > d {
                continue;
            }
        }
        let lo = seg.start.max_of(r);
        let hi = seg.end.min_of(d);
        if hi > lo {
            total += &(hi - lo);
        }
    }
    Ok(total)
}
