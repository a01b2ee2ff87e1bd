use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::job::{Instance, Job, JobId};
use crate::numeric::{Comparison, PrecisionContext, Real};
use crate::offline::{FeasibilityStatus, FeasibilityVerdict};
use crate::schedule::{Direction, Schedule, Segment};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// Backward time has not yet reached the due date.
    Waiting,
    Active,
    Done,
    /// Backward time passed the release with work left.
    Dropped,
}

/// Latest Release Time Backwards.
///
/// Sweeps from the latest due date toward the past. At every instant the
/// job with the latest release among those whose due date has been reached
/// and whose work remains is run; equal releases go to the lower id. Event
/// points are due dates, work exhaustions and the running job's release.
///
/// Because the schedule this builds minimizes total busy time among all
/// feasible schedules, the instance is feasible exactly when the sweep
/// exhausts every job before passing its release. Infeasible instances still
/// get the maximal backward schedule with per-job deficits.
pub fn lrtb(instance: &Instance, ctx: &PrecisionContext) -> Result<(Schedule, FeasibilityVerdict)> {
    if instance.is_empty() {
        return Err(Error::Parameter("instance has no jobs".into()));
    }
    if let Some(job) = instance
        .jobs
        .iter()
        .find(|j| !j.is_lazy() && !j.work.is_zero())
    {
        return Err(Error::Unsupported(format!(
            "job {} is not a procrastinator (base {}, slope {}); the backward sweep is only optimal for lazy jobs",
            job.id, job.speed.base, job.speed.slope
        )));
    }

    let jobs = &instance.jobs;
    let n = jobs.len();
    let mut phase = vec![Phase::Waiting; n];
    let mut remaining: Vec<Real> = jobs.iter().map(|j| j.work.clone()).collect();
    let mut earliest_start: Vec<Option<Real>> = vec![None; n];
    let mut backward: Vec<Segment> = Vec::new();
    let mut deficit: BTreeMap<JobId, Real> = BTreeMap::new();
    let mut indeterminate = false;
    let mut boundary_gap: Option<Real> = None;

    let (_, mut t) = instance.horizon().expect("nonempty");

    loop {
        for (i, job) in jobs.iter().enumerate() {
            if phase[i] == Phase::Waiting && job.due >= t {
                phase[i] = if remaining[i].is_zero() {
                    Phase::Done
                } else {
                    Phase::Active
                };
            }
        }

        let chosen = (0..n)
            .filter(|&i| phase[i] == Phase::Active)
            .max_by(|&a, &b| priority(&jobs[a], &jobs[b]));
        let next_due = (0..n)
            .filter(|&i| phase[i] == Phase::Waiting)
            .map(|i| &jobs[i].due)
            .max()
            .cloned();

        let Some(i) = chosen else {
            match next_due {
                Some(d) => {
                    t = d;
                    continue;
                }
                None => break,
            }
        };

        let job = &jobs[i];
        let lower = match &next_due {
            Some(d) if d > &job.release => d.clone(),
            _ => job.release.clone(),
        };
        let at_release = lower == job.release;
        let capacity = job.work_in_unchecked(&lower, &t);

        match ctx.compare(&remaining[i], &capacity) {
            Comparison::Less => {
                let start = job
                    .start_for(&t, &remaining[i])?
                    .expect("remaining below capacity")
                    .max_of(&lower);
                push_segment(&mut backward, job, &start, &t, remaining[i].clone());
                remaining[i] = ctx.zero();
                phase[i] = Phase::Done;
                earliest_start[i] = Some(start.clone());
                t = start;
            }
            cmp @ (Comparison::Equal | Comparison::Indeterminate) => {
                if at_release && cmp == Comparison::Indeterminate {
                    indeterminate = true;
                    let gap = (&capacity - &remaining[i]).abs();
                    boundary_gap = Some(match boundary_gap {
                        Some(g) => g.max_of(&gap),
                        None => gap,
                    });
                }
                push_segment(&mut backward, job, &lower, &t, remaining[i].clone());
                remaining[i] = ctx.zero();
                phase[i] = Phase::Done;
                earliest_start[i] = Some(lower.clone());
                t = lower;
            }
            Comparison::Greater => {
                push_segment(&mut backward, job, &lower, &t, capacity.clone());
                remaining[i] -= &capacity;
                earliest_start[i] = Some(lower.clone());
                if at_release {
                    phase[i] = Phase::Dropped;
                    deficit.insert(job.id, remaining[i].clone());
                }
                t = lower;
            }
        }
    }

    backward.reverse();
    let mut schedule = Schedule::from_segments(backward, Direction::BackwardConstructed);
    schedule.coalesce();
    schedule.incomplete = deficit.clone();

    // Signed slack per job: unused capacity below its earliest start, or
    // minus its deficit.
    let mut margin: Option<Real> = None;
    for (i, job) in jobs.iter().enumerate() {
        let slack = match phase[i] {
            Phase::Dropped => -remaining[i].clone(),
            _ => match &earliest_start[i] {
                Some(a) => job.work_in_unchecked(&job.release, a),
                None => job.work_in_unchecked(&job.release, &job.due),
            },
        };
        margin = Some(match margin {
            Some(m) => m.min_of(&slack),
            None => slack,
        });
    }
    let mut margin = margin.expect("nonempty");
    if let Some(gap) = boundary_gap {
        margin = margin.min_of(&-gap);
    }

    let status = if !deficit.is_empty() {
        FeasibilityStatus::Infeasible
    } else if indeterminate {
        FeasibilityStatus::Indeterminate
    } else {
        FeasibilityStatus::Feasible
    };
    let witness = (status == FeasibilityStatus::Feasible).then(|| schedule.clone());
    Ok((
        schedule,
        FeasibilityVerdict {
            status,
            witness,
            deficit,
            margin,
        },
    ))
}

/// Later release wins; equal releases go to the lower id.
fn priority(a: &Job, b: &Job) -> std::cmp::Ordering {
    a.release.cmp(&b.release).then(b.id.cmp(&a.id))
}

fn push_segment(out: &mut Vec<Segment>, job: &Job, start: &Real, end: &Real, work: Real) {
    if start >= end {
        return;
    }
    out.push(Segment {
        job: job.id,
        start: start.clone(),
        end: end.clone(),
        work_done: work,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offline::validate_schedule;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn no_slack_single_job_fills_interval() {
        let c = ctx();
        let inst = Instance::new(
            vec![Job::unit(1, c.int(0), c.int(2), c.int(2)).unwrap()],
            "tight",
            "",
        )
        .unwrap();
        let (s, v) = lrtb(&inst, &c).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Feasible);
        assert_eq!(s.segments.len(), 1);
        assert_eq!(s.segments[0].start, c.int(0));
        assert_eq!(s.segments[0].end, c.int(2));
        assert_eq!(v.margin, c.zero());
    }

    #[test]
    fn slack_job_pushed_right() {
        let c = ctx();
        let inst = Instance::new(
            vec![Job::unit(1, c.int(0), c.int(2), c.int(1)).unwrap()],
            "slack",
            "",
        )
        .unwrap();
        let (s, v) = lrtb(&inst, &c).unwrap();
        assert!(v.is_feasible());
        assert!(c.approx_eq(&s.segments[0].start, &c.int(2).sqrt().unwrap()));
        let busy = s.total_busy_time(c.bits());
        assert!(c.approx_eq(&busy, &(c.int(2) - c.int(2).sqrt().unwrap())));
    }

    #[test]
    fn overfull_job_reports_deficit() {
        let c = ctx();
        let inst = Instance::new(
            vec![Job::unit(1, c.int(0), c.int(2), c.int(3)).unwrap()],
            "over",
            "",
        )
        .unwrap();
        let (s, v) = lrtb(&inst, &c).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Infeasible);
        assert_eq!(v.deficit[&JobId(1)], c.int(1));
        assert_eq!(v.margin, c.int(-1));
        assert!(v.witness.is_none());
        assert!(validate_schedule(&inst, &s, false, &c).passed());
    }

    #[test]
    fn nested_job_takes_right_end_of_its_interval() {
        let c = ctx();
        let outer = Job::unit(1, c.int(0), c.int(6), c.int(8)).unwrap();
        let inner = Job::unit(2, c.int(2), c.int(4), c.int(1)).unwrap();
        let inst = Instance::new(vec![outer, inner], "nested", "").unwrap();
        let (s, v) = lrtb(&inst, &c).unwrap();
        assert!(v.is_feasible());
        let inner_seg = s.segments.iter().find(|g| g.job == JobId(2)).unwrap();
        assert_eq!(inner_seg.end, c.int(4));
        let expected_start = c.int(4) - rightmost_running_time_unit(&c, 2, 1);
        assert!(c.approx_eq(&inner_seg.start, &expected_start));
        assert!(validate_schedule(&inst, &s, true, &c).passed());
    }

    fn rightmost_running_time_unit(c: &PrecisionContext, l: i64, w: i64) -> Real {
        crate::job::rightmost_running_time(&c.int(l), &c.int(w)).unwrap()
    }

    #[test]
    fn nonlazy_rejected() {
        let c = ctx();
        let inst = Instance::new(
            vec![Job::nonlazy(1, c.int(0), c.int(2), c.int(1), c.int(1)).unwrap()],
            "flat",
            "",
        )
        .unwrap();
        assert!(matches!(lrtb(&inst, &c), Err(Error::Unsupported(_))));
    }

    #[test]
    fn near_tie_is_indeterminate_at_low_precision() {
        let c = PrecisionContext::new(64);
        let nudge = c.int(2) + c.int(2).shr(60);
        let inst = Instance::new(
            vec![Job::unit(1, c.int(0), c.int(2), nudge).unwrap()],
            "near",
            "",
        )
        .unwrap();
        let (_, v) = lrtb(&inst, &c).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Indeterminate);
        assert!(v.margin.is_negative());
    }

    #[test]
    fn idle_gap_between_jobs() {
        let c = ctx();
        let a = Job::unit(1, c.int(0), c.int(1), c.ratio(1, 2)).unwrap();
        let b = Job::unit(2, c.int(5), c.int(6), c.ratio(1, 2)).unwrap();
        let inst = Instance::new(vec![a, b], "gap", "").unwrap();
        let (s, v) = lrtb(&inst, &c).unwrap();
        assert!(v.is_feasible());
        assert_eq!(s.total_busy_time(c.bits()), c.int(2));
    }
}
