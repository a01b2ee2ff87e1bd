use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::job::Instance;
use crate::numeric::{Comparison, PrecisionContext, Real};
use crate::offline::{FeasibilityStatus, FeasibilityVerdict};
use crate::schedule::{Direction, Schedule, Segment};

/// Feasibility for instances made of lazy jobs with pairwise disjoint
/// intervals plus one constant-speed job spanning all of them.
///
/// Each lazy job is pushed against its due date, which minimizes the time it
/// occupies; the constant-speed job then fills idle time backward from its
/// own due date. Its work fits exactly when the idle time suffices.
pub fn nonlazy_fill(
    instance: &Instance,
    ctx: &PrecisionContext,
) -> Result<(Schedule, FeasibilityVerdict)> {
    let (flat, lazy): (Vec<_>, Vec<_>) =
        instance.jobs.iter().partition(|j| j.speed.slope.is_zero());
    let [filler] = flat.as_slice() else {
        return Err(Error::Unsupported(format!(
            "expected exactly one constant-speed job, found {}",
            flat.len()
        )));
    };
    if !filler.speed.base.is_positive() && !filler.work.is_zero() {
        return Err(Error::NeverCompletes(filler.id));
    }
    for pair in lazy.windows(2) {
        if pair[0].due > pair[1].release {
            return Err(Error::Unsupported(format!(
                "lazy jobs {} and {} overlap",
                pair[0].id, pair[1].id
            )));
        }
    }
    if let Some(outside) = lazy
        .iter()
        .find(|j| j.release < filler.release || j.due > filler.due)
    {
        return Err(Error::Unsupported(format!(
            "lazy job {} is not inside the constant-speed job's interval",
            outside.id
        )));
    }

    let mut segments = Vec::new();
    let mut deficit = BTreeMap::new();
    let mut margin: Option<Real> = None;
    // Occupied blocks in time order.
    let mut busy: Vec<(Real, Real)> = Vec::new();
    for job in &lazy {
        match job.start_for(&job.due, &job.work)? {
            Some(start) => {
                if start < job.due {
                    segments.push(Segment {
                        job: job.id,
                        start: start.clone(),
                        end: job.due.clone(),
                        work_done: job.work.clone(),
                    });
                    busy.push((start.clone(), job.due.clone()));
                }
                let slack = job.work_in(&job.release, &start)?;
                margin = Some(margin.map_or(slack.clone(), |m: Real| m.min_of(&slack)));
            }
            None => {
                let cap = job.work_in(&job.release, &job.due)?;
                deficit.insert(job.id, &job.work - &cap);
                segments.push(Segment {
                    job: job.id,
                    start: job.release.clone(),
                    end: job.due.clone(),
                    work_done: cap,
                });
                busy.push((job.release.clone(), job.due.clone()));
            }
        }
    }

    // Idle gaps inside the filler's interval, in time order.
    let mut gaps: Vec<(Real, Real)> = Vec::new();
    let mut cursor = filler.release.clone();
    for (a, b) in &busy {
        if a > &cursor {
            gaps.push((cursor.clone(), a.clone()));
        }
        cursor = cursor.max_of(b);
    }
    if filler.due > cursor {
        gaps.push((cursor, filler.due.clone()));
    }

    let speed = &filler.speed.base;
    let mut idle = ctx.zero();
    for (a, b) in &gaps {
        idle += &(b - a);
    }
    let capacity = speed * &idle;
    let verdict_cmp = ctx.compare(&filler.work, &capacity);

    let mut left = filler.work.clone();
    for (a, b) in gaps.iter().rev() {
        if !left.is_positive() {
            break;
        }
        let gap_work = speed * (b - a);
        if gap_work >= left {
            let start = b - &left / speed;
            segments.push(Segment {
                job: filler.id,
                start: start.max_of(a),
                end: b.clone(),
                work_done: left.clone(),
            });
            left = ctx.zero();
        } else {
            segments.push(Segment {
                job: filler.id,
                start: a.clone(),
                end: b.clone(),
                work_done: gap_work.clone(),
            });
            left -= &gap_work;
        }
    }

    let fill_slack = &capacity - &filler.work;
    let margin = margin.map_or(fill_slack.clone(), |m| m.min_of(&fill_slack));
    if verdict_cmp == Comparison::Greater || (!deficit.is_empty() && left.is_positive()) {
        deficit.insert(filler.id, left.clone());
    }
    let status = if !deficit.is_empty() {
        FeasibilityStatus::Infeasible
    } else if verdict_cmp == Comparison::Indeterminate {
        FeasibilityStatus::Indeterminate
    } else {
        FeasibilityStatus::Feasible
    };
    let mut schedule = Schedule::from_segments(segments, Direction::BackwardConstructed);
    schedule.incomplete = deficit.clone();
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
