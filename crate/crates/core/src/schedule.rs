use std::collections::BTreeMap;

use crate::job::JobId;
use crate::numeric::Real;

/// One uninterrupted execution of a job.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub job: JobId,
    pub start: Real,
    pub end: Real,
    pub work_done: Real,
}

impl Segment {
    pub fn duration(&self) -> Real {
        &self.end - &self.start
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    BackwardConstructed,
}

/// Single-processor schedule: time-ordered, non-overlapping segments.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub segments: Vec<Segment>,
    pub direction: Direction,
    /// Jobs whose work is not fully placed, with the missing amount.
    pub incomplete: BTreeMap<JobId, Real>,
}

impl Schedule {
    pub fn new(direction: Direction) -> Self {
        Schedule {
            segments: Vec::new(),
            direction,
            incomplete: BTreeMap::new(),
        }
    }

    pub fn from_segments(mut segments: Vec<Segment>, direction: Direction) -> Self {
        segments.sort_by(|a, b| a.start.cmp(&b.start).then(a.job.cmp(&b.job)));
        Schedule {
            segments,
            direction,
            incomplete: BTreeMap::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Total processor busy time. Zero for an empty schedule.
    pub fn total_busy_time(&self, bits: usize) -> Real {
        let mut total = Real::zero(bits);
        for seg in &self.segments {
            total += &seg.duration();
        }
        total
    }

    pub fn work_by_job(&self) -> BTreeMap<JobId, Real> {
        let mut out: BTreeMap<JobId, Real> = BTreeMap::new();
        for seg in &self.segments {
            match out.get_mut(&seg.job) {
                Some(w) => *w += &seg.work_done,
                None => {
                    out.insert(seg.job, seg.work_done.clone());
                }
            }
        }
        out
    }

    /// End of the last segment of each job.
    pub fn completion_by_job(&self) -> BTreeMap<JobId, Real> {
        let mut out: BTreeMap<JobId, Real> = BTreeMap::new();
        for seg in &self.segments {
            let entry = out.entry(seg.job).or_insert_with(|| seg.end.clone());
            if seg.end > *entry {
                *entry = seg.end.clone();
            }
        }
        out
    }

    /// Merges adjacent segments of the same job that touch exactly.
    pub fn coalesce(&mut self) {
        let mut merged: Vec<Segment> = Vec::with_capacity(self.segments.len());
        for seg in self.segments.drain(..) {
            if let Some(last) = merged.last_mut() {
                if last.job == seg.job && last.end == seg.start {
                    last.end = seg.end;
                    last.work_done += &seg.work_done;
                    continue;
                }
            }
            merged.push(seg);
        }
        self.segments = merged;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::PrecisionContext;

    #[test]
    fn busy_time_and_coalesce() {
        let c = PrecisionContext::default();
        let seg = |j: u32, a: i64, b: i64| Segment {
            job: JobId(j),
            start: c.int(a),
            end: c.int(b),
            work_done: c.int(b - a),
        };
        assert_eq!(
            Schedule::new(Direction::Forward).total_busy_time(128),
            c.zero()
        );
        let mut s = Schedule::from_segments(
            vec![seg(1, 2, 3), seg(1, 0, 2), seg(2, 4, 5)],
            Direction::Forward,
        );
        assert_eq!(s.total_busy_time(128), c.int(4));
        s.coalesce();
        assert_eq!(s.segments.len(), 2);
        assert_eq!(s.work_by_job()[&JobId(1)], c.int(3));
        assert_eq!(s.completion_by_job()[&JobId(2)], c.int(5));
    }
}
