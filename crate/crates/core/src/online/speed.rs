use crate::error::{Error, Result};
use crate::job::Job;
use crate::numeric::Real;

/// How fast a job runs once it is past its due date.
///
/// `Capped(k)` clamps job `j`'s speed at `k * f_j(d_j)`; the work integral
/// then becomes a ramp followed by a plateau.
#[derive(Clone, Debug, PartialEq)]
pub enum SpeedModel {
    Uncapped,
    Capped(Real),
}

impl SpeedModel {
    pub fn from_cap(cap: Option<&Real>) -> Self {
        match cap {
            Some(factor) => SpeedModel::Capped(factor.clone()),
            None => SpeedModel::Uncapped,
        }
    }

    /// Speed ceiling for `job`, if any.
    pub fn ceiling(&self, job: &Job) -> Option<Real> {
        match self {
            SpeedModel::Uncapped => None,
            SpeedModel::Capped(factor) => {
                Some(factor * job.speed_at(&job.due).expect("due after release"))
            }
        }
    }

    /// Time at which the ramp reaches the ceiling.
    fn plateau_start(job: &Job, ceiling: &Real) -> Real {
        let s = &job.speed;
        if !s.slope.is_positive() || ceiling <= &s.base {
            return job.release.clone();
        }
        &job.release + (ceiling - &s.base) / &s.slope
    }

    pub fn speed_at(&self, job: &Job, t: &Real) -> Result<Real> {
        let raw = job.speed_at(t)?;
        Ok(match self.ceiling(job) {
            Some(c) => raw.min_of(&c),
            None => raw,
        })
    }

    /// Work done running `job` over `[a, b]`.
    pub fn work_between(&self, job: &Job, a: &Real, b: &Real) -> Result<Real> {
        let Some(ceiling) = self.ceiling(job) else {
            return job.work_in(a, b);
        };
        if b < a {
            return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
        }
        if a < &job.release {
            return Err(Error::Domain(format!(
                "time {a} precedes release of job {}",
                job.id
            )));
        }
        if job.speed.slope.is_zero() {
            return Ok((b - a) * job.speed.base.min_of(&ceiling));
        }
        let p = Self::plateau_start(job, &ceiling);
        let mut total = Real::zero(a.bits());
        if a < &p {
            let ramp_end = b.min_of(&p);
            total += &job.work_in_unchecked(a, &ramp_end);
        }
        if b > &p {
            let flat_start = a.max_of(&p);
            total += &((b - &flat_start) * &ceiling);
        }
        Ok(total)
    }

    /// Earliest time at which running `job` from `start` finishes `remaining`.
    pub fn finish_time(&self, job: &Job, start: &Real, remaining: &Real) -> Result<Real> {
        let Some(ceiling) = self.ceiling(job) else {
            return job.completion_from(start, remaining);
        };
        if remaining.is_zero() {
            return Ok(start.clone());
        }
        if !ceiling.is_positive() {
            return Err(Error::NeverCompletes(job.id));
        }
        if job.speed.slope.is_zero() {
            let v = job.speed.base.min_of(&ceiling);
            if v.is_zero() {
                return Err(Error::NeverCompletes(job.id));
            }
            return Ok(start + remaining / v);
        }
        let p = Self::plateau_start(job, &ceiling);
        if start < &p {
            let ramp_work = job.work_in_unchecked(start, &p);
            if remaining <= &ramp_work {
                return job.completion_from(start, remaining);
            }
            return Ok(&p + (remaining - ramp_work) / &ceiling);
        }
        Ok(start + remaining / &ceiling)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::PrecisionContext;

    #[test]
    fn capped_integral_is_ramp_then_plateau() {
        let c = PrecisionContext::default();
        let job = Job::unit(1, c.int(0), c.int(1), c.ratio(1, 2)).unwrap();
        let model = SpeedModel::Capped(c.int(2));
        assert_eq!(model.ceiling(&job).unwrap(), c.int(2));
        assert_eq!(model.speed_at(&job, &c.int(5)).unwrap(), c.int(2));
        // ramp [0, 2] gives 2, plateau [2, 3] gives 2
        assert_eq!(
            model.work_between(&job, &c.int(0), &c.int(3)).unwrap(),
            c.int(4)
        );
        assert_eq!(
            model.finish_time(&job, &c.int(0), &c.int(4)).unwrap(),
            c.int(3)
        );
        assert_eq!(
            model.finish_time(&job, &c.int(0), &c.int(2)).unwrap(),
            c.int(2)
        );
        assert_eq!(
            model.finish_time(&job, &c.int(3), &c.int(2)).unwrap(),
            c.int(4)
        );
    }

    #[test]
    fn uncapped_matches_job_algebra() {
        let c = PrecisionContext::default();
        let job = Job::unit(1, c.int(0), c.int(1), c.ratio(1, 2)).unwrap();
        let m = SpeedModel::Uncapped;
        assert_eq!(
            m.work_between(&job, &c.int(1), &c.int(2)).unwrap(),
            c.ratio(3, 2)
        );
        assert_eq!(
            m.finish_time(&job, &c.int(0), &c.ratio(1, 2)).unwrap(),
            c.int(1)
        );
    }

    #[test]
    fn zero_cap_never_completes() {
        let c = PrecisionContext::default();
        let job = Job::unit(7, c.int(0), c.int(1), c.ratio(1, 2)).unwrap();
        let m = SpeedModel::Capped(c.zero());
        assert!(matches!(
            m.finish_time(&job, &c.int(0), &c.int(1)),
            Err(Error::NeverCompletes(_))
        ));
    }
}
