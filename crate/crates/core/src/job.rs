//! Jobs with affine speed functions and the closed-form work/time algebra.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{PrecisionContext, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobId(pub u32);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `speed(t) = base + slope * (t - origin)` for `t >= origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedFunction {
    pub base: Real,
    pub slope: Real,
    pub origin: Real,
}

impl SpeedFunction {
    /// Zero at release, ramping with `slope`.
    pub fn is_lazy(&self) -> bool {
        self.base.is_zero() && self.slope.is_positive()
    }

    /// Constant speed.
    pub fn is_nonlazy(&self) -> bool {
        self.slope.is_zero() && self.base.is_positive()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.base.is_zero() && self.slope.is_zero()
    }

    fn at(&self, t: &Real) -> Real {
        &self.base + &self.slope * (t - &self.origin)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub id: JobId,
    pub release: Real,
    pub due: Real,
    pub work: Real,
    pub speed: SpeedFunction,
}

impl Job {
    pub fn new(
        id: JobId,
        release: Real,
        due: Real,
        work: Real,
        base: Real,
        slope: Real,
    ) -> Result<Self> {
        if release >= due {
            return Err(Error::InvalidInstance(format!(
                "job {id}: release {release} must precede due date {due}"
            )));
        }
        if work.is_negative() {
            return Err(Error::InvalidInstance(format!(
                "job {id}: negative work {work}"
            )));
        }
        if base.is_negative() || slope.is_negative() {
            return Err(Error::InvalidInstance(format!(
                "job {id}: speed parameters must be nonnegative (base {base}, slope {slope})"
            )));
        }
        if base.is_zero() && slope.is_zero() && !work.is_zero() {
            return Err(Error::InvalidInstance(format!(
                "job {id}: identically zero speed with positive work"
            )));
        }
        let speed = SpeedFunction {
            base,
            slope,
            origin: release.clone(),
        };
        Ok(Job {
            id,
            release,
            due,
            work,
            speed,
        })
    }

    /// Procrastinator job: `f(t) = slope * (t - release)`.
    pub fn lazy(id: u32, release: Real, due: Real, work: Real, slope: Real) -> Result<Self> {
        let bits = release.bits();
        Self::new(JobId(id), release, due, work, Real::zero(bits), slope)
    }

    /// Unit-slope procrastinator job.
    pub fn unit(id: u32, release: Real, due: Real, work: Real) -> Result<Self> {
        let bits = release.bits();
        Self::lazy(id, release, due, work, Real::one(bits))
    }

    /// Constant-speed job.
    pub fn nonlazy(id: u32, release: Real, due: Real, work: Real, base: Real) -> Result<Self> {
        let bits = release.bits();
        Self::new(JobId(id), release, due, work, base, Real::zero(bits))
    }

    pub fn interval(&self) -> Real {
        &self.due - &self.release
    }

    pub fn is_lazy(&self) -> bool {
        self.speed.is_lazy()
    }

    fn check_time(&self, t: &Real) -> Result<()> {
        if t < &self.release {
            return Err(Error::Domain(format!(
                "time {t} precedes release {} of job {}",
                self.release, self.id
            )));
        }
        Ok(())
    }

    pub fn speed_at(&self, t: &Real) -> Result<Real> {
        self.check_time(t)?;
        Ok(self.speed.at(t))
    }

    /// Work completed by running this job throughout `[a, b]`.
    pub fn work_in(&self, a: &Real, b: &Real) -> Result<Real> {
        self.check_time(a)?;
        if b < a {
            return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
        }
        Ok(self.work_in_unchecked(a, b))
    }

    /// Trapezoid area: `(b - a) * speed((a + b) / 2)`.
    pub(crate) fn work_in_unchecked(&self, a: &Real, b: &Real) -> Real {
        let width = b - a;
        let mid = (a + b).shr(1);
        width * self.speed.at(&mid)
    }

    /// Earliest `b >= start` such that running from `start` to `b` completes
    /// `remaining` work.
    pub fn completion_from(&self, start: &Real, remaining: &Real) -> Result<Real> {
        self.check_time(start)?;
        if remaining.is_negative() {
            return Err(Error::Domain(format!(
                "negative remaining work {remaining}"
            )));
        }
        if remaining.is_zero() {
            return Ok(start.clone());
        }
        if self.speed.base.is_zero() && self.speed.slope.is_positive() {
            // (b - r)^2 = (start - r)^2 + 2W/m
            let offset = start - &self.release;
            let reach = (offset.square() + (remaining * 2) / &self.speed.slope).sqrt_clamped();
            return Ok(&self.release + reach);
        }
        let v0 = self.speed.at(start);
        if self.speed.slope.is_zero() {
            if v0.is_zero() {
                return Err(Error::NeverCompletes(self.id));
            }
            return Ok(start + remaining / &v0);
        }
        // slope/2 d^2 + v0 d - W = 0, take the positive root in cancellation-free form
        let disc = v0.square() + (&self.speed.slope * remaining) * 2;
        let delta = (remaining * 2) / (&v0 + disc.sqrt_clamped());
        Ok(start + delta)
    }

    /// Latest `a <= end` such that running from `a` to `end` completes
    /// `remaining` work. Returns `None` when even `[release, end]` is too
    /// short.
    pub fn start_for(&self, end: &Real, remaining: &Real) -> Result<Option<Real>> {
        self.check_time(end)?;
        if remaining.is_negative() {
            return Err(Error::Domain(format!(
                "negative remaining work {remaining}"
            )));
        }
        if remaining.is_zero() {
            return Ok(Some(end.clone()));
        }
        let available = self.work_in_unchecked(&self.release, end);
        if remaining > &available {
            return Ok(None);
        }
        if self.speed.base.is_zero() {
            // (a - r)^2 = (end - r)^2 - 2W/m
            let offset = end - &self.release;
            let reach = (offset.square() - (remaining * 2) / &self.speed.slope).sqrt_clamped();
            return Ok(Some(
                (&self.release + reach).max_of(&self.release).min_of(end),
            ));
        }
        let v1 = self.speed.at(end);
        if self.speed.slope.is_zero() {
            return Ok(Some(end - remaining / &v1));
        }
        // slope/2 d^2 - v1 d + W = 0, smaller root
        let disc = v1.square() - (&self.speed.slope * remaining) * 2;
        let delta = (remaining * 2) / (&v1 + disc.sqrt_clamped());
        let start = end - delta;
        Ok(Some(start.max_of(&self.release)))
    }

    /// `(completion - release) / (due - release)`.
    pub fn stretch(&self, completion: &Real) -> Result<Real> {
        self.check_time(completion)?;
        Ok((completion - &self.release) / self.interval())
    }

    /// Stretch-so-far at time `t`, defined for any `t`.
    pub fn stretch_so_far(&self, t: &Real) -> Real {
        (t - &self.release) / self.interval()
    }

    /// Work strictly below what running throughout `[release, due]` yields.
    pub fn has_slack(&self) -> bool {
        self.work < self.work_in_unchecked(&self.release, &self.due)
    }
}

/// Running time of a unit-slope job of `work` pushed against the right end
/// of an interval of `length`: the smaller root `length - sqrt(length^2 - 2 work)`.
pub fn rightmost_running_time(length: &Real, work: &Real) -> Result<Real> {
    let disc = length.square() - work * 2;
    if disc.is_negative() {
        return Err(Error::InfeasibleInInterval {
            length: length.to_string(),
            work: work.to_string(),
        });
    }
    if work.is_zero() {
        return Ok(Real::zero(length.bits()));
    }
    let root = disc.sqrt()?;
    Ok(work * 2 / (length + root))
}

/// An indexed job set, sorted by release time with ties broken by id.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub jobs: Vec<Job>,
    pub name: String,
    pub provenance: String,
}

impl Instance {
    pub fn new(
        mut jobs: Vec<Job>,
        name: impl Into<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        jobs.sort_by(|a, b| a.release.cmp(&b.release).then(a.id.cmp(&b.id)));
        let mut ids: Vec<JobId> = jobs.iter().map(|j| j.id).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance(format!("duplicate job id {}", w[0])));
        }
        for job in &jobs {
            if job.speed.origin != job.release {
                return Err(Error::InvalidInstance(format!(
                    "job {}: speed origin differs from release",
                    job.id
                )));
            }
        }
        Ok(Instance {
            jobs,
            name: name.into(),
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn index_of(&self, id: JobId) -> Option<usize> {
        self.jobs.iter().position(|j| j.id == id)
    }

    pub fn all_lazy(&self) -> bool {
        self.jobs.iter().all(|j| j.is_lazy() || j.work.is_zero())
    }

    /// Earliest release and latest due date.
    pub fn horizon(&self) -> Option<(Real, Real)> {
        let first = self.jobs.first()?;
        let mut lo = first.release.clone();
        let mut hi = first.due.clone();
        for job in &self.jobs[1..] {
            lo = lo.min_of(&job.release);
            hi = hi.max_of(&job.due);
        }
        Some((lo, hi))
    }

    /// Rescales every job to unit slope, dividing work (and base speed) by
    /// the slope. Interval boundaries of any schedule are unchanged.
    pub fn normalize_slopes(&self) -> Result<Instance> {
        let mut jobs = Vec::with_capacity(self.jobs.len());
        for job in &self.jobs {
            if !job.speed.slope.is_positive() {
                return Err(Error::Unsupported(format!(
                    "job {} has zero slope; slope normalization needs lazy jobs",
                    job.id
                )));
            }
            let m = &job.speed.slope;
            let bits = m.bits();
            let mut scaled = job.clone();
            scaled.work = &job.work / m;
            scaled.speed.base = &job.speed.base / m;
            scaled.speed.slope = Real::one(bits);
            jobs.push(scaled);
        }
        Ok(Instance {
            jobs,
            name: self.name.clone(),
            provenance: self.provenance.clone(),
        })
    }

    /// Same jobs with every quantity re-rounded to the context's precision.
    pub fn at_precision(&self, ctx: &PrecisionContext) -> Instance {
        let bits = ctx.bits();
        let jobs = self
            .jobs
            .iter()
            .map(|j| Job {
                id: j.id,
                release: j.release.with_bits(bits),
                due: j.due.with_bits(bits),
                work: j.work.with_bits(bits),
                speed: SpeedFunction {
                    base: j.speed.base.with_bits(bits),
                    slope: j.speed.slope.with_bits(bits),
                    origin: j.speed.origin.with_bits(bits),
                },
            })
            .collect();
        Instance {
            jobs,
            name: self.name.clone(),
            provenance: self.provenance.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::PrecisionContext;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn unit(r: i64, d: i64, w: Real) -> Job {
        let c = ctx();
        Job::unit(1, c.int(r), c.int(d), w).unwrap()
    }

    #[test]
    fn speed_at_examples() {
        let c = ctx();
        let j = unit(0, 10, c.int(1));
        assert_eq!(j.speed_at(&c.int(2)).unwrap(), c.int(2));
        assert_eq!(j.speed_at(&c.int(0)).unwrap(), c.int(0));
        let flat = Job::nonlazy(2, c.int(3), c.int(20), c.int(1), c.int(1)).unwrap();
        assert_eq!(flat.speed_at(&c.int(10)).unwrap(), c.int(1));
        assert!(j.speed_at(&c.int(-1)).is_err());
    }

    #[test]
    fn speed_keeps_growing_past_due() {
        let c = ctx();
        let j = unit(0, 1, c.ratio(1, 2));
        assert_eq!(j.speed_at(&c.int(5)).unwrap(), c.int(5));
    }

    #[test]
    fn work_in_examples() {
        let c = ctx();
        let j = unit(0, 10, c.int(1));
        assert_eq!(j.work_in(&c.int(0), &c.int(2)).unwrap(), c.int(2));
        assert_eq!(j.work_in(&c.int(1), &c.int(2)).unwrap(), c.ratio(3, 2));
        // 2(t - 1) over [1, 3]
        let steep = Job::lazy(1, c.int(1), c.int(5), c.int(1), c.int(2)).unwrap();
        assert_eq!(steep.work_in(&c.int(1), &c.int(3)).unwrap(), c.int(4));
        assert!(j.work_in(&c.int(2), &c.int(1)).is_err());
        assert!(steep.work_in(&c.int(0), &c.int(1)).is_err());
    }

    #[test]
    fn completion_from_examples() {
        let c = ctx();
        let j = unit(0, 10, c.int(1));
        let half = c.ratio(1, 2);
        assert_eq!(j.completion_from(&c.int(0), &half).unwrap(), c.int(1));
        let root2 = c.int(2).sqrt().unwrap();
        assert!(c.approx_eq(&j.completion_from(&c.int(1), &half).unwrap(), &root2));
        // start sqrt(n - 1) with n = 3, one unit of work -> sqrt(n + 1) = 2
        let got = j.completion_from(&root2, &c.int(1)).unwrap();
        assert!(c.approx_eq(&got, &c.int(2)));
    }

    #[test]
    fn completion_from_zero_speed_never_completes() {
        let c = ctx();
        let idle = Job::new(JobId(4), c.int(0), c.int(1), c.int(0), c.int(0), c.int(0)).unwrap();
        assert_eq!(
            idle.completion_from(&c.int(0), &c.int(0)).unwrap(),
            c.int(0)
        );
        assert!(matches!(
            idle.completion_from(&c.int(0), &c.int(1)),
            Err(Error::NeverCompletes(JobId(4)))
        ));
    }

    #[test]
    fn zero_speed_positive_work_rejected() {
        let c = ctx();
        assert!(Job::new(JobId(1), c.int(0), c.int(1), c.int(1), c.int(0), c.int(0)).is_err());
        assert!(Job::unit(1, c.int(2), c.int(2), c.int(0)).is_err());
        assert!(Job::unit(1, c.int(0), c.int(2), c.int(-1)).is_err());
    }

    #[test]
    fn rightmost_running_time_examples() {
        let c = ctx();
        assert_eq!(
            rightmost_running_time(&c.int(3), &c.int(4)).unwrap(),
            c.int(2)
        );
        assert_eq!(
            rightmost_running_time(&c.int(2), &c.int(2)).unwrap(),
            c.int(2)
        );
        let expect = c.int(2) - c.int(2).sqrt().unwrap();
        let got = rightmost_running_time(&c.int(2), &c.int(1)).unwrap();
        assert!(c.approx_eq(&got, &expect));
        assert!(matches!(
            rightmost_running_time(&c.int(2), &c.int(3)),
            Err(Error::InfeasibleInInterval { .. })
        ));
    }

    #[test]
    fn start_for_pushes_right() {
        let c = ctx();
        let j = unit(0, 2, c.int(1));
        let start = j.start_for(&c.int(2), &c.int(1)).unwrap().unwrap();
        assert!(c.approx_eq(&start, &c.int(2).sqrt().unwrap()));
        assert_eq!(j.start_for(&c.int(2), &c.int(2)).unwrap(), Some(c.int(0)));
        assert_eq!(j.start_for(&c.int(2), &c.int(3)).unwrap(), None);
    }

    #[test]
    fn normalize_examples() {
        let c = ctx();
        let a = Job::lazy(1, c.int(0), c.int(4), c.int(4), c.int(2)).unwrap();
        let b = Job::lazy(2, c.int(1), c.int(4), c.int(1), c.ratio(1, 2)).unwrap();
        let inst = Instance::new(vec![a, b], "n", "").unwrap();
        let norm = inst.normalize_slopes().unwrap();
        assert_eq!(norm.jobs[0].work, c.int(2));
        assert_eq!(norm.jobs[1].work, c.int(2));
        assert!(norm.jobs.iter().all(|j| j.speed.slope == c.int(1)));
        assert_eq!(norm.normalize_slopes().unwrap(), norm);

        let flat = Job::nonlazy(3, c.int(0), c.int(1), c.int(1), c.int(1)).unwrap();
        let mixed = Instance::new(vec![flat], "m", "").unwrap();
        assert!(matches!(
            mixed.normalize_slopes(),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn stretch_examples() {
        let c = ctx();
        let j = unit(0, 1, c.ratio(1, 2));
        assert_eq!(j.stretch(&c.int(1)).unwrap(), c.int(1));
        assert_eq!(j.stretch(&c.int(4)).unwrap(), c.int(4));
    }

    #[test]
    fn instance_sorts_and_rejects_duplicates() {
        let c = ctx();
        let a = Job::unit(2, c.int(1), c.int(3), c.int(1)).unwrap();
        let b = Job::unit(1, c.int(1), c.int(3), c.int(1)).unwrap();
        let z = Job::unit(3, c.int(0), c.int(3), c.int(1)).unwrap();
        let inst = Instance::new(vec![a.clone(), b, z], "x", "").unwrap();
        let ids: Vec<u32> = inst.jobs.iter().map(|j| j.id.0).collect();
        assert_eq!(ids, vec![3, 1, 2]);
        assert!(Instance::new(vec![a.clone(), a], "dup", "").is_err());
    }
}
