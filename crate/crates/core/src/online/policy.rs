use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::job::{Job, JobId};
use crate::numeric::{PrecisionContext, Real};
use crate::online::sim::SimState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    /// First in, first out: earliest release.
    Fifo,
    /// Earliest due date.
    Edd,
    /// Shortest remaining processing time, recomputed at events.
    Srpt,
    /// Largest stretch so far.
    Lssf,
    /// Idle until some job's stretch reaches alpha, then run the latest
    /// arrival among those.
    Thrashing,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Fifo,
        PolicyKind::Edd,
        PolicyKind::Srpt,
        PolicyKind::Lssf,
        PolicyKind::Thrashing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Fifo => "fifo",
            PolicyKind::Edd => "edd",
            PolicyKind::Srpt => "srpt",
            PolicyKind::Lssf => "lssf",
            PolicyKind::Thrashing => "thrashing",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown policy {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    /// Thrashing activation threshold on stretch-so-far.
    pub alpha: Real,
    /// Caps job `j`'s speed at this multiple of `f_j(d_j)`.
    pub speed_cap_factor: Option<Real>,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, ctx: &PrecisionContext) -> Self {
        PolicySpec {
            kind,
            alpha: ctx.int(2),
            speed_cap_factor: None,
        }
    }

    pub fn with_alpha(mut self, alpha: Real) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cap(mut self, factor: Real) -> Result<Self> {
        self.speed_cap_factor = Some(factor);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha < Real::one(self.alpha.bits()) {
            return Err(Error::Parameter(format!(
                "alpha must be at least 1, got {}",
                self.alpha
            )));
        }
        if let Some(f) = &self.speed_cap_factor {
            if !f.is_positive() {
                return Err(Error::Parameter(format!(
                    "speed cap factor must be positive, got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// Time at which `j`'s stretch-so-far line meets `i`'s, if strictly after
/// `after`. Parallel lines never meet.
pub fn lssf_crossing(i: &Job, j: &Job, after: &Real) -> Option<Real> {
    let ii = i.interval();
    let ij = j.interval();
    if ii == ij {
        return None;
    }
    // (t - r_i) / I_i = (t - r_j) / I_j
    let t = (&i.release * &ij - &j.release * &ii) / (&ij - &ii);
    (&t > after).then_some(t)
}

/// `r + alpha * (d - r)`: the first instant the job's stretch-so-far is alpha.
pub fn thrashing_activation(job: &Job, alpha: &Real) -> Real {
    &job.release + alpha * job.interval()
}

/// The job the policy runs on the interval starting at `t`, or `None` to
/// idle. Ties prefer the running job, then the lowest id.
pub fn next_dispatch(policy: &PolicySpec, state: &SimState<'_>, t: &Real) -> Option<JobId> {
    let ctx = state.ctx();
    let candidates: Vec<usize> = state.available().collect();
    if candidates.is_empty() {
        return None;
    }
    let jobs = &state.instance().jobs;
    let running = state.running_index();

    let better = |a: usize, b: usize| -> Ordering {
        // Greater means `a` is preferred over `b`.
        let primary = match policy.kind {
            PolicyKind::Fifo => jobs[b].release.cmp(&jobs[a].release),
            PolicyKind::Edd => jobs[b].due.cmp(&jobs[a].due),
            PolicyKind::Srpt => {
                let ra = state.remaining_time(a, t);
                let rb = state.remaining_time(b, t);
                if ctx.approx_eq(&ra, &rb) {
                    Ordering::Equal
                } else {
                    rb.cmp(&ra)
                }
            }
            PolicyKind::Lssf => {
                let sa = jobs[a].stretch_so_far(t);
                let sb = jobs[b].stretch_so_far(t);
                if ctx.approx_eq(&sa, &sb) {
                    // right limit: the steeper line (shorter interval) leads next
                    jobs[b].interval().cmp(&jobs[a].interval())
                } else {
                    sa.cmp(&sb)
                }
            }
            PolicyKind::Thrashing => jobs[a].release.cmp(&jobs[b].release),
        };
        primary
            .then_with(|| (Some(a) == running).cmp(&(Some(b) == running)))
            .then_with(|| jobs[b].id.cmp(&jobs[a].id))
    };

    let eligible: Vec<usize> = match policy.kind {
        PolicyKind::Thrashing => candidates
            .into_iter()
            .filter(|&i| {
                ctx.compare(t, &thrashing_activation(&jobs[i], &policy.alpha))
                    .is_ge()
            })
            .collect(),
        _ => candidates,
    };
    eligible
        .into_iter()
        .reduce(|best, i| {
            if better(i, best) == Ordering::Greater {
                i
            } else {
                best
            }
        })
        .map(|i| jobs[i].id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_solves_linear_equation() {
        let c = PrecisionContext::default();
        let i = Job::unit(1, c.int(0), c.int(4), c.int(1)).unwrap();
        let j = Job::unit(2, c.int(1), c.int(2), c.ratio(1, 4)).unwrap();
        let t = lssf_crossing(&i, &j, &c.int(1)).unwrap();
        assert_eq!(t, c.ratio(4, 3));
        assert!(c.approx_eq(&i.stretch_so_far(&t), &j.stretch_so_far(&t)));
        assert_eq!(lssf_crossing(&i, &j, &c.int(2)), None);
        let twin = Job::unit(3, c.int(0), c.int(4), c.int(1)).unwrap();
        assert_eq!(lssf_crossing(&i, &twin, &c.zero()), None);
    }

    #[test]
    fn later_shorter_job_always_crosses() {
        let c = PrecisionContext::default();
        let i = Job::unit(1, c.int(0), c.int(10), c.int(1)).unwrap();
        let j = Job::unit(2, c.int(5), c.int(6), c.ratio(1, 4)).unwrap();
        assert!(lssf_crossing(&i, &j, &c.int(5)).is_some());
    }

    #[test]
    fn activation_examples() {
        let c = PrecisionContext::default();
        let j = Job::unit(1, c.int(0), c.int(1), c.int(0)).unwrap();
        assert_eq!(thrashing_activation(&j, &c.int(2)), c.int(2));
        assert_eq!(thrashing_activation(&j, &c.int(1)), c.int(1));
        let k = Job::unit(2, c.int(3), c.int(5), c.int(0)).unwrap();
        assert_eq!(thrashing_activation(&k, &c.int(2)), c.int(7));
    }

    #[test]
    fn policy_names_parse() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.as_str().parse::<PolicyKind>().unwrap(), kind);
        }
        assert!("lifo".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn spec_validation() {
        let c = PrecisionContext::default();
        let p = PolicySpec::new(PolicyKind::Thrashing, &c);
        assert!(p.clone().with_alpha(c.ratio(1, 2)).is_err());
        assert!(p.clone().with_cap(c.zero()).is_err());
        assert!(p.with_cap(c.int(2)).is_ok());
    }
}
