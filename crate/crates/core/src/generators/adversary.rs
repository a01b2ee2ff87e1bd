use crate::error::{Error, Result};
use crate::job::{Instance, Job, JobId};
use crate::numeric::{PrecisionContext, Real};
use crate::offline::{lrtb, FeasibilityVerdict};
use crate::online::{simulate, PolicySpec, SimTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdversaryStage {
    Initial,
    AfterDecision,
}

/// Which follow-up job the adversary released.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdversaryCase {
    /// The policy did not run job 2 on arrival: a zero-slack job inside job
    /// 2's interval makes the skipped time indispensable.
    InsideJobTwo,
    /// The policy ran job 2 on arrival: a zero-slack job between job 2's due
    /// date and job 1's removes the capacity job 1 can no longer spare.
    AfterJobTwo,
}

/// One round of the adaptive construction. The seed pair has `r_1 < r_2`
/// and `d_2 < d_1`, both with slack.
#[derive(Clone, Debug)]
pub struct AdaptiveAdversary {
    pub stage: AdversaryStage,
    pub pending: [Job; 2],
    pub followup: Option<(AdversaryCase, Job)>,
}

impl AdaptiveAdversary {
    /// Seeds `[0, 8]` with work 16 and `[2, 4]` with work 3/2, shifted by
    /// `offset`, with ids `id_base + 1` and `id_base + 2`.
    pub fn new(offset: &Real, id_base: u32, ctx: &PrecisionContext) -> Result<Self> {
        let c = ctx;
        let job1 = Job::unit(id_base + 1, offset.clone(), offset + c.int(8), c.int(16))?;
        let job2 = Job::unit(
            id_base + 2,
            offset + c.int(2),
            offset + c.int(4),
            c.ratio(3, 2),
        )?;
        Ok(AdaptiveAdversary {
            stage: AdversaryStage::Initial,
            pending: [job1, job2],
            followup: None,
        })
    }

    /// Chooses the follow-up job from a trace that includes both seeds.
    pub fn decide(&mut self, trace: &SimTrace) -> Result<(AdversaryCase, Job)> {
        if self.stage != AdversaryStage::Initial {
            return Err(Error::Parameter("adversary already decided".into()));
        }
        let [job1, job2] = &self.pending;
        let r2 = &job2.release;
        let (running, tau) = observe(trace, r2);
        let quarter = (&job2.due - r2).shr(2);
        let h = match &tau {
            Some(t) => (t - r2).min_of(&quarter),
            None => quarter,
        };
        if !h.is_positive() {
            return Err(Error::Parameter(format!(
                "policy decision at {r2} lasts no time"
            )));
        }
        let follow_id = JobId(job2.id.0 + if running == Some(job2.id) { 2 } else { 1 });

        let decided = if running == Some(job2.id) {
            let t0 = r2 + &h;
            let done1 = work_before(trace, job1, &t0)?;
            let done2 = work_before(trace, job2, &t0)?;
            let opt = job1_slack(job1, job2, &job1.release, &job1.work, &job2.work)?;
            let pol = job1_slack(
                job1,
                job2,
                &t0,
                &(&job1.work - done1),
                &(&job2.work - done2),
            )?;
            let loss = if pol.is_negative() {
                opt.shr(1)
            } else {
                (&opt + &pol).shr(1)
            };
            if !loss.is_positive() {
                return Err(Error::Parameter("seed pair has no slack for job 1".into()));
            }
            let r4 = &job2.due + (&job1.due - &job2.due).shr(2);
            let d4 = job1.completion_from(&r4, &loss)?;
            if d4 >= job1.due {
                return Err(Error::Parameter(
                    "follow-up job does not fit before job 1's due date".into(),
                ));
            }
            (AdversaryCase::AfterJobTwo, no_slack(follow_id, r4, d4)?)
        } else {
            let r3 = r2 + &h;
            let eps = h.shr(1);
            let need = &job2.work - job2.work_in(&(r2 + &eps), &r3)?;
            let d3 = job2
                .start_for(&job2.due, &need)?
                .ok_or_else(|| Error::Parameter("job 2 lacks capacity for the follow-up".into()))?;
            if d3 <= r3 {
                return Err(Error::Parameter("follow-up interval is empty".into()));
            }
            (AdversaryCase::InsideJobTwo, no_slack(follow_id, r3, d3)?)
        };
        self.followup = Some(decided.clone());
        self.stage = AdversaryStage::AfterDecision;
        Ok(decided)
    }
}

/// Unused capacity of job 1 when it runs on `[from, s] ∪ [d_2, d_1]`, where
/// `s` is the latest start letting job 2 finish `work2` by its due date.
fn job1_slack(job1: &Job, job2: &Job, from: &Real, work1: &Real, work2: &Real) -> Result<Real> {
    let from2 = from.max_of(&job2.release);
    let s = job2
        .start_for(&job2.due, work2)?
        .ok_or_else(|| Error::Parameter("job 2 cannot finish".into()))?;
    if s < from2 {
        return Ok(-(work1.clone()));
    }
    Ok(job1.work_in(from, &s)? + job1.work_in(&job2.due, &job1.due)? - work1)
}

/// The job running just after `t` (None when idle) and when that ends.
fn observe(trace: &SimTrace, t: &Real) -> (Option<JobId>, Option<Real>) {
    for seg in &trace.segments {
        if &seg.start <= t && t < &seg.end {
            return (Some(seg.job), Some(seg.end.clone()));
        }
        if &seg.start > t {
            return (None, Some(seg.start.clone()));
        }
    }
    (None, None)
}

/// Work the trace gave `job` strictly before `t`.
fn work_before(trace: &SimTrace, job: &Job, t: &Real) -> Result<Real> {
    let mut total = Real::zero(t.bits());
    for seg in trace
        .segments
        .iter()
        .filter(|s| s.job == job.id && &s.start < t)
    {
        if &seg.end <= t {
            total += &seg.work_done;
        } else {
            total += &job.work_in(&seg.start, t)?;
        }
    }
    Ok(total)
}

fn no_slack(id: JobId, r: Real, d: Real) -> Result<Job> {
    let probe = Job::unit(id.0, r.clone(), d.clone(), Real::zero(r.bits()))?;
    let w = probe.work_in(&r, &d)?;
    Job::unit(id.0, r, d, w)
}

#[derive(Clone, Debug)]
pub struct AdversaryRound {
    pub case: AdversaryCase,
    /// Job the policy ran when job 2 arrived.
    pub observed: Option<JobId>,
    pub followup: JobId,
}

#[derive(Clone, Debug)]
pub struct AdversaryOutcome {
    pub instance: Instance,
    pub trace: SimTrace,
    /// Offline verdict on the final instance.
    pub verdict: FeasibilityVerdict,
    pub rounds: Vec<AdversaryRound>,
    pub late_jobs: Vec<JobId>,
}

impl AdversaryOutcome {
    pub fn missed_due_date(&self) -> bool {
        !self.late_jobs.is_empty()
    }
}

/// Single-round adaptive construction against `policy`.
pub fn adaptive_adversary(policy: &PolicySpec, ctx: &PrecisionContext) -> Result<AdversaryOutcome> {
    adaptive_adversary_rounds(policy, 1, ctx)
}

/// Repeats the construction `rounds` times, each round starting after the
/// previous one's jobs have all completed.
pub fn adaptive_adversary_rounds(
    policy: &PolicySpec,
    rounds: usize,
    ctx: &PrecisionContext,
) -> Result<AdversaryOutcome> {
    if rounds == 0 {
        return Err(Error::Parameter("rounds must be positive".into()));
    }
    let mut jobs: Vec<Job> = Vec::new();
    let mut log = Vec::with_capacity(rounds);
    let mut offset = ctx.zero();
    let mut last: Option<(Instance, SimTrace)> = None;

    for round in 0..rounds {
        let mut adversary = AdaptiveAdversary::new(&offset, 4 * round as u32, ctx)?;
        let mut trial = jobs.clone();
        trial.extend(adversary.pending.iter().cloned());
        let probe = Instance::new(trial.clone(), "adversary", "")?;
        let trace = simulate(&probe, policy, ctx)?;
        let observed = observe(&trace, &adversary.pending[1].release).0;
        let (case, follow) = adversary.decide(&trace)?;
        log.push(AdversaryRound {
            case,
            observed,
            followup: follow.id,
        });
        trial.push(follow);
        jobs = trial;

        let instance = Instance::new(jobs.clone(), "adversary", provenance(policy, &log))?;
        let trace = simulate(&instance, policy, ctx)?;
        let (_, hi) = instance.horizon().expect("nonempty");
        let finished = trace
            .completions
            .values()
            .max()
            .cloned()
            .unwrap_or_else(|| hi.clone());
        offset = (hi.max_of(&finished) + ctx.one()).ceil();
        last = Some((instance, trace));
    }

    let (instance, trace) = last.expect("at least one round");
    let (_, verdict) = lrtb(&instance, ctx)?;
    let late_jobs = trace.late_jobs(&instance);
    Ok(AdversaryOutcome {
        instance,
        trace,
        verdict,
        rounds: log,
        late_jobs,
    })
}

fn provenance(policy: &PolicySpec, log: &[AdversaryRound]) -> String {
    let cases: Vec<&str> = log
        .iter()
        .map(|r| match r.case {
            AdversaryCase::InsideJobTwo => "inside",
            AdversaryCase::AfterJobTwo => "after",
        })
        .collect();
    format!(
        "adaptive_adversary policy={} alpha={} rounds={} cases={}",
        policy.kind,
        policy.alpha,
        log.len(),
        cases.join(",")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offline::FeasibilityStatus;
    use crate::online::PolicyKind;

    #[test]
    fn seeds_are_feasible_with_slack() {
        let c = PrecisionContext::default();
        let adv = AdaptiveAdversary::new(&c.zero(), 0, &c).unwrap();
        assert!(adv.pending.iter().all(|j| j.has_slack()));
        let inst = Instance::new(adv.pending.to_vec(), "seeds", "").unwrap();
        let (_, v) = lrtb(&inst, &c).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Feasible);
        assert!(v.margin.is_positive());
    }

    #[test]
    fn fifo_gets_inside_case() {
        let c = PrecisionContext::default();
        let out = adaptive_adversary(&PolicySpec::new(PolicyKind::Fifo, &c), &c).unwrap();
        assert_eq!(out.rounds[0].case, AdversaryCase::InsideJobTwo);
        assert_eq!(out.rounds[0].observed, Some(JobId(1)));
        assert!(out.missed_due_date());
        assert_eq!(out.verdict.status, FeasibilityStatus::Feasible);
    }

    #[test]
    fn edd_gets_after_case() {
        let c = PrecisionContext::default();
        let out = adaptive_adversary(&PolicySpec::new(PolicyKind::Edd, &c), &c).unwrap();
        assert_eq!(out.rounds[0].case, AdversaryCase::AfterJobTwo);
        assert!(out.missed_due_date());
        assert_eq!(out.verdict.status, FeasibilityStatus::Feasible);
    }

    #[test]
    fn repeated_rounds_miss_repeatedly() {
        let c = PrecisionContext::default();
        let out = adaptive_adversary_rounds(&PolicySpec::new(PolicyKind::Lssf, &c), 3, &c).unwrap();
        assert_eq!(out.instance.len(), 9);
        assert_eq!(out.verdict.status, FeasibilityStatus::Feasible);
        assert!(out.late_jobs.len() >= 3);
    }

    #[test]
    fn decide_only_once() {
        let c = PrecisionContext::default();
        let mut adv = AdaptiveAdversary::new(&c.zero(), 0, &c).unwrap();
        let inst = Instance::new(adv.pending.to_vec(), "seeds", "").unwrap();
        let trace = simulate(&inst, &PolicySpec::new(PolicyKind::Fifo, &c), &c).unwrap();
        adv.decide(&trace).unwrap();
        assert!(adv.decide(&trace).is_err());
    }
}
