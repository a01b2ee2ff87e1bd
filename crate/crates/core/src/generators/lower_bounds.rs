use crate::error::{Error, Result};
use crate::job::{Instance, Job};
use crate::numeric::{PrecisionContext, Real};
use crate::offline::{lrtb, FeasibilityStatus};
use crate::online::{max_stretch, simulate, PolicyKind, PolicySpec};

const HALVING_BUDGET: usize = 200;

/// All jobs released at 0: job 1 with work 1 due at 2, and `n - 1` jobs of
/// work 1/2 due at `sqrt(n) + 2`. SRPT runs the small jobs first.
pub fn gen_srpt(n: usize, ctx: &PrecisionContext) -> Result<Instance> {
    if n < 2 {
        return Err(Error::Parameter(format!("gen_srpt needs n >= 2, got {n}")));
    }
    let c = ctx;
    let late_due = c.int(n as i64).sqrt()? + c.int(2);
    let mut jobs = vec![Job::unit(1, c.zero(), c.int(2), c.one())?];
    for id in 2..=n as u32 {
        jobs.push(Job::unit(id, c.zero(), late_due.clone(), c.ratio(1, 2))?);
    }
    Instance::new(jobs, format!("srpt-{n}"), format!("gen_srpt n={n}"))
}

/// Two nested jobs: job 1 on `[0, 4]` with work 4 and a short job 2 from
/// time 1 that FIFO makes wait for job 1. Job 2's interval is halved until
/// FIFO's max stretch reaches `target`.
pub fn gen_fifo(target: &Real, ctx: &PrecisionContext) -> Result<Instance> {
    check_target(target)?;
    let c = ctx;
    let job1 = Job::unit(1, c.zero(), c.int(4), c.int(4))?;
    search(target, PolicyKind::Fifo, ctx, |inner| {
        // w = I^2 / 4: half of what a full run would give
        let job2 = Job::unit(2, c.one(), c.one() + inner, inner.square().shr(2))?;
        Instance::new(
            vec![job1.clone(), job2],
            "fifo",
            format!("gen_fifo target={target} inner_interval={inner}"),
        )
    })
}

/// Three jobs: job 1 on `[0, 4]` with work 6, job 2 on `[1, 3]` with work
/// 1, and job 3 on `[4, 4 + eps]`. EDD runs job 2 on arrival, so job 1 is
/// still running at 4 and has the earlier due date; job 3 waits. `eps` is
/// halved until EDD's max stretch reaches `target`.
pub fn gen_edd(target: &Real, ctx: &PrecisionContext) -> Result<Instance> {
    check_target(target)?;
    let c = ctx;
    let job1 = Job::unit(1, c.zero(), c.int(4), c.int(6))?;
    let job2 = Job::unit(2, c.one(), c.int(3), c.one())?;
    search(target, PolicyKind::Edd, ctx, |eps| {
        let job3 = Job::unit(3, c.int(4), c.int(4) + eps, eps.square().shr(2))?;
        Instance::new(
            vec![job1.clone(), job2.clone(), job3],
            "edd",
            format!("gen_edd target={target} eps={eps}"),
        )
    })
}

fn check_target(target: &Real) -> Result<()> {
    if target <= &Real::one(target.bits()) {
        return Err(Error::Parameter(format!(
            "target stretch must exceed 1, got {target}"
        )));
    }
    Ok(())
}

/// Halves the knob from 1 until the instance is certified feasible and the
/// policy's stretch reaches `target`.
fn search(
    target: &Real,
    kind: PolicyKind,
    ctx: &PrecisionContext,
    build: impl Fn(&Real) -> Result<Instance>,
) -> Result<Instance> {
    let policy = PolicySpec::new(kind, ctx);
    let mut knob = ctx.one();
    let mut best = ctx.zero();
    for _ in 0..HALVING_BUDGET {
        let instance = build(&knob)?;
        let (_, verdict) = lrtb(&instance, ctx)?;
        if verdict.status == FeasibilityStatus::Feasible {
            let stretch = max_stretch(&simulate(&instance, &policy, ctx)?)?;
            if &stretch >= target {
                return Ok(instance);
            }
            best = best.max_of(&stretch);
        }
        knob = knob.shr(1);
    }
    Err(Error::SearchBudget {
        target: target.to_string(),
        best: best.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::job::JobId;

    #[test]
    fn srpt_parameters() {
        let c = PrecisionContext::default();
        let inst = gen_srpt(4, &c).unwrap();
        assert_eq!(inst.len(), 4);
        assert_eq!(inst.job(JobId(1)).unwrap().work, c.one());
        assert_eq!(inst.job(JobId(3)).unwrap().due, c.int(4));
        assert!(gen_srpt(1, &c).is_err());
    }

    #[test]
    fn small_targets_met_immediately() {
        let c = PrecisionContext::default();
        let inst = gen_fifo(&c.ratio(11, 10), &c).unwrap();
        assert_eq!(inst.job(JobId(2)).unwrap().due, c.int(2));
        assert!(gen_fifo(&c.one(), &c).is_err());
    }
}
