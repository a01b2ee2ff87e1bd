use crate::error::{Error, Result};
use crate::job::{Instance, Job};
use crate::numeric::{PrecisionContext, Real};
use crate::offline::{lrtb, FeasibilityStatus};
use crate::online::lssf_crossing;

/// Instance on which largest-stretch-so-far reaches stretch `sqrt(n - 1)`.
///
/// Jobs `2..n` have no slack and are chained: each is released at the
/// previous due date and sized so that its stretch-so-far at the previous
/// completion equals the previous stretch. LSSF therefore starts each one
/// only when its predecessor completes. Job 1 spans `[0, 3]` with enough
/// work to still be running when job 2's stretch overtakes it.
pub fn gen_lssf(n: usize, ctx: &PrecisionContext) -> Result<Instance> {
    if n < 3 {
        return Err(Error::Parameter(format!("gen_lssf needs n >= 3, got {n}")));
    }
    let c = ctx;
    let no_slack = |id: u32, r: Real, d: Real| -> Result<Job> {
        let probe = Job::unit(id, r.clone(), d.clone(), c.zero())?;
        let w = probe.work_in(&r, &d)?;
        Job::unit(id, r, d, w)
    };

    // Placeholder work for job 1 while co-simulating; it only has to keep
    // job 1 unfinished until job 2 takes over.
    let probe1 = Job::unit(1, c.zero(), c.int(3), c.one())?;
    let job2 = no_slack(2, c.one(), c.int(2))?;
    let takeover = lssf_crossing(&probe1, &job2, &c.zero()).expect("job 2 overtakes job 1");
    let c2 = job2.completion_from(&takeover, &job2.work)?;

    let mut jobs = vec![job2.clone()];
    let job3 = no_slack(3, job2.due.clone(), c2.clone())?;
    let mut prev_completion = job3.completion_from(&c2, &job3.work)?;
    let mut prev_stretch = job3.stretch(&prev_completion)?;
    let mut prev = job3;
    let mut provenance = format!("gen_lssf n={n} t_switch={takeover} C2={c2}");
    jobs.push(prev.clone());

    for id in 4..=n as u32 {
        let r = prev.due.clone();
        let interval = (&prev_completion - &r) / &prev_stretch;
        let job = no_slack(id, r.clone(), &r + &interval)?;
        let done = job.completion_from(&prev_completion, &job.work)?;
        prev_stretch = job.stretch(&done)?;
        prev_completion = done;
        prev = job.clone();
        jobs.push(job);
    }
    let last_due = prev.due.clone();

    // Job 1 must run past the takeover under LSSF yet fit beside the chain.
    let floor = probe1.work_in(&c.zero(), &takeover)?;
    let capacity =
        probe1.work_in(&c.zero(), &job2.release)? + probe1.work_in(&last_due, &probe1.due)?;
    if capacity <= floor {
        return Err(Error::Parameter(format!(
            "gen_lssf: chain for n={n} leaves no room for job 1"
        )));
    }
    let w1 = (&floor + &capacity).shr(1);
    provenance.push_str(&format!(" d_n={last_due} C_n={prev_completion} w1={w1}"));
    jobs.push(Job::unit(1, c.zero(), c.int(3), w1)?);

    let instance = Instance::new(jobs, format!("lssf-{n}"), provenance)?;
    let (_, verdict) = lrtb(&instance, ctx)?;
    if verdict.status != FeasibilityStatus::Feasible {
        return Err(Error::Parameter(format!(
            "gen_lssf: constructed instance not certified feasible ({})",
            verdict.status.as_str()
        )));
    }
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::job::JobId;

    #[test]
    fn rejects_small_n() {
        assert!(gen_lssf(2, &PrecisionContext::default()).is_err());
    }

    #[test]
    fn chain_is_back_to_back_without_slack() {
        let c = PrecisionContext::default();
        let inst = gen_lssf(8, &c).unwrap();
        assert_eq!(inst.len(), 8);
        for id in 3..8 {
            let a = inst.job(JobId(id)).unwrap();
            let b = inst.job(JobId(id + 1)).unwrap();
            assert_eq!(a.due, b.release);
        }
        for id in 2..=8 {
            assert!(!inst.job(JobId(id)).unwrap().has_slack());
        }
        assert!(inst.job(JobId(1)).unwrap().has_slack());
    }
}
