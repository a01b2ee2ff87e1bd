use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::job::{Instance, JobId};
use crate::numeric::{PrecisionContext, Real};
use crate::online::policy::{
    lssf_crossing, next_dispatch, thrashing_activation, PolicyKind, PolicySpec,
};
use crate::online::speed::SpeedModel;
use crate::online::trace::{Event, EventKind, SimTrace};
use crate::schedule::{Schedule, Segment};

/// What a policy sees at an event: released jobs, remaining work and the
/// running job. Indices refer to `instance.jobs`.
pub struct SimState<'a> {
    instance: &'a Instance,
    ctx: &'a PrecisionContext,
    model: SpeedModel,
    remaining: Vec<Real>,
    released: Vec<bool>,
    finished: Vec<bool>,
    running: Option<usize>,
}

impl<'a> SimState<'a> {
    fn new(instance: &'a Instance, ctx: &'a PrecisionContext, model: SpeedModel) -> Self {
        let n = instance.len();
        SimState {
            instance,
            ctx,
            model,
            remaining: instance.jobs.iter().map(|j| j.work.clone()).collect(),
            released: vec![false; n],
            finished: vec![false; n],
            running: None,
        }
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    pub fn ctx(&self) -> &PrecisionContext {
        self.ctx
    }

    pub fn model(&self) -> &SpeedModel {
        &self.model
    }

    /// Released, unfinished jobs.
    pub fn available(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.instance.len()).filter(|&i| self.released[i] && !self.finished[i])
    }

    pub fn running_index(&self) -> Option<usize> {
        self.running
    }

    pub fn running(&self) -> Option<JobId> {
        self.running.map(|i| self.instance.jobs[i].id)
    }

    pub fn remaining(&self, index: usize) -> &Real {
        &self.remaining[index]
    }

    /// Time to finish job `index` if run alone from `t`.
    pub fn remaining_time(&self, index: usize, t: &Real) -> Real {
        let job = &self.instance.jobs[index];
        self.model
            .finish_time(job, t, &self.remaining[index])
            .map(|f| f - t)
            .expect("available jobs have positive speed after release")
    }

    fn all_finished(&self) -> bool {
        self.finished.iter().all(|&f| f)
    }
}

/// Event-driven simulation of `policy` on `instance`.
///
/// Decisions change only at releases, completions, LSSF crossings against
/// the running job and thrashing activations; between events the dispatched
/// job runs alone. A completion that ties another event within tolerance is
/// processed first.
pub fn simulate(
    instance: &Instance,
    policy: &PolicySpec,
    ctx: &PrecisionContext,
) -> Result<SimTrace> {
    policy.validate()?;
    if instance.is_empty() {
        return Err(Error::Parameter("instance has no jobs".into()));
    }
    let model = SpeedModel::from_cap(policy.speed_cap_factor.as_ref());
    for job in &instance.jobs {
        if job.work.is_zero() {
            continue;
        }
        let stalled =
            job.speed.is_identically_zero() || model.ceiling(job).is_some_and(|c| !c.is_positive());
        if stalled {
            return Err(Error::Config(format!("job {} can never complete", job.id)));
        }
    }

    let jobs = &instance.jobs;
    let n = jobs.len();
    let mut state = SimState::new(instance, ctx, model);
    let mut events: Vec<Event> = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut completions: BTreeMap<JobId, Real> = BTreeMap::new();
    let mut next_release = 0usize;
    let mut idle_open = false;
    let mut t = jobs[0].release.clone();
    let budget = 64 * n * n + 1024;

    for _ in 0..budget {
        while next_release < n && jobs[next_release].release <= t {
            let job = &jobs[next_release];
            state.released[next_release] = true;
            events.push(event(&t, EventKind::Release, Some(job.id)));
            if job.work.is_zero() {
                state.finished[next_release] = true;
                completions.insert(job.id, t.clone());
                events.push(event(&t, EventKind::Complete, Some(job.id)));
            }
            next_release += 1;
        }
        if state.all_finished() {
            return Ok(finish(instance, policy, events, segments, completions, ctx));
        }

        let choice =
            next_dispatch(policy, &state, &t).map(|id| instance.index_of(id).expect("known id"));
        if choice != state.running {
            if let Some(old) = state.running {
                events.push(event(&t, EventKind::Preempt, Some(jobs[old].id)));
            }
            if let Some(new) = choice {
                if idle_open {
                    events.push(event(&t, EventKind::IdleEnd, None));
                    idle_open = false;
                }
                events.push(event(&t, EventKind::Start, Some(jobs[new].id)));
            }
            state.running = choice;
        }
        if choice.is_none() && !idle_open {
            events.push(event(&t, EventKind::IdleBegin, None));
            idle_open = true;
        }

        let t_next = next_decision_time(&state, policy, &t, next_release);
        match state.running {
            Some(i) => {
                let job = &jobs[i];
                let finish = state.model.finish_time(job, &t, &state.remaining[i])?;
                let completes = match &t_next {
                    Some(e) => ctx.compare(&finish, e).is_le(),
                    None => true,
                };
                if completes {
                    // a tie slightly past the next event snaps back onto it
                    let end = match &t_next {
                        Some(e) if &finish > e => e.clone(),
                        _ => finish,
                    };
                    push_run(&mut segments, job.id, &t, &end, state.remaining[i].clone());
                    state.remaining[i] = ctx.zero();
                    state.finished[i] = true;
                    state.running = None;
                    completions.insert(job.id, end.clone());
                    events.push(event(&end, EventKind::Complete, Some(job.id)));
                    t = end;
                } else {
                    let e = t_next.expect("checked above");
                    let done = state.model.work_between(job, &t, &e)?;
                    let left = &state.remaining[i] - &done;
                    state.remaining[i] = if left.is_positive() { left } else { ctx.zero() };
                    push_run(&mut segments, job.id, &t, &e, done);
                    t = e;
                }
            }
            None => match t_next {
                Some(e) => t = e,
                None => return Err(Error::Horizon(format!("policy idles forever at time {t}"))),
            },
        }
    }
    Err(Error::Horizon(format!(
        "event budget of {budget} exhausted at time {t}"
    )))
}

fn event(t: &Real, kind: EventKind, job: Option<JobId>) -> Event {
    Event {
        time: t.clone(),
        kind,
        job,
    }
}

fn push_run(out: &mut Vec<Segment>, job: JobId, start: &Real, end: &Real, work: Real) {
    if start >= end {
        return;
    }
    if let Some(last) = out.last_mut() {
        if last.job == job && &last.end == start {
            last.end = end.clone();
            last.work_done += &work;
            return;
        }
    }
    out.push(Segment {
        job,
        start: start.clone(),
        end: end.clone(),
        work_done: work,
    });
}

/// Earliest future point where the dispatch decision may change, other
/// than the running job's completion.
fn next_decision_time(
    state: &SimState<'_>,
    policy: &PolicySpec,
    t: &Real,
    next_release: usize,
) -> Option<Real> {
    let jobs = &state.instance.jobs;
    let ctx = state.ctx;
    let mut best: Option<Real> = jobs.get(next_release).map(|j| j.release.clone());
    let mut offer = |cand: Real| {
        if ctx.compare(&cand, t) == crate::numeric::Comparison::Greater {
            best = Some(match best.take() {
                Some(b) => b.min_of(&cand),
                None => cand,
            });
        }
    };
    match policy.kind {
        PolicyKind::Lssf => {
            if let Some(lead) = state.running {
                for i in state.available().filter(|&i| i != lead) {
                    if jobs[i].interval() < jobs[lead].interval() {
                        if let Some(c) = lssf_crossing(&jobs[lead], &jobs[i], t) {
                            offer(c);
                        }
                    }
                }
            }
        }
        PolicyKind::Thrashing => {
            for i in state.available() {
                offer(thrashing_activation(&jobs[i], &policy.alpha));
            }
        }
        _ => {}
    }
    best
}

fn finish(
    instance: &Instance,
    policy: &PolicySpec,
    events: Vec<Event>,
    segments: Vec<Segment>,
    completions: BTreeMap<JobId, Real>,
    ctx: &PrecisionContext,
) -> SimTrace {
    let stretches = instance
        .jobs
        .iter()
        .map(|j| {
            (
                j.id,
                j.stretch(&completions[&j.id])
                    .expect("completion after release"),
            )
        })
        .collect();
    let mut busy_time = ctx.zero();
    for s in &segments {
        busy_time += &s.duration();
    }
    SimTrace {
        instance_name: instance.name.clone(),
        policy: policy.clone(),
        events,
        segments,
        completions,
        stretches,
        busy_time,
    }
}

/// Convenience: the forward schedule of a simulation.
pub fn simulated_schedule(
    instance: &Instance,
    policy: &PolicySpec,
    ctx: &PrecisionContext,
) -> Result<Schedule> {
    Ok(simulate(instance, policy, ctx)?.to_schedule())
}
