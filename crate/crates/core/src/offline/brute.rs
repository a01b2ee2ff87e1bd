use crate::error::{Error, Result};
use crate::job::{Instance, Job};
use crate::numeric::{PrecisionContext, Real};

const MAX_JOBS: usize = 4;

/// Grid-search upper bound on the minimum total busy time.
///
/// Release times and due dates cut the horizon into elementary intervals;
/// each is split into `resolution` equal slices. A slice is either idle or
/// wholly given to one job available throughout it, which then receives the
/// slice's full integral. For every static priority order the slices are
/// filled backward from the latest one, and the cheapest feasible outcome
/// is kept. Grids at `resolution / 2, resolution / 4, ...` are coarsenings
/// of this grid, so their results are included too; the bound is therefore
/// nonincreasing along doublings and tends to the optimum.
///
/// This is a test oracle for small instances, not a production path.
pub fn brute_force_optimal(
    instance: &Instance,
    resolution: usize,
    ctx: &PrecisionContext,
) -> Result<Real> {
    if instance.len() > MAX_JOBS {
        return Err(Error::Parameter(format!(
            "grid search supports at most {MAX_JOBS} jobs, got {}",
            instance.len()
        )));
    }
    if resolution == 0 {
        return Err(Error::Parameter("resolution must be positive".into()));
    }
    let jobs: Vec<&Job> = instance.jobs.iter().filter(|j| !j.work.is_zero()).collect();
    if jobs.is_empty() {
        return Ok(ctx.zero());
    }

    let mut best = search_grid(&jobs, resolution, ctx);
    let mut coarser = resolution;
    while coarser.is_multiple_of(2) {
        coarser /= 2;
        if let Some(v) = search_grid(&jobs, coarser, ctx) {
            best = Some(match best {
                Some(b) => b.min_of(&v),
                None => v,
            });
        }
    }
    best.ok_or(Error::InfeasibleAtResolution(resolution))
}

struct Slice {
    start: Real,
    end: Real,
}

fn slices(jobs: &[&Job], resolution: usize, ctx: &PrecisionContext) -> Vec<Slice> {
    let mut cuts: Vec<Real> = jobs
        .iter()
        .flat_map(|j| [j.release.clone(), j.due.clone()])
        .collect();
    cuts.sort();
    cuts.dedup();
    let parts = ctx.int(resolution as i64);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let width = (&w[1] - &w[0]) / &parts;
        for k in 0..resolution {
            let start = &w[0] + &width * (k as i64);
            let end = if k + 1 == resolution {
                w[1].clone()
            } else {
                &w[0] + &width * (k as i64 + 1)
            };
            out.push(Slice { start, end });
        }
    }
    out
}

fn search_grid(jobs: &[&Job], resolution: usize, ctx: &PrecisionContext) -> Option<Real> {
    let grid = slices(jobs, resolution, ctx);
    let mut best: Option<Real> = None;
    for order in permutations(jobs.len()) {
        if let Some(busy) = greedy_backward(jobs, &grid, &order, ctx) {
            best = Some(match best {
                Some(b) => b.min_of(&busy),
                None => busy,
            });
        }
    }
    best
}

/// Fills slices from the right, giving each to the first job in `order`
/// that is available throughout it and still needs work.
fn greedy_backward(
    jobs: &[&Job],
    grid: &[Slice],
    order: &[usize],
    ctx: &PrecisionContext,
) -> Option<Real> {
    let mut need: Vec<Real> = jobs.iter().map(|j| j.work.clone()).collect();
    let mut busy = ctx.zero();
    for slice in grid.iter().rev() {
        let pick = order.iter().copied().find(|&i| {
            need[i].is_positive() && jobs[i].release <= slice.start && slice.end <= jobs[i].due
        });
        if let Some(i) = pick {
            need[i] -= &slice_work(jobs[i], slice);
            busy += &(&slice.end - &slice.start);
        }
    }
    let zero = ctx.zero();
    need.iter()
        .all(|w| ctx.compare(w, &zero).is_le())
        .then_some(busy)
}

/// Midpoint rule, exact for affine speeds.
fn slice_work(job: &Job, slice: &Slice) -> Real {
    let mid = (&slice.start + &slice.end).shr(1);
    let speed = &job.speed.base + &job.speed.slope * (mid - &job.release);
    (&slice.end - &slice.start) * speed
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_cover_all_orders() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn single_job_approaches_closed_form_from_above() {
        let c = PrecisionContext::default();
        let inst = Instance::new(
            vec![Job::unit(1, c.int(0), c.int(2), c.int(1)).unwrap()],
            "one",
            "",
        )
        .unwrap();
        let exact = c.int(2) - c.int(2).sqrt().unwrap();
        let mut previous: Option<Real> = None;
        for k in 2..10 {
            let bound = brute_force_optimal(&inst, 1 << k, &c).unwrap();
            assert!(bound >= exact);
            if let Some(p) = &previous {
                assert!(&bound <= p);
            }
            previous = Some(bound);
        }
        let gap = previous.unwrap() - &exact;
        // one slice of width 2 / 512 at most
        assert!(gap <= c.ratio(2, 512));
    }

    #[test]
    fn too_many_jobs_rejected() {
        let c = PrecisionContext::default();
        let jobs = (0..5)
            .map(|i| Job::unit(i + 1, c.int(i as i64), c.int(i as i64 + 3), c.int(1)).unwrap())
            .collect();
        let inst = Instance::new(jobs, "five", "").unwrap();
        assert!(matches!(
            brute_force_optimal(&inst, 8, &c),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn overfull_reports_infeasible_at_resolution() {
        let c = PrecisionContext::default();
        let inst = Instance::new(
            vec![Job::unit(1, c.int(0), c.int(1), c.int(1)).unwrap()],
            "over",
            "",
        )
        .unwrap();
        assert!(matches!(
            brute_force_optimal(&inst, 16, &c),
            Err(Error::InfeasibleAtResolution(16))
        ));
    }
}
