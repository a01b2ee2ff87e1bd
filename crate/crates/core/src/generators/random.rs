use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::job::{Instance, Job};
use crate::numeric::PrecisionContext;
use crate::offline::{lrtb, FeasibilityStatus};

const ATTEMPTS: usize = 64;
const RELAXATIONS: usize = 8;

/// Knobs for [`gen_random_feasible_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct RandomConfig {
    /// Releases are drawn from `[0, release_span * n]` on a 1/1000 grid.
    pub release_span: f64,
    pub min_interval: f64,
    pub max_interval: f64,
    /// Slopes are drawn from `[min_slope, max_slope]` on a 1/100 grid.
    pub min_slope: f64,
    pub max_slope: f64,
    /// Work is this fraction range of the job's full-interval capacity.
    pub min_fill: f64,
    pub max_fill: f64,
    pub distinct_releases: bool,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            release_span: 1.0,
            min_interval: 0.2,
            max_interval: 3.0,
            min_slope: 0.5,
            max_slope: 2.0,
            min_fill: 0.05,
            max_fill: 0.9,
            distinct_releases: true,
        }
    }
}

/// Seeded random lazy jobs, accepted only when the backward sweep finds
/// them feasible with margin above tolerance. Deterministic per `(n, seed)`.
pub fn gen_random_feasible(n: usize, seed: u64, ctx: &PrecisionContext) -> Result<Instance> {
    gen_random_feasible_with(n, seed, &RandomConfig::default(), ctx)
}

pub fn gen_random_feasible_with(
    n: usize,
    seed: u64,
    cfg: &RandomConfig,
    ctx: &PrecisionContext,
) -> Result<Instance> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    if !(cfg.min_interval > 0.0 && cfg.min_interval <= cfg.max_interval)
        || !(cfg.min_slope > 0.0 && cfg.min_slope <= cfg.max_slope)
        || !(cfg.min_fill > 0.0 && cfg.min_fill <= cfg.max_fill && cfg.max_fill <= 1.0)
        || cfg.release_span < 0.0
    {
        return Err(Error::Parameter(format!(
            "invalid random configuration {cfg:?}"
        )));
    }
    let stream = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ n as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    let release_slots = ((cfg.release_span * n as f64 * 1000.0) as u64).max(n as u64);

    for _ in 0..ATTEMPTS {
        let mut releases: Vec<u64> = Vec::with_capacity(n);
        while releases.len() < n {
            let r = rng.gen_range(0..=release_slots);
            if !cfg.distinct_releases || !releases.contains(&r) {
                releases.push(r);
            }
        }
        // ids follow release order
        releases.sort_unstable();
        let mut drafts = Vec::with_capacity(n);
        for &r in &releases {
            let interval = grid(&mut rng, cfg.min_interval, cfg.max_interval, 1000);
            let slope = grid(&mut rng, cfg.min_slope, cfg.max_slope, 100);
            let fill = grid(&mut rng, cfg.min_fill, cfg.max_fill, 1000);
            drafts.push((r, interval, slope, fill));
        }
        for relax in 0..RELAXATIONS {
            let shrink = 1u64 << relax;
            let mut jobs = Vec::with_capacity(n);
            for (k, (r, interval, slope, fill)) in drafts.iter().enumerate() {
                let release = ctx.ratio(*r as i64, 1000);
                let due = &release + ctx.ratio(*interval as i64, 1000);
                let m = ctx.ratio(*slope as i64, 100);
                // capacity m I^2 / 2, scaled by fill / 1000 and halved per relaxation
                let i = ctx.ratio(*interval as i64, 1000);
                let work = &m * i.square() * ctx.ratio(*fill as i64, 2000 * shrink as i64);
                jobs.push(Job::lazy(k as u32 + 1, release, due, work, m)?);
            }
            let provenance = format!("gen_random_feasible n={n} seed={seed} relax={relax}");
            let instance = Instance::new(jobs, format!("random-{n}-{seed}"), provenance)?;
            let (_, verdict) = lrtb(&instance, ctx)?;
            let tol = ctx.tolerance_for(&verdict.margin, &ctx.zero());
            if verdict.status == FeasibilityStatus::Feasible && verdict.margin > tol {
                return Ok(instance);
            }
        }
    }
    Err(Error::RejectionBudget { attempts: ATTEMPTS })
}

/// Uniform on `[lo, hi]` in steps of `1 / scale`, returned as the integer
/// numerator.
fn grid(rng: &mut ChaCha8Rng, lo: f64, hi: f64, scale: u64) -> u64 {
    let a = (lo * scale as f64).ceil() as u64;
    let b = ((hi * scale as f64).floor() as u64).max(a);
    rng.gen_range(a..=b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let c = PrecisionContext::default();
        let a = gen_random_feasible(5, 7, &c).unwrap();
        let b = gen_random_feasible(5, 7, &c).unwrap();
        assert_eq!(a, b);
        let other = gen_random_feasible(5, 8, &c).unwrap();
        assert_ne!(a.jobs, other.jobs);
    }

    #[test]
    fn outputs_are_feasible_with_distinct_releases() {
        let c = PrecisionContext::default();
        for seed in 0..20 {
            let inst = gen_random_feasible(6, seed, &c).unwrap();
            let (_, v) = lrtb(&inst, &c).unwrap();
            assert_eq!(v.status, FeasibilityStatus::Feasible);
            assert!(inst.jobs.windows(2).all(|w| w[0].release < w[1].release));
        }
    }

    #[test]
    fn bad_config_rejected() {
        let c = PrecisionContext::default();
        let cfg = RandomConfig {
            min_fill: 0.0,
            ..RandomConfig::default()
        };
        assert!(gen_random_feasible_with(3, 1, &cfg, &c).is_err());
        assert!(gen_random_feasible(0, 1, &c).is_err());
    }
}
