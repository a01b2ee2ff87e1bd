use crate::error::{Error, Result};
use crate::job::{Instance, Job};
use crate::numeric::{PrecisionContext, Real};

/// Rounds every job to short decimals: releases to nearest, interval
/// lengths up by relative `delta`, works down by relative `delta`.
///
/// Digits are chosen so that the decimal rounding error stays below
/// `delta / 20`, hence intervals never shrink and works never grow.
pub fn rationalize(instance: &Instance, delta: &Real, ctx: &PrecisionContext) -> Result<Instance> {
    if !delta.is_positive() || delta >= &ctx.one() {
        return Err(Error::Parameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let digits = (-delta.to_f64().log10()).ceil().max(0.0) as usize + 2;
    let bits = ctx.bits();
    let round =
        |x: &Real| -> Result<Real> { Real::parse_decimal(&x.to_decimal_digits(digits), bits) };
    let up = ctx.one() + delta;
    let down = ctx.one() - delta;

    let mut jobs = Vec::with_capacity(instance.len());
    for job in &instance.jobs {
        let release = round(&job.release)?;
        let interval = round(&(job.interval() * &up))?;
        let mut due = round(&(&release + &interval))?;
        if &due - &release < job.interval() {
            due = &release + interval;
        }
        let work = round(&(&job.work * &down))?.min_of(&job.work);
        let base = round(&job.speed.base)?;
        let slope = round(&job.speed.slope)?;
        jobs.push(Job::new(
            job.id,
            release,
            due,
            work.max_of(&ctx.zero()),
            base,
            slope,
        )?);
    }
    Instance::new(
        jobs,
        instance.name.clone(),
        format!("{} rationalized delta={delta}", instance.provenance),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_lssf;

    #[test]
    fn outputs_have_short_decimals() {
        let c = PrecisionContext::default();
        let inst = gen_lssf(6, &c).unwrap();
        let rounded = rationalize(&inst, &c.parse("1e-6").unwrap(), &c).unwrap();
        for (a, b) in inst.jobs.iter().zip(&rounded.jobs) {
            assert!(b.work <= a.work);
            assert!(b.interval() >= a.interval());
        }
        assert!(rationalize(&inst, &c.zero(), &c).is_err());
    }
}
