use crate::error::{Error, Result};
use crate::job::{Instance, Job};
use crate::numeric::{Comparison, PrecisionContext};
use crate::offline::{nonlazy_fill, FeasibilityStatus, FeasibilityVerdict};

/// Does `sum of sqrt(xs) >= threshold` hold?
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsrQuery {
    pub xs: Vec<u64>,
    pub threshold: u64,
}

impl SsrQuery {
    pub fn new(xs: Vec<u64>, threshold: u64) -> Result<Self> {
        let q = SsrQuery { xs, threshold };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.xs.is_empty() {
            return Err(Error::Parameter("query needs at least one term".into()));
        }
        if self.xs.contains(&0) || self.threshold == 0 {
            return Err(Error::Parameter(
                "terms and threshold must be positive".into(),
            ));
        }
        // keeps x^2 + 3x + 4 exact in the work formula
        if self.xs.iter().any(|&x| x > 1 << 40) {
            return Err(Error::Parameter("terms must not exceed 2^40".into()));
        }
        Ok(())
    }
}

/// Bits of the widest integer the reduction writes: works, due dates and
/// the threshold.
fn required_bits(q: &SsrQuery) -> usize {
    let bits = |v: u128| (128 - v.leading_zeros()) as usize;
    let mut widest = bits(q.threshold as u128);
    let mut end: u128 = 0;
    for &x in &q.xs {
        let x = x as u128;
        end += x + 2;
        widest = widest.max(bits((x * x + 3 * x + 4) / 2)).max(bits(end));
    }
    widest
}

/// Integer square root when `x` is a perfect square.
pub(crate) fn exact_sqrt(x: u64) -> Option<u64> {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    (r * r == x).then_some(r)
}

/// Scheduling instance that is feasible exactly when the query holds.
///
/// Term `x` becomes a unit-slope job of interval length `x + 2` and work
/// `(x^2 + 3x + 4) / 2`, which leaves exactly `sqrt(x)` idle at the left of
/// its interval. The intervals are back to back from 0. A constant-speed job
/// of speed 1 spanning all of them must do `threshold` work in that idle time.
pub fn reduce_ssr(q: &SsrQuery, ctx: &PrecisionContext) -> Result<Instance> {
    q.validate()?;
    let needed = required_bits(q);
    if needed > ctx.bits() {
        return Err(Error::Parameter(format!(
            "the reduction needs {needed} bits to hold its integers exactly, precision is {}",
            ctx.bits()
        )));
    }
    let c = ctx;
    let mut jobs = Vec::with_capacity(q.xs.len() + 1);
    let mut r = c.zero();
    for (k, &x) in q.xs.iter().enumerate() {
        let xr = c.int(x as i64);
        let d = &r + &xr + c.int(2);
        let w = (xr.square() + &xr * 3 + c.int(4)).shr(1);
        jobs.push(Job::unit(k as u32 + 1, r.clone(), d.clone(), w)?);
        r = d;
    }
    let n = q.xs.len() as u32 + 1;
    jobs.push(Job::nonlazy(
        n,
        c.zero(),
        r,
        c.int(q.threshold as i64),
        c.one(),
    )?);
    Instance::new(
        jobs,
        "ssr",
        format!("reduce_ssr xs={:?} threshold={}", q.xs, q.threshold),
    )
}

/// Decides the query by the sign of `sum sqrt(x) - threshold` at working
/// precision. When every term is a perfect square the sign is computed over
/// the integers instead. The witness and deficits come from filling the
/// reduced instance.
pub fn check_reduction(q: &SsrQuery, ctx: &PrecisionContext) -> Result<FeasibilityVerdict> {
    let instance = reduce_ssr(q, ctx)?;
    let (schedule, filled) = nonlazy_fill(&instance, ctx)?;

    let mut sum = ctx.zero();
    for &x in &q.xs {
        sum += &ctx.int(x as i64).sqrt()?;
    }
    let margin = &sum - ctx.int(q.threshold as i64);

    let roots: Option<Vec<u64>> = q.xs.iter().map(|&x| exact_sqrt(x)).collect();
    let status = match roots {
        Some(roots) => {
            let total: u64 = roots.iter().sum();
            if total >= q.threshold {
                FeasibilityStatus::Feasible
            } else {
                FeasibilityStatus::Infeasible
            }
        }
        None => match ctx.sign(&margin) {
            Comparison::Greater => FeasibilityStatus::Feasible,
            Comparison::Less => FeasibilityStatus::Infeasible,
            // an irrational sum never equals an integer; only precision is lacking
            Comparison::Equal | Comparison::Indeterminate => FeasibilityStatus::Indeterminate,
        },
    };
    // the fill sums many rounded quantities; when it decisively contradicts
    // the direct sign the precision cannot support either answer
    let decided = |s: FeasibilityStatus| s != FeasibilityStatus::Indeterminate;
    let status = if decided(filled.status) && decided(status) && filled.status != status {
        FeasibilityStatus::Indeterminate
    } else {
        status
    };
    let witness = (status == FeasibilityStatus::Feasible).then_some(schedule);
    Ok(FeasibilityVerdict {
        status,
        witness,
        deficit: filled.deficit,
        margin,
    })
}
