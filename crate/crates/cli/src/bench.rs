use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use procrastinate::generators::{gen_edd, gen_fifo, gen_lssf, gen_random_feasible, gen_srpt};
use procrastinate::online::{max_stretch, simulate, PolicyKind, PolicySpec};
use procrastinate::{Instance, PrecisionContext};

use crate::error::{CliError, CliResult};

/// Significant digits of the numeric CSV cells.
const DIGITS: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    /// Random feasible instances under Thrashing, uncapped and with cap 2.
    Thrashing,
    /// Random feasible instances under all five policies.
    Policies,
    /// The LSSF chain; each seed is the job count.
    Lssf,
    /// The SRPT instance; each seed is the job count.
    Srpt,
    /// FIFO and EDD instances; each seed is the target stretch.
    LowerBounds,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Thrashing,
        Suite::Policies,
        Suite::Lssf,
        Suite::Srpt,
        Suite::LowerBounds,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Thrashing => "thrashing",
            Suite::Policies => "policies",
            Suite::Lssf => "lssf",
            Suite::Srpt => "srpt",
            Suite::LowerBounds => "lower-bounds",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|k| k.as_str()).collect();
                CliError::usage(format!(
                    "unknown suite {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Parses `"0-99"`, `"1,4,9"` or a mix such as `"0-3,10"`. Empty text is
/// an empty list.
pub fn parse_seeds(text: &str) -> CliResult<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || CliError::usage(format!("bad seed list entry {part:?}"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a > b {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(seeds)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub suite: String,
    pub seed: u64,
    pub n: usize,
    pub policy: String,
    pub cap: String,
    pub max_stretch: String,
    pub busy_time: String,
    /// Known value or bound for the suite, empty when there is none.
    pub reference: String,
    pub late_jobs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct RowKey {
    seed: u64,
    policy: usize,
    capped: bool,
}

pub struct BenchConfig {
    pub suite: Suite,
    pub seeds: Vec<u64>,
    /// Jobs per random instance.
    pub jobs: usize,
}

/// Runs every (seed, policy) cell, in parallel, and returns rows sorted by
/// seed, then policy, then cap.
pub fn run_bench(cfg: &BenchConfig, ctx: &PrecisionContext) -> CliResult<Vec<BenchRow>> {
    if cfg.jobs == 0 {
        return Err(CliError::usage("--jobs must be positive"));
    }
    let cells: Vec<CliResult<Vec<(RowKey, BenchRow)>>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed, ctx))
        .collect();
    let mut rows = Vec::new();
    for cell in cells {
        rows.extend(cell?);
    }
    rows.sort_by_key(|(key, _)| *key);
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

fn run_seed(
    cfg: &BenchConfig,
    seed: u64,
    ctx: &PrecisionContext,
) -> CliResult<Vec<(RowKey, BenchRow)>> {
    let c = ctx;
    let as_count = |what: &str| -> CliResult<usize> {
        usize::try_from(seed).map_err(|_| CliError::usage(format!("{what} {seed} is too large")))
    };
    let plan: Vec<(Instance, PolicyKind, bool, String)> = match cfg.suite {
        Suite::Thrashing => {
            let inst = gen_random_feasible(cfg.jobs, seed, c)?;
            vec![
                (inst.clone(), PolicyKind::Thrashing, false, "4".into()),
                (inst, PolicyKind::Thrashing, true, "4".into()),
            ]
        }
        Suite::Policies => {
            let inst = gen_random_feasible(cfg.jobs, seed, c)?;
            PolicyKind::ALL
                .into_iter()
                .map(|k| (inst.clone(), k, false, String::new()))
                .collect()
        }
        Suite::Lssf => {
            let n = as_count("job count")?;
            let expected = c.int(n as i64 - 1).sqrt()?;
            vec![(
                gen_lssf(n, c)?,
                PolicyKind::Lssf,
                false,
                expected.to_decimal_digits(DIGITS),
            )]
        }
        Suite::Srpt => {
            let n = as_count("job count")?;
            let expected = c.int(n as i64 + 1).sqrt()?.shr(1);
            vec![(
                gen_srpt(n, c)?,
                PolicyKind::Srpt,
                false,
                expected.to_decimal_digits(DIGITS),
            )]
        }
        Suite::LowerBounds => {
            let target =
                c.int(i64::try_from(seed).map_err(|_| CliError::usage("target too large"))?);
            vec![
                (
                    gen_fifo(&target, c)?,
                    PolicyKind::Fifo,
                    false,
                    seed.to_string(),
                ),
                (
                    gen_edd(&target, c)?,
                    PolicyKind::Edd,
                    false,
                    seed.to_string(),
                ),
            ]
        }
    };
    let mut out = Vec::with_capacity(plan.len());
    for (inst, kind, capped, reference) in plan {
        let mut policy = PolicySpec::new(kind, c);
        if capped {
            policy = policy.with_cap(c.int(2))?;
        }
        let trace = simulate(&inst, &policy, c)?;
        let key = RowKey {
            seed,
            policy: PolicyKind::ALL
                .iter()
                .position(|k| *k == kind)
                .expect("listed"),
            capped,
        };
        out.push((
            key,
            BenchRow {
                suite: cfg.suite.to_string(),
                seed,
                n: inst.len(),
                policy: kind.to_string(),
                cap: if capped { "2".into() } else { String::new() },
                max_stretch: max_stretch(&trace)?.to_decimal_digits(DIGITS),
                busy_time: trace.busy_time.to_decimal_digits(DIGITS),
                reference,
                late_jobs: trace.late_jobs(&inst).len(),
            },
        ));
    }
    Ok(out)
}

/// CSV text with a header row, also for an empty table.
pub fn to_csv(rows: &[BenchRow]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record([
        "suite",
        "seed",
        "n",
        "policy",
        "cap",
        "max_stretch",
        "busy_time",
        "reference",
        "late_jobs",
    ])?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::software(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
