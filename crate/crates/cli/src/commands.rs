use std::fs;
use std::io::Write;
use std::path::Path;

use procrastinate::generators::{
    adaptive_adversary_rounds, check_reduction, gen_edd, gen_fifo, gen_lssf, gen_random_feasible,
    gen_srpt, reduce_ssr, SsrQuery,
};
use procrastinate::offline::{lrtb, nonlazy_fill, FeasibilityStatus, FeasibilityVerdict};
use procrastinate::online::{max_stretch, simulate, PolicyKind, PolicySpec};
use procrastinate::{Instance, PrecisionContext, Real, Schedule, DEFAULT_BITS};

use crate::args::{Cli, Command, GenKind, OutArg, PolicyArgs, QueryArgs};
use crate::bench::{parse_seeds, run_bench, to_csv, BenchConfig, Suite};
use crate::error::{exit, CliError, CliResult};
use crate::files::{
    parse_json, read_instance_file, read_text, to_json, write_json, InstanceFile, Manifest,
    ManifestEntry, ScheduleFile, TraceFile,
};
use crate::plot::write_plot_data;

/// Narrowest precision accepted on the command line; tolerances need
/// headroom above the guard bits.
pub const MIN_BITS: usize = 24;
pub const MAX_BITS: usize = 1 << 16;

/// Output streams, so tests can capture what a command prints.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: &Cli, io: &mut Io<'_>) -> CliResult<u8> {
    match &cli.command {
        Command::Solve { instance, out } => solve(cli, instance, out.as_deref(), io),
        Command::Simulate {
            instance,
            policy,
            trace_out,
            plot_out,
        } => simulate_cmd(
            cli,
            instance,
            policy,
            trace_out.as_deref(),
            plot_out.as_deref(),
            io,
        ),
        Command::Gen(kind) => generate(cli, kind, io),
        Command::Reduce { query, out } => reduce(cli, query, out.as_deref(), io),
        Command::Check { path } => check(path, io),
        Command::Bench {
            suite,
            seeds,
            jobs,
            out,
        } => bench(cli, suite, seeds, *jobs, out.as_deref(), io),
    }
}

/// Precision from the flag, else from the input file, else the default.
fn context(cli: &Cli, file_bits: Option<usize>) -> CliResult<PrecisionContext> {
    let bits = cli.precision.or(file_bits).unwrap_or(DEFAULT_BITS);
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(CliError::usage(format!(
            "precision must lie in [{MIN_BITS}, {MAX_BITS}] bits, got {bits}"
        )));
    }
    let mut ctx = PrecisionContext::new(bits);
    if let Some(text) = &cli.rel_tol {
        let tol = Real::parse_decimal(text, bits)
            .map_err(|_| CliError::usage(format!("bad --rel-tol {text:?}")))?;
        if !tol.is_positive() || tol >= ctx.one() {
            return Err(CliError::usage(format!(
                "--rel-tol must lie in (0, 1), got {text}"
            )));
        }
        ctx = ctx.with_rel_tol(tol);
    }
    Ok(ctx)
}

fn load_instance(
    cli: &Cli,
    path: &Path,
    io: &mut Io<'_>,
) -> CliResult<(Instance, PrecisionContext)> {
    let file = read_instance_file(path)?;
    let ctx = context(cli, Some(file.precision_bits))?;
    if ctx.bits() < file.precision_bits {
        writeln!(
            io.err,
            "note: {} was written at {} bits; reading it at {} bits rounds its values",
            path.display(),
            file.precision_bits,
            ctx.bits()
        )?;
    }
    let instance = file
        .to_instance(&ctx)
        .map_err(|e| e.context(path.display()))?;
    Ok((instance, ctx))
}

fn parse_number(flag: &str, text: &str, ctx: &PrecisionContext) -> CliResult<Real> {
    ctx.parse(text)
        .map_err(|_| CliError::usage(format!("{flag} expects a decimal number, got {text:?}")))
}

fn policy_spec(args: &PolicyArgs, ctx: &PrecisionContext) -> CliResult<PolicySpec> {
    let kind: PolicyKind = args.policy.parse().map_err(|_| {
        let names: Vec<_> = PolicyKind::ALL.iter().map(|k| k.as_str()).collect();
        CliError::usage(format!(
            "unknown policy {:?}; expected one of {}",
            args.policy,
            names.join(", ")
        ))
    })?;
    let mut spec = PolicySpec::new(kind, ctx);
    if let Some(alpha) = &args.alpha {
        spec = spec.with_alpha(parse_number("--alpha", alpha, ctx)?)?;
    }
    if let Some(cap) = &args.cap {
        spec = spec.with_cap(parse_number("--cap", cap, ctx)?)?;
    }
    Ok(spec)
}

/// Backward sweep for procrastinator instances, idle-time filling when one
/// constant-speed job spans disjoint lazy ones.
fn offline(
    instance: &Instance,
    ctx: &PrecisionContext,
) -> CliResult<(Schedule, FeasibilityVerdict)> {
    if instance.all_lazy() {
        Ok(lrtb(instance, ctx)?)
    } else {
        nonlazy_fill(instance, ctx).map_err(|e| {
            CliError::from(e).context("instance mixes speed shapes outside the supported classes")
        })
    }
}

fn status_code(status: FeasibilityStatus) -> u8 {
    match status {
        FeasibilityStatus::Feasible => exit::OK,
        FeasibilityStatus::Infeasible => exit::INFEASIBLE,
        FeasibilityStatus::Indeterminate => exit::INDETERMINATE,
    }
}

fn suggest_precision(
    status: FeasibilityStatus,
    ctx: &PrecisionContext,
    io: &mut Io<'_>,
) -> CliResult<()> {
    if status == FeasibilityStatus::Indeterminate {
        writeln!(
            io.err,
            "feasibility is within tolerance at {} bits; retry with --precision {}",
            ctx.bits(),
            ctx.bits() * 2
        )?;
    }
    Ok(())
}

fn solve(cli: &Cli, path: &Path, out: Option<&Path>, io: &mut Io<'_>) -> CliResult<u8> {
    let (instance, ctx) = load_instance(cli, path, io)?;
    let (schedule, verdict) = offline(&instance, &ctx)?;
    let file = ScheduleFile::new(&instance, &schedule, &verdict, &ctx);
    writeln!(
        io.out,
        "instance: {} ({} jobs)",
        instance.name,
        instance.len()
    )?;
    writeln!(io.out, "status: {}", file.status)?;
    writeln!(io.out, "margin: {}", file.margin.0)?;
    writeln!(io.out, "busy_time: {}", file.busy_time.0)?;
    writeln!(io.out, "segments: {}", file.segments.len())?;
    for row in &file.deficit {
        writeln!(io.out, "deficit: job {} missing {}", row.job, row.missing.0)?;
    }
    if let Some(out) = out {
        write_json(out, &file)?;
    }
    suggest_precision(verdict.status, &ctx, io)?;
    Ok(status_code(verdict.status))
}

fn simulate_cmd(
    cli: &Cli,
    path: &Path,
    policy: &PolicyArgs,
    trace_out: Option<&Path>,
    plot_out: Option<&Path>,
    io: &mut Io<'_>,
) -> CliResult<u8> {
    let (instance, ctx) = load_instance(cli, path, io)?;
    let spec = policy_spec(policy, &ctx)?;
    let trace = simulate(&instance, &spec, &ctx)?;
    // offline verdict is recorded when the instance class supports one
    let verdict = offline(&instance, &ctx).ok().map(|(_, v)| v.status);
    let file = TraceFile::from_trace(&trace, &instance, verdict, &ctx)?;
    writeln!(
        io.out,
        "instance: {} ({} jobs)",
        instance.name,
        instance.len()
    )?;
    writeln!(io.out, "policy: {}", spec.kind)?;
    writeln!(io.out, "max_stretch: {}", max_stretch(&trace)?)?;
    writeln!(io.out, "busy_time: {}", file.summary.busy_time.0)?;
    writeln!(io.out, "late_jobs: {}", join_ids(&file.summary.late_jobs))?;
    if let Some(v) = verdict {
        writeln!(io.out, "offline: {}", v.as_str())?;
    }
    if let Some(p) = trace_out {
        write_json(p, &file)?;
    }
    if let Some(dir) = plot_out {
        write_plot_data(dir, &instance, &trace)?;
    }
    Ok(exit::OK)
}

fn join_ids(ids: &[u32]) -> String {
    if ids.is_empty() {
        return "none".into();
    }
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn emit_instance(
    instance: &Instance,
    ctx: &PrecisionContext,
    out: &OutArg,
    io: &mut Io<'_>,
) -> CliResult<()> {
    let file = InstanceFile::from_instance(instance, ctx.bits());
    match &out.out {
        Some(p) => write_json(p, &file),
        None => Ok(io.out.write_all(to_json(&file).as_bytes())?),
    }
}

fn query(args: &QueryArgs) -> CliResult<SsrQuery> {
    Ok(SsrQuery::new(args.xs.clone(), args.threshold)?)
}

fn generate(cli: &Cli, kind: &GenKind, io: &mut Io<'_>) -> CliResult<u8> {
    let ctx = context(cli, None)?;
    let (instance, out) = match kind {
        GenKind::Lssf { n, out } => (gen_lssf(*n, &ctx)?, out),
        GenKind::Srpt { n, out } => (gen_srpt(*n, &ctx)?, out),
        GenKind::Fifo { target, out } => (
            gen_fifo(&parse_number("--target", target, &ctx)?, &ctx)?,
            out,
        ),
        GenKind::Edd { target, out } => (
            gen_edd(&parse_number("--target", target, &ctx)?, &ctx)?,
            out,
        ),
        GenKind::Reduction { query: q, out } => (reduce_ssr(&query(q)?, &ctx)?, out),
        GenKind::Random {
            n,
            seed,
            count: Some(count),
            out,
        } => return random_suite(*n, *seed, *count, out, &ctx, io),
        GenKind::Random { n, seed, out, .. } => (gen_random_feasible(*n, *seed, &ctx)?, out),
        GenKind::Adversary {
            policy,
            rounds,
            trace_out,
            out,
        } => {
            let spec = policy_spec(policy, &ctx)?;
            let outcome = adaptive_adversary_rounds(&spec, *rounds, &ctx)?;
            if let Some(p) = trace_out {
                let file = TraceFile::from_trace(
                    &outcome.trace,
                    &outcome.instance,
                    Some(outcome.verdict.status),
                    &ctx,
                )?;
                write_json(p, &file)?;
            }
            // stdout stays pure JSON when the instance is printed there
            let report: &mut dyn Write = if out.out.is_none() {
                &mut *io.err
            } else {
                &mut *io.out
            };
            writeln!(report, "policy: {}", spec.kind)?;
            for (k, round) in outcome.rounds.iter().enumerate() {
                writeln!(
                    report,
                    "round {}: {:?}, follow-up job {}",
                    k + 1,
                    round.case,
                    round.followup
                )?;
            }
            writeln!(report, "offline: {}", outcome.verdict.status.as_str())?;
            let late: Vec<u32> = outcome.late_jobs.iter().map(|id| id.0).collect();
            writeln!(report, "late_jobs: {}", join_ids(&late))?;
            writeln!(report, "missed_due_date: {}", outcome.missed_due_date())?;
            (outcome.instance, out)
        }
    };
    emit_instance(&instance, &ctx, out, io)?;
    Ok(exit::OK)
}

/// Writes `count` instances for consecutive seeds into a directory with a
/// manifest.
fn random_suite(
    n: usize,
    seed: u64,
    count: u64,
    out: &OutArg,
    ctx: &PrecisionContext,
    io: &mut Io<'_>,
) -> CliResult<u8> {
    let dir = out
        .out
        .as_deref()
        .ok_or_else(|| CliError::usage("--count needs --out naming a directory"))?;
    fs::create_dir_all(dir).map_err(|e| CliError::software(format!("{}: {e}", dir.display())))?;
    let last = seed
        .checked_add(count)
        .ok_or_else(|| CliError::usage("seed range overflows"))?;
    let mut instances = Vec::new();
    for s in seed..last {
        let instance = gen_random_feasible(n, s, ctx)?;
        let file = format!("random-{n}-{s}.json");
        write_json(
            &dir.join(&file),
            &InstanceFile::from_instance(&instance, ctx.bits()),
        )?;
        instances.push(ManifestEntry {
            file,
            seed: s,
            jobs: n,
        });
    }
    let manifest = Manifest {
        schema_version: crate::files::SCHEMA_VERSION,
        generator: format!("random n={n}"),
        instances,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    writeln!(io.out, "wrote {count} instances to {}", dir.display())?;
    Ok(exit::OK)
}

fn reduce(cli: &Cli, args: &QueryArgs, out: Option<&Path>, io: &mut Io<'_>) -> CliResult<u8> {
    let ctx = context(cli, None)?;
    let q = query(args)?;
    let instance = reduce_ssr(&q, &ctx)?;
    let verdict = check_reduction(&q, &ctx)?;
    writeln!(
        io.out,
        "instance: {} ({} jobs)",
        instance.name,
        instance.len()
    )?;
    writeln!(io.out, "status: {}", verdict.status.as_str())?;
    writeln!(io.out, "margin: {}", verdict.margin)?;
    if let Some(p) = out {
        write_json(p, &InstanceFile::from_instance(&instance, ctx.bits()))?;
    }
    suggest_precision(verdict.status, &ctx, io)?;
    Ok(status_code(verdict.status))
}

fn check(path: &Path, io: &mut Io<'_>) -> CliResult<u8> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse_json(path, &text)?;
    if value.get("events").is_some() {
        let file: TraceFile = parse_json(path, &text)?;
        crate::files::check_schema(path, file.schema_version)?;
        file.check_consistency()
            .map_err(|e| e.context(path.display()))?;
        writeln!(
            io.out,
            "trace: {} events, summary consistent",
            file.events.len()
        )?;
        writeln!(io.out, "canonical: {}", to_json(&file) == text)?;
    } else {
        let file: InstanceFile = parse_json(path, &text)?;
        crate::files::check_schema(path, file.schema_version)?;
        let ctx = PrecisionContext::new(file.precision_bits.clamp(MIN_BITS, MAX_BITS));
        let instance = file
            .to_instance(&ctx)
            .map_err(|e| e.context(path.display()))?;
        let again = InstanceFile::from_instance(&instance, ctx.bits());
        if again.to_instance(&ctx)? != instance {
            return Err(CliError::software(format!(
                "{}: instance does not survive a round trip",
                path.display()
            )));
        }
        writeln!(
            io.out,
            "instance: {} ({} jobs), round trip exact",
            instance.name,
            instance.len()
        )?;
        writeln!(io.out, "canonical: {}", to_json(&again) == text)?;
    }
    Ok(exit::OK)
}

fn bench(
    cli: &Cli,
    suite: &str,
    seeds: &str,
    jobs: usize,
    out: Option<&Path>,
    io: &mut Io<'_>,
) -> CliResult<u8> {
    let ctx = context(cli, None)?;
    let cfg = BenchConfig {
        suite: suite.parse::<Suite>()?,
        seeds: parse_seeds(seeds)?,
        jobs,
    };
    let rows = run_bench(&cfg, &ctx)?;
    let csv = to_csv(&rows)?;
    match out {
        Some(p) => {
            fs::write(p, csv).map_err(|e| CliError::software(format!("{}: {e}", p.display())))?
        }
        None => io.out.write_all(csv.as_bytes())?,
    }
    // per-policy maximum of the max-stretch column
    let mut groups: Vec<(String, String, usize, Real)> = Vec::new();
    for row in &rows {
        let s = ctx.parse(&row.max_stretch)?;
        match groups
            .iter_mut()
            .find(|g| g.0 == row.policy && g.1 == row.cap)
        {
            Some(g) => {
                g.2 += 1;
                g.3 = g.3.max_of(&s);
            }
            None => groups.push((row.policy.clone(), row.cap.clone(), 1, s)),
        }
    }
    for (policy, cap, count, worst) in groups {
        let cap = if cap.is_empty() {
            String::new()
        } else {
            format!(" cap {cap}")
        };
        writeln!(
            io.err,
            "{policy}{cap}: {count} runs, max stretch {}",
            worst.to_decimal_digits(12)
        )?;
    }
    Ok(exit::OK)
}
