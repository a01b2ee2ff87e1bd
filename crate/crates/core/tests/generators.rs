use procrastinate::generators::{
    adaptive_adversary_rounds, check_reduction, gen_edd, gen_fifo, gen_lssf, gen_srpt, rationalize,
    reduce_ssr, SsrQuery,
};
use procrastinate::offline::{lrtb, nonlazy_fill, validate_schedule, FeasibilityStatus};
use procrastinate::online::{max_stretch, simulate, PolicyKind, PolicySpec};
use procrastinate::{JobId, PrecisionContext};

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

#[test]
fn lssf_chain_intervals_have_bounded_total() {
    let c = ctx();
    let inst = gen_lssf(200, &c).unwrap();
    let mut total = 0.0;
    for id in 3..=200 {
        total += inst.job(JobId(id)).unwrap().interval().to_f64();
    }
    let first = inst.job(JobId(3)).unwrap().interval().to_f64();
    assert!(total < 6.0 * first, "chain total {total} vs first {first}");
}

#[test]
fn lssf_stretch_grows_with_square_root() {
    let c = ctx();
    let policy = PolicySpec::new(PolicyKind::Lssf, &c);
    let inst = gen_lssf(17, &c).unwrap();
    let trace = simulate(&inst, &policy, &c).unwrap();
    for j in 3..=17u32 {
        let s = trace.stretches[&JobId(j)].to_f64();
        assert!((s - ((j - 1) as f64).sqrt()).abs() < 1e-12, "job {j}: {s}");
    }
    // the offline schedule meets every due date
    let (schedule, verdict) = lrtb(&inst, &c).unwrap();
    assert_eq!(verdict.status, FeasibilityStatus::Feasible);
    assert!(validate_schedule(&inst, &schedule, true, &c).passed());
}

#[test]
fn srpt_instance_feasible_offline_only() {
    let c = ctx();
    let inst = gen_srpt(101, &c).unwrap();
    let (_, verdict) = lrtb(&inst, &c).unwrap();
    assert_eq!(verdict.status, FeasibilityStatus::Feasible);
    let trace = simulate(&inst, &PolicySpec::new(PolicyKind::Srpt, &c), &c).unwrap();
    let s = max_stretch(&trace).unwrap().to_f64();
    assert!((s - 102f64.sqrt() / 2.0).abs() < 1e-12);
    assert!(trace.completions[&JobId(1)] > inst.job(JobId(1)).unwrap().due);
}

#[test]
fn fifo_and_edd_generators_scale() {
    let c = ctx();
    for k in [2, 50] {
        let target = c.int(k);
        let fifo = gen_fifo(&target, &c).unwrap();
        assert_eq!(fifo.len(), 2);
        let edd = gen_edd(&target, &c).unwrap();
        assert_eq!(edd.len(), 3);
        let s = max_stretch(&simulate(&edd, &PolicySpec::new(PolicyKind::Edd, &c), &c).unwrap())
            .unwrap();
        assert!(s >= target);
    }
}

#[test]
fn reduction_fill_matches_direct_sign() {
    let c = ctx();
    for (xs, t) in [
        (vec![2u64, 3], 3u64),
        (vec![5, 7, 11], 7),
        (vec![5, 7, 11], 8),
        (vec![100], 10),
    ] {
        let q = SsrQuery::new(xs.clone(), t).unwrap();
        let direct = check_reduction(&q, &c).unwrap();
        let inst = reduce_ssr(&q, &c).unwrap();
        let (schedule, filled) = nonlazy_fill(&inst, &c).unwrap();
        assert_eq!(direct.status, filled.status, "{xs:?} {t}");
        assert!(validate_schedule(&inst, &schedule, false, &c).passed());
        if direct.status == FeasibilityStatus::Feasible {
            assert!(validate_schedule(&inst, &schedule, true, &c).passed());
        }
    }
}

#[test]
fn adversary_rounds_each_force_a_miss() {
    let c = ctx();
    for kind in PolicyKind::ALL {
        let out = adaptive_adversary_rounds(&PolicySpec::new(kind, &c), 4, &c).unwrap();
        assert_eq!(out.verdict.status, FeasibilityStatus::Feasible, "{kind}");
        assert!(out.late_jobs.len() >= 4, "{kind}: {:?}", out.late_jobs);
    }
}

#[test]
fn rationalized_lssf_keeps_feasibility() {
    let c = ctx();
    let inst = gen_lssf(10, &c).unwrap();
    let rounded = rationalize(&inst, &c.parse("1e-6").unwrap(), &c).unwrap();
    for job in &rounded.jobs {
        assert!(job.release.to_decimal_string().len() <= 12);
    }
    let s = max_stretch(&simulate(&rounded, &PolicySpec::new(PolicyKind::Lssf, &c), &c).unwrap())
        .unwrap();
    assert!(s.to_f64() > 2.5);
}
