use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_procrastinate"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn number(v: &Value) -> f64 {
    v.as_str().expect("decimal string").parse().unwrap()
}

fn instance(dir: &Path, name: &str, jobs: &[[&str; 5]]) -> PathBuf {
    let rows: Vec<Value> = jobs
        .iter()
        .enumerate()
        .map(|(k, [r, d, w, slope, base])| {
            serde_json::json!({"id": k + 1, "release": r, "due": d, "work": w, "slope": slope, "base": base})
        })
        .collect();
    let file = serde_json::json!({
        "schema_version": 1, "name": name, "precision_bits": 128, "provenance": "test", "jobs": rows
    });
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    path
}

#[test]
fn solve_single_tight_job() {
    let dir = TempDir::new().unwrap();
    // unit slope on [0, 2] holds exactly 2 units of work
    instance(dir.path(), "tight", &[["0", "2", "2", "1", "0"]]);
    let out = run(dir.path(), &["solve", "tight.json", "--out", "s.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sched = json(dir.path().join("s.json"));
    assert_eq!(sched["status"], "feasible");
    assert_eq!(sched["segments"].as_array().unwrap().len(), 1);
    assert_eq!(sched["segments"][0]["start"], "0");
    assert_eq!(sched["segments"][0]["end"], "2");
}

#[test]
fn solve_reports_infeasible_reduction() {
    let dir = TempDir::new().unwrap();
    // sqrt 2 + sqrt 3 is about 3.146, below 4
    assert!(2f64.sqrt() + 3f64.sqrt() < 4.0);
    let gen = run(
        dir.path(),
        &[
            "gen",
            "reduction",
            "--xs",
            "2,3",
            "--threshold",
            "4",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(code(&gen), 0, "{}", stderr(&gen));
    let out = run(dir.path(), &["solve", "r.json"]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
    assert_eq!(
        code(&run(
            dir.path(),
            &["reduce", "--xs", "2,3", "--threshold", "4"]
        )),
        1
    );
}

#[test]
fn solve_feasible_reduction() {
    let dir = TempDir::new().unwrap();
    assert!(2f64.sqrt() + 3f64.sqrt() > 3.0);
    run(
        dir.path(),
        &[
            "gen",
            "reduction",
            "--xs",
            "2,3",
            "--threshold",
            "3",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(code(&run(dir.path(), &["solve", "r.json"])), 0);
    assert_eq!(
        code(&run(
            dir.path(),
            &["reduce", "--xs", "2,3", "--threshold", "3"]
        )),
        0
    );
}

#[test]
fn near_tie_at_low_precision_is_indeterminate() {
    let dir = TempDir::new().unwrap();
    // total work exceeds the shared capacity 1/2 by 5e-11
    instance(
        dir.path(),
        "tie",
        &[
            ["0", "1", "0.4999999999", "1", "0"],
            ["0.25", "0.75", "0.0000000001", "1", "0"],
        ],
    );
    let low = run(dir.path(), &["--precision", "48", "solve", "tie.json"]);
    assert_eq!(code(&low), 2, "{}", stdout(&low));
    assert!(stderr(&low).contains("--precision 96"), "{}", stderr(&low));
    assert_eq!(code(&run(dir.path(), &["solve", "tie.json"])), 1);
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = TempDir::new().unwrap();
    let path = instance(dir.path(), "bad", &[["0", "2", "2", "1", "0"]]);
    let text = fs::read_to_string(&path)
        .unwrap()
        .replace("\"due\": \"2\"", "\"due\": \"2..5\"");
    fs::write(&path, text).unwrap();
    let out = run(dir.path(), &["solve", "bad.json"]);
    assert_eq!(code(&out), 64);
    let err = stderr(&out);
    assert!(err.contains("bad.json:"), "{err}");
    let loc: Vec<&str> = err.split(':').skip(2).take(2).collect();
    assert!(
        loc.iter().all(|p| p.trim().parse::<usize>().is_ok()),
        "{err}"
    );
    assert!(err.contains("\"2..5\""), "{err}");

    fs::write(&path, "{\n  \"schema_version\": 1,\n  oops\n}").unwrap();
    let out = run(dir.path(), &["solve", "bad.json"]);
    assert_eq!(code(&out), 64);
    assert!(stderr(&out).contains("bad.json:3:"), "{}", stderr(&out));
}

#[test]
fn invalid_instances_and_flags_exit_64() {
    let dir = TempDir::new().unwrap();
    instance(dir.path(), "backwards", &[["2", "1", "1", "1", "0"]]);
    assert_eq!(code(&run(dir.path(), &["solve", "backwards.json"])), 64);
    assert_eq!(code(&run(dir.path(), &["solve", "missing.json"])), 64);
    assert_eq!(code(&run(dir.path(), &["gen", "lssf", "--n", "0"])), 64);
    assert_eq!(
        code(&run(dir.path(), &["gen", "fifo", "--target", "abc"])),
        64
    );
    assert_eq!(
        code(&run(
            dir.path(),
            &["--precision", "8", "gen", "lssf", "--n", "3"]
        )),
        64
    );
    assert_eq!(code(&run(dir.path(), &["gen"])), 64);
    assert_eq!(code(&run(dir.path(), &["frobnicate"])), 64);
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
}

#[test]
fn unknown_policy_exits_64() {
    let dir = TempDir::new().unwrap();
    run(dir.path(), &["gen", "lssf", "--n", "4", "--out", "l.json"]);
    let out = run(dir.path(), &["simulate", "l.json", "--policy", "lifo"]);
    assert_eq!(code(&out), 64);
    assert!(stderr(&out).contains("thrashing"));
}

#[test]
fn lssf_chain_reaches_stretch_three() {
    let dir = TempDir::new().unwrap();
    run(dir.path(), &["gen", "lssf", "--n", "10", "--out", "l.json"]);
    let out = run(
        dir.path(),
        &[
            "simulate",
            "l.json",
            "--policy",
            "lssf",
            "--trace-out",
            "t.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trace = json(dir.path().join("t.json"));
    let s = number(&trace["summary"]["max_stretch"]);
    assert!((s - 3.0).abs() < 1e-12, "{s}");
    assert_eq!(trace["run"]["offline"], "feasible");
}

#[test]
fn lssf_three_jobs_gives_root_two() {
    let dir = TempDir::new().unwrap();
    run(dir.path(), &["gen", "lssf", "--n", "3", "--out", "l.json"]);
    run(
        dir.path(),
        &[
            "simulate",
            "l.json",
            "--policy",
            "lssf",
            "--trace-out",
            "t.json",
        ],
    );
    let trace = json(dir.path().join("t.json"));
    let s = number(&trace["summary"]["max_stretch"]);
    assert!((s - 2f64.sqrt()).abs() < 1e-12, "{s}");
}

#[test]
fn thrashing_stays_within_four_with_and_without_cap() {
    let dir = TempDir::new().unwrap();
    for seed in 0..15 {
        let seed = seed.to_string();
        run(
            dir.path(),
            &[
                "gen", "random", "--n", "9", "--seed", &seed, "--out", "r.json",
            ],
        );
        for extra in [&[][..], &["--cap", "2"][..]] {
            let mut args = vec![
                "simulate",
                "r.json",
                "--policy",
                "thrashing",
                "--trace-out",
                "t.json",
            ];
            args.extend_from_slice(extra);
            assert_eq!(code(&run(dir.path(), &args)), 0);
            let trace = json(dir.path().join("t.json"));
            assert!(number(&trace["summary"]["max_stretch"]) <= 4.0);
        }
    }
}

#[test]
fn adversary_against_edd_forces_a_miss() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "gen",
            "adversary",
            "--policy",
            "edd",
            "--out",
            "a.json",
            "--trace-out",
            "t.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(
        stdout(&out).contains("missed_due_date: true"),
        "{}",
        stdout(&out)
    );
    let trace = json(dir.path().join("t.json"));
    assert_eq!(trace["summary"]["missed_due_date"], true);
    assert_eq!(trace["run"]["offline"], "feasible");
    // the written instance is feasible offline
    assert_eq!(code(&run(dir.path(), &["solve", "a.json"])), 0);
}

#[test]
fn instance_files_round_trip_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["gen", "lssf", "--n", "7"][..],
        &["gen", "srpt", "--n", "5"][..],
        &["gen", "edd", "--target", "20"][..],
        &["gen", "random", "--n", "6", "--seed", "11"][..],
    ] {
        let first = run(dir.path(), args);
        assert_eq!(code(&first), 0);
        fs::write(dir.path().join("g.json"), &first.stdout).unwrap();
        let check = run(dir.path(), &["check", "g.json"]);
        assert_eq!(code(&check), 0, "{}", stderr(&check));
        assert!(
            stdout(&check).contains("canonical: true"),
            "{}",
            stdout(&check)
        );
        // the same generator run twice writes identical bytes
        assert_eq!(run(dir.path(), args).stdout, first.stdout);
    }
}

#[test]
fn traces_are_checked_for_consistency() {
    let dir = TempDir::new().unwrap();
    run(
        dir.path(),
        &[
            "gen", "random", "--n", "5", "--seed", "2", "--out", "r.json",
        ],
    );
    run(
        dir.path(),
        &[
            "simulate",
            "r.json",
            "--policy",
            "srpt",
            "--trace-out",
            "t.json",
        ],
    );
    assert_eq!(code(&run(dir.path(), &["check", "t.json"])), 0);
    let path = dir.path().join("t.json");
    let mut trace = json(path.clone());
    trace["summary"]["busy_time"] = Value::from("123");
    fs::write(&path, serde_json::to_string(&trace).unwrap()).unwrap();
    let out = run(dir.path(), &["check", "t.json"]);
    assert_eq!(code(&out), 64);
    assert!(stderr(&out).contains("summary"), "{}", stderr(&out));
}

#[test]
fn plot_output_has_both_tables() {
    let dir = TempDir::new().unwrap();
    run(dir.path(), &["gen", "lssf", "--n", "5", "--out", "l.json"]);
    let out = run(
        dir.path(),
        &[
            "simulate",
            "l.json",
            "--policy",
            "lssf",
            "--plot-out",
            "plot",
        ],
    );
    assert_eq!(code(&out), 0);
    let stretch = fs::read_to_string(dir.path().join("plot/stretch.csv")).unwrap();
    let gantt = fs::read_to_string(dir.path().join("plot/gantt.csv")).unwrap();
    assert_eq!(
        stretch.lines().next(),
        Some("job,release,due,completion,stretch")
    );
    assert_eq!(stretch.lines().count(), 6);
    assert_eq!(gantt.lines().next(), Some("job,start,end"));
    assert!(gantt.lines().count() > 5);
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn bench_thrashing_column_max_is_at_most_four() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "bench",
            "--suite",
            "thrashing",
            "--seeds",
            "0-59",
            "--jobs",
            "8",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 120);
    assert!(rows.iter().all(|r| r[5].parse::<f64>().unwrap() <= 4.0));
    // deterministic across runs despite parallel cells
    let again = run(
        dir.path(),
        &[
            "bench",
            "--suite",
            "thrashing",
            "--seeds",
            "0-59",
            "--jobs",
            "8",
        ],
    );
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn bench_lssf_matches_square_roots() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "bench", "--suite", "lssf", "--seeds", "3-50", "--out", "b.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = csv_rows(&fs::read_to_string(dir.path().join("b.csv")).unwrap());
    assert_eq!(rows.len(), 48);
    for row in rows {
        let n: f64 = row[1].parse().unwrap();
        let s: f64 = row[5].parse().unwrap();
        assert!((s - (n - 1.0).sqrt()).abs() < 1e-12, "n={n} s={s}");
    }
}

#[test]
fn bench_with_no_seeds_is_an_empty_table() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["bench", "--suite", "policies", "--seeds", ""]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 1);
    assert_eq!(code(&run(dir.path(), &["bench", "--suite", "nope"])), 64);
}

#[test]
fn random_suite_writes_manifest_and_files() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "gen", "random", "--n", "4", "--seed", "7", "--count", "3", "--out", "suite",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest = json(dir.path().join("suite/manifest.json"));
    let entries = manifest["instances"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for (k, entry) in entries.iter().enumerate() {
        assert_eq!(entry["seed"], 7 + k as u64);
        let file = dir
            .path()
            .join("suite")
            .join(entry["file"].as_str().unwrap());
        assert_eq!(json(file)["jobs"].as_array().unwrap().len(), 4);
    }
    assert_eq!(
        code(&run(
            dir.path(),
            &["gen", "random", "--n", "4", "--count", "3"]
        )),
        64
    );
}
