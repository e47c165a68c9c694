//! End-to-end tests of the `minviol` binary: exit codes, artifact
//! chaining, and byte-level determinism of the written artifacts.

use std::path::Path;
use std::process::Command;

fn scenario(name: &str) -> String {
    format!("{}/testdata/scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_minviol"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);
    assert_eq!(run(&["plan", "--help"]).0, 0);
}

#[test]
fn unknown_arguments_exit_one() {
    assert_eq!(run(&["definitely-not-a-command"]).0, 1);
    assert_eq!(run(&["plan", "--no-such-flag"]).0, 1);
    assert_eq!(run(&[]).0, 1);
}

#[test]
fn malformed_inputs_exit_one_and_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "not json{").unwrap();
    let out = dir.path().join("out");
    let outs = out.to_str().unwrap();

    let (code, _, err) = run(&[
        "plan", "--scenario", bad.to_str().unwrap(), "--formula", "<>G1", "--out", outs,
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("line 1"), "parse location missing: {err}");

    let (code, _, err) = run(&[
        "plan", "--scenario", dir.path().join("nope.json").to_str().unwrap(),
        "--formula", "<>G1", "--out", outs,
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("nope.json"), "file name missing: {err}");

    let (code, _, err) = run(&[
        "plan", "--scenario", &scenario("s1_corridor.json"),
        "--formula", "<>(G1", "--out", outs,
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("formula"), "formula error missing: {err}");
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let (code, _, _) = run(&[
        "plan", "--scenario", &scenario("s1_corridor.json"), "--formula", "<>G1",
        "--iters", "50", "--out", file.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn plan_artifacts_are_byte_identical_across_runs() {
    let sc = scenario("s1_corridor.json");
    let args = |out: &str| {
        vec![
            "plan".into(), "--scenario".into(), sc.clone(), "--formula".into(),
            "[]!O && <>G1".into(), "--iters".into(), "1500".into(),
            "--seed".into(), "9".into(), "--out".into(), out.to_string(),
        ]
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let a: Vec<String> = args(d.path().to_str().unwrap());
        let refs: Vec<&str> = a.iter().map(|s| s.as_str()).collect();
        assert_eq!(run(&refs).0, 0);
    }
    for name in ["plan.json", "automaton.json"] {
        let a = read(&d1.path().join(name));
        let b = read(&d2.path().join(name));
        assert_eq!(a, b, "{name} differs between identical runs");
        assert!(!a.is_empty());
    }
    let plan: serde_json::Value = serde_json::from_str(&read(&d1.path().join("plan.json"))).unwrap();
    assert_eq!(plan["formula"], "[]!O && <>G1");
    assert!(plan["plan"]["prefix"].is_array());
}

#[test]
fn infeasible_hard_constraint_planning_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "plan", "--scenario", &scenario("s7_adjacent_blocked.json"),
        "--formula", "[]!O && <>G1", "--iters", "3000", "--feasible-only",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("planning failed"), "unexpected stderr: {err}");
}

#[test]
fn oracle_refuses_oversized_grids_with_a_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "oracle", "--scenario", &scenario("s1_corridor.json"), "--formula", "<>G1",
        "--grid-step", "0.001", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("--grid-step 0.010 or larger"), "no usable suggestion: {err}");
}

#[test]
fn missing_upstream_artifacts_name_the_producing_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let sc = scenario("s1_corridor.json");

    let (code, _, err) = run(&["decompose", "--scenario", &sc, "--out", out]);
    assert_eq!(code, 1);
    assert!(err.contains("`minviol plan`"), "decompose hint: {err}");

    let (code, _, err) = run(&["train", "--scenario", &sc, "--out", out]);
    assert_eq!(code, 1);
    assert!(err.contains("`minviol decompose`"), "train hint: {err}");

    let (code, _, err) = run(&["eval", "--scenario", &sc, "--out", out]);
    assert_eq!(code, 1);
    assert!(err.contains("`minviol decompose`"), "eval hint: {err}");

    let (code, _, err) = run(&["report", "--out", out]);
    assert_eq!(code, 1);
    assert!(err.contains("`minviol train`"), "report hint: {err}");
}

#[test]
fn full_pipeline_runs_deterministically_and_reports_monotone_progress() {
    let sc = scenario("s1_corridor.json");
    let chain = |out: &str| {
        let stages: Vec<Vec<String>> = vec![
            vec![
                "plan".into(), "--scenario".into(), sc.clone(), "--formula".into(),
                "[]!O && <>G1".into(), "--iters".into(), "1500".into(), "--seed".into(), "4".into(),
            ],
            vec!["decompose".into()],
            vec![
                "train".into(), "--pop".into(), "8".into(), "--elites".into(), "2".into(),
                "--generations".into(), "3".into(), "--episodes-per-candidate".into(), "2".into(),
                "--check-episodes".into(), "8".into(),
            ],
            vec!["eval".into(), "--episodes".into(), "10".into(), "--cycles".into(), "2".into()],
            vec!["report".into()],
        ];
        for mut stage in stages {
            stage.extend(["--out".into(), out.to_string()]);
            let refs: Vec<&str> = stage.iter().map(|s| s.as_str()).collect();
            let (code, _, err) = run(&refs);
            assert_eq!(code, 0, "stage {:?} failed: {err}", refs[0]);
        }
    };

    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    chain(d1.path().to_str().unwrap());
    chain(d2.path().to_str().unwrap());

    for name in ["plan.json", "tasks.json", "metrics.json"] {
        assert_eq!(
            read(&d1.path().join(name)),
            read(&d2.path().join(name)),
            "{name} differs between identical pipelines"
        );
    }

    // eval reached the policies, so the earlier missing-artifact hint for
    // a trained-but-unevaluated directory has to name `minviol train`.
    let fresh = tempfile::tempdir().unwrap();
    std::fs::copy(d1.path().join("plan.json"), fresh.path().join("plan.json")).unwrap();
    std::fs::copy(d1.path().join("tasks.json"), fresh.path().join("tasks.json")).unwrap();
    let (code, _, err) = run(&[
        "eval", "--scenario", &sc, "--out", fresh.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("`minviol train`"), "eval hint: {err}");

    let report_dir = d1.path().join("report");
    let mut dats: Vec<_> = std::fs::read_dir(&report_dir)
        .expect("report directory exists")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "dat"))
        .collect();
    dats.sort();
    assert!(!dats.is_empty(), "report produced no .dat files");
    for dat in dats {
        let text = read(&dat);
        let mut last = f64::NEG_INFINITY;
        for line in text.lines().filter(|l| !l.starts_with('#')) {
            let best: f64 = line
                .split_whitespace()
                .last()
                .expect("non-empty data line")
                .parse()
                .expect("numeric best column");
            assert!(best >= last, "best column must never decrease in {}", dat.display());
            last = best;
        }
        assert!(last.is_finite(), "no data lines in {}", dat.display());
    }
}
