use std::process::Command;

use serde_json::Value;

fn run(args: &[&str], env: &[(&str, &str)]) -> (Value, i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_feistel-indiff"));
    cmd.args(args).env_remove("FEISTEL_INDIFF_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (
        v,
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("feistel-indiff-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn outputs_carry_the_schema_version() {
    let (v, code, _) = run(&["attack6", "--n", "12", "--trials", "20"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], "1");
    assert_eq!(v["command"], "attack6");
    assert_eq!(v["trials"], 20);
}

#[test]
fn config_errors_exit_with_2() {
    for args in [
        vec!["attack6", "--n", "1"],
        vec!["attack6", "--n", "33"],
        vec!["invariants", "--scenario", "S7"],
        vec!["invariants", "--scenario", "S4"],
        vec!["invariants", "--n", "20", "--monitor"],
        vec!["indiff-mc", "--trials", "50"],
        vec!["indiff-mc", "--sim", "sim6", "--scenario-a", "S2"],
        vec!["urp-vs-tsrf", "--jobs", "0"],
        vec!["replay", "/nonexistent/record.jsonl"],
        vec!["no-such-command"],
    ] {
        let (_, code, err) = run(&args, &[]);
        assert_eq!(code, 2, "{args:?}: {err}");
    }
}

#[test]
fn threshold_failures_exit_with_1() {
    let (v, code, _) = run(
        &[
            "attack6",
            "--n",
            "12",
            "--trials",
            "10",
            "--min-abort-rate",
            "1.5",
        ],
        &[],
    );
    assert_eq!(code, 1);
    assert_eq!(v["pass"], false);
    let (v, code, _) = run(
        &[
            "invariants",
            "--n",
            "8",
            "--q",
            "3",
            "--trials",
            "5",
            "--inject-overwrite",
        ],
        &[],
    );
    assert_eq!(code, 1);
    assert_eq!(v["invariants"]["no_overwrite"]["failed"], 5);
    assert!(v["invariants"]["no_overwrite"]["first_witness"]
        .as_str()
        .unwrap()
        .contains("forceVal"));
}

#[test]
fn seed_falls_back_to_the_environment() {
    let (a, _, _) = run(
        &["attack6", "--n", "12", "--trials", "5"],
        &[("FEISTEL_INDIFF_SEED", "42")],
    );
    assert_eq!(a["seed"], 42);
    let (b, _, _) = run(
        &["attack6", "--n", "12", "--trials", "5", "--seed", "9"],
        &[("FEISTEL_INDIFF_SEED", "42")],
    );
    assert_eq!(b["seed"], 9);
}

#[test]
fn csv_rows_are_in_trial_order_regardless_of_jobs() {
    let one = tmp("one.csv");
    let many = tmp("many.csv");
    for (path, jobs) in [(&one, "1"), (&many, "4")] {
        let (_, code, _) = run(
            &[
                "invariants",
                "--n",
                "10",
                "--q",
                "4",
                "--trials",
                "40",
                "--jobs",
                jobs,
                "--csv",
                path.to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(code, 0);
    }
    let strip = |p: &std::path::Path| -> Vec<String> {
        let text = std::fs::read_to_string(p).unwrap();
        // Drop the wall-time column before comparing.
        text.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    let (a, b) = (strip(&one), strip(&many));
    assert_eq!(a.len(), 41);
    assert!(a[0].starts_with("seed,scenario,output"));
    assert_eq!(a, b);
}

#[test]
fn record_then_replay_is_identical_and_detects_edits() {
    let path = tmp("rec.jsonl");
    let p = path.to_str().unwrap();
    let (_, code, err) = run(
        &[
            "record",
            "--n",
            "10",
            "--q",
            "5",
            "--seed",
            "3",
            "--complete-chains",
            "--out",
            p,
        ],
        &[],
    );
    assert_eq!(code, 0, "{err}");
    let (a, code, _) = run(&["replay", p], &[]);
    assert_eq!(code, 0);
    assert_eq!(a["replay"]["identical"], true);
    let (b, _, _) = run(&["replay", p], &[]);
    assert_eq!(a, b);

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    let (v, code, _) = run(&["replay", p], &[]);
    assert_eq!(code, 1);
    assert_eq!(v["replay"]["identical"], false);
}

#[test]
fn corpus_scripts_drive_indiff_mc() {
    use feistel_indiff::attacks::random_distinguisher;
    use feistel_indiff::Width;
    let w = Width::new(8).unwrap();
    let corpus: String = (0..5)
        .map(|s| random_distinguisher(w, 14, 3, s).to_json() + "\n")
        .collect();
    let path = tmp("corpus.jsonl");
    std::fs::write(&path, corpus).unwrap();
    let (v, code, err) = run(
        &[
            "indiff-mc",
            "--n",
            "8",
            "--trials",
            "200",
            "--corpus",
            path.to_str().unwrap(),
            "--scenario-b",
            "S1",
        ],
        &[],
    );
    assert_eq!(code, 0, "{err}");
    assert_eq!(v["scenario_b"], "S1/sim14");
    assert_eq!(v["estimate"]["trials"], 200);
    let (_, code, _) = run(
        &[
            "indiff-mc",
            "--n",
            "10",
            "--trials",
            "200",
            "--corpus",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code, 2);
}
