use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsdc-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn example_run_writes_transcript_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = sim(&["run", "--example", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let transcript = fs::read_to_string(out.join("transcript.jsonl")).unwrap();
    let bell: Vec<String> = transcript
        .lines()
        .filter_map(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .filter(|v| v["event"] == "bell_measure" && v["set"] == "M")
        .flat_map(|v| {
            v["results"]
                .as_array()
                .unwrap()
                .iter()
                .map(|r| r.as_str().unwrap().to_string())
                .collect::<Vec<_>>()
        })
        .collect();
    assert_eq!(bell, ["Phi+", "Psi+", "Phi+", "Phi-", "Phi-"]);
    assert!(
        transcript.contains("\"decoded\":\"011010\""),
        "{transcript}"
    );

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["completed"], true);
}

#[test]
fn empty_message_completes_with_empty_output() {
    let o = sim(&["run", "--message", "", "--check-bits", "0", "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["completed"], true);
}

#[test]
fn aborted_runs_exit_with_two() {
    let mut aborted = 0;
    for seed in 0..32 {
        let o = sim(&[
            "run",
            "--adversary",
            "impersonate-bob",
            "--seed",
            &seed.to_string(),
        ]);
        match code(&o) {
            0 => {}
            2 => {
                aborted += 1;
                assert_eq!(json(&o)["abort_stage"], "authenticate_bob");
            }
            c => panic!("exit {c}"),
        }
    }
    // k = 2: each seed aborts with chance 15/16.
    assert!(aborted >= 24, "{aborted}");
}

#[test]
fn config_errors_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sim(&["run", "--no-such-flag"])), 64);
    assert_eq!(code(&sim(&["run", "--protocol", "bb84"])), 64);
    assert_eq!(code(&sim(&["run", "--message", "101"])), 64, "odd payload");
    assert_eq!(
        code(&sim(&["run", "--protocol", "qd"])),
        64,
        "dialogue needs bob_message"
    );
    assert_eq!(code(&sim(&["run", "--noise-p", "1.5"])), 64);
    let cfg = write_config(dir.path(), "protocol = 'qsdc'\nunknown_key = 1\n");
    let o = sim(&["run", "--config", &cfg]);
    assert_eq!(code(&o), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown_key"));
}

#[test]
fn io_errors_have_their_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        code(&sim(&["run", "--config", missing.to_str().unwrap()])),
        74
    );
    let file = dir.path().join("plain-file");
    fs::write(&file, "").unwrap();
    let under_file = file.join("out");
    assert_eq!(
        code(&sim(&["run", "--out", under_file.to_str().unwrap()])),
        74
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "trials = 7\nseed = 1\n[output]\nformat = 'doc'\n",
    );
    let o = sim(&["montecarlo", "--config", &cfg, "--trials", "3"]);
    assert_eq!(code(&o), 0);
    let s = json(&o);
    assert_eq!(s["trials"], 3);
    assert_eq!(s["master_seed"], 1);
}

#[test]
fn montecarlo_csv_is_byte_identical_across_invocations() {
    let args = [
        "montecarlo",
        "--trials",
        "40",
        "--seed",
        "9",
        "--noise-p",
        "0.1",
        "--format",
        "csv",
    ];
    let a = sim(&args);
    let b = sim(&args);
    let c = sim(&[&args[..], &["--execution", "sequential"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema_version=1");
    assert_eq!(
        lines[1],
        "trial,status,abort_stage,eps_z,eps_x,eps_e,detected"
    );
    assert_eq!(lines.len(), 2 + 40 + 2);
}

#[test]
fn noiseless_campaign_has_zero_rates() {
    let o = sim(&["montecarlo", "--trials", "10", "--format", "csv"]);
    let text = stdout(&o);
    for line in text.lines().skip(2).take(10) {
        assert!(line.ends_with(",completed,,0,0,0,0"), "{line}");
    }
}

#[test]
fn montecarlo_writes_files_into_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = sim(&[
        "montecarlo",
        "--trials",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("trials.csv").exists());
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(s["schema_version"], 1);
}

#[test]
fn verify_examples_passes() {
    let o = sim(&["verify-examples"]);
    assert_eq!(code(&o), 0);
    let reports = json(&o);
    assert_eq!(reports.as_array().unwrap().len(), 3);
    assert!(reports
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["divergence"].is_null() && r["error"].is_null()));
}

#[test]
fn metrics_subcommands() {
    assert_eq!(
        json(&sim(&["metrics", "capacity", "0", "0", "0"]))["capacity"],
        2.0
    );
    assert_eq!(
        json(&sim(&["metrics", "detection", "--k", "2"]))["detection"],
        0.9375
    );
    let l = json(&sim(&["metrics", "lemma1", "0.25", "0.25", "0.25", "0.25"]));
    assert_eq!(
        (l["lhs"].as_f64(), l["rhs"].as_f64(), &l["holds"]),
        (Some(2.0), Some(2.0), &serde_json::json!(true))
    );
    assert_eq!(
        stdout(&sim(&["metrics", "entropy", "0.5", "--format", "csv"])),
        "x,entropy\n0.5,1.0\n"
    );
    assert_eq!(code(&sim(&["metrics", "entropy", "1.5"])), 65);
    assert_eq!(
        code(&sim(&["metrics", "lemma1", "0.5", "0.5", "0.5", "0.5"])),
        65
    );
}
