//! End-to-end behavior of the `wemm` binary: exit codes, file round trips,
//! and the norm policies.

use std::fs;
use std::process::Command;

use tempfile::tempdir;

fn wemm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wemm"))
}

const BASE_CONFIG: &str = r#"{
  "schema": 1,
  "stream": { "generator": { "kind": "gaussian_noise", "sigma": 0.3, "dim": 2, "rounds": 80, "seed": 5 } },
  "learners": [
    { "algorithm": "wemm", "b": 2.0 },
    { "algorithm": "aar", "b": 2.0 },
    { "algorithm": "ridge", "b": 2.0 }
  ],
  "certifications": [ { "id": "theorem2" }, { "id": "theorem3" } ]
}"#;

#[test]
fn run_passes_and_writes_artifacts() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, BASE_CONFIG).unwrap();
    let out = dir.path().join("out");
    let status = wemm()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for file in [
        "stream.csv",
        "stream.truth.json",
        "trace_wemm.csv",
        "trace_aar.csv",
        "trace_ridge.csv",
        "report.json",
    ] {
        assert!(out.join(file).exists(), "missing {file}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["config_hash"].as_str().unwrap().len() == 64);
    assert_eq!(report["learners"].as_array().unwrap().len(), 3);
    assert!(report["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .all(|b| b["pass"] == true));

    // All learners consumed the identical stream: t and y columns match.
    let read_cols = |name: &str| -> Vec<(String, String)> {
        fs::read_to_string(out.join(name))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].to_string(), f[1].to_string())
            })
            .collect()
    };
    assert_eq!(read_cols("trace_wemm.csv"), read_cols("trace_aar.csv"));
    assert_eq!(read_cols("trace_wemm.csv"), read_cols("trace_ridge.csv"));
}

#[test]
fn invalid_regularizer_is_a_config_error() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{ "schema": 1,
             "stream": { "generator": { "kind": "realizable", "dim": 2, "rounds": 10, "seed": 1 } },
             "learners": [ { "algorithm": "wemm", "b": 1.0 } ] }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = wemm()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    // Validation fires before any artifact is written.
    assert!(!out.join("report.json").exists());
}

#[test]
fn unknown_schema_is_a_config_error() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        BASE_CONFIG.replace("\"schema\": 1", "\"schema\": 9"),
    )
    .unwrap();
    let status = wemm()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn tampered_trace_fails_certification_with_exit_3() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, BASE_CONFIG).unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        wemm()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    // Inflate the final cumulative loss so the equality certificate breaks.
    let trace_path = out.join("trace_wemm.csv");
    let text = fs::read_to_string(&trace_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.last().unwrap().clone();
    let mut fields: Vec<String> = last.split(',').map(String::from).collect();
    let bumped: f64 = fields[5].parse::<f64>().unwrap() + 7.0;
    fields[5] = bumped.to_string();
    *lines.last_mut().unwrap() = fields.join(",");
    fs::write(&trace_path, lines.join("\n") + "\n").unwrap();

    let status = wemm()
        .args(["certify", "--trace"])
        .arg(&trace_path)
        .arg("--stream")
        .arg(out.join("stream.csv"))
        .args(["--theorem", "theorem2", "--b", "2.0"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn certify_matches_run_reports() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, BASE_CONFIG).unwrap();
    let out = dir.path().join("out");
    wemm()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    let output = wemm()
        .args(["certify", "--trace"])
        .arg(out.join("trace_wemm.csv"))
        .arg("--stream")
        .arg(out.join("stream.csv"))
        .args(["--theorem", "theorem2", "--b", "2.0"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("PASS theorem2"), "stdout: {stdout}");
}

#[test]
fn gen_then_run_from_csv_reproduces_the_generator_run() {
    let dir = tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{ "kind": "gaussian_noise", "sigma": 0.3, "dim": 2, "rounds": 80, "seed": 5 }"#,
    )
    .unwrap();
    let csv = dir.path().join("stream.csv");
    assert_eq!(
        wemm()
            .args(["gen", "--spec"])
            .arg(&spec)
            .arg("--out")
            .arg(&csv)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    assert!(dir.path().join("stream.truth.json").exists());

    let config = dir.path().join("config.json");
    fs::write(
        &config,
        format!(
            r#"{{ "schema": 1, "stream": {{ "csv": {:?} }},
                 "learners": [ {{ "algorithm": "wemm", "b": 2.0 }} ],
                 "certifications": [ {{ "id": "theorem2" }} ] }}"#,
            csv.display().to_string()
        ),
    )
    .unwrap();
    let out_csv = dir.path().join("out_csv");
    assert_eq!(
        wemm()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_csv)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );

    // The generator-sourced run produces the identical trace.
    let gen_config = dir.path().join("gen_config.json");
    fs::write(
        &gen_config,
        r#"{ "schema": 1,
             "stream": { "generator": { "kind": "gaussian_noise", "sigma": 0.3, "dim": 2, "rounds": 80, "seed": 5 } },
             "learners": [ { "algorithm": "wemm", "b": 2.0 } ],
             "certifications": [ { "id": "theorem2" } ] }"#,
    )
    .unwrap();
    let out_gen = dir.path().join("out_gen");
    wemm()
        .args(["run", "--config"])
        .arg(&gen_config)
        .arg("--out")
        .arg(&out_gen)
        .status()
        .unwrap();
    assert_eq!(
        fs::read_to_string(out_csv.join("trace_wemm.csv")).unwrap(),
        fs::read_to_string(out_gen.join("trace_wemm.csv")).unwrap()
    );
}

#[test]
fn reject_policy_aborts_and_prescale_recovers() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("big.csv");
    fs::write(&csv, "t,y,x_0,x_1\n1,1.0,1.5,0.0\n2,-0.5,0.3,0.4\n").unwrap();
    let mk_config = |policy: &str| {
        format!(
            r#"{{ "schema": 1, "stream": {{ "csv": {:?} }},
                 "learners": [ {{ "algorithm": "wemm", "b": 2.0 }} ],
                 "norm_policy": {policy:?} }}"#,
            csv.display().to_string()
        )
    };
    let reject = dir.path().join("reject.json");
    fs::write(&reject, mk_config("reject")).unwrap();
    let status = wemm()
        .args(["run", "--config"])
        .arg(&reject)
        .arg("--out")
        .arg(dir.path().join("out_reject"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let prescale = dir.path().join("prescale.json");
    fs::write(&prescale, mk_config("prescale")).unwrap();
    let status = wemm()
        .args(["run", "--config"])
        .arg(&prescale)
        .arg("--out")
        .arg(dir.path().join("out_prescale"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // After prescaling by 1/1.5 the largest-norm input lands on the unit
    // sphere.
    let trace = fs::read_to_string(dir.path().join("out_prescale").join("trace_wemm.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3);
}

#[test]
fn kernel_learner_runs_and_warns_on_large_self_kernel() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.json");
    // A polynomial kernel with offset pushes K(x, x) above 1.
    fs::write(
        &config,
        r#"{ "schema": 1,
             "stream": { "generator": { "kind": "gaussian_noise", "sigma": 0.2, "dim": 2, "rounds": 60, "seed": 3 } },
             "learners": [
               { "algorithm": "wemm", "b": 2.0 },
               { "algorithm": "kernel_wemm", "b": 2.0, "kernel": { "kind": "polynomial", "degree": 2, "offset": 1.0 } },
               { "algorithm": "rls", "b": 1.0, "r": 0.95 },
               { "algorithm": "arowr", "b": 1.0, "r": 1.0 }
             ],
             "certifications": [ { "id": "theorem2" } ] }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = wemm()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("warning"), "stderr: {stderr}");
    assert!(out.join("trace_kernel_wemm.csv").exists());
    assert!(out.join("trace_rls.csv").exists());
    assert!(out.join("trace_arowr.csv").exists());
}

#[test]
fn seed_override_changes_the_stream() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, BASE_CONFIG).unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for (out, seed) in [(&out_a, "5"), (&out_b, "6")] {
        wemm()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .args(["--seed-override", seed])
            .status()
            .unwrap();
    }
    assert_ne!(
        fs::read_to_string(out_a.join("stream.csv")).unwrap(),
        fs::read_to_string(out_b.join("stream.csv")).unwrap()
    );
}
