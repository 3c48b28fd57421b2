use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn torusym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torusym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: [&str; 8] = [
    "--epochs",
    "3",
    "--warmup-epochs",
    "1",
    "--hidden",
    "8,8",
    "--batch-size",
    "64",
];

fn small_data(dir: &Path) -> std::path::PathBuf {
    let data = dir.join("d.jsonl");
    let o = torusym(&[
        "gen-data",
        "--task",
        "rotated4d",
        "--n-samples",
        "300",
        "--sigma",
        "0.1",
        "--seed",
        "3",
        "--out",
        p(&data),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    data
}

fn train_into(data: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--data", p(data), "--out", p(out), "--seed", "5"];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(extra);
    torusym(&args)
}

fn without_wall_clock(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wallClock");
    v
}

#[test]
fn gen_data_writes_meta_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pend.jsonl");
    let o = torusym(&[
        "gen-data",
        "--task",
        "pendulum6d",
        "--n-samples",
        "8000",
        "--sigma",
        "0.1",
        "--seed",
        "7",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    let meta = &header["meta"];
    assert_eq!(meta["taskName"], "pendulum6d");
    assert_eq!(meta["n"], 6);
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["noiseSigma"], 0.1);
    assert!(meta["trueGenerator"].is_object() || meta["trueGenerator"].is_array());
    assert_eq!(lines.count(), 8000);
}

#[test]
fn gen_data_is_deterministic_in_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let c = dir.path().join("c.jsonl");
    for (out, seed) in [(&a, "1"), (&b, "1"), (&c, "2")] {
        let o = torusym(&[
            "gen-data",
            "--task",
            "random",
            "--n",
            "6",
            "--n-samples",
            "50",
            "--seed",
            seed,
            "--out",
            p(out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn bad_arguments_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.jsonl");
    let o = torusym(&[
        "gen-data",
        "--task",
        "pendulum6d",
        "--sigma",
        "-1",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = torusym(&["gen-data", "--task", "nope", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let o = torusym(&["gen-data", "--task", "random", "--n", "5", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_or_corrupt_inputs_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.jsonl");
    let o = torusym(&["train", "--data", p(&missing), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.jsonl"));

    let corrupt = dir.path().join("corrupt.jsonl");
    fs::write(&corrupt, "{\"meta\": 3}\n").unwrap();
    let o = torusym(&["train", "--data", p(&corrupt), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("corrupt.jsonl"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "epochs = 3\nlearningRate = 0.1\n").unwrap();
    let o = torusym(&[
        "train",
        "--data",
        p(&data),
        "--config",
        p(&cfg),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("learningRate"));
}

#[test]
fn config_file_and_flags_are_both_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# small run\nepochs = 2\nwarmupEpochs = 1\nlr = 0.004\nhidden = 8\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let o = torusym(&[
        "train",
        "--data",
        p(&data),
        "--config",
        p(&cfg),
        "--epochs",
        "3",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["config"]["epochs"], 3);
    assert_eq!(report["config"]["lr"], 0.004);
    assert_eq!(report["config"]["hidden"], serde_json::json!([8]));
    let inv = &report["invocation"]["config"];
    assert_eq!(inv["fileValues"]["epochs"], 2);
    assert_eq!(inv["flagValues"]["epochs"], 3);
    assert_eq!(inv["effective"], report["config"]);
    assert_eq!(report["lossCurve"].as_array().unwrap().len(), 3);
}

#[test]
fn train_twice_gives_identical_metrics_and_eval_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = train_into(&data, &a, &[]);
    let ob = train_into(&data, &b, &[]);
    assert_eq!(oa.status.code(), Some(0), "{}", stderr(&oa));
    assert_eq!(ob.status.code(), Some(0), "{}", stderr(&ob));
    assert_eq!(stdout(&oa), stdout(&ob));
    assert_eq!(
        fs::read(a.join("checkpoint.json")).unwrap(),
        fs::read(b.join("checkpoint.json")).unwrap()
    );

    let ra = read_json(&a.join("report.json"));
    let rb = read_json(&b.join("report.json"));
    let metrics = |mut v: Value| {
        v.as_object_mut().unwrap().remove("invocation");
        without_wall_clock(v)
    };
    assert_eq!(metrics(ra.clone()).to_string(), metrics(rb).to_string());

    let eval_out = dir.path().join("eval.json");
    let ckpt = a.join("checkpoint.json");
    let mut args = vec![
        "eval",
        "--checkpoint",
        p(&ckpt),
        "--data",
        p(&data),
        "--out",
        p(&eval_out),
        "--seed",
        "5",
    ];
    args.extend_from_slice(&SMALL);
    let oe = torusym(&args);
    assert_eq!(oe.status.code(), Some(0), "{}", stderr(&oe));
    let re = read_json(&eval_out);
    for key in [
        "testMse",
        "testLoss",
        "invarianceError",
        "cosineSimilarity",
        "spectralCosineSimilarity",
        "recoveredLambda",
        "survivingFrequencies",
        "learnedGenerator",
        "nullity",
        "split",
    ] {
        assert_eq!(re[key], ra[key], "{key}");
    }
    assert!(re["lossCurve"].as_array().unwrap().is_empty());
    assert_eq!(re["invocation"]["command"], "eval");
}

#[test]
fn eval_rejects_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let out = dir.path().join("a");
    assert!(train_into(&data, &out, &[]).status.success());
    let six = dir.path().join("six.jsonl");
    assert!(torusym(&[
        "gen-data",
        "--task",
        "random",
        "--n",
        "6",
        "--n-samples",
        "40",
        "--out",
        p(&six)
    ])
    .status
    .success());
    let o = torusym(&[
        "eval",
        "--checkpoint",
        p(&out.join("checkpoint.json")),
        "--data",
        p(&six),
        "--out",
        p(&dir.path().join("e.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn classification_needs_logistic_loss() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("c.jsonl");
    assert!(torusym(&[
        "gen-data",
        "--task",
        "classification",
        "--n-samples",
        "300",
        "--out",
        p(&data)
    ])
    .status
    .success());
    let o = train_into(&data, &dir.path().join("a"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let out = dir.path().join("b");
    let o = train_into(&data, &out, &["--loss-kind", "logistic"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let acc = read_json(&out.join("report.json"))["accuracy"]
        .as_f64()
        .unwrap();
    assert!((0.0..=1.0).contains(&acc));
    assert!(stdout(&o).contains("accuracy="));
}

#[test]
fn default_noise_sweep_has_ten_points_and_report_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let mut args = vec![
        "sweep",
        "--axis",
        "noise",
        "--repeats",
        "1",
        "--jobs",
        "2",
        "--base-samples",
        "200",
        "--out",
        p(&out),
    ];
    args.extend_from_slice(&SMALL);
    let o = torusym(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let runs = fs::read_dir(out.join("runs")).unwrap().count();
    assert_eq!(runs, 10);
    let agg = read_json(&out.join("aggregate.json"));
    assert_eq!(agg["points"].as_array().unwrap().len(), 10);
    let csv = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.starts_with("axisValue,meanCos,stdCos,meanLoss,stdLoss,nRuns"));

    let o = torusym(&["report", "--dir", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let md = fs::read_to_string(out.join("summary.md")).unwrap();
    assert!(md.contains("Test MSE"));
    assert!(md.contains("Cosine similarity"));
    let rows = read_json(&out.join("summary.json"));
    assert_eq!(rows[0]["nRuns"], 10);
}

#[test]
fn sweep_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let mut args = vec![
            "sweep",
            "--axis",
            "samples",
            "--values",
            "150,300",
            "--repeats",
            "2",
            "--jobs",
            jobs,
            "--out",
            p(&out),
        ];
        args.extend_from_slice(&SMALL);
        let o = torusym(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read_to_string(out.join("aggregate.csv")).unwrap()
    };
    assert_eq!(run("one", "1"), run("three", "3"));
}

#[test]
fn report_on_empty_dir_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = torusym(&["report", "--dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn diverging_training_exits_with_two_and_keeps_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let run = dir.path().join("run");
    let o = train_into(&data, &run, &["--lr", "1e300"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let report = read_json(&run.join("report.json"));
    assert!(report["failure"].is_string());
    assert!(stderr(&o).contains("non-finite") || stderr(&o).contains("failed"));
}
