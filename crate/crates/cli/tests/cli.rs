//! End-to-end CLI behaviour: exit codes, determinism, file formats, and the
//! synth -> detect -> eval flow.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trident"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Small-scale config shared by the flow tests.
const SMALL_CONFIG: &str = r#"
seed = 11
[ensemble]
window = 16
[ensemble.arima]
p = 4
d = 1
q = 0
[ensemble.stl]
period = 96
[ensemble.lstsvr]
train_span = 200
refit_every = 128
[ensemble.pot]
q = 0.002
"#;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("config.toml"), SMALL_CONFIG).unwrap();
        Workspace { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    /// Synthesize a spiky series split into train/test CSVs.
    fn synth_small(&self) {
        let out = run(&[
            "synth",
            "--config",
            &self.arg("config.toml"),
            "--periods",
            "8",
            "--period-len",
            "96",
            "--noise-sigma",
            "0.08",
            "--anomalies",
            "596:1.2,624:1.2,652:1.2,680:1.2,708:1.2,736:1.2",
            "--out",
            &self.arg("all.csv"),
            "--split-at",
            "576",
            "--train-out",
            &self.arg("train.csv"),
            "--test-out",
            &self.arg("test.csv"),
        ]);
        assert_ok(&out);
    }
}

fn line_count(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn synth_default_size_matches_the_synthetic_protocol() {
    let ws = Workspace::new();
    let out = run(&["synth", "--out", &ws.arg("data.csv"), "--seed", "1"]);
    assert_ok(&out);
    let text = fs::read_to_string(ws.path("data.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "timestamp,value,label,KPI ID");
    assert_eq!(lines.count(), 8 * 1440);
}

#[test]
fn detect_emits_one_record_per_test_point_and_is_deterministic() {
    let ws = Workspace::new();
    ws.synth_small();
    for name in ["det_a.jsonl", "det_b.jsonl"] {
        let out = run(&[
            "detect",
            "--config",
            &ws.arg("config.toml"),
            "--train",
            &ws.arg("train.csv"),
            "--test",
            &ws.arg("test.csv"),
            "--out",
            &ws.arg(name),
        ]);
        assert_ok(&out);
    }
    let a = fs::read(ws.path("det_a.jsonl")).unwrap();
    let b = fs::read(ws.path("det_b.jsonl")).unwrap();
    assert_eq!(a, b, "same inputs and seed must give identical bytes");
    // one metadata line plus one record per test point
    assert_eq!(line_count(&ws.path("det_a.jsonl")), 1 + 192);
    let text = fs::read_to_string(ws.path("det_a.jsonl")).unwrap();
    assert!(text.lines().next().unwrap().contains("config_hash"));
}

#[test]
fn detect_csv_format_flattens_learner_columns() {
    let ws = Workspace::new();
    ws.synth_small();
    let out = run(&[
        "detect",
        "--config",
        &ws.arg("config.toml"),
        "--train",
        &ws.arg("train.csv"),
        "--test",
        &ws.arg("test.csv"),
        "--out",
        &ws.arg("det.csv"),
        "--format",
        "csv",
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(ws.path("det.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema_version="));
    let header = lines.next().unwrap();
    assert!(header.starts_with("kpi,index,timestamp,value,warming,ensemble"));
    assert!(header.contains("arima_prediction"));
    assert!(header.contains("lstsvr_z"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 192);
    let cols = header.split(',').count();
    for row in rows {
        assert_eq!(row.split(',').count(), cols);
    }
}

#[test]
fn detect_handles_multiple_kpis_in_one_file() {
    let ws = Workspace::new();
    ws.synth_small();
    // second KPI: the same series under another id
    for name in ["train.csv", "test.csv"] {
        let text = fs::read_to_string(ws.path(name)).unwrap();
        let mut out = String::new();
        for (i, line) in text.lines().enumerate() {
            out.push_str(line);
            out.push('\n');
            if i > 0 {
                out.push_str(&line.replace(",synthetic", ",mirror"));
                out.push('\n');
            }
        }
        fs::write(ws.path(name), out).unwrap();
    }
    let out = run(&[
        "detect",
        "--config",
        &ws.arg("config.toml"),
        "--train",
        &ws.arg("train.csv"),
        "--test",
        &ws.arg("test.csv"),
        "--out",
        &ws.arg("det.jsonl"),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(ws.path("det.jsonl")).unwrap();
    let mirror = text
        .lines()
        .filter(|l| l.contains("\"kpi\":\"mirror\""))
        .count();
    let synthetic = text
        .lines()
        .filter(|l| l.contains("\"kpi\":\"synthetic\""))
        .count();
    assert_eq!(mirror, 192);
    assert_eq!(synthetic, 192);
}

#[test]
fn missing_test_file_exits_3_and_names_the_path() {
    let ws = Workspace::new();
    ws.synth_small();
    let missing = ws.arg("no_such_file.csv");
    let out = run(&[
        "detect",
        "--config",
        &ws.arg("config.toml"),
        "--train",
        &ws.arg("train.csv"),
        "--test",
        &missing,
        "--out",
        &ws.arg("det.jsonl"),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no_such_file.csv"), "stderr: {stderr}");
}

#[test]
fn invalid_configuration_exits_2() {
    let ws = Workspace::new();
    ws.synth_small();
    fs::write(ws.path("bad.toml"), "[ensemble]\nvote_threshold = 5\n").unwrap();
    let out = run(&[
        "detect",
        "--config",
        &ws.arg("bad.toml"),
        "--train",
        &ws.arg("train.csv"),
        "--test",
        &ws.arg("test.csv"),
        "--out",
        &ws.arg("det.jsonl"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn misspelled_config_field_exits_2() {
    let ws = Workspace::new();
    ws.synth_small();
    fs::write(ws.path("typo.toml"), "[ensemble.pot]\nquantile = 0.01\n").unwrap();
    let out = run(&[
        "detect",
        "--config",
        &ws.arg("typo.toml"),
        "--train",
        &ws.arg("train.csv"),
        "--test",
        &ws.arg("test.csv"),
        "--out",
        &ws.arg("det.jsonl"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("quantile"));
}

#[test]
fn computation_failure_exits_4() {
    let ws = Workspace::new();
    // ten points are far too few to fit on
    fs::write(
        ws.path("tiny.csv"),
        "timestamp,value\n0,1\n60,2\n120,1\n180,2\n240,1\n300,2\n360,1\n420,2\n480,1\n540,2\n",
    )
    .unwrap();
    let out = run(&[
        "detect",
        "--config",
        &ws.arg("config.toml"),
        "--train",
        &ws.arg("tiny.csv"),
        "--test",
        &ws.arg("tiny.csv"),
        "--out",
        &ws.arg("det.jsonl"),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn eval_scores_detections_with_ablation_rows() {
    let ws = Workspace::new();
    ws.synth_small();
    let out = run(&[
        "detect",
        "--config",
        &ws.arg("config.toml"),
        "--train",
        &ws.arg("train.csv"),
        "--test",
        &ws.arg("test.csv"),
        "--out",
        &ws.arg("det.jsonl"),
    ]);
    assert_ok(&out);
    let out = run(&[
        "eval",
        "--config",
        &ws.arg("config.toml"),
        "--detections",
        &ws.arg("det.jsonl"),
        "--labels",
        &ws.arg("test.csv"),
        "--ablation",
        "--out",
        &ws.arg("report.json"),
    ]);
    assert_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ws.path("report.json")).unwrap()).unwrap();
    assert_eq!(report["t_window"], 7);
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 1 + 3, "ensemble row plus one per learner");
    assert_eq!(results[0]["scope"], "ensemble");
    let recall = results[0]["overall"]["recall"].as_f64().unwrap();
    assert!(recall >= 0.9, "recall {recall}");
}

#[test]
fn eval_handles_perfect_and_empty_prediction_sets() {
    let ws = Workspace::new();
    fs::write(
        ws.path("labels.csv"),
        "timestamp,value,label,KPI ID\n0,1.0,0,k\n60,5.0,1,k\n120,1.0,0,k\n180,5.0,1,k\n",
    )
    .unwrap();
    let detection = |ts: i64, flag: bool| {
        format!(
            r#"{{"kpi":"k","index":{},"timestamp":{ts},"value":1.0,"warming":false,"learners":{{}},"ensemble":{flag},"thresholds":{{}}}}"#,
            ts / 60
        )
    };
    // perfect predictions
    let perfect: String = [
        detection(0, false),
        detection(60, true),
        detection(120, false),
        detection(180, true),
    ]
    .join("\n");
    fs::write(ws.path("perfect.jsonl"), perfect).unwrap();
    let out = run(&[
        "eval",
        "--detections",
        &ws.arg("perfect.jsonl"),
        "--labels",
        &ws.arg("labels.csv"),
    ]);
    assert_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(report["results"][0]["overall"]["f1"], 1.0);

    // empty prediction set against non-empty truth
    let empty: String = [
        detection(0, false),
        detection(60, false),
        detection(120, false),
        detection(180, false),
    ]
    .join("\n");
    fs::write(ws.path("empty.jsonl"), empty).unwrap();
    let out = run(&[
        "eval",
        "--detections",
        &ws.arg("empty.jsonl"),
        "--labels",
        &ws.arg("labels.csv"),
    ]);
    assert_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(report["results"][0]["overall"]["precision"], 0.0);
    assert_eq!(report["results"][0]["overall"]["recall"], 0.0);
}

#[test]
fn eval_rejects_misaligned_files() {
    let ws = Workspace::new();
    fs::write(
        ws.path("labels.csv"),
        "timestamp,value,label,KPI ID\n0,1.0,0,k\n60,5.0,1,k\n",
    )
    .unwrap();
    // timestamp 90 does not exist in the labels file
    fs::write(
        ws.path("det.jsonl"),
        r#"{"kpi":"k","index":0,"timestamp":90,"value":1.0,"warming":false,"learners":{},"ensemble":false,"thresholds":{}}"#,
    )
    .unwrap();
    let out = run(&[
        "eval",
        "--detections",
        &ws.arg("det.jsonl"),
        "--labels",
        &ws.arg("labels.csv"),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not present"));
}

#[test]
fn entropy_rejects_order_one_and_writes_overlay() {
    let ws = Workspace::new();
    ws.synth_small();
    let out = run(&[
        "entropy",
        "--input",
        &ws.arg("train.csv"),
        "--order",
        "1",
        "--out",
        &ws.arg("overlay.csv"),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "order 1 carries no ordinal information"
    );

    let out = run(&[
        "entropy",
        "--input",
        &ws.arg("train.csv"),
        "--window",
        "60",
        "--order",
        "3",
        "--out",
        &ws.arg("overlay.csv"),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(ws.path("overlay.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "timestamp,value,entropy");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 576 - 60 + 1);
    for row in rows {
        let h: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&h));
    }
}

fn csv_to_stream_lines(csv: &Path) -> Vec<String> {
    fs::read_to_string(csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|row| {
            let mut parts = row.split(',');
            let ts = parts.next().unwrap();
            let value = parts.next().unwrap();
            format!(r#"{{"timestamp": {ts}, "value": {value}}}"#)
        })
        .collect()
}

#[test]
fn stream_resume_produces_identical_suffix() {
    let ws = Workspace::new();
    ws.synth_small();
    let lines = csv_to_stream_lines(&ws.path("test.csv"));
    let mid = lines.len() / 2;
    fs::write(ws.path("stream_all.jsonl"), lines.join("\n")).unwrap();
    fs::write(ws.path("stream_head.jsonl"), lines[..mid].join("\n")).unwrap();
    fs::write(ws.path("stream_tail.jsonl"), lines[mid..].join("\n")).unwrap();

    let uninterrupted = run(&[
        "stream",
        "--config",
        &ws.arg("config.toml"),
        "--train",
        &ws.arg("train.csv"),
        "--input",
        &ws.arg("stream_all.jsonl"),
    ]);
    assert_ok(&uninterrupted);
    let full: Vec<String> = String::from_utf8(uninterrupted.stdout)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(full.len(), lines.len());

    let head = run(&[
        "stream",
        "--config",
        &ws.arg("config.toml"),
        "--train",
        &ws.arg("train.csv"),
        "--input",
        &ws.arg("stream_head.jsonl"),
        "--checkpoint-out",
        &ws.arg("ckpt.json"),
    ]);
    assert_ok(&head);
    let tail = run(&[
        "stream",
        "--resume",
        &ws.arg("ckpt.json"),
        "--input",
        &ws.arg("stream_tail.jsonl"),
    ]);
    assert_ok(&tail);
    let resumed: Vec<String> = String::from_utf8(tail.stdout)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(resumed, full[mid..].to_vec(), "resumed suffix must match");
}

#[test]
fn stream_skips_malformed_and_rejects_out_of_order_lines() {
    let ws = Workspace::new();
    ws.synth_small();
    let lines = csv_to_stream_lines(&ws.path("test.csv"));
    let mut corrupted = vec![lines[0].clone()];
    corrupted.push("this is not json".to_string());
    corrupted.push(lines[0].clone()); // repeated timestamp: out of order
    corrupted.push(lines[1].clone());
    fs::write(ws.path("stream_bad.jsonl"), corrupted.join("\n")).unwrap();

    let out = run(&[
        "stream",
        "--config",
        &ws.arg("config.toml"),
        "--train",
        &ws.arg("train.csv"),
        "--input",
        &ws.arg("stream_bad.jsonl"),
    ]);
    assert_ok(&out);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2, "two valid points processed");
    let stderr = String::from_utf8(out.stderr).unwrap();
    let summary = stderr
        .lines()
        .find(|l| l.contains("points_per_second"))
        .expect("summary line");
    let parsed: serde_json::Value = serde_json::from_str(summary).unwrap();
    assert_eq!(parsed["points"], 2);
    assert_eq!(parsed["skipped_malformed"], 1);
    assert_eq!(parsed["rejected_out_of_order"], 1);
}

#[test]
fn stream_reads_stdin_and_selects_kpi() {
    use std::io::Write;
    use std::process::Stdio;

    let ws = Workspace::new();
    ws.synth_small();
    // train file with a second KPI so --kpi has to disambiguate
    let text = fs::read_to_string(ws.path("train.csv")).unwrap();
    let mut doubled = String::new();
    for (i, line) in text.lines().enumerate() {
        doubled.push_str(line);
        doubled.push('\n');
        if i > 0 {
            doubled.push_str(&line.replace(",synthetic", ",mirror"));
            doubled.push('\n');
        }
    }
    fs::write(ws.path("train2.csv"), doubled).unwrap();

    let lines = csv_to_stream_lines(&ws.path("test.csv"));
    let mut child = bin()
        .args([
            "stream",
            "--config",
            &ws.arg("config.toml"),
            "--train",
            &ws.arg("train2.csv"),
            "--kpi",
            "synthetic",
            "--input",
            "-",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(lines[..10].join("\n").as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_ok(&out);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 10);

    // without --kpi the two-series file is ambiguous
    let out = run(&[
        "stream",
        "--config",
        &ws.arg("config.toml"),
        "--train",
        &ws.arg("train2.csv"),
        "--input",
        &ws.arg("test.csv"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn restore_of_corrupt_checkpoint_fails_cleanly() {
    let ws = Workspace::new();
    fs::write(ws.path("ckpt.json"), "{\"schema_version\":1,\"pipel").unwrap();
    fs::write(ws.path("in.jsonl"), "{\"timestamp\": 0, \"value\": 1.0}").unwrap();
    let out = run(&[
        "stream",
        "--resume",
        &ws.arg("ckpt.json"),
        "--input",
        &ws.arg("in.jsonl"),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt"));
}
