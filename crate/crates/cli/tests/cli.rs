use std::path::Path;
use std::process::{Command, Output};

use beamcast_core::gru::{serialize_model, GruDims, GruParams};
use beamcast_core::train::Normalizer;

fn beamcast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamcast")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = beamcast(dir, args);
    assert_eq!(out.status.code(), Some(0), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = beamcast(dir, args);
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

/// Small synthetic series plus a quickly trained model with a 24-slot window.
fn trained(dir: &Path) {
    ok(dir, &["fixture", "--kind", "milan", "--slots", "300", "--seed", "2"]);
    ok(dir, &["train", "--series", "series.csv", "--window", "24", "--hidden", "6", "--epochs", "2", "--steps", "4", "--batch", "8"]);
}

#[test]
fn ingest_reports_and_writes_sample() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["fixture", "--kind", "sample"]);
    let stdout = ok(d.path(), &["ingest", "--raw", "sample_raw.tsv", "--map", "sector_map.txt"]);
    assert!(stdout.contains("slots: 5"));
    assert!(stdout.contains("totals: A=13 B=11 C=11 D=18"));
    assert!(stdout.contains("# beamcast ingest resolved config"));
    assert!(read(d.path(), "series.csv").starts_with("time,A,B,C,D\n2013-11-17T22:10:00Z,3,3,3,5\n"));
}

#[test]
fn ingest_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["fixture", "--kind", "sample"]);
    std::fs::write(d.path().join("empty.tsv"), "").unwrap();
    std::fs::write(d.path().join("stranger.tsv"), "4242\t1384726200000\t39\t1.0\n").unwrap();

    let (c, err) = code(d.path(), &["ingest", "--raw", "empty.tsv", "--map", "sector_map.txt"]);
    assert_eq!(c, 2);
    assert!(err.contains("no records"), "{}", err);
    let (c, err) = code(d.path(), &["ingest", "--raw", "stranger.tsv", "--map", "sector_map.txt"]);
    assert_eq!(c, 2);
    assert!(err.contains("4242"), "{}", err);
    let (c, _) = code(d.path(), &["ingest", "--raw", "missing.tsv", "--map", "sector_map.txt"]);
    assert_eq!(c, 1);
    assert!(!d.path().join("series.csv").exists());
}

#[test]
fn config_file_precedence_and_unknown_keys() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("run.cfg"), "seed = 7\nprediction = 1,1,1,1\n").unwrap();
    let stdout = ok(d.path(), &["--config", "run.cfg", "--seed", "8", "schedule"]);
    assert!(stdout.contains("seed = 8  # flag"));
    assert!(stdout.contains("prediction = 1,1,1,1  # file"));
    assert!(stdout.contains("out = schedule.csv  # default"));

    std::fs::write(d.path().join("typo.cfg"), "predicton = 1,1,1,1\n").unwrap();
    let (c, err) = code(d.path(), &["--config", "typo.cfg", "schedule", "--prediction", "1,2,3,4"]);
    assert_eq!(c, 2);
    assert!(err.contains("predicton"));
    let (c, _) = code(d.path(), &["schedule", "--bogus-flag"]);
    assert_eq!(c, 2);
}

#[test]
fn schedule_puts_unique_max_first_and_repeats_ties() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["schedule", "--prediction", "3,3,3,5", "--out", "max.csv"]);
    assert!(read(d.path(), "max.csv").lines().nth(1).unwrap().starts_with("0,D,"));

    ok(d.path(), &["schedule", "--prediction", "2,2,2,2", "--seed", "3", "--out", "a.csv"]);
    ok(d.path(), &["schedule", "--prediction", "2,2,2,2", "--seed", "3", "--out", "b.csv"]);
    assert_eq!(read(d.path(), "a.csv"), read(d.path(), "b.csv"));
    assert_eq!(read(d.path(), "a.csv").lines().count(), 15);

    let (c, _) = code(d.path(), &["schedule", "--prediction", "1,2,3"]);
    assert_eq!(c, 2);
}

#[test]
fn train_outputs_are_reproducible_and_validated() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let first = std::fs::read(d.path().join("model.gru")).unwrap();
    ok(d.path(), &["train", "--series", "series.csv", "--window", "24", "--hidden", "6", "--epochs", "2", "--steps", "4", "--batch", "8", "--model-out", "again.gru"]);
    assert_eq!(first, std::fs::read(d.path().join("again.gru")).unwrap());
    assert_eq!(read(d.path(), "loss_history.csv").lines().count(), 9);

    let (c, err) = code(d.path(), &["train", "--series", "series.csv", "--window", "300"]);
    assert_eq!(c, 2);
    assert!(err.contains("window"), "{}", err);
}

#[test]
fn diverging_training_exits_3() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["fixture", "--kind", "milan", "--slots", "200"]);
    let args = [
        "train", "--series", "series.csv", "--window", "12", "--hidden", "4", "--optimizer", "sgd",
        "--lr", "1e9", "--clip", "0", "--epochs", "1", "--steps", "5",
    ];
    let (c, err) = code(d.path(), &args);
    assert_eq!(c, 3, "{}", err);
    assert!(!d.path().join("model.gru").exists());
}

#[test]
fn predict_and_eval() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let stdout = ok(d.path(), &["predict", "--model", "model.gru", "--series", "series.csv", "--window", "24", "--at-slot", "100"]);
    assert!(stdout.contains("prediction for slot 100"));
    assert_eq!(read(d.path(), "prediction.csv").lines().count(), 5);
    let (c, _) = code(d.path(), &["predict", "--model", "model.gru", "--series", "series.csv", "--window", "24", "--at-slot", "10"]);
    assert_eq!(c, 2);

    ok(d.path(), &["schedule", "--model", "model.gru", "--series", "series.csv", "--window", "24", "--at-slot", "100"]);
    assert_eq!(read(d.path(), "schedule.csv").lines().count(), 15);

    let stdout = ok(d.path(), &["eval", "--model", "model.gru", "--series", "series.csv", "--window", "24"]);
    assert!(stdout.contains("sector,mse,persistence_mse"));
    let csv = read(d.path(), "eval.csv");
    assert!(csv.starts_with("seq_index,sector,prediction,truth\n"));
    // 276 sequences, 248 for training, 28 held out, 4 sectors each
    assert_eq!(csv.lines().count(), 1 + 28 * 4);
}

#[test]
fn model_with_wrong_dimensions_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["fixture", "--kind", "milan", "--slots", "200"]);
    let p = GruParams::init(GruDims::new(3, 4, 3), 1);
    let bytes = serialize_model(&p, &Normalizer::identity(3)).unwrap();
    std::fs::write(d.path().join("odd.gru"), bytes).unwrap();
    let (c, err) = code(d.path(), &["predict", "--model", "odd.gru", "--series", "series.csv", "--window", "12", "--at-slot", "50"]);
    assert_eq!(c, 2);
    assert!(err.contains("dimension"), "{}", err);

    std::fs::write(d.path().join("junk.gru"), "not a model").unwrap();
    let (c, _) = code(d.path(), &["eval", "--model", "junk.gru", "--series", "series.csv", "--window", "12"]);
    assert_eq!(c, 2);
}

#[test]
fn simulate_single_policy_and_silent_cell() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["fixture", "--kind", "milan", "--slots", "120"]);
    ok(d.path(), &["simulate", "--series", "series.csv", "--window", "12", "--policies", "sequential", "--seeds", "2", "--ues-per-cdr", "0.2"]);
    let cmp = read(d.path(), "sim_comparison.csv");
    assert_eq!(cmp.lines().count(), 2);
    assert!(cmp.lines().nth(1).unwrap().starts_with("sequential,sequential,2,"));
    assert_eq!(read(d.path(), "sim_paired.csv").lines().count(), 3);
    assert!(!d.path().join("sim_ues.csv").exists());

    let zeros: String = std::iter::once("time,A,B,C,D".to_string())
        .chain((0..40).map(|i| format!("2013-11-01T{:02}:{:02}:00Z,0,0,0,0", i / 6, (i % 6) * 10)))
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(d.path().join("zeros.csv"), zeros).unwrap();
    ok(d.path(), &["simulate", "--series", "zeros.csv", "--window", "6", "--policies", "sequential,oracle", "--seeds", "2"]);
    let summary = read(d.path(), "sim_summary.csv");
    assert!(summary.contains("sequential,,,,0"), "{}", summary);
    assert!(summary.contains("oracle,,,,0"), "{}", summary);

    let (c, err) = code(d.path(), &["simulate", "--series", "series.csv", "--window", "12", "--policies", "predicted"]);
    assert_eq!(c, 2);
    assert!(err.contains("model"), "{}", err);
}

#[test]
fn gradcheck_writes_report() {
    let d = tempfile::tempdir().unwrap();
    let stdout = ok(d.path(), &["gradcheck", "--models", "3", "--hidden", "4"]);
    assert!(stdout.contains("models checked: 3"));
    assert_eq!(read(d.path(), "gradcheck.csv").lines().count(), 1 + 3 * 11);
    let (c, _) = code(d.path(), &["gradcheck", "--models", "2", "--threshold", "0"]);
    assert_eq!(c, 3);
}

#[test]
fn out_dir_is_created() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--out-dir", "nested/deeper", "fixture", "--kind", "d-heavy", "--slots", "10"]);
    assert_eq!(read(&d.path().join("nested/deeper"), "series.csv").lines().count(), 11);
}
