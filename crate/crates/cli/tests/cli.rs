use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/homonym")
        .join(name)
}

fn wsi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn induce_to(out: &Path, extra: &[&str]) -> Output {
    let dataset = fixture("dataset.tsv");
    let config = fixture("config.toml");
    let mut args = vec!["induce", s(&dataset), "--config", s(&config), "-o", s(out)];
    args.extend_from_slice(extra);
    wsi(&args)
}

#[test]
fn ap_direct_on_homonym_fixture_finds_two_senses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pred.tsv");
    let run = induce_to(&out, &["--strategy", "ap-direct", "--summary"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary = String::from_utf8(run.stderr).unwrap();
    assert!(summary.contains("query0\tk=2\t"), "{summary}");

    let eval = wsi(&["evaluate", s(&out)]);
    assert_eq!(eval.status.code(), Some(0));
    let table = String::from_utf8(eval.stdout).unwrap();
    assert!(table.contains("aggregate_weighted  1.0000"), "{table}");
}

#[test]
fn induce_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    let c = dir.path().join("c.tsv");
    assert!(induce_to(&a, &["--strategy", "ap-then-kmeans"]).status.success());
    assert!(induce_to(&b, &["--strategy", "ap-then-kmeans"]).status.success());
    assert!(induce_to(&c, &["--strategy", "ap-then-kmeans", "--threads", "1"]).status.success());
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    assert_eq!(a, std::fs::read(c).unwrap());
}

#[test]
fn evaluate_gold_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let gold = std::fs::read_to_string(fixture("dataset.tsv")).unwrap();
    // Copy the gold column into the prediction column.
    let mut lines = gold.lines();
    let mut text = format!("{}\n", lines.next().unwrap());
    for line in lines {
        let mut cols: Vec<&str> = line.split('\t').collect();
        cols[3] = cols[2];
        text.push_str(&cols.join("\t"));
        text.push('\n');
    }
    let pred = dir.path().join("pred.tsv");
    std::fs::write(&pred, text).unwrap();
    let json = dir.path().join("report.json");
    let gold_path = fixture("dataset.tsv");
    let run = wsi(&["evaluate", s(&pred), "--gold", s(&gold_path), "--json", s(&json)]);
    assert_eq!(run.status.code(), Some(0));
    assert!(String::from_utf8(run.stdout).unwrap().contains("aggregate_weighted  1.0000"));
    let report = std::fs::read_to_string(json).unwrap();
    assert!(report.contains("\"aggregate_weighted\": 1.0"), "{report}");
}

#[test]
fn exit_codes() {
    assert_eq!(wsi(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(wsi(&["induce", "--bogus-flag", "x"]).status.code(), Some(1));
    assert_eq!(wsi(&["--help"]).status.code(), Some(0));
    assert_eq!(wsi(&["evaluate", "/definitely/not/here.tsv"]).status.code(), Some(2));

    let dataset = fixture("dataset.tsv");
    let config = fixture("config.toml");
    let bad_damping = wsi(&["induce", s(&dataset), "--config", s(&config), "--damping", "1.5"]);
    assert_eq!(bad_damping.status.code(), Some(1));
    let no_model = wsi(&["induce", s(&dataset), "--model", "/no/such/model.txt"]);
    assert_eq!(no_model.status.code(), Some(2));
    // Predictions column is empty in the raw fixture.
    assert_eq!(wsi(&["evaluate", s(&dataset)]).status.code(), Some(2));
}

#[test]
fn gridsearch_writes_table_and_reloadable_best_config() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("grid.csv");
    let best = dir.path().join("best.toml");
    let dataset = fixture("dataset.tsv");
    let config = fixture("config.toml");
    let run = wsi(&[
        "gridsearch",
        s(&dataset),
        "--config",
        s(&config),
        "--preferences",
        "-0.7,-0.6",
        "--dampings",
        "0.7,0.8",
        "-o",
        s(&table),
        "--best-config",
        s(&best),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(table).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("preference,damping,macro_ari,weighted_ari"));
    assert_eq!(lines.count(), 4);

    let out = dir.path().join("pred.tsv");
    let rerun = wsi(&["induce", s(&dataset), "--config", s(&best), "-o", s(&out)]);
    assert!(rerun.status.success(), "{}", String::from_utf8_lossy(&rerun.stderr));
}

#[test]
fn project_and_inspect() {
    let dataset = fixture("dataset.tsv");
    let config = fixture("config.toml");
    let run = wsi(&["project", s(&dataset), "--config", s(&config), "--induce"]);
    assert!(run.status.success());
    let csv = String::from_utf8(run.stdout).unwrap();
    assert!(csv.starts_with("context_id,x,y,gold_sense_id,predicted_sense_id\n"));
    assert_eq!(csv.lines().count(), 51);

    let model = fixture("model.txt");
    let run = wsi(&["inspect-model", "--model", s(&model), "--token", "q0s0w1"]);
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.contains("dimension\t50"), "{text}");
    assert!(text.contains("token\tq0s0w1\tnorm="), "{text}");
}

#[test]
fn make_fixture_round_trips_through_induce() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    let run = wsi(&["--seed", "9", "make-fixture", "--output-dir", s(&fx), "--words", "2", "--contexts", "12"]);
    assert!(run.status.success());
    let out = dir.path().join("pred.tsv");
    let run = wsi(&[
        "induce",
        s(&fx.join("dataset.tsv")),
        "--model",
        s(&fx.join("model.txt")),
        "--frequencies",
        s(&fx.join("frequencies.tsv")),
        "-o",
        s(&out),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 25);
}
