use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fakenews"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env("RUST_LOG", "off").output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path) -> PathBuf {
    let out = run(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--majority",
        "150",
        "--minority",
        "25",
        "--seed",
        "9",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    dir.join("corpus.csv")
}

#[test]
fn synth_writes_labeled_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = synth(dir.path());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("articleID,content,label\n"));
    assert_eq!(text.lines().count(), 176);
    assert_eq!(text.lines().filter(|l| l.ends_with(",fake")).count(), 25);
}

#[test]
fn run_prints_table_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let out_dir = dir.path().join("out");
    let o = run(&[
        "run",
        "--corpus",
        corpus.to_str().unwrap(),
        "--method",
        "smote",
        "--vectorizer",
        "count",
        "--classifier",
        "mnb",
        "--oversample-test",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("Method"), "{table}");
    assert!(table.contains("SMOTE"));
    for f in ["report.csv", "summary.csv", "report.json", "timings.json"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
    let csv = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..6], ["smote", "SMOTE", "true", "count", "mnb", "ok"]);
}

#[test]
fn formats_are_selectable() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let c = corpus.to_str().unwrap();
    let csv = run(&["run", "--corpus", c, "--classifier", "bnb", "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("method,label,"));
    let json = run(&["run", "--corpus", c, "--classifier", "bnb", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 1);
}

fn report_bytes(args: &[&str], dir: &Path) -> Vec<Vec<u8>> {
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", dir.to_str().unwrap(), "--format", "csv"]);
    let o = run(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    ["report.csv", "summary.csv", "report.json"]
        .iter()
        .map(|f| fs::read(dir.join(f)).unwrap())
        .collect()
}

#[test]
fn sweep_and_stack_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let c = corpus.to_str().unwrap();
    let sweep = [
        "sweep",
        "--corpus",
        c,
        "--seed",
        "5",
        "--methods",
        "baseline,adasyn,random_under",
        "--vectorizers",
        "tfidf",
        "--classifiers",
        "lr,dtc",
        "--set",
        "rf_estimators=20",
    ];
    let a = report_bytes(&sweep, &dir.path().join("a"));
    let b = report_bytes(&sweep, &dir.path().join("b"));
    assert_eq!(a, b);
    let rows = String::from_utf8(a[0].clone()).unwrap().lines().count() - 1;
    // baseline, ADASYN (N), ADASYN, random under; two classifiers each
    assert_eq!(rows, 8);

    let stack = ["stack", "--corpus", c, "--set", "rf_estimators=20", "--set", "stack_folds=3"];
    let a = report_bytes(&stack, &dir.path().join("c"));
    let b = report_bytes(&stack, &dir.path().join("d"));
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a[0].clone()).unwrap().lines().count() - 1, 6);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path());
    let cfg = dir.path().join("exp.conf");
    fs::write(
        &cfg,
        format!("# experiment\ncorpus = {}\nmethod = nearmiss\nclassifier = dtc\nseed = 3\n", corpus.display()),
    )
    .unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--format", "csv", "--classifier", "lr"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let row = String::from_utf8(o.stdout).unwrap().lines().nth(1).unwrap().to_string();
    assert!(row.starts_with("nearmiss,Near-Miss,false,tfidf,lr,ok,0.8,3,"), "{row}");
}

#[test]
fn failures_exit_nonzero_with_stage_names() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = run(&["run", "--corpus", missing.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("stage `load`"), "{}", stderr(&o));

    let o = run(&["run"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("stage `config`"), "{}", stderr(&o));

    let corpus = synth(dir.path());
    let o = run(&["run", "--corpus", corpus.to_str().unwrap(), "--set", "k_neighbors=0"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("stage `config`"), "{}", stderr(&o));

    let o = run(&["run", "--corpus", corpus.to_str().unwrap(), "--method", "bogus"]);
    assert!(!o.status.success());
}
