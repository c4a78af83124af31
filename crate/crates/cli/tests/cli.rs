use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use iscore::dataset::{save_tabular, LabeledDataset};
use iscore::simlab::{generate_toy, ToyConfig};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iscore"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn iscore")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

/// 2000-row XOR fixture with eight noise columns.
fn xor_fixture(dir: &Path) -> PathBuf {
    let ds = generate_toy(&ToyConfig::default(), 0).unwrap();
    let path = dir.join("xor.csv");
    save_tabular(&ds, &path).unwrap();
    path
}

#[test]
fn iscore_reports_pair_score() {
    let tmp = TempDir::new().unwrap();
    xor_fixture(tmp.path());
    ok(tmp.path(), &["iscore", "--data", "xor.csv", "--subset", "X1,X2", "--out", "o"]);
    let subset = read(tmp.path().join("o/subset.csv"));
    let row = subset.lines().nth(1).unwrap();
    let normalized: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((normalized - 500.0).abs() < 5.0, "{row}");
    let ranking = read(tmp.path().join("o/iscore.csv"));
    assert_eq!(ranking.lines().count(), 11);
}

#[test]
fn constant_column_scores_zero() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.csv"), "C,Y\n1,0\n1,1\n1,0\n1,1\n").unwrap();
    ok(tmp.path(), &["iscore", "--data", "c.csv", "--out", "o"]);
    assert_eq!(read(tmp.path().join("o/iscore.csv")), "feature,iscore\nC,0\n");
}

#[test]
fn missing_file_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["iscore", "--data", "nowhere.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.csv"));
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run(tmp.path(), &["bda"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["no-such-command"]).status.code(), Some(2));
}

#[test]
fn bda_finds_the_pair() {
    let tmp = TempDir::new().unwrap();
    xor_fixture(tmp.path());
    ok(tmp.path(), &["bda", "--data", "xor.csv", "--k", "3", "--draws", "50", "--out", "o"]);
    assert_eq!(read(tmp.path().join("o/best.txt")), "X1,X2\n");
    assert_eq!(read(tmp.path().join("o/returns.csv")).lines().count(), 51);
}

#[test]
fn bda_single_draw_single_variable() {
    let tmp = TempDir::new().unwrap();
    xor_fixture(tmp.path());
    ok(tmp.path(), &["bda", "--data", "xor.csv", "--k", "1", "--draws", "1", "--out", "o"]);
    assert_eq!(read(tmp.path().join("o/returns.csv")).lines().count(), 2);
    assert_eq!(read(tmp.path().join("o/steps.csv")).lines().count(), 2);
}

#[test]
fn bda_rejects_continuous_columns() {
    let tmp = TempDir::new().unwrap();
    let mut text = String::from("A,Y\n");
    for i in 0..100 {
        text.push_str(&format!("{},{}\n", f64::from(i) * 0.37, i % 2));
    }
    fs::write(tmp.path().join("c.csv"), text).unwrap();
    let out = run(tmp.path(), &["bda", "--data", "c.csv", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("discretize"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    xor_fixture(tmp.path());
    fs::write(
        tmp.path().join("run.toml"),
        "[global]\nseed = 11\n\n[bda]\ndata = \"xor.csv\"\nk = 4\ndraws = 30\n",
    )
    .unwrap();
    ok(tmp.path(), &["--config", "run.toml", "bda", "--out", "a"]);
    ok(tmp.path(), &["--config", "run.toml", "bda", "--out", "b"]);
    for f in ["returns.csv", "steps.csv", "best.txt"] {
        assert_eq!(read(tmp.path().join("a").join(f)), read(tmp.path().join("b").join(f)), "{f}");
    }
    // A different global seed draws different subsets.
    ok(tmp.path(), &["--config", "run.toml", "--seed", "12", "bda", "--out", "c"]);
    assert_ne!(read(tmp.path().join("a/steps.csv")), read(tmp.path().join("c/steps.csv")));
}

#[test]
fn config_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.toml"), "[toy]\nbogus = 1\n").unwrap();
    assert_eq!(run(tmp.path(), &["--config", "bad.toml", "toy"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["--config", "absent.toml", "toy"]).status.code(), Some(2));
}

fn toy_rows(dir: &Path, out: &str) -> Vec<Vec<String>> {
    read(dir.join(out).join("toy_report.csv"))
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn toy_defaults_have_every_row() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["toy", "--out", "o"]);
    let rows = toy_rows(tmp.path(), "o");
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    let mut expect: Vec<String> = (1..=10).map(|j| format!("X{j}")).collect();
    expect.extend(["sum", "diff", "prod", "ratio", "dagger", "pair_set", "true_model"].map(String::from));
    assert_eq!(names, expect);
    let pair = rows.iter().find(|r| r[0] == "pair_set").unwrap();
    assert_eq!((pair[2].as_str(), pair[3].as_str()), ("NA", "NA"));
}

#[test]
fn toy_single_rep_has_zero_sd() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["toy", "--reps", "1", "--out", "o"]);
    for r in toy_rows(tmp.path(), "o") {
        assert_eq!(r[5], "0.0000", "{r:?}");
        if r[3] != "NA" {
            assert_eq!(r[3], "0.0000", "{r:?}");
        }
    }
}

#[test]
fn toy_scales_with_n() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["toy", "--n", "200", "--out", "o"]);
    let rows = toy_rows(tmp.path(), "o");
    let mean = |name: &str| -> f64 { rows.iter().find(|r| r[0] == name).unwrap()[4].parse().unwrap() };
    assert!((mean("true_model") - 100.0).abs() < 1.0);
    assert!((mean("pair_set") - 50.0).abs() < 1.0);
}

#[test]
fn dagger_writes_map_and_feature() {
    let tmp = TempDir::new().unwrap();
    xor_fixture(tmp.path());
    ok(tmp.path(), &["dagger", "--data", "xor.csv", "--columns", "X1,X2", "--apply", "xor.csv", "--out", "o"]);
    let map = read(tmp.path().join("o/dagger_map.csv"));
    assert_eq!(map.lines().next(), Some("X1,X2,mean"));
    assert_eq!(map.lines().count(), 6);
    let augmented: LabeledDataset<f64> = iscore::dataset::load_tabular(tmp.path().join("o/augmented.csv"), true).unwrap();
    let j = augmented.column_index("X_dagger").unwrap();
    assert_eq!(augmented.column(j), augmented.response());
    assert!(tmp.path().join("o/applied.csv").exists());
}

#[test]
fn discretize_writes_rules() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("d.csv"), "A,B,Y\n1,0,0\n2,1,0\n3,0,1\n4,1,1\n").unwrap();
    ok(tmp.path(), &["discretize", "--data", "d.csv", "--out", "o"]);
    assert_eq!(read(tmp.path().join("o/rules.csv")), "feature,threshold,iscore\nA,2,2\n");
    let d = read(tmp.path().join("o/discretized.csv"));
    assert_eq!(d.lines().nth(1), Some("0,0,0"));
    assert_eq!(d.lines().nth(3), Some("1,0,1"));
}

fn arm_rows(dir: &Path) -> Vec<Vec<String>> {
    read(dir.join("o/text_report.csv"))
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn text_study_reports_three_arms() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["text", "--desk-docs", "600", "--epochs", "5", "--out", "o"]);
    let rows = arm_rows(tmp.path());
    let arms: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(arms, ["gated", "random", "full"]);
    assert_eq!(rows[0][1], rows[1][1]);
    for arm in arms {
        assert_eq!(read(tmp.path().join(format!("o/curves/{arm}.csv"))).lines().count(), 6);
    }
}

#[test]
fn open_gate_matches_full_arm() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["text", "--desk-docs", "400", "--epochs", "4", "--top-fraction", "1.0", "--out", "o"]);
    let rows = arm_rows(tmp.path());
    assert_eq!(rows[0][1..], rows[2][1..]);
    assert_eq!(read(tmp.path().join("o/curves/gated.csv")), read(tmp.path().join("o/curves/full.csv")));
}

#[test]
fn text_reads_corpus_directories() {
    let tmp = TempDir::new().unwrap();
    let corpus = iscore::simlab::desk_corpus(&iscore::simlab::DeskCorpusConfig {
        documents: 300,
        ..Default::default()
    })
    .unwrap();
    iscore::dataset::save_text_corpus(&corpus, tmp.path().join("corpus")).unwrap();
    ok(tmp.path(), &["text", "--corpus", "corpus", "--epochs", "3", "--max-features", "50", "--out", "o"]);
    assert_eq!(arm_rows(tmp.path()).len(), 3);
    let out = run(tmp.path(), &["text", "--corpus", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_writes_curve_and_metrics() {
    let tmp = TempDir::new().unwrap();
    let mut text = String::from("A,B,Y\n");
    for i in 0..200 {
        let y = i % 2;
        text.push_str(&format!("{},{},{y}\n", y, (i / 2) % 3));
    }
    fs::write(tmp.path().join("t.csv"), text).unwrap();
    for model in ["ffn", "rnn"] {
        let out = format!("o_{model}");
        ok(
            tmp.path(),
            &["train", "--data", "t.csv", "--model", model, "--epochs", "40", "--eta", "1", "--top-fraction", "0.5", "--out", &out],
        );
        assert_eq!(read(tmp.path().join(&out).join("curve.csv")).lines().count(), 41);
        let metrics = read(tmp.path().join(&out).join("metrics.csv"));
        let auc: f64 = metrics.lines().last().unwrap().strip_prefix("auc,").unwrap().parse().unwrap();
        assert_eq!(auc, 1.0, "{model}");
        assert!(read(tmp.path().join(&out).join("gate.csv")).contains("A,"));
    }
    let bad = run(tmp.path(), &["train", "--data", "t.csv", "--model", "lstm"]);
    assert_eq!(bad.status.code(), Some(2));
}
