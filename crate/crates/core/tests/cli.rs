use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn sentlex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sentlex")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = sentlex(args);
    assert!(
        out.status.success(),
        "{args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Preprocessed and valence-labeled fixture inside a fresh directory.
fn labeled_corpus() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "preprocess",
        "--input",
        s(&fixture("sentiment140_sample.csv")),
        "--output-dir",
        s(dir.path()),
    ]);
    let processed = dir.path().join("processed.csv");
    ok(&["relabel", "--input", s(&processed), "--output-dir", s(dir.path())]);
    let labeled = dir.path().join("labeled_valence.csv");
    (dir, labeled)
}

fn quick_train(input: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "train",
        "--input",
        s(input),
        "--output-dir",
        s(out),
        "--splits",
        "70-30",
        "--k",
        "0",
        "--rf-trees",
        "10",
        "--gbt-rounds",
        "10",
    ];
    args.extend_from_slice(extra);
    sentlex(&args)
}

#[test]
fn preprocess_keeps_one_row_per_record_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let input = fixture("sentiment140_sample.csv");
    ok(&["preprocess", "--input", s(&input), "--output-dir", s(&a)]);
    ok(&[
        "--threads",
        "3",
        "preprocess",
        "--input",
        s(&input),
        "--output-dir",
        s(&b),
    ]);
    let first = fs::read(a.join("processed.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("processed.csv")).unwrap());
    let rows = csv::Reader::from_reader(first.as_slice()).records().count();
    assert_eq!(rows, 1000);
}

#[test]
fn missing_input_exits_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sentlex(&[
        "preprocess",
        "--input",
        "/nonexistent/tweets.csv",
        "--output-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn bad_flags_exit_two_and_help_exits_zero() {
    assert_eq!(sentlex(&["train", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(sentlex(&[]).status.code(), Some(2));
    assert_eq!(sentlex(&["--help"]).status.code(), Some(0));
    assert_eq!(sentlex(&["--version"]).status.code(), Some(0));
}

#[test]
fn relabel_methods_give_different_distributions() {
    let (dir, _) = labeled_corpus();
    ok(&[
        "relabel",
        "--input",
        s(&dir.path().join("processed.csv")),
        "--output-dir",
        s(dir.path()),
        "--method",
        "pattern",
    ]);
    let valence = fs::read_to_string(dir.path().join("relabel_valence.csv")).unwrap();
    let pattern = fs::read_to_string(dir.path().join("relabel_pattern.csv")).unwrap();
    assert_ne!(valence, pattern);
    let neutral = valence.lines().find(|l| l.contains(",neutral,")).unwrap();
    let after: usize = neutral.rsplit(',').next().unwrap().parse().unwrap();
    assert!(after > 0, "{valence}");
}

#[test]
fn empty_texts_relabel_as_neutral() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    fs::write(
        &raw,
        "\"0\",\"1\",\"d\",\"NO_QUERY\",\"u\",\"@someone http://t.co/x\"\n\"4\",\"2\",\"d\",\"NO_QUERY\",\"u\",\"\"\n\"4\",\"3\",\"d\",\"NO_QUERY\",\"u\",\"!!! 123\"\n",
    )
    .unwrap();
    ok(&["preprocess", "--input", s(&raw), "--output-dir", s(dir.path())]);
    ok(&[
        "relabel",
        "--input",
        s(&dir.path().join("processed.csv")),
        "--output-dir",
        s(dir.path()),
    ]);
    let text = fs::read_to_string(dir.path().join("labeled_valence.csv")).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let labels: Vec<String> = r.records().map(|x| x.unwrap()[2].to_string()).collect();
    assert_eq!(labels, ["neutral", "neutral", "neutral"]);
}

#[test]
fn explore_writes_six_tables_of_at_most_k_rows() {
    let (dir, labeled) = labeled_corpus();
    let out = dir.path().join("explore");
    ok(&[
        "explore",
        "--input",
        s(&labeled),
        "--output-dir",
        s(&out),
        "--top-k",
        "8",
    ]);
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 6, "{names:?}");
    for n in &names {
        let rows = csv::Reader::from_path(out.join(n)).unwrap().records().count();
        assert!(rows <= 8, "{n} has {rows} rows");
    }
    let positive = csv::Reader::from_path(out.join("words_positive_common.csv"))
        .unwrap()
        .records()
        .count();
    assert_eq!(positive, 8);
}

#[test]
fn explore_with_an_empty_class_still_succeeds() {
    let (dir, labeled) = labeled_corpus();
    let out = dir.path().join("explore");
    // Original Sentiment140 labels have no neutral class.
    ok(&[
        "explore",
        "--input",
        s(&labeled),
        "--output-dir",
        s(&out),
        "--labels",
        "original",
    ]);
    let neutral = csv::Reader::from_path(out.join("words_neutral_common.csv"))
        .unwrap()
        .records()
        .count();
    assert_eq!(neutral, 0);
}

#[test]
fn train_then_evaluate_and_assess_with_the_saved_model() {
    let (dir, labeled) = labeled_corpus();
    let train = dir.path().join("train");
    let out = quick_train(&labeled, &train, &["--models", "nb,rf"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Random Forest") && stdout.contains("Pos-P"), "{stdout}");
    for f in [
        "report.csv",
        "confusion.csv",
        "accuracy_table.txt",
        "vocab.tsv",
        "models/rf_70-30.json",
        "models/nb_70-30.json",
    ] {
        assert!(train.join(f).is_file(), "{f} missing");
    }
    let model = train.join("models/rf_70-30.json");
    let vocab = train.join("vocab.tsv");
    let eval = dir.path().join("eval");
    ok(&[
        "evaluate",
        "--input",
        s(&labeled),
        "--output-dir",
        s(&eval),
        "--model",
        s(&model),
        "--vocab",
        s(&vocab),
    ]);
    assert!(eval.join("evaluation.csv").is_file());

    let assess = dir.path().join("assess");
    ok(&[
        "assess",
        "--input",
        s(&fixture("politician_tweets.ndjson")),
        "--output-dir",
        s(&assess),
        "--model",
        s(&model),
        "--vocab",
        s(&vocab),
    ]);
    let confusion = fs::read_to_string(assess.join("confusion.csv")).unwrap();
    assert_eq!(confusion.lines().count(), 4, "{confusion}");
}

#[test]
fn evaluate_rejects_a_vocabulary_of_the_wrong_size() {
    let (dir, labeled) = labeled_corpus();
    let train = dir.path().join("train");
    assert!(quick_train(&labeled, &train, &["--models", "nb"]).status.success());
    let vocab = fs::read_to_string(train.join("vocab.tsv")).unwrap();
    let short: String = vocab
        .lines()
        .take(vocab.lines().count() - 3)
        .map(|l| format!("{l}\n"))
        .collect();
    let bad = dir.path().join("short.tsv");
    fs::write(&bad, short).unwrap();
    let out = sentlex(&[
        "evaluate",
        "--input",
        s(&labeled),
        "--output-dir",
        s(dir.path()),
        "--model",
        s(&train.join("models/nb_70-30.json")),
        "--vocab",
        s(&bad),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn corrupt_model_file_is_an_input_error() {
    let (dir, labeled) = labeled_corpus();
    let train = dir.path().join("train");
    assert!(quick_train(&labeled, &train, &["--models", "nb"]).status.success());
    let model = train.join("models/nb_70-30.json");
    let text = fs::read_to_string(&model).unwrap();
    fs::write(&model, &text[..text.len() / 2]).unwrap();
    let out = sentlex(&[
        "evaluate",
        "--input",
        s(&labeled),
        "--output-dir",
        s(dir.path()),
        "--model",
        s(&model),
        "--vocab",
        s(&train.join("vocab.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diverging_training_exits_one_and_keeps_other_results() {
    let (dir, labeled) = labeled_corpus();
    let train = dir.path().join("train");
    let out = quick_train(
        &labeled,
        &train,
        &["--models", "nb,mlr", "--mlr-learning-rate", "1e300"],
    );
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(train.join("report.csv")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("nb,70-30,accuracy,")), "{report}");
    assert!(report.lines().any(|l| l.starts_with("mlr,70-30,error,")), "{report}");
}

#[test]
fn same_seed_same_bytes_different_seed_different_split() {
    let (dir, labeled) = labeled_corpus();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        assert!(quick_train(&labeled, &out, &["--models", "nb", "--seed", seed])
            .status
            .success());
        fs::read(out.join("report.csv")).unwrap()
    };
    let (a, b, c) = (run("a", "5"), run("b", "5"), run("c", "6"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let (dir, labeled) = labeled_corpus();
    let cfg = dir.path().join("train.conf");
    fs::write(
        &cfg,
        format!("input = {}\nmodels = nb\nsplits = 60-40\nk = 0\n", s(&labeled)),
    )
    .unwrap();
    let out = dir.path().join("cfg");
    ok(&[
        "train",
        "--config",
        s(&cfg),
        "--output-dir",
        s(&out),
        "--splits",
        "80-20",
    ]);
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.contains("nb,80-20,accuracy"), "{report}");
    assert!(!report.contains("60-40"));
}

#[test]
fn assess_counts_and_gold_confusion() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "assess",
        "--input",
        s(&fixture("politician_tweets.ndjson")),
        "--output-dir",
        s(dir.path()),
    ]);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.contains("count,all,300"), "{summary}");
    let distribution = fs::read_to_string(dir.path().join("distribution.csv")).unwrap();
    assert_eq!(distribution.lines().next(), Some("label,pattern,valence"));
    let top = csv::Reader::from_path(dir.path().join("words_positive_common.csv"))
        .unwrap()
        .records()
        .next()
        .unwrap()
        .unwrap();
    assert_eq!(&top[0], "great");
    assert!(dir.path().join("confusion.csv").is_file());
}

#[test]
fn assess_rejects_an_empty_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("empty.ndjson");
    fs::write(&dump, "\n").unwrap();
    let out = sentlex(&["assess", "--input", s(&dump), "--output-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}
