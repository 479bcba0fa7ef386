use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use structural_confidence::synthetic::{labeled_trajectories, SyntheticSpec};
use structural_confidence::trajectory::{write_trajectories, Flags, Label, Trajectory};
use tempfile::TempDir;

fn strconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strconf")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = strconf(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str], code: i32) -> String {
    let out = strconf(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stderr).unwrap()
}

fn write_strj(path: &Path, records: &[Trajectory]) {
    let mut flags = Flags::LABELS;
    if records[0].semantic.is_some() {
        flags = flags | Flags::SEMANTIC;
    }
    let mut buf = Vec::new();
    write_trajectories(records, &mut buf, flags).unwrap();
    std::fs::write(path, buf).unwrap();
}

fn synthetic(dir: &TempDir, name: &str, spec: SyntheticSpec) -> PathBuf {
    let path = dir.path().join(name);
    write_strj(&path, &labeled_trajectories(&spec).unwrap());
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn three_records_give_seventy_two_columns() {
    let dir = TempDir::new().unwrap();
    let input = synthetic(&dir, "three.strj", SyntheticSpec { count: 3, ..Default::default() });
    let csv = dir.path().join("f.csv");
    ok(&["features", "--input", s(&input), "--output", s(&csv), "--variant", "struct_only", "--mode", "two_scale"]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for line in &lines {
        assert_eq!(line.split(',').count(), 72, "{line}");
    }
    assert!(lines[1].starts_with("syn-00000,1,"));
}

#[test]
fn semantic_variant_without_embeddings_names_flag_bit() {
    let dir = TempDir::new().unwrap();
    let input = synthetic(&dir, "plain.strj", SyntheticSpec { count: 3, ..Default::default() });
    let csv = dir.path().join("f.csv");
    let err = fails(&["features", "--input", s(&input), "--output", s(&csv), "--variant", "struct_plus_sent"], 1);
    assert!(err.contains("bit1"), "{err}");
    assert!(!csv.exists());
}

#[test]
fn semantic_columns_are_appended() {
    let dir = TempDir::new().unwrap();
    let spec = SyntheticSpec { count: 4, semantic_dim: 3, ..Default::default() };
    let input = synthetic(&dir, "sem.strj", spec);
    let csv = dir.path().join("f.csv");
    ok(&["features", "--input", s(&input), "--output", s(&csv), "--variant", "struct_plus_sent"]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 75);
    assert!(header.ends_with(",s0,s1,s2"));
}

#[test]
fn features_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let input = synthetic(&dir, "in.strj", SyntheticSpec { count: 40, ..Default::default() });
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    ok(&["features", "--input", s(&input), "--output", s(&a)]);
    ok(&["features", "--input", s(&input), "--output", s(&b)]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn train_then_eval_on_separable_synthetic() {
    let dir = TempDir::new().unwrap();
    let input = synthetic(&dir, "train.strj", SyntheticSpec { count: 200, ..Default::default() });
    let csv = dir.path().join("f.csv");
    let model = dir.path().join("m.json");
    let scores = dir.path().join("scores.csv");
    let export = dir.path().join("row.csv");
    ok(&["features", "--input", s(&input), "--output", s(&csv)]);
    ok(&["train", "--features", s(&csv), "--model", s(&model), "--variant", "struct_only"]);
    ok(&["predict", "--features", s(&csv), "--model", s(&model), "--output", s(&scores)]);
    let report = ok(&[
        "eval", "--scores", s(&scores), "--labels", s(&input), "--export", s(&export), "--dataset", "synthetic",
    ]);
    let auroc: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("auroc = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(auroc >= 0.99, "{report}");

    // Labels can also come from the feature table.
    let again = ok(&["eval", "--scores", s(&scores), "--labels", s(&csv)]);
    assert_eq!(report, again);

    let export = std::fs::read_to_string(export).unwrap();
    let mut lines = export.lines();
    assert_eq!(lines.next(), Some("variant,dataset,auroc,aupr,brier,ece"));
    assert!(lines.next().unwrap().starts_with("struct_only,synthetic,"));

    let summary = ok(&["validate", "--input", s(&input), "--features", s(&csv), "--model", s(&model)]);
    assert!(summary.contains("records = 200"));
    assert!(summary.contains("columns = 70"));
    assert!(summary.contains("trees = 200"));
}

#[test]
fn eval_lists_missing_ids() {
    let dir = TempDir::new().unwrap();
    let input = synthetic(&dir, "l.strj", SyntheticSpec { count: 4, ..Default::default() });
    let scores = dir.path().join("s.csv");
    std::fs::write(&scores, "id,score\nsyn-00000,0.9\nsyn-00001,0.2\nsyn-00003,0.4\n").unwrap();
    let err = fails(&["eval", "--scores", s(&scores), "--labels", s(&input)], 1);
    assert!(err.contains("syn-00002"), "{err}");
}

#[test]
fn eval_on_single_class_is_an_explicit_error() {
    let dir = TempDir::new().unwrap();
    let labels = dir.path().join("l.csv");
    let scores = dir.path().join("s.csv");
    std::fs::write(&labels, "id,label\na,1\nb,1\n").unwrap();
    std::fs::write(&scores, "id,score\na,0.9\nb,0.2\n").unwrap();
    let out = strconf(&["eval", "--scores", s(&scores), "--labels", s(&labels)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("single class"));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("NaN"));
}

#[test]
fn config_file_sets_flags_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let input = synthetic(&dir, "in.strj", SyntheticSpec { count: 6, ..Default::default() });
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    let config = dir.path().join("run.conf");
    std::fs::write(&config, format!("# local run\ninput = {}\nmode = global\n", s(&input))).unwrap();

    ok(&["--config", s(&config), "features", "--output", s(&a)]);
    ok(&["features", "--input", s(&input), "--output", s(&b), "--mode", "global"]);
    ok(&["features", "--config", s(&config), "--output", s(&c), "--mode", "two_scale"]);
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);

    std::fs::write(&config, "colour = red\n").unwrap();
    fails(&["features", "--config", s(&config), "--input", s(&input), "--output", "x.csv"], 1);
}

#[test]
fn validation_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let junk = dir.path().join("junk.strj");
    std::fs::write(&junk, b"STRJ\x02\x00").unwrap();
    let err = fails(&["validate", "--input", s(&junk)], 1);
    assert!(err.contains("junk.strj"));
    fails(&["features", "--input", s(&junk), "--output", "x.csv"], 1);
    fails(&["features", "--output", "x.csv"], 1);
    fails(&["features", "--mode", "sideways"], 1);
    fails(&["nonsense"], 1);
    fails(&["validate"], 1);
    ok(&["--help"]);
}

#[test]
fn unlabeled_training_data_is_rejected() {
    let dir = TempDir::new().unwrap();
    let t = Trajectory::new("u", Label::Unknown, vec![0.0, 1.0, 2.0, 3.0], 2).unwrap();
    let input = dir.path().join("u.strj");
    let mut buf = Vec::new();
    write_trajectories(&[t], &mut buf, Flags::empty()).unwrap();
    std::fs::write(&input, buf).unwrap();
    let csv = dir.path().join("f.csv");
    ok(&["features", "--input", s(&input), "--output", s(&csv)]);
    let err = fails(&["train", "--features", s(&csv), "--model", s(&dir.path().join("m.json"))], 1);
    assert!(err.contains("unlabeled"), "{err}");
}

#[test]
fn pca_fit_then_apply_matches() {
    let dir = TempDir::new().unwrap();
    let input = synthetic(&dir, "in.strj", SyntheticSpec { count: 60, ..Default::default() });
    let csv = dir.path().join("f.csv");
    let (fit, applied) = (dir.path().join("fit.csv"), dir.path().join("applied.csv"));
    let projector = dir.path().join("p.json");
    ok(&["features", "--input", s(&input), "--output", s(&csv)]);
    ok(&["pca", "--features", s(&csv), "--output", s(&fit), "--pca-k", "8", "--projector-out", s(&projector)]);
    ok(&["pca", "--features", s(&csv), "--output", s(&applied), "--projector", s(&projector)]);
    let text = std::fs::read_to_string(&fit).unwrap();
    assert_eq!(text, std::fs::read_to_string(&applied).unwrap());
    assert!(text.starts_with("id,label,pc0,pc1,pc2,pc3,pc4,pc5,pc6,pc7\n"));
    assert!(ok(&["validate", "--projector", s(&projector)]).contains("pca_k = 8"));

    let model = dir.path().join("m.json");
    ok(&["train", "--features", s(&fit), "--model", s(&model), "--n-trees", "20"]);
    fails(&["predict", "--features", s(&csv), "--model", s(&model), "--output", s(&dir.path().join("x.csv"))], 1);
}

#[test]
fn bench_stages_add_up() {
    let dir = TempDir::new().unwrap();
    let spec = SyntheticSpec { count: 1, min_tokens: 64, max_tokens: 64, dim: 64, ..Default::default() };
    let input = synthetic(&dir, "one.strj", spec);
    let report = ok(&["bench", "--input", s(&input), "--reps", "3"]);
    let value = |key: &str| -> f64 {
        report
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .unwrap_or_else(|| panic!("{key} missing from {report}"))
            .parse()
            .unwrap()
    };
    let stages = value("io_ms") + value("descriptor_ms") + value("inference_ms");
    let total = value("total_ms");
    assert!((stages - total).abs() <= 0.05 * total, "{stages} vs {total}");
    assert_eq!(value("max_tokens"), 64.0);
    fails(&["bench", "--input", s(&input), "--reps", "2"], 1);
}
