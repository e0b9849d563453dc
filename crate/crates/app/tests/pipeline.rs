mod common;

use std::fs;
use std::process::Command;

use careerpath::pipeline::{
    cmd_compare, cmd_evaluate, cmd_report, cmd_train, load_artifacts, load_reports, prepare, Layout,
};
use careerpath_core::model::ModelKind;

#[test]
fn train_then_evaluate_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::small_workspace(dir.path(), 60);
    let layout = Layout::new(&cfg.output_dir);

    assert_eq!(cmd_evaluate(&cfg).unwrap_err().kind(), "no_artifacts");

    let outcomes = cmd_train(&cfg, &common::QUICK).unwrap();
    let kinds: Vec<ModelKind> = outcomes.iter().map(|o| o.kind).collect();
    assert_eq!(kinds, common::QUICK);
    for name in [
        "clean_dataset.tsv",
        "provenance.log",
        "vocabulary.tsv",
        "split.json",
    ] {
        assert!(layout.file(name).is_file(), "{name}");
    }
    assert!(layout.curve(ModelKind::Mlp).is_file());
    assert!(!layout.curve(ModelKind::Svm).exists());
    let curve = fs::read_to_string(layout.curve(ModelKind::Mlp)).unwrap();
    assert_eq!(curve.lines().count(), 1 + cfg.models.training.epochs);

    let p = prepare(&cfg).unwrap();
    let vocab = fs::read_to_string(layout.file("vocabulary.tsv")).unwrap();
    assert_eq!(
        vocab.lines().filter(|l| !l.is_empty()).count(),
        p.vocabulary.len()
    );

    let reports = cmd_evaluate(&cfg).unwrap();
    assert_eq!(reports.len(), common::QUICK.len());
    for r in &reports {
        assert_eq!(r.evaluation.n, p.test.len() as u64);
        assert_eq!(r.dataset_fingerprint, p.fingerprint);
        assert_eq!(r.fit.is_some(), r.kind.is_neural());
        assert!(layout.report_json(r.kind).is_file());
        assert!(fs::read_to_string(layout.report_text(r.kind))
            .unwrap()
            .contains("accuracy"));
    }
    assert_eq!(load_reports(&layout).unwrap().len(), common::QUICK.len());
    assert_eq!(load_artifacts(&layout).unwrap().len(), common::QUICK.len());

    let comparison = cmd_compare(&cfg).unwrap();
    assert_eq!(comparison.rows.len(), common::QUICK.len());
    let json = fs::read_to_string(layout.comparison("json")).unwrap();
    assert!(json.contains("\"fn\""));
    let table = fs::read_to_string(layout.comparison("txt")).unwrap();
    assert!(table.starts_with("model"));
    for kind in common::QUICK {
        assert!(table.contains(kind.name()));
    }

    let summary = cmd_report(&cfg).unwrap();
    assert!(summary.contains(&format!("vocabulary: {} tokens", p.vocabulary.len())));
    assert!(summary.contains("UI / UX") || summary.contains("UI/UX"));
}

#[test]
fn evaluating_after_a_reseed_reports_stale_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::small_workspace(dir.path(), 60);
    cmd_train(&cfg, &[ModelKind::Nb]).unwrap();
    let mut reseeded = cfg.clone();
    reseeded.split.seed = 11;
    assert_eq!(
        cmd_evaluate(&reseeded).unwrap_err().kind(),
        "stale_artifact"
    );
    cmd_evaluate(&cfg).unwrap();
}

#[test]
fn compare_without_reports_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::small_workspace(dir.path(), 30);
    assert_eq!(cmd_compare(&cfg).unwrap_err().kind(), "no_artifacts");
}

#[test]
fn command_line_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_careerpath");
    let run = |args: &[&str]| {
        let out = Command::new(bin)
            .current_dir(dir.path())
            .args(args)
            .output()
            .unwrap();
        (
            out.status.success(),
            String::from_utf8_lossy(&out.stdout).into_owned(),
            String::from_utf8_lossy(&out.stderr).into_owned(),
        )
    };

    let (ok, _, err) = run(&["synth", "--out", "survey.csv", "--rows", "60"]);
    assert!(ok, "{err}");
    fs::write(
        dir.path().join("careerpath.toml"),
        "dataset = \"survey.csv\"\nkinds = [\"SVM\", \"NB\"]\n",
    )
    .unwrap();

    let (ok, _, err) = run(&["predict", "--skills", "python"]);
    assert!(!ok);
    assert!(err.contains("artifact"), "{err}");

    let (ok, _, err) = run(&["train"]);
    assert!(ok, "{err}");
    assert!(dir.path().join("build/models/svm.artifact").is_file());
    assert!(!dir.path().join("build/models/lr.artifact").exists());

    let (ok, out, err) = run(&["evaluate"]);
    assert!(ok, "{err}");
    assert!(out.contains("SVM") && out.contains("NB"), "{out}");

    let (ok, out, _) = run(&["predict", "--skills", "machine learning, python", "--json"]);
    assert!(ok);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["model"], "SVM");
    assert_eq!(v["ranking"].as_array().unwrap().len(), 6);

    let (ok, out, _) = run(&["predict", "--skills", "figma", "--model", "NB"]);
    assert!(ok);
    assert!(out.starts_with("model: NB"), "{out}");
    assert_eq!(out.matches('%').count(), 6);

    let (ok, out, _) = run(&["compare"]);
    assert!(ok);
    assert!(out.starts_with("model"));

    let (ok, out, _) = run(&["report"]);
    assert!(ok);
    assert!(out.contains("survey: 60 records"), "{out}");

    let (ok, _, err) = run(&["--config", "absent.toml", "train"]);
    assert!(!ok);
    assert!(err.contains("absent.toml"), "{err}");

    let (ok, _, err) = run(&["predict", "--skills", "x", "--model", "LSTM"]);
    assert!(!ok);
    assert!(err.contains("LSTM"), "{err}");
}
