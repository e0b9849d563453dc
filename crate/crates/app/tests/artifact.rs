mod common;

use std::fs;
use std::path::Path;

use careerpath::pipeline::{cmd_train, evaluate_artifact, prepare, Layout};
use careerpath::{AppError, ModelArtifact};
use careerpath_core::model::ModelKind;
use careerpath_core::Dataset;
use sha2::{Digest, Sha256};

fn trained(dir: &Path) -> (careerpath::PipelineConfig, Layout) {
    let cfg = common::small_workspace(dir, 60);
    cmd_train(&cfg, &common::QUICK).unwrap();
    let layout = Layout::new(&cfg.output_dir);
    (cfg, layout)
}

/// Replaces the payload and recomputes the header checksum.
fn reseal(text: &str, edit: impl Fn(&mut serde_json::Value)) -> String {
    let (_, payload) = text.split_once('\n').unwrap();
    let mut value: serde_json::Value = serde_json::from_str(payload).unwrap();
    edit(&mut value);
    let payload = serde_json::to_string_pretty(&value).unwrap();
    let sum = hex::encode(Sha256::digest(payload.as_bytes()));
    format!("careerpath-artifact v1 sha256={sum}\n{payload}\n")
}

#[test]
fn save_load_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (_, layout) = trained(dir.path());
    for kind in common::QUICK {
        let path = layout.artifact(kind);
        let bytes = fs::read_to_string(&path).unwrap();
        let loaded = ModelArtifact::load(&path).unwrap();
        assert_eq!(loaded.kind(), kind);
        assert_eq!(loaded.to_text(), bytes, "{kind} re-save changed bytes");
        let again = dir.path().join(format!("{}.copy", kind.slug()));
        loaded.save(&again).unwrap();
        assert_eq!(ModelArtifact::load(&again).unwrap(), loaded);
        for text in [
            "",
            "python, machine learning",
            "photoshop figma",
            "zzz unknown",
        ] {
            let a = loaded.predict_text(text).unwrap();
            let b = ModelArtifact::load(&again)
                .unwrap()
                .predict_text(text)
                .unwrap();
            assert_eq!(a.label, b.label);
            assert!(a
                .distribution
                .iter()
                .zip(&b.distribution)
                .all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}

#[test]
fn corrupted_files_fail_with_distinct_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (_, layout) = trained(dir.path());
    let path = layout.artifact(ModelKind::Lr);
    let good = fs::read_to_string(&path).unwrap();
    let bad = dir.path().join("bad.artifact");
    let kind_of = |text: &str| {
        fs::write(&bad, text).unwrap();
        ModelArtifact::load(&bad).unwrap_err().kind()
    };

    assert_eq!(
        kind_of(&good.replacen(" v1 ", " v9 ", 1)),
        "artifact_version"
    );
    assert_eq!(
        kind_of(&good.replacen("\"bias\"", "\"bias\" ", 1)),
        "artifact_checksum"
    );
    assert_eq!(
        kind_of("careerpath-artifact v1 sha256=00\n"),
        "artifact_checksum"
    );
    assert_eq!(kind_of("not an artifact\n{}\n"), "artifact_payload");
    assert_eq!(kind_of(""), "artifact_payload");
    assert_eq!(
        kind_of(&reseal(&good, |v| v["extra"] = 1.into())),
        "artifact_payload"
    );
    assert_eq!(
        kind_of(&reseal(&good, |v| v["format_version"] = 2.into())),
        "artifact_version"
    );
    let shrunk = reseal(&good, |v| {
        v["vocabulary"]["tokens"].as_array_mut().unwrap().pop();
        v["vocabulary"]["document_frequency"]
            .as_array_mut()
            .unwrap()
            .pop();
    });
    assert_eq!(kind_of(&shrunk), "artifact_shape");
    assert_eq!(
        kind_of(&reseal(&good, |v| v["model"]["model"]["bias"] =
            serde_json::json!([0.0]))),
        "artifact_shape"
    );
    assert!(matches!(
        ModelArtifact::load(&dir.path().join("absent.artifact")).unwrap_err(),
        AppError::Io { .. }
    ));
}

#[test]
fn artifacts_from_another_split_are_stale() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, layout) = trained(dir.path());
    let artifact = ModelArtifact::load(&layout.artifact(ModelKind::Nb)).unwrap();
    let current = prepare(&cfg).unwrap();
    evaluate_artifact(&artifact, &current.test, &current.fingerprint).unwrap();

    let mut reseeded = cfg.clone();
    reseeded.split.seed = 99;
    let other = prepare(&reseeded).unwrap();
    let e = evaluate_artifact(&artifact, &other.test, &other.fingerprint).unwrap_err();
    assert_eq!(e.kind(), "stale_artifact");
    assert!(e.to_string().contains("NB"));
}

#[test]
fn empty_test_set_has_undefined_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, layout) = trained(dir.path());
    let artifact = ModelArtifact::load(&layout.artifact(ModelKind::Svm)).unwrap();
    let p = prepare(&cfg).unwrap();
    let empty = Dataset::new(Vec::new(), Vec::new(), 6).unwrap();
    let e = evaluate_artifact(&artifact, &empty, &p.fingerprint).unwrap_err();
    assert_eq!(e.kind(), "undefined_metric");
}

#[test]
fn metadata_records_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, layout) = trained(dir.path());
    let p = prepare(&cfg).unwrap();
    let svm = ModelArtifact::load(&layout.artifact(ModelKind::Svm)).unwrap();
    let mlp = ModelArtifact::load(&layout.artifact(ModelKind::Mlp)).unwrap();
    assert_eq!(svm.metadata.split_seed, 10);
    assert_eq!(svm.metadata.split_ratio_permille, 800);
    assert_eq!(svm.metadata.train_documents, p.train.len());
    assert_eq!(svm.metadata.dataset_fingerprint, p.fingerprint);
    assert_eq!(svm.metadata.config_hash, p.config_hash);
    assert_eq!(svm.metadata.training_seed, cfg.models.lr.seed);
    assert_eq!(mlp.metadata.training_seed, cfg.models.training.seed);
    assert_eq!(svm.vocabulary, p.vocabulary);
}
