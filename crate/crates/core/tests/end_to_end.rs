//! Survey records to predictions through the public API only.

use careerpath_core::corpus::{clean, MasterField, MasterFieldTaxonomy, SurveyRecord};
use careerpath_core::eval::build_report;
use careerpath_core::model::{train_model, ModelKind, ModelParams, TrainedModel};
use careerpath_core::numkit::{argmax_tiebreak, SeededRng};
use careerpath_core::textprep::{
    build_vocabulary, normalize, stratified_split, vectorize, CountVector, StopWordList,
};
use careerpath_core::Dataset;
use proptest::prelude::*;

/// Records whose skills are the required skills of their field.
fn records(taxonomy: &MasterFieldTaxonomy, per_field: usize) -> Vec<SurveyRecord> {
    let mut rng = SeededRng::new(4);
    let mut out = Vec::new();
    for i in 0..per_field * MasterField::COUNT {
        let master = MasterField::ALL[i % MasterField::COUNT];
        let field = taxonomy
            .fields()
            .iter()
            .find(|(_, m)| *m == master)
            .unwrap()
            .0
            .clone();
        let skills = &taxonomy.skill_names()[&master];
        let picked = (0..3)
            .map(|_| skills[rng.below(skills.len() as u64) as usize].clone())
            .collect();
        out.push(SurveyRecord {
            semester: Some(7),
            interest_field: field,
            skills: picked,
            ..Default::default()
        });
    }
    out
}

struct Fixture {
    train: Dataset,
    test: Dataset,
}

fn fixture() -> Fixture {
    let taxonomy = MasterFieldTaxonomy::bundled();
    let stops = StopWordList::bundled();
    let input = records(&taxonomy, 10);
    let cleaned = clean(&input, &taxonomy, 0.05).unwrap();
    assert_eq!(cleaned.documents.len() + cleaned.dropped(), input.len());
    let tokens: Vec<Vec<String>> = cleaned
        .documents
        .iter()
        .map(|d| normalize(&d.text, &stops))
        .collect();
    let labels = cleaned.labels();
    let split = stratified_split(&labels, 0.8, 10).unwrap();
    let vocab = build_vocabulary(
        &split
            .train_indices
            .iter()
            .map(|&i| tokens[i].clone())
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let part = |idx: &[usize]| {
        Dataset::new(
            idx.iter().map(|&i| vectorize(&tokens[i], &vocab)).collect(),
            idx.iter().map(|&i| labels[i]).collect(),
            6,
        )
        .unwrap()
    };
    Fixture {
        train: part(&split.train_indices),
        test: part(&split.test_indices),
    }
}

fn quick_params() -> ModelParams {
    let mut p = ModelParams::default();
    p.training.epochs = 10;
    p
}

fn trained_all(f: &Fixture) -> Vec<TrainedModel> {
    ModelKind::ALL
        .iter()
        .map(|&k| train_model(k, &f.train, &quick_params()).unwrap().0)
        .collect()
}

#[test]
fn every_model_trains_predicts_and_evaluates() {
    let f = fixture();
    let names: Vec<&str> = MasterField::ALL.iter().map(|m| m.name()).collect();
    for (kind, model) in ModelKind::ALL.iter().zip(trained_all(&f)) {
        assert_eq!(model.kind(), *kind);
        assert_eq!(model.classes(), 6);
        assert_eq!(model.dimension(), f.train.dimension());
        model.validate().unwrap();
        let y_pred: Vec<usize> = f
            .test
            .vectors()
            .iter()
            .map(|x| model.predict(x).unwrap().label)
            .collect();
        let r = build_report(f.test.labels(), &y_pred, &names, kind.name()).unwrap();
        r.check_invariants().unwrap();
        assert!(r.accuracy > 1.0 / 6.0, "{kind}: {}", r.accuracy);
    }
}

#[test]
fn training_is_bit_deterministic() {
    let f = fixture();
    for kind in ModelKind::ALL {
        let a = train_model(kind, &f.train, &quick_params()).unwrap().0;
        let b = train_model(kind, &f.train, &quick_params()).unwrap().0;
        assert_eq!(a, b, "{kind}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn predictions_are_distributions(counts in proptest::collection::vec(0u32..5, 1..40), seed in 0u64..1000) {
        thread_local! {
            static MODELS: (usize, Vec<TrainedModel>) = {
                let f = fixture();
                (f.train.dimension(), trained_all(&f))
            };
        }
        MODELS.with(|(dim, models)| {
            let mut rng = SeededRng::new(seed);
            let dense: Vec<u32> = (0..*dim).map(|i| if rng.below(3) == 0 { counts[i % counts.len()] } else { 0 }).collect();
            let x = CountVector::from_dense(&dense);
            for m in models {
                let p = m.predict(&x).unwrap();
                prop_assert_eq!(p.distribution.len(), 6);
                prop_assert!(p.distribution.iter().all(|&v| v >= 0.0 && v.is_finite()));
                prop_assert!((p.distribution.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                prop_assert_eq!(p.label, argmax_tiebreak(&p.distribution));
            }
            Ok(())
        })?;
    }
}
