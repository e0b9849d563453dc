#![allow(dead_code)]

use std::fs;
use std::path::Path;

use careerpath::survey::write_survey;
use careerpath::synth::{synthetic_survey, SynthConfig};
use careerpath::PipelineConfig;
use careerpath_core::corpus::MasterFieldTaxonomy;
use careerpath_core::model::ModelKind;

/// Kinds that train in well under a second on the small survey.
pub const QUICK: [ModelKind; 6] = [
    ModelKind::Dt,
    ModelKind::Svm,
    ModelKind::Lr,
    ModelKind::Knn,
    ModelKind::Nb,
    ModelKind::Mlp,
];

/// A synthetic survey of `rows` records under `dir` and a config pointing at it.
pub fn small_workspace(dir: &Path, rows: usize) -> PipelineConfig {
    fs::create_dir_all(dir).unwrap();
    let survey = dir.join("survey.csv");
    let synth = SynthConfig {
        rows,
        noise_pool: 120,
        ..SynthConfig::default()
    };
    write_survey(
        &survey,
        &synthetic_survey(&MasterFieldTaxonomy::bundled(), &synth),
    )
    .unwrap();
    let mut cfg = PipelineConfig::with_dataset(&survey);
    cfg.output_dir = dir.join("build");
    cfg.kinds = QUICK.to_vec();
    cfg.models.training.epochs = 5;
    cfg
}
