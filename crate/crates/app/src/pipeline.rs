//! Survey file to trained, evaluated and compared models.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use careerpath_core::corpus::{
    clean, label_frequencies, CleanDataset, CleaningAction, MasterField, MasterFieldTaxonomy,
};
use careerpath_core::eval::{build_report, EvaluationReport};
use careerpath_core::model::{train_model, ModelKind, TrainedModel};
use careerpath_core::neural::{overfit_gap, DiagnosticConfig, LearningCurve, OverfitDiagnostic};
use careerpath_core::textprep::{
    build_vocabulary, normalize, stratified_split, vectorize, DatasetSplit, StopWordList,
    Vocabulary,
};
use careerpath_core::Dataset;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::artifact::{ArtifactMetadata, ModelArtifact};
use crate::config::PipelineConfig;
use crate::error::{AppError, AppResult};
use crate::survey::{load_survey, SurveyLoad};

/// File locations under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn artifact(&self, kind: ModelKind) -> PathBuf {
        self.root
            .join("models")
            .join(format!("{}.artifact", kind.slug()))
    }

    pub fn curve(&self, kind: ModelKind) -> PathBuf {
        self.root
            .join("curves")
            .join(format!("{}.csv", kind.slug()))
    }

    pub fn report_json(&self, kind: ModelKind) -> PathBuf {
        self.root
            .join("reports")
            .join(format!("{}.json", kind.slug()))
    }

    pub fn report_text(&self, kind: ModelKind) -> PathBuf {
        self.root
            .join("reports")
            .join(format!("{}.txt", kind.slug()))
    }

    pub fn comparison(&self, ext: &str) -> PathBuf {
        self.root.join("reports").join(format!("comparison.{ext}"))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

/// Everything between the raw survey and the count vectors.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub taxonomy: MasterFieldTaxonomy,
    pub stopwords: StopWordList,
    pub survey: SurveyLoad,
    pub clean: CleanDataset,
    pub tokens: Vec<Vec<String>>,
    pub split: DatasetSplit,
    /// Built from the training documents only.
    pub vocabulary: Vocabulary,
    pub train: Dataset,
    pub test: Dataset,
    pub fingerprint: String,
    pub config_hash: String,
}

pub fn prepare(cfg: &PipelineConfig) -> AppResult<Prepared> {
    let taxonomy = cfg.load_taxonomy()?;
    let stopwords = cfg.load_stopwords()?;
    let survey = load_survey(&cfg.dataset, &cfg.survey)?;
    let dataset_ctx = || cfg.dataset.display().to_string();
    let clean = clean(&survey.records, &taxonomy, cfg.drop_threshold)
        .map_err(|e| AppError::core(dataset_ctx(), e))?;
    let tokens: Vec<Vec<String>> = clean
        .documents
        .iter()
        .map(|d| normalize(&d.text, &stopwords))
        .collect();
    let labels = clean.labels();
    let split = stratified_split(&labels, cfg.split.ratio, cfg.split.seed)
        .map_err(|e| AppError::core(dataset_ctx(), e))?;
    let train_tokens: Vec<Vec<&str>> = split
        .train_indices
        .iter()
        .map(|&i| tokens[i].iter().map(String::as_str).collect())
        .collect();
    let vocabulary = build_vocabulary(&train_tokens)
        .map_err(|e| AppError::core(format!("{} training documents", dataset_ctx()), e))?;
    let part = |idx: &[usize]| {
        let vectors = idx
            .iter()
            .map(|&i| vectorize(&tokens[i], &vocabulary))
            .collect();
        let ys = idx.iter().map(|&i| labels[i]).collect();
        Dataset::new(vectors, ys, MasterField::COUNT).map_err(|e| AppError::core("vectorizing", e))
    };
    let train = part(&split.train_indices)?;
    let test = part(&split.test_indices)?;
    let fingerprint = fingerprint(&clean, &split);
    let config_hash = cfg.hash(&taxonomy, &stopwords);
    Ok(Prepared {
        taxonomy,
        stopwords,
        survey,
        clean,
        tokens,
        split,
        vocabulary,
        train,
        test,
        fingerprint,
        config_hash,
    })
}

/// SHA-256 of the cleaned documents and of the split that partitions them.
pub fn fingerprint(clean: &CleanDataset, split: &DatasetSplit) -> String {
    let mut h = Sha256::new();
    for d in &clean.documents {
        h.update(d.label.name().as_bytes());
        h.update(b"\t");
        h.update(d.text.as_bytes());
        h.update(b"\n");
    }
    h.update(format!("split seed={} ratio={}\n", split.seed, split.ratio).as_bytes());
    for i in split.train_indices.iter().chain(&split.test_indices) {
        h.update(i.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Writes the cleaned dataset, provenance log, vocabulary and split.
pub fn write_prepared(p: &Prepared, layout: &Layout) -> AppResult<()> {
    fs::create_dir_all(&layout.root).map_err(|e| AppError::io(&layout.root, e))?;
    let mut tsv = String::from("label\ttext\n");
    for d in &p.clean.documents {
        let _ = writeln!(tsv, "{}\t{}", d.label, d.text.replace(['\t', '\n'], " "));
    }
    write(&layout.file("clean_dataset.tsv"), &tsv)?;
    write(&layout.file("provenance.log"), &provenance_log(p))?;
    write(&layout.file("vocabulary.tsv"), &p.vocabulary.to_tsv())?;
    let split = serde_json::to_string_pretty(&p.split).expect("split serializes");
    write(&layout.file("split.json"), &(split + "\n"))
}

fn provenance_log(p: &Prepared) -> String {
    let mut s = String::new();
    for w in &p.survey.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    for i in &p.survey.issues {
        let _ = writeln!(s, "line {}: column {}: {}", i.line, i.column, i.message);
    }
    for prov in &p.clean.provenance {
        match &prov.action {
            CleaningAction::Kept { label, score } => {
                let _ = writeln!(
                    s,
                    "record {}: kept as {label} (overlap {score:.4})",
                    prov.row + 1
                );
            }
            CleaningAction::Dropped(reason) => {
                let _ = writeln!(s, "record {}: dropped, {reason}", prov.row + 1);
            }
        }
    }
    let _ = writeln!(
        s,
        "{} records, {} kept, {} dropped",
        p.clean.provenance.len(),
        p.clean.documents.len(),
        p.clean.dropped()
    );
    s
}

fn write(path: &Path, contents: &str) -> AppResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| AppError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub kind: ModelKind,
    pub artifact: ModelArtifact,
    pub curve: Option<LearningCurve>,
    pub train_accuracy: f64,
    pub elapsed: Duration,
}

/// Trains every kind on its own thread. Results come back in `kinds` order and
/// do not depend on scheduling.
pub fn train_all(
    p: &Prepared,
    cfg: &PipelineConfig,
    kinds: &[ModelKind],
) -> AppResult<Vec<TrainOutcome>> {
    let results: Vec<AppResult<TrainOutcome>> = thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| s.spawn(move || train_one(p, cfg, kind)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
            .collect()
    });
    results.into_iter().collect()
}

pub fn train_one(p: &Prepared, cfg: &PipelineConfig, kind: ModelKind) -> AppResult<TrainOutcome> {
    let start = Instant::now();
    let (model, curve) = train_model(kind, &p.train, &cfg.models)
        .map_err(|e| AppError::core(format!("training {kind}"), e))?;
    let train_accuracy = accuracy_on(&model, &p.train)?;
    let training_seed = if kind.is_neural() {
        cfg.models.training.seed
    } else {
        cfg.models.lr.seed
    };
    let metadata = ArtifactMetadata {
        split_seed: p.split.seed,
        split_ratio_permille: (p.split.ratio * 1000.0).round() as u32,
        training_seed,
        config_hash: p.config_hash.clone(),
        dataset_fingerprint: p.fingerprint.clone(),
        train_documents: p.train.len(),
    };
    Ok(TrainOutcome {
        kind,
        artifact: ModelArtifact::new(model, p.vocabulary.clone(), p.stopwords.clone(), metadata),
        curve,
        train_accuracy,
        elapsed: start.elapsed(),
    })
}

fn accuracy_on(model: &TrainedModel, data: &Dataset) -> AppResult<f64> {
    let mut correct = 0usize;
    for (x, &y) in data.vectors().iter().zip(data.labels()) {
        if model
            .predict(x)
            .map_err(|e| AppError::core(format!("{} prediction", model.kind()), e))?
            .label
            == y
        {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len().max(1) as f64)
}

/// `train`: prepare, train, write artifacts and learning curves.
pub fn cmd_train(cfg: &PipelineConfig, kinds: &[ModelKind]) -> AppResult<Vec<TrainOutcome>> {
    let layout = Layout::new(&cfg.output_dir);
    let p = prepare(cfg)?;
    write_prepared(&p, &layout)?;
    let outcomes = train_all(&p, cfg, kinds)?;
    for o in &outcomes {
        o.artifact.save(&layout.artifact(o.kind))?;
        if let Some(curve) = &o.curve {
            write(&layout.curve(o.kind), &curve.to_csv())?;
        }
    }
    Ok(outcomes)
}

/// Report plus the learning-curve diagnosis for neural models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub kind: ModelKind,
    pub config_hash: String,
    pub dataset_fingerprint: String,
    /// Flattened, so the JSON form is an evaluation report with extra keys.
    #[serde(flatten)]
    pub evaluation: EvaluationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<OverfitDiagnostic>,
}

impl ModelReport {
    pub fn to_text(&self) -> String {
        let mut s = self.evaluation.to_table();
        if let Some(fit) = &self.fit {
            let _ = writeln!(
                s,
                "\nlearning curve: {} (final-quarter gap {:.4}, validation-loss slope {:.5})",
                fit.classification, fit.final_quarter_gap, fit.val_loss_slope
            );
        }
        s
    }
}

/// Scores `artifact` on `test`. Refuses artifacts trained on another dataset.
pub fn evaluate_artifact(
    artifact: &ModelArtifact,
    test: &Dataset,
    fingerprint: &str,
) -> AppResult<EvaluationReport> {
    let kind = artifact.kind();
    if artifact.metadata.dataset_fingerprint != fingerprint {
        return Err(AppError::StaleArtifact {
            kind,
            artifact: short(&artifact.metadata.dataset_fingerprint),
            current: short(fingerprint),
        });
    }
    let mut y_pred = Vec::with_capacity(test.len());
    for x in test.vectors() {
        y_pred.push(artifact.predict(x)?.label);
    }
    let labels: Vec<&str> = MasterField::ALL.iter().map(|m| m.name()).collect();
    let report = build_report(test.labels(), &y_pred, &labels, kind.name())
        .map_err(|e| AppError::core(format!("evaluating {kind}"), e))?;
    report
        .check_invariants()
        .map_err(|e| AppError::core(format!("evaluating {kind}"), e))?;
    Ok(report)
}

fn short(hash: &str) -> String {
    hash.chars().take(12).collect()
}

/// `evaluate`: every artifact present for the configured kinds, then the comparison.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> AppResult<Vec<ModelReport>> {
    let layout = Layout::new(&cfg.output_dir);
    let p = prepare(cfg)?;
    let mut reports = Vec::new();
    for kind in cfg.kinds() {
        let path = layout.artifact(kind);
        if !path.is_file() {
            continue;
        }
        let artifact = ModelArtifact::load(&path)?;
        let evaluation = evaluate_artifact(&artifact, &p.test, &p.fingerprint)?;
        let curve_path = layout.curve(kind);
        let fit = if kind.is_neural() && curve_path.is_file() {
            let text = fs::read_to_string(&curve_path).map_err(|e| AppError::io(&curve_path, e))?;
            let curve = LearningCurve::from_csv(&text)
                .map_err(|e| AppError::core(curve_path.display().to_string(), e))?;
            Some(
                overfit_gap(&curve, &DiagnosticConfig::default())
                    .map_err(|e| AppError::core(curve_path.display().to_string(), e))?,
            )
        } else {
            None
        };
        let report = ModelReport {
            kind,
            config_hash: artifact.metadata.config_hash.clone(),
            dataset_fingerprint: artifact.metadata.dataset_fingerprint.clone(),
            evaluation,
            fit,
        };
        write(
            &layout.report_json(kind),
            &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"),
        )?;
        write(&layout.report_text(kind), &report.to_text())?;
        reports.push(report);
    }
    if reports.is_empty() {
        return Err(AppError::NoArtifacts(layout.root.join("models")));
    }
    let comparison = Comparison::from_reports(&reports);
    write(&layout.comparison("txt"), &comparison.to_table())?;
    write(
        &layout.comparison("json"),
        &(serde_json::to_string_pretty(&comparison).expect("comparison serializes") + "\n"),
    )?;
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub kind: ModelKind,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn from_reports(reports: &[ModelReport]) -> Self {
        let rows = reports
            .iter()
            .map(|r| {
                let e = &r.evaluation;
                ComparisonRow {
                    kind: r.kind,
                    accuracy: e.accuracy,
                    macro_precision: e.macro_avg.precision,
                    macro_recall: e.macro_avg.recall,
                    macro_f1: e.macro_avg.f1,
                    weighted_precision: e.weighted_avg.precision,
                    weighted_recall: e.weighted_avg.recall,
                    weighted_f1: e.weighted_avg.f1,
                    tp: e.counts.tp,
                    fp: e.counts.fp,
                    tn: e.counts.tn,
                    fn_: e.counts.fn_,
                }
            })
            .collect();
        Self { rows }
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<6}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>10}{:>6}{:>6}{:>6}{:>6}\n",
            "model",
            "accuracy",
            "macro P",
            "macro R",
            "macro F1",
            "wtd P",
            "wtd R",
            "wtd F1",
            "TP",
            "FP",
            "TN",
            "FN"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<6}{:>9.2}%{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>10.2}{:>6}{:>6}{:>6}{:>6}",
                r.kind.name(),
                r.accuracy * 100.0,
                r.macro_precision,
                r.macro_recall,
                r.macro_f1,
                r.weighted_precision,
                r.weighted_recall,
                r.weighted_f1,
                r.tp,
                r.fp,
                r.tn,
                r.fn_
            );
        }
        s
    }
}

/// Reports previously written by `evaluate`, keyed by kind.
pub fn load_reports(layout: &Layout) -> AppResult<BTreeMap<ModelKind, ModelReport>> {
    let mut out = BTreeMap::new();
    for kind in ModelKind::ALL {
        let path = layout.report_json(kind);
        if path.is_file() {
            let text = fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?;
            let report: ModelReport =
                serde_json::from_str(&text).map_err(|e| AppError::Dataset {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
            out.insert(kind, report);
        }
    }
    Ok(out)
}

/// `compare`: the comparison table over every saved report.
pub fn cmd_compare(cfg: &PipelineConfig) -> AppResult<Comparison> {
    let layout = Layout::new(&cfg.output_dir);
    let reports: Vec<ModelReport> = load_reports(&layout)?.into_values().collect();
    if reports.is_empty() {
        return Err(AppError::NoArtifacts(layout.root.join("reports")));
    }
    let c = Comparison::from_reports(&reports);
    write(&layout.comparison("txt"), &c.to_table())?;
    write(
        &layout.comparison("json"),
        &(serde_json::to_string_pretty(&c).expect("comparison serializes") + "\n"),
    )?;
    Ok(c)
}

/// `report`: cleaning summary and label distribution of the configured survey,
/// followed by the comparison table when reports exist.
pub fn cmd_report(cfg: &PipelineConfig) -> AppResult<String> {
    let layout = Layout::new(&cfg.output_dir);
    let p = prepare(cfg)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "survey: {} records, {} kept, {} dropped, {} cell issues",
        p.clean.provenance.len(),
        p.clean.documents.len(),
        p.clean.dropped(),
        p.survey.issues.len()
    );
    let _ = writeln!(
        s,
        "split: {} train / {} test (seed {})",
        p.train.len(),
        p.test.len(),
        p.split.seed
    );
    let _ = writeln!(s, "vocabulary: {} tokens\n", p.vocabulary.len());
    let freq = label_frequencies(&p.clean).map_err(|e| AppError::core("label frequencies", e))?;
    let _ = writeln!(s, "{:<10}{:>8}{:>10}", "field", "count", "share");
    for (m, share) in &freq {
        let _ = writeln!(
            s,
            "{:<10}{:>8}{:>9.2}%",
            m.name(),
            share.count,
            share.fraction * 100.0
        );
    }
    let reports: Vec<ModelReport> = load_reports(&layout)?.into_values().collect();
    if !reports.is_empty() {
        let _ = writeln!(s);
        s.push_str(&Comparison::from_reports(&reports).to_table());
    }
    Ok(s)
}

/// Loads the saved artifact of each kind that has one.
pub fn load_artifacts(layout: &Layout) -> AppResult<BTreeMap<ModelKind, ModelArtifact>> {
    let mut out = BTreeMap::new();
    for kind in ModelKind::ALL {
        let path = layout.artifact(kind);
        if path.is_file() {
            out.insert(kind, ModelArtifact::load(&path)?);
        }
    }
    if out.is_empty() {
        return Err(AppError::NoArtifacts(layout.root.join("models")));
    }
    Ok(out)
}
