use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::*;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Names of the metrics that hit a zero denominator and were set to 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zero_division: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub n: u64,
    pub accuracy: f64,
    pub classes: Vec<ClassMetrics>,
    /// Unweighted mean over the classes that occur in the truth or the predictions.
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub counts: ConfusionCounts,
    pub confusion: ConfusionMatrix,
}

pub fn build_report(
    y_true: &[usize],
    y_pred: &[usize],
    labels: &[&str],
    model: &str,
) -> Result<EvaluationReport> {
    let cm = ConfusionMatrix::new(y_true, y_pred, labels.len())?;
    let accuracy = accuracy(&cm)?;
    let (p, r, f) = (
        precision_per_class(&cm),
        recall_per_class(&cm),
        f1_per_class(&cm),
    );
    let supports = cm.supports();
    let predicted = cm.predicted_totals();
    let classes: Vec<ClassMetrics> = labels
        .iter()
        .enumerate()
        .map(|(c, label)| {
            let zero_division = [("precision", &p), ("recall", &r), ("f1", &f)]
                .into_iter()
                .filter(|(_, m)| m.zero_division[c])
                .map(|(name, _)| name.to_string())
                .collect();
            ClassMetrics {
                label: label.to_string(),
                precision: p.values[c],
                recall: r.values[c],
                f1: f.values[c],
                support: supports[c],
                zero_division,
            }
        })
        .collect();
    let active: Vec<usize> = (0..labels.len())
        .filter(|&c| supports[c] > 0 || predicted[c] > 0)
        .collect();
    let pick = |m: &PerClass| active.iter().map(|&c| m.values[c]).collect::<Vec<_>>();
    let n = cm.total();
    let macro_avg = Averages {
        precision: macro_avg(&pick(&p))?,
        recall: macro_avg(&pick(&r))?,
        f1: macro_avg(&pick(&f))?,
        support: n,
    };
    let weighted_avg = Averages {
        precision: weighted_avg(&p.values, &supports)?,
        recall: weighted_avg(&r.values, &supports)?,
        f1: weighted_avg(&f.values, &supports)?,
        support: n,
    };
    Ok(EvaluationReport {
        model: model.to_string(),
        n,
        accuracy,
        classes,
        macro_avg,
        weighted_avg,
        counts: micro_ovr_counts(&cm)?,
        confusion: cm,
    })
}

impl EvaluationReport {
    /// Aligned plain-text rendering: accuracy, per-class table, averages, counts, grid.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model: {}", self.model);
        let _ = writeln!(
            s,
            "accuracy: {:.2}% ({} of {})",
            self.accuracy * 100.0,
            self.counts.tp,
            self.n
        );
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<14}{:>10}{:>10}{:>10}{:>10}",
            "", "precision", "recall", "f1-score", "support"
        );
        for c in &self.classes {
            let flag = if c.zero_division.is_empty() {
                ""
            } else {
                "  *"
            };
            let _ = writeln!(
                s,
                "{:<14}{:>10.2}{:>10.2}{:>10.2}{:>10}{flag}",
                c.label, c.precision, c.recall, c.f1, c.support
            );
        }
        let _ = writeln!(s);
        for (name, a) in [
            ("macro avg", &self.macro_avg),
            ("weighted avg", &self.weighted_avg),
        ] {
            let _ = writeln!(
                s,
                "{:<14}{:>10.2}{:>10.2}{:>10.2}{:>10}",
                name, a.precision, a.recall, a.f1, a.support
            );
        }
        if self.classes.iter().any(|c| !c.zero_division.is_empty()) {
            let _ = writeln!(s, "  * zero denominator, reported as 0");
        }
        let _ = writeln!(s);
        let ConfusionCounts { tp, fp, tn, fn_ } = self.counts;
        let _ = writeln!(s, "TP {tp}  FP {fp}  TN {tn}  FN {fn_}");
        let _ = writeln!(s);
        let width = self
            .classes
            .iter()
            .map(|c| c.label.len())
            .max()
            .unwrap_or(0)
            .max(5)
            + 2;
        let _ = write!(s, "{:<width$}", "true\\pred");
        for c in &self.classes {
            let _ = write!(s, "{:>width$}", c.label);
        }
        let _ = writeln!(s);
        for (i, c) in self.classes.iter().enumerate() {
            let _ = write!(s, "{:<width$}", c.label);
            for j in 0..self.classes.len() {
                let _ = write!(s, "{:>width$}", self.confusion.get(i, j));
            }
            let _ = writeln!(s);
        }
        s
    }

    pub fn check_invariants(&self) -> Result<()> {
        let classes = self.classes.len() as u64;
        if !self.counts.identities_hold(self.n, classes) {
            return Err(Error::InvalidInput(format!(
                "confusion counts {:?} violate identities",
                self.counts
            )));
        }
        Ok(())
    }
}
