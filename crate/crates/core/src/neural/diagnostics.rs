use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LearningCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticConfig {
    /// Mean train−validation accuracy gap over the final quarter above which a
    /// rising validation loss counts as overfitting.
    pub gap_threshold: f64,
    /// Final train accuracy below this is underfitting.
    pub accuracy_floor: f64,
}

impl Default for DiagnosticConfig {
    fn default() -> Self {
        Self {
            gap_threshold: 0.10,
            accuracy_floor: 0.60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitDiagnosis {
    OverfittingTrend,
    Underfitting,
    Acceptable,
}

impl core::fmt::Display for FitDiagnosis {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            FitDiagnosis::OverfittingTrend => "overfitting-trend",
            FitDiagnosis::Underfitting => "underfitting",
            FitDiagnosis::Acceptable => "acceptable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverfitDiagnostic {
    /// Train accuracy minus validation accuracy, per epoch.
    pub gaps: Vec<f64>,
    pub final_quarter_gap: f64,
    /// Least-squares slope of validation loss over the final quarter.
    pub val_loss_slope: f64,
    pub classification: FitDiagnosis,
}

fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        num += dx * (y - my);
        den += dx * dx;
    }
    num / den
}

/// The final quarter is the last `max(2, ⌈n/4⌉)` epochs (all of them when fewer
/// exist). Underfitting is checked before overfitting.
pub fn overfit_gap(curve: &LearningCurve, config: &DiagnosticConfig) -> Result<OverfitDiagnostic> {
    let last = curve.last().ok_or(Error::EmptyInput("learning curve"))?;
    let gaps: Vec<f64> = curve
        .records
        .iter()
        .map(|r| r.train_accuracy - r.val_accuracy)
        .collect();
    let n = gaps.len();
    let window = n.div_ceil(4).max(2).min(n);
    let tail = &gaps[n - window..];
    let final_quarter_gap = tail.iter().sum::<f64>() / window as f64;
    let val_losses: Vec<f64> = curve.records[n - window..]
        .iter()
        .map(|r| r.val_loss)
        .collect();
    let val_loss_slope = slope(&val_losses);
    let classification = if last.train_accuracy < config.accuracy_floor {
        FitDiagnosis::Underfitting
    } else if final_quarter_gap > config.gap_threshold && val_loss_slope > 0.0 {
        FitDiagnosis::OverfittingTrend
    } else {
        FitDiagnosis::Acceptable
    };
    Ok(OverfitDiagnostic {
        gaps,
        final_quarter_gap,
        val_loss_slope,
        classification,
    })
}
