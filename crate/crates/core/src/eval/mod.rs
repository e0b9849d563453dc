//! Confusion matrices, per-class and averaged metrics, micro one-vs-rest counts.

mod confusion;
mod metrics;
mod report;

pub use confusion::{micro_ovr_counts, ConfusionCounts, ConfusionMatrix};
pub use metrics::{
    accuracy, f1_per_class, macro_avg, precision_per_class, recall_per_class, weighted_avg,
    PerClass,
};
pub use report::{build_report, Averages, ClassMetrics, EvaluationReport};
