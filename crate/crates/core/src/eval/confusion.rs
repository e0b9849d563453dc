use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C × C` grid; entry `(i, j)` counts items of true class `i` predicted as `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(y_true: &[usize], y_pred: &[usize], classes: usize) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::Shape {
                context: "confusion (y_true vs y_pred length)",
                expected: y_true.len(),
                found: y_pred.len(),
            });
        }
        let mut counts = vec![0u64; classes * classes];
        for (&t, &p) in y_true.iter().zip(y_pred) {
            if t >= classes || p >= classes {
                return Err(Error::InvalidInput(format!(
                    "label code {} out of range for {classes} classes",
                    t.max(p)
                )));
            }
            counts[t * classes + p] += 1;
        }
        Ok(Self { classes, counts })
    }

    pub fn from_counts(classes: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != classes * classes {
            return Err(Error::Shape {
                context: "confusion grid",
                expected: classes * classes,
                found: counts.len(),
            });
        }
        Ok(Self { classes, counts })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    /// Row sums: how many items truly belong to each class.
    pub fn supports(&self) -> Vec<u64> {
        (0..self.classes)
            .map(|r| (0..self.classes).map(|c| self.get(r, c)).sum())
            .collect()
    }

    /// Column sums: how often each class was predicted.
    pub fn predicted_totals(&self) -> Vec<u64> {
        (0..self.classes)
            .map(|c| (0..self.classes).map(|r| self.get(r, c)).sum())
            .collect()
    }
}

/// One-vs-rest counts summed over all classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    /// `TP + FN = N`, `TP + FP = N`, `FP = FN`, `TN = N (C - 1) - FP`.
    pub fn identities_hold(&self, n: u64, classes: u64) -> bool {
        self.tp + self.fn_ == n
            && self.tp + self.fp == n
            && self.fp == self.fn_
            && self.tn + self.fp == n * classes.saturating_sub(1)
    }
}

/// For single-label data every miss is one FP (for the predicted class) and one FN
/// (for the true class), and every item is a TN for the `C - 2` uninvolved classes
/// (or `C - 1` when correct).
pub fn micro_ovr_counts(cm: &ConfusionMatrix) -> Result<ConfusionCounts> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::UndefinedMetric);
    }
    let tp = cm.trace();
    let miss = n - tp;
    Ok(ConfusionCounts {
        tp,
        fp: miss,
        tn: n * (cm.classes() as u64 - 1) - miss,
        fn_: miss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let cm = ConfusionMatrix::new(&[0, 1], &[0, 1], 2).unwrap();
        assert_eq!((cm.get(0, 0), cm.get(1, 1), cm.get(0, 1)), (1, 1, 0));
        let cm = ConfusionMatrix::new(&[0, 0], &[1, 1], 2).unwrap();
        assert_eq!(cm.get(0, 1), 2);
        assert!(ConfusionMatrix::new(&[0], &[0, 1], 2).is_err());
        assert!(ConfusionMatrix::new(&[0], &[2], 2).is_err());
    }

    #[test]
    fn micro_counts_spot_values() {
        let run = |correct: usize, n: usize, classes: usize| {
            let y_true: Vec<usize> = (0..n).map(|i| i % classes).collect();
            let y_pred: Vec<usize> = y_true
                .iter()
                .enumerate()
                .map(|(i, &t)| if i < correct { t } else { (t + 1) % classes })
                .collect();
            micro_ovr_counts(&ConfusionMatrix::new(&y_true, &y_pred, classes).unwrap()).unwrap()
        };
        assert_eq!(
            run(39, 44, 6),
            ConfusionCounts {
                tp: 39,
                fp: 5,
                tn: 215,
                fn_: 5
            }
        );
        assert_eq!(
            run(38, 44, 6),
            ConfusionCounts {
                tp: 38,
                fp: 6,
                tn: 214,
                fn_: 6
            }
        );
        assert_eq!(
            run(10, 10, 3),
            ConfusionCounts {
                tp: 10,
                fp: 0,
                tn: 20,
                fn_: 0
            }
        );
        assert!(run(39, 44, 6).identities_hold(44, 6));
        let empty = ConfusionMatrix::new(&[], &[], 6).unwrap();
        assert_eq!(micro_ovr_counts(&empty), Err(Error::UndefinedMetric));
    }
}
