use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ConfusionMatrix;
use crate::error::{Error, Result};

/// A per-class metric. Where the denominator is zero the value is 0 and the flag is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerClass {
    pub values: Vec<f64>,
    pub zero_division: Vec<bool>,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn per_class(cm: &ConfusionMatrix, dens: &[u64]) -> PerClass {
    let (values, zero_division) = dens
        .iter()
        .enumerate()
        .map(|(c, &d)| ratio(cm.get(c, c), d))
        .unzip();
    PerClass {
        values,
        zero_division,
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::UndefinedMetric);
    }
    Ok(cm.trace() as f64 / n as f64)
}

pub fn precision_per_class(cm: &ConfusionMatrix) -> PerClass {
    per_class(cm, &cm.predicted_totals())
}

pub fn recall_per_class(cm: &ConfusionMatrix) -> PerClass {
    per_class(cm, &cm.supports())
}

pub fn f1_per_class(cm: &ConfusionMatrix) -> PerClass {
    let p = precision_per_class(cm);
    let r = recall_per_class(cm);
    let (values, zero_division) = p
        .values
        .iter()
        .zip(&r.values)
        .map(|(&p, &r)| {
            if p + r > 0.0 {
                (2.0 * p * r / (p + r), false)
            } else {
                (0.0, true)
            }
        })
        .unzip();
    PerClass {
        values,
        zero_division,
    }
}

pub fn macro_avg(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::UndefinedMetric);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn weighted_avg(values: &[f64], supports: &[u64]) -> Result<f64> {
    if values.len() != supports.len() {
        return Err(Error::Shape {
            context: "weighted average supports",
            expected: values.len(),
            found: supports.len(),
        });
    }
    let n: u64 = supports.iter().sum();
    if n == 0 {
        return Err(Error::UndefinedMetric);
    }
    Ok(values
        .iter()
        .zip(supports)
        .map(|(v, &s)| v * s as f64)
        .sum::<f64>()
        / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn two_class_grid() {
        let cm = ConfusionMatrix::from_counts(2, vec![3, 1, 2, 4]).unwrap();
        let (p, r, f) = (
            precision_per_class(&cm),
            recall_per_class(&cm),
            f1_per_class(&cm),
        );
        assert!(close(p.values[0], 0.6) && close(p.values[1], 0.8));
        assert!(close(r.values[0], 0.75) && close(r.values[1], 2.0 / 3.0));
        assert!(close(f.values[0], 2.0 / 3.0) && close(f.values[1], 8.0 / 11.0));
        assert!(close(accuracy(&cm).unwrap(), 0.7));
    }

    #[test]
    fn perfect_and_degenerate() {
        let cm = ConfusionMatrix::new(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        assert_eq!(precision_per_class(&cm).values, vec![1.0; 3]);
        assert_eq!(f1_per_class(&cm).values, vec![1.0; 3]);
        assert_eq!(accuracy(&cm), Ok(1.0));

        // class 1 is never predicted
        let cm = ConfusionMatrix::new(&[0, 1], &[0, 0], 2).unwrap();
        let p = precision_per_class(&cm);
        assert_eq!((p.values[1], p.zero_division[1]), (0.0, true));
        assert!(!p.zero_division[0]);
        assert_eq!(
            accuracy(&ConfusionMatrix::new(&[], &[], 2).unwrap()),
            Err(Error::UndefinedMetric)
        );
    }

    #[test]
    fn paper_accuracies() {
        let make = |correct: usize| {
            let t = vec![0usize; 44];
            let p: Vec<usize> = (0..44).map(|i| if i < correct { 0 } else { 1 }).collect();
            accuracy(&ConfusionMatrix::new(&t, &p, 6).unwrap()).unwrap()
        };
        assert!((make(39) - 0.8864).abs() < 5e-5);
        assert!((make(34) - 0.7727).abs() < 5e-5);
    }

    #[test]
    fn averages() {
        assert_eq!(macro_avg(&[1.0, 0.5]), Ok(0.75));
        assert_eq!(weighted_avg(&[1.0, 0.5], &[10, 10]), Ok(0.75));
        assert_eq!(weighted_avg(&[1.0, 0.5], &[30, 10]), Ok(0.875));
        assert_eq!(macro_avg(&[0.3]), Ok(0.3));
        assert_eq!(weighted_avg(&[0.3], &[4]), Ok(0.3));
    }
}
