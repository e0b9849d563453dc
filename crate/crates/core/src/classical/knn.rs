use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{check_dimension, Dataset, Prediction};
use crate::error::{Error, Result};
use crate::textprep::CountVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 3 }
    }
}

/// Euclidean k-nearest neighbours with uniform votes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    classes: usize,
    dimension: usize,
    vectors: Vec<CountVector>,
    labels: Vec<usize>,
}

impl KnnModel {
    pub fn train(data: &Dataset, params: &KnnParams) -> Result<Self> {
        data.require_non_empty("knn")?;
        if params.k == 0 || params.k > data.len() {
            return Err(Error::InvalidParameter(format!(
                "k must lie in 1..={}, got {}",
                data.len(),
                params.k
            )));
        }
        Ok(Self {
            k: params.k,
            classes: data.classes(),
            dimension: data.dimension(),
            vectors: data.vectors().to_vec(),
            labels: data.labels().to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn validate(&self) -> Result<()> {
        if self.vectors.len() != self.labels.len() {
            return Err(Error::Shape {
                context: "knn labels",
                expected: self.vectors.len(),
                found: self.labels.len(),
            });
        }
        if self.k == 0 || self.k > self.vectors.len() {
            return Err(Error::InvalidParameter(format!(
                "k = {} with {} stored vectors",
                self.k,
                self.vectors.len()
            )));
        }
        if self.labels.iter().any(|&y| y >= self.classes) {
            return Err(Error::InvalidInput("knn label out of range".into()));
        }
        for v in &self.vectors {
            if v.dimension() != self.dimension
                || v.entries().iter().any(|&(i, _)| i >= self.dimension)
            {
                return Err(Error::Shape {
                    context: "knn stored vector",
                    expected: self.dimension,
                    found: v.dimension(),
                });
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Distance ties go to the lower training index; vote ties to the lower label code.
    pub fn predict(&self, x: &CountVector) -> Result<Prediction> {
        check_dimension(self.dimension, x)?;
        let mut dist: Vec<(f64, usize)> = self
            .vectors
            .iter()
            .map(|v| v.squared_distance(x))
            .zip(0..)
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0.0; self.classes];
        for &(_, i) in &dist[..self.k] {
            votes[self.labels[i]] += 1.0;
        }
        votes.iter_mut().for_each(|v| *v /= self.k as f64);
        Ok(Prediction::from_distribution(votes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn data(rows: &[(&[u32], usize)], classes: usize) -> Dataset {
        Dataset::new(
            rows.iter()
                .map(|(x, _)| CountVector::from_dense(x))
                .collect(),
            rows.iter().map(|(_, y)| *y).collect(),
            classes,
        )
        .unwrap()
    }

    #[test]
    fn majority_vote() {
        let d = data(&[(&[1, 0], 0), (&[2, 0], 0), (&[0, 1], 1), (&[9, 9], 1)], 2);
        let m = KnnModel::train(&d, &KnnParams { k: 3 }).unwrap();
        let p = m.predict(&CountVector::from_dense(&[1, 1])).unwrap();
        assert_eq!(p.label, 0);
        assert!((p.distribution[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.distribution[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_match_with_k1() {
        let d = data(&[(&[1, 0], 0), (&[0, 3], 1)], 2);
        let m = KnnModel::train(&d, &KnnParams { k: 1 }).unwrap();
        assert_eq!(
            m.predict(&CountVector::from_dense(&[0, 3])).unwrap().label,
            1
        );
    }

    #[test]
    fn three_way_tie_takes_lowest_code() {
        let d = data(&[(&[1, 0, 0], 2), (&[0, 1, 0], 1), (&[0, 0, 1], 0)], 3);
        let m = KnnModel::train(&d, &KnnParams { k: 3 }).unwrap();
        assert_eq!(
            m.predict(&CountVector::from_dense(&[0, 0, 0]))
                .unwrap()
                .label,
            0
        );
    }

    #[test]
    fn distance_tie_prefers_lower_index() {
        let d = data(&[(&[1, 0], 1), (&[0, 1], 0)], 2);
        let m = KnnModel::train(&d, &KnnParams { k: 1 }).unwrap();
        assert_eq!(
            m.predict(&CountVector::from_dense(&[0, 0])).unwrap().label,
            1
        );
    }

    #[test]
    fn k_bounds() {
        let d = data(&[(&[1], 0)], 1);
        assert!(KnnModel::train(&d, &KnnParams { k: 2 }).is_err());
        assert!(KnnModel::train(&d, &KnnParams { k: 0 }).is_err());
    }

    proptest! {
        #[test]
        fn scale_invariant(rows in proptest::collection::vec((proptest::collection::vec(0u32..5, 3), 0usize..3), 3..15), q in proptest::collection::vec(0u32..5, 3), c in 2u32..6) {
            let d = Dataset::new(rows.iter().map(|(x, _)| CountVector::from_dense(x)).collect(), rows.iter().map(|r| r.1).collect(), 3).unwrap();
            let scaled = Dataset::new(d.vectors().iter().map(|v| v.scaled(c)).collect(), d.labels().to_vec(), 3).unwrap();
            let m1 = KnnModel::train(&d, &KnnParams::default()).unwrap();
            let m2 = KnnModel::train(&scaled, &KnnParams::default()).unwrap();
            let q = CountVector::from_dense(&q);
            prop_assert_eq!(m1.predict(&q).unwrap(), m2.predict(&q.scaled(c)).unwrap());
        }
    }
}
