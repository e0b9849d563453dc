//! CART classification tree on count features, split by Gini impurity.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{check_dimension, Dataset, Prediction};
use crate::error::{Error, Result};
use crate::textprep::CountVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitCriterion {
    #[default]
    Gini,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    /// `None` grows until the leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub criterion: SplitCriterion,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            criterion: SplitCriterion::Gini,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    dimension: usize,
    classes: usize,
    /// Root at index 0.
    nodes: Vec<TreeNode>,
}

struct Builder<'a> {
    data: &'a Dataset,
    params: &'a TreeParams,
    /// Per feature: (row, count) for every non-zero entry, rows ascending.
    columns: Vec<Vec<(usize, u32)>>,
    nodes: Vec<TreeNode>,
}

#[derive(Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// `n - Σ c² / n`, i.e. `n · gini`.
fn weighted_gini(counts: &[u32], n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| f64::from(c) * f64::from(c)).sum();
    f64::from(n) - sq / f64::from(n)
}

impl<'a> Builder<'a> {
    fn class_counts(&self, rows: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.data.classes()];
        for &r in rows {
            counts[self.data.labels()[r]] += 1;
        }
        counts
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.class_counts(&rows);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        let too_small = rows.len() < self.params.min_samples_split.max(2);
        let split = if pure || depth_reached || too_small {
            None
        } else {
            self.best_split(&rows, &counts)
        };
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { counts });
        if let Some(s) = split {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&r| f64::from(self.data.vectors()[r].get(s.feature)) <= s.threshold);
            let left = self.grow(left_rows, depth + 1);
            let right = self.grow(right_rows, depth + 1);
            self.nodes[id] = TreeNode::Split {
                feature: s.feature,
                threshold: s.threshold,
                left,
                right,
            };
        }
        id
    }

    /// Lowest weighted child impurity; ties keep the earlier (lower feature, then
    /// lower threshold) candidate.
    fn best_split(&self, rows: &[usize], node_counts: &[u32]) -> Option<Split> {
        let n = rows.len() as u32;
        let mut in_node = vec![false; self.data.len()];
        for &r in rows {
            in_node[r] = true;
        }
        let mut best: Option<Split> = None;
        let mut by_value: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (feature, column) in self.columns.iter().enumerate() {
            by_value.clear();
            let mut nonzero = vec![0u32; node_counts.len()];
            for &(r, c) in column {
                if in_node[r] {
                    let y = self.data.labels()[r];
                    by_value
                        .entry(c)
                        .or_insert_with(|| vec![0; node_counts.len()])[y] += 1;
                    nonzero[y] += 1;
                }
            }
            let zeros: Vec<u32> = node_counts
                .iter()
                .zip(&nonzero)
                .map(|(a, b)| a - b)
                .collect();
            if zeros.iter().any(|&z| z > 0) {
                by_value.insert(0, zeros);
            }
            if by_value.len() < 2 {
                continue;
            }
            let mut left = vec![0u32; node_counts.len()];
            let mut left_n = 0u32;
            let values: Vec<(&u32, &Vec<u32>)> = by_value.iter().collect();
            for w in values.windows(2) {
                let (&v, counts) = w[0];
                let &next = w[1].0;
                for (l, c) in left.iter_mut().zip(counts) {
                    *l += c;
                    left_n += c;
                }
                let right: Vec<u32> = node_counts.iter().zip(&left).map(|(a, b)| a - b).collect();
                let score = weighted_gini(&left, left_n) + weighted_gini(&right, n - left_n);
                let threshold = (f64::from(v) + f64::from(next)) / 2.0;
                if best.map_or(true, |b| score < b.score - 1e-12 * f64::from(n)) {
                    best = Some(Split {
                        feature,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

impl DecisionTreeModel {
    pub fn train(data: &Dataset, params: &TreeParams) -> Result<Self> {
        data.require_non_empty("decision tree")?;
        let mut columns = vec![Vec::new(); data.dimension()];
        for (r, v) in data.vectors().iter().enumerate() {
            for &(i, c) in v.entries() {
                columns[i].push((r, c));
            }
        }
        let mut builder = Builder {
            data,
            params,
            columns,
            nodes: Vec::new(),
        };
        builder.grow((0..data.len()).collect(), 0);
        Ok(Self {
            dimension: data.dimension(),
            classes: data.classes(),
            nodes: builder.nodes,
        })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Structural check for deserialized trees: children point forward, features
    /// are in range, every leaf holds samples of the right number of classes.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidInput("decision tree has no nodes".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= self.dimension {
                        return Err(Error::Shape {
                            context: "tree split feature",
                            expected: self.dimension,
                            found: *feature,
                        });
                    }
                    if !threshold.is_finite()
                        || [*left, *right]
                            .iter()
                            .any(|&c| c <= i || c >= self.nodes.len())
                    {
                        return Err(Error::InvalidInput(format!("tree node {i} is malformed")));
                    }
                }
                TreeNode::Leaf { counts } => {
                    if counts.len() != self.classes {
                        return Err(Error::Shape {
                            context: "tree leaf counts",
                            expected: self.classes,
                            found: counts.len(),
                        });
                    }
                    if counts.iter().all(|&c| c == 0) {
                        return Err(Error::InvalidInput(format!("tree leaf {i} is empty")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn predict(&self, x: &CountVector) -> Result<Prediction> {
        check_dimension(self.dimension, x)?;
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if f64::from(x.get(*feature)) <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                TreeNode::Leaf { counts } => {
                    let total: u32 = counts.iter().sum();
                    let dist = counts
                        .iter()
                        .map(|&c| f64::from(c) / f64::from(total))
                        .collect();
                    return Ok(Prediction::from_distribution(dist));
                }
            }
        }
    }
}
