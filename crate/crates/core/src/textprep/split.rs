use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{floor, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    /// Shuffled order; this is the order training consumes.
    pub train_indices: Vec<usize>,
    /// Ascending.
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

/// Seeded uniform permutation of `0..n`.
pub fn shuffle(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    SeededRng::new(seed).shuffle(&mut perm);
    perm
}

/// Round half up; the tiny slack absorbs representation error such as `0.7 * 5 = 3.4999…`.
pub fn round_half_up(x: f64) -> usize {
    floor(x + 0.5 + 1e-9) as usize
}

/// Per-class split: each class contributes `round_half_up(ratio * size)` members to
/// train (kept within `1..size` so both sides see every class), chosen by a seeded
/// shuffle of the class members. The combined train list is shuffled once more.
pub fn stratified_split(labels: &[usize], ratio: f64, seed: u64) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput("labels to split"));
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        classes.entry(y).or_default().push(i);
    }
    if let Some((&class, members)) = classes.iter().find(|(_, m)| m.len() < 2) {
        return Err(Error::Stratification {
            class,
            count: members.len(),
        });
    }
    let mut rng = SeededRng::new(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for members in classes.values_mut() {
        rng.shuffle(members);
        let n = members.len();
        let k = round_half_up(ratio * n as f64).clamp(1, n - 1);
        train.extend_from_slice(&members[..k]);
        test.extend_from_slice(&members[k..]);
    }
    rng.shuffle(&mut train);
    test.sort_unstable();
    Ok(DatasetSplit {
        train_indices: train,
        test_indices: test,
        seed,
        ratio,
    })
}
