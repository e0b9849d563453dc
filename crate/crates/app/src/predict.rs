//! Human-facing prediction output: every label with a two-decimal percentage.

use std::fmt;

use careerpath_core::corpus::MasterField;
use careerpath_core::model::ModelKind;
use serde::{Deserialize, Serialize};

use crate::artifact::ModelArtifact;
use crate::error::AppResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLabel {
    pub label: String,
    pub code: usize,
    /// Hundredths of a percent; the ranking's entries sum to exactly 10000.
    pub hundredths: u32,
    pub percentage: f64,
    /// `"56.94%"`
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResponse {
    pub model: ModelKind,
    /// Descending; equal percentages keep label-code order.
    pub ranking: Vec<RankedLabel>,
    pub tokens: Vec<String>,
    /// Input tokens missing from the vocabulary, first occurrence order.
    pub oov: Vec<String>,
    /// True when no input token is in the vocabulary, so the ranking reflects
    /// the model's response to an empty document.
    pub low_confidence: bool,
}

/// Hundredths of a percent per class via largest remainder: floors first, then
/// the leftover units to the biggest fractional parts (lower code on ties).
pub fn to_hundredths(distribution: &[f64]) -> Vec<u32> {
    let total: f64 = distribution.iter().sum();
    let scaled: Vec<f64> = distribution.iter().map(|p| p / total * 10_000.0).collect();
    let mut units: Vec<u32> = scaled.iter().map(|s| s.floor() as u32).collect();
    let assigned: u32 = units.iter().sum();
    let mut order: Vec<usize> = (0..scaled.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (scaled[a] - scaled[a].floor(), scaled[b] - scaled[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order
        .iter()
        .take(10_000usize.saturating_sub(assigned as usize))
    {
        units[i] += 1;
    }
    units
}

pub fn rank(distribution: &[f64]) -> Vec<RankedLabel> {
    let units = to_hundredths(distribution);
    let mut ranking: Vec<RankedLabel> = MasterField::ALL
        .iter()
        .zip(&units)
        .map(|(m, &u)| RankedLabel {
            label: m.name().to_string(),
            code: m.code(),
            hundredths: u,
            percentage: f64::from(u) / 100.0,
            display: format!("{}.{:02}%", u / 100, u % 100),
        })
        .collect();
    ranking.sort_by(|a, b| b.hundredths.cmp(&a.hundredths).then(a.code.cmp(&b.code)));
    ranking
}

pub fn predict_response(artifact: &ModelArtifact, skills: &str) -> AppResult<PredictionResponse> {
    let (tokens, x) = artifact.featurize(skills);
    let prediction = artifact.predict(&x)?;
    let mut oov: Vec<String> = Vec::new();
    for t in &tokens {
        if artifact.vocabulary.index_of(t).is_none() && !oov.contains(t) {
            oov.push(t.clone());
        }
    }
    Ok(PredictionResponse {
        model: artifact.kind(),
        ranking: rank(&prediction.distribution),
        low_confidence: x.nnz() == 0,
        tokens,
        oov,
    })
}

impl fmt::Display for PredictionResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model: {}", self.model)?;
        for r in &self.ranking {
            writeln!(f, "{:<8}{:>8}", r.label, r.display)?;
        }
        if !self.oov.is_empty() {
            writeln!(f, "not in vocabulary: {}", self.oov.join(", "))?;
        }
        if self.low_confidence {
            writeln!(f, "low confidence: no input skill is known to the model")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remainders_go_to_largest_fractions() {
        assert_eq!(
            to_hundredths(
                &[1.0 / 3.0; 3]
                    .iter()
                    .copied()
                    .chain([0.0; 3])
                    .collect::<Vec<_>>()
            ),
            vec![3334, 3333, 3333, 0, 0, 0]
        );
        let u = to_hundredths(&[0.5694, 0.2, 0.1, 0.05, 0.05, 0.0306]);
        assert_eq!(u, vec![5694, 2000, 1000, 500, 500, 306]);
    }

    #[test]
    fn ranking_is_descending_and_complete() {
        let r = rank(&[0.1, 0.1, 0.5, 0.1, 0.1, 0.1]);
        assert_eq!(r[0].label, "DEV");
        assert_eq!(r[0].display, "50.00%");
        let codes: Vec<usize> = r[1..].iter().map(|x| x.code).collect();
        assert_eq!(codes, vec![0, 1, 3, 4, 5]);
        assert_eq!(r.iter().map(|x| x.hundredths).sum::<u32>(), 10_000);
    }

    #[test]
    fn display_pads_hundredths() {
        let r = rank(&[0.0705, 0.9295, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r[1].display, "7.05%");
        assert_eq!(r[5].display, "0.00%");
    }
}
