use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token → contiguous index, assigned in lexicographic token order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    token_to_index: BTreeMap<String, usize>,
    tokens: Vec<String>,
    document_frequency: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
    document_frequency: Vec<usize>,
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(repr: VocabularyRepr) -> Result<Self> {
        if repr.tokens.len() != repr.document_frequency.len() {
            return Err(Error::Shape {
                context: "vocabulary document frequencies",
                expected: repr.tokens.len(),
                found: repr.document_frequency.len(),
            });
        }
        if repr.tokens.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "vocabulary tokens must be strictly increasing".into(),
            ));
        }
        let token_to_index = repr
            .tokens
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();
        Ok(Self {
            token_to_index,
            tokens: repr.tokens,
            document_frequency: repr.document_frequency,
        })
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        Self {
            tokens: v.tokens,
            document_frequency: v.document_frequency,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.token_to_index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }

    /// `token<TAB>index<TAB>document_frequency` per line, in index order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, (t, df)) in self.tokens.iter().zip(&self.document_frequency).enumerate() {
            let _ = writeln!(out, "{t}\t{i}\t{df}");
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut document_frequency = Vec::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let bad = || {
                Error::InvalidInput(format!(
                    "vocabulary line {}: expected token, index, frequency",
                    n + 1
                ))
            };
            let mut cols = line.split('\t');
            let (Some(t), Some(i), Some(df), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(bad());
            };
            if i.parse::<usize>().map_err(|_| bad())? != tokens.len() {
                return Err(bad());
            }
            tokens.push(String::from(t));
            document_frequency.push(df.parse().map_err(|_| bad())?);
        }
        VocabularyRepr {
            tokens,
            document_frequency,
        }
        .try_into()
    }
}

pub fn build_vocabulary<S: AsRef<str>>(corpus: &[Vec<S>]) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("vocabulary corpus"));
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus {
        let mut seen: Vec<&str> = doc.iter().map(AsRef::as_ref).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(String::from(t)).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let (tokens, document_frequency): (Vec<String>, Vec<usize>) = df.into_iter().unzip();
    Ok(VocabularyRepr {
        tokens,
        document_frequency,
    }
    .try_into()
    .expect("BTreeMap keys are sorted and unique"))
}

/// Sparse term counts over a fixed vocabulary. Entries are sorted by index and
/// every stored count is at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    dimension: usize,
    entries: Vec<(usize, u32)>,
}

impl CountVector {
    pub fn zeros(dimension: usize) -> Self {
        Self {
            dimension,
            entries: Vec::new(),
        }
    }

    /// Build from arbitrary (index, count) pairs; duplicates are summed, zero counts dropped.
    pub fn from_pairs(
        dimension: usize,
        pairs: impl IntoIterator<Item = (usize, u32)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for (i, c) in pairs {
            if i >= dimension {
                return Err(Error::Shape {
                    context: "count vector index",
                    expected: dimension,
                    found: i,
                });
            }
            *map.entry(i).or_default() += c;
        }
        Ok(Self {
            dimension,
            entries: map.into_iter().filter(|(_, c)| *c > 0).collect(),
        })
    }

    pub fn from_dense(dense: &[u32]) -> Self {
        Self {
            dimension: dense.len(),
            entries: dense
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .map(|(i, c)| (i, *c))
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> u32 {
        self.entries
            .binary_search_by_key(&index, |(i, _)| *i)
            .map(|p| self.entries[p].1)
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, c)| u64::from(*c)).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        for (i, c) in &self.entries {
            out[*i] = f64::from(*c);
        }
        out
    }

    /// Multiply every count by `factor`.
    pub fn scaled(&self, factor: u32) -> Self {
        Self {
            dimension: self.dimension,
            entries: self
                .entries
                .iter()
                .map(|(i, c)| (*i, c * factor))
                .filter(|(_, c)| *c > 0)
                .collect(),
        }
    }

    /// Squared Euclidean distance by merging the two sparse supports.
    pub fn squared_distance(&self, other: &CountVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() || j < b.len() {
            let d = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    i += 1;
                    j += 1;
                    f64::from(x.1) - f64::from(y.1)
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    i += 1;
                    f64::from(x.1)
                }
                (Some(x), None) => {
                    i += 1;
                    f64::from(x.1)
                }
                (_, Some(y)) => {
                    j += 1;
                    f64::from(y.1)
                }
                (None, None) => unreachable!(),
            };
            sum += d * d;
        }
        sum
    }
}

/// Count known tokens; unknown ones are ignored.
pub fn vectorize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> CountVector {
    let mut map: BTreeMap<usize, u32> = BTreeMap::new();
    for t in tokens {
        if let Some(i) = vocab.index_of(t.as_ref()) {
            *map.entry(i).or_default() += 1;
        }
    }
    CountVector {
        dimension: vocab.len(),
        entries: map.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn docs(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter()
            .map(|d| d.iter().map(|t| t.to_string()).collect())
            .collect()
    }

    #[test]
    fn build_examples() {
        let v = build_vocabulary(&docs(&[&["b", "a"], &["a"]])).unwrap();
        assert_eq!(v.index_of("a"), Some(0));
        assert_eq!(v.index_of("b"), Some(1));
        assert_eq!((v.document_frequency(0), v.document_frequency(1)), (2, 1));

        let v = build_vocabulary(&docs(&[&["x"]])).unwrap();
        assert_eq!(v.index_of("x"), Some(0));

        let v = build_vocabulary(&docs(&[&["x", "x", "x"], &["y"]])).unwrap();
        assert_eq!(v.document_frequency(0), 1);

        assert_eq!(
            build_vocabulary(&docs(&[&[], &[]])),
            Err(Error::EmptyVocabulary)
        );
        assert_eq!(
            build_vocabulary::<String>(&[]),
            Err(Error::EmptyInput("vocabulary corpus"))
        );
    }

    #[test]
    fn vectorize_examples() {
        let v = build_vocabulary(&docs(&[&["ai", "ml"]])).unwrap();
        let c = vectorize(&["ml", "ml", "ai"], &v);
        assert_eq!(c.entries(), &[(0, 1), (1, 2)]);
        let oov = vectorize(&["zzz"], &v);
        assert_eq!((oov.nnz(), oov.dimension()), (0, 2));
        assert_eq!(vectorize::<&str>(&[], &v).to_dense(), vec![0.0, 0.0]);
    }

    #[test]
    fn tsv_round_trip() {
        let v = build_vocabulary(&docs(&[&["web", "ai"], &["ai"]])).unwrap();
        assert_eq!(v.to_tsv(), "ai\t0\t2\nweb\t1\t1\n");
        assert_eq!(Vocabulary::from_tsv(&v.to_tsv()).unwrap(), v);
        assert!(Vocabulary::from_tsv("b\t0\t1\na\t1\t1\n").is_err());
    }

    #[test]
    fn distance() {
        let a = CountVector::from_dense(&[1, 0, 3]);
        let b = CountVector::from_dense(&[0, 2, 1]);
        assert_eq!(a.squared_distance(&b), 1.0 + 4.0 + 4.0);
        assert_eq!(a.squared_distance(&a), 0.0);
    }

    proptest! {
        #[test]
        fn counts_sum_to_known_tokens(doc in proptest::collection::vec("[a-e]{1,2}", 0..20), vocab_docs in proptest::collection::vec(proptest::collection::vec("[a-e]{1,2}", 1..6), 1..5)) {
            let vocab = build_vocabulary(&vocab_docs).unwrap();
            let known = doc.iter().filter(|t| vocab.index_of(t).is_some()).count() as u64;
            let cv = vectorize(&doc, &vocab);
            prop_assert_eq!(cv.total(), known);
            prop_assert!(cv.entries().iter().all(|(i, c)| *c >= 1 && *i < cv.dimension()));
        }

        #[test]
        fn order_insensitive(mut corpus in proptest::collection::vec(proptest::collection::vec("[a-f]{1,3}", 1..5), 1..8), rot in 0usize..8) {
            let v1 = build_vocabulary(&corpus).unwrap();
            let k = rot % corpus.len();
            corpus.rotate_left(k);
            corpus.reverse();
            let v2 = build_vocabulary(&corpus).unwrap();
            prop_assert_eq!(v1.tokens(), v2.tokens());
            for (i, t) in v1.tokens().iter().enumerate() {
                prop_assert_eq!(v2.index_of(t), Some(i));
            }
        }
    }
}
