//! From labeled text to numeric training data.

mod labels;
mod split;
mod tokens;
mod vocab;

pub use labels::LabelEncoder;
pub use split::{round_half_up, shuffle, stratified_split, DatasetSplit};
pub use tokens::{normalize, StopWordList, DEFAULT_STOP_WORDS};
pub use vocab::{build_vocabulary, vectorize, CountVector, Vocabulary};
