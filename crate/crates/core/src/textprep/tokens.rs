use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard English stop-word list, one word per line.
pub const DEFAULT_STOP_WORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StopWordList {
    words: BTreeSet<String>,
}

impl StopWordList {
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_STOP_WORDS).expect("bundled stop words are valid")
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut words = BTreeSet::new();
        for (n, line) in text.lines().enumerate() {
            let w = line.trim();
            if w.is_empty() || w.starts_with('#') {
                continue;
            }
            Self::check(w)
                .map_err(|msg| Error::InvalidInput(format!("stop-word line {}: {msg}", n + 1)))?;
            words.insert(w.to_string());
        }
        Ok(Self { words })
    }

    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for w in words {
            let w = w.as_ref();
            Self::check(w).map_err(|msg| Error::InvalidInput(msg.into()))?;
            set.insert(w.to_string());
        }
        Ok(Self { words: set })
    }

    fn check(w: &str) -> core::result::Result<(), &'static str> {
        if w.chars().any(char::is_whitespace) {
            return Err("stop words may not contain whitespace");
        }
        if w.chars().any(char::is_uppercase) {
            return Err("stop words must be lowercase");
        }
        Ok(())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercase, split on every non-alphanumeric character, drop stop words.
pub fn normalize(text: &str, stops: &StopWordList) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .filter(|t| !stops.contains(t))
        .collect()
}
