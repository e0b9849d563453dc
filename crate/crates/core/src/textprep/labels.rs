use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::MasterField;
use crate::error::{Error, Result};

/// Fixed label ↔ code table: AI 0, DS 1, DEV 2, SEC 3, SDE 4, UI / UX 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelEncoder;

impl LabelEncoder {
    pub fn encode(&self, label: &str) -> Result<usize> {
        label.parse::<MasterField>().map(MasterField::code)
    }

    pub fn decode(&self, code: usize) -> Result<&'static str> {
        MasterField::from_code(code).map(MasterField::name)
    }

    pub fn num_classes(&self) -> usize {
        MasterField::COUNT
    }

    pub fn labels(&self) -> impl Iterator<Item = (usize, &'static str)> {
        MasterField::ALL.into_iter().map(|m| (m.code(), m.name()))
    }
}

// Serialized as the label list in code order so artifacts show the table they were built with.
impl Serialize for LabelEncoder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_seq(MasterField::ALL.iter().map(|m| m.name()))
    }
}

impl<'de> Deserialize<'de> for LabelEncoder {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(d)?;
        let expected: Vec<&str> = MasterField::ALL.iter().map(|m| m.name()).collect();
        if labels != expected {
            return Err(serde::de::Error::custom(Error::InvalidInput(
                alloc::format!("label table {labels:?} differs from {expected:?}"),
            )));
        }
        Ok(LabelEncoder)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table() {
        let enc = LabelEncoder;
        let expected = [
            ("AI", 0),
            ("DS", 1),
            ("DEV", 2),
            ("SEC", 3),
            ("SDE", 4),
            ("UI / UX", 5),
        ];
        for (label, code) in expected {
            assert_eq!(enc.encode(label), Ok(code));
            assert_eq!(enc.decode(code), Ok(label));
            assert_eq!(enc.decode(enc.encode(label).unwrap()), Ok(label));
        }
        assert_eq!(enc.encode("UI/UX"), Ok(5));
        assert!(matches!(enc.encode("Chef"), Err(Error::UnknownLabel(_))));
        assert_eq!(enc.decode(6), Err(Error::UnknownCode(6)));
    }
}
