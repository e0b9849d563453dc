//! Survey records, the master-field taxonomy and row cleaning.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Taxonomy shipped with the crate; see `data/taxonomy.txt`.
pub const DEFAULT_TAXONOMY: &str = include_str!("../data/taxonomy.txt");

/// Default cut-off for [`mismatch_score`] below which a row is discarded.
pub const DEFAULT_DROP_THRESHOLD: f64 = 0.05;

/// The six consolidated career labels. Discriminants are the fixed label codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MasterField {
    #[serde(rename = "AI")]
    Ai = 0,
    #[serde(rename = "DS")]
    Ds = 1,
    #[serde(rename = "DEV")]
    Dev = 2,
    #[serde(rename = "SEC")]
    Sec = 3,
    #[serde(rename = "SDE")]
    Sde = 4,
    #[serde(rename = "UI / UX")]
    UiUx = 5,
}

impl MasterField {
    pub const ALL: [MasterField; 6] = [
        MasterField::Ai,
        MasterField::Ds,
        MasterField::Dev,
        MasterField::Sec,
        MasterField::Sde,
        MasterField::UiUx,
    ];

    pub const COUNT: usize = 6;

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Result<Self> {
        Self::ALL.get(code).copied().ok_or(Error::UnknownCode(code))
    }

    pub fn name(self) -> &'static str {
        match self {
            MasterField::Ai => "AI",
            MasterField::Ds => "DS",
            MasterField::Dev => "DEV",
            MasterField::Sec => "SEC",
            MasterField::Sde => "SDE",
            MasterField::UiUx => "UI / UX",
        }
    }
}

impl fmt::Display for MasterField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MasterField {
    type Err = Error;

    /// Accepts the canonical names with any case and spacing ("ui/ux", "UI / UX").
    fn from_str(s: &str) -> Result<Self> {
        let key = normalize_key(s);
        Self::ALL
            .into_iter()
            .find(|m| normalize_key(m.name()) == key)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// One student's questionnaire answers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SurveyRecord {
    /// 1..=12; `None` when the cell was empty or rejected.
    pub semester: Option<u8>,
    pub interest_field: String,
    pub research_field: Option<String>,
    pub higher_study_field: Option<String>,
    pub core_courses: Vec<String>,
    pub skills: Vec<String>,
    pub engaged: bool,
    pub contribution_field: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDocument {
    pub text: String,
    pub label: MasterField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DropReason {
    NoSkills,
    UnmappedField(String),
    ExtensiveMismatch { score: f64 },
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::NoSkills => f.write_str("no skills listed"),
            DropReason::UnmappedField(raw) => write!(f, "unmapped field {raw:?}"),
            DropReason::ExtensiveMismatch { score } => {
                write!(f, "extensive mismatch (score {score:.4})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CleaningAction {
    Kept { label: MasterField, score: f64 },
    Dropped(DropReason),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Position of the row in the input slice handed to [`clean`].
    pub row: usize,
    pub action: CleaningAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanDataset {
    pub documents: Vec<LabeledDocument>,
    pub provenance: Vec<Provenance>,
}

impl CleanDataset {
    pub fn dropped(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| matches!(p.action, CleaningAction::Dropped(_)))
            .count()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.documents.iter().map(|d| d.label.code()).collect()
    }
}

/// Lowercase, turn every non-alphanumeric run into one space, trim.
pub fn normalize_key(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for ch in s.chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MasterFieldTaxonomy {
    /// Suggested field display name → master field, in file order.
    fields: Vec<(String, MasterField)>,
    /// Required skills per master field (display names, file order, deduplicated).
    skills: BTreeMap<MasterField, Vec<String>>,
    /// Short form → canonical display name.
    aliases: Vec<(String, String)>,
    #[serde(skip)]
    index: TaxonomyIndex,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct TaxonomyIndex {
    alias: BTreeMap<String, String>,
    field: BTreeMap<String, MasterField>,
    skills: BTreeMap<MasterField, BTreeSet<String>>,
}

impl MasterFieldTaxonomy {
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_TAXONOMY).expect("bundled taxonomy is valid")
    }

    /// Parse the line format of `data/taxonomy.txt`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = Vec::new();
        let mut skills: BTreeMap<MasterField, Vec<String>> = BTreeMap::new();
        let mut aliases = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: &str| Error::TaxonomySyntax {
                line: n + 1,
                message: message.to_string(),
            };
            let (keyword, rest) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| syntax("missing body"))?;
            let rest = rest.trim();
            match keyword {
                "field" => {
                    let (name, master) = rest
                        .split_once("->")
                        .ok_or_else(|| syntax("expected `field <name> -> <MASTER>`"))?;
                    let master = master
                        .trim()
                        .parse::<MasterField>()
                        .map_err(|_| syntax("unknown master field"))?;
                    let name = name.trim();
                    if name.is_empty() {
                        return Err(syntax("empty field name"));
                    }
                    fields.push((name.to_string(), master));
                }
                "skills" => {
                    let (master, list) = rest
                        .split_once(':')
                        .ok_or_else(|| syntax("expected `skills <MASTER>: a; b`"))?;
                    let master = master
                        .trim()
                        .parse::<MasterField>()
                        .map_err(|_| syntax("unknown master field"))?;
                    let entry = skills.entry(master).or_default();
                    for skill in list.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                        if !entry.iter().any(|s| s == skill) {
                            entry.push(skill.to_string());
                        }
                    }
                }
                "alias" => {
                    let (short, long) = rest
                        .split_once('=')
                        .ok_or_else(|| syntax("expected `alias <short> = <name>`"))?;
                    let (short, long) = (short.trim(), long.trim());
                    if short.is_empty() || long.is_empty() {
                        return Err(syntax("empty alias"));
                    }
                    aliases.push((short.to_string(), long.to_string()));
                }
                _ => return Err(syntax("unknown keyword")),
            }
        }
        Self::new(fields, skills, aliases)
    }

    pub fn new(
        fields: Vec<(String, MasterField)>,
        skills: BTreeMap<MasterField, Vec<String>>,
        aliases: Vec<(String, String)>,
    ) -> Result<Self> {
        let mut index = TaxonomyIndex::default();
        for (short, long) in &aliases {
            let (k, v) = (normalize_key(short), normalize_key(long));
            if let Some(prev) = index.alias.insert(k.clone(), v.clone()) {
                if prev != v {
                    return Err(Error::Taxonomy(format!("alias {short:?} has two targets")));
                }
            }
        }
        let resolve = |s: &str| {
            let k = normalize_key(s);
            index.alias.get(&k).cloned().unwrap_or(k)
        };
        let mut field_index = BTreeMap::new();
        for (name, master) in &fields {
            if let Some(prev) = field_index.insert(resolve(name), *master) {
                if prev != *master {
                    return Err(Error::Taxonomy(format!(
                        "field {name:?} maps to both {prev} and {master}"
                    )));
                }
            }
        }
        let mut skill_index = BTreeMap::new();
        for master in MasterField::ALL {
            let set: BTreeSet<String> = skills
                .get(&master)
                .into_iter()
                .flatten()
                .map(|s| resolve(s))
                .filter(|s| !s.is_empty())
                .collect();
            if set.is_empty() {
                return Err(Error::Taxonomy(format!(
                    "master field {master} has no required skills"
                )));
            }
            skill_index.insert(master, set);
        }
        for master in MasterField::ALL {
            if !field_index.values().any(|m| *m == master) {
                return Err(Error::Taxonomy(format!(
                    "master field {master} has no suggested fields"
                )));
            }
        }
        index.field = field_index;
        index.skills = skill_index;
        Ok(Self {
            fields,
            skills,
            aliases,
            index,
        })
    }

    /// Normalized canonical key of a field or skill name (aliases expanded).
    pub fn canonical(&self, name: &str) -> String {
        let k = normalize_key(name);
        self.index.alias.get(&k).cloned().unwrap_or(k)
    }

    pub fn master_of(&self, field: &str) -> Option<MasterField> {
        self.index.field.get(&self.canonical(field)).copied()
    }

    pub fn required_skills(&self, master: MasterField) -> &BTreeSet<String> {
        &self.index.skills[&master]
    }

    pub fn fields(&self) -> &[(String, MasterField)] {
        &self.fields
    }

    pub fn skill_names(&self) -> &BTreeMap<MasterField, Vec<String>> {
        &self.skills
    }

    pub fn aliases(&self) -> &[(String, String)] {
        &self.aliases
    }

    /// Expand an alias to its display name, if one is registered.
    pub fn expand_alias<'a>(&'a self, name: &'a str) -> &'a str {
        let k = normalize_key(name);
        self.aliases
            .iter()
            .find(|(short, _)| normalize_key(short) == k)
            .map(|(_, long)| long.as_str())
            .unwrap_or(name)
    }
}

/// Master field for a record. The interest field decides; when it names no known
/// field (e.g. "Higher Study" or "Researcher"), the research and then the
/// higher-study answers are consulted.
pub fn apply_taxonomy(
    record: &SurveyRecord,
    taxonomy: &MasterFieldTaxonomy,
) -> Result<MasterField> {
    let interest = record.interest_field.trim();
    if interest.is_empty() {
        return Err(Error::UnmappedField(String::new()));
    }
    core::iter::once(interest)
        .chain(record.research_field.as_deref())
        .chain(record.higher_study_field.as_deref())
        .find_map(|f| taxonomy.master_of(f))
        .ok_or_else(|| Error::UnmappedField(record.interest_field.clone()))
}

/// Jaccard overlap between the record's skills and the required skills of `master`.
pub fn skill_overlap(
    skills: &[String],
    master: MasterField,
    taxonomy: &MasterFieldTaxonomy,
) -> f64 {
    let have: BTreeSet<String> = skills
        .iter()
        .map(|s| taxonomy.canonical(s))
        .filter(|s| !s.is_empty())
        .collect();
    if have.is_empty() {
        return 0.0;
    }
    let need = taxonomy.required_skills(master);
    let shared = have.intersection(need).count();
    let union = have.len() + need.len() - shared;
    shared as f64 / union as f64
}

/// Jaccard overlap between the record's skills and its master field's required skills.
pub fn mismatch_score(record: &SurveyRecord, taxonomy: &MasterFieldTaxonomy) -> Result<f64> {
    let master = apply_taxonomy(record, taxonomy)?;
    Ok(skill_overlap(&record.skills, master, taxonomy))
}

/// Skills, then interest, then research / higher-study / contribution fields,
/// joined by single spaces. Courses and semester are left out.
pub fn document_text(record: &SurveyRecord) -> String {
    let mut parts: Vec<&str> = record.skills.iter().map(|s| s.trim()).collect();
    parts.push(record.interest_field.trim());
    for v in [
        &record.research_field,
        &record.higher_study_field,
        &record.contribution_field,
    ]
    .into_iter()
    .flatten()
    {
        parts.push(v.trim());
    }
    parts.retain(|p| !p.is_empty());
    parts.join(" ")
}

pub fn clean(
    records: &[SurveyRecord],
    taxonomy: &MasterFieldTaxonomy,
    drop_threshold: f64,
) -> Result<CleanDataset> {
    if !(0.0..=1.0).contains(&drop_threshold) {
        return Err(Error::InvalidParameter(format!(
            "drop threshold must lie in [0, 1], got {drop_threshold}"
        )));
    }
    let mut documents = Vec::new();
    let mut provenance = Vec::with_capacity(records.len());
    for (row, record) in records.iter().enumerate() {
        let action = match classify_row(record, taxonomy, drop_threshold) {
            Ok((label, score)) => {
                documents.push(LabeledDocument {
                    text: document_text(record),
                    label,
                });
                CleaningAction::Kept { label, score }
            }
            Err(reason) => CleaningAction::Dropped(reason),
        };
        provenance.push(Provenance { row, action });
    }
    if documents.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(CleanDataset {
        documents,
        provenance,
    })
}

fn classify_row(
    record: &SurveyRecord,
    taxonomy: &MasterFieldTaxonomy,
    drop_threshold: f64,
) -> core::result::Result<(MasterField, f64), DropReason> {
    if record.skills.iter().all(|s| s.trim().is_empty()) {
        return Err(DropReason::NoSkills);
    }
    let label = apply_taxonomy(record, taxonomy)
        .map_err(|_| DropReason::UnmappedField(record.interest_field.clone()))?;
    let score = skill_overlap(&record.skills, label, taxonomy);
    if score < drop_threshold {
        return Err(DropReason::ExtensiveMismatch { score });
    }
    Ok((label, score))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelShare {
    pub count: usize,
    pub fraction: f64,
}

pub fn label_frequencies(dataset: &CleanDataset) -> Result<BTreeMap<MasterField, LabelShare>> {
    let n = dataset.documents.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut counts: BTreeMap<MasterField, usize> = BTreeMap::new();
    for d in &dataset.documents {
        *counts.entry(d.label).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(m, count)| {
            (
                m,
                LabelShare {
                    count,
                    fraction: count as f64 / n as f64,
                },
            )
        })
        .collect())
}
