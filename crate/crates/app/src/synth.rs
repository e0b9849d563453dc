//! Synthetic survey generator for demos, benchmarks and tests. The output is
//! made up; it only imitates the shape of real questionnaire answers.

use careerpath_core::corpus::{MasterField, MasterFieldTaxonomy, SurveyRecord};
use careerpath_core::numkit::SeededRng;

const STEMS: [&str; 50] = [
    "graph", "quant", "vector", "pixel", "stream", "kernel", "shard", "lambda", "tensor", "socket",
    "cipher", "render", "query", "sprite", "bundle", "router", "parse", "cache", "mesh", "signal",
    "packet", "token", "layout", "batch", "agent", "proto", "fiber", "matrix", "scope", "crawl",
    "forge", "pulse", "script", "flux", "orbit", "prism", "relay", "canvas", "metric", "ledger",
    "vault", "neuro", "sonic", "spark", "cloud", "chrono", "glyph", "atlas", "nano", "helix",
];
const SUFFIXES: [&str; 40] = [
    "ify", "ware", "kit", "lab", "ops", "io", "base", "flow", "hub", "lang", "core", "net", "scan",
    "craft", "works", "stack", "ly", "ix", "logic", "grid", "port", "gen", "sync", "view", "dash",
    "mind", "map", "box", "line", "shift", "form", "cast", "bit", "run", "tron", "verse", "point",
    "wise", "zone", "deck",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub rows: usize,
    /// Size of the shared pool of pseudo-tool names; up to 2000.
    pub noise_pool: usize,
    /// Pseudo-tool names mentioned per respondent.
    pub noise_per_row: usize,
    /// Chance that a respondent's listed skills come from a different field.
    pub confusion: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            rows: 200,
            noise_pool: 400,
            noise_per_row: 4,
            confusion: 0.1,
            seed: 7,
        }
    }
}

fn pseudo_word(i: usize) -> String {
    format!(
        "{}{}",
        STEMS[i % STEMS.len()],
        SUFFIXES[(i / STEMS.len()) % SUFFIXES.len()]
    )
}

/// Records cycling through the six fields so every field gets `rows / 6` or
/// one more. Each lists some required skills of its field (sometimes by
/// abbreviation), a few field-typical pseudo-tools and some shared noise.
pub fn synthetic_survey(taxonomy: &MasterFieldTaxonomy, cfg: &SynthConfig) -> Vec<SurveyRecord> {
    let mut rng = SeededRng::new(cfg.seed);
    let pool = cfg.noise_pool.min(STEMS.len() * SUFFIXES.len());
    (0..cfg.rows)
        .map(|r| {
            let master = MasterField::ALL[r % MasterField::COUNT];
            let fields: Vec<&str> = taxonomy
                .fields()
                .iter()
                .filter(|(_, m)| *m == master)
                .map(|(f, _)| f.as_str())
                .collect();
            let interest = fields[rng.below(fields.len() as u64) as usize].to_string();
            let skill_master = if rng.next_f64() < cfg.confusion {
                MasterField::ALL[rng.below(MasterField::COUNT as u64) as usize]
            } else {
                master
            };
            let required = &taxonomy.skill_names()[&skill_master];
            let mut skills: Vec<String> = Vec::new();
            let take = 2 + rng.below(3) as usize;
            for _ in 0..take {
                let s = &required[rng.below(required.len() as u64) as usize];
                let shown = if rng.next_f64() < 0.5 {
                    taxonomy.expand_alias(s)
                } else {
                    s.as_str()
                };
                if !skills.iter().any(|k| k == shown) {
                    skills.push(shown.to_string());
                }
            }
            // Field-typical tools: a block of the pool owned by the skills' field.
            let block = pool / MasterField::COUNT;
            for _ in 0..2 {
                if block > 0 {
                    let i = skill_master.code() * block + rng.below(block as u64) as usize;
                    skills.push(pseudo_word(i));
                }
            }
            for _ in 0..cfg.noise_per_row {
                if pool > 0 {
                    skills.push(pseudo_word(rng.below(pool as u64) as usize));
                }
            }
            SurveyRecord {
                semester: Some(1 + rng.below(12) as u8),
                interest_field: interest,
                research_field: None,
                higher_study_field: None,
                core_courses: vec!["Data Structures".into(), "Algorithms".into()],
                skills,
                engaged: rng.next_f64() < 0.5,
                contribution_field: None,
            }
        })
        .collect()
}

/// Six classes with five disjoint keywords each; every document repeats a few
/// of its class keywords. Perfectly separable by any sensible classifier.
pub fn separable_survey(per_class: usize, seed: u64) -> Vec<SurveyRecord> {
    let mut rng = SeededRng::new(seed);
    let fields = [
        "Artificial Intelligence",
        "Data Science",
        "Web Development",
        "CyberSecurity",
        "System Analyst",
        "Graphic Design",
    ];
    let mut out = Vec::new();
    for _ in 0..per_class {
        for (c, field) in fields.iter().enumerate() {
            let words: Vec<String> = (0..5).map(|k| pseudo_word(c * 5 + k)).collect();
            let n = 3 + rng.below(3) as usize;
            let skills = (0..n)
                .map(|_| words[rng.below(5) as usize].clone())
                .collect();
            out.push(SurveyRecord {
                semester: Some(6),
                interest_field: field.to_string(),
                skills,
                ..Default::default()
            });
        }
    }
    out
}
