//! Survey file ingestion.

use std::fs::File;
use std::path::{Path, PathBuf};

use careerpath_core::corpus::SurveyRecord;
use serde::Serialize;

use crate::config::SurveyFormat;
use crate::error::{AppError, AppResult};

/// A cell that could not be used as written. The record is still returned,
/// with the offending value cleared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyIssue {
    /// 1-based line in the file; the header is line 1.
    pub line: usize,
    pub column: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SurveyLoad {
    pub records: Vec<SurveyRecord>,
    pub issues: Vec<SurveyIssue>,
    pub warnings: Vec<String>,
}

struct Columns {
    semester: usize,
    interest_field: usize,
    skills: usize,
    research_field: Option<usize>,
    higher_study_field: Option<usize>,
    core_courses: Option<usize>,
    engaged: Option<usize>,
    contribution_field: Option<usize>,
}

pub fn load_survey(path: &Path, format: &SurveyFormat) -> AppResult<SurveyLoad> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    if file.metadata().map_err(|e| AppError::io(path, e))?.len() == 0 {
        return Err(AppError::core(
            path.display().to_string(),
            careerpath_core::Error::EmptyInput("survey file"),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter as u8)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().all(str::is_empty) {
        return Err(AppError::core(
            path.display().to_string(),
            careerpath_core::Error::EmptyInput("survey file"),
        ));
    }
    let find = |name: &str| {
        headers.iter().position(|h| {
            h.trim_start_matches('\u{feff}')
                .eq_ignore_ascii_case(name.trim())
        })
    };
    let required = |name: &str| {
        find(name).ok_or_else(|| AppError::Schema {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
    };
    let names = &format.columns;
    let cols = Columns {
        semester: required(&names.semester)?,
        interest_field: required(&names.interest_field)?,
        skills: required(&names.skills)?,
        research_field: find(&names.research_field),
        higher_study_field: find(&names.higher_study_field),
        core_courses: find(&names.core_courses),
        engaged: find(&names.engaged),
        contribution_field: find(&names.contribution_field),
    };

    let mut out = SurveyLoad::default();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(i + 2, |p| p.line() as usize);
        let cell = |c: usize| row.get(c).unwrap_or("").trim();
        let opt = |c: Option<usize>| c.map(cell).filter(|s| !s.is_empty()).map(str::to_string);
        let mut issue = |column: &str, message: String| {
            out.issues.push(SurveyIssue {
                line,
                column: column.to_string(),
                message,
            })
        };

        let semester = match cell(cols.semester) {
            "" => None,
            s => match s.parse::<u8>() {
                Ok(v) if (1..=12).contains(&v) => Some(v),
                Ok(_) | Err(_) => {
                    issue(
                        &names.semester,
                        format!("semester {s:?} rejected: expected an integer in 1..=12"),
                    );
                    None
                }
            },
        };
        let engaged = match cols.engaged.map(cell).unwrap_or("") {
            "" => false,
            s => match parse_bool(s) {
                Some(b) => b,
                None => {
                    issue(
                        &names.engaged,
                        format!("engagement {s:?} is not yes/no; read as no"),
                    );
                    false
                }
            },
        };
        let skills = split_list(cell(cols.skills));
        if skills.is_empty() {
            issue(&names.skills, "no skills listed".into());
        }
        let interest_field = cell(cols.interest_field).to_string();
        if interest_field.is_empty() {
            issue(&names.interest_field, "interest field is empty".into());
        }
        out.records.push(SurveyRecord {
            semester,
            interest_field,
            research_field: opt(cols.research_field),
            higher_study_field: opt(cols.higher_study_field),
            core_courses: cols
                .core_courses
                .map(|c| split_list(cell(c)))
                .unwrap_or_default(),
            skills,
            engaged,
            contribution_field: opt(cols.contribution_field),
        });
    }
    if out.records.is_empty() {
        out.warnings
            .push(format!("{}: header only, no data rows", path.display()));
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    match e.position() {
        Some(p) => AppError::DatasetRow {
            path: PathBuf::from(path),
            row: p.line() as usize,
            message: e.to_string(),
        },
        None => AppError::Dataset {
            path: PathBuf::from(path),
            message: e.to_string(),
        },
    }
}

/// Items separated by `,` or `;`, trimmed, empties dropped.
pub fn split_list(cell: &str) -> Vec<String> {
    cell.split([',', ';'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "yes" | "y" | "true" | "1" => Some(true),
        "no" | "n" | "false" | "0" => Some(false),
        _ => None,
    }
}

/// Writes records in the default column layout, so cleaned output can be re-ingested.
pub fn write_survey(path: &Path, records: &[SurveyRecord]) -> AppResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let names = crate::config::ColumnMap::default();
    w.write_record([
        &names.semester,
        &names.interest_field,
        &names.research_field,
        &names.higher_study_field,
        &names.core_courses,
        &names.skills,
        &names.engaged,
        &names.contribution_field,
    ])
    .map_err(|e| csv_error(path, e))?;
    for r in records {
        w.write_record([
            r.semester.map(|s| s.to_string()).unwrap_or_default(),
            r.interest_field.clone(),
            r.research_field.clone().unwrap_or_default(),
            r.higher_study_field.clone().unwrap_or_default(),
            r.core_courses.join("; "),
            r.skills.join("; "),
            if r.engaged { "yes".into() } else { "no".into() },
            r.contribution_field.clone().unwrap_or_default(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}
