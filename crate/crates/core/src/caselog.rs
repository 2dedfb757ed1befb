//! CSV case logs and rating-pair files.
//!
//! Case log header: `case_id,ai_confidence,ai_decision,human_decision,truth`.
//! Ratings header: `case_id,rater_a,rater_b`. Column order is free on input;
//! output always uses the order above. Every malformed row is reported with
//! its 1-based line number.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::hitl::Case;

pub const CASE_COLUMNS: [&str; 5] = ["case_id", "ai_confidence", "ai_decision", "human_decision", "truth"];
pub const RATING_COLUMNS: [&str; 3] = ["case_id", "rater_a", "rater_b"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("unsupported schema `{found}`, expected `{expected}`")]
    Schema { found: String, expected: String },
}

impl FormatError {
    /// True when the file itself could not be opened.
    pub fn is_io(&self) -> bool {
        matches!(self, FormatError::Io { .. })
    }
}

pub(crate) fn open(path: &Path) -> Result<File, FormatError> {
    File::open(path).map_err(|e| FormatError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn column_indices<const N: usize>(headers: &csv::StringRecord, names: [&str; N]) -> Result<[usize; N], FormatError> {
    let mut idx = [0; N];
    for (slot, name) in idx.iter_mut().zip(names) {
        *slot = headers.iter().position(|h| h.trim() == name).ok_or_else(|| FormatError::MissingColumn(name.into()))?;
    }
    Ok(idx)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(input)
}

fn csv_error(e: csv::Error) -> FormatError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    FormatError::Row { line, message: e.to_string() }
}

fn field<'r>(record: &'r csv::StringRecord, i: usize, name: &str, line: u64) -> Result<&'r str, FormatError> {
    match record.get(i) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(FormatError::Row { line, message: format!("missing value for `{name}`") }),
    }
}

pub fn read_cases<R: Read>(input: R) -> Result<Vec<Case>, FormatError> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let [id, conf, ai, human, truth] = column_indices(&headers, CASE_COLUMNS)?;
    let mut cases = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let raw = field(&record, conf, "ai_confidence", line)?;
        let ai_confidence: f64 = raw
            .parse()
            .map_err(|_| FormatError::Row { line, message: format!("ai_confidence `{raw}` is not a number") })?;
        if !(0.0..=1.0).contains(&ai_confidence) {
            return Err(FormatError::Row { line, message: format!("ai_confidence {raw} outside [0, 1]") });
        }
        cases.push(Case {
            id: field(&record, id, "case_id", line)?.to_string(),
            ai_confidence,
            ai_decision: field(&record, ai, "ai_decision", line)?.to_string(),
            human_decision: field(&record, human, "human_decision", line)?.to_string(),
            truth: field(&record, truth, "truth", line)?.to_string(),
        });
    }
    Ok(cases)
}

pub fn read_cases_path(path: &Path) -> Result<Vec<Case>, FormatError> {
    read_cases(open(path)?)
}

pub fn write_cases<W: Write>(out: W, cases: &[Case]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| FormatError::Io { path: "<output>".into(), message: e.to_string() };
    w.write_record(CASE_COLUMNS).map_err(io)?;
    for c in cases {
        w.write_record([c.id.as_str(), &c.ai_confidence.to_string(), &c.ai_decision, &c.human_decision, &c.truth])
            .map_err(io)?;
    }
    w.flush().map_err(|e| FormatError::Io { path: "<output>".into(), message: e.to_string() })
}

pub fn cases_to_csv(cases: &[Case]) -> String {
    let mut buf = Vec::new();
    write_cases(&mut buf, cases).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingPair {
    pub case_id: String,
    pub rater_a: usize,
    pub rater_b: usize,
}

pub fn read_ratings<R: Read>(input: R) -> Result<Vec<RatingPair>, FormatError> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let [id, a, b] = column_indices(&headers, RATING_COLUMNS)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse = |i: usize, name: &str| -> Result<usize, FormatError> {
            let raw = field(&record, i, name, line)?;
            match raw.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(FormatError::Row { line, message: format!("{name} `{raw}` is not a category >= 1") }),
            }
        };
        out.push(RatingPair {
            case_id: field(&record, id, "case_id", line)?.to_string(),
            rater_a: parse(a, "rater_a")?,
            rater_b: parse(b, "rater_b")?,
        });
    }
    Ok(out)
}

pub fn read_ratings_path(path: &Path) -> Result<Vec<RatingPair>, FormatError> {
    read_ratings(open(path)?)
}
