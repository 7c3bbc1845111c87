//! CSV ingestion and export for annotations, predictions and pet records.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::cohort::PetRecord;
use crate::data::labels::{Label, LabelScheme};
use crate::data::table::AnnotationTable;
use crate::error::{Error, Result};

pub const ANNOTATIONS_HEADER: [&str; 3] = ["visit_id", "rater_id", "label"];
pub const PREDICTIONS_HEADER: [&str; 3] = ["visit_id", "label", "probability"];
pub const PETS_HEADER: [&str; 4] = ["visit_id", "species", "sex", "age_years"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub visit_id: String,
    pub predicted_label: Label,
    /// Probability of the scheme's positive class.
    pub probability: Option<f64>,
}

pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Rows of a headered CSV with the header checked against `expected`.
pub(crate) struct CsvRows<R> {
    reader: csv::Reader<R>,
    source: PathBuf,
}

pub(crate) struct Row {
    pub line: u64,
    pub fields: csv::StringRecord,
}

impl<R: Read> CsvRows<R> {
    pub fn new(reader: R, source: &Path, expected: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let found = reader.headers().map_err(|e| csv_error(source, e))?.clone();
        let found: Vec<&str> = found.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
        if found != expected {
            return Err(Error::Header {
                path: source.to_path_buf(),
                expected: expected.join(","),
                found: found.join(","),
            });
        }
        Ok(Self {
            reader,
            source: source.to_path_buf(),
        })
    }

    pub fn malformed(&self, line: u64, message: impl Into<String>) -> Error {
        Error::MalformedRow {
            path: self.source.clone(),
            line,
            message: message.into(),
        }
    }

    pub fn next_row(&mut self) -> Option<Result<Row>> {
        let mut fields = csv::StringRecord::new();
        match self.reader.read_record(&mut fields) {
            Ok(false) => None,
            Ok(true) => {
                let line = fields.position().map_or(0, |p| p.line());
                Some(Ok(Row { line, fields }))
            }
            Err(e) => Some(Err(csv_error(&self.source, e))),
        }
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            message: csv_kind_message(&kind),
        },
    }
}

fn csv_kind_message(kind: &csv::ErrorKind) -> String {
    match kind {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
        other => format!("{other:?}"),
    }
}

fn label_at<R: Read>(rows: &CsvRows<R>, scheme: &LabelScheme, line: u64, raw: &str) -> Result<Label> {
    scheme.parse(raw).map_err(|e| rows.malformed(line, e.to_string()))
}

fn nonempty<'a, R: Read>(rows: &CsvRows<R>, line: u64, name: &str, raw: &'a str) -> Result<&'a str> {
    if raw.is_empty() {
        Err(rows.malformed(line, format!("empty {name}")))
    } else {
        Ok(raw)
    }
}

pub fn read_annotations<R: Read>(reader: R, source: &Path, scheme: &LabelScheme) -> Result<AnnotationTable> {
    let mut rows = CsvRows::new(reader, source, &ANNOTATIONS_HEADER)?;
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    while let Some(row) = rows.next_row() {
        let Row { line, fields } = row?;
        let visit = nonempty(&rows, line, "visit_id", &fields[0])?.to_string();
        let rater = nonempty(&rows, line, "rater_id", &fields[1])?.to_string();
        let label = label_at(&rows, scheme, line, &fields[2])?;
        if !seen.insert((visit.clone(), rater.clone())) {
            return Err(Error::DuplicateCell { visit, rater });
        }
        records.push((visit, rater, label));
    }
    AnnotationTable::from_records(scheme.clone(), records)
}

/// Reads an annotations CSV (`visit_id,rater_id,label`).
pub fn parse_annotations(path: impl AsRef<Path>, scheme: &LabelScheme) -> Result<AnnotationTable> {
    let path = path.as_ref();
    read_annotations(open(path)?, path, scheme)
}

/// Writes the table in long format, one row per present cell.
pub fn write_annotations<W: Write>(table: &AnnotationTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(ANNOTATIONS_HEADER).map_err(ser)?;
    for (v, r, l) in table.records() {
        w.write_record([v, r, table.scheme().name(l)]).map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn read_predictions<R: Read>(reader: R, source: &Path, scheme: &LabelScheme) -> Result<Vec<PredictionRecord>> {
    let mut rows = CsvRows::new(reader, source, &PREDICTIONS_HEADER)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    while let Some(row) = rows.next_row() {
        let Row { line, fields } = row?;
        let visit_id = nonempty(&rows, line, "visit_id", &fields[0])?.to_string();
        let predicted_label = label_at(&rows, scheme, line, &fields[1])?;
        let probability = match &fields[2] {
            "" => None,
            raw => {
                let p: f64 = raw
                    .parse()
                    .map_err(|_| rows.malformed(line, format!("probability `{raw}` is not a number")))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(rows.malformed(line, format!("probability {p} outside [0, 1]")));
                }
                Some(p)
            }
        };
        if !seen.insert(visit_id.clone()) {
            return Err(rows.malformed(line, format!("duplicate visit_id `{visit_id}`")));
        }
        out.push(PredictionRecord {
            visit_id,
            predicted_label,
            probability,
        });
    }
    Ok(out)
}

/// Reads a predictions CSV (`visit_id,label,probability`).
pub fn parse_predictions(path: impl AsRef<Path>, scheme: &LabelScheme) -> Result<Vec<PredictionRecord>> {
    let path = path.as_ref();
    read_predictions(open(path)?, path, scheme)
}

pub fn write_predictions<W: Write>(records: &[PredictionRecord], scheme: &LabelScheme, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(PREDICTIONS_HEADER).map_err(ser)?;
    for r in records {
        let p = r.probability.map(|p| p.to_string()).unwrap_or_default();
        w.write_record([r.visit_id.as_str(), scheme.name(r.predicted_label), p.as_str()])
            .map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn read_pets<R: Read>(reader: R, source: &Path) -> Result<Vec<PetRecord>> {
    let mut rows = CsvRows::new(reader, source, &PETS_HEADER)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    while let Some(row) = rows.next_row() {
        let Row { line, fields } = row?;
        let visit_id = nonempty(&rows, line, "visit_id", &fields[0])?.to_string();
        let species = fields[1]
            .parse()
            .map_err(|e: Error| rows.malformed(line, e.to_string()))?;
        let sex = fields[2]
            .parse()
            .map_err(|e: Error| rows.malformed(line, e.to_string()))?;
        let age_years = match &fields[3] {
            "" => None,
            raw => {
                let a: f64 = raw
                    .parse()
                    .map_err(|_| rows.malformed(line, format!("age `{raw}` is not a number")))?;
                if !(a.is_finite() && a >= 0.0) {
                    return Err(rows.malformed(line, format!("age {a} must be nonnegative")));
                }
                Some(a)
            }
        };
        if !seen.insert(visit_id.clone()) {
            return Err(rows.malformed(line, format!("duplicate visit_id `{visit_id}`")));
        }
        out.push(PetRecord {
            visit_id,
            species,
            sex,
            age_years,
        });
    }
    Ok(out)
}

/// Reads a pets CSV (`visit_id,species,sex,age_years`).
pub fn parse_pets(path: impl AsRef<Path>) -> Result<Vec<PetRecord>> {
    let path = path.as_ref();
    read_pets(open(path)?, path)
}
