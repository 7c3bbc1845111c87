//! Reference labeling CSV: `visit_id,reference_label,unanimous,votes_<class>...`.

use std::io::{Read, Write};
use std::path::Path;

use super::{ReferenceLabeling, VisitConsensus};
use crate::data::{open, CsvRows, LabelScheme, Row};
use crate::error::{Error, Result};

/// Column names for `scheme`; binary mode gives
/// `visit_id,reference_label,unanimous,votes_wellness,votes_other`.
pub fn reference_header(scheme: &LabelScheme) -> Vec<String> {
    let mut h = vec!["visit_id".to_string(), "reference_label".into(), "unanimous".into()];
    h.extend(scheme.classes().iter().map(|c| format!("votes_{}", c.to_lowercase())));
    h
}

pub fn write_reference<W: Write>(labels: &ReferenceLabeling, out: W) -> Result<()> {
    let scheme = labels.scheme();
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(reference_header(scheme)).map_err(ser)?;
    for v in labels.visits() {
        let mut rec = vec![
            v.visit_id.clone(),
            v.reference.map(|l| scheme.name(l).to_string()).unwrap_or_default(),
            v.unanimous.to_string(),
        ];
        rec.extend(v.votes.iter().map(|c| c.to_string()));
        w.write_record(&rec).map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn read_reference<R: Read>(reader: R, source: &Path, scheme: &LabelScheme) -> Result<ReferenceLabeling> {
    let header = reference_header(scheme);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = CsvRows::new(reader, source, &header)?;
    let mut visits = Vec::new();
    while let Some(row) = rows.next_row() {
        let Row { line, fields } = row?;
        let visit_id = fields[0].to_string();
        if visit_id.is_empty() {
            return Err(rows.malformed(line, "empty visit_id"));
        }
        let reference = match &fields[1] {
            "" => None,
            raw => Some(scheme.parse(raw).map_err(|e| rows.malformed(line, e.to_string()))?),
        };
        let unanimous = match fields[2].to_lowercase().as_str() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => return Err(rows.malformed(line, format!("unanimous must be true/false, got `{other}`"))),
        };
        let votes = fields
            .iter()
            .skip(3)
            .map(|f| {
                f.parse::<usize>()
                    .map_err(|_| rows.malformed(line, format!("vote count `{f}` is not a nonnegative integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        visits.push(VisitConsensus {
            visit_id,
            reference,
            votes,
            unanimous,
        });
    }
    ReferenceLabeling::new(scheme.clone(), visits).map_err(|e| match e {
        Error::DuplicateVisit(v) => Error::MalformedRow {
            path: source.to_path_buf(),
            line: 0,
            message: format!("duplicate visit_id `{v}`"),
        },
        other => other,
    })
}

pub fn parse_reference(path: impl AsRef<Path>, scheme: &LabelScheme) -> Result<ReferenceLabeling> {
    let path = path.as_ref();
    read_reference(open(path)?, path, scheme)
}
