//! Context files (JSON) and sequence files (CSV).
//!
//! A context file:
//!
//! ```json
//! {
//!   "label": "interference",
//!   "a": { "name": "a", "spectrum": ["a1", "a2"] },
//!   "b": { "name": "b", "spectrum": ["b1", "b2"], "values": [1, -1] },
//!   "p_a": [0.5, 0.5],
//!   "p_b": [0.7, 0.3],
//!   "p_b_given_a": [[0.5, 0.5], [0.5, 0.5]],
//!   "p_a_given_b": [[0.5, 0.5], [0.5, 0.5]]
//! }
//! ```
//!
//! Matrix rows are indexed by the conditioning outcome. `label`, `values`
//! and `p_a_given_b` are optional.
//!
//! A sequence file has a header row `observable,source` followed by one
//! outcome label per line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::frequency::{SSequence, StreamSource};
use crate::model::{ContextData, Observable, ProbVector, TransitionMatrix};
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
    a: Observable,
    b: Observable,
    p_a: [f64; 2],
    p_b: [f64; 2],
    p_b_given_a: [[f64; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_a_given_b: Option<[[f64; 2]; 2]>,
}

/// Deserializes JSON, reporting the path of the offending value on failure.
pub fn from_json_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Schema {
        path: display_path(e.path()),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| Error::Schema {
        path: "$".into(),
        message: e.to_string(),
    })?;
    Ok(value)
}

fn display_path(path: &serde_path_to_error::Path) -> String {
    let p = path.to_string();
    if p == "." {
        "$".into()
    } else {
        format!("$.{p}")
    }
}

pub fn parse_context(text: &str) -> Result<ContextData> {
    let file: ContextFile = from_json_str(text)?;
    Ok(ContextData {
        label: file.label,
        a: file.a,
        b: file.b,
        p_a: ProbVector(file.p_a),
        p_b: ProbVector(file.p_b),
        p_b_given_a: TransitionMatrix::b_given_a(file.p_b_given_a),
        p_a_given_b: file.p_a_given_b.map(TransitionMatrix::a_given_b),
    })
}

pub fn context_to_json(data: &ContextData) -> String {
    let file = ContextFile {
        label: data.label.clone(),
        a: data.a.clone(),
        b: data.b.clone(),
        p_a: data.p_a.0,
        p_b: data.p_b.0,
        p_b_given_a: data.p_b_given_a.rows,
        p_a_given_b: data.p_a_given_b.map(|m| m.rows),
    };
    serde_json::to_string_pretty(&file).expect("context serializes")
}

pub fn read_context(path: &Path) -> Result<ContextData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_context(&text)
}

pub fn write_sequence_csv(s: &SSequence, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("writing sequence: {e}"));
    w.write_record([s.observable.as_str(), &s.source.tag()]).map_err(csv_err)?;
    for &o in &s.outcomes {
        w.write_record([s.labels[usize::from(o)].as_str()]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("writing sequence: {e}")))?;
    Ok(())
}

/// Parses a sequence file whose outcomes are labelled by `observable`'s
/// spectrum. The header's observable name must match.
pub fn parse_sequence_csv(input: impl std::io::Read, observable: &Observable) -> Result<SSequence> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = r.records();
    let seq_err = |line: u64, message: String| Error::Sequence { line, message };

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| seq_err(1, e.to_string()))?,
        None => return Err(seq_err(1, "missing header row".into())),
    };
    if header.len() != 2 {
        return Err(seq_err(1, format!("header needs 2 fields (observable,source), found {}", header.len())));
    }
    if header[0] != observable.name {
        return Err(seq_err(
            1,
            format!("header names observable {:?}, expected {:?}", &header[0], observable.name),
        ));
    }
    let source: StreamSource = header[1].parse().map_err(|e: Error| seq_err(1, e.to_string()))?;

    let mut outcomes = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            seq_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 1 {
            return Err(seq_err(line, format!("expected one outcome label, found {} fields", rec.len())));
        }
        let index = observable
            .index_of(&rec[0])
            .ok_or_else(|| seq_err(line, format!("{:?} is not in the spectrum of {}", &rec[0], observable.name)))?;
        outcomes.push(index as u8);
    }
    if outcomes.is_empty() {
        return Err(seq_err(1, "no outcomes after the header".into()));
    }
    SSequence::new(observable.name.clone(), observable.spectrum.clone(), source, outcomes)
}
