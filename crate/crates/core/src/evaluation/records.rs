use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{parse_cache, parse_semeval_file, RelationLabel};
use crate::error::{Error, Result};

use super::IdLabel;

/// One line of a prediction file.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub id: u64,
    pub label: RelationLabel,
    pub scores: Option<Vec<f64>>,
}

impl PredictionRecord {
    pub fn new(id: u64, label: RelationLabel) -> Self {
        PredictionRecord {
            id,
            label,
            scores: None,
        }
    }

    pub fn pair(&self) -> IdLabel {
        (self.id, self.label)
    }
}

/// `id TAB label`, optionally followed by `TAB` and space-separated scores.
pub fn format_predictions(records: &[PredictionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = write!(out, "{}\t{}", r.id, r.label);
        if let Some(s) = &r.scores {
            let joined: Vec<String> = s.iter().map(|v| format!("{v:e}")).collect();
            let _ = write!(out, "\t{}", joined.join(" "));
        }
        out.push('\n');
    }
    out
}

pub fn parse_predictions(text: &str) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let id_field = fields.next().unwrap_or_default();
        let id: u64 = id_field
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 1, None, format!("bad sentence id `{id_field}`")))?;
        let label: RelationLabel = fields
            .next()
            .ok_or_else(|| Error::parse(i + 1, Some(id), "missing label"))?
            .trim()
            .parse()
            .map_err(|e: Error| Error::parse(i + 1, Some(id), e.to_string()))?;
        let scores = match fields.next() {
            None => None,
            Some(s) => Some(
                s.split_whitespace()
                    .map(|v| v.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::parse(i + 1, Some(id), "bad score vector"))?,
            ),
        };
        if fields.next().is_some() {
            return Err(Error::parse(i + 1, Some(id), "too many fields"));
        }
        out.push(PredictionRecord { id, label, scores });
    }
    Ok(out)
}

/// Same format as a prediction file; used for answer keys.
pub fn parse_key_file(text: &str) -> Result<Vec<IdLabel>> {
    Ok(parse_predictions(text)?.iter().map(PredictionRecord::pair).collect())
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&text)
}

/// Atomically writes a prediction file.
pub fn write_predictions(path: &Path, records: &[PredictionRecord]) -> Result<()> {
    crate::checkpoint::write_atomic(path, format_predictions(records).as_bytes())
}

/// Reads gold labels from an answer key (`id TAB label`), a labeled
/// SemEval file or a token cache.
pub fn read_gold(path: &Path) -> Result<Vec<IdLabel>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let first = match text.lines().find(|l| !l.trim().is_empty()) {
        None => return Ok(Vec::new()),
        Some(l) => l,
    };
    let fields: Vec<&str> = first.split('\t').collect();
    let sentences = match fields.len() {
        5 => parse_cache(&text)?,
        2 if fields[1].trim().parse::<RelationLabel>().is_ok() => return parse_key_file(&text),
        _ => parse_semeval_file(&text)?,
    };
    Ok(sentences.iter().map(|s| (s.id, s.label)).collect())
}
