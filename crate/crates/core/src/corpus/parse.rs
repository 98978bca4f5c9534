//! Readers and writers for the SemEval distribution format and the
//! tab-separated corpus cache.
//!
//! SemEval records look like
//!
//! ```text
//! 8<TAB>"We poured the <e1>milk</e1> into the <e2>pumpkin mixture</e2>."
//! Entity-Destination(e1,e2)
//! Comment:
//!
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{tokenize, LabeledSentence, RelationLabel, Span};

struct Pending {
    id: u64,
    line: usize,
    tokenized: super::Tokenized,
    label: Option<RelationLabel>,
}

fn parse_records(text: &str, require_labels: bool) -> Result<Vec<LabeledSentence>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut pending: Option<Pending> = None;

    let finish = |p: Pending, out: &mut Vec<LabeledSentence>| -> Result<()> {
        let label = match p.label {
            Some(l) => l,
            None if !require_labels => RelationLabel::Other,
            None => return Err(Error::parse(p.line, Some(p.id), "missing relation line")),
        };
        let t = p.tokenized;
        out.push(
            LabeledSentence::new(p.id, t.tokens, t.e1, t.e2, label)
                .map_err(|e| Error::parse(p.line, Some(p.id), e.to_string()))?,
        );
        Ok(())
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some((head, rest)) = line.split_once('\t') {
            if let Ok(id) = head.trim().parse::<u64>() {
                if let Some(p) = pending.take() {
                    finish(p, &mut out)?;
                }
                if !seen.insert(id) {
                    return Err(Error::parse(lineno, Some(id), "duplicate id"));
                }
                let rest = rest.trim();
                let body = rest
                    .strip_prefix('"')
                    .and_then(|r| r.strip_suffix('"'))
                    .unwrap_or(rest);
                let tokenized =
                    tokenize(body).map_err(|e| Error::parse(lineno, Some(id), e.to_string()))?;
                pending = Some(Pending {
                    id,
                    line: lineno,
                    tokenized,
                    label: None,
                });
                continue;
            }
        }
        let trimmed = line.trim();
        if trimmed.starts_with("Comment") {
            continue;
        }
        match pending.as_mut() {
            Some(p) if p.label.is_none() => {
                p.label = Some(
                    trimmed
                        .parse()
                        .map_err(|e: Error| Error::parse(lineno, Some(p.id), e.to_string()))?,
                );
            }
            Some(p) => {
                return Err(Error::parse(lineno, Some(p.id), format!("unexpected line `{trimmed}`")))
            }
            None => return Err(Error::parse(lineno, None, format!("unexpected line `{trimmed}`"))),
        }
    }
    if let Some(p) = pending.take() {
        finish(p, &mut out)?;
    }
    Ok(out)
}

/// Parses a labeled SemEval file. Every record must carry a relation line.
pub fn parse_semeval_file(text: &str) -> Result<Vec<LabeledSentence>> {
    parse_records(text, true)
}

/// Like [`parse_semeval_file`], but records without a relation line (the
/// unlabeled test distribution) get the placeholder label `Other`.
pub fn parse_semeval_lenient(text: &str) -> Result<Vec<LabeledSentence>> {
    parse_records(text, false)
}

pub fn write_semeval(sentences: &[LabeledSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        let _ = writeln!(
            out,
            "{}\t\"{}\"\n{}\nComment:\n",
            s.id,
            super::render_tagged(&s.tokens, s.e1, s.e2),
            s.label
        );
    }
    out
}

/// `id TAB label TAB tokens TAB e1_start:e1_end TAB e2_start:e2_end`
pub fn write_cache(sentences: &[LabeledSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}:{}\t{}:{}",
            s.id,
            s.label,
            s.tokens.join(" "),
            s.e1.start,
            s.e1.end,
            s.e2.start,
            s.e2.end
        );
    }
    out
}

fn parse_span(field: &str, lineno: usize, id: u64) -> Result<Span> {
    let (a, b) = field
        .split_once(':')
        .ok_or_else(|| Error::parse(lineno, Some(id), format!("bad span `{field}`")))?;
    let p = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| Error::parse(lineno, Some(id), format!("bad span `{field}`")))
    };
    let (start, end) = (p(a)?, p(b)?);
    if start > end {
        return Err(Error::parse(lineno, Some(id), format!("inverted span `{field}`")));
    }
    Ok(Span { start, end })
}

pub fn parse_cache(text: &str) -> Result<Vec<LabeledSentence>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(lineno, None, "expected 5 tab-separated fields"));
        }
        let id: u64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, None, "bad id"))?;
        if !seen.insert(id) {
            return Err(Error::parse(lineno, Some(id), "duplicate id"));
        }
        let label = fields[1]
            .parse()
            .map_err(|e: Error| Error::parse(lineno, Some(id), e.to_string()))?;
        let tokens = fields[2].split(' ').filter(|t| !t.is_empty()).map(String::from).collect();
        let e1 = parse_span(fields[3], lineno, id)?;
        let e2 = parse_span(fields[4], lineno, id)?;
        out.push(
            LabeledSentence::new(id, tokens, e1, e2, label)
                .map_err(|e| Error::parse(lineno, Some(id), e.to_string()))?,
        );
    }
    Ok(out)
}

/// Reads either format, telling them apart by the first record line. With
/// `require_labels = false` unlabeled SemEval records are accepted.
pub fn read_corpus(path: &Path, require_labels: bool) -> Result<Vec<LabeledSentence>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let first = text.lines().find(|l| !l.trim().is_empty());
    match first {
        None => Ok(Vec::new()),
        Some(l) if l.split('\t').count() == 5 => parse_cache(&text),
        Some(_) => parse_records(&text, require_labels),
    }
}
