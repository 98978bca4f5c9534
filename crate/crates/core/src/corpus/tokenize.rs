//! Tokenization of tagged SemEval sentences.
//!
//! Text is lowercased and split on whitespace; leading and trailing
//! punctuation characters are peeled off as single-character tokens, so
//! internal hyphens and apostrophes survive (`chest-pain`, `mother's`).
//! Entity tags always act as token boundaries.

use crate::error::{Error, Result};

use super::Span;

pub const E1_OPEN: &str = "<e1>";
pub const E1_CLOSE: &str = "</e1>";
pub const E2_OPEN: &str = "<e2>";
pub const E2_CLOSE: &str = "</e2>";

const TAGS: [&str; 4] = [E1_OPEN, E1_CLOSE, E2_OPEN, E2_CLOSE];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokenized {
    pub tokens: Vec<String>,
    pub e1: Span,
    pub e2: Span,
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || (!c.is_alphanumeric() && !c.is_whitespace())
}

/// Splits plain text (no tags) into tokens.
pub fn split_words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.to_lowercase().chars().collect();
        let mut lo = 0;
        let mut hi = chars.len();
        while lo < hi && is_punct(chars[lo]) {
            lo += 1;
        }
        while hi > lo && is_punct(chars[hi - 1]) {
            hi -= 1;
        }
        out.extend(chars[..lo].iter().map(|c| c.to_string()));
        if lo < hi {
            out.push(chars[lo..hi].iter().collect());
        }
        out.extend(chars[hi..].iter().map(|c| c.to_string()));
    }
    out
}

fn find_unique(raw: &str, tag: &str) -> Result<usize> {
    let mut hits = raw.match_indices(tag).map(|(i, _)| i);
    let first = hits
        .next()
        .ok_or_else(|| Error::Invalid(format!("missing tag {tag}")))?;
    if hits.next().is_some() {
        return Err(Error::Invalid(format!("tag {tag} appears more than once")));
    }
    Ok(first)
}

/// Tokenizes a sentence carrying exactly one `<e1>..</e1>` and one
/// `<e2>..</e2>` pair, with e1 before e2.
pub fn tokenize(raw: &str) -> Result<Tokenized> {
    let pos: Vec<usize> = TAGS
        .iter()
        .map(|t| find_unique(raw, t))
        .collect::<Result<_>>()?;
    if !pos.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Invalid(
            "entity tags must appear as <e1>..</e1> .. <e2>..</e2> without nesting".into(),
        ));
    }
    let seg = |from: usize, from_tag: usize, to: usize| &raw[from + TAGS[from_tag].len()..to];
    let pre = &raw[..pos[0]];
    let e1_text = seg(pos[0], 0, pos[1]);
    let mid = seg(pos[1], 1, pos[2]);
    let e2_text = seg(pos[2], 2, pos[3]);
    let post = &raw[pos[3] + E2_CLOSE.len()..];

    let mut tokens = split_words(pre);
    let e1_start = tokens.len();
    tokens.extend(split_words(e1_text));
    if tokens.len() == e1_start {
        return Err(Error::Invalid("empty e1 entity".into()));
    }
    let e1 = Span::new(e1_start, tokens.len() - 1);
    tokens.extend(split_words(mid));
    let e2_start = tokens.len();
    tokens.extend(split_words(e2_text));
    if tokens.len() == e2_start {
        return Err(Error::Invalid("empty e2 entity".into()));
    }
    let e2 = Span::new(e2_start, tokens.len() - 1);
    tokens.extend(split_words(post));
    Ok(Tokenized { tokens, e1, e2 })
}

/// Renders tokens back into a tagged sentence that [`tokenize`] maps to the
/// same tokens and spans.
pub fn render_tagged(tokens: &[String], e1: Span, e2: Span) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        if i == e1.start {
            out.push_str(E1_OPEN);
        }
        if i == e2.start {
            out.push_str(E2_OPEN);
        }
        out.push_str(tok);
        if i == e1.end {
            out.push_str(E1_CLOSE);
        }
        if i == e2.end {
            out.push_str(E2_CLOSE);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_token_entity() {
        let t = tokenize("<e1>milk</e1> and <e2>honey</e2>").unwrap();
        assert_eq!(t.tokens, toks(&["milk", "and", "honey"]));
        assert_eq!(t.e1, Span::new(0, 0));
    }

    #[test]
    fn multi_token_entity_and_trailing_period() {
        let t = tokenize("We poured the <e1>milk</e1> into the <e2>pumpkin mixture</e2>.").unwrap();
        assert_eq!(
            t.tokens,
            toks(&["we", "poured", "the", "milk", "into", "the", "pumpkin", "mixture", "."])
        );
        assert_eq!(t.e1, Span::new(3, 3));
        assert_eq!(t.e2, Span::new(6, 7));
    }

    #[test]
    fn keeps_internal_hyphens_and_peels_edges() {
        assert_eq!(
            split_words("(Self-made) \"mother's\" end..."),
            toks(&["(", "self-made", ")", "\"", "mother's", "\"", "end", ".", ".", "."])
        );
    }

    #[test]
    fn rejects_bad_markup() {
        assert!(tokenize("<e1>a</e1> b").is_err());
        assert!(tokenize("<e1>a <e2>b</e1> c</e2>").is_err());
        assert!(tokenize("<e2>a</e2> <e1>b</e1>").is_err());
        assert!(tokenize("<e1>a</e1> <e1>x</e1> <e2>b</e2>").is_err());
        assert!(tokenize("<e1></e1> <e2>b</e2>").is_err());
        assert!(tokenize("<e1>a <e2>b</e2>").is_err());
    }

    #[test]
    fn render_then_tokenize_is_identity() {
        let t = tokenize("He had chest pain and <e1>headaches</e1> from <e2>mold</e2> in the bedroom.")
            .unwrap();
        let again = tokenize(&render_tagged(&t.tokens, t.e1, t.e2)).unwrap();
        assert_eq!(t, again);
    }
}
