use std::collections::HashMap;

use super::LabeledSentence;

pub const PADDING: &str = "<PAD>";
pub const UNKNOWN: &str = "<UNK>";
/// Position indicator tokens, inserted around the entity spans.
pub const INDICATOR_TOKENS: [&str; 4] = ["<e1>", "</e1>", "<e2>", "</e2>"];

/// Token/index bijection with reserved PADDING (index 0) and UNKNOWN
/// (index 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub const PAD: usize = 0;
    pub const UNK: usize = 1;

    /// Vocabulary holding only the reserved tokens (and the indicator
    /// tokens when `indicators` is set).
    pub fn reserved(indicators: bool) -> Self {
        let mut v = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        v.insert(PADDING);
        v.insert(UNKNOWN);
        if indicators {
            for t in INDICATOR_TOKENS {
                v.insert(t);
            }
        }
        v
    }

    /// Training tokens in order of first appearance, then any pretrained
    /// tokens not seen in training.
    pub fn build<'a>(
        train: &[LabeledSentence],
        pretrained: Option<impl IntoIterator<Item = &'a str>>,
        indicators: bool,
    ) -> Self {
        let mut v = Self::reserved(indicators);
        for s in train {
            for t in &s.tokens {
                v.insert(t);
            }
        }
        if let Some(extra) = pretrained {
            for t in extra {
                v.insert(t);
            }
        }
        v
    }

    /// Rebuilds a vocabulary from its ordered token list (checkpoint load).
    pub fn from_tokens(tokens: Vec<String>) -> crate::Result<Self> {
        if tokens.first().map(String::as_str) != Some(PADDING)
            || tokens.get(1).map(String::as_str) != Some(UNKNOWN)
        {
            return Err(crate::Error::Invalid(
                "vocabulary must start with the PADDING and UNKNOWN tokens".into(),
            ));
        }
        let mut v = Vocabulary {
            tokens: Vec::with_capacity(tokens.len()),
            index: HashMap::with_capacity(tokens.len()),
        };
        for t in tokens {
            if v.index.contains_key(&t) {
                return Err(crate::Error::Invalid(format!("duplicate vocabulary token `{t}`")));
            }
            v.insert(&t);
        }
        Ok(v)
    }

    fn insert(&mut self, token: &str) -> usize {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        let i = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), i);
        i
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Index of `token`, falling back to UNKNOWN.
    pub fn lookup(&self, token: &str) -> usize {
        self.get(token).unwrap_or(Self::UNK)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn has_indicators(&self) -> bool {
        INDICATOR_TOKENS.iter().all(|t| self.index.contains_key(*t))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}
