//! Position information: clipped relative distances, entity flags and
//! position indicator tokens.

use crate::corpus::{LabeledSentence, Span, INDICATOR_TOKENS};
use crate::error::{Error, Result};

/// How position information reaches a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PositionVariant {
    None,
    /// Two trainable distance embeddings (to e1 and to e2).
    Embeddings,
    /// Distance embeddings plus a binary "is an argument" flag.
    EmbeddingsWithFlag,
    /// `<e1> … </e1>` / `<e2> … </e2>` tokens inserted into the text.
    Indicators,
}

impl PositionVariant {
    pub fn name(self) -> &'static str {
        match self {
            PositionVariant::None => "none",
            PositionVariant::Embeddings => "embeddings",
            PositionVariant::EmbeddingsWithFlag => "embeddings+flag",
            PositionVariant::Indicators => "indicators",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => PositionVariant::None,
            "embeddings" => PositionVariant::Embeddings,
            "embeddings+flag" => PositionVariant::EmbeddingsWithFlag,
            "indicators" => PositionVariant::Indicators,
            _ => return Err(Error::Config(format!("unknown position variant `{s}`"))),
        })
    }

    pub fn uses_embeddings(self) -> bool {
        matches!(
            self,
            PositionVariant::Embeddings | PositionVariant::EmbeddingsWithFlag
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PositionFeatureConfig {
    pub variant: PositionVariant,
    /// Width of each of the two distance embeddings.
    pub pos_dim: usize,
    /// Largest absolute distance with its own bucket.
    pub clip: usize,
}

impl PositionFeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.variant.uses_embeddings() && self.pos_dim == 0 {
            return Err(Error::Config("position embeddings need pos_dim > 0".into()));
        }
        if self.clip == 0 {
            return Err(Error::Config("position clip must be positive".into()));
        }
        Ok(())
    }

    /// Buckets `-clip..=clip` plus one for padding.
    pub fn buckets(&self) -> usize {
        2 * self.clip + 2
    }

    pub fn bucket(&self, distance: i64) -> usize {
        let c = self.clip as i64;
        (distance.clamp(-c, c) + c) as usize
    }

    pub fn padding_bucket(&self) -> usize {
        2 * self.clip + 1
    }
}

fn distance(i: usize, span: Span) -> i64 {
    if i < span.start {
        i as i64 - span.start as i64
    } else if i > span.end {
        i as i64 - span.end as i64
    } else {
        0
    }
}

/// Signed distance of every token to the nearest token of e1 and of e2,
/// clipped to `[-clip, clip]`.
pub fn relative_positions(sentence: &LabeledSentence, clip: usize) -> Vec<(i64, i64)> {
    let c = clip as i64;
    (0..sentence.len())
        .map(|i| {
            (
                distance(i, sentence.e1).clamp(-c, c),
                distance(i, sentence.e2).clamp(-c, c),
            )
        })
        .collect()
}

/// 1 on tokens inside either entity span.
pub fn entity_flags(sentence: &LabeledSentence) -> Vec<u8> {
    (0..sentence.len())
        .map(|i| u8::from(sentence.e1.contains(i) || sentence.e2.contains(i)))
        .collect()
}

pub fn insert_position_indicators(sentence: &LabeledSentence) -> Vec<String> {
    let [o1, c1, o2, c2] = INDICATOR_TOKENS;
    let mut out = Vec::with_capacity(sentence.len() + 4);
    for (i, tok) in sentence.tokens.iter().enumerate() {
        if i == sentence.e1.start {
            out.push(o1.to_string());
        }
        if i == sentence.e2.start {
            out.push(o2.to_string());
        }
        out.push(tok.clone());
        if i == sentence.e1.end {
            out.push(c1.to_string());
        }
        if i == sentence.e2.end {
            out.push(c2.to_string());
        }
    }
    out
}

/// Inverse of [`insert_position_indicators`]: the plain tokens and the two
/// spans.
pub fn strip_position_indicators(tokens: &[String]) -> Result<(Vec<String>, Span, Span)> {
    let [o1, c1, o2, c2] = INDICATOR_TOKENS;
    let mut plain = Vec::with_capacity(tokens.len());
    let mut marks = [None; 4];
    for t in tokens {
        let slot = match t.as_str() {
            x if x == o1 => Some((0, plain.len())),
            x if x == c1 => Some((1, plain.len())),
            x if x == o2 => Some((2, plain.len())),
            x if x == c2 => Some((3, plain.len())),
            _ => None,
        };
        match slot {
            Some((k, at)) => {
                if marks[k].replace(at).is_some() {
                    return Err(Error::Invalid(format!("indicator {t} repeated")));
                }
            }
            None => plain.push(t.clone()),
        }
    }
    match marks {
        [Some(a), Some(b), Some(c), Some(d)] if a < b && b <= c && c < d => {
            Ok((plain, Span::new(a, b - 1), Span::new(c, d - 1)))
        }
        _ => Err(Error::Invalid("malformed position indicators".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RelationLabel;

    fn sent(n: usize, e1: Span, e2: Span) -> LabeledSentence {
        let tokens = (0..n).map(|i| format!("w{i}")).collect();
        LabeledSentence::new(0, tokens, e1, e2, RelationLabel::Other).unwrap()
    }

    #[test]
    fn distances() {
        let s = sent(60, Span::new(3, 4), Span::new(6, 6));
        let d = relative_positions(&s, 30);
        assert_eq!(d[3].0, 0);
        assert_eq!(d[4].0, 0);
        assert_eq!(d[2].0, -1);
        assert_eq!(d[5], (1, -1));
        assert_eq!(d[46].1, 30);
        assert_eq!(d[59].1, 30);
    }

    #[test]
    fn buckets() {
        let cfg = PositionFeatureConfig {
            variant: PositionVariant::Embeddings,
            pos_dim: 5,
            clip: 30,
        };
        assert_eq!(cfg.buckets(), 62);
        assert_eq!(cfg.bucket(-100), 0);
        assert_eq!(cfg.bucket(0), 30);
        assert_eq!(cfg.bucket(30), 60);
        assert_eq!(cfg.padding_bucket(), 61);
        assert!(PositionFeatureConfig { pos_dim: 0, ..cfg }.validate().is_err());
        assert!(PositionFeatureConfig {
            pos_dim: 0,
            variant: PositionVariant::Indicators,
            ..cfg
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn flags_cover_exactly_the_spans() {
        let s = sent(8, Span::new(1, 2), Span::new(5, 5));
        let f = entity_flags(&s);
        assert_eq!(f, vec![0, 1, 1, 0, 0, 1, 0, 0]);
        assert_eq!(f.iter().map(|&x| x as usize).sum::<usize>(), 3);
    }

    #[test]
    fn indicators_insert_and_strip() {
        let s = sent(4, Span::new(0, 0), Span::new(2, 3));
        let with = insert_position_indicators(&s);
        assert_eq!(
            with,
            ["<e1>", "w0", "</e1>", "w1", "<e2>", "w2", "w3", "</e2>"]
        );
        let (plain, e1, e2) = strip_position_indicators(&with).unwrap();
        assert_eq!(plain, s.tokens);
        assert_eq!((e1, e2), (s.e1, s.e2));
    }
}
