//! Pretrained embedding files and the trainable lookup tables.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Vectors read from a word2vec-style text file.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainedEmbeddings {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
}

impl PretrainedEmbeddings {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Parses `token v1 … v_dim` lines. A leading `count dim` header is
    /// recognized and checked. Tokens are lowercased to match the corpus
    /// tokenizer; the first vector of a token wins. When `keep` is given,
    /// only those tokens are retained.
    pub fn parse<R: BufRead>(
        reader: R,
        keep: Option<&dyn Fn(&str) -> bool>,
    ) -> Result<Self> {
        let mut dim = None;
        let mut header_dim = None;
        let mut out = PretrainedEmbeddings {
            dim: 0,
            tokens: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
        };
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::parse(lineno, None, e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if idx == 0 && fields.len() == 2 {
                if let (Ok(_), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    header_dim = Some(d);
                    continue;
                }
            }
            let width = fields.len() - 1;
            match dim {
                None => {
                    if width == 0 {
                        return Err(Error::parse(lineno, None, "embedding line has no values"));
                    }
                    if let Some(h) = header_dim {
                        if h != width {
                            return Err(Error::parse(
                                lineno,
                                None,
                                format!("header declares dim {h}, line has {width}"),
                            ));
                        }
                    }
                    dim = Some(width);
                }
                Some(d) if d != width => {
                    return Err(Error::parse(
                        lineno,
                        None,
                        format!("expected {d} values, found {width}"),
                    ))
                }
                _ => {}
            }
            let token = fields[0].to_lowercase();
            if out.index.contains_key(&token) || keep.is_some_and(|k| !k(&token)) {
                continue;
            }
            for f in &fields[1..] {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::parse(lineno, None, format!("bad number `{f}`")))?;
                if !v.is_finite() {
                    return Err(Error::parse(lineno, None, "non-finite embedding value"));
                }
                out.vectors.push(v);
            }
            out.index.insert(token.clone(), out.tokens.len());
            out.tokens.push(token);
        }
        out.dim = dim.or(header_dim).unwrap_or(0);
        Ok(out)
    }

    pub fn load(path: &Path, keep: Option<&dyn Fn(&str) -> bool>) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(f), keep)
    }
}

/// A `|vocabulary| × dim` word table. The PADDING row starts (and stays)
/// at zero; rows with a pretrained vector copy it; the rest are drawn
/// uniformly from `[-scale, scale]`.
pub fn init_word_table<R: Rng>(
    vocab: &Vocabulary,
    dim: usize,
    pretrained: Option<&PretrainedEmbeddings>,
    scale: f64,
    rng: &mut R,
) -> Result<Tensor> {
    if let Some(p) = pretrained {
        if p.dim() != dim {
            return Err(Error::Config(format!(
                "pretrained embeddings have dim {}, model expects {dim}",
                p.dim()
            )));
        }
    }
    let mut t = Tensor::zeros(&[vocab.len(), dim]);
    for (i, tok) in vocab.tokens().iter().enumerate() {
        let row = t.row_mut(i);
        if i == Vocabulary::PAD {
            continue;
        }
        match pretrained.and_then(|p| p.get(tok)) {
            Some(v) => row.copy_from_slice(v),
            None => row.iter_mut().for_each(|x| *x = rng.gen_range(-scale..=scale)),
        }
    }
    Ok(t)
}

pub fn init_uniform<R: Rng>(shape: &[usize], scale: f64, rng: &mut R) -> Tensor {
    let mut t = Tensor::zeros(shape);
    t.data_mut()
        .iter_mut()
        .for_each(|x| *x = rng.gen_range(-scale..=scale));
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabeledSentence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_with_and_without_header() {
        let with = "2 3\nThe 0.1 0.2 0.3\ncat 1 2 3\n";
        let e = PretrainedEmbeddings::parse(with.as_bytes(), None).unwrap();
        assert_eq!((e.dim(), e.len()), (3, 2));
        assert_eq!(e.get("the"), Some(&[0.1, 0.2, 0.3][..]));
        let without = "the 0.1 0.2 0.3\ncat 1 2 3\n";
        assert_eq!(PretrainedEmbeddings::parse(without.as_bytes(), None).unwrap(), e);
    }

    #[test]
    fn rejects_ragged_or_bad_files() {
        assert!(PretrainedEmbeddings::parse("a 1 2\nb 1\n".as_bytes(), None).is_err());
        assert!(PretrainedEmbeddings::parse("2 4\na 1 2\n".as_bytes(), None).is_err());
        assert!(PretrainedEmbeddings::parse("a 1 x\n".as_bytes(), None).is_err());
        assert!(PretrainedEmbeddings::parse("a 1 NaN\n".as_bytes(), None).is_err());
    }

    #[test]
    fn keep_filter_and_table_init() {
        let keep = |t: &str| t != "dog";
        let e = PretrainedEmbeddings::parse("cat 1 2\ndog 3 4\n".as_bytes(), Some(&keep)).unwrap();
        assert_eq!(e.len(), 1);
        let s = LabeledSentence::new(
            0,
            vec!["cat".into(), "fish".into()],
            crate::corpus::Span::new(0, 0),
            crate::corpus::Span::new(1, 1),
            crate::corpus::RelationLabel::Other,
        )
        .unwrap();
        let vocab = Vocabulary::build(&[s], None::<Vec<&str>>, false);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = init_word_table(&vocab, 2, Some(&e), 0.25, &mut rng).unwrap();
        assert_eq!(t.row(Vocabulary::PAD), &[0.0, 0.0]);
        assert_eq!(t.row(vocab.get("cat").unwrap()), &[1.0, 2.0]);
        assert!(t.row(vocab.get("fish").unwrap()).iter().all(|v| v.abs() <= 0.25));
        assert!(init_word_table(&vocab, 3, Some(&e), 0.25, &mut rng).is_err());
    }
}
