//! From labeled sentences to model inputs: context regions, position
//! features, embedding tables and the CNN/RNN encoders.

mod contexts;
mod embeddings;
mod encode;
mod positions;

pub use contexts::{split_contexts, ContextViews};
pub use embeddings::{init_uniform, init_word_table, PretrainedEmbeddings};
pub use encode::{
    check_cnn_variant, cnn_context_sources, columns_from_sources, encode_cnn_input,
    encode_rnn_input, token_sources, trigram_steps, CnnInput, EmbeddingTables, RnnInput,
    TokenSource,
};
pub use positions::{
    entity_flags, insert_position_indicators, relative_positions, strip_position_indicators,
    PositionFeatureConfig, PositionVariant,
};

/// Distances beyond this share the outermost bucket.
pub const DEFAULT_POSITION_CLIP: usize = 30;

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::corpus::{parse_semeval_file, LabeledSentence, Vocabulary};

    fn headaches() -> LabeledSentence {
        parse_semeval_file(
            "1\t\"He had chest pain and <e1>headaches</e1> from <e2>mold</e2> in the bedroom.\"\nCause-Effect(e2,e1)\n",
        )
        .unwrap()
        .remove(0)
    }

    fn tables(vocab: &Vocabulary, wd: usize, pd: usize, cfg: &PositionFeatureConfig) -> EmbeddingTables {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pos = |rng: &mut ChaCha8Rng| {
            cfg.variant
                .uses_embeddings()
                .then(|| init_uniform(&[cfg.buckets(), pd], 0.25, rng))
        };
        EmbeddingTables {
            words: init_word_table(vocab, wd, None, 0.25, &mut rng).unwrap(),
            pos_e1: pos(&mut rng),
            pos_e2: pos(&mut rng),
        }
    }

    fn cfg(variant: PositionVariant, pos_dim: usize) -> PositionFeatureConfig {
        PositionFeatureConfig {
            variant,
            pos_dim,
            clip: DEFAULT_POSITION_CLIP,
        }
    }

    #[test]
    fn contexts_of_the_bedroom_sentence() {
        let s = headaches();
        let v = split_contexts(&s);
        let t = |p: &[usize]| ContextViews::tokens(&s, p);
        assert_eq!(t(&v.left), ["he", "had", "chest", "pain", "and"]);
        assert_eq!(t(&v.e1), ["headaches"]);
        assert_eq!(t(&v.middle), ["from"]);
        assert_eq!(t(&v.e2), ["mold"]);
        assert_eq!(t(&v.right), ["in", "the", "bedroom", "."]);
        assert_eq!(
            t(&v.extended_1),
            ["he", "had", "chest", "pain", "and", "headaches", "from"]
        );
        assert_eq!(t(&v.extended_2), ["from", "mold", "in", "the", "bedroom", "."]);
    }

    #[test]
    fn flags_on_the_bedroom_sentence() {
        let s = headaches();
        let f = entity_flags(&s);
        assert_eq!(f, vec![0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn cnn_matrix_shapes() {
        let s = headaches();
        let vocab = Vocabulary::build(std::slice::from_ref(&s), None::<Vec<&str>>, false);
        let c = cfg(PositionVariant::Embeddings, 5);
        let t = tables(&vocab, 50, 5, &c);
        let one = encode_cnn_input(&s, &[6], &vocab, &t, &c, 5).unwrap();
        assert_eq!((one.columns.height(), one.columns.width()), (60, 9));
        let empty = encode_cnn_input(&s, &[], &vocab, &t, &c, 5).unwrap();
        assert_eq!(empty.columns.width(), 8);
        assert!(empty.sources.iter().all(|s| *s == TokenSource::padding(&c)));

        let c400 = cfg(PositionVariant::Embeddings, 35);
        let t400 = tables(&vocab, 400, 35, &c400);
        let m = encode_cnn_input(&s, &[0, 1], &vocab, &t400, &c400, 5).unwrap();
        assert_eq!(m.columns.height(), 470);
    }

    #[test]
    fn cnn_rejects_rnn_only_variants() {
        let s = headaches();
        let vocab = Vocabulary::build(std::slice::from_ref(&s), None::<Vec<&str>>, true);
        for v in [PositionVariant::EmbeddingsWithFlag, PositionVariant::Indicators] {
            let c = cfg(v, 5);
            let t = tables(&vocab, 4, 5, &c);
            assert!(encode_cnn_input(&s, &[0], &vocab, &t, &c, 3).is_err());
        }
    }

    #[test]
    fn cnn_padding_never_narrower_than_window() {
        let s = headaches();
        let vocab = Vocabulary::build(std::slice::from_ref(&s), None::<Vec<&str>>, false);
        let c = cfg(PositionVariant::None, 0);
        let t = tables(&vocab, 4, 0, &c);
        let m = encode_cnn_input(&s, &[], &vocab, &t, &c, 1).unwrap();
        assert_eq!(m.columns.width(), 1);
    }

    #[test]
    fn rnn_trigram_widths() {
        let s = headaches();
        let vocab = Vocabulary::build(std::slice::from_ref(&s), None::<Vec<&str>>, true);

        let ci = cfg(PositionVariant::Indicators, 0);
        let ti = tables(&vocab, 50, 0, &ci);
        let r = encode_rnn_input(&s, &vocab, &ti, &ci).unwrap();
        assert_eq!(r.steps.len(), s.len() + 4);
        assert!(r.steps.iter().all(|v| v.len() == 150));

        let cf = cfg(PositionVariant::EmbeddingsWithFlag, 5);
        let tf = tables(&vocab, 50, 5, &cf);
        let r = encode_rnn_input(&s, &vocab, &tf, &cf).unwrap();
        assert_eq!(r.steps.len(), s.len());
        assert!(r.steps.iter().all(|v| v.len() == 183));
    }

    #[test]
    fn single_token_trigram_is_pad_tok_pad() {
        let s = LabeledSentence::new(
            0,
            vec!["a".into(), "b".into()],
            crate::corpus::Span::new(0, 0),
            crate::corpus::Span::new(1, 1),
            crate::corpus::RelationLabel::Other,
        )
        .unwrap();
        let vocab = Vocabulary::build(std::slice::from_ref(&s), None::<Vec<&str>>, false);
        let c = cfg(PositionVariant::None, 0);
        let t = tables(&vocab, 3, 0, &c);
        let src = [TokenSource {
            word: vocab.get("a").unwrap(),
            ..TokenSource::padding(&c)
        }];
        let steps = trigram_steps(&t, &src, &c);
        assert_eq!(steps.len(), 1);
        let mut expect = vec![0.0; 3];
        expect.extend_from_slice(t.words.row(vocab.get("a").unwrap()));
        expect.extend_from_slice(&[0.0; 3]);
        assert_eq!(steps[0], expect);
    }

    #[test]
    fn rnn_indicators_need_indicator_vocabulary() {
        let s = headaches();
        let vocab = Vocabulary::build(std::slice::from_ref(&s), None::<Vec<&str>>, false);
        let c = cfg(PositionVariant::Indicators, 0);
        let t = tables(&vocab, 4, 0, &c);
        assert!(encode_rnn_input(&s, &vocab, &t, &c).is_err());
    }
}
