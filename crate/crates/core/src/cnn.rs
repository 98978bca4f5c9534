//! Convolutional relation classifier.
//!
//! One or two convolution stacks (middle context, or the two extended
//! contexts `left+e1+middle` and `middle+e2+right`), each with a filter
//! bank per window size followed by max-over-time pooling. The pooled
//! vectors are concatenated, squashed with `tanh`, and scored by a linear
//! layer (19 rows for softmax, 18 for ranking).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{LabeledSentence, Vocabulary};
use crate::error::{Error, Result};
use crate::features::{
    check_cnn_variant, cnn_context_sources, columns_from_sources, init_uniform, init_word_table,
    split_contexts, token_sources, EmbeddingTables, PositionFeatureConfig, PretrainedEmbeddings,
    TokenSource,
};
use crate::model::{fingerprint, Objective};
use crate::numerics::{
    add_outer_into, axpy, conv_over_time, max_pool_over_time, FeatureColumns, Gradients, ParamKind, Parameters,
    Tensor,
};

pub const WEIGHT_INIT_SCALE: f64 = 0.1;
pub const EMBEDDING_INIT_SCALE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContextMode {
    /// A single stack over the tokens between the entities.
    MiddleOnly,
    /// Two independent stacks over `left+e1+middle` and `middle+e2+right`.
    Extended,
}

impl ContextMode {
    pub fn stacks(self) -> usize {
        match self {
            ContextMode::MiddleOnly => 1,
            ContextMode::Extended => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ContextMode::MiddleOnly => "middle",
            ContextMode::Extended => "extended",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "middle" => Ok(ContextMode::MiddleOnly),
            "extended" => Ok(ContextMode::Extended),
            _ => Err(Error::Config(format!("unknown context mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnConfig {
    pub context_mode: ContextMode,
    pub window_sizes: Vec<usize>,
    pub feature_maps: usize,
    pub word_dim: usize,
    pub position: PositionFeatureConfig,
    pub objective: Objective,
}

impl CnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_sizes.is_empty() || self.window_sizes.contains(&0) {
            return Err(Error::Config("window sizes must be non-empty and positive".into()));
        }
        if self.feature_maps == 0 || self.word_dim == 0 {
            return Err(Error::Config("feature maps and word dim must be positive".into()));
        }
        check_cnn_variant(self.position.variant)?;
        self.position.validate()
    }

    pub fn max_window(&self) -> usize {
        self.window_sizes.iter().copied().max().unwrap_or(1)
    }

    /// Width of the pooled sentence representation.
    pub fn representation_width(&self) -> usize {
        self.window_sizes.len() * self.feature_maps * self.context_mode.stacks()
    }

    pub fn column_height(&self) -> usize {
        self.word_dim
            + if self.position.variant.uses_embeddings() {
                2 * self.position.pos_dim
            } else {
                0
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub window: usize,
    /// `feature_maps × (window · column_height)`
    pub filters: Tensor,
    pub bias: Tensor,
}

/// Column sources of every context the model reads.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnExample {
    pub contexts: Vec<Vec<TokenSource>>,
}

#[derive(Debug, Clone)]
pub struct CnnCache {
    version: u64,
    inputs: Vec<FeatureColumns>,
    sources: Option<Vec<Vec<TokenSource>>>,
    /// Per stack, per window: argmax time index of every filter.
    argmax: Vec<Vec<Vec<usize>>>,
    representation: Vec<f64>,
}

impl CnnCache {
    /// Fingerprint of the pooling choices.
    pub fn regime(&self) -> u64 {
        fingerprint(&self.argmax)
    }

    /// The `tanh`-squashed pooled representation.
    pub fn representation(&self) -> &[f64] {
        &self.representation
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    config: CnnConfig,
    vocab: Vocabulary,
    pub tables: EmbeddingTables,
    /// `stacks[s][w]`: filter bank of window `window_sizes[w]` in stack `s`.
    pub stacks: Vec<Vec<FilterBank>>,
    pub w_out: Tensor,
    pub b_out: Tensor,
    version: u64,
}

impl CnnModel {
    pub fn new(
        config: CnnConfig,
        vocab: Vocabulary,
        pretrained: Option<&PretrainedEmbeddings>,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = init_word_table(&vocab, config.word_dim, pretrained, EMBEDDING_INIT_SCALE, &mut rng)?;
        let pos = config.position;
        let (pos_e1, pos_e2) = if pos.variant.uses_embeddings() {
            (
                Some(init_uniform(&[pos.buckets(), pos.pos_dim], EMBEDDING_INIT_SCALE, &mut rng)),
                Some(init_uniform(&[pos.buckets(), pos.pos_dim], EMBEDDING_INIT_SCALE, &mut rng)),
            )
        } else {
            (None, None)
        };
        let height = config.column_height();
        let stacks = (0..config.context_mode.stacks())
            .map(|_| {
                config
                    .window_sizes
                    .iter()
                    .map(|&w| FilterBank {
                        window: w,
                        filters: init_uniform(&[config.feature_maps, w * height], WEIGHT_INIT_SCALE, &mut rng),
                        bias: Tensor::zeros(&[config.feature_maps]),
                    })
                    .collect()
            })
            .collect();
        let n_out = config.objective.num_scores();
        let w_out = init_uniform(&[n_out, config.representation_width()], WEIGHT_INIT_SCALE, &mut rng);
        Ok(CnnModel {
            tables: EmbeddingTables {
                words,
                pos_e1,
                pos_e2,
            },
            stacks,
            w_out,
            b_out: Tensor::zeros(&[n_out]),
            config,
            vocab,
            version: 0,
        })
    }

    pub fn config(&self) -> &CnnConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn prepare(&self, sentence: &LabeledSentence) -> Result<CnnExample> {
        let all = token_sources(sentence, &self.vocab, &self.config.position);
        let views = split_contexts(sentence);
        let regions: Vec<&[usize]> = match self.config.context_mode {
            ContextMode::MiddleOnly => vec![&views.middle],
            ContextMode::Extended => vec![&views.extended_1, &views.extended_2],
        };
        Ok(CnnExample {
            contexts: regions
                .into_iter()
                .map(|r| cnn_context_sources(&all, r, &self.config.position, self.config.max_window()))
                .collect(),
        })
    }

    pub fn forward(&self, example: &CnnExample) -> Result<(Vec<f64>, CnnCache)> {
        let inputs: Vec<FeatureColumns> = example
            .contexts
            .iter()
            .map(|src| columns_from_sources(&self.tables, src, self.config.position.variant))
            .collect();
        let (scores, mut cache) = self.forward_columns(inputs)?;
        cache.sources = Some(example.contexts.clone());
        Ok((scores, cache))
    }

    /// Forward pass over already-encoded context matrices, one per stack.
    pub fn forward_columns(&self, inputs: Vec<FeatureColumns>) -> Result<(Vec<f64>, CnnCache)> {
        if inputs.len() != self.stacks.len() {
            return Err(Error::Shape(format!(
                "{} inputs for {} stacks",
                inputs.len(),
                self.stacks.len()
            )));
        }
        let mut pooled = Vec::with_capacity(self.config.representation_width());
        let mut argmax = Vec::with_capacity(self.stacks.len());
        for (stack, input) in self.stacks.iter().zip(&inputs) {
            let mut stack_arg = Vec::with_capacity(stack.len());
            for bank in stack {
                let map = conv_over_time(input, &bank.filters, bank.bias.data(), bank.window)?;
                let (m, a) = max_pool_over_time(&map)?;
                pooled.extend(m);
                stack_arg.push(a);
            }
            argmax.push(stack_arg);
        }
        let representation: Vec<f64> = pooled.iter().map(|v| v.tanh()).collect();
        let mut scores = self.w_out.matvec(&representation);
        for (s, b) in scores.iter_mut().zip(self.b_out.data()) {
            *s += b;
        }
        Ok((
            scores,
            CnnCache {
                version: self.version,
                inputs,
                sources: None,
                argmax,
                representation,
            },
        ))
    }

    /// Gradients of all parameters given `dscores`. Only filter patches at
    /// the pooled positions and the embedding rows read by the example
    /// receive gradient.
    pub fn backward(&self, cache: &CnnCache, dscores: &[f64]) -> Result<Gradients> {
        if cache.version != self.version {
            return Err(Error::StaleCache("parameters changed since the forward pass".into()));
        }
        if dscores.len() != self.w_out.rows() {
            return Err(Error::Shape(format!(
                "{} score gradients for {} scores",
                dscores.len(),
                self.w_out.rows()
            )));
        }
        let mut grads = Gradients::zeros_for(self);
        let n_emb = self.embedding_param_count();
        let (w_idx, b_idx) = (grads.grads.len() - 2, grads.grads.len() - 1);

        let rep = &cache.representation;
        add_outer_into(grads.grads[w_idx].dense_mut(), dscores, rep);
        grads.grads[b_idx].dense_mut().copy_from_slice(dscores);
        let mut drep = vec![0.0; rep.len()];
        self.w_out.matvec_t_acc(dscores, &mut drep);
        let dpooled: Vec<f64> = drep
            .iter()
            .zip(rep)
            .map(|(g, y)| g * (1.0 - y * y))
            .collect();

        let maps = self.config.feature_maps;
        let mut offset = 0;
        let mut param = n_emb;
        for (s, stack) in self.stacks.iter().enumerate() {
            let input = &cache.inputs[s];
            let mut dinput = input.zeros_like();
            for (w, bank) in stack.iter().enumerate() {
                let width = bank.filters.cols();
                for k in 0..maps {
                    let g = dpooled[offset + k];
                    if g == 0.0 {
                        continue;
                    }
                    let t = cache.argmax[s][w][k];
                    let patch = input.window(t, bank.window);
                    axpy(g, patch, &mut grads.grads[param].dense_mut()[k * width..(k + 1) * width]);
                    grads.grads[param + 1].dense_mut()[k] += g;
                    axpy(g, bank.filters.row(k), dinput.window_mut(t, bank.window));
                }
                offset += maps;
                param += 2;
            }
            if let Some(sources) = &cache.sources {
                for (t, src) in sources[s].iter().enumerate() {
                    self.tables.scatter(
                        &mut grads.grads[..n_emb],
                        src,
                        self.config.position.variant,
                        dinput.column(t),
                    );
                }
            }
        }
        Ok(grads)
    }

    fn embedding_param_count(&self) -> usize {
        1 + usize::from(self.tables.pos_e1.is_some()) + usize::from(self.tables.pos_e2.is_some())
    }
}

impl Parameters for CnnModel {
    fn params(&self) -> Vec<(String, ParamKind, &Tensor)> {
        let mut out = vec![(
            "embed.words".to_string(),
            ParamKind::Embedding {
                frozen_row: Some(Vocabulary::PAD),
            },
            &self.tables.words,
        )];
        if let Some(t) = &self.tables.pos_e1 {
            out.push(("embed.pos_e1".into(), ParamKind::Embedding { frozen_row: None }, t));
        }
        if let Some(t) = &self.tables.pos_e2 {
            out.push(("embed.pos_e2".into(), ParamKind::Embedding { frozen_row: None }, t));
        }
        for (s, stack) in self.stacks.iter().enumerate() {
            for bank in stack {
                out.push((format!("stack{s}.w{}.filters", bank.window), ParamKind::Weight, &bank.filters));
                out.push((format!("stack{s}.w{}.bias", bank.window), ParamKind::Bias, &bank.bias));
            }
        }
        out.push(("out.weight".into(), ParamKind::Weight, &self.w_out));
        out.push(("out.bias".into(), ParamKind::Bias, &self.b_out));
        out
    }

    fn params_mut(&mut self) -> Vec<(String, ParamKind, &mut Tensor)> {
        let mut out = vec![(
            "embed.words".to_string(),
            ParamKind::Embedding {
                frozen_row: Some(Vocabulary::PAD),
            },
            &mut self.tables.words,
        )];
        if let Some(t) = &mut self.tables.pos_e1 {
            out.push(("embed.pos_e1".into(), ParamKind::Embedding { frozen_row: None }, t));
        }
        if let Some(t) = &mut self.tables.pos_e2 {
            out.push(("embed.pos_e2".into(), ParamKind::Embedding { frozen_row: None }, t));
        }
        for (s, stack) in self.stacks.iter_mut().enumerate() {
            for bank in stack {
                let w = bank.window;
                out.push((format!("stack{s}.w{w}.filters"), ParamKind::Weight, &mut bank.filters));
                out.push((format!("stack{s}.w{w}.bias"), ParamKind::Bias, &mut bank.bias));
            }
        }
        out.push(("out.weight".into(), ParamKind::Weight, &mut self.w_out));
        out.push(("out.bias".into(), ParamKind::Bias, &mut self.b_out));
        out
    }

    fn mark_updated(&mut self) {
        self.version += 1;
    }
}
