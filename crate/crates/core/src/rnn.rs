//! Recurrent relation classifier over trigram inputs.
//!
//! Three variants share the same input layer:
//!
//! * `Uni`: a forward chain `hf_t = f(U_f x_t + V hf_{t-1})`, scored from
//!   its last state.
//! * `Bi`: adds a backward chain `hb_t = f(U_b x_t + B hb_{t+1})` that
//!   runs right to left; scored from `f(hb_n + hf_n)`.
//! * `Connectionist`: combines both chains at every step through a third
//!   recurrence `hc_t = f(hb_t + hf_t + H hc_{t-1})`, scored from `hc_n`.
//!
//! `f` is the capped ReLU. Initial states are zero and the recurrences
//! carry no bias; only the scoring layer has one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cnn::{EMBEDDING_INIT_SCALE, WEIGHT_INIT_SCALE};
use crate::corpus::{LabeledSentence, Vocabulary};
use crate::error::{Error, Result};
use crate::features::{
    init_uniform, init_word_table, token_sources, trigram_steps, EmbeddingTables,
    PositionFeatureConfig, PositionVariant, PretrainedEmbeddings, TokenSource,
};
use crate::model::{fingerprint, Objective};
use crate::numerics::{add_outer_into, Activation, Gradients, ParamKind, Parameters, Tensor};
#[cfg(test)]
use crate::numerics::Grad;

pub const DEFAULT_HIDDEN: usize = 400;
pub const DEFAULT_CAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RnnVariant {
    Uni,
    Bi,
    Connectionist,
}

impl RnnVariant {
    pub fn name(self) -> &'static str {
        match self {
            RnnVariant::Uni => "uni",
            RnnVariant::Bi => "bi",
            RnnVariant::Connectionist => "connectionist",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uni" => Ok(RnnVariant::Uni),
            "bi" => Ok(RnnVariant::Bi),
            "connectionist" => Ok(RnnVariant::Connectionist),
            _ => Err(Error::Config(format!("unknown rnn variant `{s}`"))),
        }
    }

    fn has_backward(self) -> bool {
        self != RnnVariant::Uni
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnConfig {
    pub variant: RnnVariant,
    pub word_dim: usize,
    pub position: PositionFeatureConfig,
    pub hidden: usize,
    pub objective: Objective,
    /// Upper bound of the capped ReLU.
    pub cap: f64,
    /// Recurrent gradients flow back through at most this many processing
    /// steps of each chain. `None` unrolls the whole sentence.
    pub truncation: Option<usize>,
}

impl RnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.word_dim == 0 {
            return Err(Error::Config("hidden width and word dim must be positive".into()));
        }
        if !(self.cap.is_finite() && self.cap > 0.0) {
            return Err(Error::Config(format!("activation cap must be positive, got {}", self.cap)));
        }
        if self.truncation == Some(0) {
            return Err(Error::Config("truncation must be at least 1".into()));
        }
        self.position.validate()
    }

    pub fn token_dim(&self) -> usize {
        let pos = &self.position;
        self.word_dim
            + match pos.variant {
                PositionVariant::None | PositionVariant::Indicators => 0,
                PositionVariant::Embeddings => 2 * pos.pos_dim,
                PositionVariant::EmbeddingsWithFlag => 2 * pos.pos_dim + 1,
            }
    }

    pub fn input_width(&self) -> usize {
        3 * self.token_dim()
    }

    fn activation(&self) -> Activation {
        Activation::CappedRelu { cap: self.cap }
    }
}

/// Token sources of one sentence, indicators already inserted.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnExample {
    pub sources: Vec<TokenSource>,
}

#[derive(Debug, Clone)]
pub struct RnnCache {
    version: u64,
    cap: f64,
    sources: Vec<TokenSource>,
    pub steps: Vec<Vec<f64>>,
    /// Pre-activations and states of the forward chain.
    pub af: Vec<Vec<f64>>,
    pub hf: Vec<Vec<f64>>,
    /// Backward chain, indexed by sentence position.
    pub ab: Vec<Vec<f64>>,
    pub hb: Vec<Vec<f64>>,
    /// Combined layer: every step for `Connectionist`, the last one for `Bi`.
    pub ac: Vec<Vec<f64>>,
    pub hc: Vec<Vec<f64>>,
}

impl RnnCache {
    /// Fingerprint of the linear piece every pre-activation falls on.
    pub fn regime(&self) -> u64 {
        let act = Activation::CappedRelu { cap: self.cap };
        let pieces: Vec<u8> = [&self.af, &self.ab, &self.ac]
            .into_iter()
            .flatten()
            .flatten()
            .map(|&x| act.piece(x))
            .collect();
        fingerprint(&pieces)
    }

    pub fn representation(&self) -> &[f64] {
        self.hc.last().or(self.hf.last()).expect("non-empty sequence")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnModel {
    config: RnnConfig,
    vocab: Vocabulary,
    pub tables: EmbeddingTables,
    pub u_f: Tensor,
    pub v: Tensor,
    pub u_b: Option<Tensor>,
    pub b: Option<Tensor>,
    pub h: Option<Tensor>,
    pub w_out: Tensor,
    pub b_out: Tensor,
    version: u64,
}

impl RnnModel {
    pub fn new(
        config: RnnConfig,
        vocab: Vocabulary,
        pretrained: Option<&PretrainedEmbeddings>,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if config.position.variant == PositionVariant::Indicators && !vocab.has_indicators() {
            return Err(Error::Config("vocabulary lacks the position indicator tokens".into()));
        }
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
        let (hd, iw) = (config.hidden, config.input_width());
        let mut mat = |r: usize, c: usize| init_uniform(&[r, c], WEIGHT_INIT_SCALE, &mut rng);
        let u_f = mat(hd, iw);
        let v = mat(hd, hd);
        let (u_b, b) = if config.variant.has_backward() {
            (Some(mat(hd, iw)), Some(mat(hd, hd)))
        } else {
            (None, None)
        };
        let h = (config.variant == RnnVariant::Connectionist).then(|| mat(hd, hd));
        let n_out = config.objective.num_scores();
        let w_out = mat(n_out, hd);
        Ok(RnnModel {
            tables: EmbeddingTables {
                words,
                pos_e1,
                pos_e2,
            },
            u_f,
            v,
            u_b,
            b,
            h,
            w_out,
            b_out: Tensor::zeros(&[n_out]),
            config,
            vocab,
            version: 0,
        })
    }

    pub fn config(&self) -> &RnnConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn prepare(&self, sentence: &LabeledSentence) -> Result<RnnExample> {
        Ok(RnnExample {
            sources: token_sources(sentence, &self.vocab, &self.config.position),
        })
    }

    pub fn forward(&self, example: &RnnExample) -> Result<(Vec<f64>, RnnCache)> {
        let steps = trigram_steps(&self.tables, &example.sources, &self.config.position);
        let (scores, mut cache) = self.forward_steps(steps)?;
        cache.sources = example.sources.clone();
        Ok((scores, cache))
    }

    /// Forward pass over an already-encoded trigram sequence.
    pub fn forward_steps(&self, steps: Vec<Vec<f64>>) -> Result<(Vec<f64>, RnnCache)> {
        let n = steps.len();
        if n == 0 {
            return Err(Error::Invalid("empty input sequence".into()));
        }
        let iw = self.u_f.cols();
        if let Some(bad) = steps.iter().find(|s| s.len() != iw) {
            return Err(Error::Shape(format!("step width {} but input width {iw}", bad.len())));
        }
        let act = self.config.activation();
        let hd = self.config.hidden;

        let (af, hf) = run_chain(&self.u_f, &self.v, &steps, (0..n).collect(), act);
        let (mut ab, mut hb, mut ac, mut hc) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        if let (Some(u_b), Some(b)) = (&self.u_b, &self.b) {
            (ab, hb) = run_chain(u_b, b, &steps, (0..n).rev().collect(), act);
            match &self.h {
                Some(h) => {
                    let mut prev = vec![0.0; hd];
                    for t in 0..n {
                        let rec = h.matvec(&prev);
                        let a: Vec<f64> = (0..hd).map(|i| (hb[t][i] + hf[t][i]) + rec[i]).collect();
                        prev = act.forward(&a);
                        ac.push(a);
                        hc.push(prev.clone());
                    }
                }
                None => {
                    let a: Vec<f64> = (0..hd).map(|i| hb[n - 1][i] + hf[n - 1][i]).collect();
                    hc.push(act.forward(&a));
                    ac.push(a);
                }
            }
        }
        let cache = RnnCache {
            version: self.version,
            cap: self.config.cap,
            sources: Vec::new(),
            steps,
            af,
            hf,
            ab,
            hb,
            ac,
            hc,
        };
        let rep = cache.representation();
        let mut scores = self.w_out.matvec(rep);
        for (s, b) in scores.iter_mut().zip(self.b_out.data()) {
            *s += b;
        }
        Ok((scores, cache))
    }

    /// Backpropagation through time over all chains jointly.
    pub fn backward(&self, cache: &RnnCache, dscores: &[f64]) -> Result<Gradients> {
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
        let act = self.config.activation();
        let n = cache.steps.len();
        let hd = self.config.hidden;
        let keep = self.config.truncation.unwrap_or(usize::MAX);
        let mut grads = Gradients::zeros_for(self);
        let n_emb = 1 + usize::from(self.tables.pos_e1.is_some()) + usize::from(self.tables.pos_e2.is_some());
        let mut idx = n_emb;
        let mut next = || {
            idx += 1;
            idx - 1
        };
        let (i_uf, i_v) = (next(), next());
        let (i_ub, i_b) = if self.u_b.is_some() { (next(), next()) } else { (0, 0) };
        let i_h = if self.h.is_some() { next() } else { 0 };
        let (i_wo, i_bo) = (next(), next());

        add_outer_into(grads.grads[i_wo].dense_mut(), dscores, cache.representation());
        grads.grads[i_bo].dense_mut().copy_from_slice(dscores);
        let mut drep = vec![0.0; hd];
        self.w_out.matvec_t_acc(dscores, &mut drep);

        let mut dhf = vec![vec![0.0; hd]; n];
        let mut dhb = vec![vec![0.0; hd]; n];
        match (&self.h, self.config.variant) {
            (_, RnnVariant::Uni) => dhf[n - 1] = drep,
            (None, _) => {
                let da = act.backward(&cache.ac[0], &cache.hc[0], &drep);
                dhf[n - 1].copy_from_slice(&da);
                dhb[n - 1].copy_from_slice(&da);
            }
            (Some(h), _) => {
                let mut dh = drep;
                for t in (0..n).rev() {
                    let da = act.backward(&cache.ac[t], &cache.hc[t], &dh);
                    for i in 0..hd {
                        dhb[t][i] += da[i];
                        dhf[t][i] += da[i];
                    }
                    if t == 0 {
                        break;
                    }
                    add_outer_into(grads.grads[i_h].dense_mut(), &da, &cache.hc[t - 1]);
                    if n - t >= keep {
                        break;
                    }
                    dh = vec![0.0; hd];
                    h.matvec_t_acc(&da, &mut dh);
                }
            }
        }

        let mut dsteps = vec![vec![0.0; self.u_f.cols()]; n];
        let order: Vec<usize> = (0..n).collect();
        backprop_chain(
            &self.u_f,
            &self.v,
            &cache.steps,
            &cache.af,
            &cache.hf,
            &order,
            &mut dhf,
            &mut dsteps,
            act,
            keep,
            &mut grads,
            (i_uf, i_v),
        );
        if let (Some(u_b), Some(b)) = (&self.u_b, &self.b) {
            let order: Vec<usize> = (0..n).rev().collect();
            backprop_chain(
                u_b,
                b,
                &cache.steps,
                &cache.ab,
                &cache.hb,
                &order,
                &mut dhb,
                &mut dsteps,
                act,
                keep,
                &mut grads,
                (i_ub, i_b),
            );
        }

        if !cache.sources.is_empty() {
            let variant = self.config.position.variant;
            let td = self.config.token_dim();
            let pad = TokenSource::padding(&self.config.position);
            for (t, dx) in dsteps.iter().enumerate() {
                if dx.iter().all(|&v| v == 0.0) {
                    continue;
                }
                for k in 0..3 {
                    let src = match (t + k).checked_sub(1) {
                        Some(p) if p < n => cache.sources[p],
                        _ => pad,
                    };
                    self.tables.scatter(
                        &mut grads.grads[..n_emb],
                        &src,
                        variant,
                        &dx[k * td..(k + 1) * td],
                    );
                }
            }
        }
        Ok(grads)
    }
}

/// Runs `h_t = f(U x_t + W h_prev)` visiting positions in `order`; results
/// are indexed by position.
fn run_chain(
    u: &Tensor,
    w: &Tensor,
    steps: &[Vec<f64>],
    order: Vec<usize>,
    act: Activation,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = steps.len();
    let mut pre = vec![Vec::new(); n];
    let mut out = vec![Vec::new(); n];
    let mut prev = vec![0.0; w.rows()];
    for t in order {
        let ux = u.matvec(&steps[t]);
        let wh = w.matvec(&prev);
        let a: Vec<f64> = ux.iter().zip(&wh).map(|(x, y)| x + y).collect();
        prev = act.forward(&a);
        pre[t] = a;
        out[t] = prev.clone();
    }
    (pre, out)
}

/// Reverse pass over one chain. `dh` holds the direct gradient of every
/// state; recurrent contributions are added as the pass walks back along
/// `order`, cut off after `keep` processing steps.
#[allow(clippy::too_many_arguments)]
fn backprop_chain(
    u: &Tensor,
    w: &Tensor,
    steps: &[Vec<f64>],
    pre: &[Vec<f64>],
    states: &[Vec<f64>],
    order: &[usize],
    dh: &mut [Vec<f64>],
    dsteps: &mut [Vec<f64>],
    act: Activation,
    keep: usize,
    grads: &mut Gradients,
    (i_u, i_w): (usize, usize),
) {
    let n = order.len();
    for k in (0..n).rev() {
        let t = order[k];
        let da = act.backward(&pre[t], &states[t], &dh[t]);
        if da.iter().all(|&g| g == 0.0) {
            continue;
        }
        add_outer_into(grads.grads[i_u].dense_mut(), &da, &steps[t]);
        u.matvec_t_acc(&da, &mut dsteps[t]);
        if k == 0 {
            continue;
        }
        let prev = order[k - 1];
        add_outer_into(grads.grads[i_w].dense_mut(), &da, &states[prev]);
        if n - k < keep {
            w.matvec_t_acc(&da, &mut dh[prev]);
        }
    }
}

impl Parameters for RnnModel {
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
        out.push(("rnn.u_f".into(), ParamKind::Weight, &self.u_f));
        out.push(("rnn.v".into(), ParamKind::Weight, &self.v));
        if let (Some(u_b), Some(b)) = (&self.u_b, &self.b) {
            out.push(("rnn.u_b".into(), ParamKind::Weight, u_b));
            out.push(("rnn.b".into(), ParamKind::Weight, b));
        }
        if let Some(h) = &self.h {
            out.push(("rnn.h".into(), ParamKind::Weight, h));
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
        out.push(("rnn.u_f".into(), ParamKind::Weight, &mut self.u_f));
        out.push(("rnn.v".into(), ParamKind::Weight, &mut self.v));
        if let (Some(u_b), Some(b)) = (&mut self.u_b, &mut self.b) {
            out.push(("rnn.u_b".into(), ParamKind::Weight, u_b));
            out.push(("rnn.b".into(), ParamKind::Weight, b));
        }
        if let Some(h) = &mut self.h {
            out.push(("rnn.h".into(), ParamKind::Weight, h));
        }
        out.push(("out.weight".into(), ParamKind::Weight, &mut self.w_out));
        out.push(("out.bias".into(), ParamKind::Bias, &mut self.b_out));
        out
    }

    fn mark_updated(&mut self) {
        self.version += 1;
    }
}
