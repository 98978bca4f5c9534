//! Flat `key = value` settings: parsing, formatting, and conversion to and
//! from model and training configurations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::cnn::{CnnConfig, ContextMode};
use crate::error::{Error, Result};
use crate::features::{PositionFeatureConfig, PositionVariant};
use crate::model::{ModelConfig, Objective};
use crate::rnn::{RnnConfig, RnnVariant};
use crate::training::{RankingLossConfig, Schedule, TrainConfig};

/// Ordered `key = value` settings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
}

impl KvMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Lines are `key = value`; blank lines and `#` comments are skipped.
    /// A key may appear only once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = KvMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, None, format!("expected `key = value`, got `{line}`")))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(i + 1, None, "empty key"));
            }
            if map.entries.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::parse(i + 1, None, format!("duplicate key `{k}`")));
            }
        }
        Ok(map)
    }

    pub fn format(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    /// Overlays `other`, its values winning.
    pub fn extend(&mut self, other: &KvMap) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn take_str(&mut self, key: &str) -> Result<String> {
        self.entries
            .remove(key)
            .ok_or_else(|| Error::Config(format!("missing setting `{key}`")))
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.take_str(key)?;
        v.parse()
            .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
    }

    fn take_opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        let v = self.take_str(key)?;
        if v == "none" {
            return Ok(None);
        }
        v.parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
    }

    fn finish(self) -> Result<()> {
        match self.entries.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::Config(format!("unknown setting `{k}`"))),
        }
    }
}

fn opt_str<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

/// Keys describing a model's architecture.
pub fn model_to_kv(config: &ModelConfig) -> KvMap {
    let mut m = KvMap::new();
    let pos = match config {
        ModelConfig::Cnn(c) => {
            m.set("arch", "cnn");
            m.set("context", c.context_mode.name());
            let w: Vec<String> = c.window_sizes.iter().map(|w| w.to_string()).collect();
            m.set("windows", w.join(","));
            m.set("feature_maps", c.feature_maps);
            &c.position
        }
        ModelConfig::Rnn(c) => {
            m.set("arch", "rnn");
            m.set("variant", c.variant.name());
            m.set("hidden", c.hidden);
            m.set("cap", c.cap);
            m.set("truncation", opt_str(c.truncation));
            &c.position
        }
    };
    m.set("objective", config.objective().name());
    m.set("word_dim", config.word_dim());
    m.set("position", pos.variant.name());
    m.set("pos_dim", pos.pos_dim);
    m.set("position_clip", pos.clip);
    m
}

fn take_model(m: &mut KvMap) -> Result<ModelConfig> {
    let arch = m.take_str("arch")?;
    let objective = Objective::parse(&m.take_str("objective")?)?;
    let word_dim = m.take("word_dim")?;
    let position = PositionFeatureConfig {
        variant: PositionVariant::parse(&m.take_str("position")?)?,
        pos_dim: m.take("pos_dim")?,
        clip: m.take("position_clip")?,
    };
    let config = match arch.as_str() {
        "cnn" => {
            let windows = m.take_str("windows")?;
            let window_sizes = windows
                .split(',')
                .map(|w| w.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Config(format!("bad window list `{windows}`")))?;
            ModelConfig::Cnn(CnnConfig {
                context_mode: ContextMode::parse(&m.take_str("context")?)?,
                window_sizes,
                feature_maps: m.take("feature_maps")?,
                word_dim,
                position,
                objective,
            })
        }
        "rnn" => ModelConfig::Rnn(RnnConfig {
            variant: RnnVariant::parse(&m.take_str("variant")?)?,
            hidden: m.take("hidden")?,
            cap: m.take("cap")?,
            truncation: m.take_opt("truncation")?,
            word_dim,
            position,
            objective,
        }),
        other => return Err(Error::Config(format!("unknown architecture family `{other}`"))),
    };
    config.validate()?;
    Ok(config)
}

pub fn model_from_kv(map: &KvMap) -> Result<ModelConfig> {
    let mut m = map.clone();
    let c = take_model(&mut m)?;
    m.finish()?;
    Ok(c)
}

/// Keys of the training loop.
pub fn train_to_kv(t: &TrainConfig) -> KvMap {
    let mut m = KvMap::new();
    m.set("learning_rate", t.learning_rate);
    m.set("l2_weight", t.l2_weight);
    m.set("batch_size", t.batch_size);
    m.set("epochs", t.epochs);
    m.set("clip", opt_str(t.clip));
    m.set("seed", t.seed);
    m.set("schedule", t.schedule.name());
    m.set("gamma", t.ranking.gamma);
    m.set("m_plus", t.ranking.m_plus);
    m.set("m_minus", t.ranking.m_minus);
    m
}

fn take_train(m: &mut KvMap) -> Result<TrainConfig> {
    let t = TrainConfig {
        learning_rate: m.take("learning_rate")?,
        l2_weight: m.take("l2_weight")?,
        batch_size: m.take("batch_size")?,
        epochs: m.take("epochs")?,
        clip: m.take_opt("clip")?,
        seed: m.take("seed")?,
        schedule: Schedule::parse(&m.take_str("schedule")?)?,
        ranking: RankingLossConfig {
            gamma: m.take("gamma")?,
            m_plus: m.take("m_plus")?,
            m_minus: m.take("m_minus")?,
        },
    };
    t.validate()?;
    Ok(t)
}

pub fn train_from_kv(map: &KvMap) -> Result<TrainConfig> {
    let mut m = map.clone();
    let t = take_train(&mut m)?;
    m.finish()?;
    Ok(t)
}

/// Model plus training settings from one map; every key must be used.
pub fn run_from_kv(map: &KvMap) -> Result<(ModelConfig, TrainConfig)> {
    let mut m = map.clone();
    let model = take_model(&mut m)?;
    let train = take_train(&mut m)?;
    m.finish()?;
    Ok((model, train))
}

pub fn run_to_kv(model: &ModelConfig, train: &TrainConfig) -> KvMap {
    let mut m = model_to_kv(model);
    m.extend(&train_to_kv(train));
    m
}
