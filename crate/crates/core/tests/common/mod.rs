//! Checks shared by the integration tests and the acceptance report. Each
//! returns an [`Outcome`] instead of panicking so that the acceptance
//! target can print one line per criterion.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use relclass_core::checkpoint;
use relclass_core::cnn::CnnModel;
use relclass_core::corpus::synthetic::synthetic_corpus;
use relclass_core::corpus::{read_corpus, Direction, Family, LabeledSentence, RelationLabel};
use relclass_core::evaluation::{macro_f1, parse_key_file, read_gold, IdLabel};
use relclass_core::features::{columns_from_sources, PositionVariant};
use relclass_core::numerics::{conv_over_time, max_pool_over_time, FeatureColumns, GradCheckConfig, Tensor};
use relclass_core::presets::{gradcheck_instance, preset, preset_names};
use relclass_core::rnn::{RnnConfig, RnnModel, RnnVariant};
use relclass_core::training::{
    accuracy, predict_records, ranking_loss, train, EpochControl, RankingLossConfig, TrainConfig,
};
use relclass_core::{Model, ModelConfig, Objective, PositionFeatureConfig, Vocabulary};

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }

    pub fn assert(&self) {
        assert!(self.pass, "{}", self.detail);
    }
}

pub fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Splits an oracle file into cases; each case maps a line key to its
/// whitespace-separated fields.
fn cases(text: &str) -> Vec<HashMap<String, Vec<String>>> {
    let mut out: Vec<HashMap<String, Vec<String>>> = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let mut it = line.split_whitespace();
        let key = it.next().unwrap().to_string();
        let rest: Vec<String> = it.map(String::from).collect();
        if key == "case" {
            out.push(HashMap::new());
        }
        out.last_mut().expect("file starts with a case").insert(key, rest);
    }
    out
}

fn nums<T: std::str::FromStr>(case: &HashMap<String, Vec<String>>, key: &str) -> Vec<T>
where
    T::Err: std::fmt::Debug,
{
    case[key].iter().map(|s| s.parse().unwrap()).collect()
}

fn bits(xs: &[f64]) -> Vec<u64> {
    xs.iter().map(|x| x.to_bits()).collect()
}

// Criterion 1

pub const GRADCHECK_SEEDS: u64 = 20;
pub const GRADCHECK_SENTENCES: usize = 3;
pub const GRADCHECK_COORDS: usize = 24;
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

pub fn gradient_fidelity(seeds: u64) -> Outcome {
    let started = Instant::now();
    let mut worst = (0.0f64, String::new());
    let (mut checked, mut skipped, mut instances) = (0usize, 0usize, 0usize);
    let mut failures = Vec::new();
    for name in preset_names() {
        let (_, train_cfg) = preset(name).unwrap();
        for seed in 0..seeds {
            let (mut model, data) = gradcheck_instance(name, seed, GRADCHECK_SENTENCES).unwrap();
            let cfg = GradCheckConfig {
                tolerance: GRADCHECK_TOLERANCE,
                max_coords_per_tensor: Some(GRADCHECK_COORDS),
                seed,
                ..GradCheckConfig::default()
            };
            let report = model.check_gradients(&data, &train_cfg.ranking, &cfg).unwrap();
            instances += 1;
            for t in &report.tensors {
                checked += t.checked;
                skipped += t.skipped;
                if t.max_relative_error > worst.0 {
                    worst = (t.max_relative_error, format!("{name} seed {seed} {}", t.name));
                }
            }
            failures.extend(report.failures().map(|t| format!("{name}/{seed}/{}", t.name)));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let skip_share = skipped as f64 / (checked + skipped).max(1) as f64;
    let pass = failures.is_empty() && secs < 60.0 && skip_share < 0.05;
    Outcome::new(
        pass,
        format!(
            "{instances} instances ({} presets x {seeds} seeds), {checked} coords checked, \
             {skipped} skipped at kinks, max rel err {:.2e} ({}), tolerance {GRADCHECK_TOLERANCE:e}, \
             {secs:.1}s (limit 60s){}",
            instances as u64 / seeds.max(1),
            worst.0,
            worst.1,
            if failures.is_empty() { String::new() } else { format!(", FAILED: {}", failures.join(" ")) }
        ),
    )
}

// Criterion 2

pub fn conv_pool_oracle() -> Outcome {
    let all = cases(&read_data("conv_cases.txt"));
    let mut bad = Vec::new();
    for (i, c) in all.iter().enumerate() {
        let dims: Vec<usize> = nums(c, "dims");
        let (d, width, window, n) = (dims[0], dims[1], dims[2], dims[3]);
        let input = FeatureColumns::from_columns(d, nums(c, "input")).unwrap();
        assert_eq!(input.width(), width);
        let filters = Tensor::from_vec(&[n, window * d], nums(c, "filters")).unwrap();
        let bias: Vec<f64> = nums(c, "bias");
        let map = conv_over_time(&input, &filters, &bias, window).unwrap();
        let (maxima, argmax) = max_pool_over_time(&map).unwrap();
        if bits(map.data()) != bits(&nums::<f64>(c, "map")) {
            bad.push(format!("conv#{i}"));
        }
        if bits(&maxima) != bits(&nums::<f64>(c, "max")) || argmax != nums::<usize>(c, "argmax") {
            bad.push(format!("pool#{i}"));
        }
    }
    Outcome::new(
        bad.is_empty() && all.len() == 50,
        format!("{} conv and pool cases, mismatches: {:?}", all.len(), bad),
    )
}

pub fn ranking_oracle() -> Outcome {
    let all = cases(&read_data("ranking_cases.txt"));
    let cfg = RankingLossConfig::default();
    let mut bad = Vec::new();
    for (i, c) in all.iter().enumerate() {
        let head = &c["case"];
        let gold: usize = head[0].parse().unwrap();
        let competitor: usize = head[1].parse().unwrap();
        let loss: f64 = head[2].parse().unwrap();
        let out = ranking_loss(&nums::<f64>(c, "scores"), gold, &cfg).unwrap();
        if out.loss.to_bits() != loss.to_bits() || out.competitor != Some(competitor) {
            bad.push(i);
        }
    }
    Outcome::new(
        bad.is_empty() && all.len() == 50,
        format!("{} ranking-loss cases, mismatches: {bad:?}", all.len()),
    )
}

pub fn rnn_oracle() -> Outcome {
    let all = cases(&read_data("rnn_cases.txt"));
    let mut bad = Vec::new();
    for (i, c) in all.iter().enumerate() {
        let dims: Vec<usize> = nums(c, "dims");
        let (word_dim, hd, n, n_out) = (dims[0], dims[1], dims[2], dims[3]);
        let objective = if n_out == 19 { Objective::Softmax } else { Objective::Ranking };
        let cfg = RnnConfig {
            variant: RnnVariant::Connectionist,
            word_dim,
            position: PositionFeatureConfig {
                variant: PositionVariant::None,
                pos_dim: 0,
                clip: 30,
            },
            hidden: hd,
            objective,
            cap: 1.0,
            truncation: None,
        };
        let mut m = RnnModel::new(cfg, Vocabulary::reserved(false), None, 0).unwrap();
        let iw = 3 * word_dim;
        let t = |key: &str, r: usize, cols: usize| Tensor::from_vec(&[r, cols], nums(c, key)).unwrap();
        m.u_f = t("u_f", hd, iw);
        m.v = t("v", hd, hd);
        m.u_b = Some(t("u_b", hd, iw));
        m.b = Some(t("b", hd, hd));
        m.h = Some(t("h", hd, hd));
        m.w_out = t("w_out", n_out, hd);
        m.b_out = Tensor::from_vec(&[n_out], nums(c, "b_out")).unwrap();
        let flat: Vec<f64> = nums(c, "steps");
        let steps: Vec<Vec<f64>> = flat.chunks(iw).map(<[f64]>::to_vec).collect();
        assert_eq!(steps.len(), n);
        let (scores, cache) = m.forward_steps(steps).unwrap();
        if bits(&scores) != bits(&nums::<f64>(c, "scores")) || bits(cache.representation()) != bits(&nums::<f64>(c, "hc")) {
            bad.push(i);
        }
    }
    Outcome::new(
        bad.is_empty() && all.len() == 50,
        format!("{} unrolled connectionist RNN cases, mismatches: {bad:?}", all.len()),
    )
}

// Criterion 3

fn rnn_pair(seed: u64) -> (RnnModel, RnnModel) {
    let cfg = |variant| RnnConfig {
        variant,
        word_dim: 4,
        position: PositionFeatureConfig {
            variant: PositionVariant::None,
            pos_dim: 0,
            clip: 30,
        },
        hidden: 6,
        objective: Objective::Ranking,
        cap: 1.0,
        truncation: None,
    };
    let mut conn = RnnModel::new(cfg(RnnVariant::Connectionist), Vocabulary::reserved(false), None, seed).unwrap();
    conn.h.as_mut().unwrap().data_mut().fill(0.0);
    let mut bi = RnnModel::new(cfg(RnnVariant::Bi), Vocabulary::reserved(false), None, seed + 1).unwrap();
    bi.u_f = conn.u_f.clone();
    bi.v = conn.v.clone();
    bi.u_b = conn.u_b.clone();
    bi.b = conn.b.clone();
    bi.w_out = conn.w_out.clone();
    bi.b_out = conn.b_out.clone();
    (conn, bi)
}

pub fn connectionist_reduction() -> Outcome {
    let mut compared = 0;
    for seed in 0..10u64 {
        let (mut conn, mut bi) = rnn_pair(seed);
        // Weights large enough that the capped ReLU visits all three pieces.
        for m in [&mut conn.u_f, &mut conn.v] {
            m.data_mut().iter_mut().enumerate().for_each(|(i, x)| *x = ((i * 7 + seed as usize) % 11) as f64 / 5.0 - 1.0);
        }
        bi.u_f = conn.u_f.clone();
        bi.v = conn.v.clone();
        for n in 1..=8 {
            let steps: Vec<Vec<f64>> = (0..n)
                .map(|t| (0..12).map(|j| (((t * 13 + j * 5 + seed as usize) % 17) as f64 - 8.0) / 6.0).collect())
                .collect();
            let (a, ca) = conn.forward_steps(steps.clone()).unwrap();
            let (b, cb) = bi.forward_steps(steps).unwrap();
            if bits(&a) != bits(&b) || bits(ca.representation()) != bits(cb.representation()) {
                return Outcome::new(false, format!("H = 0 differs from bi at seed {seed}, n = {n}"));
            }
            compared += 1;
        }
    }
    Outcome::new(true, format!("H = 0 connectionist == bi on {compared} sequences (bitwise)"))
}

pub fn tied_stack_reduction() -> Outcome {
    let data = synthetic_corpus(20, 4);
    let (cfg, _) = preset("er-cnn").unwrap();
    let ModelConfig::Cnn(ext_cfg) = relclass_core::presets::toy(&cfg, 6, 5) else { unreachable!() };
    let mid_cfg = relclass_core::CnnConfig {
        context_mode: relclass_core::ContextMode::MiddleOnly,
        ..ext_cfg.clone()
    };
    let vocab = Vocabulary::build(&data, None::<Vec<&str>>, false);
    let mut ext = CnnModel::new(ext_cfg, vocab.clone(), None, 3).unwrap();
    ext.stacks[1] = ext.stacks[0].clone();
    let mut mid = CnnModel::new(mid_cfg, vocab, None, 9).unwrap();
    mid.stacks[0] = ext.stacks[0].clone();
    mid.tables = ext.tables.clone();
    let variant = mid.config().position.variant;
    for s in &data {
        let x = mid.prepare(s).unwrap();
        let cols = columns_from_sources(&mid.tables, &x.contexts[0], variant);
        let (_, single) = mid.forward_columns(vec![cols.clone()]).unwrap();
        let (_, double) = ext.forward_columns(vec![cols.clone(), cols]).unwrap();
        let mut twice = single.representation().to_vec();
        twice.extend_from_slice(single.representation());
        if bits(double.representation()) != bits(&twice) {
            return Outcome::new(false, format!("tied stacks differ on sentence {}", s.id));
        }
    }
    Outcome::new(true, format!("tied extended stacks == duplicated middle-only on {} sentences (bitwise)", data.len()))
}

// Criterion 4

/// The fixed 100-sentence subset: the first 100 sentences of the training
/// file under `RELCLASS_DATA_DIR` when present, else a seeded synthetic
/// corpus.
pub fn overfit_subset() -> (Vec<LabeledSentence>, String) {
    if let Some(dir) = std::env::var_os("RELCLASS_DATA_DIR") {
        let path = Path::new(&dir).join("TRAIN_FILE.TXT");
        if let Ok(mut s) = read_corpus(&path, true) {
            s.truncate(100);
            return (s, path.display().to_string());
        }
    }
    (synthetic_corpus(100, 2016), "synthetic corpus, seed 2016".into())
}

pub fn overfit(name: &str, max_epochs: usize) -> Outcome {
    let started = Instant::now();
    let (data, source) = overfit_subset();
    let (model_cfg, train_cfg) = preset(name).unwrap();
    let cfg = TrainConfig {
        epochs: max_epochs,
        ..train_cfg
    };
    let vocab = Vocabulary::build(&data, None::<Vec<&str>>, model_cfg.uses_indicators());
    let mut model = Model::new(&model_cfg, vocab, None, cfg.seed).unwrap();
    let mut reached = None;
    let mut last = 0.0;
    let history = train(&mut model, &data, &[], &cfg, |m, r| {
        last = accuracy(m, &data)?;
        if last >= 0.99 {
            reached = Some(r.epoch);
            return Ok(EpochControl::Stop);
        }
        Ok(EpochControl::Continue)
    })
    .unwrap();
    let secs = started.elapsed().as_secs_f64();
    let pass = reached.is_some() && secs < 300.0;
    Outcome::new(
        pass,
        format!(
            "{name}: training accuracy {:.1}% after {} epochs (limit {max_epochs}), {secs:.0}s (limit 300s), data: {source}",
            100.0 * last,
            history.len()
        ),
    )
}

// Criterion 5

fn ce(d: Direction) -> RelationLabel {
    RelationLabel::Directed(Family::CauseEffect, d)
}

pub fn crafted_case() -> Outcome {
    let ed = RelationLabel::Directed(Family::EntityDestination, Direction::Forward);
    let gold: Vec<IdLabel> = vec![(1, ce(Direction::Forward)), (2, ce(Direction::Forward)), (3, RelationLabel::Other), (4, ed)];
    let pred: Vec<IdLabel> = vec![(1, ce(Direction::Forward)), (2, RelationLabel::Other), (3, ce(Direction::Forward)), (4, ed)];
    let r = macro_f1(&gold, &pred).unwrap();
    Outcome::new(r.macro_f1 == 75.0, format!("crafted 4-sentence case = {} (expected 75 exactly)", r.macro_f1))
}

pub fn golden_files() -> Outcome {
    let gold = read_gold(&data_path("scorer_gold.key")).unwrap();
    let mut lines = Vec::new();
    let mut pass = gold.len() == 2717;
    for line in read_data("scorer_expected.txt").lines() {
        let (name, value) = line.split_once(' ').unwrap();
        let expected: f64 = value.parse().unwrap();
        let pred = parse_key_file(&read_data(&format!("scorer_pred_{name}.txt"))).unwrap();
        let got = macro_f1(&gold, &pred).unwrap().macro_f1;
        let ok = (got - expected).abs() <= 1e-9;
        pass &= ok;
        lines.push(format!("{name}: {got:.6} vs {expected:.6}"));
    }
    pass &= lines.len() == 3;
    Outcome::new(pass, format!("{} golden files over {} sentences (tol 1e-9): {}", lines.len(), gold.len(), lines.join(", ")))
}

pub fn direction_flip() -> Outcome {
    let gold: Vec<IdLabel> = (0..10).map(|i| (i, ce(if i % 2 == 0 { Direction::Forward } else { Direction::Reverse }))).collect();
    let flipped: Vec<IdLabel> = gold
        .iter()
        .map(|&(i, l)| (i, RelationLabel::Directed(Family::CauseEffect, match l.direction() {
            Some(Direction::Forward) => Direction::Reverse,
            _ => Direction::Forward,
        })))
        .collect();
    let r = macro_f1(&gold, &flipped).unwrap();
    let f1 = r.families[Family::CauseEffect.index()].f1;
    Outcome::new(f1 == 0.0, format!("direction-flipped Cause-Effect F1 = {f1}"))
}

// Criterion 8

pub fn determinism() -> Outcome {
    let data = synthetic_corpus(60, 8);
    let run = |name: &str| {
        let (cfg, train_cfg) = preset(name).unwrap();
        let cfg = relclass_core::presets::toy(&cfg, 10, 12);
        let vocab = Vocabulary::build(&data[..40], None::<Vec<&str>>, cfg.uses_indicators());
        let mut m = Model::new(&cfg, vocab, None, 7).unwrap();
        let tc = TrainConfig {
            epochs: 2,
            seed: 7,
            ..train_cfg
        };
        train(&mut m, &data[..40], &data[40..], &tc, |_, _| Ok(EpochControl::Continue)).unwrap();
        let preds = predict_records(&m, &data[40..], true).unwrap();
        (checkpoint::encode(&m), relclass_core::evaluation::format_predictions(&preds))
    };
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["er-cnn", "r-rnn"] {
        let (a, b) = (run(name), run(name));
        let same = a == b;
        pass &= same;
        details.push(format!("{name} checkpoint {} bytes {}", a.0.len(), if same { "identical" } else { "DIFFER" }));
    }
    Outcome::new(pass, format!("two seeded runs: {}; prediction files compared too", details.join(", ")))
}
