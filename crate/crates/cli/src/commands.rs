use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};

use relclass_core::checkpoint::{self, write_atomic};
use relclass_core::config::{run_from_kv, run_to_kv, KvMap};
use relclass_core::corpus::synthetic::synthetic_semeval_text;
use relclass_core::corpus::{read_corpus, split_train_dev, write_cache, LabeledSentence};
use relclass_core::evaluation::{
    ensemble_vote, macro_f1, read_gold, read_predictions, significance_z_test, write_predictions,
    IdLabel, PredictionRecord,
};
use relclass_core::features::PretrainedEmbeddings;
use relclass_core::numerics::GradCheckConfig;
use relclass_core::presets::{gradcheck_instance, preset, preset_names, ARCH_ALIASES};
use relclass_core::training::{self, accuracy, predict_records, EpochControl, EpochRecord};
use relclass_core::{Model, ModelConfig, TrainConfig, Vocabulary};

use crate::args::*;
use crate::exit::{GradcheckFailed, Usage};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Preset, then settings file, then `--set`, then dedicated flags.
fn resolve_config(a: &TrainArgs) -> Result<(ModelConfig, TrainConfig)> {
    let (model, train) = preset(&a.preset)?;
    let mut kv = run_to_kv(&model, &train);
    if let Some(p) = &a.config {
        let file = KvMap::parse(&read_text(p)?).with_context(|| format!("in {}", p.display()))?;
        kv.extend(&file);
    }
    for o in &a.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got `{o}`")))?;
        kv.set(k.trim(), v.trim());
    }
    if let Some(v) = a.seed {
        kv.set("seed", v);
    }
    if let Some(v) = a.epochs {
        kv.set("epochs", v);
    }
    if let Some(v) = a.learning_rate {
        kv.set("learning_rate", v);
    }
    if let Some(v) = a.batch_size {
        kv.set("batch_size", v);
    }
    Ok(run_from_kv(&kv)?)
}

fn train_path(a: &TrainArgs) -> Result<PathBuf> {
    if let Some(p) = &a.train {
        return Ok(p.clone());
    }
    std::env::var_os(DATA_DIR_ENV)
        .map(|d| PathBuf::from(d).join(DEFAULT_TRAIN_FILE))
        .ok_or_else(|| usage(format!("no training corpus: pass --train or set {DATA_DIR_ENV}")))
}

fn corpus_tokens<'a>(sets: impl IntoIterator<Item = &'a [LabeledSentence]>) -> HashSet<String> {
    sets.into_iter()
        .flatten()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect()
}

struct RunInfo {
    train_file: PathBuf,
    dev_file: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    train_sentences: usize,
    dev_sentences: usize,
    vocabulary: usize,
}

fn manifest(model: &ModelConfig, train: &TrainConfig, info: &RunInfo, history: &[EpochRecord]) -> String {
    let mut out = String::from("# relclass training manifest\n");
    out.push_str(&run_to_kv(model, train).format());
    let path = |p: &Option<PathBuf>, none: &str| {
        p.as_ref().map_or(none.to_string(), |p| p.display().to_string())
    };
    let _ = writeln!(out, "train_file = {}", info.train_file.display());
    let _ = writeln!(out, "dev_file = {}", path(&info.dev_file, "split"));
    let _ = writeln!(out, "embeddings = {}", path(&info.embeddings, "none"));
    let _ = writeln!(out, "train_sentences = {}", info.train_sentences);
    let _ = writeln!(out, "dev_sentences = {}", info.dev_sentences);
    let _ = writeln!(out, "vocabulary = {}", info.vocabulary);
    for r in history {
        let e = r.epoch;
        let _ = writeln!(out, "epoch.{e}.learning_rate = {}", r.learning_rate);
        let _ = writeln!(out, "epoch.{e}.train_loss = {}", r.train_loss);
        if let Some(f) = r.dev_f1 {
            let _ = writeln!(out, "epoch.{e}.dev_f1 = {f}");
        }
    }
    let _ = writeln!(out, "epochs_run = {}", history.len());
    if let Some(f) = history.last().and_then(|r| r.dev_f1) {
        let _ = writeln!(out, "final_dev_f1 = {f}");
    }
    out
}

pub fn train(a: TrainArgs) -> Result<()> {
    let started = Instant::now();
    let (model_cfg, train_cfg) = resolve_config(&a)?;
    let train_file = train_path(&a)?;
    let mut corpus = read_corpus(&train_file, true)?;
    if let Some(n) = a.limit {
        corpus.truncate(n);
    }
    let (train_set, dev_set) = match &a.dev {
        Some(p) => (corpus, read_corpus(p, true)?),
        None if a.dev_size == 0 => (corpus, Vec::new()),
        None => split_train_dev(&corpus, a.dev_size, train_cfg.seed)?,
    };

    let pretrained = match &a.emb {
        None => None,
        Some(p) => {
            let extra = a
                .extra_vocab
                .iter()
                .map(|f| read_corpus(f, false))
                .collect::<relclass_core::Result<Vec<_>>>()?;
            let wanted = corpus_tokens(
                [train_set.as_slice(), dev_set.as_slice()]
                    .into_iter()
                    .chain(extra.iter().map(Vec::as_slice)),
            );
            Some(PretrainedEmbeddings::load(p, Some(&|t: &str| wanted.contains(t)))?)
        }
    };
    let vocab = Vocabulary::build(
        &train_set,
        pretrained.as_ref().map(|p| p.tokens()),
        model_cfg.uses_indicators(),
    );
    let mut model = Model::new(&model_cfg, vocab, pretrained.as_ref(), train_cfg.seed)?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let config_text = run_to_kv(&model_cfg, &train_cfg).format();
    write_atomic(&a.out.join("config.txt"), config_text.as_bytes())?;
    write_atomic(&a.out.join("dev.tsv"), write_cache(&dev_set).as_bytes())?;
    let log_path = a.out.join("train.log");
    let mut log = File::create(&log_path).with_context(|| format!("creating {}", log_path.display()))?;

    let info = RunInfo {
        train_file,
        dev_file: a.dev.clone(),
        embeddings: a.emb.clone(),
        train_sentences: train_set.len(),
        dev_sentences: dev_set.len(),
        vocabulary: model.vocab().len(),
    };
    let ckpt = a.out.join("model.ckpt");
    let manifest_path = a.out.join("manifest.txt");
    let mut history: Vec<EpochRecord> = Vec::new();
    writeln!(
        log,
        "training {} on {} sentences, dev {}, vocabulary {}",
        model_cfg.family(),
        info.train_sentences,
        info.dev_sentences,
        info.vocabulary
    )?;
    training::train(&mut model, &train_set, &dev_set, &train_cfg, |m, r| {
        checkpoint::save(m, &ckpt)?;
        history.push(r.clone());
        write_atomic(&manifest_path, manifest(&model_cfg, &train_cfg, &info, &history).as_bytes())?;
        let dev = r.dev_f1.map_or("-".to_string(), |f| format!("{f:.2}"));
        let line = format!(
            "epoch {:>3}  lr {:.3e}  loss {:.5}  dev macro-F1 {dev}  {:.1}s",
            r.epoch, r.learning_rate, r.train_loss, r.seconds
        );
        writeln!(log, "{line}").map_err(|e| relclass_core::Error::Invalid(e.to_string()))?;
        if !a.quiet {
            eprintln!("{line}");
        }
        if let Some(target) = a.stop_at_train_accuracy {
            let acc = accuracy(m, &train_set)?;
            if acc >= target {
                if !a.quiet {
                    eprintln!("training accuracy {acc:.4} reached the target");
                }
                return Ok(EpochControl::Stop);
            }
        }
        Ok(EpochControl::Continue)
    })?;
    writeln!(log, "wall time {:.1}s", started.elapsed().as_secs_f64())?;
    if !a.quiet {
        eprintln!("wrote {}", a.out.display());
    }
    Ok(())
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let model = checkpoint::load(&a.model)?;
    let sentences = read_corpus(&a.input, false)?;
    let records = predict_records(&model, &sentences, a.scores)?;
    write_predictions(&a.out, &records)?;
    Ok(())
}

fn pairs(path: &Path) -> Result<Vec<IdLabel>> {
    Ok(read_predictions(path)?.iter().map(PredictionRecord::pair).collect())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    if a.predictions.is_empty() && a.compare.is_none() {
        return Err(usage("nothing to score: give prediction files or --compare A B"));
    }
    let gold = read_gold(&a.gold)?;
    for p in &a.predictions {
        let report = macro_f1(&gold, &pairs(p)?).with_context(|| format!("scoring {}", p.display()))?;
        println!("== {} ==", p.display());
        print!("{report}");
        print!("{}", report.key_values());
    }
    let compare = match (&a.compare, a.predictions.as_slice()) {
        (Some(c), _) => Some((&c[0], &c[1])),
        (None, [x, y]) => Some((x, y)),
        _ => None,
    };
    if let Some((x, y)) = compare {
        let z = significance_z_test(&pairs(x)?, &pairs(y)?, &gold)?;
        println!("== z-test {} vs {} ==", x.display(), y.display());
        println!("sentences = {}", z.n);
        println!("accuracy_a = {}", z.accuracy_a);
        println!("accuracy_b = {}", z.accuracy_b);
        println!("z = {}", z.z);
        println!("p_value = {}", z.p_value);
        println!("significant_at_0.05 = {}", z.p_value < 0.05);
    }
    Ok(())
}

pub fn ensemble(a: EnsembleArgs) -> Result<()> {
    let mut sets = a.predictions.iter().map(|p| pairs(p)).collect::<Result<Vec<_>>>()?;
    if let Some(input) = &a.input {
        let sentences = read_corpus(input, false)?;
        for m in &a.models {
            let model = checkpoint::load(m)?;
            let recs = predict_records(&model, &sentences, false)?;
            sets.push(recs.iter().map(PredictionRecord::pair).collect());
        }
    }
    if sets.is_empty() {
        return Err(usage("nothing to combine: give prediction files or --model with --input"));
    }
    let voted = ensemble_vote(&sets, a.seed)?;
    let records: Vec<PredictionRecord> = voted
        .into_iter()
        .map(|(id, label)| PredictionRecord::new(id, label))
        .collect();
    write_predictions(&a.out, &records)?;
    Ok(())
}

pub fn gradcheck(a: GradcheckArgs) -> Result<()> {
    let names: Vec<String> = if a.arch == "all" {
        preset_names().map(String::from).collect()
    } else {
        vec![a.arch.clone()]
    };
    let config = GradCheckConfig {
        epsilon: a.epsilon,
        tolerance: a.tolerance,
        max_coords_per_tensor: a.coords,
        seed: a.seed,
    };
    let mut failed = Vec::new();
    for name in &names {
        let (_, train_cfg) = preset(name)?;
        let (mut model, data) = gradcheck_instance(name, a.seed, a.sentences)?;
        let report = model.check_gradients(&data, &train_cfg.ranking, &config)?;
        println!("== {name} ==");
        println!("{report}");
        failed.extend(report.failures().map(|t| format!("{name}:{}", t.name)));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(GradcheckFailed(failed).into())
    }
}

pub fn synth(a: SynthArgs) -> Result<()> {
    write_atomic(&a.out, synthetic_semeval_text(a.sentences, a.seed).as_bytes())?;
    Ok(())
}

pub fn presets(a: PresetsArgs) -> Result<()> {
    match a.name {
        Some(name) => {
            let (m, t) = preset(&name)?;
            print!("{}", run_to_kv(&m, &t).format());
        }
        None => {
            for n in preset_names() {
                println!("{n}");
            }
            println!();
            for (alias, target, about) in ARCH_ALIASES {
                println!("{alias:<18} = {target:<12} {about}");
            }
        }
    }
    Ok(())
}
