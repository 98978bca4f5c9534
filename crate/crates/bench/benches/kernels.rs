use criterion::{black_box, criterion_group, criterion_main, Criterion};

use relclass_core::corpus::synthetic::synthetic_corpus;
use relclass_core::numerics::{conv_over_time, max_pool_over_time, FeatureColumns, Tensor};
use relclass_core::presets::preset;
use relclass_core::{Model, RelationLabel, TrainConfig, Vocabulary};

fn ramp(len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|i| ((i * 37 % 101) as f64 / 101.0 - 0.5) * scale).collect()
}

fn conv(c: &mut Criterion) {
    // Column height of the widest CNN row: 400 word dims plus two 35-dim
    // distance embeddings; 300 filters; a 20-token context.
    let height = 470;
    let input = FeatureColumns::from_columns(height, ramp(height * 20, 1.0)).unwrap();
    for window in [3, 5] {
        let filters = Tensor::from_vec(&[300, window * height], ramp(300 * window * height, 0.2)).unwrap();
        let bias = vec![0.01; 300];
        c.bench_function(&format!("conv_over_time w{window} 300x470x20"), |b| {
            b.iter(|| {
                let map = conv_over_time(black_box(&input), &filters, &bias, window).unwrap();
                max_pool_over_time(&map).unwrap()
            })
        });
    }
}

fn full_model(name: &str) -> (Model, Vec<relclass_core::LabeledSentence>) {
    let data = synthetic_corpus(16, 5);
    let (cfg, _) = preset(name).unwrap();
    let vocab = Vocabulary::build(&data, None::<Vec<&str>>, cfg.uses_indicators());
    (Model::new(&cfg, vocab, None, 1).unwrap(), data)
}

fn models(c: &mut Criterion) {
    let ranking = TrainConfig::cnn_default().ranking;
    for name in ["er-cnn", "r-rnn"] {
        let (model, data) = full_model(name);
        let prepared: Vec<_> = data.iter().map(|s| model.prepare(s).unwrap()).collect();
        c.bench_function(&format!("{name} forward x16"), |b| {
            b.iter(|| {
                for x in &prepared {
                    black_box(model.scores(x).unwrap());
                }
            })
        });
        c.bench_function(&format!("{name} forward+backward x16"), |b| {
            b.iter(|| {
                for (x, s) in prepared.iter().zip(&data) {
                    black_box(model.example_gradients(x, s.label, &ranking).unwrap());
                }
            })
        });
    }
    let (model, data) = full_model("er-cnn");
    c.bench_function("er-cnn predict one sentence", |b| {
        b.iter(|| -> RelationLabel { model.predict_sentence(black_box(&data[0])).unwrap() })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = conv, models
}
criterion_main!(benches);
