use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fakenews_core::classify::ClassifierSpec;
use fakenews_core::corpus::{ClassifierKind, ExperimentConfig, VectorizerKind};
use fakenews_core::harness::{self, synth_corpus, SynthConfig};
use fakenews_core::resample::knn_self;
use fakenews_core::sparse::FeatureMatrix;
use fakenews_core::vectorize::{fit_tfidf, transform_tfidf, NgramRange};
use fakenews_core::Label;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let seq = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let par = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", seq), ("parallel", par)]
}

fn fixture() -> (harness::PreparedCorpus, FeatureMatrix) {
    let data = synth_corpus(&SynthConfig {
        n_majority: 1200,
        n_minority: 120,
        ..SynthConfig::default()
    })
    .unwrap();
    let cfg = ExperimentConfig {
        vectorizer: VectorizerKind::Tfidf,
        ..ExperimentConfig::default()
    };
    let corpus = harness::prepare(&data, &cfg).unwrap();
    let train = harness::vectorized_split(&corpus, &cfg, &mut Vec::new()).unwrap().train;
    (corpus, train)
}

fn bench(c: &mut Criterion) {
    let (corpus, train) = fixture();
    let vocab = fit_tfidf(&corpus.docs, NgramRange::UNI_BI);
    let minority = train.x.select(&train.rows_of(Label::Fake));
    let forest = ClassifierSpec::from_config(
        ClassifierKind::Rfc,
        &ExperimentConfig {
            rf_estimators: 32,
            ..ExperimentConfig::default()
        },
    );

    let mut g = c.benchmark_group("parallel_vs_sequential");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("knn_self", name), &minority, |b, m| {
            b.iter(|| pool.install(|| knn_self(m, 5).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("transform_tfidf", name), &corpus.docs, |b, docs| {
            b.iter(|| pool.install(|| transform_tfidf(docs, &vocab).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("forest_train", name), &train, |b, t| {
            b.iter(|| pool.install(|| forest.train(t, None, 1).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
