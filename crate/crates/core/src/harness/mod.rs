//! End-to-end experiment runs, method sweeps and their reports.
//!
//! One run is load → preprocess → split → vectorize (fit on train only) →
//! resample → train → evaluate. Sweeps share the preprocessed corpus, the
//! vectorized splits and the resampled training sets between runs, then fan
//! the model fits out in parallel; results are always reported in config order.

mod report;
mod synth;

pub use report::{summary_csv, timings_json, to_csv, to_json, to_table, Format};
pub use synth::{synth_corpus, write_corpus, SynthConfig};

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classify::{balanced_class_weights, ClassWeights, ClassifierSpec, Predictor};
use crate::corpus::{
    load_corpus, split_indices, ClassifierKind, ExperimentConfig, LabeledDataset, Method, Schema, VectorizerKind,
};
use crate::evaluate::{evaluate, MetricsReport};
use crate::label::{class_counts, minority_label, Label};
use crate::resample::{resample, ResampleMethod, ResamplePlan};
use crate::seed::{self, streams};
use crate::sparse::FeatureMatrix;
use crate::stack::{train_stack, train_stack_multi, StackSpec};
use crate::text::{StopwordSet, SuffixStemmer, TextPipeline, TokenizedDoc};
use crate::vectorize::{fit_count, fit_tfidf, transform_count, transform_tfidf, NgramRange};
use crate::{par, Error, Result};

/// Wall-clock seconds of one pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.push(StageTiming {
        stage: stage.to_string(),
        seconds: start.elapsed().as_secs_f64(),
    });
    out
}

/// Corpus after text preprocessing, ready to be split.
pub struct PreparedCorpus {
    pub labels: Vec<Label>,
    pub docs: Vec<TokenizedDoc>,
    pub rejected_rows: usize,
    pub empty_documents: usize,
    pub timings: Vec<StageTiming>,
}

/// Stopword list and stemmer rules named by the config, or the bundled ones.
pub fn text_pipeline(cfg: &ExperimentConfig) -> Result<TextPipeline> {
    let stopwords = match &cfg.stopwords {
        Some(p) => StopwordSet::load(p)?,
        None => StopwordSet::bangla(),
    };
    let stemmer = match &cfg.stemmer_rules {
        Some(p) => SuffixStemmer::load(p)?,
        None => SuffixStemmer::bangla(),
    };
    Ok(TextPipeline {
        stopwords,
        stemmer: Box::new(stemmer),
    })
}

pub fn prepare(dataset: &LabeledDataset, cfg: &ExperimentConfig) -> Result<PreparedCorpus> {
    let mut timings = Vec::new();
    let pipeline = text_pipeline(cfg).map_err(|e| e.in_stage("preprocess"))?;
    let docs = timed(&mut timings, "preprocess", || pipeline.process_all(dataset.records()));
    let empty_documents = docs.iter().filter(|d| d.tokens.is_empty()).count();
    if empty_documents > 0 {
        log::warn!("{empty_documents} documents have no tokens after preprocessing");
    }
    Ok(PreparedCorpus {
        labels: docs.iter().map(|d| d.label).collect(),
        docs,
        rejected_rows: dataset.rejected.len(),
        empty_documents,
        timings,
    })
}

pub fn load_and_prepare(path: impl AsRef<Path>, schema: &Schema, cfg: &ExperimentConfig) -> Result<PreparedCorpus> {
    let start = Instant::now();
    let dataset = load_corpus(path, schema).map_err(|e| e.in_stage("load"))?;
    let load_time = start.elapsed().as_secs_f64();
    if !dataset.has_both_classes() {
        return Err(Error::SingleClass.in_stage("load"));
    }
    let mut prepared = prepare(&dataset, cfg)?;
    prepared.timings.insert(
        0,
        StageTiming {
            stage: "load".into(),
            seconds: load_time,
        },
    );
    Ok(prepared)
}

/// Vectorized train/test split plus the evaluation positive class.
#[derive(Debug, Clone)]
pub struct VectorizedSplit {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    pub vocab_size: usize,
    /// Minority class of the training split before any resampling.
    pub positive: Label,
}

fn ngram_range(cfg: &ExperimentConfig) -> Result<NgramRange> {
    let range = NgramRange::new(cfg.ngram_lo, cfg.ngram_hi)?;
    Ok(match cfg.vectorizer {
        VectorizerKind::Count if !cfg.count_ngrams => NgramRange::UNIGRAMS,
        _ => range,
    })
}

pub fn vectorized_split(corpus: &PreparedCorpus, cfg: &ExperimentConfig, timings: &mut Vec<StageTiming>) -> Result<VectorizedSplit> {
    let (train_idx, test_idx) = timed(timings, "split", || {
        split_indices(&corpus.labels, cfg.train_fraction(), cfg.seed, cfg.stratified)
    })
    .map_err(|e| e.in_stage("split"))?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| corpus.docs[i].clone()).collect::<Vec<_>>();
    let (train_docs, test_docs) = (pick(&train_idx), pick(&test_idx));
    let range = ngram_range(cfg).map_err(|e| e.in_stage("vectorize"))?;
    let (train, test, vocab_size) = timed(timings, "vectorize", || -> Result<_> {
        let vocab = match cfg.vectorizer {
            VectorizerKind::Count => fit_count(&train_docs, range),
            VectorizerKind::Tfidf => fit_tfidf(&train_docs, range),
        };
        let fitted = vocab.len();
        let transform = |docs: &[TokenizedDoc]| match cfg.vectorizer {
            VectorizerKind::Count => Ok(transform_count(docs, &vocab)),
            VectorizerKind::Tfidf => transform_tfidf(docs, &vocab),
        };
        let train = transform(&train_docs)?;
        let test = transform(&test_docs)?;
        if vocab.len() != fitted || test.n_cols() != fitted {
            return Err(Error::Config(format!(
                "vocabulary changed from {fitted} to {} terms while transforming the test split",
                vocab.len()
            )));
        }
        Ok((train, test, fitted))
    })
    .map_err(|e| e.in_stage("vectorize"))?;
    let positive = minority_label(class_counts(&train.labels));
    Ok(VectorizedSplit {
        train,
        test,
        vocab_size,
        positive,
    })
}

pub fn resample_method(method: Method) -> Option<ResampleMethod> {
    match method {
        Method::RandomOver => Some(ResampleMethod::RandomOver),
        Method::Smote => Some(ResampleMethod::Smote),
        Method::Adasyn => Some(ResampleMethod::Adasyn),
        Method::RandomUnder => Some(ResampleMethod::RandomUnder),
        Method::NearMiss => Some(ResampleMethod::NearMiss),
        Method::Baseline | Method::ClassWeight | Method::Stacking => None,
    }
}

/// Whether the test split is resampled as well under `cfg`.
pub fn resamples_test(cfg: &ExperimentConfig) -> bool {
    (cfg.method.is_oversampler() && cfg.oversample_test) || (cfg.method.is_undersampler() && cfg.undersample_test)
}

/// Training and test data after the imbalance treatment.
#[derive(Debug, Clone)]
pub struct Balanced {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    pub weights: Option<ClassWeights>,
    pub test_resampled: bool,
    pub warnings: Vec<String>,
}

pub fn balance(split: &VectorizedSplit, cfg: &ExperimentConfig, timings: &mut Vec<StageTiming>) -> Result<Balanced> {
    let mut out = Balanced {
        train: split.train.clone(),
        test: split.test.clone(),
        weights: None,
        test_resampled: false,
        warnings: Vec::new(),
    };
    if let Some(method) = resample_method(cfg.method) {
        let plan = |index| ResamplePlan {
            method,
            k_neighbors: cfg.k_neighbors,
            nearmiss_version: cfg.nearmiss_version,
            nearmiss_ver3_neighbors: cfg.nearmiss_ver3_neighbors,
            beta: cfg.adasyn_beta,
            seed: seed::derive(cfg.seed, streams::RESAMPLE, index),
        };
        timed(timings, "resample", || -> Result<()> {
            let r = resample(&split.train, &plan(0))?;
            out.train = r.data;
            out.warnings.extend(r.warnings);
            if resamples_test(cfg) {
                let r = resample(&split.test, &plan(1))?;
                out.test = r.data;
                out.warnings.extend(r.warnings.into_iter().map(|w| format!("test split: {w}")));
                out.test_resampled = true;
            }
            Ok(())
        })
        .map_err(|e| e.in_stage("resample"))?;
    }
    if cfg.method == Method::ClassWeight {
        out.weights = Some(balanced_class_weights(&out.train.labels));
    }
    Ok(out)
}

/// Outcome of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub metrics: MetricsReport,
    /// Class counts `[authentic, fake]` actually used for training / testing.
    pub train_counts: [usize; 2],
    pub test_counts: [usize; 2],
    pub vocab_size: usize,
    pub test_resampled: bool,
    pub warnings: Vec<String>,
    /// Kept out of the machine-readable reports so they stay reproducible.
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}

fn check_svm_cap(cfg: &ExperimentConfig, rows: usize) -> Result<()> {
    if cfg.method != Method::Stacking && cfg.classifier == ClassifierKind::Svm && rows > cfg.svm_row_cap {
        return Err(Error::RowCap {
            rows,
            cap: cfg.svm_row_cap,
        });
    }
    Ok(())
}

fn fit_and_evaluate(
    split: &VectorizedSplit,
    bal: &Balanced,
    cfg: &ExperimentConfig,
    timings: &mut Vec<StageTiming>,
) -> Result<RunResult> {
    check_svm_cap(cfg, bal.train.n_rows()).map_err(|e| e.in_stage("train"))?;
    let mut warnings = bal.warnings.clone();
    let predictor: Box<dyn Predictor> = timed(timings, "train", || -> Result<Box<dyn Predictor>> {
        if cfg.method == Method::Stacking {
            let spec = StackSpec::from_config(cfg)?;
            let model = train_stack(&spec, &bal.train, bal.weights.as_ref())?;
            warnings.extend(model.base.iter().flat_map(|m| m.warnings()));
            warnings.extend(model.meta.warnings());
            Ok(Box::new(model))
        } else {
            let spec = ClassifierSpec::from_config(cfg.classifier, cfg);
            let model = spec.train(&bal.train, bal.weights.as_ref(), seed::derive(cfg.seed, streams::MODEL, 0))?;
            warnings.extend(model.warnings());
            Ok(Box::new(model))
        }
    })
    .map_err(|e| e.in_stage("train"))?;
    let metrics = timed(timings, "evaluate", || -> Result<MetricsReport> {
        let pred = predictor.predict(&bal.test.x)?;
        evaluate(&bal.test.labels, &pred, split.positive)
    })
    .map_err(|e| e.in_stage("evaluate"))?;
    Ok(RunResult {
        config: cfg.clone(),
        metrics,
        train_counts: bal.train.class_counts(),
        test_counts: bal.test.class_counts(),
        vocab_size: split.vocab_size,
        test_resampled: bal.test_resampled,
        warnings,
        timings: std::mem::take(timings),
    })
}

/// Runs one configuration on an already preprocessed corpus.
pub fn run_prepared(cfg: &ExperimentConfig, corpus: &PreparedCorpus) -> Result<RunResult> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let mut timings = corpus.timings.clone();
    let split = vectorized_split(corpus, cfg, &mut timings)?;
    let bal = balance(&split, cfg, &mut timings)?;
    fit_and_evaluate(&split, &bal, cfg, &mut timings)
}

pub fn run_on_dataset(cfg: &ExperimentConfig, dataset: &LabeledDataset) -> Result<RunResult> {
    run_prepared(cfg, &prepare(dataset, cfg)?)
}

/// Full pipeline from a corpus file.
pub fn run_experiment(cfg: &ExperimentConfig, corpus_path: impl AsRef<Path>, schema: &Schema) -> Result<RunResult> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    run_prepared(cfg, &load_and_prepare(corpus_path, schema, cfg)?)
}

/// Grid of configurations for [`run_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub methods: Vec<Method>,
    pub vectorizers: Vec<VectorizerKind>,
    pub classifiers: Vec<ClassifierKind>,
    /// Run oversamplers both with the test split left alone ("(N)") and oversampled.
    pub both_test_variants: bool,
}

impl SweepPlan {
    /// Every method except stacking, both vectorizers, all six classifiers.
    pub fn full() -> Self {
        SweepPlan {
            methods: Method::ALL.iter().copied().filter(|&m| m != Method::Stacking).collect(),
            vectorizers: VectorizerKind::ALL.to_vec(),
            classifiers: ClassifierKind::REPORT_ORDER.to_vec(),
            both_test_variants: true,
        }
    }

    /// Configurations in report order: method (the "(N)" variant first),
    /// then vectorizer, then classifier. For stacking the classifier is the meta model.
    pub fn configs(&self, base: &ExperimentConfig) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &method in &self.methods {
            let variants: Vec<bool> = if method.is_oversampler() && self.both_test_variants {
                vec![false, true]
            } else {
                vec![base.oversample_test]
            };
            for oversample_test in variants {
                for &vectorizer in &self.vectorizers {
                    for &classifier in &self.classifiers {
                        let mut c = base.clone();
                        c.method = method;
                        c.vectorizer = vectorizer;
                        c.classifier = classifier;
                        c.oversample_test = oversample_test;
                        if method == Method::Stacking {
                            c.stack_meta = classifier;
                        }
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}

/// Row label in the style "SMOTE (N)".
pub fn method_label(cfg: &ExperimentConfig) -> String {
    let name = match cfg.method {
        Method::Baseline => "Baseline",
        Method::RandomOver => "Random Oversampling",
        Method::Smote => "SMOTE",
        Method::Adasyn => "ADASYN",
        Method::RandomUnder => "Random Undersampling",
        Method::NearMiss => "Near-Miss",
        Method::ClassWeight => "Modifying Class-Weight",
        Method::Stacking => "Model Stacking",
    };
    if cfg.method.is_oversampler() && !cfg.oversample_test {
        format!("{name} (N)")
    } else {
        name.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub label: String,
    pub config: ExperimentConfig,
    pub status: RunStatus,
    pub reason: Option<String>,
    pub result: Option<RunResult>,
}

impl SweepEntry {
    fn from_outcome(cfg: &ExperimentConfig, outcome: Result<RunResult>) -> Self {
        let (status, reason, result) = match outcome {
            Ok(r) => (RunStatus::Ok, None, Some(r)),
            Err(e) => {
                let skipped = matches!(&e, Error::Stage { source, .. } if matches!(**source, Error::RowCap { .. }));
                if skipped {
                    log::warn!("skipping {} {} {}: {e}", method_label(cfg), cfg.vectorizer, cfg.classifier.upper());
                    (RunStatus::Skipped, Some(e.to_string()), None)
                } else {
                    log::error!("run {} {} {} failed: {e}", method_label(cfg), cfg.vectorizer, cfg.classifier.upper());
                    (RunStatus::Failed, Some(e.to_string()), None)
                }
            }
        };
        SweepEntry {
            label: method_label(cfg),
            config: cfg.clone(),
            status,
            reason,
            result,
        }
    }

    pub fn f1(&self) -> Option<f64> {
        self.result.as_ref().map(|r| r.metrics.f1)
    }
}

/// Best classifier per (method row, vectorizer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub vectorizer: VectorizerKind,
    /// Winner first, followed by any classifier with exactly the same F1.
    pub classifiers: Vec<ClassifierKind>,
    pub f1: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub summary: Vec<SummaryRow>,
}

impl SweepReport {
    pub fn from_entries(entries: Vec<SweepEntry>) -> Self {
        let mut groups: Vec<((String, VectorizerKind), Vec<&SweepEntry>)> = Vec::new();
        for e in &entries {
            let key = (e.label.clone(), e.config.vectorizer);
            match groups.iter_mut().find(|g| g.0 == key) {
                Some(g) => g.1.push(e),
                None => groups.push((key, vec![e])),
            }
        }
        let summary = groups
            .into_iter()
            .filter_map(|((label, vectorizer), members)| {
                let mut best: Option<&SweepEntry> = None;
                for &m in &members {
                    if let Some(f) = m.f1() {
                        if best.is_none_or(|b| f > b.f1().unwrap_or(f64::NEG_INFINITY)) {
                            best = Some(m);
                        }
                    }
                }
                let best = best?;
                let f1 = best.f1()?;
                let mut classifiers = vec![best.config.classifier];
                classifiers.extend(
                    members
                        .iter()
                        .filter(|m| !std::ptr::eq(**m, best) && m.f1() == Some(f1))
                        .map(|m| m.config.classifier),
                );
                Some(SummaryRow {
                    label,
                    vectorizer,
                    classifiers,
                    f1,
                })
            })
            .collect();
        SweepReport { entries, summary }
    }

    pub fn best(&self) -> Option<&SweepEntry> {
        let mut best: Option<&SweepEntry> = None;
        for e in &self.entries {
            if let Some(f) = e.f1() {
                if best.is_none_or(|b| f > b.f1().unwrap_or(f64::NEG_INFINITY)) {
                    best = Some(e);
                }
            }
        }
        best
    }
}

fn split_key(cfg: &ExperimentConfig) -> String {
    format!(
        "{}|{}|{}|{}|{}-{}|{}",
        cfg.train_fraction().to_bits(),
        cfg.stratified,
        cfg.seed,
        cfg.vectorizer,
        cfg.ngram_lo,
        cfg.ngram_hi,
        cfg.count_ngrams
    )
}

fn balance_key(cfg: &ExperimentConfig) -> String {
    format!(
        "{}|{}|{}|{}|{}|{}|{}|{}",
        split_key(cfg),
        cfg.method,
        resamples_test(cfg),
        cfg.k_neighbors,
        cfg.nearmiss_version,
        cfg.nearmiss_ver3_neighbors,
        cfg.adasyn_beta.to_bits(),
        cfg.method == Method::ClassWeight
    )
}

/// Runs every configuration of `plan` on `corpus`. Failures are recorded
/// per entry; SVM runs above the row cap are reported as skipped.
pub fn run_sweep(base: &ExperimentConfig, plan: &SweepPlan, corpus: &PreparedCorpus) -> Result<SweepReport> {
    let configs = plan.configs(base);
    for c in &configs {
        c.validate().map_err(|e| e.in_stage("config"))?;
    }
    let mut split_keys: BTreeMap<String, usize> = BTreeMap::new();
    let mut split_cfgs = Vec::new();
    for c in &configs {
        split_keys.entry(split_key(c)).or_insert_with(|| {
            split_cfgs.push(c.clone());
            split_cfgs.len() - 1
        });
    }
    let splits = par::map_slice(&split_cfgs, |c| {
        let mut t = Vec::new();
        vectorized_split(corpus, c, &mut t).map(|s| (s, t))
    });

    let mut balance_keys: BTreeMap<String, usize> = BTreeMap::new();
    let mut balance_cfgs = Vec::new();
    for c in &configs {
        balance_keys.entry(balance_key(c)).or_insert_with(|| {
            balance_cfgs.push(c.clone());
            balance_cfgs.len() - 1
        });
    }
    let balanced = par::map_slice(&balance_cfgs, |c| match &splits[split_keys[&split_key(c)]] {
        Ok((s, _)) => {
            let mut t = Vec::new();
            balance(s, c, &mut t).map(|b| (b, t))
        }
        Err(e) => Err(Error::Config(e.to_string())),
    });

    let entries = par::map_slice(&configs, |c| {
        let outcome = (|| {
            let (split, split_t) = splits[split_keys[&split_key(c)]]
                .as_ref()
                .map_err(|e| Error::Config(e.to_string()).in_stage("split"))?;
            let (bal, bal_t) = balanced[balance_keys[&balance_key(c)]]
                .as_ref()
                .map_err(|e| Error::Config(e.to_string()).in_stage("resample"))?;
            let mut timings: Vec<StageTiming> = corpus.timings.iter().chain(split_t).chain(bal_t).cloned().collect();
            fit_and_evaluate(split, bal, c, &mut timings)
        })();
        SweepEntry::from_outcome(c, outcome)
    });
    Ok(SweepReport::from_entries(entries))
}

/// One stacking run per meta-classifier (LR, SVM, MNB, BNB, RFC, DTC) on
/// TF-IDF features. Unless the meta kind is excluded from level 0, the six
/// runs share one set of out-of-fold features and base refits.
pub fn run_stacking_sweep(base: &ExperimentConfig, corpus: &PreparedCorpus) -> Result<SweepReport> {
    let plan = SweepPlan {
        methods: vec![Method::Stacking],
        vectorizers: vec![VectorizerKind::Tfidf],
        classifiers: ClassifierKind::REPORT_ORDER.to_vec(),
        both_test_variants: false,
    };
    if base.stack_exclude_meta {
        return run_sweep(base, &plan, corpus);
    }
    let configs = plan.configs(base);
    configs[0].validate().map_err(|e| e.in_stage("config"))?;
    let mut shared_t = corpus.timings.clone();
    let split = vectorized_split(corpus, &configs[0], &mut shared_t)?;
    let bal = balance(&split, &configs[0], &mut shared_t)?;
    let spec = StackSpec::from_config(&configs[0]).map_err(|e| e.in_stage("config"))?;
    let metas: Vec<ClassifierSpec> = configs
        .iter()
        .map(|c| ClassifierSpec::from_config(c.stack_meta, c))
        .collect();
    let models = timed(&mut shared_t, "train", || train_stack_multi(&spec, &metas, &bal.train, bal.weights.as_ref()));
    let entries = match models {
        Ok(models) => configs
            .iter()
            .zip(models)
            .map(|(c, model)| {
                let mut timings = shared_t.clone();
                let mut warnings = bal.warnings.clone();
                warnings.extend(model.base.iter().flat_map(|m| m.warnings()));
                warnings.extend(model.meta.warnings());
                let outcome = timed(&mut timings, "evaluate", || -> Result<MetricsReport> {
                    let pred = model.predict(&bal.test.x)?;
                    evaluate(&bal.test.labels, &pred, split.positive)
                })
                .map_err(|e| e.in_stage("evaluate"))
                .map(|metrics| RunResult {
                    config: c.clone(),
                    metrics,
                    train_counts: bal.train.class_counts(),
                    test_counts: bal.test.class_counts(),
                    vocab_size: split.vocab_size,
                    test_resampled: bal.test_resampled,
                    warnings,
                    timings,
                });
                SweepEntry::from_outcome(c, outcome)
            })
            .collect(),
        Err(e) => {
            let msg = e.to_string();
            configs
                .iter()
                .map(|c| SweepEntry::from_outcome(c, Err(Error::Config(msg.clone()).in_stage("train"))))
                .collect()
        }
    };
    Ok(SweepReport::from_entries(entries))
}
