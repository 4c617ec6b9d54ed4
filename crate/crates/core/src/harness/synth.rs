//! Seeded synthetic corpus: two token distributions over Bangla-letter words.
//!
//! Both classes draw most tokens from a shared Zipf-distributed background
//! vocabulary. A small fraction of tokens comes from a class-specific topic
//! list, and a smaller fraction from the other class's list, so the classes
//! overlap and a plain classifier on the skewed data is far from perfect.

use std::collections::HashSet;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::{LabeledDataset, RawArticle};
use crate::label::Label;
use crate::seed::{self, streams, Rng};
use crate::text::StopwordSet;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_majority: usize,
    pub n_minority: usize,
    /// Which label is the rare one.
    pub minority: Label,
    pub background_words: usize,
    pub topic_words: usize,
    /// Share of tokens drawn from the document's own class topic.
    pub topic_rate: f64,
    /// Share of tokens drawn from the other class's topic.
    pub cross_rate: f64,
    pub min_len: usize,
    pub max_len: usize,
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_majority: 5000,
            n_minority: 150,
            minority: Label::Fake,
            background_words: 300,
            topic_words: 30,
            topic_rate: 0.12,
            cross_rate: 0.03,
            min_len: 25,
            max_len: 70,
            zipf_exponent: 1.05,
            seed: 42,
        }
    }
}

const CONSONANTS: &[char] = &[
    'ক', 'খ', 'গ', 'ঘ', 'চ', 'ছ', 'জ', 'ঝ', 'ট', 'ঠ', 'ড', 'ঢ', 'ণ', 'ত', 'থ', 'দ', 'ধ', 'ন', 'প', 'ফ', 'ব', 'ভ', 'ম',
    'য', 'র', 'ল', 'শ', 'ষ', 'স', 'হ',
];
const VOWEL_SIGNS: &[char] = &['া', 'ি', 'ী', 'ু', 'ূ', 'ে', 'ো'];

/// A word ending in a consonant other than `র`, which no bundled suffix rule touches.
fn random_word(rng: &mut Rng) -> String {
    let syllables = rng.gen_range(2..=4);
    let mut w = String::new();
    for s in 0..syllables {
        let last = s + 1 == syllables;
        loop {
            let c = *CONSONANTS.choose(rng).expect("non-empty");
            if !(last && c == 'র') {
                w.push(c);
                break;
            }
        }
        if !last && rng.gen_bool(0.6) {
            w.push(*VOWEL_SIGNS.choose(rng).expect("non-empty"));
        }
    }
    w
}

fn vocabulary(rng: &mut Rng, n: usize, taken: &mut HashSet<String>, stops: &StopwordSet) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = random_word(rng);
        if !stops.contains(&w) && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

pub fn synth_corpus(cfg: &SynthConfig) -> Result<LabeledDataset> {
    if cfg.n_majority == 0 || cfg.n_minority == 0 {
        return Err(Error::Config("synthetic corpus needs both classes".into()));
    }
    if cfg.min_len == 0 || cfg.min_len > cfg.max_len {
        return Err(Error::Config(format!("invalid document length range {}..={}", cfg.min_len, cfg.max_len)));
    }
    if !(cfg.topic_rate >= 0.0 && cfg.cross_rate >= 0.0 && cfg.topic_rate + cfg.cross_rate <= 1.0) {
        return Err(Error::Config("topic_rate + cross_rate must lie in [0, 1]".into()));
    }
    let mut rng = seed::rng(seed::derive(cfg.seed, streams::SYNTH, 0));
    let stops = StopwordSet::bangla();
    let mut taken = HashSet::new();
    let background = vocabulary(&mut rng, cfg.background_words.max(1), &mut taken, &stops);
    let topics = [
        vocabulary(&mut rng, cfg.topic_words.max(1), &mut taken, &stops),
        vocabulary(&mut rng, cfg.topic_words.max(1), &mut taken, &stops),
    ];
    let zipf = WeightedIndex::new((1..=background.len()).map(|r| 1.0 / (r as f64).powf(cfg.zipf_exponent)))
        .map_err(|e| Error::Config(format!("bad Zipf weights: {e}")))?;

    let mut labels = vec![cfg.minority.other(); cfg.n_majority];
    labels.extend(vec![cfg.minority; cfg.n_minority]);
    labels.shuffle(&mut rng);

    let records = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let own = &topics[label.index()];
            let other = &topics[label.other().index()];
            let len = rng.gen_range(cfg.min_len..=cfg.max_len);
            let mut text = String::new();
            for t in 0..len {
                let u: f64 = rng.gen();
                let word = if u < cfg.topic_rate {
                    own.choose(&mut rng).expect("non-empty")
                } else if u < cfg.topic_rate + cfg.cross_rate {
                    other.choose(&mut rng).expect("non-empty")
                } else {
                    &background[zipf.sample(&mut rng)]
                };
                if t > 0 {
                    text.push(if t % 12 == 0 { '।' } else { ' ' });
                    if t % 12 == 0 {
                        text.push(' ');
                    }
                }
                text.push_str(word);
            }
            RawArticle::new(format!("synth-{:05}", i + 1), text, label)
        })
        .collect();
    Ok(LabeledDataset::new(records))
}

/// Writes `articleID,content,label` CSV with `authentic` / `fake` labels.
pub fn write_corpus(dataset: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    let io = |e: csv::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
    w.write_record(["articleID", "content", "label"]).map_err(io)?;
    for r in dataset.records() {
        w.write_record([r.id.as_str(), r.content.as_str(), &r.label.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_corpus, Schema};
    use crate::text::TextPipeline;

    fn small() -> SynthConfig {
        SynthConfig {
            n_majority: 60,
            n_minority: 6,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn counts_and_determinism() {
        let d = synth_corpus(&small()).unwrap();
        assert_eq!(d.class_counts(), [60, 6]);
        assert_eq!(synth_corpus(&small()).unwrap().records(), d.records());
        let other = synth_corpus(&SynthConfig { seed: 43, ..small() }).unwrap();
        assert_ne!(other.records(), d.records());
    }

    #[test]
    fn words_survive_preprocessing() {
        let d = synth_corpus(&small()).unwrap();
        let p = TextPipeline::default();
        for r in d.records() {
            let doc = p.process(r);
            let raw: Vec<&str> = r.content.split(|c: char| c == ' ' || c == '।').filter(|s| !s.is_empty()).collect();
            assert_eq!(doc.tokens, raw);
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("synth.csv");
        let d = synth_corpus(&small()).unwrap();
        write_corpus(&d, &path).unwrap();
        let back = load_corpus(&path, &Schema::default()).unwrap();
        assert_eq!(back.class_counts(), [60, 6]);
        assert_eq!(back.records()[3].content, d.records()[3].content);
    }
}
