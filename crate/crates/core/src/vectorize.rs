//! N-gram vocabularies with count and smoothed TF-IDF weighting.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use crate::label::Label;
use crate::par;
use crate::sparse::{FeatureMatrix, SparseMatrix};
use crate::text::TokenizedDoc;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NgramRange {
    pub lo: usize,
    pub hi: usize,
}

impl NgramRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!("invalid n-gram range ({lo}, {hi})")));
        }
        Ok(NgramRange { lo, hi })
    }

    pub const UNIGRAMS: NgramRange = NgramRange { lo: 1, hi: 1 };
    pub const UNI_BI: NgramRange = NgramRange { lo: 1, hi: 2 };

    /// Calls `f` on every contiguous window of length `lo..=hi`.
    pub fn for_each<F: FnMut(String)>(&self, tokens: &[String], mut f: F) {
        for n in self.lo..=self.hi {
            if n > tokens.len() {
                break;
            }
            for w in tokens.windows(n) {
                f(w.join(" "));
            }
        }
    }

    /// Number of windows a document of `len` tokens produces.
    pub fn window_count(&self, len: usize) -> usize {
        (self.lo..=self.hi).map(|n| (len + 1).saturating_sub(n)).sum()
    }
}

/// Fitted term → column mapping, with IDF weights when fitted for TF-IDF.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    idf: Option<Vec<f64>>,
    ngram_range: NgramRange,
    n_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn idf(&self) -> Option<&[f64]> {
        self.idf.as_deref()
    }

    pub fn ngram_range(&self) -> NgramRange {
        self.ngram_range
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Text form: two header lines, then `term<TAB>index[<TAB>idf]` per term.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kind = if self.idf.is_some() { "tfidf" } else { "count" };
        let _ = writeln!(s, "#ngram_range\t{}\t{}", self.ngram_range.lo, self.ngram_range.hi);
        let _ = writeln!(s, "#n_docs\t{}\t{kind}", self.n_docs);
        for (i, t) in self.terms.iter().enumerate() {
            match &self.idf {
                Some(idf) => {
                    let _ = writeln!(s, "{t}\t{i}\t{:?}", idf[i]);
                }
                None => {
                    let _ = writeln!(s, "{t}\t{i}");
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |row: usize, message: String| Error::Parse { row, message };
        let mut lines = text.lines().enumerate();
        let (_, h1) = lines.next().ok_or_else(|| bad(1, "missing header".into()))?;
        let h1: Vec<&str> = h1.split('\t').collect();
        if h1.len() != 3 || h1[0] != "#ngram_range" {
            return Err(bad(1, "expected `#ngram_range<TAB>lo<TAB>hi`".into()));
        }
        let parse_usize = |row: usize, s: &str| s.parse::<usize>().map_err(|_| bad(row, format!("invalid integer `{s}`")));
        let ngram_range = NgramRange::new(parse_usize(1, h1[1])?, parse_usize(1, h1[2])?)?;
        let (_, h2) = lines.next().ok_or_else(|| bad(2, "missing n_docs header".into()))?;
        let h2: Vec<&str> = h2.split('\t').collect();
        if h2.len() != 3 || h2[0] != "#n_docs" {
            return Err(bad(2, "expected `#n_docs<TAB>n<TAB>kind`".into()));
        }
        let n_docs = parse_usize(2, h2[1])?;
        let tfidf = match h2[2] {
            "tfidf" => true,
            "count" => false,
            other => return Err(bad(2, format!("unknown vocabulary kind `{other}`"))),
        };
        let mut terms = Vec::new();
        let mut idf = Vec::new();
        for (n, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            let expected = if tfidf { 3 } else { 2 };
            if f.len() != expected {
                return Err(bad(n + 1, format!("expected {expected} fields")));
            }
            if parse_usize(n + 1, f[1])? != terms.len() {
                return Err(bad(n + 1, "indices must be dense and in order".into()));
            }
            terms.push(f[0].to_string());
            if tfidf {
                idf.push(f[2].parse::<f64>().map_err(|_| bad(n + 1, format!("invalid idf `{}`", f[2])))?);
            }
        }
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocabulary {
            terms,
            index,
            idf: tfidf.then_some(idf),
            ngram_range,
            n_docs,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Document frequency of every n-gram, terms sorted by code point.
fn document_frequencies(docs: &[TokenizedDoc], range: NgramRange) -> Vec<(String, usize)> {
    let per_doc: Vec<Vec<String>> = par::map_slice(docs, |d| {
        let mut grams = Vec::new();
        range.for_each(&d.tokens, |g| grams.push(g));
        grams.sort_unstable();
        grams.dedup();
        grams
    });
    let mut df: HashMap<String, usize> = HashMap::new();
    for grams in per_doc {
        for g in grams {
            *df.entry(g).or_insert(0) += 1;
        }
    }
    let mut out: Vec<(String, usize)> = df.into_iter().collect();
    out.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    out
}

fn build(docs: &[TokenizedDoc], range: NgramRange, with_idf: bool) -> Vocabulary {
    let df = document_frequencies(docs, range);
    if df.is_empty() {
        warn!("fitted an empty vocabulary on {} documents", docs.len());
    }
    let n_docs = docs.len();
    let idf = with_idf.then(|| {
        df.iter()
            .map(|(_, d)| ((1.0 + n_docs as f64) / (1.0 + *d as f64)).ln() + 1.0)
            .collect()
    });
    let terms: Vec<String> = df.into_iter().map(|(t, _)| t).collect();
    let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Vocabulary {
        terms,
        index,
        idf,
        ngram_range: range,
        n_docs,
    }
}

pub fn fit_count(train_docs: &[TokenizedDoc], range: NgramRange) -> Vocabulary {
    build(train_docs, range, false)
}

/// Vocabulary plus `idf(t) = ln((1 + n) / (1 + df(t))) + 1`.
pub fn fit_tfidf(train_docs: &[TokenizedDoc], range: NgramRange) -> Vocabulary {
    build(train_docs, range, true)
}

fn count_row(tokens: &[String], vocab: &Vocabulary) -> Vec<(u32, f64)> {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    vocab.ngram_range.for_each(tokens, |g| {
        if let Some(j) = vocab.get(&g) {
            *counts.entry(j).or_insert(0.0) += 1.0;
        }
    });
    let mut row: Vec<(u32, f64)> = counts.into_iter().map(|(j, c)| (j as u32, c)).collect();
    row.sort_unstable_by_key(|e| e.0);
    row
}

fn assemble(rows: Vec<Vec<(u32, f64)>>, n_cols: usize, labels: Vec<Label>) -> FeatureMatrix {
    let mut x = SparseMatrix::empty(n_cols);
    for r in &rows {
        x.push_sorted(r);
    }
    FeatureMatrix { x, labels }
}

/// Raw n-gram counts; out-of-vocabulary n-grams are dropped.
pub fn transform_count(docs: &[TokenizedDoc], vocab: &Vocabulary) -> FeatureMatrix {
    let rows = par::map_slice(docs, |d| count_row(&d.tokens, vocab));
    assemble(rows, vocab.len(), docs.iter().map(|d| d.label).collect())
}

/// Counts scaled by IDF, then each row scaled to unit L2 norm (zero rows stay zero).
pub fn transform_tfidf(docs: &[TokenizedDoc], vocab: &Vocabulary) -> Result<FeatureMatrix> {
    let idf = vocab
        .idf
        .as_ref()
        .ok_or_else(|| Error::Config("vocabulary was fitted without idf".into()))?;
    let rows = par::map_slice(docs, |d| {
        let mut row = count_row(&d.tokens, vocab);
        for e in row.iter_mut() {
            e.1 *= idf[e.0 as usize];
        }
        let norm = row.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        if norm > 0.0 {
            for e in row.iter_mut() {
                e.1 /= norm;
            }
        }
        row
    });
    Ok(assemble(rows, vocab.len(), docs.iter().map(|d| d.label).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(tokens: &[&str]) -> TokenizedDoc {
        TokenizedDoc {
            doc_id: String::new(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            label: Label::Authentic,
        }
    }

    #[test]
    fn fit_count_windows() {
        let v = fit_count(&[doc(&["x", "y", "x"])], NgramRange::UNI_BI);
        assert_eq!(v.terms(), &["x", "x y", "y", "y x"]);
        assert!(v.idf().is_none());
        let v1 = fit_count(&[doc(&["x", "y", "x"])], NgramRange::UNIGRAMS);
        assert_eq!(v1.terms(), &["x", "y"]);
        assert!(fit_count(&[doc(&[])], NgramRange::UNI_BI).is_empty());
    }

    #[test]
    fn transform_count_cells() {
        let d = doc(&["x", "y", "x"]);
        let v = fit_count(std::slice::from_ref(&d), NgramRange::UNI_BI);
        let m = transform_count(&[d, doc(&["z", "w"]), doc(&[])], &v);
        let row = m.x.row(0);
        assert_eq!(row.get(v.get("x").unwrap()), 2.0);
        assert_eq!(row.get(v.get("y").unwrap()), 1.0);
        assert_eq!(row.get(v.get("x y").unwrap()), 1.0);
        assert_eq!(row.get(v.get("y x").unwrap()), 1.0);
        assert_eq!(m.x.row(1).nnz(), 0);
        assert_eq!(m.x.row(2).nnz(), 0);
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn idf_values() {
        let docs = [doc(&["a", "b"]), doc(&["a", "c"]), doc(&["a"])];
        let v = fit_tfidf(&docs, NgramRange::UNIGRAMS);
        let idf = v.idf().unwrap();
        assert_eq!(idf[v.get("a").unwrap()], 1.0);
        assert!((idf[v.get("b").unwrap()] - 1.693_147_180_559_945).abs() < 1e-12);
        let single = fit_tfidf(&[doc(&["a"])], NgramRange::UNIGRAMS);
        assert_eq!(single.idf().unwrap(), &[1.0]);
    }

    #[test]
    fn tfidf_rows_unit_or_zero() {
        let d = doc(&["p", "q", "q", "r"]);
        let v = fit_tfidf(std::slice::from_ref(&d), NgramRange::UNI_BI);
        let m = transform_tfidf(&[d, doc(&[])], &v).unwrap();
        assert!((m.x.row(0).squared_norm() - 1.0).abs() < 1e-12);
        assert_eq!(m.x.row(1).nnz(), 0);
        assert!(transform_tfidf(&[], &fit_count(&[], NgramRange::UNIGRAMS)).is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let docs = [doc(&["a", "b"]), doc(&["a", "c"])];
        for v in [fit_tfidf(&docs, NgramRange::UNI_BI), fit_count(&docs, NgramRange::UNIGRAMS)] {
            let back = Vocabulary::from_text(&v.to_text()).unwrap();
            assert_eq!(back, v);
        }
        assert!(Vocabulary::from_text("garbage").is_err());
    }

    fn docs_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        prop::collection::vec(
            prop::collection::vec(prop::sample::select(vec!["ক", "খ", "গ", "ঘ", "ঙ"]).prop_map(String::from), 0..12),
            1..8,
        )
    }

    proptest! {
        #[test]
        fn count_row_sums_equal_window_counts(raw in docs_strategy()) {
            let docs: Vec<TokenizedDoc> = raw.iter().map(|t| TokenizedDoc { doc_id: String::new(), tokens: t.clone(), label: Label::Fake }).collect();
            let v = fit_count(&docs, NgramRange::UNI_BI);
            let m = transform_count(&docs, &v);
            for (i, d) in docs.iter().enumerate() {
                prop_assert_eq!(m.x.row(i).sum() as usize, NgramRange::UNI_BI.window_count(d.tokens.len()));
            }
        }

        #[test]
        fn test_transform_never_grows_vocab(raw in docs_strategy(), extra in docs_strategy()) {
            let mk = |r: &Vec<Vec<String>>| r.iter().map(|t| TokenizedDoc { doc_id: String::new(), tokens: t.clone(), label: Label::Fake }).collect::<Vec<_>>();
            let v = fit_tfidf(&mk(&raw), NgramRange::UNI_BI);
            let before = v.len();
            let m = transform_tfidf(&mk(&extra), &v).unwrap();
            prop_assert_eq!(v.len(), before);
            prop_assert_eq!(m.n_cols(), before);
            for r in m.x.rows() {
                let n = r.squared_norm().sqrt();
                prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn duplicate_token_never_decreases_counts(raw in docs_strategy(), pos in 0usize..12) {
            let d = TokenizedDoc { doc_id: String::new(), tokens: raw[0].clone(), label: Label::Fake };
            prop_assume!(!d.tokens.is_empty());
            let v = fit_count(std::slice::from_ref(&d), NgramRange::UNI_BI);
            let mut d2 = d.clone();
            let p = pos % d.tokens.len();
            d2.tokens.insert(p, d.tokens[p].clone());
            let a = transform_count(&[d], &v);
            let b = transform_count(&[d2], &v);
            for (c, val) in a.x.row(0).iter() {
                prop_assert!(b.x.row(0).get(c) >= val);
            }
        }
    }
}
