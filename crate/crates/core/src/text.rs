//! Bangla text cleanup: character whitelisting, tokenization, stopword
//! removal and suffix-stripping stemming.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::RawArticle;
use crate::label::Label;
use crate::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords-bn.txt");
const DEFAULT_STEM_RULES: &str = include_str!("../data/bn-stem-rules.tsv");

/// Preprocessed token sequence of one article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub label: Label,
}

/// Characters kept by [`standardize`]: the Bengali block minus its digits
/// (U+09E6..=U+09EF), currency / fraction symbols (U+09F2..=U+09FB) and the
/// abbreviation sign (U+09FD).
pub fn is_bangla_letter(c: char) -> bool {
    matches!(c as u32,
        0x0980..=0x09E5 | 0x09F0..=0x09F1 | 0x09FC | 0x09FE..=0x09FF)
}

/// Zero-width (non-)joiners glue conjuncts inside a word; they are deleted
/// instead of being turned into a word break.
fn is_joiner(c: char) -> bool {
    matches!(c, '\u{200C}' | '\u{200D}')
}

/// Keeps only Bangla letters and signs. Every other character becomes a
/// space, whitespace runs collapse to one space, and the ends are trimmed.
pub fn standardize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if is_joiner(c) {
            continue;
        }
        if is_bangla_letter(c) {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

pub fn tokenize(clean: &str) -> Vec<String> {
    clean.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        StopwordSet {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    /// One word per line; blank lines and `#` comments skipped. Entries are
    /// standardized so they compare equal to pipeline tokens.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .flat_map(|l| tokenize(&standardize(l)))
            .collect();
        StopwordSet { words }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    /// The vendored Bangla list.
    pub fn bangla() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

pub fn remove_stopwords(tokens: Vec<String>, stops: &StopwordSet) -> Vec<String> {
    tokens.into_iter().filter(|t| !stops.contains(t)).collect()
}

/// Maps a word to its stem.
pub trait Stemmer: Send + Sync {
    fn stem_word(&self, word: &str) -> String;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub suffix: String,
    pub replacement: String,
    /// Minimum number of code points the stem must keep, replacement included.
    pub min_stem_len: usize,
}

/// Rule-based suffix stripper.
///
/// Rules are tried longest suffix first; the first applicable one fires and
/// the process repeats on the result until no rule applies, which makes
/// stemming idempotent. Every replacement is shorter than its suffix, so the
/// loop terminates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixStemmer {
    rules: Vec<SuffixRule>,
}

impl SuffixStemmer {
    pub fn new(mut rules: Vec<SuffixRule>) -> Result<Self> {
        for r in &rules {
            if r.suffix.is_empty() {
                return Err(Error::Config("stemmer rule with empty suffix".into()));
            }
            if r.replacement.chars().count() >= r.suffix.chars().count() {
                return Err(Error::Config(format!(
                    "stemmer rule `{}` -> `{}` does not shorten the word",
                    r.suffix, r.replacement
                )));
            }
            if r.min_stem_len == 0 {
                return Err(Error::Config(format!("stemmer rule `{}` needs min_stem_len >= 1", r.suffix)));
            }
        }
        rules.sort_by_key(|r| std::cmp::Reverse(r.suffix.chars().count()));
        Ok(SuffixStemmer { rules })
    }

    /// `suffix<TAB>replacement<TAB>min_stem_len` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    row: n + 1,
                    message: format!("expected 3 tab-separated fields, got {}", parts.len()),
                });
            }
            let min_stem_len = parts[2].trim().parse().map_err(|_| Error::Parse {
                row: n + 1,
                message: format!("invalid min_stem_len `{}`", parts[2]),
            })?;
            rules.push(SuffixRule {
                suffix: parts[0].trim().to_string(),
                replacement: parts[1].trim().to_string(),
                min_stem_len,
            });
        }
        Self::new(rules)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The vendored table of common Bangla inflectional endings.
    pub fn bangla() -> Self {
        Self::parse(DEFAULT_STEM_RULES).expect("vendored stemmer rules are valid")
    }

    pub fn rules(&self) -> &[SuffixRule] {
        &self.rules
    }

    fn strip_once(&self, word: &str) -> Option<String> {
        let len = word.chars().count();
        self.rules.iter().find_map(|r| {
            let base = word.strip_suffix(r.suffix.as_str())?;
            let stem_len = len - r.suffix.chars().count() + r.replacement.chars().count();
            (stem_len >= r.min_stem_len).then(|| format!("{base}{}", r.replacement))
        })
    }
}

impl Stemmer for SuffixStemmer {
    fn stem_word(&self, word: &str) -> String {
        let mut current = word.to_string();
        while let Some(next) = self.strip_once(&current) {
            current = next;
        }
        current
    }
}

pub fn stem(tokens: Vec<String>, stemmer: &dyn Stemmer) -> Vec<String> {
    tokens.into_iter().map(|t| stemmer.stem_word(&t)).collect()
}

/// Bundles the resources needed by [`preprocess`].
pub struct TextPipeline {
    pub stopwords: StopwordSet,
    pub stemmer: Box<dyn Stemmer>,
}

impl Default for TextPipeline {
    fn default() -> Self {
        TextPipeline {
            stopwords: StopwordSet::bangla(),
            stemmer: Box::new(SuffixStemmer::bangla()),
        }
    }
}

impl TextPipeline {
    pub fn process(&self, article: &RawArticle) -> TokenizedDoc {
        preprocess(article, &self.stopwords, self.stemmer.as_ref())
    }

    pub fn process_all(&self, articles: &[RawArticle]) -> Vec<TokenizedDoc> {
        crate::par::map_slice(articles, |a| self.process(a))
    }
}

/// standardize → tokenize → remove_stopwords → stem.
pub fn preprocess(article: &RawArticle, stops: &StopwordSet, stemmer: &dyn Stemmer) -> TokenizedDoc {
    let tokens = stem(remove_stopwords(tokenize(&standardize(&article.content)), stops), stemmer);
    TokenizedDoc {
        doc_id: article.id.clone(),
        tokens,
        label: article.label,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize("খবর! 2021 breaking ২০২১"), "খবর");
        assert_eq!(standardize(""), "");
        assert_eq!(standardize("12 ,.;! @#$%& ৩৪"), "");
        assert_eq!(standardize("  আমার   সোনার\tবাংলা।  "), "আমার সোনার বাংলা");
        assert_eq!(standardize("দাম ৳৫০০ টাকা 😀"), "দাম টাকা");
    }

    #[test]
    fn joiners_do_not_split_words() {
        assert_eq!(standardize("র\u{200D}্যাব"), "র্যাব");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("ক খ ক"), vec!["ক", "খ", "ক"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("কখ"), vec!["কখ"]);
    }

    #[test]
    fn stopword_filter() {
        let toks = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let stops = StopwordSet::new(["ক"]);
        assert_eq!(remove_stopwords(toks(&["ক", "খ", "ক", "গ"]), &stops), toks(&["খ", "গ"]));
        assert_eq!(remove_stopwords(toks(&["ক", "খ"]), &StopwordSet::default()), toks(&["ক", "খ"]));
        assert!(remove_stopwords(toks(&["ক", "ক"]), &stops).is_empty());
    }

    #[test]
    fn vendored_stopwords_survive_standardize() {
        let stops = StopwordSet::bangla();
        assert!(stops.len() > 300);
        for w in stops.iter() {
            assert_eq!(standardize(w), w);
        }
        assert!(stops.contains("এবং"));
    }

    #[test]
    fn stemmer_fixture_words() {
        let s = SuffixStemmer::bangla();
        for (word, want) in [
            ("বইগুলো", "বই"),
            ("ছেলেদের", "ছেলে"),
            ("বাড়িতে", "বাড়ি"),
            ("মানুষকে", "মানুষ"),
            ("কলমটি", "কলম"),
            ("খবরের", "খবর"),
        ] {
            assert_eq!(s.stem_word(word), want, "{word}");
        }
        assert_eq!(s.stem_word("খবর"), "খবর");
        // stripping would leave fewer than 2 code points
        assert_eq!(s.stem_word("কে"), "কে");
        assert!(stem(Vec::new(), &s).is_empty());
    }

    #[test]
    fn stemmer_rule_validation() {
        assert!(SuffixStemmer::parse("ab\tabc\t1\n").is_err());
        assert!(SuffixStemmer::parse("ab\t\t0\n").is_err());
        assert!(SuffixStemmer::parse("ab\t1\n").is_err());
        let s = SuffixStemmer::parse("# c\nbc\tb\t1\n").unwrap();
        assert_eq!(s.stem_word("abcc"), "abcc");
        assert_eq!(s.stem_word("abc"), "ab");
    }

    #[test]
    fn preprocess_composes_in_order() {
        let art = RawArticle::new("a1", "আমি বইগুলো পড়েছি, এবং খবরের কাগজ! 2024", Label::Fake);
        let pipe = TextPipeline::default();
        let doc = pipe.process(&art);
        let manual = stem(
            remove_stopwords(tokenize(&standardize(&art.content)), &pipe.stopwords),
            pipe.stemmer.as_ref(),
        );
        assert_eq!(doc.tokens, manual);
        assert_eq!(doc.tokens, vec!["বই", "পড়েছি", "খবর", "কাগজ"]);
        assert_eq!(doc.label, Label::Fake);
        let empty = pipe.process(&RawArticle::new("e", "", Label::Authentic));
        assert!(empty.tokens.is_empty());
    }

    fn any_text() -> impl Strategy<Value = String> {
        prop::collection::vec(
            prop_oneof![
                prop::char::range('\u{0980}', '\u{09FF}'),
                prop::char::range(' ', '~'),
                Just('\u{200D}'),
                Just('।'),
                Just('😀'),
                Just('\n'),
            ],
            0..80,
        )
        .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn whitelist_holds(text in any_text()) {
            let pipe = TextPipeline::default();
            let doc = pipe.process(&RawArticle::new("x", text.clone(), Label::Authentic));
            for t in &doc.tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(t.chars().all(is_bangla_letter));
            }
            let clean = standardize(&text);
            prop_assert!(!clean.starts_with(' ') && !clean.ends_with(' ') && !clean.contains("  "));
            prop_assert_eq!(standardize(&clean), clean.clone());
        }

        #[test]
        fn stemming_is_idempotent(text in any_text()) {
            let s = SuffixStemmer::bangla();
            for t in tokenize(&standardize(&text)) {
                let once = s.stem_word(&t);
                prop_assert!(!once.is_empty());
                prop_assert_eq!(s.stem_word(&once), once);
            }
        }

        #[test]
        fn stopword_removal_preserves_order(text in any_text()) {
            let stops = StopwordSet::bangla();
            let toks = tokenize(&standardize(&text));
            let kept = remove_stopwords(toks.clone(), &stops);
            let expected: Vec<String> = toks.into_iter().filter(|t| !stops.contains(t)).collect();
            prop_assert_eq!(kept, expected);
        }
    }
}
