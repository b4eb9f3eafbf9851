//! Text analysis: tokenization, case folding, stopword removal and term counting.

use alloc::collections::btree_map::{self, BTreeMap};
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::Lang;

/// How raw text is cut into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenizerKind {
    /// Whitespace-separated words with leading/trailing punctuation trimmed.
    WhitespaceWord,
    /// Overlapping character bigrams within each whitespace-separated run.
    CharBigram,
}

/// Optional stemmer applied to word tokens after stopword removal.
pub type Stemmer = fn(&str) -> String;

/// Small English stopword list used by [`AnalyzerConfig::english`].
pub const ENGLISH_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few",
    "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "him",
    "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more",
    "most", "my", "no", "nor", "not", "of", "off", "on", "once", "only", "or", "other", "our",
    "ours", "out", "over", "own", "same", "she", "should", "so", "some", "such", "than", "that",
    "the", "their", "theirs", "them", "then", "there", "these", "they", "this", "those", "through",
    "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where",
    "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your",
];

#[derive(Debug, Clone)]
pub struct AnalyzerConfig {
    pub lang: Lang,
    pub lowercase: bool,
    pub stopwords: BTreeSet<String>,
    pub tokenizer: TokenizerKind,
    /// Minimum token length in characters (word mode only).
    pub min_token_len: usize,
    pub stemmer: Option<Stemmer>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    ZeroMinTokenLen,
    BigramMinTokenLen(usize),
    LangMismatch { expected: Lang, found: Lang },
    InvalidParameter(&'static str),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::ZeroMinTokenLen => f.write_str("min_token_len must be at least 1"),
            ConfigError::BigramMinTokenLen(n) => {
                write!(
                    f,
                    "character-bigram analysis requires min_token_len = 1, got {n}"
                )
            }
            ConfigError::LangMismatch { expected, found } => {
                write!(f, "language mismatch: expected {expected}, found {found}")
            }
            ConfigError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

impl AnalyzerConfig {
    /// Lowercasing word analyzer with no stopwords.
    pub fn words(lang: impl Into<Lang>) -> Self {
        AnalyzerConfig {
            lang: lang.into(),
            lowercase: true,
            stopwords: BTreeSet::new(),
            tokenizer: TokenizerKind::WhitespaceWord,
            min_token_len: 1,
            stemmer: None,
        }
    }

    /// Word analyzer with [`ENGLISH_STOPWORDS`].
    pub fn english() -> Self {
        Self::words("en").with_stopwords(ENGLISH_STOPWORDS.iter().copied())
    }

    /// Character-bigram analyzer, the dependency-free CJK baseline.
    pub fn bigram(lang: impl Into<Lang>) -> Self {
        AnalyzerConfig {
            tokenizer: TokenizerKind::CharBigram,
            ..Self::words(lang)
        }
    }

    /// English gets [`AnalyzerConfig::english`]; `ja`, `zh` and `ko` get
    /// bigrams; anything else gets plain words.
    pub fn default_for(lang: &Lang) -> Self {
        match lang.as_str() {
            "en" => Self::english(),
            "ja" | "zh" | "ko" => Self::bigram(lang.clone()),
            _ => Self::words(lang.clone()),
        }
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stopwords = words.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_stemmer(mut self, stemmer: Stemmer) -> Self {
        self.stemmer = Some(stemmer);
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.min_token_len == 0 {
            return Err(ConfigError::ZeroMinTokenLen);
        }
        if self.tokenizer == TokenizerKind::CharBigram && self.min_token_len != 1 {
            return Err(ConfigError::BigramMinTokenLen(self.min_token_len));
        }
        Ok(())
    }
}

/// Term frequencies of one text, with the maximum frequency cached.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermVector {
    freqs: BTreeMap<String, u32>,
    max_tf: u32,
}

impl TermVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` occurrences of `term`. A zero count is ignored.
    pub fn add(&mut self, term: impl Into<String>, count: u32) {
        if count == 0 {
            return;
        }
        let f = self.freqs.entry(term.into()).or_insert(0);
        *f += count;
        self.max_tf = self.max_tf.max(*f);
    }

    /// Frequency of `term`, 0 when absent.
    pub fn get(&self, term: &str) -> u32 {
        self.freqs.get(term).copied().unwrap_or(0)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.freqs.contains_key(term)
    }

    /// Largest frequency; 0 for an empty vector.
    pub fn max_tf(&self) -> u32 {
        self.max_tf
    }

    /// Number of distinct terms.
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Sum of all frequencies.
    pub fn total(&self) -> u64 {
        self.freqs.values().map(|&f| u64::from(f)).sum()
    }

    /// Terms in ascending order with their frequencies.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> + '_ {
        self.freqs.iter().map(|(t, &f)| (t.as_str(), f))
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> + '_ {
        self.freqs.keys().map(String::as_str)
    }

    /// Adds every frequency of `other` into `self`.
    pub fn merge(&mut self, other: &TermVector) {
        for (t, f) in other.iter() {
            self.add(t, f);
        }
    }

    /// Removes `term`, returning its old frequency.
    pub fn remove(&mut self, term: &str) -> u32 {
        let old = self.freqs.remove(term).unwrap_or(0);
        if old == self.max_tf {
            self.max_tf = self.freqs.values().copied().max().unwrap_or(0);
        }
        old
    }
}

impl<S: Into<String>> FromIterator<S> for TermVector {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut tv = TermVector::new();
        for t in iter {
            tv.add(t, 1);
        }
        tv
    }
}

impl<S: Into<String>> Extend<(S, u32)> for TermVector {
    fn extend<I: IntoIterator<Item = (S, u32)>>(&mut self, iter: I) {
        for (t, f) in iter {
            self.add(t, f);
        }
    }
}

impl<'a> IntoIterator for &'a TermVector {
    type Item = (&'a String, &'a u32);
    type IntoIter = btree_map::Iter<'a, String, u32>;

    fn into_iter(self) -> Self::IntoIter {
        self.freqs.iter()
    }
}

fn trim_punct(word: &str) -> &str {
    word.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Cuts `text` into the ordered token stream `analyze` counts.
pub fn tokenize(text: &str, cfg: &AnalyzerConfig) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let word = trim_punct(raw);
        if word.is_empty() {
            continue;
        }
        let word = if cfg.lowercase {
            word.to_lowercase()
        } else {
            word.to_string()
        };
        match cfg.tokenizer {
            TokenizerKind::WhitespaceWord => {
                if word.chars().count() < cfg.min_token_len || cfg.stopwords.contains(&word) {
                    continue;
                }
                out.push(match cfg.stemmer {
                    Some(stem) => stem(&word),
                    None => word,
                });
            }
            TokenizerKind::CharBigram => {
                let chars: Vec<char> = word.chars().collect();
                if chars.len() == 1 {
                    if !cfg.stopwords.contains(&word) {
                        out.push(word);
                    }
                    continue;
                }
                for pair in chars.windows(2) {
                    let gram: String = pair.iter().collect();
                    if !cfg.stopwords.contains(&gram) {
                        out.push(gram);
                    }
                }
            }
        }
    }
    out
}

/// Analyzes `text` into a term-frequency vector.
pub fn analyze(text: &str, cfg: &AnalyzerConfig) -> TermVector {
    tokenize(text, cfg).into_iter().collect()
}
