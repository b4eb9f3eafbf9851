//! Query translation (dictionary, MT, combined) and document translation.
//!
//! Dictionary translation segments the analyzed query by greedy longest
//! match against the dictionary's source phrases and, for each matched
//! phrase, keeps the candidate that occurs in the most target documents.
//! MT translation goes through an [`MtAdapter`], either on the whole
//! description or phrase by phrase. The combined method adds the term
//! frequencies of phrase-wise MT and dictionary output, so a term both
//! produce is counted twice.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::analysis::{analyze, tokenize, AnalyzerConfig, ConfigError, TermVector};
use crate::corpus::{Corpus, CorpusError, Document, Lang, Query};
use crate::index::InvertedIndex;

/// Failure of one adapter call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdapterError {
    /// The text that could not be translated.
    pub input: String,
    pub message: String,
}

impl fmt::Display for AdapterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut shown: String = self.input.chars().take(60).collect();
        if shown.len() < self.input.len() {
            shown.push_str("...");
        }
        write!(f, "translation unavailable for {shown:?}: {}", self.message)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AdapterError {}

/// A machine translation backend.
///
/// Implementations must be deterministic for a given input within one run.
pub trait MtAdapter: Sync {
    fn translate(&self, text: &str, src: &Lang, tgt: &Lang) -> Result<String, AdapterError>;

    /// Whether `translate` may be called from several threads at once.
    fn supports_concurrency(&self) -> bool {
        true
    }
}

impl<A: MtAdapter + ?Sized> MtAdapter for &A {
    fn translate(&self, text: &str, src: &Lang, tgt: &Lang) -> Result<String, AdapterError> {
        (**self).translate(text, src, tgt)
    }

    fn supports_concurrency(&self) -> bool {
        (**self).supports_concurrency()
    }
}

impl<A: MtAdapter + ?Sized> MtAdapter for Box<A> {
    fn translate(&self, text: &str, src: &Lang, tgt: &Lang) -> Result<String, AdapterError> {
        (**self).translate(text, src, tgt)
    }

    fn supports_concurrency(&self) -> bool {
        (**self).supports_concurrency()
    }
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityAdapter;

impl MtAdapter for IdentityAdapter {
    fn translate(&self, text: &str, _src: &Lang, _tgt: &Lang) -> Result<String, AdapterError> {
        Ok(text.into())
    }
}

fn lookup_key(word: &str) -> String {
    word.trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Deterministic phrase-table translator.
///
/// Input is split on whitespace and matched greedily, longest phrase first,
/// against the table (case-insensitive, edge punctuation ignored). Matched
/// phrases are replaced by their translation; anything else passes through.
#[derive(Debug, Clone, Default)]
pub struct TableAdapter {
    table: BTreeMap<Vec<String>, String>,
    max_phrase_len: usize,
}

impl TableAdapter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: &str, target: impl Into<String>) {
        let key: Vec<String> = source
            .split_whitespace()
            .map(lookup_key)
            .filter(|w| !w.is_empty())
            .collect();
        if key.is_empty() {
            return;
        }
        self.max_phrase_len = self.max_phrase_len.max(key.len());
        self.table.insert(key, target.into());
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Translates `text` with the table alone.
    pub fn apply(&self, text: &str) -> String {
        let words: Vec<&str> = text.split_whitespace().collect();
        let keys: Vec<String> = words.iter().map(|w| lookup_key(w)).collect();
        let mut out: Vec<&str> = Vec::with_capacity(words.len());
        let mut i = 0;
        while i < words.len() {
            let longest = self.max_phrase_len.min(words.len() - i);
            let hit = (1..=longest)
                .rev()
                .find_map(|len| self.table.get(&keys[i..i + len]).map(|t| (len, t)));
            match hit {
                Some((len, target)) => {
                    if !target.is_empty() {
                        out.push(target);
                    }
                    i += len;
                }
                None => {
                    out.push(words[i]);
                    i += 1;
                }
            }
        }
        out.join(" ")
    }
}

impl FromIterator<(String, String)> for TableAdapter {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        let mut t = TableAdapter::new();
        for (s, d) in iter {
            t.insert(&s, d);
        }
        t
    }
}

impl MtAdapter for TableAdapter {
    fn translate(&self, text: &str, _src: &Lang, _tgt: &Lang) -> Result<String, AdapterError> {
        Ok(self.apply(text))
    }
}

/// Source phrase to candidate translations.
///
/// Source phrases are stored as analyzed token sequences so that they match
/// analyzed query text directly.
#[derive(Debug, Clone)]
pub struct BilingualDictionary {
    src: Lang,
    tgt: Lang,
    entries: BTreeMap<Vec<String>, Vec<String>>,
    max_phrase_len: usize,
}

impl BilingualDictionary {
    pub fn new(src: impl Into<Lang>, tgt: impl Into<Lang>) -> Self {
        BilingualDictionary {
            src: src.into(),
            tgt: tgt.into(),
            entries: BTreeMap::new(),
            max_phrase_len: 0,
        }
    }

    /// Adds candidates for `phrase`, analyzed with `src_cfg`.
    ///
    /// Repeated phrases accumulate candidates; duplicates and blank
    /// candidates are dropped. Returns `false` when nothing was added.
    pub fn insert<I, S>(&mut self, phrase: &str, candidates: I, src_cfg: &AnalyzerConfig) -> bool
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let key = tokenize(phrase, src_cfg);
        if key.is_empty() {
            return false;
        }
        let new: Vec<String> = candidates
            .into_iter()
            .map(Into::into)
            .map(|c: String| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect();
        if new.is_empty() {
            return false;
        }
        let len = key.len();
        let slot = self.entries.entry(key).or_default();
        for c in new {
            if !slot.contains(&c) {
                slot.push(c);
            }
        }
        self.max_phrase_len = self.max_phrase_len.max(len);
        true
    }

    pub fn src(&self) -> &Lang {
        &self.src
    }

    pub fn tgt(&self) -> &Lang {
        &self.tgt
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn candidates(&self, phrase: &[String]) -> Option<&[String]> {
        self.entries.get(phrase).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[String], &[String])> + '_ {
        self.entries
            .iter()
            .map(|(k, v)| (k.as_slice(), v.as_slice()))
    }
}

/// One unit of a greedy longest-match segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// `tokens[start..start + len]` is a dictionary phrase.
    Phrase { start: usize, len: usize },
    /// `tokens[at]` matched nothing.
    Unmatched { at: usize },
}

/// Greedy longest-match segmentation of `tokens` against `dict`. Each token
/// is covered exactly once.
pub fn segment(tokens: &[String], dict: &BilingualDictionary) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = dict.max_phrase_len.min(tokens.len() - i);
        match (1..=longest)
            .rev()
            .find(|&len| dict.entries.contains_key(&tokens[i..i + len]))
        {
            Some(len) => {
                out.push(Segment::Phrase { start: i, len });
                i += len;
            }
            None => {
                out.push(Segment::Unmatched { at: i });
                i += 1;
            }
        }
    }
    out
}

/// The four query translation strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MethodKind {
    /// MT on the full description.
    MtSentence,
    /// MT on each extracted content word or phrase.
    MtPhrase,
    /// Dictionary translation with collection-statistics disambiguation.
    DictPhrase,
    /// Sum of `MtPhrase` and `DictPhrase` term frequencies.
    Combined,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [
        MethodKind::MtSentence,
        MethodKind::MtPhrase,
        MethodKind::DictPhrase,
        MethodKind::Combined,
    ];

    /// Short label: `MTS`, `MTP`, `PBT` or `MPBT`.
    pub fn label(self) -> &'static str {
        match self {
            MethodKind::MtSentence => "MTS",
            MethodKind::MtPhrase => "MTP",
            MethodKind::DictPhrase => "PBT",
            MethodKind::Combined => "MPBT",
        }
    }

    pub fn needs_adapter(self) -> bool {
        !matches!(self, MethodKind::DictPhrase)
    }

    pub fn needs_dictionary(self) -> bool {
        matches!(self, MethodKind::DictPhrase | MethodKind::Combined)
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Whole-description or phrase-wise MT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtMode {
    Sentence,
    Phrase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslateError {
    Adapter(AdapterError),
    Corpus(CorpusError),
    Config(ConfigError),
    MissingResource {
        method: MethodKind,
        what: &'static str,
    },
}

impl fmt::Display for TranslateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslateError::Adapter(e) => e.fmt(f),
            TranslateError::Corpus(e) => e.fmt(f),
            TranslateError::Config(e) => e.fmt(f),
            TranslateError::MissingResource { method, what } => {
                write!(f, "{method} translation requires {what}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TranslateError {}

impl From<AdapterError> for TranslateError {
    fn from(e: AdapterError) -> Self {
        TranslateError::Adapter(e)
    }
}

impl From<CorpusError> for TranslateError {
    fn from(e: CorpusError) -> Self {
        TranslateError::Corpus(e)
    }
}

impl From<ConfigError> for TranslateError {
    fn from(e: ConfigError) -> Self {
        TranslateError::Config(e)
    }
}

/// Target-language query terms plus the source tokens nothing translated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslatedQuery {
    pub lang: Lang,
    pub terms: TermVector,
    pub method: MethodKind,
    pub unresolved: Vec<String>,
}

impl TranslatedQuery {
    pub fn empty(lang: Lang, method: MethodKind) -> Self {
        TranslatedQuery {
            lang,
            terms: TermVector::new(),
            method,
            unresolved: Vec::new(),
        }
    }
}

fn pick_candidate<'c>(
    candidates: &'c [String],
    index: &InvertedIndex,
    tgt_cfg: &AnalyzerConfig,
) -> Option<(&'c String, Vec<String>)> {
    let mut best: Option<(&String, Vec<String>, usize)> = None;
    for cand in candidates {
        let terms = tokenize(cand, tgt_cfg);
        if terms.is_empty() {
            continue;
        }
        let df = index.conjunctive_df(terms.iter().map(String::as_str));
        let better = match &best {
            None => true,
            Some((b, _, bdf)) => df > *bdf || (df == *bdf && cand < *b),
        };
        if better {
            best = Some((cand, terms, df));
        }
    }
    best.map(|(c, t, _)| (c, t))
}

/// Dictionary translation of `query` with max-document-frequency
/// disambiguation against `target_index`.
///
/// A multi-word candidate's frequency is the number of target documents
/// containing all of its terms. Equal frequencies go to the
/// lexicographically smallest candidate.
pub fn translate_query_dict(
    query: &Query,
    dict: &BilingualDictionary,
    target_index: &InvertedIndex,
    src_cfg: &AnalyzerConfig,
    tgt_cfg: &AnalyzerConfig,
) -> TranslatedQuery {
    let tokens = tokenize(&query.description, src_cfg);
    let mut out = TranslatedQuery::empty(tgt_cfg.lang.clone(), MethodKind::DictPhrase);
    for seg in segment(&tokens, dict) {
        match seg {
            Segment::Phrase { start, len } => {
                let cands = &dict.entries[&tokens[start..start + len]];
                if let Some((_, terms)) = pick_candidate(cands, target_index, tgt_cfg) {
                    for t in terms {
                        out.terms.add(t, 1);
                    }
                }
            }
            Segment::Unmatched { at } => out.unresolved.push(tokens[at].clone()),
        }
    }
    out
}

/// MT translation of `query`.
///
/// Sentence mode translates the whole description and analyzes the output.
/// Phrase mode analyzes the description first, splits it into content
/// words and, when `phrases` is given, the longest multi-word phrases that
/// dictionary lists; each unit is translated on its own and the analyzed
/// outputs are summed.
pub fn translate_query_mt(
    query: &Query,
    adapter: &dyn MtAdapter,
    mode: MtMode,
    src_cfg: &AnalyzerConfig,
    tgt_cfg: &AnalyzerConfig,
    phrases: Option<&BilingualDictionary>,
) -> Result<TranslatedQuery, TranslateError> {
    let method = match mode {
        MtMode::Sentence => MethodKind::MtSentence,
        MtMode::Phrase => MethodKind::MtPhrase,
    };
    let mut out = TranslatedQuery::empty(tgt_cfg.lang.clone(), method);
    if query.description.trim().is_empty() {
        return Ok(out);
    }
    match mode {
        MtMode::Sentence => {
            let text = adapter.translate(&query.description, &query.lang, &tgt_cfg.lang)?;
            out.terms = analyze(&text, tgt_cfg);
        }
        MtMode::Phrase => {
            for unit in content_units(&query.description, src_cfg, phrases) {
                let text = adapter.translate(&unit, &query.lang, &tgt_cfg.lang)?;
                out.terms.merge(&analyze(&text, tgt_cfg));
            }
        }
    }
    Ok(out)
}

/// Content words and dictionary phrases of `text`, in order.
pub fn content_units(
    text: &str,
    src_cfg: &AnalyzerConfig,
    phrases: Option<&BilingualDictionary>,
) -> Vec<String> {
    let tokens = tokenize(text, src_cfg);
    match phrases {
        None => tokens,
        Some(dict) => segment(&tokens, dict)
            .into_iter()
            .map(|seg| match seg {
                Segment::Phrase { start, len } => tokens[start..start + len].join(" "),
                Segment::Unmatched { at } => tokens[at].clone(),
            })
            .collect(),
    }
}

/// Adds the term frequencies of `a` and `b`; unresolved tokens are those
/// neither method could translate.
pub fn combine_translations(
    a: &TranslatedQuery,
    b: &TranslatedQuery,
) -> Result<TranslatedQuery, TranslateError> {
    if a.lang != b.lang {
        return Err(ConfigError::LangMismatch {
            expected: a.lang.clone(),
            found: b.lang.clone(),
        }
        .into());
    }
    let mut terms = a.terms.clone();
    terms.merge(&b.terms);
    let unresolved = a
        .unresolved
        .iter()
        .filter(|t| b.unresolved.contains(t))
        .cloned()
        .collect();
    Ok(TranslatedQuery {
        lang: a.lang.clone(),
        terms,
        method: MethodKind::Combined,
        unresolved,
    })
}

/// A query translation method with the resources it needs.
#[derive(Clone, Copy)]
pub struct TranslationMethod<'a> {
    kind: MethodKind,
    adapter: Option<&'a dyn MtAdapter>,
    dictionary: Option<&'a BilingualDictionary>,
}

impl fmt::Debug for TranslationMethod<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TranslationMethod")
            .field("kind", &self.kind)
            .field("adapter", &self.adapter.is_some())
            .field("dictionary", &self.dictionary.is_some())
            .finish()
    }
}

impl<'a> TranslationMethod<'a> {
    /// Checks that `kind` has the adapter and/or dictionary it requires.
    pub fn new(
        kind: MethodKind,
        adapter: Option<&'a dyn MtAdapter>,
        dictionary: Option<&'a BilingualDictionary>,
    ) -> Result<Self, TranslateError> {
        if kind.needs_adapter() && adapter.is_none() {
            return Err(TranslateError::MissingResource {
                method: kind,
                what: "an MT adapter",
            });
        }
        if kind.needs_dictionary() && dictionary.is_none() {
            return Err(TranslateError::MissingResource {
                method: kind,
                what: "a bilingual dictionary",
            });
        }
        Ok(TranslationMethod {
            kind,
            adapter,
            dictionary,
        })
    }

    pub fn kind(&self) -> MethodKind {
        self.kind
    }

    pub fn adapter(&self) -> Option<&'a dyn MtAdapter> {
        self.adapter
    }

    pub fn dictionary(&self) -> Option<&'a BilingualDictionary> {
        self.dictionary
    }

    pub fn translate(
        &self,
        query: &Query,
        target_index: &InvertedIndex,
        src_cfg: &AnalyzerConfig,
        tgt_cfg: &AnalyzerConfig,
    ) -> Result<TranslatedQuery, TranslateError> {
        // new() guarantees the resources each arm unwraps.
        match self.kind {
            MethodKind::MtSentence => translate_query_mt(
                query,
                self.adapter.unwrap(),
                MtMode::Sentence,
                src_cfg,
                tgt_cfg,
                self.dictionary,
            ),
            MethodKind::MtPhrase => translate_query_mt(
                query,
                self.adapter.unwrap(),
                MtMode::Phrase,
                src_cfg,
                tgt_cfg,
                self.dictionary,
            ),
            MethodKind::DictPhrase => Ok(translate_query_dict(
                query,
                self.dictionary.unwrap(),
                target_index,
                src_cfg,
                tgt_cfg,
            )),
            MethodKind::Combined => {
                let dict = self.dictionary.unwrap();
                let mt = translate_query_mt(
                    query,
                    self.adapter.unwrap(),
                    MtMode::Phrase,
                    src_cfg,
                    tgt_cfg,
                    Some(dict),
                )?;
                let pbt = translate_query_dict(query, dict, target_index, src_cfg, tgt_cfg);
                combine_translations(&mt, &pbt)
            }
        }
    }
}

/// Where translated documents come from.
#[derive(Clone, Copy)]
pub enum DocChannel<'a> {
    /// Pass title, keywords and abstract through an MT adapter.
    Mt {
        adapter: &'a dyn MtAdapter,
        target: &'a Lang,
    },
    /// Use the comparable document in the other language.
    Ht,
}

impl fmt::Debug for DocChannel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocChannel::Mt { target, .. } => f.debug_struct("Mt").field("target", target).finish(),
            DocChannel::Ht => f.write_str("Ht"),
        }
    }
}

/// Translates `doc` into the query language.
///
/// The MT channel keeps the document id and swaps the language tag; the HT
/// channel returns the comparable document verbatim.
pub fn translate_document(
    doc: &Document,
    channel: DocChannel<'_>,
    corpus: &Corpus,
) -> Result<Document, TranslateError> {
    match channel {
        DocChannel::Ht => Ok(corpus.pair_lookup(&doc.doc_id)?.clone()),
        DocChannel::Mt { adapter, target } => {
            let tr = |text: &str| -> Result<String, AdapterError> {
                if text.trim().is_empty() {
                    Ok(String::new())
                } else {
                    adapter.translate(text, &doc.lang, target)
                }
            };
            Ok(Document {
                doc_id: doc.doc_id.clone(),
                lang: target.clone(),
                title: tr(&doc.title)?,
                keywords: doc
                    .keywords
                    .iter()
                    .map(|k| tr(k))
                    .collect::<Result<_, _>>()?,
                abstract_text: tr(&doc.abstract_text)?,
                pair_id: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;
    use alloc::format;
    use alloc::vec;

    fn en() -> AnalyzerConfig {
        AnalyzerConfig::words("en")
    }

    fn ja() -> AnalyzerConfig {
        AnalyzerConfig::words("ja")
    }

    fn q(text: &str) -> Query {
        Query::new("q", "ja", text).unwrap()
    }

    fn tv(pairs: &[(&str, u32)]) -> TermVector {
        let mut v = TermVector::new();
        v.extend(pairs.iter().copied());
        v
    }

    /// 10 synthetic documents: `x` in 3 of them, `y` in 9.
    fn df_index() -> InvertedIndex {
        let docs: Vec<Document> = (0..10)
            .map(|i| {
                let mut text = String::from("filler");
                if i < 3 {
                    text.push_str(" x");
                }
                if i >= 1 {
                    text.push_str(" y");
                }
                Document::new(format!("d{i}"), "en").with_abstract(text)
            })
            .collect();
        build_index(&docs, &en()).unwrap()
    }

    struct Failing;
    impl MtAdapter for Failing {
        fn translate(&self, text: &str, _: &Lang, _: &Lang) -> Result<String, AdapterError> {
            Err(AdapterError {
                input: text.into(),
                message: "exit status 1".into(),
            })
        }
    }

    #[test]
    fn highest_df_candidate_wins() {
        let idx = df_index();
        assert_eq!((idx.df("x"), idx.df("y")), (3, 9));
        let mut dict = BilingualDictionary::new("ja", "en");
        dict.insert("src", ["x", "y"], &ja());
        let got = translate_query_dict(&q("src"), &dict, &idx, &ja(), &en());
        assert_eq!(got.terms, tv(&[("y", 1)]));
        assert!(got.unresolved.is_empty());
    }

    #[test]
    fn equal_df_picks_smallest_candidate() {
        let idx = df_index();
        let mut dict = BilingualDictionary::new("ja", "en");
        dict.insert("src", ["zz", "aa"], &ja());
        let got = translate_query_dict(&q("src"), &dict, &idx, &ja(), &en());
        assert_eq!(got.terms, tv(&[("aa", 1)]));
    }

    #[test]
    fn longest_match_prefers_phrase_entry() {
        let idx = df_index();
        let mut dict = BilingualDictionary::new("ja", "en");
        dict.insert("denshi toshokan", ["digital library"], &ja());
        dict.insert("denshi", ["electronic"], &ja());
        dict.insert("toshokan", ["library"], &ja());
        let tokens: Vec<String> = vec!["denshi".into(), "toshokan".into()];
        assert_eq!(
            segment(&tokens, &dict),
            [Segment::Phrase { start: 0, len: 2 }]
        );
        let got = translate_query_dict(&q("denshi toshokan"), &dict, &idx, &ja(), &en());
        assert_eq!(got.terms, tv(&[("digital", 1), ("library", 1)]));
    }

    #[test]
    fn unknown_token_is_unresolved() {
        let idx = df_index();
        let mut dict = BilingualDictionary::new("ja", "en");
        dict.insert("toshokan", ["library"], &ja());
        let got = translate_query_dict(&q("toshokan mobairu"), &dict, &idx, &ja(), &en());
        assert_eq!(got.unresolved, ["mobairu"]);
        assert!(!got.terms.contains("mobairu"));
    }

    #[test]
    fn sentence_mode_uses_table_output() {
        let text = "middleware construction in network collaboration";
        let mut table = TableAdapter::new();
        table.insert(text, "middleware construction network collaboration");
        let got =
            translate_query_mt(&q(text), &table, MtMode::Sentence, &ja(), &en(), None).unwrap();
        assert_eq!(
            got.terms,
            tv(&[
                ("middleware", 1),
                ("construction", 1),
                ("network", 1),
                ("collaboration", 1)
            ])
        );
        assert_eq!(got.method, MethodKind::MtSentence);
    }

    #[test]
    fn empty_description_gives_empty_translation() {
        let query = Query {
            query_id: "q".into(),
            lang: "ja".into(),
            description: String::new(),
        };
        for mode in [MtMode::Sentence, MtMode::Phrase] {
            let got = translate_query_mt(&query, &Failing, mode, &ja(), &en(), None).unwrap();
            assert!(got.terms.is_empty());
        }
    }

    #[test]
    fn identity_adapter_reproduces_source_terms() {
        let text = "Alpha beta beta gamma";
        for mode in [MtMode::Sentence, MtMode::Phrase] {
            let got =
                translate_query_mt(&q(text), &IdentityAdapter, mode, &ja(), &en(), None).unwrap();
            assert_eq!(got.terms, analyze(text, &ja()));
        }
    }

    #[test]
    fn phrase_mode_translates_units_separately() {
        let mut dict = BilingualDictionary::new("ja", "en");
        dict.insert("denshi toshokan", ["digital library"], &ja());
        let mut table = TableAdapter::new();
        table.insert("denshi toshokan", "digital library");
        table.insert("denshi", "electronic");
        table.insert("kensaku", "retrieval");
        assert_eq!(
            content_units("denshi toshokan kensaku", &ja(), Some(&dict)),
            ["denshi toshokan", "kensaku"]
        );
        let got = translate_query_mt(
            &q("denshi toshokan kensaku"),
            &table,
            MtMode::Phrase,
            &ja(),
            &en(),
            Some(&dict),
        )
        .unwrap();
        assert_eq!(
            got.terms,
            tv(&[("digital", 1), ("library", 1), ("retrieval", 1)])
        );
    }

    #[test]
    fn adapter_failure_names_input() {
        let err = translate_query_mt(&q("abc"), &Failing, MtMode::Sentence, &ja(), &en(), None)
            .unwrap_err();
        match err {
            TranslateError::Adapter(e) => assert_eq!(e.input, "abc"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn combine_doubles_shared_terms() {
        let mk = |terms: &[(&str, u32)], unresolved: &[&str]| TranslatedQuery {
            lang: "en".into(),
            terms: tv(terms),
            method: MethodKind::MtPhrase,
            unresolved: unresolved.iter().map(|s| String::from(*s)).collect(),
        };
        let a = mk(&[("a", 1), ("b", 1)], &["u", "v"]);
        let b = mk(&[("b", 1), ("c", 1)], &["v", "w"]);
        let got = combine_translations(&a, &b).unwrap();
        assert_eq!(got.terms, tv(&[("a", 1), ("b", 2), ("c", 1)]));
        assert_eq!(got.unresolved, ["v"]);
        assert_eq!(got.method, MethodKind::Combined);

        let empty = mk(&[], &[]);
        assert_eq!(combine_translations(&a, &empty).unwrap().terms, a.terms);

        let t = mk(&[("t", 1)], &[]);
        assert_eq!(combine_translations(&t, &t).unwrap().terms, tv(&[("t", 2)]));
    }

    #[test]
    fn combine_rejects_language_mismatch() {
        let a = TranslatedQuery::empty("en".into(), MethodKind::MtPhrase);
        let b = TranslatedQuery::empty("de".into(), MethodKind::DictPhrase);
        assert!(matches!(
            combine_translations(&a, &b),
            Err(TranslateError::Config(ConfigError::LangMismatch { .. }))
        ));
    }

    #[test]
    fn method_requires_resources() {
        let dict = BilingualDictionary::new("ja", "en");
        assert!(TranslationMethod::new(MethodKind::MtSentence, None, Some(&dict)).is_err());
        assert!(TranslationMethod::new(MethodKind::DictPhrase, None, None).is_err());
        assert!(
            TranslationMethod::new(MethodKind::Combined, Some(&IdentityAdapter), None).is_err()
        );
        assert!(TranslationMethod::new(MethodKind::DictPhrase, None, Some(&dict)).is_ok());
        assert!(
            TranslationMethod::new(MethodKind::Combined, Some(&IdentityAdapter), Some(&dict))
                .is_ok()
        );
    }

    fn pair_corpus() -> Corpus {
        Corpus::from_documents(
            ["en".into(), "ja".into()],
            vec![
                Document::new("e1", "en")
                    .with_title("digital library")
                    .with_keywords(["library", "search"])
                    .with_abstract("A library of software.")
                    .with_pair("j1"),
                Document::new("j1", "ja")
                    .with_title("denshi toshokan")
                    .with_pair("e1"),
                Document::new("e2", "en").with_title("lonely"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn ht_channel_returns_pair() {
        let corpus = pair_corpus();
        let got = translate_document(corpus.get("e1").unwrap(), DocChannel::Ht, &corpus).unwrap();
        assert_eq!(&got, corpus.get("j1").unwrap());
        let err = translate_document(corpus.get("e2").unwrap(), DocChannel::Ht, &corpus);
        assert!(matches!(
            err,
            Err(TranslateError::Corpus(CorpusError::NoPair(_)))
        ));
    }

    #[test]
    fn identity_channel_only_changes_language() {
        let corpus = pair_corpus();
        let ja = Lang::new("ja");
        let doc = corpus.get("e1").unwrap();
        let got = translate_document(
            doc,
            DocChannel::Mt {
                adapter: &IdentityAdapter,
                target: &ja,
            },
            &corpus,
        )
        .unwrap();
        assert_eq!(got.lang, ja);
        assert_eq!(
            (&got.doc_id, &got.title, &got.keywords, &got.abstract_text),
            (&doc.doc_id, &doc.title, &doc.keywords, &doc.abstract_text)
        );
    }

    #[test]
    fn table_channel_translates_fields() {
        let corpus = pair_corpus();
        let ja = Lang::new("ja");
        let mut table = TableAdapter::new();
        table.insert("library", "toshokan");
        let got = translate_document(
            corpus.get("e1").unwrap(),
            DocChannel::Mt {
                adapter: &table,
                target: &ja,
            },
            &corpus,
        )
        .unwrap();
        assert!(got.abstract_text.contains("toshokan"));
        assert_eq!(got.keywords, ["toshokan", "search"]);
    }

    #[test]
    fn table_adapter_longest_match_and_passthrough() {
        let mut table = TableAdapter::new();
        table.insert("digital library", "denshi-toshokan");
        table.insert("library", "toshokan");
        table.insert("the", "");
        assert_eq!(
            table.apply("The Digital Library and a library."),
            "denshi-toshokan and a toshokan"
        );
    }
}
