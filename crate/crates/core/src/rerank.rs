//! Stage-two re-ranking.
//!
//! Each translated document is scored against the original query by direct
//! term matching over the top `N` set only. Term weights are
//! `(1 + ln f) * ln(N / n_t)`, where `n_t` counts the translated documents
//! containing `t`, and the score is the unnormalized inner product. The
//! stage-one score (ESIM) and this score (JSIM) are combined as
//! `ESIM^alpha * JSIM^beta`, with a zero score replaced by `epsilon`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::analysis::{analyze, AnalyzerConfig, ConfigError, TermVector};
use crate::corpus::{Document, Query};
use crate::index::{rank_order, RankedList};
use crate::math;

/// `1 + ln f` for `f > 0`, and 0 for an absent term.
pub fn rerank_tf(f: u32) -> f64 {
    if f == 0 {
        0.0
    } else {
        1.0 + math::ln(f64::from(f))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RerankError {
    /// The term occurs in none of the translated documents.
    UndefinedIdf(String),
}

impl fmt::Display for RerankError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RerankError::UndefinedIdf(t) => {
                write!(
                    f,
                    "IDF undefined for {t:?}: no translated document contains it"
                )
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RerankError {}

/// Document frequencies over the translated top-`N` set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RerankStats {
    n: usize,
    doc_freq: BTreeMap<String, usize>,
    use_idf: bool,
}

impl RerankStats {
    /// Counts term occurrence over `docs`. `n` is the stage-one list size;
    /// it is raised to the number of vectors if fewer were claimed.
    pub fn new<'a, I>(n: usize, docs: I) -> Self
    where
        I: IntoIterator<Item = &'a TermVector>,
    {
        let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
        let mut seen = 0usize;
        for tv in docs {
            seen += 1;
            for term in tv.terms() {
                *doc_freq.entry(String::from(term)).or_insert(0) += 1;
            }
        }
        RerankStats {
            n: n.max(seen),
            doc_freq,
            use_idf: true,
        }
    }

    /// Disables IDF: every term then weighs `1 + ln f` alone.
    pub fn without_idf(mut self) -> Self {
        self.use_idf = false;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_t(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn uses_idf(&self) -> bool {
        self.use_idf
    }

    /// The IDF factor applied to `term`, or `None` when the term matches no
    /// document.
    fn idf_factor(&self, term: &str) -> Option<f64> {
        let n_t = self.n_t(term);
        if n_t == 0 {
            None
        } else if self.use_idf {
            Some(math::ln(self.n as f64 / n_t as f64))
        } else {
            Some(1.0)
        }
    }
}

/// `ln(N / n_t)` over the translated set.
pub fn rerank_idf(stats: &RerankStats, term: &str) -> Result<f64, RerankError> {
    match stats.n_t(term) {
        0 => Err(RerankError::UndefinedIdf(term.into())),
        n_t => Ok(math::ln(stats.n as f64 / n_t as f64)),
    }
}

/// Unnormalized inner product of the query and document weight vectors.
pub fn score_inner_product(query: &TermVector, doc: &TermVector, stats: &RerankStats) -> f64 {
    let mut sum = 0.0;
    for (term, fq) in query.iter() {
        let fd = doc.get(term);
        if fd == 0 {
            continue;
        }
        let Some(idf) = stats.idf_factor(term) else {
            continue;
        };
        sum += (rerank_tf(fq) * idf) * (rerank_tf(fd) * idf);
    }
    sum
}

/// Exponents and zero guard of the score combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombineParams {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl Default for CombineParams {
    fn default() -> Self {
        CombineParams {
            alpha: 1.0,
            beta: 1.0,
            epsilon: 0.0001,
        }
    }
}

impl CombineParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(ConfigError::InvalidParameter(
                "alpha must be finite and >= 0",
            ));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(ConfigError::InvalidParameter(
                "beta must be finite and >= 0",
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(ConfigError::InvalidParameter(
                "epsilon must be finite and > 0",
            ));
        }
        Ok(())
    }
}

/// `esim^alpha * jsim^beta` with zero scores replaced by `epsilon`.
pub fn combine_scores(esim: f64, jsim: f64, p: &CombineParams) -> f64 {
    let e = if esim > 0.0 { esim } else { p.epsilon };
    let j = if jsim > 0.0 { jsim } else { p.epsilon };
    math::powf(e, p.alpha) * math::powf(j, p.beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RerankConfig {
    pub combine: CombineParams,
    /// Apply `ln(N / n_t)` in stage-two term weights.
    pub use_idf: bool,
}

impl Default for RerankConfig {
    fn default() -> Self {
        RerankConfig {
            combine: CombineParams::default(),
            use_idf: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankedEntry {
    pub doc_id: String,
    pub esim: f64,
    pub jsim: f64,
    pub sim: f64,
    /// Whether a translation was available for this document.
    pub translated: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RerankedList {
    pub query_id: String,
    pub entries: Vec<RerankedEntry>,
}

impl RerankedList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }

    /// As a plain ranked list scored by `sim`.
    pub fn to_ranked(&self) -> RankedList {
        RankedList {
            query_id: self.query_id.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| crate::index::ScoredDoc {
                    doc_id: e.doc_id.clone(),
                    score: e.sim,
                })
                .collect(),
        }
    }
}

/// Sorts by `sim` descending, ties by ascending id.
pub fn sort_by_sim(entries: &mut [RerankedEntry]) {
    entries.sort_by(|a, b| rank_order(a.sim, &a.doc_id, b.sim, &b.doc_id));
}

/// Re-ranks `first_stage` using `translated` (keyed by stage-one doc id).
///
/// Documents without a translation get `jsim = 0` and stay in the list,
/// demoted by the zero guard.
pub fn rerank(
    first_stage: &RankedList,
    translated: &BTreeMap<String, Document>,
    source_query: &Query,
    cfg: &AnalyzerConfig,
    rc: &RerankConfig,
) -> RerankedList {
    let vectors: Vec<Option<TermVector>> = first_stage
        .entries
        .iter()
        .map(|e| {
            translated
                .get(&e.doc_id)
                .map(|d| analyze(&d.indexable_text(), cfg))
        })
        .collect();
    let mut stats = RerankStats::new(first_stage.len(), vectors.iter().flatten());
    if !rc.use_idf {
        stats = stats.without_idf();
    }
    let query = analyze(&source_query.description, cfg);

    let mut entries: Vec<RerankedEntry> = first_stage
        .entries
        .iter()
        .zip(&vectors)
        .map(|(e, v)| {
            let jsim = v
                .as_ref()
                .map_or(0.0, |d| score_inner_product(&query, d, &stats));
            RerankedEntry {
                doc_id: e.doc_id.clone(),
                esim: e.score,
                jsim,
                sim: combine_scores(e.score, jsim, &rc.combine),
                translated: v.is_some(),
            }
        })
        .collect();
    sort_by_sim(&mut entries);
    RerankedList {
        query_id: first_stage.query_id.clone(),
        entries,
    }
}
