//! Inverted index and stage-one retrieval with "atc" weighting.
//!
//! Weights are augmented term frequency times natural-log IDF,
//!
//! ```text
//! w(t, d) = (0.5 + 0.5 * tf / max_tf(d)) * ln(num_docs / df(t))
//! ```
//!
//! applied to queries and documents alike, and scores are the cosine of the
//! two weight vectors. Documents are numbered in ascending `doc_id` order, so
//! posting lists sorted by number are also sorted by id.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::analysis::{analyze, AnalyzerConfig, TermVector};
use crate::corpus::{Document, Lang};
use crate::math;

/// One (document, frequency) pair of a posting list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    /// Position of the document in [`InvertedIndex::doc_ids`].
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexError {
    EmptyCollection,
    LangMismatch {
        doc_id: String,
        expected: Lang,
        found: Lang,
    },
    DuplicateDoc(String),
    /// Raw parts handed to [`InvertedIndex::from_parts`] break an invariant.
    Inconsistent(String),
}

impl fmt::Display for IndexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexError::EmptyCollection => f.write_str("empty collection"),
            IndexError::LangMismatch {
                doc_id,
                expected,
                found,
            } => write!(
                f,
                "document {doc_id:?} is {found} but the analyzer is configured for {expected}"
            ),
            IndexError::DuplicateDoc(id) => write!(f, "duplicate document {id:?} in index input"),
            IndexError::Inconsistent(why) => write!(f, "inconsistent index: {why}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for IndexError {}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    lang: Lang,
    num_docs: usize,
    /// Ids of documents with at least one term, ascending.
    doc_ids: Vec<String>,
    max_tf: Vec<u32>,
    doc_norms: Vec<f64>,
    postings: BTreeMap<String, Vec<Posting>>,
}

/// The atc weight of one term occurrence. Cosine normalization is applied
/// separately, at vector level.
pub fn weight_atc(tf: u32, max_tf: u32, df: usize, num_docs: usize) -> f64 {
    let augmented = 0.5 + 0.5 * f64::from(tf) / f64::from(max_tf);
    augmented * math::ln(num_docs as f64 / df as f64)
}

/// Builds an index over `docs`, which must all be in `cfg.lang`.
///
/// Documents whose analyzed text is empty count towards `num_docs` but get
/// no postings.
pub fn build_index<'a, I>(docs: I, cfg: &AnalyzerConfig) -> Result<InvertedIndex, IndexError>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut vectors: BTreeMap<&str, TermVector> = BTreeMap::new();
    let mut num_docs = 0usize;
    for doc in docs {
        if doc.lang != cfg.lang {
            return Err(IndexError::LangMismatch {
                doc_id: doc.doc_id.clone(),
                expected: cfg.lang.clone(),
                found: doc.lang.clone(),
            });
        }
        num_docs += 1;
        let tv = analyze(&doc.indexable_text(), cfg);
        if vectors.insert(doc.doc_id.as_str(), tv).is_some() {
            return Err(IndexError::DuplicateDoc(doc.doc_id.clone()));
        }
    }
    if num_docs == 0 {
        return Err(IndexError::EmptyCollection);
    }

    let mut doc_ids = Vec::new();
    let mut max_tf = Vec::new();
    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    for (id, tv) in vectors.into_iter().filter(|(_, tv)| !tv.is_empty()) {
        let doc = doc_ids.len() as u32;
        doc_ids.push(String::from(id));
        max_tf.push(tv.max_tf());
        for (term, tf) in tv.iter() {
            postings
                .entry(String::from(term))
                .or_default()
                .push(Posting { doc, tf });
        }
    }
    Ok(InvertedIndex::assemble(
        cfg.lang.clone(),
        num_docs,
        doc_ids,
        max_tf,
        postings,
    ))
}

impl InvertedIndex {
    fn assemble(
        lang: Lang,
        num_docs: usize,
        doc_ids: Vec<String>,
        max_tf: Vec<u32>,
        postings: BTreeMap<String, Vec<Posting>>,
    ) -> Self {
        // Norms are summed term by term in ascending term order, which is the
        // order a per-document BTreeMap walk would use.
        let mut sq = vec![0.0f64; doc_ids.len()];
        for list in postings.values() {
            let df = list.len();
            for p in list {
                let w = weight_atc(p.tf, max_tf[p.doc as usize], df, num_docs);
                sq[p.doc as usize] += w * w;
            }
        }
        let doc_norms = sq.into_iter().map(math::sqrt).collect();
        InvertedIndex {
            lang,
            num_docs,
            doc_ids,
            max_tf,
            doc_norms,
            postings,
        }
    }

    /// Rebuilds an index from persisted parts, checking every invariant.
    ///
    /// `postings` maps each term to `(doc_id, tf)` pairs; per-document
    /// maximum frequencies and norms are recomputed.
    pub fn from_parts(
        lang: Lang,
        num_docs: usize,
        postings: BTreeMap<String, Vec<(String, u32)>>,
    ) -> Result<Self, IndexError> {
        if num_docs == 0 {
            return Err(IndexError::EmptyCollection);
        }
        let mut ids: BTreeMap<&str, u32> = BTreeMap::new();
        for list in postings.values() {
            for (id, _) in list {
                ids.insert(id.as_str(), 0);
            }
        }
        if ids.len() > num_docs {
            return Err(IndexError::Inconsistent(alloc::format!(
                "{} indexed documents but num_docs = {num_docs}",
                ids.len()
            )));
        }
        for (i, n) in ids.values_mut().enumerate() {
            *n = i as u32;
        }
        let doc_ids: Vec<String> = ids.keys().map(|s| String::from(*s)).collect();
        let mut max_tf = vec![0u32; doc_ids.len()];
        let mut out: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        for (term, list) in &postings {
            if list.is_empty() {
                return Err(IndexError::Inconsistent(alloc::format!(
                    "term {term:?} has an empty posting list"
                )));
            }
            let mut converted = Vec::with_capacity(list.len());
            for (id, tf) in list {
                if *tf == 0 {
                    return Err(IndexError::Inconsistent(alloc::format!(
                        "zero frequency for {term:?} in {id:?}"
                    )));
                }
                let doc = ids[id.as_str()];
                max_tf[doc as usize] = max_tf[doc as usize].max(*tf);
                converted.push(Posting { doc, tf: *tf });
            }
            converted.sort_by_key(|p| p.doc);
            if converted.windows(2).any(|w| w[0].doc == w[1].doc) {
                return Err(IndexError::Inconsistent(alloc::format!(
                    "term {term:?} lists a document twice"
                )));
            }
            out.insert(term.clone(), converted);
        }
        Ok(Self::assemble(lang, num_docs, doc_ids, max_tf, out))
    }

    pub fn lang(&self) -> &Lang {
        &self.lang
    }

    /// Collection size, including documents with no indexable terms.
    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    /// Ids of documents with postings, ascending.
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_id(&self, doc: u32) -> &str {
        &self.doc_ids[doc as usize]
    }

    fn doc_number(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids
            .binary_search_by(|probe| probe.as_str().cmp(doc_id))
            .ok()
    }

    /// Maximum term frequency of `doc_id`; `None` for unknown or empty documents.
    pub fn max_tf(&self, doc_id: &str) -> Option<u32> {
        self.doc_number(doc_id).map(|i| self.max_tf[i])
    }

    /// Cosine denominator of `doc_id`'s atc vector.
    ///
    /// Zero when every term of the document occurs in all documents.
    pub fn doc_norm(&self, doc_id: &str) -> Option<f64> {
        self.doc_number(doc_id).map(|i| self.doc_norms[i])
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    /// Terms in ascending order with their posting lists.
    pub fn terms(&self) -> impl Iterator<Item = (&str, &[Posting])> + '_ {
        self.postings
            .iter()
            .map(|(t, l)| (t.as_str(), l.as_slice()))
    }

    pub fn num_terms(&self) -> usize {
        self.postings.len()
    }

    /// Number of documents containing every term in `terms`. An empty term
    /// list matches nothing.
    pub fn conjunctive_df<'t, I>(&self, terms: I) -> usize
    where
        I: IntoIterator<Item = &'t str>,
    {
        let mut lists: Vec<&[Posting]> = terms.into_iter().map(|t| self.postings(t)).collect();
        if lists.is_empty() {
            return 0;
        }
        lists.sort_by_key(|l| l.len());
        let (first, rest) = lists.split_first().unwrap();
        first
            .iter()
            .filter(|p| {
                rest.iter()
                    .all(|l| l.binary_search_by_key(&p.doc, |q| q.doc).is_ok())
            })
            .count()
    }

    /// The atc weight vector of an analyzed query against this collection.
    /// Terms absent from the index are dropped.
    pub fn query_weights<'q>(&self, query: &'q TermVector) -> Vec<(&'q str, f64)> {
        let max_tf = query.max_tf();
        query
            .iter()
            .filter_map(|(term, tf)| {
                let df = self.df(term);
                (df > 0).then(|| (term, weight_atc(tf, max_tf, df, self.num_docs)))
            })
            .collect()
    }
}

/// A document and its score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc_id: String,
    pub score: f64,
}

/// Scored documents in descending score order, ties by ascending id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<ScoredDoc>,
}

impl RankedList {
    pub fn new(query_id: impl Into<String>) -> Self {
        RankedList {
            query_id: query_id.into(),
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|e| e.doc_id.as_str())
    }

    pub fn truncated(&self, n: usize) -> RankedList {
        RankedList {
            query_id: self.query_id.clone(),
            entries: self.entries.iter().take(n).cloned().collect(),
        }
    }

    /// Checks ordering, finiteness and id uniqueness.
    pub fn is_well_formed(&self) -> bool {
        let ordered = self.entries.windows(2).all(|w| w[0].score >= w[1].score);
        let finite = self
            .entries
            .iter()
            .all(|e| e.score.is_finite() && e.score >= 0.0);
        let mut ids: Vec<&str> = self.doc_ids().collect();
        ids.sort_unstable();
        let distinct = ids.windows(2).all(|w| w[0] != w[1]);
        ordered && finite && distinct
    }
}

/// Descending score, then ascending id.
pub(crate) fn rank_order(a_score: f64, a_id: &str, b_score: f64, b_id: &str) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_id.cmp(b_id))
}

/// Stage-one retrieval: cosine similarity between atc-weighted query and
/// document vectors, best `top_n` documents with a positive score.
pub fn search(
    index: &InvertedIndex,
    query_id: &str,
    query: &TermVector,
    top_n: usize,
) -> RankedList {
    let weights = index.query_weights(query);
    let q_norm = math::sqrt(weights.iter().map(|(_, w)| w * w).sum::<f64>());
    let mut out = RankedList::new(query_id);
    if q_norm == 0.0 || top_n == 0 {
        return out;
    }

    let mut acc = vec![0.0f64; index.doc_ids.len()];
    for (term, wq) in &weights {
        let list = index.postings(term);
        let df = list.len();
        for p in list {
            let wd = weight_atc(p.tf, index.max_tf[p.doc as usize], df, index.num_docs);
            acc[p.doc as usize] += wq * wd;
        }
    }

    let mut hits: Vec<(u32, f64)> = acc
        .into_iter()
        .enumerate()
        .filter_map(|(doc, dot)| {
            let d_norm = index.doc_norms[doc];
            if dot <= 0.0 || d_norm == 0.0 {
                return None;
            }
            Some((doc as u32, (dot / (q_norm * d_norm)).min(1.0)))
        })
        .collect();
    // Doc numbers follow id order, so comparing numbers breaks ties by id.
    let by_rank = |a: &(u32, f64), b: &(u32, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if hits.len() > top_n {
        hits.select_nth_unstable_by(top_n - 1, by_rank);
        hits.truncate(top_n);
    }
    hits.sort_unstable_by(by_rank);
    out.entries = hits
        .into_iter()
        .map(|(doc, score)| ScoredDoc {
            doc_id: index.doc_id(doc).into(),
            score,
        })
        .collect();
    out
}

/// Cosine of two sparse non-negative weight vectors; 0 if either is all-zero.
pub fn cosine_similarity(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(t, w)| large.get(t).map(|v| w * v))
        .sum();
    let na = math::sqrt(a.values().map(|w| w * w).sum::<f64>());
    let nb = math::sqrt(b.values().map(|w| w * w).sum::<f64>());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::AnalyzerConfig;
    use alloc::string::ToString;

    fn cfg() -> AnalyzerConfig {
        AnalyzerConfig::words("en")
    }

    fn docs(texts: &[(&str, &str)]) -> Vec<Document> {
        texts
            .iter()
            .map(|(id, t)| Document::new(*id, "en").with_abstract(*t))
            .collect()
    }

    fn wv(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(t, w)| (t.to_string(), *w)).collect()
    }

    #[test]
    fn postings_and_df() {
        let d = docs(&[("d1", "a a b"), ("d2", "b c"), ("d3", "c")]);
        let idx = build_index(&d, &cfg()).unwrap();
        let a = idx.postings("a");
        assert_eq!(a.len(), 1);
        assert_eq!((idx.doc_id(a[0].doc), a[0].tf), ("d1", 2));
        assert_eq!(idx.df("a"), 1);
        assert_eq!(idx.df("b"), 2);
        assert_eq!(idx.df("c"), 2);
        assert_eq!(idx.df("zzz"), 0);
        assert_eq!(idx.max_tf("d1"), Some(2));
        assert_eq!(idx.num_docs(), 3);
    }

    #[test]
    fn empty_collection_is_an_error() {
        assert_eq!(build_index(&[], &cfg()), Err(IndexError::EmptyCollection));
    }

    #[test]
    fn language_mismatch_is_an_error() {
        let d = [Document::new("j1", "ja").with_title("x")];
        assert!(matches!(
            build_index(&d, &cfg()),
            Err(IndexError::LangMismatch { .. })
        ));
    }

    #[test]
    fn empty_documents_count_but_have_no_postings() {
        let d = docs(&[("d1", "a"), ("d2", ""), ("d3", "b")]);
        let idx = build_index(&d, &cfg()).unwrap();
        assert_eq!(idx.num_docs(), 3);
        assert_eq!(idx.doc_ids(), ["d1", "d3"]);
        assert_eq!(idx.max_tf("d2"), None);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight_atc(3, 3, 1, 1), 0.0);
        // augmented factor is exactly 1 at tf = max_tf
        assert_eq!(weight_atc(5, 5, 2, 8), (4.0f64).ln());
        // 0.625 * ln 8, evaluated independently
        assert!((weight_atc(1, 4, 1, 8) - 1.299_650_963_549_897_4).abs() < 1e-12);
    }

    #[test]
    fn single_holder_ranks_first() {
        let d = docs(&[("d1", "x y"), ("d2", "y z"), ("d3", "z w")]);
        let idx = build_index(&d, &cfg()).unwrap();
        let q: TermVector = ["x"].into_iter().collect();
        let hits = search(&idx, "q", &q, 10);
        assert_eq!(hits.entries[0].doc_id, "d1");
        assert_eq!(hits.len(), 1);
    }

    #[test]
    fn unknown_query_terms_give_empty_list() {
        let d = docs(&[("d1", "x y"), ("d2", "y z")]);
        let idx = build_index(&d, &cfg()).unwrap();
        let q: TermVector = ["nothing", "here"].into_iter().collect();
        assert!(search(&idx, "q", &q, 10).is_empty());
    }

    #[test]
    fn zero_idf_terms_score_nothing() {
        let d = docs(&[("d1", "x"), ("d2", "x")]);
        let idx = build_index(&d, &cfg()).unwrap();
        assert_eq!(idx.doc_norm("d1"), Some(0.0));
        let q: TermVector = ["x"].into_iter().collect();
        assert!(search(&idx, "q", &q, 10).is_empty());
    }

    #[test]
    fn ties_break_by_doc_id() {
        let d = docs(&[("b", "x y"), ("a", "x y"), ("c", "z")]);
        let idx = build_index(&d, &cfg()).unwrap();
        let q: TermVector = ["x"].into_iter().collect();
        let hits = search(&idx, "q", &q, 10);
        assert_eq!(hits.doc_ids().collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn conjunctive_df_intersects() {
        let d = docs(&[("d1", "a b"), ("d2", "a"), ("d3", "a b c")]);
        let idx = build_index(&d, &cfg()).unwrap();
        assert_eq!(idx.conjunctive_df(["a", "b"]), 2);
        assert_eq!(idx.conjunctive_df(["a", "q"]), 0);
        assert_eq!(idx.conjunctive_df([]), 0);
    }

    #[test]
    fn from_parts_matches_build() {
        let d = docs(&[
            ("d1", "a a b"),
            ("d2", "b c"),
            ("d3", ""),
            ("d4", "c d d d"),
        ]);
        let built = build_index(&d, &cfg()).unwrap();
        let parts = built
            .terms()
            .map(|(t, l)| {
                let list = l
                    .iter()
                    .map(|p| (built.doc_id(p.doc).to_string(), p.tf))
                    .collect();
                (t.to_string(), list)
            })
            .collect();
        let rebuilt = InvertedIndex::from_parts(Lang::new("en"), 4, parts).unwrap();
        assert_eq!(rebuilt, built);
    }

    #[test]
    fn from_parts_rejects_bad_input() {
        let mut parts = BTreeMap::new();
        parts.insert("a".to_string(), vec![("d1".to_string(), 0)]);
        assert!(InvertedIndex::from_parts(Lang::new("en"), 1, parts).is_err());
        let mut parts = BTreeMap::new();
        parts.insert(
            "a".to_string(),
            vec![("d1".to_string(), 1), ("d2".to_string(), 1)],
        );
        assert!(InvertedIndex::from_parts(Lang::new("en"), 1, parts).is_err());
    }

    #[test]
    fn cosine_examples() {
        let v = wv(&[("a", 1.0), ("b", 2.0)]);
        assert!((cosine_similarity(&v, &v) - 1.0).abs() < 1e-15);
        assert_eq!(
            cosine_similarity(&wv(&[("a", 1.0)]), &wv(&[("b", 1.0)])),
            0.0
        );
        let got = cosine_similarity(&wv(&[("a", 1.0)]), &wv(&[("a", 1.0), ("b", 1.0)]));
        assert!((got - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine_similarity(&wv(&[]), &v), 0.0);
    }
}
