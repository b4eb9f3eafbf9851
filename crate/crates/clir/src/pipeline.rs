//! The end-to-end flow: query translation, stage-one search of the top `N`,
//! translation of those `N` documents, and re-ranking, with wall-clock
//! timing of the translation and re-ranking phases.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::thread;
use std::time::Instant;

use clir_core::{
    rerank, search, translate_document, AnalyzerConfig, BilingualDictionary, ConfigError, Corpus,
    DocChannel, Document, InvertedIndex, MethodKind, MtAdapter, Query, RankedList, RerankConfig,
    RerankedList, ScoredDoc, TranslatedQuery, TranslationMethod,
};

use crate::error::{Error, Result};

/// Source of translated documents for re-ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocChannelKind {
    /// Machine translation through the document adapter.
    Mt,
    /// Comparable documents from the other language.
    Ht,
}

impl DocChannelKind {
    pub fn label(self) -> &'static str {
        match self {
            DocChannelKind::Mt => "MT",
            DocChannelKind::Ht => "HT",
        }
    }
}

impl FromStr for DocChannelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mt" => Ok(DocChannelKind::Mt),
            "ht" => Ok(DocChannelKind::Ht),
            _ => Err(format!(
                "unknown document channel {s:?} (expected mt or ht)"
            )),
        }
    }
}

/// What happens to stage-one hits ranked below `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailPolicy {
    /// The run is exactly the re-ranked top `N`.
    Drop,
    /// Hits `N+1..output_depth` follow the re-ranked block in stage-one order.
    Keep,
}

impl FromStr for TailPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "drop" => Ok(TailPolicy::Drop),
            "keep" => Ok(TailPolicy::Keep),
            _ => Err(format!("unknown tail policy {s:?} (expected drop or keep)")),
        }
    }
}

/// Parses `mts`, `mtp`, `pbt` or `mpbt`.
pub fn parse_method(s: &str) -> std::result::Result<MethodKind, String> {
    MethodKind::ALL
        .into_iter()
        .find(|m| m.label().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown method {s:?} (expected mts, mtp, pbt or mpbt)"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// `N`: stage-one hits that are translated and re-ranked.
    pub n_intermediate: usize,
    pub method: MethodKind,
    pub doc_channel: DocChannelKind,
    pub rerank: RerankConfig,
    /// Run length cap.
    pub output_depth: usize,
    pub tail_policy: TailPolicy,
    /// Threads for document translation; 1 translates sequentially.
    pub translation_workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_intermediate: 100,
            method: MethodKind::DictPhrase,
            doc_channel: DocChannelKind::Mt,
            rerank: RerankConfig::default(),
            output_depth: 1000,
            tail_policy: TailPolicy::Drop,
            translation_workers: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_intermediate == 0 {
            return Err(ConfigError::InvalidParameter("N must be at least 1").into());
        }
        if self.output_depth == 0 {
            return Err(ConfigError::InvalidParameter("output depth must be at least 1").into());
        }
        if self.tail_policy == TailPolicy::Keep && self.n_intermediate > self.output_depth {
            return Err(ConfigError::InvalidParameter(
                "N must not exceed the output depth when the tail is kept",
            )
            .into());
        }
        if self.translation_workers == 0 {
            return Err(
                ConfigError::InvalidParameter("translation workers must be at least 1").into(),
            );
        }
        self.rerank.combine.validate()?;
        Ok(())
    }

    /// How deep stage one searches.
    fn search_depth(&self) -> usize {
        match self.tail_policy {
            TailPolicy::Drop => self.n_intermediate,
            TailPolicy::Keep => self.output_depth.max(self.n_intermediate),
        }
    }
}

/// Translation resources and analyzers for one language pair.
#[derive(Clone, Copy)]
pub struct Resources<'a> {
    /// Source-to-target adapter for MT query translation.
    pub query_adapter: Option<&'a dyn MtAdapter>,
    /// Target-to-source adapter for the MT document channel.
    pub doc_adapter: Option<&'a dyn MtAdapter>,
    pub dictionary: Option<&'a BilingualDictionary>,
    /// Analyzer for the query language.
    pub src_cfg: &'a AnalyzerConfig,
    /// Analyzer for the collection language.
    pub tgt_cfg: &'a AnalyzerConfig,
}

impl fmt::Debug for Resources<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Resources")
            .field("query_adapter", &self.query_adapter.is_some())
            .field("doc_adapter", &self.doc_adapter.is_some())
            .field("dictionary", &self.dictionary.is_some())
            .field("src", &self.src_cfg.lang)
            .field("tgt", &self.tgt_cfg.lang)
            .finish()
    }
}

impl<'a> Resources<'a> {
    /// One adapter for both directions.
    pub fn new(
        adapter: Option<&'a dyn MtAdapter>,
        dictionary: Option<&'a BilingualDictionary>,
        src_cfg: &'a AnalyzerConfig,
        tgt_cfg: &'a AnalyzerConfig,
    ) -> Self {
        Resources {
            query_adapter: adapter,
            doc_adapter: adapter,
            dictionary,
            src_cfg,
            tgt_cfg,
        }
    }

    fn method(&self, kind: MethodKind) -> Result<TranslationMethod<'a>> {
        Ok(TranslationMethod::new(
            kind,
            self.query_adapter,
            self.dictionary,
        )?)
    }

    /// Checks that `cfg` can run with these resources against `index`.
    pub fn check(&self, cfg: &PipelineConfig, index: &InvertedIndex) -> Result<()> {
        if index.lang() != &self.tgt_cfg.lang {
            return Err(ConfigError::LangMismatch {
                expected: self.tgt_cfg.lang.clone(),
                found: index.lang().clone(),
            }
            .into());
        }
        self.method(cfg.method)?;
        if cfg.doc_channel == DocChannelKind::Mt && self.doc_adapter.is_none() {
            return Err(Error::Usage(
                "the MT document channel requires an MT adapter".into(),
            ));
        }
        Ok(())
    }
}

/// Seconds spent per phase of one two-stage run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimingRecord {
    pub translation_s: f64,
    pub rerank_s: f64,
    pub total_s: f64,
}

impl TimingRecord {
    pub fn add(&mut self, other: &TimingRecord) {
        self.translation_s += other.translation_s;
        self.rerank_s += other.rerank_s;
        self.total_s += other.total_s;
    }

    pub fn scaled(&self, factor: f64) -> TimingRecord {
        TimingRecord {
            translation_s: self.translation_s * factor,
            rerank_s: self.rerank_s * factor,
            total_s: self.total_s * factor,
        }
    }
}

/// Stage-one translation and search to `depth` hits.
pub fn first_stage(
    query: &Query,
    index: &InvertedIndex,
    method: MethodKind,
    res: &Resources<'_>,
    depth: usize,
) -> Result<(TranslatedQuery, RankedList)> {
    if index.lang() != &res.tgt_cfg.lang {
        return Err(ConfigError::LangMismatch {
            expected: res.tgt_cfg.lang.clone(),
            found: index.lang().clone(),
        }
        .into());
    }
    let tq = res
        .method(method)?
        .translate(query, index, res.src_cfg, res.tgt_cfg)?;
    let hits = search(index, &query.query_id, &tq.terms, depth);
    Ok((tq, hits))
}

/// Translates the query per `cfg.method` and returns the top `N` hits.
pub fn run_first_stage(
    query: &Query,
    index: &InvertedIndex,
    cfg: &PipelineConfig,
    res: &Resources<'_>,
) -> Result<RankedList> {
    first_stage(query, index, cfg.method, res, cfg.n_intermediate).map(|(_, hits)| hits)
}

/// A document whose translation failed; it keeps its stage-one score.
#[derive(Debug, Clone, PartialEq)]
pub struct DocFailure {
    pub doc_id: String,
    pub message: String,
}

/// Output of one two-stage run.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageRun {
    pub query_id: String,
    pub reranked: RerankedList,
    /// Stage-one hits below `N` when the tail is kept.
    pub tail: Vec<ScoredDoc>,
    pub failures: Vec<DocFailure>,
}

impl TwoStageRun {
    /// The run as a ranked list: the re-ranked block scored by `sim`, then
    /// the tail in stage-one order.
    ///
    /// Tail scores are rescaled to lie strictly below the smallest `sim`
    /// so that the list stays score-ordered.
    pub fn to_ranked(&self) -> RankedList {
        let mut out = self.reranked.to_ranked();
        if let (Some(first), Some(floor)) = (self.tail.first(), out.entries.last().map(|e| e.score))
        {
            let scale = 0.5 * floor / first.score;
            out.entries.extend(self.tail.iter().map(|e| ScoredDoc {
                doc_id: e.doc_id.clone(),
                score: e.score * scale,
            }));
        }
        out
    }
}

fn translate_one(
    doc_id: &str,
    corpus: &Corpus,
    channel: DocChannel<'_>,
) -> std::result::Result<Document, String> {
    let doc = corpus
        .get(doc_id)
        .ok_or_else(|| format!("document {doc_id:?} is indexed but missing from the corpus"))?;
    translate_document(doc, channel, corpus).map_err(|e| e.to_string())
}

fn translate_batch(
    ids: &[&str],
    corpus: &Corpus,
    channel: DocChannel<'_>,
    workers: usize,
) -> (BTreeMap<String, Document>, Vec<DocFailure>) {
    let concurrent = match channel {
        DocChannel::Mt { adapter, .. } => adapter.supports_concurrency(),
        DocChannel::Ht => true,
    };
    let results: Vec<(String, std::result::Result<Document, String>)> =
        if workers <= 1 || !concurrent || ids.len() < 2 {
            ids.iter()
                .map(|id| (id.to_string(), translate_one(id, corpus, channel)))
                .collect()
        } else {
            let chunk = ids.len().div_ceil(workers);
            thread::scope(|s| {
                let handles: Vec<_> = ids
                    .chunks(chunk)
                    .map(|part| {
                        s.spawn(move || {
                            part.iter()
                                .map(|id| (id.to_string(), translate_one(id, corpus, channel)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("translation worker panicked"))
                    .collect()
            })
        };
    let mut translated = BTreeMap::new();
    let mut failures = Vec::new();
    for (id, r) in results {
        match r {
            Ok(doc) => {
                translated.insert(id, doc);
            }
            Err(message) => failures.push(DocFailure {
                doc_id: id,
                message,
            }),
        }
    }
    failures.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    (translated, failures)
}

/// Runs both stages for one query.
///
/// Per-document translation failures are recorded in
/// [`TwoStageRun::failures`]; those documents are re-ranked with a zero
/// stage-two score.
pub fn run_two_stage(
    query: &Query,
    index: &InvertedIndex,
    corpus: &Corpus,
    cfg: &PipelineConfig,
    res: &Resources<'_>,
) -> Result<(TwoStageRun, TimingRecord)> {
    let started = Instant::now();
    let (_, hits) = first_stage(query, index, cfg.method, res, cfg.search_depth())?;
    let n = cfg.n_intermediate.min(hits.len());
    let top = hits.truncated(n);
    let tail = match cfg.tail_policy {
        TailPolicy::Drop => Vec::new(),
        TailPolicy::Keep => hits.entries[n..].to_vec(),
    };

    let channel = match cfg.doc_channel {
        DocChannelKind::Ht => DocChannel::Ht,
        DocChannelKind::Mt => DocChannel::Mt {
            adapter: res.doc_adapter.ok_or_else(|| {
                Error::Usage("the MT document channel requires an MT adapter".into())
            })?,
            target: &query.lang,
        },
    };
    let ids: Vec<&str> = top.doc_ids().collect();
    let t_translate = Instant::now();
    let (translated, failures) = translate_batch(&ids, corpus, channel, cfg.translation_workers);
    let translation_s = t_translate.elapsed().as_secs_f64();

    let t_rerank = Instant::now();
    let reranked = rerank(&top, &translated, query, res.src_cfg, &cfg.rerank);
    let rerank_s = t_rerank.elapsed().as_secs_f64();

    let run = TwoStageRun {
        query_id: query.query_id.clone(),
        reranked,
        tail,
        failures,
    };
    let timing = TimingRecord {
        translation_s,
        rerank_s,
        total_s: started.elapsed().as_secs_f64(),
    };
    Ok((run, timing))
}
