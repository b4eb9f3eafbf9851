//! Core kernels for two-stage cross-language retrieval.
//!
//! Stage one translates a query into the collection language and ranks the
//! collection with augmented TF·IDF ("atc") cosine scoring over an inverted
//! index. Stage two translates only the top `N` hits back into the query
//! language, scores them against the original query by direct term matching,
//! and re-ranks by a weighted geometric mean of the two scores.
//!
//! This crate only needs `alloc`. Build with `--no-default-features` for
//! `no_std` targets; file formats, external adapters,
//! timing and the command line live in the companion `clir` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;

mod math;

pub mod analysis;
pub mod corpus;
pub mod eval;
pub mod index;
pub mod rerank;
pub mod translate;

pub use analysis::{analyze, tokenize, AnalyzerConfig, ConfigError, TermVector, TokenizerKind};
pub use corpus::{Corpus, CorpusError, Document, Lang, Query};
pub use eval::{
    average_precision, mean_ap, sign_test, wilcoxon_signed_test, EvalError, Grade, PairedTest,
    Qrels, RunEntry, RunFile, TestResult,
};
pub use index::{
    build_index, cosine_similarity, search, weight_atc, IndexError, InvertedIndex, Posting,
    RankedList, ScoredDoc,
};
pub use rerank::{
    combine_scores, rerank, rerank_idf, rerank_tf, score_inner_product, CombineParams,
    RerankConfig, RerankError, RerankStats, RerankedEntry, RerankedList,
};
pub use translate::{
    combine_translations, translate_document, translate_query_dict, translate_query_mt,
    AdapterError, BilingualDictionary, DocChannel, IdentityAdapter, MethodKind, MtAdapter, MtMode,
    TableAdapter, TranslateError, TranslatedQuery, TranslationMethod,
};
