//! Shared fixtures for the integration suites: a deterministic bilingual
//! collection with controlled dictionary ambiguity, and brute-force
//! reference implementations that avoid the engine's data structures.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use clir_core::{
    AnalyzerConfig, BilingualDictionary, Corpus, Document, Grade, Lang, Qrels, Query, TableAdapter,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOPICS: usize = 10;
pub const DOCS_PER_TOPIC: usize = 20;
pub const TOPIC_WORDS: usize = 8;
pub const QUERY_WORDS: usize = 4;
pub const BACKGROUND: usize = 150;
pub const DECOYS: usize = 10;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Japanese-side surface form of an English-side word.
pub fn ja_form(en: &str) -> String {
    format!("x{en}")
}

/// Garbled output of the noisy MT table.
pub fn garbled(en: &str) -> String {
    format!("z{en}")
}

pub fn topic_word(t: usize, k: usize) -> String {
    format!("t{t}w{k}")
}

pub fn decoy_for(t: usize, k: usize) -> String {
    format!("d{}", (t * 3 + k) % DECOYS)
}

/// A two-language collection where every English document `e###` has an
/// exact word-for-word Japanese pair `j###`.
///
/// Queries are Japanese and name four words of their topic. Each query
/// word has two dictionary candidates: for the first two the misleading
/// candidate never occurs in the collection, for the last two it is a
/// high-frequency decoy that the max-df rule prefers. Relevant documents
/// are the twenty documents of the query's topic.
#[derive(Debug)]
pub struct Synthetic {
    pub corpus: Corpus,
    pub queries: Vec<Query>,
    pub qrels: Qrels,
    pub dictionary: BilingualDictionary,
    /// English to Japanese; half of the topic words come out garbled.
    pub mt_table: TableAdapter,
    pub dict_entries: Vec<(String, Vec<String>)>,
    pub mt_entries: Vec<(String, String)>,
    pub en_cfg: AnalyzerConfig,
    pub ja_cfg: AnalyzerConfig,
}

pub fn synthetic(seed: u64) -> Synthetic {
    let mut rng = rng(seed);
    let en_cfg = AnalyzerConfig::words("en");
    let ja_cfg = AnalyzerConfig::words("ja");
    let mut docs = Vec::new();
    let mut qrels = Qrels::new();
    let mut vocabulary = BTreeSet::new();

    for t in 0..TOPICS {
        for i in 0..DOCS_PER_TOPIC {
            let n = t * DOCS_PER_TOPIC + i;
            let mut words: Vec<String> = Vec::new();
            for k in 0..TOPIC_WORDS {
                if rng.gen_bool(0.5) {
                    for _ in 0..rng.gen_range(1..=3) {
                        words.push(topic_word(t, k));
                    }
                }
            }
            for _ in 0..15 {
                words.push(format!("g{}", rng.gen_range(0..BACKGROUND)));
            }
            for m in 0..DECOYS {
                if rng.gen_bool(0.35) {
                    for _ in 0..rng.gen_range(1..=2) {
                        words.push(format!("d{m}"));
                    }
                }
            }
            for _ in 0..2 {
                let other = (t + rng.gen_range(1..TOPICS)) % TOPICS;
                words.push(topic_word(other, rng.gen_range(0..TOPIC_WORDS)));
            }
            words.shuffle(&mut rng);
            vocabulary.extend(words.iter().cloned());

            let en_text = words.join(" ");
            let ja_text: Vec<String> = words.iter().map(|w| ja_form(w)).collect();
            let (e, j) = (format!("e{n:03}"), format!("j{n:03}"));
            docs.push(
                Document::new(e.as_str(), "en")
                    .with_abstract(en_text)
                    .with_pair(j.as_str()),
            );
            docs.push(
                Document::new(j.as_str(), "ja")
                    .with_abstract(ja_text.join(" "))
                    .with_pair(e.as_str()),
            );
            qrels
                .insert(format!("q{t:02}"), e, Grade::Relevant)
                .unwrap();
        }
    }

    let mut dictionary = BilingualDictionary::new("ja", "en");
    let mut dict_entries = Vec::new();
    let mut queries = Vec::new();
    for t in 0..TOPICS {
        let words: Vec<String> = (0..QUERY_WORDS)
            .map(|k| ja_form(&topic_word(t, k)))
            .collect();
        queries.push(Query::new(format!("q{t:02}"), "ja", words.join(" ")).unwrap());
        for k in 0..QUERY_WORDS {
            let misleading = if k < 2 {
                format!("r{t}w{k}")
            } else {
                decoy_for(t, k)
            };
            let cands = vec![topic_word(t, k), misleading];
            dictionary.insert(&ja_form(&topic_word(t, k)), cands.iter().cloned(), &ja_cfg);
            dict_entries.push((ja_form(&topic_word(t, k)), cands));
        }
    }

    let mut mt_table = TableAdapter::new();
    let mut mt_entries = Vec::new();
    for w in &vocabulary {
        let out = if w.starts_with('t') && rng.gen_bool(0.5) {
            garbled(w)
        } else {
            ja_form(w)
        };
        mt_table.insert(w, out.clone());
        mt_entries.push((w.clone(), out));
    }

    let corpus = Corpus::from_documents([Lang::new("en"), Lang::new("ja")], docs).unwrap();
    Synthetic {
        corpus,
        queries,
        qrels,
        dictionary,
        mt_table,
        dict_entries,
        mt_entries,
        en_cfg,
        ja_cfg,
    }
}

/// Paths of a [`Synthetic`] collection written to disk.
#[derive(Debug, Clone)]
pub struct FixtureFiles {
    pub corpus: PathBuf,
    pub queries: PathBuf,
    pub qrels: PathBuf,
    pub dict: PathBuf,
    pub mock_table: PathBuf,
}

/// Writes the collection in the on-disk formats the command line reads.
pub fn write_fixture(s: &Synthetic, dir: &Path) -> FixtureFiles {
    let files = FixtureFiles {
        corpus: dir.join("corpus.jsonl"),
        queries: dir.join("queries.jsonl"),
        qrels: dir.join("qrels.txt"),
        dict: dir.join("dict.tsv"),
        mock_table: dir.join("mt.tsv"),
    };
    let mut corpus = String::new();
    for d in s.corpus.iter() {
        let rec = serde_json::json!({
            "id": d.doc_id,
            "lang": d.lang.as_str(),
            "title": d.title,
            "keywords": d.keywords,
            "abstract": d.abstract_text,
            "pair_id": d.pair_id,
        });
        corpus.push_str(&rec.to_string());
        corpus.push('\n');
    }
    fs::write(&files.corpus, corpus).unwrap();
    let queries: String = s
        .queries
        .iter()
        .map(|q| {
            serde_json::json!({"id": q.query_id, "lang": q.lang.as_str(), "description": q.description}).to_string() + "\n"
        })
        .collect();
    fs::write(&files.queries, queries).unwrap();
    let mut qrels = String::new();
    for q in s.qrels.query_ids() {
        for i in 0..(TOPICS * DOCS_PER_TOPIC) {
            let doc = format!("e{i:03}");
            if let Some(g) = s.qrels.grade(q, &doc) {
                qrels.push_str(&format!("{q} 0 {doc} {}\n", g.level()));
            }
        }
    }
    fs::write(&files.qrels, qrels).unwrap();
    let dict: String = s
        .dict_entries
        .iter()
        .map(|(src, c)| format!("{src}\t{}\n", c.join("|")))
        .collect();
    fs::write(&files.dict, dict).unwrap();
    let table: String = s
        .mt_entries
        .iter()
        .map(|(a, b)| format!("{a}\t{b}\n"))
        .collect();
    fs::write(&files.mock_table, table).unwrap();
    files
}

/// Whitespace token counts.
pub fn counts(text: &str) -> BTreeMap<String, u32> {
    let mut m = BTreeMap::new();
    for w in text.split_whitespace() {
        *m.entry(w.to_string()).or_insert(0) += 1;
    }
    m
}

/// Random text over `t0..t{vocab}`.
pub fn random_text(rng: &mut ChaCha8Rng, vocab: usize, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| format!("t{}", rng.gen_range(0..vocab)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Exhaustive cosine scoring with augmented-tf, log-idf weights on both
/// sides. Returns `(doc_id, score)` for every document with a positive
/// score, best first, ties by id.
pub fn brute_force_search(docs: &[(String, String)], query: &str) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let doc_counts: Vec<(String, BTreeMap<String, u32>)> = docs
        .iter()
        .map(|(id, text)| (id.clone(), counts(text)))
        .collect();
    let df = |t: &str| doc_counts.iter().filter(|(_, c)| c.contains_key(t)).count();
    let weight = |tf: u32, max_tf: u32, df: usize| {
        (0.5 + 0.5 * tf as f64 / max_tf as f64) * (n / df as f64).ln()
    };

    let q = counts(query);
    let q_max = q.values().copied().max().unwrap_or(0);
    let q_w: BTreeMap<&str, f64> = q
        .iter()
        .filter(|(t, _)| df(t) > 0)
        .map(|(t, &f)| (t.as_str(), weight(f, q_max, df(t))))
        .collect();
    let q_norm = q_w.values().map(|w| w * w).sum::<f64>().sqrt();

    let mut out = Vec::new();
    for (id, c) in &doc_counts {
        let d_max = c.values().copied().max().unwrap_or(0);
        let d_w: BTreeMap<&str, f64> = c
            .iter()
            .map(|(t, &f)| (t.as_str(), weight(f, d_max, df(t))))
            .collect();
        let d_norm = d_w.values().map(|w| w * w).sum::<f64>().sqrt();
        let dot: f64 = q_w
            .iter()
            .filter_map(|(t, wq)| d_w.get(t).map(|wd| wq * wd))
            .sum();
        if dot > 0.0 && q_norm > 0.0 && d_norm > 0.0 {
            out.push((id.clone(), (dot / (q_norm * d_norm)).min(1.0)));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// One re-ranking instance: stage-one `(doc_id, esim)` pairs, translated
/// texts (`None` where translation failed), and the source query.
#[derive(Debug, Clone)]
pub struct RerankCase {
    pub first_stage: Vec<(String, f64)>,
    pub translations: Vec<Option<String>>,
    pub query: String,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub use_idf: bool,
}

pub fn random_rerank_case(rng: &mut ChaCha8Rng, max_docs: usize, vocab: usize) -> RerankCase {
    let n = rng.gen_range(1..=max_docs);
    let mut first_stage: Vec<(String, f64)> = (0..n)
        .map(|i| (format!("d{i:02}"), rng.gen_range(0.001..1.0)))
        .collect();
    first_stage.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let translations = (0..n)
        .map(|_| (!rng.gen_bool(0.1)).then(|| random_text(rng, vocab, 12)))
        .collect();
    let mut query = random_text(rng, vocab, 6);
    if query.is_empty() {
        query = "t0".into();
    }
    RerankCase {
        first_stage,
        translations,
        query,
        alpha: [0.5, 1.0, 2.0][rng.gen_range(0..3)],
        beta: [0.0, 0.5, 1.0, 2.0][rng.gen_range(0..4)],
        epsilon: 1e-4,
        use_idf: rng.gen_bool(0.8),
    }
}

/// Re-ranking by definition: `1 + ln f` term frequencies, `ln(N / n_t)`
/// over the translated set, inner product, then `e'^alpha * j'^beta` with
/// zero scores replaced by epsilon. Returns doc ids best first.
pub fn brute_force_rerank(case: &RerankCase) -> Vec<(String, f64)> {
    let n = case.first_stage.len() as f64;
    let docs: Vec<Option<BTreeMap<String, u32>>> = case
        .translations
        .iter()
        .map(|t| t.as_deref().map(counts))
        .collect();
    let n_t = |t: &str| docs.iter().flatten().filter(|c| c.contains_key(t)).count();
    let tf = |f: u32| if f == 0 { 0.0 } else { 1.0 + (f as f64).ln() };
    let q = counts(&case.query);

    let mut out: Vec<(String, f64)> = case
        .first_stage
        .iter()
        .zip(&docs)
        .map(|((id, esim), d)| {
            let jsim = match d {
                None => 0.0,
                Some(d) => {
                    let mut s = 0.0;
                    for (t, &fq) in &q {
                        let Some(&fd) = d.get(t) else { continue };
                        let idf = if case.use_idf {
                            (n / n_t(t) as f64).ln()
                        } else {
                            1.0
                        };
                        s += (tf(fq) * idf) * (tf(fd) * idf);
                    }
                    s
                }
            };
            let e = if *esim > 0.0 { *esim } else { case.epsilon };
            let j = if jsim > 0.0 { jsim } else { case.epsilon };
            (id.clone(), e.powf(case.alpha) * j.powf(case.beta))
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Average precision by definition over a list of relevance flags.
pub fn ap_by_definition(flags: &[bool], total_relevant: usize) -> f64 {
    let mut seen = 0;
    let mut sum = 0.0;
    for (i, &rel) in flags.iter().enumerate() {
        if rel {
            seen += 1;
            sum += seen as f64 / (i + 1) as f64;
        }
    }
    sum / total_relevant as f64
}

/// Two-sided signed-rank test by listing all `2^n` sign assignments.
/// `None` when every difference is zero; otherwise `(W, p)`.
pub fn brute_force_wilcoxon(pairs: &[(f64, f64)]) -> Option<(f64, f64)> {
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return None;
    }
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    let total: f64 = ranks.iter().sum();
    let plus: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let w = plus.min(total - plus);

    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| ranks[b])
            .sum();
        if s.min(total - s) <= w + 1e-9 {
            extreme += 1;
        }
    }
    Some((w, extreme as f64 / (1u64 << n) as f64))
}
