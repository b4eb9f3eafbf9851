//! On-disk formats: JSON-lines corpora and queries, TSV dictionaries and
//! mock tables, TREC qrels and run files, and a line-oriented index file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use clir_core::corpus::DanglingPair;
use clir_core::{
    AnalyzerConfig, BilingualDictionary, Corpus, CorpusError, Document, Grade, InvertedIndex, Lang,
    Qrels, Query, RunEntry, RunFile, TableAdapter,
};
use serde::Deserialize;

use crate::error::{Error, Result};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Non-blank lines with 1-based line numbers.
fn lines<'a, R: BufRead + 'a>(
    reader: R,
    path: &'a Path,
) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    reader
        .lines()
        .enumerate()
        .map(move |(i, l)| l.map(|l| (i + 1, l)).map_err(|e| Error::io(path, e)))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

#[derive(Debug, Deserialize)]
struct DocRecord {
    id: String,
    lang: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    keywords: Vec<String>,
    #[serde(default, rename = "abstract")]
    abstract_text: String,
    #[serde(default)]
    pair_id: Option<String>,
}

#[derive(Debug, Deserialize)]
struct QueryRecord {
    id: String,
    lang: String,
    description: String,
}

/// A corpus plus the pair links that did not resolve.
#[derive(Debug)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub dangling: Vec<DanglingPair>,
}

pub fn read_corpus<R: BufRead>(reader: R, path: &Path, langs: &[Lang]) -> Result<LoadedCorpus> {
    let mut corpus = Corpus::new(langs.iter().cloned());
    for item in lines(reader, path) {
        let (line, text) = item?;
        let rec: DocRecord =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let doc = Document {
            doc_id: rec.id,
            lang: Lang::new(rec.lang),
            title: rec.title,
            keywords: rec.keywords,
            abstract_text: rec.abstract_text,
            pair_id: rec.pair_id,
        };
        corpus.insert(doc).map_err(|source| Error::Integrity {
            path: path.into(),
            line,
            source,
        })?;
    }
    let dangling = corpus.dangling_pairs();
    Ok(LoadedCorpus { corpus, dangling })
}

/// Loads a JSON-lines corpus. Duplicate ids and undeclared languages are
/// fatal; unresolved pair links are reported in [`LoadedCorpus::dangling`].
pub fn load_corpus(path: &Path, langs: &[Lang]) -> Result<LoadedCorpus> {
    read_corpus(open(path)?, path, langs)
}

pub fn read_queries<R: BufRead>(reader: R, path: &Path) -> Result<Vec<Query>> {
    let mut out: Vec<Query> = Vec::new();
    for item in lines(reader, path) {
        let (line, text) = item?;
        let rec: QueryRecord =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, line, e.to_string()))?;
        if out.iter().any(|q| q.query_id == rec.id) {
            return Err(Error::Integrity {
                path: path.into(),
                line,
                source: CorpusError::DuplicateId(rec.id),
            });
        }
        let q =
            Query::new(rec.id, rec.lang, rec.description).map_err(|source| Error::Integrity {
                path: path.into(),
                line,
                source,
            })?;
        out.push(q);
    }
    Ok(out)
}

pub fn load_queries(path: &Path) -> Result<Vec<Query>> {
    read_queries(open(path)?, path)
}

/// `source phrase<TAB>candidate1|candidate2|...`; source phrases are
/// analyzed with `src_cfg`.
pub fn read_dictionary<R: BufRead>(
    reader: R,
    path: &Path,
    src_cfg: &AnalyzerConfig,
    tgt: &Lang,
) -> Result<BilingualDictionary> {
    let mut dict = BilingualDictionary::new(src_cfg.lang.clone(), tgt.clone());
    for item in lines(reader, path) {
        let (line, text) = item?;
        let (source, cands) = text
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, line, "expected `source<TAB>candidates`"))?;
        let cands: Vec<&str> = cands.split('|').map(str::trim).collect();
        if cands.iter().any(|c| c.is_empty()) {
            return Err(Error::parse(path, line, "empty translation candidate"));
        }
        // A phrase made only of stopwords cannot match an analyzed query.
        dict.insert(source, cands, src_cfg);
    }
    Ok(dict)
}

pub fn load_dictionary(
    path: &Path,
    src_cfg: &AnalyzerConfig,
    tgt: &Lang,
) -> Result<BilingualDictionary> {
    read_dictionary(open(path)?, path, src_cfg, tgt)
}

/// Mock MT table: dictionary shape with exactly one candidate per line.
pub fn read_mock_table<R: BufRead>(reader: R, path: &Path) -> Result<TableAdapter> {
    let mut table = TableAdapter::new();
    for item in lines(reader, path) {
        let (line, text) = item?;
        let (source, target) = text
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, line, "expected `source<TAB>translation`"))?;
        if target.contains('|') {
            return Err(Error::parse(
                path,
                line,
                "mock table entries take exactly one translation",
            ));
        }
        if source.trim().is_empty() {
            return Err(Error::parse(path, line, "empty source phrase"));
        }
        table.insert(source, target.trim());
    }
    Ok(table)
}

pub fn load_mock_table(path: &Path) -> Result<TableAdapter> {
    read_mock_table(open(path)?, path)
}

/// TREC qrels: `query_id 0 doc_id grade`, grade in {0, 1, 2}.
pub fn read_qrels<R: BufRead>(reader: R, path: &Path) -> Result<Qrels> {
    let mut qrels = Qrels::new();
    for item in lines(reader, path) {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [qid, _iter, did, grade] = fields[..] else {
            return Err(Error::parse(
                path,
                line,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        };
        let grade = grade
            .parse::<u8>()
            .ok()
            .and_then(Grade::from_level)
            .ok_or_else(|| {
                Error::parse(
                    path,
                    line,
                    format!("grade must be 0, 1 or 2, found {grade:?}"),
                )
            })?;
        qrels
            .insert(qid, did, grade)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
    }
    Ok(qrels)
}

pub fn load_qrels(path: &Path) -> Result<Qrels> {
    read_qrels(open(path)?, path)
}

/// TREC run lines: `query_id Q0 doc_id rank score tag`.
pub fn write_run<W: Write>(run: &RunFile, mut w: W) -> io::Result<()> {
    for (qid, entries) in &run.queries {
        for e in entries {
            writeln!(
                w,
                "{qid} Q0 {} {} {} {}",
                e.doc_id, e.rank, e.score, run.tag
            )?;
        }
    }
    Ok(())
}

pub fn save_run(run: &RunFile, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_run(run, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a run, skipping `#` comment lines, and validates rank contiguity,
/// score order and id uniqueness.
pub fn read_run<R: BufRead>(reader: R, path: &Path) -> Result<RunFile> {
    let mut run = RunFile::default();
    let mut tag: Option<String> = None;
    for item in lines(reader, path) {
        let (line, text) = item?;
        if text.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [qid, _q0, did, rank, score, t] = fields[..] else {
            return Err(Error::parse(
                path,
                line,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        };
        let rank: u32 = rank
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad rank {rank:?}")))?;
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(path, line, format!("bad score {score:?}")))?;
        tag.get_or_insert_with(|| t.to_string());
        let entries = run.queries.entry(qid.to_string()).or_default();
        let expected = entries.len() as u32 + 1;
        if rank != expected {
            return Err(Error::parse(
                path,
                line,
                format!("query {qid}: expected rank {expected}, found {rank}"),
            ));
        }
        if entries.last().is_some_and(|prev| score > prev.score) {
            return Err(Error::parse(
                path,
                line,
                format!("query {qid}: score increases at rank {rank}"),
            ));
        }
        entries.push(RunEntry {
            doc_id: did.to_string(),
            rank,
            score,
        });
    }
    run.tag = tag.unwrap_or_default();
    run.validate()?;
    Ok(run)
}

pub fn load_run(path: &Path) -> Result<RunFile> {
    read_run(open(path)?, path)
}

const INDEX_MAGIC: &str = "clir-index 1";

/// Writes the index as text: a header, then one line per term,
/// `term<TAB>doc:tf doc:tf ...`.
pub fn write_index<W: Write>(index: &InvertedIndex, mut w: W) -> io::Result<()> {
    writeln!(w, "{INDEX_MAGIC}")?;
    writeln!(w, "lang {}", index.lang())?;
    writeln!(w, "num_docs {}", index.num_docs())?;
    for (term, list) in index.terms() {
        write!(w, "{term}\t")?;
        for (i, p) in list.iter().enumerate() {
            if i > 0 {
                w.write_all(b" ")?;
            }
            write!(w, "{}:{}", index.doc_id(p.doc), p.tf)?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_index(index: &InvertedIndex, path: &Path) -> Result<()> {
    if let Some(bad) = index
        .doc_ids()
        .iter()
        .find(|id| id.contains(char::is_whitespace))
    {
        return Err(Error::Usage(format!(
            "document id {bad:?} contains whitespace and cannot be persisted"
        )));
    }
    let mut w = create(path)?;
    write_index(index, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_index<R: BufRead>(reader: R, path: &Path) -> Result<InvertedIndex> {
    let mut it = reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)).map_err(|e| Error::io(path, e)));
    let mut header = |key: &str| -> Result<String> {
        let (line, text) = it
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(path, 0, "truncated index header"))?;
        if key.is_empty() {
            return if text == INDEX_MAGIC {
                Ok(text)
            } else {
                Err(Error::parse(path, line, "not a clir index file"))
            };
        }
        text.strip_prefix(key)
            .and_then(|v| v.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| Error::parse(path, line, format!("expected `{key} ...`")))
    };
    header("")?;
    let lang = Lang::new(header("lang")?);
    let num_docs: usize = header("num_docs")?
        .parse()
        .map_err(|_| Error::parse(path, 3, "bad num_docs"))?;
    let mut postings: BTreeMap<String, Vec<(String, u32)>> = BTreeMap::new();
    for item in it {
        let (line, text) = item?;
        let (term, list) = text
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, line, "expected `term<TAB>postings`"))?;
        let mut parsed = Vec::new();
        for p in list.split(' ') {
            let (doc, tf) = p
                .rsplit_once(':')
                .and_then(|(d, tf)| Some((d.to_string(), tf.parse::<u32>().ok()?)))
                .ok_or_else(|| Error::parse(path, line, format!("bad posting {p:?}")))?;
            parsed.push((doc, tf));
        }
        if postings.insert(term.to_string(), parsed).is_some() {
            return Err(Error::parse(
                path,
                line,
                format!("term {term:?} listed twice"),
            ));
        }
    }
    Ok(InvertedIndex::from_parts(lang, num_docs, postings)?)
}

pub fn load_index(path: &Path) -> Result<InvertedIndex> {
    read_index(open(path)?, path)
}
