//! Command-line front end. [`run`] takes explicit output streams and
//! returns the process exit status so it can be driven from tests.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use clir_core::eval::evaluate_run;
use clir_core::{
    build_index, AnalyzerConfig, BilingualDictionary, CombineParams, Corpus, InvertedIndex, Lang,
    MethodKind, MtAdapter, Query, RerankConfig, RunFile,
};

use crate::adapter::CommandAdapter;
use crate::error::{Error, Result};
use crate::formats;
use crate::pipeline::{
    parse_method, run_first_stage, run_two_stage, DocChannelKind, PipelineConfig, Resources,
    TailPolicy, TimingRecord,
};
use crate::sweep::{paired_ap, sweep_n, PairedTestKind, SweepSpec};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for bad flags or missing required options.
pub const EXIT_USAGE: i32 = 1;
/// Exit status for unreadable or inconsistent data and adapter failures.
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "clir",
    version,
    about = "Two-stage cross-language retrieval: index, search, re-rank, evaluate."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an index over the documents of one language.
    Index(IndexArgs),
    /// Translate queries and run stage-one retrieval only.
    Search(SearchArgs),
    /// Run both stages: search, translate the top N, re-rank.
    Search2(Search2Args),
    /// Score a run file against relevance judgments.
    Eval(EvalArgs),
    /// Mean AP and timing across methods, channels and N.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Corpus file (JSON lines).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Languages the corpus may contain.
    #[arg(long, value_delimiter = ',', default_value = "en,ja")]
    langs: Vec<String>,
    /// Analyzer override, LANG=words|bigram|english; repeatable.
    #[arg(long = "tokenizer", value_name = "LANG=KIND")]
    tokenizers: Vec<String>,
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Language of the documents to index.
    #[arg(long)]
    lang: String,
    /// Output index file.
    #[arg(long)]
    out: PathBuf,
}

/// Flags shared by the retrieval verbs; each may also come from `--config`.
#[derive(Debug, Args, Default)]
struct PipelineArgs {
    /// key=value file supplying defaults for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Documents retrieved in stage one and re-ranked.
    #[arg(long)]
    n: Option<usize>,
    /// Query translation method.
    #[arg(long, value_parser = ["mts", "mtp", "pbt", "mpbt"])]
    method: Option<String>,
    /// Source of translated documents for re-ranking.
    #[arg(long = "doc-channel", value_parser = ["mt", "ht"])]
    doc_channel: Option<String>,
    /// Exponent on the stage-one score.
    #[arg(long)]
    alpha: Option<f64>,
    /// Exponent on the stage-two score.
    #[arg(long)]
    beta: Option<f64>,
    /// Stand-in for a zero score.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Stage-one hits below N: dropped or appended after the re-ranked block.
    #[arg(long, value_parser = ["drop", "keep"])]
    tail: Option<String>,
    /// Run length cap.
    #[arg(long = "output-depth")]
    output_depth: Option<usize>,
    /// External MT command; receives SRC TGT as arguments, text on stdin.
    #[arg(long = "adapter-cmd")]
    adapter_cmd: Option<String>,
    /// Seconds before an adapter call is abandoned.
    #[arg(long = "adapter-timeout")]
    adapter_timeout: Option<f64>,
    /// Bilingual dictionary, source<TAB>cand1|cand2.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Table-driven MT adapter, source<TAB>target.
    #[arg(long = "mock-table")]
    mock_table: Option<PathBuf>,
    /// Threads for document translation.
    #[arg(long)]
    workers: Option<usize>,
    /// Disable IDF in the re-ranker.
    #[arg(long = "no-idf")]
    no_idf: bool,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Prebuilt index; otherwise one is built from --corpus and --lang.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Collection language when building from --corpus.
    #[arg(long)]
    lang: Option<String>,
    /// Queries file (JSON lines).
    #[arg(long = "query-file")]
    query_file: PathBuf,
    /// Run file to write; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run tag.
    #[arg(long, default_value = "clir")]
    tag: String,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
struct Search2Args {
    #[command(flatten)]
    search: SearchArgs,
    /// Emit esim, jsim and sim per document as comment lines.
    #[arg(long)]
    verbose: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Run file to score.
    #[arg(long)]
    run: PathBuf,
    /// Relevance judgments.
    #[arg(long)]
    qrels: PathBuf,
    /// Count only fully relevant documents.
    #[arg(long)]
    strict: bool,
    /// Second run for a paired significance test.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Paired test.
    #[arg(long, value_parser = ["signed-rank", "sign"], default_value = "signed-rank")]
    test: String,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    level: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    search: SearchArgs,
    /// Relevance judgments.
    #[arg(long)]
    qrels: PathBuf,
    /// Ascending values of N.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "50,100,200,400,600,800,1000"
    )]
    ns: Vec<usize>,
    /// Methods to sweep; defaults to --method or pbt.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Rows per method: none (stage one only), mt, ht.
    #[arg(long, value_delimiter = ',', default_value = "none,mt,ht")]
    channels: Vec<String>,
    /// Count only fully relevant documents.
    #[arg(long)]
    strict: bool,
    /// Paired test.
    #[arg(long, value_parser = ["signed-rank", "sign"], default_value = "signed-rank")]
    test: String,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// Report layout.
    #[arg(long, value_parser = ["text", "lines"], default_value = "text")]
    format: String,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Index(a) => cmd_index(a, err),
        Command::Search(a) => cmd_search(a, out, err),
        Command::Search2(a) => cmd_search2(a, out, err),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Usage(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn write_err(e: io::Error) -> Error {
    Error::io("<output>", e)
}

/// Reads `key=value` lines; `#` starts a comment.
fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, i + 1, "expected key=value"))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

const CONFIG_KEYS: [&str; 14] = [
    "n",
    "method",
    "doc-channel",
    "alpha",
    "beta",
    "epsilon",
    "tail",
    "output-depth",
    "adapter-cmd",
    "adapter-timeout",
    "dict",
    "mock-table",
    "workers",
    "idf",
];

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| usage(format!("invalid value {v:?} for {key}")))
}

/// Flags override the config file, which overrides defaults.
fn merge_config(mut a: PipelineArgs) -> Result<PipelineArgs> {
    let Some(path) = a.config.clone() else {
        return Ok(a);
    };
    let map = read_config(&path)?;
    for (k, v) in &map {
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(usage(format!("{}: unknown key {k:?}", path.display())));
        }
        match k.as_str() {
            "n" if a.n.is_none() => a.n = Some(parse_value(k, v)?),
            "method" if a.method.is_none() => a.method = Some(v.clone()),
            "doc-channel" if a.doc_channel.is_none() => a.doc_channel = Some(v.clone()),
            "alpha" if a.alpha.is_none() => a.alpha = Some(parse_value(k, v)?),
            "beta" if a.beta.is_none() => a.beta = Some(parse_value(k, v)?),
            "epsilon" if a.epsilon.is_none() => a.epsilon = Some(parse_value(k, v)?),
            "tail" if a.tail.is_none() => a.tail = Some(v.clone()),
            "output-depth" if a.output_depth.is_none() => a.output_depth = Some(parse_value(k, v)?),
            "adapter-cmd" if a.adapter_cmd.is_none() => a.adapter_cmd = Some(v.clone()),
            "adapter-timeout" if a.adapter_timeout.is_none() => {
                a.adapter_timeout = Some(parse_value(k, v)?)
            }
            "dict" if a.dict.is_none() => a.dict = Some(PathBuf::from(v)),
            "mock-table" if a.mock_table.is_none() => a.mock_table = Some(PathBuf::from(v)),
            "workers" if a.workers.is_none() => a.workers = Some(parse_value(k, v)?),
            "idf" if !a.no_idf => a.no_idf = !parse_value::<bool>(k, v)?,
            _ => {}
        }
    }
    Ok(a)
}

fn pipeline_config(a: &PipelineArgs, default_n: usize) -> Result<PipelineConfig> {
    let d = PipelineConfig::default();
    let combine = CombineParams {
        alpha: a.alpha.unwrap_or(d.rerank.combine.alpha),
        beta: a.beta.unwrap_or(d.rerank.combine.beta),
        epsilon: a.epsilon.unwrap_or(d.rerank.combine.epsilon),
    };
    let cfg = PipelineConfig {
        n_intermediate: a.n.unwrap_or(default_n),
        method: a
            .method
            .as_deref()
            .map(parse_method)
            .transpose()
            .map_err(usage)?
            .unwrap_or(d.method),
        doc_channel: a
            .doc_channel
            .as_deref()
            .map(str::parse::<DocChannelKind>)
            .transpose()
            .map_err(usage)?
            .unwrap_or(d.doc_channel),
        rerank: RerankConfig {
            combine,
            use_idf: !a.no_idf,
        },
        output_depth: a.output_depth.unwrap_or(d.output_depth),
        tail_policy: a
            .tail
            .as_deref()
            .map(str::parse::<TailPolicy>)
            .transpose()
            .map_err(usage)?
            .unwrap_or(d.tail_policy),
        translation_workers: a.workers.unwrap_or(d.translation_workers),
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

/// Analyzer per language after `--tokenizer` overrides.
struct Analyzers(BTreeMap<String, String>);

impl Analyzers {
    fn parse(specs: &[String]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for s in specs {
            let (lang, kind) = s
                .split_once('=')
                .ok_or_else(|| usage(format!("--tokenizer expects LANG=KIND, got {s:?}")))?;
            if !["words", "bigram", "english"].contains(&kind) {
                return Err(usage(format!("unknown tokenizer kind {kind:?}")));
            }
            map.insert(lang.to_string(), kind.to_string());
        }
        Ok(Analyzers(map))
    }

    fn for_lang(&self, lang: &Lang) -> AnalyzerConfig {
        match self.0.get(lang.as_str()).map(String::as_str) {
            Some("words") => AnalyzerConfig::words(lang.clone()),
            Some("bigram") => AnalyzerConfig::bigram(lang.clone()),
            Some("english") => AnalyzerConfig {
                lang: lang.clone(),
                ..AnalyzerConfig::english()
            },
            _ => AnalyzerConfig::default_for(lang),
        }
    }
}

fn load_corpus(a: &CorpusArgs, err: &mut dyn Write) -> Result<Option<Corpus>> {
    let Some(path) = &a.corpus else {
        return Ok(None);
    };
    let langs: Vec<Lang> = a.langs.iter().map(|l| Lang::new(l.as_str())).collect();
    let loaded = formats::load_corpus(path, &langs)?;
    for d in &loaded.dangling {
        let _ = writeln!(
            err,
            "warning: {} names missing pair {}",
            d.doc_id, d.pair_id
        );
    }
    Ok(Some(loaded.corpus))
}

fn index_from(
    corpus: Option<&Corpus>,
    a: &SearchArgs,
    analyzers: &Analyzers,
) -> Result<InvertedIndex> {
    match (&a.index, corpus, &a.lang) {
        (Some(path), _, _) => formats::load_index(path),
        (None, Some(c), Some(lang)) => {
            let lang = Lang::new(lang.as_str());
            Ok(build_index(c.in_lang(&lang), &analyzers.for_lang(&lang))?)
        }
        (None, Some(_), None) => Err(usage(
            "--lang is required when building the index from --corpus",
        )),
        (None, None, _) => Err(usage("either --index or --corpus with --lang is required")),
    }
}

/// Owned translation resources behind a [`Resources`] view.
struct Loaded {
    adapter: Option<Box<dyn MtAdapter>>,
    dictionary: Option<BilingualDictionary>,
    src_cfg: AnalyzerConfig,
    tgt_cfg: AnalyzerConfig,
}

impl Loaded {
    fn load(p: &PipelineArgs, src: &Lang, tgt: &Lang, analyzers: &Analyzers) -> Result<Self> {
        let src_cfg = analyzers.for_lang(src);
        let tgt_cfg = analyzers.for_lang(tgt);
        let adapter: Option<Box<dyn MtAdapter>> = match (&p.adapter_cmd, &p.mock_table) {
            (Some(_), Some(_)) => {
                return Err(usage(
                    "--adapter-cmd and --mock-table are mutually exclusive",
                ))
            }
            (Some(cmd), None) => {
                let timeout = Duration::from_secs_f64(p.adapter_timeout.unwrap_or(60.0).max(0.001));
                Some(Box::new(
                    CommandAdapter::from_command_line(cmd, timeout)
                        .ok_or_else(|| usage("--adapter-cmd is empty"))?,
                ))
            }
            (None, Some(path)) => {
                Some(Box::new(formats::load_mock_table(path)?) as Box<dyn MtAdapter>)
            }
            (None, None) => None,
        };
        let dictionary = p
            .dict
            .as_deref()
            .map(|path| formats::load_dictionary(path, &src_cfg, tgt))
            .transpose()?;
        Ok(Loaded {
            adapter,
            dictionary,
            src_cfg,
            tgt_cfg,
        })
    }

    fn resources(&self) -> Resources<'_> {
        Resources::new(
            self.adapter.as_deref(),
            self.dictionary.as_ref(),
            &self.src_cfg,
            &self.tgt_cfg,
        )
    }
}

/// The single language shared by all queries.
fn query_lang(queries: &[Query]) -> Result<Lang> {
    let first = queries
        .first()
        .ok_or_else(|| usage("the query file contains no queries"))?;
    if let Some(q) = queries.iter().find(|q| q.lang != first.lang) {
        return Err(usage(format!(
            "queries mix languages: {} is {} but {} is {}",
            first.query_id, first.lang, q.query_id, q.lang
        )));
    }
    Ok(first.lang.clone())
}

fn check_resources(cfg: &PipelineConfig, loaded: &Loaded, two_stage: bool) -> Result<()> {
    if cfg.method.needs_adapter() && loaded.adapter.is_none() {
        return Err(usage(format!(
            "method {} needs --adapter-cmd or --mock-table",
            cfg.method.label().to_lowercase()
        )));
    }
    if cfg.method.needs_dictionary() && loaded.dictionary.is_none() {
        return Err(usage(format!(
            "method {} needs --dict",
            cfg.method.label().to_lowercase()
        )));
    }
    if two_stage && cfg.doc_channel == DocChannelKind::Mt && loaded.adapter.is_none() {
        return Err(usage(
            "--doc-channel mt needs --adapter-cmd or --mock-table",
        ));
    }
    Ok(())
}

fn emit_run(run: &RunFile, comments: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            buf.extend_from_slice(comments.as_bytes());
            formats::write_run(run, &mut buf).map_err(|e| Error::io(p, e))?;
            fs::write(p, buf).map_err(|e| Error::io(p, e))
        }
        None => {
            out.write_all(comments.as_bytes()).map_err(write_err)?;
            formats::write_run(run, &mut *out).map_err(write_err)
        }
    }
}

fn cmd_index(a: IndexArgs, err: &mut dyn Write) -> Result<()> {
    let analyzers = Analyzers::parse(&a.corpus.tokenizers)?;
    if a.corpus.corpus.is_none() {
        return Err(usage("--corpus is required"));
    }
    let corpus = load_corpus(&a.corpus, err)?.expect("checked above");
    let lang = Lang::new(a.lang.as_str());
    let index = build_index(corpus.in_lang(&lang), &analyzers.for_lang(&lang))?;
    formats::save_index(&index, &a.out)?;
    let _ = writeln!(
        err,
        "indexed {} {} documents, {} terms",
        index.num_docs(),
        lang,
        index.num_terms()
    );
    Ok(())
}

/// Validated inputs shared by search, search2 and sweep.
struct Prepared {
    corpus: Option<Corpus>,
    index: InvertedIndex,
    queries: Vec<Query>,
    loaded: Loaded,
    cfg: PipelineConfig,
}

fn prepare(
    a: SearchArgs,
    default_n: usize,
    two_stage: bool,
    err: &mut dyn Write,
) -> Result<(Prepared, SearchArgs)> {
    let analyzers = Analyzers::parse(&a.corpus.tokenizers)?;
    if two_stage && a.corpus.corpus.is_none() {
        return Err(usage("--corpus is required for document translation"));
    }
    if a.index.is_none() && (a.corpus.corpus.is_none() || a.lang.is_none()) {
        return Err(usage("either --index or --corpus with --lang is required"));
    }
    let mut a = a;
    a.pipeline = merge_config(std::mem::take(&mut a.pipeline))?;
    let cfg = pipeline_config(&a.pipeline, default_n)?;

    let queries = formats::load_queries(&a.query_file)?;
    let src = query_lang(&queries)?;
    let corpus = load_corpus(&a.corpus, err)?;
    let index = index_from(corpus.as_ref(), &a, &analyzers)?;
    let loaded = Loaded::load(&a.pipeline, &src, index.lang(), &analyzers)?;
    check_resources(&cfg, &loaded, two_stage)?;
    Ok((
        Prepared {
            corpus,
            index,
            queries,
            loaded,
            cfg,
        },
        a,
    ))
}

fn cmd_search(a: SearchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let (p, a) = prepare(a, 1000, false, err)?;
    let res = p.loaded.resources();
    let mut run = RunFile::new(a.tag.as_str());
    for q in &p.queries {
        run.push_ranked(&run_first_stage(q, &p.index, &p.cfg, &res)?);
    }
    emit_run(&run, "", a.out.as_deref(), out)
}

fn cmd_search2(a: Search2Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let verbose = a.verbose;
    let (p, a) = prepare(
        a.search,
        PipelineConfig::default().n_intermediate,
        true,
        err,
    )?;
    let res = p.loaded.resources();
    let corpus = p.corpus.as_ref().expect("two-stage runs require a corpus");
    let mut run = RunFile::new(a.tag.as_str());
    let mut comments = String::new();
    let mut total = TimingRecord::default();
    for q in &p.queries {
        let (r, t) = run_two_stage(q, &p.index, corpus, &p.cfg, &res)?;
        for f in &r.failures {
            let _ = writeln!(
                err,
                "warning: {} {}: translation failed: {}",
                q.query_id, f.doc_id, f.message
            );
        }
        if verbose {
            for e in &r.reranked.entries {
                comments.push_str(&format!(
                    "# {} {} esim={:.6} jsim={:.6} sim={:.6}{}\n",
                    q.query_id,
                    e.doc_id,
                    e.esim,
                    e.jsim,
                    e.sim,
                    if e.translated { "" } else { " untranslated" }
                ));
            }
        }
        let _ = writeln!(
            err,
            "timing {} translation={:.3}s rerank={:.3}s total={:.3}s",
            q.query_id, t.translation_s, t.rerank_s, t.total_s
        );
        total.add(&t);
        run.push_ranked(&r.to_ranked());
    }
    let _ = writeln!(
        err,
        "timing all translation={:.3}s rerank={:.3}s total={:.3}s",
        total.translation_s, total.rerank_s, total.total_s
    );
    emit_run(&run, &comments, a.out.as_deref(), out)
}

fn test_kind(s: &str) -> PairedTestKind {
    if s == "sign" {
        PairedTestKind::Sign
    } else {
        PairedTestKind::SignedRank
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(usage("--level must lie in (0, 1)"))
    }
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    check_level(a.level)?;
    let qrels = formats::load_qrels(&a.qrels)?;
    let run = formats::load_run(&a.run)?;
    let ev = evaluate_run(&run, &qrels, a.strict);
    let mut text = String::new();
    for (q, ap) in &ev.per_query {
        text.push_str(&format!("ap {q} {ap:.6}\n"));
    }
    for q in &ev.excluded {
        text.push_str(&format!("excluded {q}\n"));
    }
    match ev.mean_ap {
        Some(m) => text.push_str(&format!("map {} {m:.6} {}\n", run.tag, ev.per_query.len())),
        None => text.push_str(&format!("map {} nan 0\n", run.tag)),
    }
    if let Some(other) = &a.compare {
        let run_b = formats::load_run(other)?;
        let ev_b = evaluate_run(&run_b, &qrels, a.strict);
        let pairs = paired_ap(&ev, &ev_b);
        let result = match test_kind(&a.test) {
            PairedTestKind::SignedRank => clir_core::wilcoxon_signed_test(&pairs, a.level)?,
            PairedTestKind::Sign => clir_core::sign_test(&pairs, a.level)?,
        };
        match result.result() {
            Some(r) => text.push_str(&format!(
                "test {} {} W={} n={} p={:.6} significant={}\n",
                run.tag, run_b.tag, r.statistic, r.n, r.p_value, r.significant
            )),
            None => text.push_str(&format!("test {} {} no-information\n", run.tag, run_b.tag)),
        }
    }
    out.write_all(text.as_bytes()).map_err(write_err)
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    check_level(a.level)?;
    let channels = a
        .channels
        .iter()
        .map(|c| match c.as_str() {
            "none" => Ok(None),
            other => other.parse::<DocChannelKind>().map(Some).map_err(usage),
        })
        .collect::<Result<Vec<_>>>()?;
    let two_stage = channels.iter().any(Option::is_some);
    let ns = a.ns.clone();
    let default_n = *ns.last().unwrap_or(&1);
    let method_flags = a.methods.clone();
    let (p, _) = prepare(a.search, default_n, two_stage, err)?;
    let methods: Vec<MethodKind> = if method_flags.is_empty() {
        vec![p.cfg.method]
    } else {
        method_flags
            .iter()
            .map(|m| parse_method(m).map_err(usage))
            .collect::<Result<_>>()?
    };
    for &m in &methods {
        let cfg = PipelineConfig {
            method: m,
            ..p.cfg.clone()
        };
        for ch in channels.iter().flatten() {
            check_resources(
                &PipelineConfig {
                    doc_channel: *ch,
                    ..cfg.clone()
                },
                &p.loaded,
                true,
            )?;
        }
        check_resources(&cfg, &p.loaded, false)?;
    }
    let spec = SweepSpec {
        methods,
        channels,
        ns,
        base: PipelineConfig {
            n_intermediate: default_n,
            ..p.cfg.clone()
        },
        strict: a.strict,
        level: a.level,
        test: test_kind(&a.test),
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let qrels = formats::load_qrels(&a.qrels)?;
    let empty = Corpus::new([p.index.lang().clone()]);
    let corpus = p.corpus.as_ref().unwrap_or(&empty);
    let report = sweep_n(
        &p.queries,
        &p.index,
        corpus,
        &qrels,
        &p.loaded.resources(),
        &spec,
    )?;
    for row in &report.rows {
        for c in &row.cells {
            for (q, why) in &c.failed_queries {
                let _ = writeln!(err, "warning: {} N={} {q}: {why}", row.label(), c.n);
            }
        }
    }
    let text = if a.format == "lines" {
        report.render_lines()
    } else {
        report.render_text()
    };
    out.write_all(text.as_bytes()).map_err(write_err)
}
