//! N-sweeps over translation methods and document channels, with mean AP
//! per cell, per-phase timing, paired significance tests, and text and
//! line-oriented renderings of the results.

use std::fmt::Write as _;

use clir_core::eval::{evaluate_run, RunEvaluation};
use clir_core::{
    sign_test, wilcoxon_signed_test, ConfigError, Corpus, EvalError, InvertedIndex, MethodKind,
    PairedTest, Qrels, Query, RunFile,
};

use crate::error::Result;
use crate::pipeline::{
    first_stage, run_two_stage, DocChannelKind, PipelineConfig, Resources, TailPolicy, TimingRecord,
};

/// Paired test used for comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairedTestKind {
    #[default]
    SignedRank,
    Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub methods: Vec<MethodKind>,
    /// `None` is the stage-one run truncated at `N`.
    pub channels: Vec<Option<DocChannelKind>>,
    /// Strictly ascending.
    pub ns: Vec<usize>,
    /// Everything but method, channel and `N`.
    pub base: PipelineConfig,
    pub strict: bool,
    pub level: f64,
    pub test: PairedTestKind,
}

impl SweepSpec {
    pub fn new(methods: Vec<MethodKind>, ns: Vec<usize>) -> Self {
        SweepSpec {
            methods,
            channels: vec![None, Some(DocChannelKind::Mt), Some(DocChannelKind::Ht)],
            ns,
            base: PipelineConfig::default(),
            strict: false,
            level: 0.05,
            test: PairedTestKind::SignedRank,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ns[0] == 0 || self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::InvalidParameter(
                "N values must be positive and strictly ascending",
            )
            .into());
        }
        if self.methods.is_empty() || self.channels.is_empty() {
            return Err(ConfigError::InvalidParameter(
                "a sweep needs at least one method and one channel",
            )
            .into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(
                ConfigError::InvalidParameter("significance level must lie in (0, 1)").into(),
            );
        }
        for &n in &self.ns {
            self.config_at(n, self.channels[0]).validate()?;
        }
        Ok(())
    }

    fn config_at(&self, n: usize, channel: Option<DocChannelKind>) -> PipelineConfig {
        PipelineConfig {
            n_intermediate: n,
            doc_channel: channel.unwrap_or(self.base.doc_channel),
            ..self.base.clone()
        }
    }
}

/// One (row, N) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub n: usize,
    pub evaluation: RunEvaluation,
    /// Mean per query; `None` for stage-one rows.
    pub timing: Option<TimingRecord>,
    /// Documents whose translation failed, summed over queries.
    pub failed_docs: usize,
    /// Queries that could not be run at all, with the reason.
    pub failed_queries: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: MethodKind,
    pub channel: Option<DocChannelKind>,
    pub cells: Vec<SweepCell>,
}

impl SweepRow {
    /// `PBT`, `PBT+MT`, `PBT+HT`.
    pub fn label(&self) -> String {
        match self.channel {
            None => self.method.label().to_string(),
            Some(c) => format!("{}+{}", self.method.label(), c.label()),
        }
    }

    pub fn cell(&self, n: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.n == n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub n: usize,
    pub result: PairedTest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ns: Vec<usize>,
    pub rows: Vec<SweepRow>,
    pub comparisons: Vec<Comparison>,
}

impl EvalReport {
    /// Per-N timing of the first MT-channel row, else the first two-stage row.
    pub fn timings(&self) -> Vec<(usize, TimingRecord)> {
        let row = self
            .rows
            .iter()
            .find(|r| r.channel == Some(DocChannelKind::Mt))
            .or_else(|| self.rows.iter().find(|r| r.channel.is_some()));
        row.map(|r| {
            r.cells
                .iter()
                .filter_map(|c| c.timing.map(|t| (c.n, t)))
                .collect()
        })
        .unwrap_or_default()
    }

    pub fn row(&self, method: MethodKind, channel: Option<DocChannelKind>) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.channel == channel)
    }

    /// Aligned text tables: mean AP by row and N, timing by N, comparisons.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let label_w = self
            .rows
            .iter()
            .map(|r| r.label().len())
            .max()
            .unwrap_or(0)
            .max(6);
        let _ = write!(out, "{:<label_w$}", "N");
        for n in &self.ns {
            let _ = write!(out, " {n:>8}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<label_w$}", row.label());
            for c in &row.cells {
                match c.evaluation.mean_ap {
                    Some(m) => {
                        let _ = write!(out, " {m:>8.4}");
                    }
                    None => {
                        let _ = write!(out, " {:>8}", "-");
                    }
                }
            }
            out.push('\n');
        }

        let timings = self.timings();
        if !timings.is_empty() {
            out.push('\n');
            let w = label_w.max(11);
            let _ = write!(out, "{:<w$}", "N");
            for (n, _) in &timings {
                let _ = write!(out, " {n:>8}");
            }
            out.push('\n');
            type Phase = (&'static str, fn(&TimingRecord) -> f64);
            let phases: [Phase; 3] = [
                ("translation", |t| t.translation_s),
                ("re-ranking", |t| t.rerank_s),
                ("total", |t| t.total_s),
            ];
            for (name, get) in phases {
                let _ = write!(out, "{name:<w$}");
                for (_, t) in &timings {
                    let _ = write!(out, " {:>8.3}", get(t));
                }
                out.push('\n');
            }
        }

        if !self.comparisons.is_empty() {
            out.push('\n');
            for c in &self.comparisons {
                let _ = match c.result.result() {
                    Some(r) => writeln!(
                        out,
                        "{} vs {} at N={}: W={} n={} p={:.5}{}",
                        c.a,
                        c.b,
                        c.n,
                        r.statistic,
                        r.n,
                        r.p_value,
                        if r.significant { " significant" } else { "" }
                    ),
                    None => writeln!(out, "{} vs {} at N={}: no information", c.a, c.b, c.n),
                };
            }
        }
        out
    }

    /// One whitespace-separated record per cell, timing row and comparison.
    pub fn render_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            for c in &row.cells {
                let map = c
                    .evaluation
                    .mean_ap
                    .map_or_else(|| "nan".to_string(), |m| format!("{m:.6}"));
                let _ = writeln!(
                    out,
                    "map {} {} {} {} {} {}",
                    row.label(),
                    c.n,
                    map,
                    c.evaluation.per_query.len(),
                    c.evaluation.excluded.len(),
                    c.failed_docs
                );
            }
        }
        for (n, t) in self.timings() {
            let _ = writeln!(
                out,
                "time {} {:.6} {:.6} {:.6}",
                n, t.translation_s, t.rerank_s, t.total_s
            );
        }
        for c in &self.comparisons {
            let _ = match c.result.result() {
                Some(r) => writeln!(
                    out,
                    "test {} {} {} {} {} {:.6} {}",
                    c.a, c.b, c.n, r.statistic, r.n, r.p_value, r.significant
                ),
                None => writeln!(out, "test {} {} {} nan 0 nan false", c.a, c.b, c.n),
            };
        }
        out
    }
}

/// Per-query AP pairs over queries evaluated in both runs.
pub fn paired_ap(a: &RunEvaluation, b: &RunEvaluation) -> Vec<(f64, f64)> {
    a.per_query
        .iter()
        .filter_map(|(q, &x)| b.per_query.get(q).map(|&y| (x, y)))
        .collect()
}

/// Runs every (method, channel, N) combination of `spec`.
///
/// Stage-one rows search once at the largest `N` and truncate. Two-stage
/// cells run the whole pipeline per query so timing reflects each `N`.
/// A query whose translation fails is recorded in the cell and scores as
/// an empty run.
pub fn sweep_n(
    queries: &[Query],
    index: &InvertedIndex,
    corpus: &Corpus,
    qrels: &Qrels,
    res: &Resources<'_>,
    spec: &SweepSpec,
) -> Result<EvalReport> {
    spec.validate()?;
    let max_n = *spec.ns.last().expect("validated non-empty");
    let mut rows = Vec::new();
    for &method in &spec.methods {
        for &channel in &spec.channels {
            let mut cells = Vec::with_capacity(spec.ns.len());
            match channel {
                None => {
                    let depth = match spec.base.tail_policy {
                        TailPolicy::Drop => max_n,
                        TailPolicy::Keep => spec.base.output_depth.max(max_n),
                    };
                    let mut lists = Vec::new();
                    let mut failed_queries = Vec::new();
                    for q in queries {
                        match first_stage(q, index, method, res, depth) {
                            Ok((_, hits)) => lists.push(hits),
                            Err(e) => failed_queries.push((q.query_id.clone(), e.to_string())),
                        }
                    }
                    for &n in &spec.ns {
                        let cut = match spec.base.tail_policy {
                            TailPolicy::Drop => n,
                            TailPolicy::Keep => depth,
                        };
                        let mut run = RunFile::new(method.label());
                        for l in &lists {
                            run.push_ranked(&l.truncated(cut));
                        }
                        cells.push(SweepCell {
                            n,
                            evaluation: evaluate_run(&run, qrels, spec.strict),
                            timing: None,
                            failed_docs: 0,
                            failed_queries: failed_queries.clone(),
                        });
                    }
                }
                Some(ch) => {
                    for &n in &spec.ns {
                        let cfg = PipelineConfig {
                            method,
                            ..spec.config_at(n, Some(ch))
                        };
                        res.check(&cfg, index)?;
                        let mut run = RunFile::new(format!("{}+{}", method.label(), ch.label()));
                        let mut timing = TimingRecord::default();
                        let mut timed = 0usize;
                        let mut failed_docs = 0;
                        let mut failed_queries = Vec::new();
                        for q in queries {
                            match run_two_stage(q, index, corpus, &cfg, res) {
                                Ok((r, t)) => {
                                    failed_docs += r.failures.len();
                                    run.push_ranked(&r.to_ranked());
                                    timing.add(&t);
                                    timed += 1;
                                }
                                Err(e) => failed_queries.push((q.query_id.clone(), e.to_string())),
                            }
                        }
                        let timing = if timed > 0 {
                            timing.scaled(1.0 / timed as f64)
                        } else {
                            timing
                        };
                        cells.push(SweepCell {
                            n,
                            evaluation: evaluate_run(&run, qrels, spec.strict),
                            timing: Some(timing),
                            failed_docs,
                            failed_queries,
                        });
                    }
                }
            }
            rows.push(SweepRow {
                method,
                channel,
                cells,
            });
        }
    }

    let comparisons = compare_rows(&rows, max_n, spec)?;
    Ok(EvalReport {
        ns: spec.ns.clone(),
        rows,
        comparisons,
    })
}

/// Each two-stage row against its stage-one row and, for HT, against MT,
/// at `n`.
fn compare_rows(rows: &[SweepRow], n: usize, spec: &SweepSpec) -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    let find = |m: MethodKind, c: Option<DocChannelKind>| {
        rows.iter().find(|r| r.method == m && r.channel == c)
    };
    for row in rows.iter().filter(|r| r.channel.is_some()) {
        let mut bases = vec![find(row.method, None)];
        if row.channel == Some(DocChannelKind::Ht) {
            bases.push(find(row.method, Some(DocChannelKind::Mt)));
        }
        for base in bases.into_iter().flatten() {
            let (Some(a), Some(b)) = (base.cell(n), row.cell(n)) else {
                continue;
            };
            let pairs = paired_ap(&a.evaluation, &b.evaluation);
            let result = match spec.test {
                PairedTestKind::SignedRank => wilcoxon_signed_test(&pairs, spec.level),
                PairedTestKind::Sign => sign_test(&pairs, spec.level),
            };
            let result = match result {
                Ok(r) => r,
                Err(EvalError::NoPairs) => continue,
                Err(e) => return Err(e.into()),
            };
            out.push(Comparison {
                a: base.label(),
                b: row.label(),
                n,
                result,
            });
        }
    }
    Ok(out)
}
