//! Relevance judgments, run files, average precision and paired tests.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::index::RankedList;
use crate::math;

/// Three-level relevance grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Grade {
    Irrelevant,
    PartiallyRelevant,
    Relevant,
}

impl Grade {
    /// Maps 0, 1, 2 to irrelevant, partially relevant, relevant.
    pub fn from_level(level: u8) -> Option<Grade> {
        match level {
            0 => Some(Grade::Irrelevant),
            1 => Some(Grade::PartiallyRelevant),
            2 => Some(Grade::Relevant),
            _ => None,
        }
    }

    pub fn level(self) -> u8 {
        match self {
            Grade::Irrelevant => 0,
            Grade::PartiallyRelevant => 1,
            Grade::Relevant => 2,
        }
    }

    /// Strict mode counts only `Relevant`; lenient mode also counts
    /// `PartiallyRelevant`.
    pub fn counts_as_relevant(self, strict: bool) -> bool {
        match self {
            Grade::Relevant => true,
            Grade::PartiallyRelevant => !strict,
            Grade::Irrelevant => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    ConflictingJudgment {
        query_id: String,
        doc_id: String,
        first: Grade,
        second: Grade,
    },
    EmptyMean,
    NoPairs,
    RankGap {
        query_id: String,
        expected: u32,
        found: u32,
    },
    ScoreIncrease {
        query_id: String,
        rank: u32,
    },
    DuplicateDoc {
        query_id: String,
        doc_id: String,
    },
    InvalidLevel(f64),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::ConflictingJudgment {
                query_id,
                doc_id,
                first,
                second,
            } => write!(
                f,
                "conflicting judgments for ({query_id}, {doc_id}): {} and {}",
                first.level(),
                second.level()
            ),
            EvalError::EmptyMean => f.write_str("mean of an empty set of queries"),
            EvalError::NoPairs => f.write_str("paired test needs at least one pair"),
            EvalError::RankGap {
                query_id,
                expected,
                found,
            } => write!(
                f,
                "query {query_id}: expected rank {expected}, found {found}"
            ),
            EvalError::ScoreIncrease { query_id, rank } => {
                write!(f, "query {query_id}: score increases at rank {rank}")
            }
            EvalError::DuplicateDoc { query_id, doc_id } => {
                write!(f, "query {query_id}: document {doc_id} listed twice")
            }
            EvalError::InvalidLevel(l) => write!(f, "significance level {l} outside (0, 1)"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EvalError {}

/// Graded judgments keyed by query then document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, Grade>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a judgment. Repeating an identical judgment is allowed; a
    /// different grade for the same pair is an error.
    pub fn insert(
        &mut self,
        query_id: impl Into<String>,
        doc_id: impl Into<String>,
        grade: Grade,
    ) -> Result<(), EvalError> {
        let query_id = query_id.into();
        let doc_id = doc_id.into();
        let per_query = self.judgments.entry(query_id.clone()).or_default();
        match per_query.get(&doc_id) {
            Some(&first) if first != grade => Err(EvalError::ConflictingJudgment {
                query_id,
                doc_id,
                first,
                second: grade,
            }),
            _ => {
                per_query.insert(doc_id, grade);
                Ok(())
            }
        }
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> Option<Grade> {
        self.judgments.get(query_id)?.get(doc_id).copied()
    }

    pub fn is_relevant(&self, query_id: &str, doc_id: &str, strict: bool) -> bool {
        self.grade(query_id, doc_id)
            .is_some_and(|g| g.counts_as_relevant(strict))
    }

    /// Number of documents judged relevant for `query_id`.
    pub fn relevant_count(&self, query_id: &str, strict: bool) -> usize {
        self.judgments.get(query_id).map_or(0, |m| {
            m.values().filter(|g| g.counts_as_relevant(strict)).count()
        })
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.judgments.keys().map(String::as_str)
    }

    /// Total number of judgments.
    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One retrieved document of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub rank: u32,
    pub score: f64,
}

/// Per-query result lists under one run tag.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunFile {
    pub tag: String,
    pub queries: BTreeMap<String, Vec<RunEntry>>,
}

impl RunFile {
    pub fn new(tag: impl Into<String>) -> Self {
        RunFile {
            tag: tag.into(),
            queries: BTreeMap::new(),
        }
    }

    /// Appends `list` as query `list.query_id`, ranks starting at 1.
    pub fn push_ranked(&mut self, list: &RankedList) {
        let entries = list
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| RunEntry {
                doc_id: e.doc_id.clone(),
                rank: i as u32 + 1,
                score: e.score,
            })
            .collect();
        self.queries.insert(list.query_id.clone(), entries);
    }

    pub fn entries(&self, query_id: &str) -> &[RunEntry] {
        self.queries.get(query_id).map_or(&[], Vec::as_slice)
    }

    /// Ranks must run 1..=k, scores must not increase, ids must be distinct.
    pub fn validate(&self) -> Result<(), EvalError> {
        for (qid, entries) in &self.queries {
            let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
            for (i, e) in entries.iter().enumerate() {
                let expected = i as u32 + 1;
                if e.rank != expected {
                    return Err(EvalError::RankGap {
                        query_id: qid.clone(),
                        expected,
                        found: e.rank,
                    });
                }
                if i > 0 && e.score > entries[i - 1].score {
                    return Err(EvalError::ScoreIncrease {
                        query_id: qid.clone(),
                        rank: e.rank,
                    });
                }
                if seen.insert(&e.doc_id, ()).is_some() {
                    return Err(EvalError::DuplicateDoc {
                        query_id: qid.clone(),
                        doc_id: e.doc_id.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Non-interpolated average precision of one ranked list.
///
/// Sums precision at the rank of each relevant retrieved document and
/// divides by the number of relevant documents `R`; relevant documents
/// that were not retrieved contribute 0. Returns `None` when `R = 0`.
pub fn average_precision(
    entries: &[RunEntry],
    qrels: &Qrels,
    query_id: &str,
    strict: bool,
) -> Option<f64> {
    let r = qrels.relevant_count(query_id, strict);
    if r == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, e) in entries.iter().enumerate() {
        if qrels.is_relevant(query_id, &e.doc_id, strict) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / r as f64)
}

/// Arithmetic mean of per-query values.
pub fn mean_ap(per_query: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
    if per_query.is_empty() {
        return Err(EvalError::EmptyMean);
    }
    Ok(per_query.values().sum::<f64>() / per_query.len() as f64)
}

/// Average precision of every judged query of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunEvaluation {
    pub per_query: BTreeMap<String, f64>,
    /// Queries left out of the mean: judged with no relevant document, or
    /// present in the run but not in the judgments.
    pub excluded: Vec<String>,
    pub mean_ap: Option<f64>,
}

/// Evaluates `run` over every query in `qrels` with at least one relevant
/// document. A judged query missing from the run scores 0.
pub fn evaluate_run(run: &RunFile, qrels: &Qrels, strict: bool) -> RunEvaluation {
    let mut out = RunEvaluation::default();
    for qid in qrels.query_ids() {
        match average_precision(run.entries(qid), qrels, qid, strict) {
            Some(ap) => {
                out.per_query.insert(qid.into(), ap);
            }
            None => out.excluded.push(qid.into()),
        }
    }
    for qid in run.queries.keys() {
        if qrels.relevant_count(qid, strict) == 0 && !out.excluded.contains(qid) {
            out.excluded.push(qid.clone());
        }
    }
    out.mean_ap = mean_ap(&out.per_query).ok();
    out
}

/// Outcome of a paired significance test.
#[derive(Debug, Clone, PartialEq)]
pub enum PairedTest {
    Tested(TestResult),
    /// Every difference was zero; there is nothing to test.
    NoInformation,
}

impl PairedTest {
    pub fn significant(&self) -> bool {
        matches!(self, PairedTest::Tested(r) if r.significant)
    }

    pub fn result(&self) -> Option<&TestResult> {
        match self {
            PairedTest::Tested(r) => Some(r),
            PairedTest::NoInformation => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    /// Test statistic: the smaller signed-rank sum for Wilcoxon, the smaller
    /// sign count for the sign test.
    pub statistic: f64,
    /// Pairs with a non-zero difference.
    pub n: usize,
    pub p_value: f64,
    pub significant: bool,
    /// `true` when `p_value` comes from the exact null distribution.
    pub exact: bool,
}

/// Largest sample for which the exact null distribution is used.
pub const EXACT_LIMIT: usize = 25;

fn check_level(level: f64) -> Result<(), EvalError> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(EvalError::InvalidLevel(level))
    }
}

/// Non-zero differences `a - b`.
fn differences(pairs: &[(f64, f64)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect()
}

/// Ranks of `|d|` with tied values sharing their average rank, doubled so
/// that every rank is an integer.
fn doubled_ranks(diffs: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0u64; diffs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && diffs[order[end + 1]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        // positions start..=end hold 1-based ranks start+1..=end+1
        let doubled = (start + 1 + end + 1) as u64;
        for &k in &order[start..=end] {
            ranks[k] = doubled;
        }
        start = end + 1;
    }
    ranks
}

/// Two-sided Wilcoxon matched-pairs signed-rank test on `a - b`.
///
/// Zero differences are dropped and tied magnitudes get average ranks. For
/// up to [`EXACT_LIMIT`] pairs the p-value is the exact share of the `2^n`
/// equally likely sign assignments whose smaller rank sum is at most the
/// observed one, computed by dynamic programming over rank sums. Larger
/// samples use the tie-corrected normal approximation with continuity
/// correction. Significant means `p < level`.
pub fn wilcoxon_signed_test(pairs: &[(f64, f64)], level: f64) -> Result<PairedTest, EvalError> {
    check_level(level)?;
    if pairs.is_empty() {
        return Err(EvalError::NoPairs);
    }
    let diffs = differences(pairs);
    if diffs.is_empty() {
        return Ok(PairedTest::NoInformation);
    }
    let n = diffs.len();
    let ranks = doubled_ranks(&diffs);
    let total: u64 = ranks.iter().sum();
    let plus: u64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let w2 = plus.min(total - plus);

    let (p_value, exact) = if n <= EXACT_LIMIT {
        // counts[s]: sign assignments whose doubled positive-rank sum is s
        let mut counts = vec![0u64; total as usize + 1];
        counts[0] = 1;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                let c = counts[s];
                if c != 0 {
                    counts[s + r] += c;
                }
            }
            reach += r;
        }
        let extreme: u64 = counts
            .iter()
            .enumerate()
            .filter(|(s, _)| {
                let s = *s as u64;
                s <= w2 || s >= total - w2
            })
            .map(|(_, c)| c)
            .sum();
        (extreme as f64 / (1u64 << n) as f64, true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut tie_term = 0.0;
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        for group in sorted.chunk_by(|a, b| a == b) {
            let t = group.len() as f64;
            tie_term += t * t * t - t;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let t_plus = plus as f64 / 2.0;
        let z = ((t_plus - mean).abs() - 0.5).max(0.0) / math::sqrt(var);
        (math::erfc(z / core::f64::consts::SQRT_2).min(1.0), false)
    };

    Ok(PairedTest::Tested(TestResult {
        statistic: w2 as f64 / 2.0,
        n,
        p_value,
        significant: p_value < level,
        exact,
    }))
}

/// `P(X <= k)` for `X ~ Binomial(n, 1/2)`.
fn binomial_half_cdf(n: usize, k: usize) -> f64 {
    if n < 127 {
        let mut c: u128 = 1;
        let mut tail: u128 = 0;
        for i in 0..=k {
            if i > 0 {
                c = c * (n - i + 1) as u128 / i as u128;
            }
            tail += c;
        }
        return tail as f64 / (1u128 << n) as f64;
    }
    let ln_half_n = n as f64 * math::ln(0.5);
    let mut ln_c = 0.0;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            ln_c += math::ln((n - i + 1) as f64) - math::ln(i as f64);
        }
        tail += math::exp(ln_c + ln_half_n);
    }
    tail
}

/// Two-sided exact sign test on `a - b`, zero differences dropped.
pub fn sign_test(pairs: &[(f64, f64)], level: f64) -> Result<PairedTest, EvalError> {
    check_level(level)?;
    if pairs.is_empty() {
        return Err(EvalError::NoPairs);
    }
    let diffs = differences(pairs);
    if diffs.is_empty() {
        return Ok(PairedTest::NoInformation);
    }
    let n = diffs.len();
    let plus = diffs.iter().filter(|d| **d > 0.0).count();
    let k = plus.min(n - plus);
    let tail = binomial_half_cdf(n, k);
    let p_value = (2.0 * tail).min(1.0);
    Ok(PairedTest::Tested(TestResult {
        statistic: k as f64,
        n,
        p_value,
        significant: p_value < level,
        exact: true,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn run(ids: &[&str]) -> Vec<RunEntry> {
        ids.iter()
            .enumerate()
            .map(|(i, id)| RunEntry {
                doc_id: (*id).into(),
                rank: i as u32 + 1,
                score: 1.0 / (i + 1) as f64,
            })
            .collect()
    }

    fn qrels(rows: &[(&str, &str, u8)]) -> Qrels {
        let mut q = Qrels::new();
        for (qid, did, lvl) in rows {
            q.insert(*qid, *did, Grade::from_level(*lvl).unwrap())
                .unwrap();
        }
        q
    }

    #[test]
    fn ap_definition_example() {
        let q = qrels(&[("q", "r1", 2), ("q", "r2", 2), ("q", "n", 0)]);
        let ap = average_precision(&run(&["r1", "n", "r2"]), &q, "q", true).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ap_perfect_and_zero() {
        let q = qrels(&[("q", "a", 2), ("q", "b", 2)]);
        assert_eq!(
            average_precision(&run(&["b", "a", "x"]), &q, "q", true),
            Some(1.0)
        );
        assert_eq!(
            average_precision(&run(&["x", "y"]), &q, "q", true),
            Some(0.0)
        );
        assert_eq!(average_precision(&run(&[]), &q, "q", true), Some(0.0));
    }

    #[test]
    fn ap_undefined_without_relevant_documents() {
        let q = qrels(&[("q", "a", 1), ("q", "b", 0)]);
        assert_eq!(average_precision(&run(&["a"]), &q, "q", true), None);
        assert_eq!(average_precision(&run(&["a"]), &q, "q", false), Some(1.0));
    }

    #[test]
    fn conflicting_judgment_is_rejected() {
        let mut q = Qrels::new();
        q.insert("q1", "d1", Grade::Relevant).unwrap();
        q.insert("q1", "d1", Grade::Relevant).unwrap();
        assert!(matches!(
            q.insert("q1", "d1", Grade::Irrelevant),
            Err(EvalError::ConflictingJudgment { .. })
        ));
    }

    #[test]
    fn mean_examples() {
        let m: BTreeMap<String, f64> = [("q1".into(), 0.5), ("q2".into(), 0.7)].into();
        assert!((mean_ap(&m).unwrap() - 0.6).abs() < 1e-15);
        let one: BTreeMap<String, f64> = [("q1".into(), 0.37)].into();
        assert_eq!(mean_ap(&one).unwrap(), 0.37);
        let many: BTreeMap<String, f64> = (0..39).map(|i| (format!("q{i}"), 0.1403)).collect();
        assert!((mean_ap(&many).unwrap() - 0.1403).abs() < 1e-12);
        assert_eq!(mean_ap(&BTreeMap::new()), Err(EvalError::EmptyMean));
    }

    #[test]
    fn evaluate_run_excludes_unjudged() {
        let q = qrels(&[("q1", "a", 2), ("q2", "b", 1)]);
        let mut rf = RunFile::new("t");
        rf.queries.insert("q1".into(), run(&["x", "a"]));
        rf.queries.insert("q3".into(), run(&["a"]));
        let ev = evaluate_run(&rf, &q, true);
        assert_eq!(ev.per_query.len(), 1);
        assert_eq!(ev.per_query["q1"], 0.5);
        assert_eq!(ev.excluded, ["q2", "q3"]);
        assert_eq!(ev.mean_ap, Some(0.5));
    }

    #[test]
    fn run_validation() {
        let mut rf = RunFile::new("t");
        rf.queries.insert("q".into(), run(&["a", "b"]));
        assert!(rf.validate().is_ok());
        rf.queries.get_mut("q").unwrap()[1].rank = 3;
        assert!(matches!(rf.validate(), Err(EvalError::RankGap { .. })));
        rf.queries.get_mut("q").unwrap()[1].rank = 2;
        rf.queries.get_mut("q").unwrap()[1].score = 5.0;
        assert!(matches!(
            rf.validate(),
            Err(EvalError::ScoreIncrease { .. })
        ));
    }

    #[test]
    fn wilcoxon_all_positive_six() {
        let pairs: Vec<(f64, f64)> = (1..=6).map(|i| (0.1 * i as f64 + 0.5, 0.0)).collect();
        let t = wilcoxon_signed_test(&pairs, 0.05).unwrap();
        let r = t.result().unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 0.03125);
        assert!(r.exact);
        assert!(t.significant());
    }

    #[test]
    fn wilcoxon_no_information() {
        let pairs = [(0.3, 0.3), (0.1, 0.1)];
        let t = wilcoxon_signed_test(&pairs, 0.05).unwrap();
        assert_eq!(t, PairedTest::NoInformation);
        assert!(!t.significant());
        assert_eq!(wilcoxon_signed_test(&[], 0.05), Err(EvalError::NoPairs));
    }

    #[test]
    fn wilcoxon_is_symmetric_in_swap() {
        let pairs = [(0.5, 0.1), (0.2, 0.3), (0.9, 0.4), (0.3, 0.25), (0.7, 0.1)];
        let swapped: Vec<(f64, f64)> = pairs.iter().map(|(a, b)| (*b, *a)).collect();
        assert_eq!(
            wilcoxon_signed_test(&pairs, 0.05).unwrap(),
            wilcoxon_signed_test(&swapped, 0.05).unwrap()
        );
    }

    #[test]
    fn wilcoxon_ties_use_average_ranks() {
        // |d| = 1, 1, 2 -> ranks 1.5, 1.5, 3; one negative of rank 1.5
        let pairs = [(1.0, 0.0), (0.0, 1.0), (2.0, 0.0)];
        let r = wilcoxon_signed_test(&pairs, 0.05).unwrap();
        assert_eq!(r.result().unwrap().statistic, 1.5);
    }

    #[test]
    fn wilcoxon_normal_branch_is_reasonable() {
        // 30 positive differences: p is essentially zero either way
        let pairs: Vec<(f64, f64)> = (1..=30).map(|i| (i as f64, 0.0)).collect();
        let r = wilcoxon_signed_test(&pairs, 0.05).unwrap();
        let res = r.result().unwrap();
        assert!(!res.exact);
        assert!(res.p_value < 1e-5);
        // balanced signs: no evidence
        let pairs: Vec<(f64, f64)> = (1..=30)
            .map(|i| {
                if i % 2 == 0 {
                    (i as f64, 0.0)
                } else {
                    (0.0, i as f64)
                }
            })
            .collect();
        let res = wilcoxon_signed_test(&pairs, 0.05).unwrap();
        assert!(res.result().unwrap().p_value > 0.5);
    }

    #[test]
    fn sign_test_examples() {
        let pairs: Vec<(f64, f64)> = (0..6).map(|_| (1.0, 0.0)).collect();
        let t = sign_test(&pairs, 0.05).unwrap();
        assert_eq!(t.result().unwrap().p_value, 0.03125);
        let pairs = [(1.0, 0.0), (0.0, 1.0)];
        assert_eq!(
            sign_test(&pairs, 0.05).unwrap().result().unwrap().p_value,
            1.0
        );
    }

    #[test]
    fn invalid_level_is_rejected() {
        assert!(wilcoxon_signed_test(&[(1.0, 0.0)], 0.0).is_err());
        assert!(sign_test(&[(1.0, 0.0)], 1.5).is_err());
    }
}
