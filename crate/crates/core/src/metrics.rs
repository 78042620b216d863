//! Order and answer metrics: Kendall's tau, Spearman's rho, missing rate,
//! Levenshtein distance, ANLS and corpus aggregation.
//!
//! Rank correlations are computed over the boxes that are ordered in both
//! sequences. Both restrictions are strict permutations, so there are no ties.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Document, ReadingSequence, SubsetTag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCorrelation {
    pub tau: f64,
    pub rho: f64,
    pub n_common: usize,
}

/// Ranks of the common boxes: `(pred_rank, gold_rank)` pairs, with both
/// sides re-compacted to `0..n` and sorted by gold rank.
fn common_ranks(pred: &ReadingSequence, gold: &ReadingSequence) -> Vec<(usize, usize)> {
    let mut both: Vec<(usize, usize)> = gold
        .iter()
        .filter_map(|(id, g)| Some((pred.rank(id)?, g?)))
        .collect();
    both.sort_unstable_by_key(|&(p, _)| p);
    for (i, pair) in both.iter_mut().enumerate() {
        pair.0 = i;
    }
    both.sort_unstable_by_key(|&(_, g)| g);
    for (i, pair) in both.iter_mut().enumerate() {
        pair.1 = i;
    }
    both
}

/// Counts inversions with a bottom-up merge sort.
fn count_inversions(values: &mut [usize]) -> u64 {
    let n = values.len();
    let mut buf = vec![0usize; n];
    let mut inversions = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if values[i] <= values[j] {
                    buf[k] = values[i];
                    i += 1;
                } else {
                    buf[k] = values[j];
                    inversions += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            buf[k..k + mid - i].copy_from_slice(&values[i..mid]);
            k += mid - i;
            buf[k..k + end - j].copy_from_slice(&values[j..end]);
            start = end;
        }
        values.copy_from_slice(&buf);
        width *= 2;
    }
    inversions
}

/// Concordant minus discordant pairs over the common boxes, with the pair count.
pub(crate) fn kendall_counts(pred: &ReadingSequence, gold: &ReadingSequence) -> (i64, u64, usize) {
    let ranks = common_ranks(pred, gold);
    let n = ranks.len();
    let mut pred_in_gold_order: Vec<usize> = ranks.iter().map(|&(p, _)| p).collect();
    let discordant = count_inversions(&mut pred_in_gold_order);
    let pairs = (n as u64) * (n.saturating_sub(1) as u64) / 2;
    let concordant = pairs - discordant;
    (concordant as i64 - discordant as i64, pairs, n)
}

/// `None` when fewer than two boxes are ordered in both sequences.
pub fn kendall_tau(pred: &ReadingSequence, gold: &ReadingSequence) -> Option<f64> {
    let (diff, pairs, n) = kendall_counts(pred, gold);
    (n >= 2).then(|| diff as f64 / pairs as f64)
}

pub fn spearman_rho(pred: &ReadingSequence, gold: &ReadingSequence) -> Option<f64> {
    let ranks = common_ranks(pred, gold);
    let n = ranks.len();
    if n < 2 {
        return None;
    }
    let sum_d2: u128 = ranks
        .iter()
        .map(|&(p, g)| {
            let d = p.abs_diff(g) as u128;
            d * d
        })
        .sum();
    let n = n as f64;
    Some(1.0 - 6.0 * sum_d2 as f64 / (n * (n * n - 1.0)))
}

pub fn rank_correlation(pred: &ReadingSequence, gold: &ReadingSequence) -> Option<RankCorrelation> {
    Some(RankCorrelation {
        tau: kendall_tau(pred, gold)?,
        rho: spearman_rho(pred, gold)?,
        n_common: common_ranks(pred, gold).len(),
    })
}

/// Fraction of the document's boxes with no ordinal. Boxes absent from the
/// sequence count as missing. `None` for an empty document.
pub fn missing_rate(seq: &ReadingSequence, doc: &Document) -> Option<f64> {
    if doc.boxes.is_empty() {
        return None;
    }
    let missing = doc.boxes.iter().filter(|b| seq.rank(&b.id).is_none()).count();
    Some(missing as f64 / doc.boxes.len() as f64)
}

/// Edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

pub const DEFAULT_ANLS_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnlsScore {
    pub value: f64,
    pub threshold: f64,
}

fn normalize_answer(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Normalized Levenshtein similarity against the best-matching gold answer.
pub fn anls(pred: &str, golds: &[impl AsRef<str>], threshold: f64) -> Result<AnlsScore> {
    if golds.is_empty() {
        return Err(Error::EmptyInput("gold answer list"));
    }
    let pred = normalize_answer(pred);
    let pred_len = pred.chars().count();
    let value = golds
        .iter()
        .map(|g| {
            let g = normalize_answer(g.as_ref());
            let longest = pred_len.max(g.chars().count());
            if longest == 0 {
                return 1.0;
            }
            let nl = levenshtein(&pred, &g) as f64 / longest as f64;
            if nl < threshold {
                1.0 - nl
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(AnlsScore { value, threshold })
}

/// Mean ANLS over `(prediction, gold answers)` questions.
pub fn corpus_anls<S: AsRef<str>>(questions: &[(S, Vec<S>)], threshold: f64) -> Result<f64> {
    if questions.is_empty() {
        return Err(Error::EmptyInput("question list"));
    }
    let mut total = 0.0;
    for (pred, golds) in questions {
        total += anls(pred.as_ref(), golds, threshold)?.value;
    }
    Ok(total / questions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Mean of per-document scores.
    #[default]
    MacroOverDocuments,
    /// Tau from pooled concordant/discordant counts; rho weighted by the
    /// number of common boxes; missing rate from pooled box counts.
    MicroPooled,
}

/// One document to score: its gold order and a strategy's prediction.
#[derive(Debug, Clone, Copy)]
pub struct EvalItem<'a> {
    pub doc: &'a Document,
    pub gold: &'a ReadingSequence,
    pub pred: &'a ReadingSequence,
    pub strategy: &'a str,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub doc_id: String,
    pub subset: SubsetTag,
    pub strategy: String,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub n_common: usize,
    /// Missing rate of the gold order.
    pub missing_rate: Option<f64>,
    pub pred_missing_rate: Option<f64>,
    /// Externally produced entity-labeling scores, left empty here.
    pub ser_precision: Option<f64>,
    pub ser_recall: Option<f64>,
    pub ser_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub missing_rate: Option<f64>,
    pub documents: usize,
    /// Documents left out of the correlation means (fewer than 2 common boxes).
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub aggregation: Aggregation,
    pub rows: Vec<EvalRow>,
    /// Keyed by subset name, plus `overall`.
    pub summary: BTreeMap<String, SummaryCell>,
}

impl EvalReport {
    pub fn overall(&self) -> &SummaryCell {
        &self.summary["overall"]
    }

    pub fn subset(&self, subset: SubsetTag) -> Option<&SummaryCell> {
        self.summary.get(subset.as_str())
    }
}

struct RowDetail {
    row: EvalRow,
    kendall_diff: i64,
    kendall_pairs: u64,
    missing: usize,
    boxes: usize,
}

fn score_item(item: &EvalItem<'_>) -> RowDetail {
    let corr = rank_correlation(item.pred, item.gold);
    let (kendall_diff, kendall_pairs, n_common) = kendall_counts(item.pred, item.gold);
    let missing = item
        .doc
        .boxes
        .iter()
        .filter(|b| item.gold.rank(&b.id).is_none())
        .count();
    RowDetail {
        row: EvalRow {
            doc_id: item.doc.doc_id.clone(),
            subset: item.doc.subset,
            strategy: item.strategy.to_string(),
            tau: corr.map(|c| c.tau),
            rho: corr.map(|c| c.rho),
            n_common,
            missing_rate: missing_rate(item.gold, item.doc),
            pred_missing_rate: missing_rate(item.pred, item.doc),
            ser_precision: None,
            ser_recall: None,
            ser_f1: None,
        },
        kendall_diff,
        kendall_pairs,
        missing,
        boxes: item.doc.boxes.len(),
    }
}

fn summarize(details: &[&RowDetail], aggregation: Aggregation) -> SummaryCell {
    let defined: Vec<&RowDetail> = details.iter().copied().filter(|d| d.row.tau.is_some()).collect();
    let mean = |values: Vec<f64>| (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
    let (tau, rho, missing_rate) = match aggregation {
        Aggregation::MacroOverDocuments => (
            mean(defined.iter().filter_map(|d| d.row.tau).collect()),
            mean(defined.iter().filter_map(|d| d.row.rho).collect()),
            mean(details.iter().filter_map(|d| d.row.missing_rate).collect()),
        ),
        Aggregation::MicroPooled => {
            let pairs: u64 = defined.iter().map(|d| d.kendall_pairs).sum();
            let diff: i64 = defined.iter().map(|d| d.kendall_diff).sum();
            let weight: usize = defined.iter().map(|d| d.row.n_common).sum();
            let rho_sum: f64 = defined
                .iter()
                .map(|d| d.row.rho.unwrap_or(0.0) * d.row.n_common as f64)
                .sum();
            let boxes: usize = details.iter().map(|d| d.boxes).sum();
            let missing: usize = details.iter().map(|d| d.missing).sum();
            (
                (pairs > 0).then(|| diff as f64 / pairs as f64),
                (weight > 0).then(|| rho_sum / weight as f64),
                (boxes > 0).then(|| missing as f64 / boxes as f64),
            )
        }
    };
    SummaryCell {
        tau,
        rho,
        missing_rate,
        documents: details.len(),
        undefined: details.len() - defined.len(),
    }
}

/// Scores every item and aggregates per subset and overall. Per-document
/// scoring runs in parallel; the reduction is sequential in input order.
pub fn evaluate_corpus(items: &[EvalItem<'_>], aggregation: Aggregation) -> Result<EvalReport> {
    use rayon::prelude::*;

    if items.is_empty() {
        return Err(Error::EmptyInput("evaluation set"));
    }
    let details: Vec<RowDetail> = items.par_iter().map(score_item).collect();

    let mut by_subset: HashMap<SubsetTag, Vec<&RowDetail>> = HashMap::new();
    for d in &details {
        by_subset.entry(d.row.subset).or_default().push(d);
    }
    let mut summary = BTreeMap::new();
    for subset in SubsetTag::ALL {
        if let Some(group) = by_subset.get(&subset) {
            summary.insert(subset.as_str().to_string(), summarize(group, aggregation));
        }
    }
    let all: Vec<&RowDetail> = details.iter().collect();
    summary.insert("overall".to_string(), summarize(&all, aggregation));

    Ok(EvalReport {
        aggregation,
        rows: details.into_iter().map(|d| d.row).collect(),
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundingBox;
    use proptest::prelude::*;

    fn seq(ids: &[&str]) -> ReadingSequence {
        ReadingSequence::from_order(ids.iter().copied()).unwrap()
    }

    #[test]
    fn tau_examples() {
        let gold = seq(&["a", "b", "c", "d", "e"]);
        assert_eq!(kendall_tau(&gold, &gold), Some(1.0));
        assert_eq!(kendall_tau(&seq(&["e", "d", "c", "b", "a"]), &gold), Some(-1.0));
        let tau = kendall_tau(&seq(&["b", "a", "c"]), &seq(&["a", "b", "c"])).unwrap();
        assert!((tau - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rho_examples() {
        let gold = seq(&["a", "b", "c"]);
        assert_eq!(spearman_rho(&gold, &gold), Some(1.0));
        assert_eq!(spearman_rho(&seq(&["b", "a", "c"]), &gold), Some(0.5));
        assert_eq!(spearman_rho(&seq(&["d", "c", "b", "a"]), &seq(&["a", "b", "c", "d"])), Some(-1.0));
    }

    #[test]
    fn correlation_uses_common_boxes_only() {
        let pred = ReadingSequence::from_ordinals([("a", 0), ("b", -1), ("c", 1), ("d", 2)]).unwrap();
        let gold = ReadingSequence::from_ordinals([("a", 1), ("b", 0), ("c", 2), ("d", -1)]).unwrap();
        let corr = rank_correlation(&pred, &gold).unwrap();
        assert_eq!(corr.n_common, 2);
        assert_eq!(corr.tau, 1.0);
        assert_eq!(corr.rho, 1.0);
    }

    #[test]
    fn fewer_than_two_common_boxes_is_undefined() {
        let pred = ReadingSequence::from_ordinals([("a", 0), ("b", -1)]).unwrap();
        let gold = seq(&["a", "b"]);
        assert_eq!(kendall_tau(&pred, &gold), None);
        assert_eq!(spearman_rho(&pred, &gold), None);
        assert!(rank_correlation(&seq(&[]), &seq(&[])).is_none());
    }

    #[test]
    fn missing_rate_examples() {
        let boxes: Vec<BoundingBox> = (0..10).map(|i| BoundingBox::new(format!("b{i}"), [0., 0., 1., 1.], "")).collect();
        let doc = Document::new("d", 10., 10., boxes);
        let all: Vec<String> = (0..10).map(|i| format!("b{i}")).collect();
        assert_eq!(missing_rate(&ReadingSequence::from_order(all.clone()).unwrap(), &doc), Some(0.0));
        let none = ReadingSequence::from_ordinals(all.iter().map(|id| (id.clone(), -1))).unwrap();
        assert_eq!(missing_rate(&none, &doc), Some(1.0));
        let partial = ReadingSequence::from_ordinals(
            all.iter().enumerate().map(|(i, id)| (id.clone(), if i < 2 { -1 } else { i as i64 - 2 })),
        )
        .unwrap();
        assert_eq!(missing_rate(&partial, &doc), Some(0.2));
        assert_eq!(missing_rate(&seq(&[]), &Document::new("e", 1., 1., vec![])), None);
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("x", "x"), 0);
        assert_eq!(levenshtein("héllo", "hello"), 1);
    }

    #[test]
    fn anls_examples() {
        assert_eq!(anls("2019", &["2019"], 0.5).unwrap().value, 1.0);
        assert_eq!(anls("209", &["2019"], 0.5).unwrap().value, 0.75);
        assert_eq!(anls("cat", &["dog"], 0.5).unwrap().value, 0.0);
        assert_eq!(anls("  Paris ", &["nope", "paris"], 0.5).unwrap().value, 1.0);
        assert!(anls("x", &[] as &[&str], 0.5).is_err());
    }

    #[test]
    fn corpus_anls_is_mean_over_questions() {
        let qs = vec![("2019", vec!["2019"]), ("209", vec!["2019"]), ("cat", vec!["dog"])];
        let mean = corpus_anls(&qs, 0.5).unwrap();
        assert!((mean - 1.75 / 3.0).abs() < 1e-15);
    }

    fn tiny_doc(id: &str, subset: SubsetTag, n: usize) -> Document {
        let boxes = (0..n).map(|i| BoundingBox::new(format!("b{i}"), [0., i as f64, 1., i as f64 + 1.], "")).collect();
        Document::new(id, 10., 100., boxes).with_subset(subset)
    }

    #[test]
    fn corpus_means() {
        let d1 = tiny_doc("d1", SubsetTag::Weak, 3);
        let d2 = tiny_doc("d2", SubsetTag::Structured, 3);
        let gold = seq(&["b0", "b1", "b2"]);
        let swapped = seq(&["b1", "b0", "b2"]);
        let items = [
            EvalItem { doc: &d1, gold: &gold, pred: &gold, strategy: "s" },
            EvalItem { doc: &d2, gold: &gold, pred: &swapped, strategy: "s" },
        ];
        let report = evaluate_corpus(&items, Aggregation::MacroOverDocuments).unwrap();
        assert!((report.overall().tau.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(report.subset(SubsetTag::Weak).unwrap().tau, Some(1.0));
        assert_eq!(report.rows.len(), 2);

        let identical = [EvalItem { doc: &d1, gold: &gold, pred: &gold, strategy: "s" }];
        let report = evaluate_corpus(&identical, Aggregation::MicroPooled).unwrap();
        assert_eq!(report.overall().tau, Some(1.0));
        assert_eq!(report.overall().rho, Some(1.0));
        assert_eq!(report.overall().missing_rate, Some(0.0));
    }

    #[test]
    fn undefined_documents_are_excluded_and_counted() {
        let d1 = tiny_doc("d1", SubsetTag::Weak, 3);
        let d2 = tiny_doc("d2", SubsetTag::Weak, 1);
        let gold = seq(&["b0", "b1", "b2"]);
        let one = seq(&["b0"]);
        let items = [
            EvalItem { doc: &d1, gold: &gold, pred: &gold, strategy: "s" },
            EvalItem { doc: &d2, gold: &one, pred: &one, strategy: "s" },
        ];
        let report = evaluate_corpus(&items, Aggregation::MacroOverDocuments).unwrap();
        let overall = report.overall();
        assert_eq!(overall.tau, Some(1.0));
        assert_eq!(overall.undefined, 1);
        assert_eq!(overall.documents, 2);
        assert!(evaluate_corpus(&[], Aggregation::MacroOverDocuments).is_err());
    }

    fn arb_string() -> impl Strategy<Value = String> {
        proptest::collection::vec(prop_oneof![Just('a'), Just('b'), Just('c'), Just('é')], 0..8)
            .prop_map(|v| v.into_iter().collect())
    }

    fn arb_perm_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (2usize..15).prop_flat_map(|n| {
            let base: Vec<usize> = (0..n).collect();
            (Just(base.clone()).prop_shuffle(), Just(base).prop_shuffle())
        })
    }

    fn to_seq(order: &[usize]) -> ReadingSequence {
        ReadingSequence::from_order(order.iter().map(|i| format!("b{i}"))).unwrap()
    }

    proptest! {
        #[test]
        fn levenshtein_is_a_metric(a in arb_string(), b in arb_string(), c in arb_string()) {
            let ab = levenshtein(&a, &b);
            prop_assert_eq!(ab, levenshtein(&b, &a));
            prop_assert_eq!(levenshtein(&a, &a), 0);
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
        }

        #[test]
        fn correlations_are_symmetric((p, g) in arb_perm_pair()) {
            let (p, g) = (to_seq(&p), to_seq(&g));
            prop_assert_eq!(kendall_tau(&p, &g), kendall_tau(&g, &p));
            prop_assert_eq!(spearman_rho(&p, &g), spearman_rho(&g, &p));
        }

        #[test]
        fn correlations_ignore_relabeling((p, g) in arb_perm_pair(), offset in 1usize..50) {
            let relabel = |order: &[usize]| ReadingSequence::from_order(order.iter().map(|i| format!("x{}", i + offset))).unwrap();
            prop_assert_eq!(kendall_tau(&to_seq(&p), &to_seq(&g)), kendall_tau(&relabel(&p), &relabel(&g)));
            prop_assert_eq!(spearman_rho(&to_seq(&p), &to_seq(&g)), spearman_rho(&relabel(&p), &relabel(&g)));
        }

        #[test]
        fn anls_does_not_increase_with_distance(len in 1usize..12, k1 in 0usize..12, k2 in 0usize..12) {
            let (k1, k2) = (k1.min(len), k2.min(len));
            let gold: String = "a".repeat(len);
            let with_edits = |k: usize| format!("{}{}", "b".repeat(k), "a".repeat(len - k));
            let s1 = anls(&with_edits(k1), &[gold.as_str()], 0.5).unwrap().value;
            let s2 = anls(&with_edits(k2), &[gold.as_str()], 0.5).unwrap().value;
            if k1 <= k2 {
                prop_assert!(s1 >= s2);
            }
        }
    }
}
