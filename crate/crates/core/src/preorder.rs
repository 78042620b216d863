//! Comparator-driven preordering of a box sequence.
//!
//! [`preorder`] runs adjacent-swap bubble passes: pass `i` visits positions
//! `j = 0..=l-i-2`, asks the comparator for `p(r_j, r_{j+1})` and swaps the
//! two when `p < 0.5`. With caching and early exit off this makes exactly
//! `l(l-1)/2` comparator calls.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;

use crate::comparator::external::{ExternalComparator, DEFAULT_TIMEOUT};
use crate::comparator::{PairScore, PairwiseComparator, Regime};
use crate::error::{Error, Result};
use crate::model::{Document, ReadingSequence};
use crate::orderers::{default_order, xy_order, z_order, ZOrderConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PreorderOptions {
    /// Reuse the first score of a repeated `(left, right)` query.
    pub cache: bool,
    /// Stop after a pass without swaps.
    pub early_exit: bool,
    /// Replace the bubble passes by a stable merge sort driven by the same
    /// comparator. Equivalent only for transitive comparators.
    pub merge_sort: bool,
    /// Record the swap positions of every pass.
    pub log_swaps: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PreorderTrace {
    pub comparator_calls: usize,
    pub cache_hits: usize,
    pub swaps: usize,
    pub passes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_log: Option<Vec<Vec<usize>>>,
}

struct Scorer<'c, 'd> {
    doc: &'d Document,
    comparator: &'c mut dyn PairwiseComparator,
    cache: Option<HashMap<(usize, usize), PairScore>>,
    antisymmetric: bool,
    trace: PreorderTrace,
}

impl Scorer<'_, '_> {
    fn p(&mut self, left: usize, right: usize) -> Result<f64> {
        if let Some(score) = self.cache.as_ref().and_then(|c| c.get(&(left, right))) {
            self.trace.cache_hits += 1;
            return Ok(score.p());
        }
        self.trace.comparator_calls += 1;
        let score = self
            .comparator
            .compare(self.doc, &self.doc.boxes[left], &self.doc.boxes[right])?;
        if let Some(cache) = self.cache.as_mut() {
            cache.insert((left, right), score);
            if self.antisymmetric {
                cache.insert((right, left), PairScore::new(1.0 - score.p())?);
            }
        }
        Ok(score.p())
    }
}

fn resolve(doc: &Document, order: &[&str]) -> Result<Vec<usize>> {
    let index = doc.id_index();
    let mut seen = vec![false; doc.boxes.len()];
    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let &i = index.get(id).ok_or_else(|| Error::UnknownBox((*id).to_owned()))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidSequence(format!("box `{id}` appears twice in the input order")));
        }
        out.push(i);
    }
    if out.len() != doc.boxes.len() {
        return Err(Error::InvalidSequence(format!(
            "input order covers {} of {} boxes",
            out.len(),
            doc.boxes.len()
        )));
    }
    Ok(out)
}

fn bubble(scorer: &mut Scorer<'_, '_>, r: &mut [usize], opts: &PreorderOptions) -> Result<()> {
    let l = r.len();
    for i in 0..l.saturating_sub(1) {
        let mut swapped = Vec::new();
        for j in 0..l - i - 1 {
            if scorer.p(r[j], r[j + 1])? < 0.5 {
                r.swap(j, j + 1);
                swapped.push(j);
            }
        }
        scorer.trace.passes += 1;
        scorer.trace.swaps += swapped.len();
        let done = opts.early_exit && swapped.is_empty();
        if let Some(log) = scorer.trace.swap_log.as_mut() {
            log.push(swapped);
        }
        if done {
            break;
        }
    }
    Ok(())
}

fn merge_sort(scorer: &mut Scorer<'_, '_>, r: &mut Vec<usize>) -> Result<()> {
    if r.len() < 2 {
        return Ok(());
    }
    let mut right = r.split_off(r.len() / 2);
    let mut left = std::mem::take(r);
    merge_sort(scorer, &mut left)?;
    merge_sort(scorer, &mut right)?;
    let (mut a, mut b) = (0, 0);
    while a < left.len() && b < right.len() {
        // a right element overtakes every remaining left element
        if scorer.p(left[a], right[b])? < 0.5 {
            scorer.trace.swaps += left.len() - a;
            r.push(right[b]);
            b += 1;
        } else {
            r.push(left[a]);
            a += 1;
        }
    }
    r.extend_from_slice(&left[a..]);
    r.extend_from_slice(&right[b..]);
    Ok(())
}

/// Rearranges `order`, a permutation of the document's box ids, with the
/// comparator. On comparator failure the error carries the trace so far.
pub fn preorder(
    doc: &Document,
    order: &[&str],
    comparator: &mut dyn PairwiseComparator,
    opts: &PreorderOptions,
) -> Result<(ReadingSequence, PreorderTrace)> {
    let mut r = resolve(doc, order)?;
    let antisymmetric = comparator.is_antisymmetric();
    let mut scorer = Scorer {
        doc,
        comparator,
        cache: opts.cache.then(HashMap::new),
        antisymmetric,
        trace: PreorderTrace {
            swap_log: opts.log_swaps.then(Vec::new),
            ..PreorderTrace::default()
        },
    };
    let outcome = if opts.merge_sort {
        merge_sort(&mut scorer, &mut r)
    } else {
        bubble(&mut scorer, &mut r, opts)
    };
    let trace = scorer.trace;
    if let Err(source) = outcome {
        return Err(Error::Preorder {
            trace,
            source: Box::new(source),
        });
    }
    let seq = ReadingSequence::from_order(r.iter().map(|&i| doc.boxes[i].id.as_str())).expect("permutation of unique ids");
    Ok((seq, trace))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    DefaultOcr,
    ZOrder,
    XyOrder,
    Model,
    ExternalModel,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::DefaultOcr,
        Strategy::ZOrder,
        Strategy::XyOrder,
        Strategy::Model,
        Strategy::ExternalModel,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::DefaultOcr => "default-ocr",
            Strategy::ZOrder => "z-order",
            Strategy::XyOrder => "xy-order",
            Strategy::Model => "model",
            Strategy::ExternalModel => "external-model",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::UnknownStrategy(s.to_owned()))
    }
}

/// Everything a strategy may need. Model strategies use `comparator` when
/// set; `external-model` otherwise spawns `external_command` for the call.
pub struct StrategyConfig<'a> {
    pub z_order: ZOrderConfig,
    pub comparator: Option<&'a mut dyn PairwiseComparator>,
    pub external_command: Option<String>,
    pub regime: Regime,
    pub timeout: Duration,
    pub preorder: PreorderOptions,
}

impl Default for StrategyConfig<'_> {
    fn default() -> Self {
        Self {
            z_order: ZOrderConfig::default(),
            comparator: None,
            external_command: None,
            regime: Regime::Box,
            timeout: DEFAULT_TIMEOUT,
            preorder: PreorderOptions::default(),
        }
    }
}

impl<'a> StrategyConfig<'a> {
    pub fn with_comparator(comparator: &'a mut dyn PairwiseComparator) -> Self {
        Self {
            comparator: Some(comparator),
            ..Self::default()
        }
    }
}

/// Orders `doc` with the named strategy. Model strategies preorder the OCR
/// emission order.
pub fn order_with_strategy(doc: &Document, strategy: Strategy, cfg: &mut StrategyConfig<'_>) -> Result<ReadingSequence> {
    match strategy {
        Strategy::DefaultOcr => Ok(default_order(doc)),
        Strategy::ZOrder => z_order(doc, &cfg.z_order),
        Strategy::XyOrder => Ok(xy_order(doc)),
        Strategy::Model | Strategy::ExternalModel => {
            let ids: Vec<&str> = doc.box_ids().collect();
            if let Some(cmp) = cfg.comparator.as_deref_mut() {
                return Ok(preorder(doc, &ids, cmp, &cfg.preorder)?.0);
            }
            match (strategy, &cfg.external_command) {
                (Strategy::ExternalModel, Some(command)) => {
                    let mut ext = ExternalComparator::spawn(command, cfg.regime.as_str(), cfg.timeout)?;
                    Ok(preorder(doc, &ids, &mut ext, &cfg.preorder)?.0)
                }
                (Strategy::Model, _) => Err(Error::MissingModel("model")),
                _ => Err(Error::MissingModel("external-model")),
            }
        }
    }
}
