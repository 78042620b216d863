//! Trainable logistic comparator over engineered pair features.
//!
//! Each unordered pair is scored in one canonical orientation (lower box id
//! on the left); the reverse orientation gets the exact complement, so
//! `score(a, b) + score(b, a) == 1.0` always holds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{pair_features, FeatureConfig, Regime, DEFAULT_HASH_WIDTH};
use super::logistic::{complementary_pair, logit, loss_and_gradient};
use super::{PairScore, PairwiseComparator};
use crate::error::{Error, Result};
use crate::model::{BoundingBox, Document, ReadingSequence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: Option<usize>,
    pub window: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparatorModel {
    pub regime: Regime,
    pub hash_width: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingMetadata>,
}

impl ComparatorModel {
    /// All-zero model of the right shape for `regime`.
    pub fn zeros(regime: Regime) -> Self {
        let features = FeatureConfig::new(regime);
        Self {
            regime,
            hash_width: features.hash_width,
            weights: vec![0.0; features.dimension()],
            bias: 0.0,
            training: None,
        }
    }

    pub fn features(&self) -> FeatureConfig {
        FeatureConfig {
            regime: self.regime,
            hash_width: self.hash_width,
        }
    }

    fn check_shape(&self) -> Result<()> {
        let found = self.features().dimension();
        if self.weights.len() != found {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found,
            });
        }
        Ok(())
    }

    /// Precedence probability for `(left, right)` on a page of `page_dims`.
    pub fn score(&self, left: &BoundingBox, right: &BoundingBox, page_dims: (f64, f64)) -> Result<PairScore> {
        self.check_shape()?;
        if page_dims.0.is_nan() || page_dims.1.is_nan() || page_dims.0 <= 0.0 || page_dims.1 <= 0.0 {
            return Err(Error::InvalidConfig(format!("page dimensions must be positive, got {page_dims:?}")));
        }
        if left.id == right.id {
            return Ok(PairScore::INDIFFERENT);
        }
        let flipped = left.id > right.id;
        let (a, b) = if flipped { (right, left) } else { (left, right) };
        let z = logit(&self.weights, self.bias, &pair_features(&self.features(), a, b, page_dims));
        let (forward, backward) = complementary_pair(z);
        PairScore::new(if flipped { backward } else { forward })
    }
}

impl PairwiseComparator for ComparatorModel {
    fn compare(&mut self, doc: &Document, left: &BoundingBox, right: &BoundingBox) -> Result<PairScore> {
        self.score(left, right, (doc.page_width, doc.page_height))
    }

    fn is_antisymmetric(&self) -> bool {
        true
    }
}

impl PairwiseComparator for &ComparatorModel {
    fn compare(&mut self, doc: &Document, left: &BoundingBox, right: &BoundingBox) -> Result<PairScore> {
        self.score(left, right, (doc.page_width, doc.page_height))
    }

    fn is_antisymmetric(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPair<'a> {
    pub left: &'a BoundingBox,
    pub right: &'a BoundingBox,
    /// 1 when `left` precedes `right` in the gold order.
    pub label: u8,
}

/// Every ordered pair of gold-ordered boxes, both directions. Missing boxes
/// are skipped. With a window `w`, only pairs at most `w` ordinals apart are
/// kept.
pub fn make_pairs<'a>(doc: &'a Document, gold: &ReadingSequence, window: Option<usize>) -> Result<Vec<LabeledPair<'a>>> {
    let ranked: Vec<(&BoundingBox, usize)> = doc
        .boxes
        .iter()
        .filter_map(|b| Some((b, gold.rank(&b.id)?)))
        .collect();
    if ranked.len() < 2 {
        return Err(Error::InsufficientPairs);
    }
    let mut pairs = Vec::with_capacity(ranked.len() * (ranked.len() - 1));
    for &(left, rl) in &ranked {
        for &(right, rr) in &ranked {
            if std::ptr::eq(left, right) {
                continue;
            }
            if window.is_some_and(|w| rl.abs_diff(rr) > w) {
                continue;
            }
            pairs.push(LabeledPair {
                left,
                right,
                label: u8::from(rl < rr),
            });
        }
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub regime: Regime,
    pub hash_width: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    /// Mini-batch size; `None` runs full-batch gradient descent.
    pub batch_size: Option<usize>,
    pub window: Option<usize>,
    /// Share of documents held out for pair accuracy.
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            regime: Regime::Box,
            hash_width: DEFAULT_HASH_WIDTH,
            epochs: 40,
            learning_rate: 0.5,
            l2: 1e-5,
            batch_size: Some(32),
            window: None,
            holdout_fraction: 0.2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean training loss after each epoch.
    pub loss_history: Vec<f64>,
    pub final_loss: f64,
    pub train_pairs: usize,
    pub heldout_pairs: usize,
    pub train_pair_accuracy: f64,
    /// `None` when no document was held out.
    pub heldout_pair_accuracy: Option<f64>,
}

struct PairSet {
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
}

fn canonical_pairs(corpus: &[(&Document, &ReadingSequence)], features: &FeatureConfig, window: Option<usize>) -> PairSet {
    let mut set = PairSet { xs: Vec::new(), ys: Vec::new() };
    for (doc, gold) in corpus {
        let page = (doc.page_width, doc.page_height);
        for pair in make_pairs(doc, gold, window).expect("filtered to >= 2 ordered boxes") {
            let label = f64::from(pair.label);
            let (x, y) = if pair.left.id <= pair.right.id {
                (pair_features(features, pair.left, pair.right, page), label)
            } else {
                (pair_features(features, pair.right, pair.left, page), 1.0 - label)
            };
            set.xs.push(x);
            set.ys.push(y);
        }
    }
    set
}

fn pair_accuracy(model: &ComparatorModel, set: &PairSet) -> f64 {
    if set.xs.is_empty() {
        return 0.0;
    }
    let correct: f64 = set
        .xs
        .iter()
        .zip(&set.ys)
        .map(|(x, &y)| {
            let z = logit(&model.weights, model.bias, x);
            if z == 0.0 {
                0.5
            } else if (z > 0.0) == (y > 0.5) {
                1.0
            } else {
                0.0
            }
        })
        .sum();
    correct / set.xs.len() as f64
}

/// Fits a logistic comparator by (mini-batch) gradient descent on all
/// labeled pairs of the training documents. Deterministic for a fixed seed.
pub fn train(corpus: &[(&Document, &ReadingSequence)], cfg: &TrainConfig) -> Result<(ComparatorModel, TrainReport)> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("training corpus"));
    }
    if cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 || !(0.0..).contains(&cfg.l2) || !(0.0..1.0).contains(&cfg.holdout_fraction) {
        return Err(Error::InvalidConfig("learning_rate > 0, l2 >= 0 and holdout_fraction in [0, 1) required".into()));
    }
    if cfg.batch_size == Some(0) || cfg.hash_width == 0 {
        return Err(Error::InvalidConfig("batch_size and hash_width must be positive".into()));
    }
    let usable: Vec<(&Document, &ReadingSequence)> = corpus
        .iter()
        .copied()
        .filter(|(_, gold)| gold.ordered_count() >= 2)
        .collect();
    if usable.is_empty() {
        return Err(Error::InsufficientPairs);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut doc_order: Vec<usize> = (0..usable.len()).collect();
    doc_order.shuffle(&mut rng);
    let holdout = if usable.len() >= 2 {
        ((usable.len() as f64 * cfg.holdout_fraction).round() as usize).min(usable.len() - 1)
    } else {
        0
    };
    let (held, trained) = doc_order.split_at(holdout);
    let pick = |idx: &[usize]| -> Vec<(&Document, &ReadingSequence)> { idx.iter().map(|&i| usable[i]).collect() };

    let features = FeatureConfig {
        regime: cfg.regime,
        hash_width: cfg.hash_width,
    };
    let train_set = canonical_pairs(&pick(trained), &features, cfg.window);
    let held_set = canonical_pairs(&pick(held), &features, cfg.window);
    if train_set.xs.is_empty() {
        return Err(Error::InsufficientPairs);
    }

    let mut model = ComparatorModel {
        regime: cfg.regime,
        hash_width: cfg.hash_width,
        weights: vec![0.0; features.dimension()],
        bias: 0.0,
        training: Some(TrainingMetadata {
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            l2: cfg.l2,
            batch_size: cfg.batch_size,
            window: cfg.window,
            seed: cfg.seed,
        }),
    };

    let mut order: Vec<usize> = (0..train_set.xs.len()).collect();
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut batch_x: Vec<Vec<f64>> = Vec::new();
    let mut batch_y: Vec<f64> = Vec::new();
    for _ in 0..cfg.epochs {
        match cfg.batch_size {
            None => step(&mut model, &train_set.xs, &train_set.ys, cfg),
            Some(size) => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(size) {
                    batch_x.clear();
                    batch_y.clear();
                    batch_x.extend(chunk.iter().map(|&i| train_set.xs[i].clone()));
                    batch_y.extend(chunk.iter().map(|&i| train_set.ys[i]));
                    step(&mut model, &batch_x, &batch_y, cfg);
                }
            }
        }
        let (loss, _, _) = loss_and_gradient(&model.weights, model.bias, &train_set.xs, &train_set.ys, cfg.l2);
        loss_history.push(loss);
    }
    let final_loss = match loss_history.last() {
        Some(&l) => l,
        None => loss_and_gradient(&model.weights, model.bias, &train_set.xs, &train_set.ys, cfg.l2).0,
    };

    let report = TrainReport {
        final_loss,
        loss_history,
        train_pairs: train_set.xs.len(),
        heldout_pairs: held_set.xs.len(),
        train_pair_accuracy: pair_accuracy(&model, &train_set),
        heldout_pair_accuracy: (!held_set.xs.is_empty()).then(|| pair_accuracy(&model, &held_set)),
    };
    Ok((model, report))
}

fn step(model: &mut ComparatorModel, xs: &[Vec<f64>], ys: &[f64], cfg: &TrainConfig) {
    let (_, grad, grad_bias) = loss_and_gradient(&model.weights, model.bias, xs, ys, cfg.l2);
    for (w, g) in model.weights.iter_mut().zip(&grad) {
        *w -= cfg.learning_rate * g;
    }
    model.bias -= cfg.learning_rate * grad_bias;
}
