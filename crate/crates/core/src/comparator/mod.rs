//! Pairwise precedence comparators.
//!
//! A comparator answers one question about an ordered pair of boxes: with
//! what probability does the left box come before the right box in reading
//! order? `p = 1` means "left first", `p = 0` means "right first" and `0.5`
//! means no preference.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{BoundingBox, Document, ReadingSequence};

pub mod external;
pub mod features;
pub mod logistic;
mod native;

pub use features::{pair_features, FeatureConfig, Regime};
pub use native::{make_pairs, train, ComparatorModel, LabeledPair, TrainConfig, TrainReport, TrainingMetadata};

/// Probability that the left box precedes the right box.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PairScore(f64);

impl PairScore {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::InvalidConfig(format!("pair score {p} is outside [0, 1]")))
        }
    }

    pub const INDIFFERENT: PairScore = PairScore(0.5);

    pub fn p(self) -> f64 {
        self.0
    }

    pub fn left_first(self) -> bool {
        self.0 > 0.5
    }
}

impl fmt::Display for PairScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub trait PairwiseComparator {
    fn compare(&mut self, doc: &Document, left: &BoundingBox, right: &BoundingBox) -> Result<PairScore>;

    /// True when `compare(b, a) = 1 - compare(a, b)` holds by construction,
    /// which lets callers fill in the reverse pair without asking.
    fn is_antisymmetric(&self) -> bool {
        false
    }
}

impl<T: PairwiseComparator + ?Sized> PairwiseComparator for &mut T {
    fn compare(&mut self, doc: &Document, left: &BoundingBox, right: &BoundingBox) -> Result<PairScore> {
        (**self).compare(doc, left, right)
    }

    fn is_antisymmetric(&self) -> bool {
        (**self).is_antisymmetric()
    }
}

impl<T: PairwiseComparator + ?Sized> PairwiseComparator for Box<T> {
    fn compare(&mut self, doc: &Document, left: &BoundingBox, right: &BoundingBox) -> Result<PairScore> {
        (**self).compare(doc, left, right)
    }

    fn is_antisymmetric(&self) -> bool {
        (**self).is_antisymmetric()
    }
}

/// Comparator induced by a known order: 1 if left ranks first, 0 if right
/// does, 0.5 when either box is unranked.
#[derive(Debug, Clone)]
pub struct OrderComparator {
    ranks: HashMap<String, usize>,
}

impl OrderComparator {
    pub fn new(order: &ReadingSequence) -> Self {
        Self {
            ranks: order
                .iter()
                .filter_map(|(id, r)| Some((id.to_string(), r?)))
                .collect(),
        }
    }
}

impl PairwiseComparator for OrderComparator {
    fn compare(&mut self, _doc: &Document, left: &BoundingBox, right: &BoundingBox) -> Result<PairScore> {
        let p = match (self.ranks.get(&left.id), self.ranks.get(&right.id)) {
            (Some(l), Some(r)) if l < r => 1.0,
            (Some(l), Some(r)) if l > r => 0.0,
            _ => 0.5,
        };
        Ok(PairScore(p))
    }

    fn is_antisymmetric(&self) -> bool {
        true
    }
}

/// "Further left reads first", by centroid x.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeftOfComparator;

impl LeftOfComparator {
    pub fn probability(left: &BoundingBox, right: &BoundingBox) -> f64 {
        let (l, r) = (left.centroid().x, right.centroid().x);
        if l < r {
            1.0
        } else if l > r {
            0.0
        } else {
            0.5
        }
    }
}

impl PairwiseComparator for LeftOfComparator {
    fn compare(&mut self, _doc: &Document, left: &BoundingBox, right: &BoundingBox) -> Result<PairScore> {
        Ok(PairScore(Self::probability(left, right)))
    }

    fn is_antisymmetric(&self) -> bool {
        true
    }
}

/// Adapts a closure returning a raw probability. Out-of-range values are
/// rejected as errors.
pub struct FnComparator<F>(pub F);

impl<F> PairwiseComparator for FnComparator<F>
where
    F: FnMut(&BoundingBox, &BoundingBox) -> f64,
{
    fn compare(&mut self, _doc: &Document, left: &BoundingBox, right: &BoundingBox) -> Result<PairScore> {
        PairScore::new((self.0)(left, right))
    }
}
