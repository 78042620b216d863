//! Domain types shared by every stage: boxes, documents, gaze points and
//! reading sequences.
//!
//! Coordinates are page pixels with the origin at the top-left corner and
//! `y` growing downward. Ordinals are 0-based; a missing ordinal is stored as
//! `None` and serialized as `-1`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An OCR-detected rectangle and the text it contains.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub id: String,
    pub x_up: f64,
    pub y_up: f64,
    pub x_down: f64,
    pub y_down: f64,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centroid {
    pub x: f64,
    pub y: f64,
}

impl Centroid {
    pub fn distance(&self, other: &Centroid) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl BoundingBox {
    pub fn new(id: impl Into<String>, bbox: [f64; 4], text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            x_up: bbox[0],
            y_up: bbox[1],
            x_down: bbox[2],
            y_down: bbox[3],
            text: text.into(),
        }
    }

    pub fn bbox(&self) -> [f64; 4] {
        [self.x_up, self.y_up, self.x_down, self.y_down]
    }

    /// Midpoint of the two corners.
    pub fn centroid(&self) -> Centroid {
        Centroid {
            x: (self.x_up + self.x_down) / 2.0,
            y: (self.y_up + self.y_down) / 2.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_down - self.x_up
    }

    pub fn height(&self) -> f64 {
        self.y_down - self.y_up
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Closed-rectangle containment.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_up && x <= self.x_down && y >= self.y_up && y <= self.y_down
    }

    /// Euclidean distance from a point to the rectangle; zero inside.
    pub fn distance_to_point(&self, x: f64, y: f64) -> f64 {
        let dx = (self.x_up - x).max(0.0).max(x - self.x_down);
        let dy = (self.y_up - y).max(0.0).max(y - self.y_down);
        dx.hypot(dy)
    }

    /// True when the vertical extents share a segment of positive length, or
    /// when both extents are the same degenerate point.
    pub fn y_overlaps(&self, other: &BoundingBox) -> bool {
        let lo = self.y_up.max(other.y_up);
        let hi = self.y_down.min(other.y_down);
        lo < hi || (self.y_up == other.y_up && self.y_down == other.y_down)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            x_up: self.x_up + dx,
            y_up: self.y_up + dy,
            x_down: self.x_down + dx,
            y_down: self.y_down + dy,
            ..self.clone()
        }
    }
}

/// Coarse document category used for per-subset aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SubsetTag {
    Weak,
    Structured,
    Infograph,
    #[default]
    Other,
}

impl SubsetTag {
    pub const ALL: [SubsetTag; 4] = [
        SubsetTag::Weak,
        SubsetTag::Structured,
        SubsetTag::Infograph,
        SubsetTag::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SubsetTag::Weak => "weak",
            SubsetTag::Structured => "structured",
            SubsetTag::Infograph => "infograph",
            SubsetTag::Other => "other",
        }
    }
}

impl fmt::Display for SubsetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubsetTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "weak" => Ok(SubsetTag::Weak),
            "structured" => Ok(SubsetTag::Structured),
            "infograph" | "infographic" | "inforgraph" => Ok(SubsetTag::Infograph),
            "other" => Ok(SubsetTag::Other),
            other => Err(Error::InvalidConfig(format!("unknown subset tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaPair {
    pub question: String,
    pub answers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub page_width: f64,
    pub page_height: f64,
    pub subset: SubsetTag,
    pub split: Option<Split>,
    /// Boxes in OCR emission order.
    pub boxes: Vec<BoundingBox>,
    pub qa: Vec<QaPair>,
    /// Path to the page image; never decoded here.
    pub image: Option<String>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, page_width: f64, page_height: f64, boxes: Vec<BoundingBox>) -> Self {
        Self {
            doc_id: doc_id.into(),
            page_width,
            page_height,
            subset: SubsetTag::Other,
            split: None,
            boxes,
            qa: Vec::new(),
            image: None,
        }
    }

    pub fn with_subset(mut self, subset: SubsetTag) -> Self {
        self.subset = subset;
        self
    }

    pub fn box_by_id(&self, id: &str) -> Option<&BoundingBox> {
        self.boxes.iter().find(|b| b.id == id)
    }

    pub fn id_index(&self) -> HashMap<&str, usize> {
        self.boxes
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.as_str(), i))
            .collect()
    }

    pub fn box_ids(&self) -> impl Iterator<Item = &str> {
        self.boxes.iter().map(|b| b.id.as_str())
    }

    /// Median box height, or 0 for an empty document.
    pub fn median_box_height(&self) -> f64 {
        let mut heights: Vec<f64> = self.boxes.iter().map(BoundingBox::height).collect();
        if heights.is_empty() {
            return 0.0;
        }
        heights.sort_by(f64::total_cmp);
        let mid = heights.len() / 2;
        if heights.len().is_multiple_of(2) {
            (heights[mid - 1] + heights[mid]) / 2.0
        } else {
            heights[mid]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    PageSize,
    NonFiniteOrNegative,
    InvertedCorners,
    OutsidePage,
    DuplicateId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub box_id: Option<String>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.box_id {
            Some(id) => write!(f, "box `{id}`: {:?}", self.rule),
            None => write!(f, "{:?}", self.rule),
        }
    }
}

/// Checks every document and box invariant. An empty report means the
/// document is well formed.
pub fn validate_document(doc: &Document) -> Vec<Violation> {
    let mut report = Vec::new();
    if !(doc.page_width.is_finite() && doc.page_height.is_finite())
        || doc.page_width <= 0.0
        || doc.page_height <= 0.0
    {
        report.push(Violation {
            box_id: None,
            rule: Rule::PageSize,
        });
    }
    let mut seen = HashSet::new();
    for b in &doc.boxes {
        let violation = |rule| Violation {
            box_id: Some(b.id.clone()),
            rule,
        };
        let coords = b.bbox();
        if coords.iter().any(|c| !c.is_finite() || *c < 0.0) {
            report.push(violation(Rule::NonFiniteOrNegative));
        } else if b.x_up > b.x_down || b.y_up > b.y_down {
            report.push(violation(Rule::InvertedCorners));
        } else if b.x_down > doc.page_width || b.y_down > doc.page_height {
            report.push(violation(Rule::OutsidePage));
        }
        if !seen.insert(b.id.as_str()) {
            report.push(violation(Rule::DuplicateId));
        }
    }
    report
}

/// [`validate_document`] as a `Result`.
pub fn ensure_valid(doc: &Document) -> Result<()> {
    let violations = validate_document(doc);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidDocument {
            doc_id: doc.doc_id.clone(),
            violations,
        })
    }
}

/// One eye-tracker sample. Only position and order feed the alignment; the
/// optional channels are carried through untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub duration: Option<f64>,
    pub pupil: Option<f64>,
}

impl GazePoint {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Self {
            t,
            x,
            y,
            duration: None,
            pupil: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GazeTrajectory {
    pub doc_id: String,
    pub points: Vec<GazePoint>,
}

impl GazeTrajectory {
    pub fn new(doc_id: impl Into<String>, points: Vec<GazePoint>) -> Self {
        Self {
            doc_id: doc_id.into(),
            points,
        }
    }

    pub fn check_monotonic(&self) -> Result<()> {
        for (i, w) in self.points.windows(2).enumerate() {
            // NaN timestamps fail this comparison as well.
            if w[1].t.partial_cmp(&w[0].t).is_none_or(|o| o.is_lt()) {
                return Err(Error::DecreasingTimestamp {
                    index: i + 1,
                    previous: w[0].t,
                    current: w[1].t,
                });
            }
        }
        Ok(())
    }
}

/// Assignment of ordinals to box ids. Non-missing ordinals always form a
/// permutation of `0..k`; the constructors reject anything else.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReadingSequence {
    ordinals: IndexMap<String, Option<usize>>,
}

impl ReadingSequence {
    /// Builds a sequence from `(box_id, ordinal)` pairs where `-1` marks a
    /// missing box.
    pub fn from_ordinals<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        let mut ordinals = IndexMap::new();
        for (id, ordinal) in entries {
            let id = id.into();
            let value = match ordinal {
                -1 => None,
                o if o >= 0 => Some(o as usize),
                o => {
                    return Err(Error::InvalidSequence(format!(
                        "box `{id}` has ordinal {o}; only -1 may be negative"
                    )))
                }
            };
            if ordinals.insert(id.clone(), value).is_some() {
                return Err(Error::InvalidSequence(format!("box `{id}` listed twice")));
            }
        }
        let seq = Self { ordinals };
        seq.check_contiguous()?;
        Ok(seq)
    }

    /// Full permutation: the i-th id gets ordinal i.
    pub fn from_order<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_ordinals(ids.into_iter().enumerate().map(|(i, id)| (id, i as i64)))
    }

    /// Every box of `doc` appears; boxes listed in `ordered` get their
    /// position there, the rest are missing.
    pub fn from_partial(doc: &Document, ordered: &[&str]) -> Result<Self> {
        let mut rank: HashMap<&str, usize> = HashMap::with_capacity(ordered.len());
        for (i, id) in ordered.iter().enumerate() {
            if doc.box_by_id(id).is_none() {
                return Err(Error::UnknownBox((*id).to_string()));
            }
            if rank.insert(id, i).is_some() {
                return Err(Error::InvalidSequence(format!("box `{id}` listed twice")));
            }
        }
        let ordinals = doc
            .boxes
            .iter()
            .map(|b| (b.id.clone(), rank.get(b.id.as_str()).copied()))
            .collect();
        Ok(Self { ordinals })
    }

    fn check_contiguous(&self) -> Result<()> {
        let k = self.ordered_count();
        let mut used = vec![false; k];
        for (id, ordinal) in &self.ordinals {
            if let Some(o) = *ordinal {
                if o >= k {
                    return Err(Error::InvalidSequence(format!(
                        "box `{id}` has ordinal {o} but only {k} boxes are ordered"
                    )));
                }
                if std::mem::replace(&mut used[o], true) {
                    return Err(Error::InvalidSequence(format!("ordinal {o} used twice")));
                }
            }
        }
        Ok(())
    }

    /// Box ids in ordinal order; missing boxes are left out.
    pub fn as_permutation(&self) -> Vec<&str> {
        let mut out = vec![""; self.ordered_count()];
        for (id, ordinal) in &self.ordinals {
            if let Some(o) = *ordinal {
                out[o] = id.as_str();
            }
        }
        out
    }

    /// `None` when the box is missing or not part of the sequence.
    pub fn rank(&self, id: &str) -> Option<usize> {
        self.ordinals.get(id).copied().flatten()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ordinals.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.ordinals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinals.is_empty()
    }

    pub fn ordered_count(&self) -> usize {
        self.ordinals.values().filter(|o| o.is_some()).count()
    }

    pub fn missing_count(&self) -> usize {
        self.len() - self.ordered_count()
    }

    pub fn is_full_permutation(&self) -> bool {
        self.missing_count() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<usize>)> {
        self.ordinals.iter().map(|(id, o)| (id.as_str(), *o))
    }

    /// `(box_id, ordinal)` with `-1` for missing boxes, in insertion order.
    pub fn to_signed(&self) -> Vec<(String, i64)> {
        self.ordinals
            .iter()
            .map(|(id, o)| (id.clone(), o.map_or(-1, |o| o as i64)))
            .collect()
    }

    /// Verifies that every id belongs to `doc`.
    pub fn check_against(&self, doc: &Document) -> Result<()> {
        let index = doc.id_index();
        match self.ordinals.keys().find(|id| !index.contains_key(id.as_str())) {
            Some(id) => Err(Error::UnknownBox(id.clone())),
            None => Ok(()),
        }
    }
}
