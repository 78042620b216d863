//! Turning a gaze trajectory into a reading sequence.
//!
//! The pipeline is hit-testing with a peripheral tolerance, first-visit
//! ordering (later returns to a box are dropped), then nearest-neighbor
//! insertion of boxes the gaze skipped.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Document, GazeTrajectory, ReadingSequence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentConfig {
    /// Maximum point-to-box distance for a peripheral hit. `None` uses half
    /// the median box height of the document.
    pub periphery_radius: Option<f64>,
    /// Keep only the first visit of each box. When off, a box takes the
    /// position of its latest visit.
    pub dedupe: bool,
    /// Insert skipped boxes next to their nearest ordered neighbor.
    pub repair: bool,
    /// Repair reach as a multiple of the periphery radius.
    pub repair_reach_factor: f64,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            periphery_radius: None,
            dedupe: true,
            repair: true,
            repair_reach_factor: 3.0,
        }
    }
}

impl AlignmentConfig {
    pub fn radius_for(&self, doc: &Document) -> f64 {
        self.periphery_radius
            .unwrap_or_else(|| doc.median_box_height() / 2.0)
    }

    pub fn repair_reach_for(&self, doc: &Document) -> f64 {
        self.radius_for(doc) * self.repair_reach_factor
    }

    fn validate(&self) -> Result<()> {
        if let Some(r) = self.periphery_radius {
            if !(0.0..).contains(&r) {
                return Err(Error::InvalidConfig(format!("periphery_radius must be >= 0, got {r}")));
            }
        }
        if !(0.0..).contains(&self.repair_reach_factor) {
            return Err(Error::InvalidConfig("repair_reach_factor must be >= 0".into()));
        }
        Ok(())
    }
}

/// Which box each gaze point landed on.
#[derive(Debug, Clone, PartialEq)]
pub struct RawAssignment {
    box_ids: Vec<String>,
    hits: Vec<Option<usize>>,
    visits: Vec<Vec<usize>>,
}

impl RawAssignment {
    /// Box id hit by each gaze point, `None` for a miss.
    pub fn hits(&self) -> impl Iterator<Item = Option<&str>> {
        self.hits.iter().map(|h| h.map(|i| self.box_ids[i].as_str()))
    }

    /// Gaze-point indices that touched `box_id`, in time order.
    pub fn visits(&self, box_id: &str) -> &[usize] {
        self.box_ids
            .iter()
            .position(|id| id == box_id)
            .map_or(&[], |i| self.visits[i].as_slice())
    }

    pub fn miss_count(&self) -> usize {
        self.hits.iter().filter(|h| h.is_none()).count()
    }

    fn sequence_by(&self, key: impl Fn(&[usize]) -> Option<usize>) -> ReadingSequence {
        let mut visited: Vec<(usize, usize)> = self
            .visits
            .iter()
            .enumerate()
            .filter_map(|(b, v)| Some((key(v)?, b)))
            .collect();
        visited.sort_unstable();
        let mut ordinals = vec![-1i64; self.box_ids.len()];
        for (rank, &(_, b)) in visited.iter().enumerate() {
            ordinals[b] = rank as i64;
        }
        ReadingSequence::from_ordinals(self.box_ids.iter().cloned().zip(ordinals))
            .expect("ranks are a compact permutation")
    }
}

fn area_then_id(doc: &Document, a: usize, b: usize) -> Ordering {
    doc.boxes[a]
        .area()
        .total_cmp(&doc.boxes[b].area())
        .then_with(|| doc.boxes[a].id.cmp(&doc.boxes[b].id))
}

/// Hit-tests every gaze point against the document boxes.
///
/// A point inside several boxes goes to the smallest one (ties: lowest id).
/// A point inside none goes to the box with the nearest boundary if that
/// distance is within the periphery radius, otherwise it is a miss.
pub fn assign_gaze(doc: &Document, traj: &GazeTrajectory, cfg: &AlignmentConfig) -> Result<RawAssignment> {
    cfg.validate()?;
    traj.check_monotonic()?;
    let radius = cfg.radius_for(doc);
    let mut visits = vec![Vec::new(); doc.boxes.len()];
    let hits: Vec<Option<usize>> = traj
        .points
        .iter()
        .enumerate()
        .map(|(p, pt)| {
            let inside = (0..doc.boxes.len())
                .filter(|&i| doc.boxes[i].contains(pt.x, pt.y))
                .min_by(|&a, &b| area_then_id(doc, a, b));
            let hit = inside.or_else(|| {
                (0..doc.boxes.len())
                    .map(|i| (i, doc.boxes[i].distance_to_point(pt.x, pt.y)))
                    .filter(|&(_, d)| d <= radius)
                    .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| doc.boxes[a.0].id.cmp(&doc.boxes[b.0].id)))
                    .map(|(i, _)| i)
            });
            if let Some(i) = hit {
                visits[i].push(p);
            }
            hit
        })
        .collect();
    Ok(RawAssignment {
        box_ids: doc.boxes.iter().map(|b| b.id.clone()).collect(),
        hits,
        visits,
    })
}

/// Orders boxes by their first gaze hit; returns to an already-read box are
/// ignored and unvisited boxes are missing.
pub fn first_visit_order(assign: &RawAssignment) -> ReadingSequence {
    assign.sequence_by(|v| v.first().copied())
}

/// Orders boxes by their last gaze hit, which is what an uncorrected
/// per-point overwrite of ordinals produces.
pub fn last_visit_order(assign: &RawAssignment) -> ReadingSequence {
    assign.sequence_by(|v| v.last().copied())
}

/// Inserts missing boxes right after their nearest ordered neighbor.
///
/// Candidates are the originally ordered boxes whose rectangle lies within
/// `reach` pixels of the missing box; the nearest one by centroid distance
/// wins (ties: lower ordinal). Several boxes attached to one neighbor follow
/// it by increasing distance, then emission order. Boxes with no candidate
/// stay missing. The relative order of ordered boxes never changes.
pub fn repair_missing(doc: &Document, seq: &ReadingSequence, reach: f64) -> Result<ReadingSequence> {
    seq.check_against(doc)?;
    if seq.len() == doc.boxes.len() && seq.is_full_permutation() {
        return Ok(seq.clone());
    }
    let index = doc.id_index();
    let ordered: Vec<usize> = seq.as_permutation().iter().map(|id| index[id]).collect();

    // attached[rank] holds (distance, emission index) of boxes inserted after it
    let mut attached: Vec<Vec<(f64, usize)>> = vec![Vec::new(); ordered.len()];
    for (i, b) in doc.boxes.iter().enumerate() {
        if seq.rank(&b.id).is_some() {
            continue;
        }
        let c = b.centroid();
        let nearest = ordered
            .iter()
            .enumerate()
            .filter(|&(_, &o)| rect_gap(b, &doc.boxes[o]) <= reach)
            .map(|(rank, &o)| (rank, c.distance(&doc.boxes[o].centroid())))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((rank, dist)) = nearest {
            attached[rank].push((dist, i));
        }
    }

    let mut order: Vec<&str> = Vec::with_capacity(doc.boxes.len());
    for (rank, &o) in ordered.iter().enumerate() {
        order.push(&doc.boxes[o].id);
        attached[rank].sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        order.extend(attached[rank].iter().map(|&(_, i)| doc.boxes[i].id.as_str()));
    }
    ReadingSequence::from_partial(doc, &order)
}

/// Euclidean gap between two rectangles; zero when they touch or overlap.
fn rect_gap(a: &crate::model::BoundingBox, b: &crate::model::BoundingBox) -> f64 {
    let dx = (b.x_up - a.x_down).max(a.x_up - b.x_down).max(0.0);
    let dy = (b.y_up - a.y_down).max(a.y_up - b.y_down).max(0.0);
    dx.hypot(dy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldOrder {
    pub sequence: ReadingSequence,
    /// Fraction of boxes left without an ordinal; 0 for an empty document.
    pub missing_rate: f64,
}

/// Assignment, first-visit ordering and repair, as enabled in `cfg`.
pub fn gold_pipeline(doc: &Document, traj: &GazeTrajectory, cfg: &AlignmentConfig) -> Result<GoldOrder> {
    let assignment = assign_gaze(doc, traj, cfg)?;
    let mut sequence = if cfg.dedupe {
        first_visit_order(&assignment)
    } else {
        last_visit_order(&assignment)
    };
    if cfg.repair {
        sequence = repair_missing(doc, &sequence, cfg.repair_reach_for(doc))?;
    }
    let missing_rate = crate::metrics::missing_rate(&sequence, doc).unwrap_or(0.0);
    Ok(GoldOrder {
        sequence,
        missing_rate,
    })
}
