//! Rule-based reading orders: OCR passthrough, thresholded Z-order and a
//! greedy right-then-down XY scan. All three return full permutations.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{BoundingBox, Document, ReadingSequence};

/// OCR emission order as-is.
pub fn default_order(doc: &Document) -> ReadingSequence {
    ReadingSequence::from_order(doc.box_ids()).expect("document box ids are unique")
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZOrderConfig {
    /// Boxes whose centroid y-distance is below this are on one line.
    /// `None` uses half the median box height.
    pub y_threshold: Option<f64>,
}

impl ZOrderConfig {
    pub fn with_threshold(y_threshold: f64) -> Self {
        Self {
            y_threshold: Some(y_threshold),
        }
    }

    pub fn threshold_for(&self, doc: &Document) -> f64 {
        self.y_threshold.unwrap_or_else(|| doc.median_box_height() / 2.0)
    }
}

fn by_x_then_y_then_id(a: &BoundingBox, b: &BoundingBox) -> Ordering {
    a.x_up
        .total_cmp(&b.x_up)
        .then(a.y_up.total_cmp(&b.y_up))
        .then_with(|| a.id.cmp(&b.id))
}

/// Groups boxes into visual lines, then reads lines top to bottom and each
/// line left to right.
///
/// Line membership is the transitive closure of "centroid y-distance below
/// the threshold", so a staircase of boxes can merge into one line. Lines
/// are ordered by mean centroid y (ties: leftmost box, then id).
pub fn z_order(doc: &Document, cfg: &ZOrderConfig) -> Result<ReadingSequence> {
    let threshold = cfg.threshold_for(doc);
    if !(0.0..).contains(&threshold) {
        return Err(Error::InvalidConfig(format!("y_threshold must be >= 0, got {threshold}")));
    }
    let mut by_y: Vec<&BoundingBox> = doc.boxes.iter().collect();
    by_y.sort_by(|a, b| {
        a.centroid()
            .y
            .total_cmp(&b.centroid().y)
            .then_with(|| by_x_then_y_then_id(a, b))
    });

    let mut lines: Vec<Vec<&BoundingBox>> = Vec::new();
    let mut last_y = f64::NEG_INFINITY;
    for b in by_y {
        let y = b.centroid().y;
        match lines.last_mut() {
            Some(line) if y - last_y < threshold => line.push(b),
            _ => lines.push(vec![b]),
        }
        last_y = y;
    }

    for line in &mut lines {
        line.sort_by(|a, b| by_x_then_y_then_id(a, b));
    }
    let mean_y = |line: &[&BoundingBox]| line.iter().map(|b| b.centroid().y).sum::<f64>() / line.len() as f64;
    lines.sort_by(|a, b| {
        mean_y(a)
            .total_cmp(&mean_y(b))
            .then_with(|| by_x_then_y_then_id(a[0], b[0]))
    });

    Ok(ReadingSequence::from_order(lines.iter().flatten().map(|b| b.id.as_str())).expect("unique ids"))
}

/// Weight of `x_up` in the fallback key `y_up + XY_FALLBACK_X_WEIGHT * x_up`.
pub const XY_FALLBACK_X_WEIGHT: f64 = 0.25;

/// Greedy XY scan.
///
/// Boxes are first sorted by `(y_up, y_down)`. Starting from the box with the
/// smallest fallback key, the scan repeatedly moves to the nearest unvisited
/// box to the right whose vertical extent overlaps the current box. When
/// there is none it jumps to the unvisited box with the smallest fallback key
/// `y_up + 0.25 * x_up`, so y dominates and x breaks near-ties.
pub fn xy_order(doc: &Document) -> ReadingSequence {
    let mut sorted: Vec<&BoundingBox> = doc.boxes.iter().collect();
    sorted.sort_by(|a, b| {
        a.y_up
            .total_cmp(&b.y_up)
            .then(a.y_down.total_cmp(&b.y_down))
            .then_with(|| by_x_then_y_then_id(a, b))
    });
    let fallback_key = |b: &BoundingBox| b.y_up + XY_FALLBACK_X_WEIGHT * b.x_up;

    let mut visited = vec![false; sorted.len()];
    let mut order: Vec<&str> = Vec::with_capacity(sorted.len());
    let mut current: Option<usize> = None;
    while order.len() < sorted.len() {
        let right = current.and_then(|c| {
            let cur = sorted[c];
            let cx = cur.centroid().x;
            (0..sorted.len())
                .filter(|&i| !visited[i] && sorted[i].centroid().x > cx && sorted[i].y_overlaps(cur))
                .min_by(|&a, &b| {
                    let gap = |i: usize| sorted[i].x_up - cur.x_down;
                    gap(a).total_cmp(&gap(b)).then(a.cmp(&b))
                })
        });
        let next = right.unwrap_or_else(|| {
            (0..sorted.len())
                .filter(|&i| !visited[i])
                .min_by(|&a, &b| fallback_key(sorted[a]).total_cmp(&fallback_key(sorted[b])).then(a.cmp(&b)))
                .expect("an unvisited box remains")
        });
        visited[next] = true;
        order.push(&sorted[next].id);
        current = Some(next);
    }
    ReadingSequence::from_order(order).expect("unique ids")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(boxes: Vec<BoundingBox>) -> Document {
        Document::new("d", 1000., 1000., boxes)
    }

    #[test]
    fn default_order_is_passthrough() {
        let d = doc(vec![
            BoundingBox::new("b", [0., 0., 1., 1.], ""),
            BoundingBox::new("a", [5., 5., 6., 6.], ""),
            BoundingBox::new("c", [2., 2., 3., 3.], ""),
        ]);
        assert_eq!(default_order(&d).as_permutation(), vec!["b", "a", "c"]);
        assert!(default_order(&doc(vec![])).is_empty());
    }

    #[test]
    fn z_order_groups_close_rows() {
        // y-centres 10, 12, 40 with threshold 5
        let d = doc(vec![
            BoundingBox::new("a", [50., 5., 60., 15.], ""),
            BoundingBox::new("b", [5., 7., 15., 17.], ""),
            BoundingBox::new("c", [20., 35., 30., 45.], ""),
        ]);
        let seq = z_order(&d, &ZOrderConfig::with_threshold(5.)).unwrap();
        assert_eq!(seq.as_permutation(), vec!["b", "a", "c"]);
    }

    #[test]
    fn zero_threshold_is_lexicographic() {
        let d = doc(vec![
            BoundingBox::new("a", [50., 5., 60., 15.], ""),
            BoundingBox::new("b", [5., 7., 15., 17.], ""),
            BoundingBox::new("c", [20., 5., 30., 15.], ""),
        ]);
        let seq = z_order(&d, &ZOrderConfig::with_threshold(0.)).unwrap();
        assert_eq!(seq.as_permutation(), vec!["c", "a", "b"]);
        assert!(z_order(&d, &ZOrderConfig::with_threshold(-1.)).is_err());
    }

    #[test]
    fn single_box() {
        let d = doc(vec![BoundingBox::new("only", [1., 1., 2., 2.], "")]);
        assert_eq!(z_order(&d, &ZOrderConfig::default()).unwrap().rank("only"), Some(0));
        assert_eq!(xy_order(&d).rank("only"), Some(0));
    }

    #[test]
    fn staircase_merges_into_one_line() {
        let d = doc(vec![
            BoundingBox::new("s2", [0., 8., 10., 18.], ""),
            BoundingBox::new("s1", [20., 4., 30., 14.], ""),
            BoundingBox::new("s0", [40., 0., 50., 10.], ""),
        ]);
        let seq = z_order(&d, &ZOrderConfig::with_threshold(5.)).unwrap();
        assert_eq!(seq.as_permutation(), vec!["s2", "s1", "s0"]);
    }

    #[test]
    fn xy_two_columns_interleave_by_row() {
        let d = doc(vec![
            BoundingBox::new("a1", [0., 0., 100., 20.], ""),
            BoundingBox::new("a2", [0., 40., 100., 60.], ""),
            BoundingBox::new("b1", [200., 2., 300., 22.], ""),
            BoundingBox::new("b2", [200., 42., 300., 62.], ""),
        ]);
        assert_eq!(xy_order(&d).as_permutation(), vec!["a1", "b1", "a2", "b2"]);
    }

    #[test]
    fn xy_single_column_reads_down() {
        let d = doc(vec![
            BoundingBox::new("c", [0., 80., 100., 100.], ""),
            BoundingBox::new("a", [0., 0., 100., 20.], ""),
            BoundingBox::new("b", [0., 40., 100., 60.], ""),
        ]);
        assert_eq!(xy_order(&d).as_permutation(), vec!["a", "b", "c"]);
    }

    #[test]
    fn xy_matches_z_on_the_grouping_fixture() {
        let d = doc(vec![
            BoundingBox::new("a", [50., 5., 60., 15.], ""),
            BoundingBox::new("b", [5., 7., 15., 17.], ""),
            BoundingBox::new("c", [20., 35., 30., 45.], ""),
        ]);
        assert_eq!(xy_order(&d), z_order(&d, &ZOrderConfig::with_threshold(5.)).unwrap());
    }

    fn arb_boxes() -> impl Strategy<Value = Vec<BoundingBox>> {
        proptest::collection::vec((0.0f64..400., 0.0f64..400., 1.0f64..80., 1.0f64..30.), 0..25).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (x, y, w, h))| BoundingBox::new(format!("b{i:02}"), [x, y, x + w, y + h], ""))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn orderers_emit_full_permutations(boxes in arb_boxes(), t in 0.0f64..30.) {
            let d = doc(boxes);
            let n = d.boxes.len();
            for seq in [default_order(&d), z_order(&d, &ZOrderConfig::with_threshold(t)).unwrap(), xy_order(&d)] {
                prop_assert_eq!(seq.len(), n);
                prop_assert!(seq.is_full_permutation());
            }
        }

        #[test]
        fn z_order_ignores_emission_order(boxes in arb_boxes().prop_shuffle(), t in 0.0f64..30.) {
            let d = doc(boxes.clone());
            let mut sorted = boxes;
            sorted.sort_by(|a, b| a.id.cmp(&b.id));
            let cfg = ZOrderConfig::with_threshold(t);
            prop_assert_eq!(
                z_order(&d, &cfg).unwrap(),
                z_order(&doc(sorted.clone()), &cfg).unwrap()
            );
        }

        #[test]
        fn translation_leaves_orders_unchanged(boxes in arb_boxes(), dx in 0i32..200, dy in 0i32..200) {
            // integer shifts keep every coordinate comparison exact
            let snap = |b: &BoundingBox| BoundingBox::new(b.id.clone(), b.bbox().map(f64::round), "");
            let d = doc(boxes.iter().map(snap).collect());
            let moved = doc(d.boxes.iter().map(|b| b.translated(dx as f64, dy as f64)).collect());
            let cfg = ZOrderConfig::with_threshold(6.);
            prop_assert_eq!(z_order(&d, &cfg).unwrap(), z_order(&moved, &cfg).unwrap());
            prop_assert_eq!(xy_order(&d), xy_order(&moved));
            prop_assert_eq!(default_order(&d), default_order(&moved));
        }
    }
}
