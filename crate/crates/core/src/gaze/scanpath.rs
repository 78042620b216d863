//! Descriptive scanpath statistics and a rule-based pattern label.
//!
//! The label is a heuristic over the statistics; its thresholds live in
//! [`PatternThresholds`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaze::align::{assign_gaze, AlignmentConfig};
use crate::model::{Document, GazeTrajectory};

/// Compass bins, counter-clockwise from east. North is up the page.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compass {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
}

impl Compass {
    pub const ALL: [Compass; 8] = [
        Compass::E,
        Compass::NE,
        Compass::N,
        Compass::NW,
        Compass::W,
        Compass::SW,
        Compass::S,
        Compass::SE,
    ];

    /// Bin for a page-space displacement (y grows downward). A zero
    /// displacement falls in `E`.
    pub fn of(dx: f64, dy: f64) -> Compass {
        let angle = (-dy).atan2(dx);
        let sector = (angle / std::f64::consts::FRAC_PI_4).round() as i64;
        Self::ALL[sector.rem_euclid(8) as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanpathStats {
    /// Saccade counts per [`Compass`] bin, in `Compass::ALL` order.
    pub direction_histogram: [usize; 8],
    pub saccades: usize,
    pub mean_saccade_length: f64,
    /// Saccades moving both left and up.
    pub backtrack_rate: f64,
    /// Share of box entries that re-enter an already visited box.
    pub revisit_rate: f64,
}

impl ScanpathStats {
    pub fn count(&self, dir: Compass) -> usize {
        self.direction_histogram[dir as usize]
    }

    pub fn share(&self, dir: Compass) -> f64 {
        if self.saccades == 0 {
            0.0
        } else {
            self.count(dir) as f64 / self.saccades as f64
        }
    }
}

/// Box entries use the same hit-testing as gold alignment, with default
/// settings.
pub fn scanpath_stats(traj: &GazeTrajectory, doc: &Document) -> Result<ScanpathStats> {
    let n = traj.points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let mut histogram = [0usize; 8];
    let mut total_length = 0.0;
    let mut backtracks = 0usize;
    for w in traj.points.windows(2) {
        let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
        histogram[Compass::of(dx, dy) as usize] += 1;
        total_length += dx.hypot(dy);
        if dx < 0.0 && dy < 0.0 {
            backtracks += 1;
        }
    }
    let saccades = n - 1;

    let assignment = assign_gaze(doc, traj, &AlignmentConfig::default())?;
    let mut entries = 0usize;
    let mut reentries = 0usize;
    let mut seen = std::collections::HashSet::new();
    let mut previous: Option<&str> = None;
    for hit in assignment.hits() {
        if let Some(id) = hit {
            if previous != Some(id) {
                entries += 1;
                if !seen.insert(id) {
                    reentries += 1;
                }
            }
        }
        previous = hit;
    }

    Ok(ScanpathStats {
        direction_histogram: histogram,
        saccades,
        mean_saccade_length: total_length / saccades as f64,
        backtrack_rate: backtracks as f64 / saccades as f64,
        revisit_rate: if entries == 0 {
            0.0
        } else {
            reentries as f64 / entries as f64
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadingPattern {
    NormalZ,
    LocalPriority,
    CrossModal,
    VisualInstruction,
}

impl ReadingPattern {
    pub const ALL: [ReadingPattern; 4] = [
        ReadingPattern::NormalZ,
        ReadingPattern::LocalPriority,
        ReadingPattern::CrossModal,
        ReadingPattern::VisualInstruction,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ReadingPattern::NormalZ => "normal_z",
            ReadingPattern::LocalPriority => "local_priority",
            ReadingPattern::CrossModal => "cross_modal",
            ReadingPattern::VisualInstruction => "visual_instruction",
        }
    }
}

impl fmt::Display for ReadingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReadingPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown reading pattern `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternThresholds {
    /// A bin is "occupied" when it holds at least this share of saccades.
    pub occupied_bin_share: f64,
    /// Radial reading spreads over at least this many occupied bins...
    pub radial_min_bins: usize,
    /// ...and keeps returning to boxes it has already seen.
    pub radial_min_revisit: f64,
    pub backtrack_min: f64,
    /// Share of upward saccades (N, NE, NW) marking cell-by-cell reading.
    pub upward_share_min: f64,
}

impl Default for PatternThresholds {
    fn default() -> Self {
        Self {
            occupied_bin_share: 0.05,
            radial_min_bins: 6,
            radial_min_revisit: 0.2,
            backtrack_min: 0.15,
            upward_share_min: 0.1,
        }
    }
}

/// Rule cascade: radial, then backtracking, then upward jumps; anything
/// else is normal Z reading.
pub fn classify_pattern(stats: &ScanpathStats, thresholds: &PatternThresholds) -> ReadingPattern {
    let occupied = Compass::ALL
        .iter()
        .filter(|&&d| stats.share(d) >= thresholds.occupied_bin_share)
        .count();
    if occupied >= thresholds.radial_min_bins && stats.revisit_rate >= thresholds.radial_min_revisit {
        return ReadingPattern::CrossModal;
    }
    if stats.backtrack_rate >= thresholds.backtrack_min {
        return ReadingPattern::VisualInstruction;
    }
    let upward = stats.share(Compass::N) + stats.share(Compass::NE) + stats.share(Compass::NW);
    if upward >= thresholds.upward_share_min {
        return ReadingPattern::LocalPriority;
    }
    ReadingPattern::NormalZ
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GazePoint;

    fn traj(points: &[(f64, f64)]) -> GazeTrajectory {
        GazeTrajectory::new(
            "d",
            points.iter().enumerate().map(|(i, &(x, y))| GazePoint::new(i as f64, x, y)).collect(),
        )
    }

    fn empty_doc() -> Document {
        Document::new("d", 1000., 1000., vec![])
    }

    #[test]
    fn compass_bins() {
        assert_eq!(Compass::of(1., 0.), Compass::E);
        assert_eq!(Compass::of(0., -1.), Compass::N);
        assert_eq!(Compass::of(-1., 0.), Compass::W);
        assert_eq!(Compass::of(-1., 1.), Compass::SW);
        assert_eq!(Compass::of(1., 1.), Compass::SE);
        assert_eq!(Compass::of(0., 0.), Compass::E);
    }

    #[test]
    fn left_to_right_line_has_no_backtracks() {
        let stats = scanpath_stats(&traj(&[(0., 5.), (10., 5.), (20., 5.), (30., 5.)]), &empty_doc()).unwrap();
        assert_eq!(stats.backtrack_rate, 0.0);
        assert_eq!(stats.count(Compass::E), 3);
        assert_eq!(stats.mean_saccade_length, 10.0);
    }

    #[test]
    fn alternating_path_backtracks_half_the_time() {
        let stats = scanpath_stats(
            &traj(&[(0., 0.), (20., 20.), (10., 10.), (30., 30.), (25., 25.)]),
            &empty_doc(),
        )
        .unwrap();
        assert_eq!(stats.saccades, 4);
        assert_eq!(stats.backtrack_rate, 0.5);
        assert_eq!(stats.revisit_rate, 0.0);
        assert_eq!(stats.direction_histogram.iter().sum::<usize>(), 4);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(scanpath_stats(&traj(&[(0., 0.)]), &empty_doc()), Err(Error::TooFewPoints(1))));
    }

    #[test]
    fn pattern_names_round_trip() {
        for p in ReadingPattern::ALL {
            assert_eq!(p.as_str().parse::<ReadingPattern>().unwrap(), p);
        }
    }
}
