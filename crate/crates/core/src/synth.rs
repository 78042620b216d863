//! Seeded synthetic documents with known gold orders and simulated gaze.
//!
//! Layouts per pattern, with `rows x cols` as the grid parameter:
//!
//! * `normal_z`: a plain grid read row by row.
//! * `local_priority`: a grid of two-line cells (label above value); each cell
//!   is read top then bottom before moving to the next cell.
//! * `cross_modal`: a central graphic with `rows * cols` labels on a circle;
//!   the gaze alternates between the graphic and each label, clockwise from
//!   the top.
//! * `visual_instruction`: `rows` staircases of `cols` steps; after each step
//!   the gaze glances back at the previous step.
//!
//! Every random choice draws from its own ChaCha stream, so changing one
//! rate does not reshuffle the others.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gaze::ReadingPattern;
use crate::model::{BoundingBox, Document, GazePoint, GazeTrajectory, ReadingSequence, SubsetTag};

pub const BOX_WIDTH: f64 = 80.0;
pub const BOX_HEIGHT: f64 = 20.0;
pub const PITCH_X: f64 = 100.0;
pub const PITCH_Y: f64 = 40.0;
const MARGIN: f64 = 20.0;
const FIXATION_MS: f64 = 180.0;
const SACCADE_MS: f64 = 40.0;

const STREAM_LAYOUT: u64 = 1;
const STREAM_DROPOUT: u64 = 2;
const STREAM_JITTER: u64 = 3;
const STREAM_RETURNS: u64 = 4;
const STREAM_EMISSION: u64 = 5;
const STREAM_TEXT: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Emission {
    /// OCR emission order is a seeded shuffle.
    #[default]
    Shuffled,
    /// OCR emission order equals the gold order.
    Gold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub pattern: ReadingPattern,
    pub rows: usize,
    pub cols: usize,
    /// Standard deviation of the gaze noise around each box centre.
    pub jitter_px: f64,
    /// Each box is shifted vertically by up to this many pixels. Values above
    /// half the vertical gap between boxes (5 px for staircases) can
    /// make boxes overlap.
    pub row_jitter_px: f64,
    /// Share of boxes that receive no gaze at all.
    pub dropout_rate: f64,
    /// Injected returns to already-read boxes, as a share of the boxes read.
    pub return_rate: f64,
    pub emission: Emission,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            pattern: ReadingPattern::NormalZ,
            rows: 3,
            cols: 4,
            jitter_px: 0.0,
            row_jitter_px: 0.0,
            dropout_rate: 0.0,
            return_rate: 0.0,
            emission: Emission::Shuffled,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn new(pattern: ReadingPattern, rows: usize, cols: usize) -> Self {
        Self {
            pattern,
            rows,
            cols,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidConfig(format!("degenerate grid {}x{}", self.rows, self.cols)));
        }
        for (name, rate) in [("dropout_rate", self.dropout_rate), ("return_rate", self.return_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1], got {rate}")));
            }
        }
        for (name, px) in [("jitter_px", self.jitter_px), ("row_jitter_px", self.row_jitter_px)] {
            if !(px.is_finite() && px >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0, got {px}")));
            }
        }
        Ok(())
    }
}

pub fn subset_for(pattern: ReadingPattern) -> SubsetTag {
    match pattern {
        ReadingPattern::NormalZ => SubsetTag::Weak,
        ReadingPattern::LocalPriority => SubsetTag::Structured,
        ReadingPattern::CrossModal | ReadingPattern::VisualInstruction => SubsetTag::Infograph,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDocument {
    pub doc: Document,
    /// Intended reading order over every box.
    pub gold: ReadingSequence,
    pub gaze: GazeTrajectory,
    /// Ids of the boxes that received no gaze.
    pub dropped: Vec<String>,
    /// Number of injected returns in the trajectory.
    pub returns: usize,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Box rectangles in gold order plus, per gold position, the gold positions
/// the gaze revisits right after it as part of the pattern itself.
struct Layout {
    rects: Vec<[f64; 4]>,
    glances: Vec<Vec<usize>>,
}

fn rect(x: f64, y: f64, w: f64, h: f64) -> [f64; 4] {
    [x, y, x + w, y + h]
}

fn layout(spec: &SynthSpec) -> Layout {
    let (rows, cols) = (spec.rows, spec.cols);
    let mut rects = Vec::new();
    let mut glances = Vec::new();
    match spec.pattern {
        ReadingPattern::NormalZ => {
            for r in 0..rows {
                for c in 0..cols {
                    rects.push(rect(c as f64 * PITCH_X, r as f64 * PITCH_Y, BOX_WIDTH, BOX_HEIGHT));
                }
            }
            glances.resize(rects.len(), Vec::new());
        }
        ReadingPattern::LocalPriority => {
            // the value sits low enough that the jump to the next label is a
            // north-east saccade
            let cell_pitch_y = 110.0;
            for r in 0..rows {
                for c in 0..cols {
                    let (x, y) = (c as f64 * PITCH_X, r as f64 * cell_pitch_y);
                    rects.push(rect(x, y, BOX_WIDTH, BOX_HEIGHT));
                    rects.push(rect(x, y + 50.0, BOX_WIDTH, BOX_HEIGHT));
                }
            }
            glances.resize(rects.len(), Vec::new());
        }
        ReadingPattern::CrossModal => {
            let n = rows * cols;
            let radius = (n as f64 * PITCH_X / std::f64::consts::TAU).max(160.0);
            // square inscribed well inside the label ring
            let graphic = 2.0 * (radius - 60.0) / std::f64::consts::SQRT_2;
            let centre = radius + BOX_WIDTH / 2.0;
            rects.push(rect(centre - graphic / 2.0, centre - graphic / 2.0, graphic, graphic));
            glances.push(Vec::new());
            for k in 0..n {
                let angle = std::f64::consts::TAU * k as f64 / n as f64;
                let (cx, cy) = (centre + radius * angle.sin(), centre - radius * angle.cos());
                rects.push(rect(cx - BOX_WIDTH / 2.0, cy - BOX_HEIGHT / 2.0, BOX_WIDTH, BOX_HEIGHT));
                // back to the graphic before the next label
                glances.push(if k + 1 < n { vec![0] } else { Vec::new() });
            }
        }
        ReadingPattern::VisualInstruction => {
            let step_y = BOX_HEIGHT + 10.0;
            let stair_height = cols as f64 * step_y + PITCH_Y;
            for r in 0..rows {
                for c in 0..cols {
                    let pos = rects.len();
                    rects.push(rect(
                        c as f64 * PITCH_X,
                        r as f64 * stair_height + c as f64 * step_y,
                        BOX_WIDTH,
                        BOX_HEIGHT,
                    ));
                    // glance back at the previous step, then return
                    glances.push(if c > 0 { vec![pos - 1, pos] } else { Vec::new() });
                }
            }
        }
    }
    Layout { rects, glances }
}

const WORDS: [&str; 16] = [
    "total", "date", "name", "invoice", "amount", "ship", "to", "from", "qty", "price", "tax", "no", "port", "weight",
    "item", "note",
];

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let tokens = rng.gen_range(1..=3);
    (0..tokens)
        .map(|_| {
            if rng.gen_bool(0.25) {
                rng.gen_range(0..10_000).to_string()
            } else {
                WORDS[rng.gen_range(0..WORDS.len())].to_owned()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Generates one document, its gold order and a gaze trajectory.
pub fn synth(spec: &SynthSpec) -> Result<SynthDocument> {
    spec.validate()?;
    let Layout { mut rects, glances } = layout(spec);
    let n = rects.len();

    let mut layout_rng = stream(spec.seed, STREAM_LAYOUT);
    if spec.row_jitter_px > 0.0 {
        for r in &mut rects {
            let dy = layout_rng.gen_range(-spec.row_jitter_px..=spec.row_jitter_px);
            r[1] += dy;
            r[3] += dy;
        }
    }
    let min_x = rects.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
    let min_y = rects.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    for r in &mut rects {
        *r = [r[0] - min_x + MARGIN, r[1] - min_y + MARGIN, r[2] - min_x + MARGIN, r[3] - min_y + MARGIN];
    }
    let page_width = rects.iter().map(|r| r[2]).fold(0.0, f64::max) + MARGIN;
    let page_height = rects.iter().map(|r| r[3]).fold(0.0, f64::max) + MARGIN;

    // emission[i] = gold position of the i-th emitted box
    let mut emission: Vec<usize> = (0..n).collect();
    if spec.emission == Emission::Shuffled {
        emission.shuffle(&mut stream(spec.seed, STREAM_EMISSION));
    }
    let mut ids = vec![String::new(); n];
    for (i, &g) in emission.iter().enumerate() {
        ids[g] = format!("box-{i:03}");
    }
    let mut text_rng = stream(spec.seed, STREAM_TEXT);
    let texts: Vec<String> = (0..n).map(|_| random_text(&mut text_rng)).collect();
    let boxes = emission
        .iter()
        .map(|&g| BoundingBox::new(ids[g].clone(), rects[g], texts[g].clone()))
        .collect();
    let doc = Document::new(format!("{}-{}", spec.pattern, spec.seed), page_width, page_height, boxes)
        .with_subset(subset_for(spec.pattern));
    let gold = ReadingSequence::from_order(ids.iter()).expect("generated ids are unique");

    let drop_count = ((spec.dropout_rate * n as f64).round() as usize).min(n);
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.shuffle(&mut stream(spec.seed, STREAM_DROPOUT));
    let mut dropped = vec![false; n];
    for &g in &candidates[..drop_count] {
        dropped[g] = true;
    }

    // visits in gold order with the pattern's own glances, dropped boxes skipped
    let mut base: Vec<usize> = Vec::new();
    for g in 0..n {
        if dropped[g] {
            continue;
        }
        base.push(g);
        for &extra in &glances[g] {
            if !dropped[extra] && base.last() != Some(&extra) {
                base.push(extra);
            }
        }
    }

    let read: Vec<usize> = {
        let mut seen = vec![false; n];
        base.iter().copied().filter(|&g| !std::mem::replace(&mut seen[g], true)).collect()
    };
    let mut returns_after: Vec<Vec<usize>> = vec![Vec::new(); base.len()];
    let mut return_count = 0;
    if read.len() >= 2 {
        let wanted = (spec.return_rate * read.len() as f64).round() as usize;
        let mut rng = stream(spec.seed, STREAM_RETURNS);
        let mut first_seen_before = vec![0usize; base.len()];
        let mut seen = vec![false; n];
        let mut distinct = 0;
        for (i, &g) in base.iter().enumerate() {
            if !std::mem::replace(&mut seen[g], true) {
                distinct += 1;
            }
            first_seen_before[i] = distinct;
        }
        let eligible: Vec<usize> = (0..base.len()).filter(|&i| first_seen_before[i] >= 2).collect();
        for _ in 0..wanted {
            let at = eligible[rng.gen_range(0..eligible.len())];
            let options: Vec<usize> = read[..first_seen_before[at]].iter().copied().filter(|&g| g != base[at]).collect();
            returns_after[at].push(options[rng.gen_range(0..options.len())]);
            return_count += 1;
        }
    }

    let noise = Normal::new(0.0, spec.jitter_px).expect("validated jitter");
    let mut jitter_rng = stream(spec.seed, STREAM_JITTER);
    let mut points = Vec::new();
    let mut t = 0.0;
    let mut fixate = |g: usize, points: &mut Vec<GazePoint>| {
        let r = rects[g];
        let (cx, cy) = ((r[0] + r[2]) / 2.0, (r[1] + r[3]) / 2.0);
        let x = (cx + noise.sample(&mut jitter_rng)).clamp(r[0], r[2]);
        let y = (cy + noise.sample(&mut jitter_rng)).clamp(r[1], r[3]);
        points.push(GazePoint {
            t,
            x,
            y,
            duration: Some(FIXATION_MS),
            pupil: None,
        });
        t += FIXATION_MS + SACCADE_MS;
    };
    for (i, &g) in base.iter().enumerate() {
        fixate(g, &mut points);
        for &back in &returns_after[i] {
            fixate(back, &mut points);
        }
    }

    Ok(SynthDocument {
        gaze: GazeTrajectory::new(doc.doc_id.clone(), points),
        dropped: (0..n).filter(|&g| dropped[g]).map(|g| ids[g].clone()).collect(),
        returns: return_count,
        doc,
        gold,
    })
}

/// `docs` documents whose seeds are drawn from `spec.seed`.
pub fn synth_corpus(spec: &SynthSpec, docs: usize) -> Result<Vec<SynthDocument>> {
    let mut seeds = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..docs)
        .map(|i| {
            let mut one = spec.clone();
            one.seed = seeds.gen();
            let mut out = synth(&one)?;
            out.doc.doc_id = format!("{}-{i:04}", spec.pattern);
            out.gaze.doc_id = out.doc.doc_id.clone();
            Ok(out)
        })
        .collect()
}
