//! Pair feature extraction.
//!
//! Geometry block (10 values): normalized centroids `x_i, y_i, x_j, y_j`, the
//! displacement `dx = x_j - x_i, dy = y_j - y_i`, then normalized widths and
//! heights `w_i, h_i, w_j, h_j`. All lie in `[-1, 1]`.
//!
//! Text block, per box: character 1- to 3-gram frequencies hashed into
//! `hash_width` buckets with 64-bit FNV-1a, then `ln(1 + tokens)` and the
//! fraction of digit characters. Left box first, then right box.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BoundingBox;

pub const GEOMETRY_DIM: usize = 10;
pub const DEFAULT_HASH_WIDTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Box,
    Text,
    TextBox,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Box => "box",
            Regime::Text => "text",
            Regime::TextBox => "text_box",
        }
    }

    fn uses_geometry(self) -> bool {
        matches!(self, Regime::Box | Regime::TextBox)
    }

    fn uses_text(self) -> bool {
        matches!(self, Regime::Text | Regime::TextBox)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "box" => Ok(Regime::Box),
            "text" => Ok(Regime::Text),
            "text_box" | "text+box" => Ok(Regime::TextBox),
            _ => Err(Error::InvalidConfig(format!("unknown regime `{s}` (box, text, text_box)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub regime: Regime,
    pub hash_width: usize,
}

impl FeatureConfig {
    pub fn new(regime: Regime) -> Self {
        Self {
            regime,
            hash_width: DEFAULT_HASH_WIDTH,
        }
    }

    pub fn dimension(&self) -> usize {
        let mut dim = 0;
        if self.regime.uses_geometry() {
            dim += GEOMETRY_DIM;
        }
        if self.regime.uses_text() {
            dim += 2 * (self.hash_width + 2);
        }
        dim
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn push_text_block(out: &mut Vec<f64>, text: &str, width: usize) {
    let start = out.len();
    out.resize(start + width, 0.0);
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    let mut total = 0usize;
    let mut buf = String::new();
    for n in 1..=3 {
        for gram in chars.windows(n) {
            buf.clear();
            buf.extend(gram);
            out[start + (fnv1a64(buf.as_bytes()) % width as u64) as usize] += 1.0;
            total += 1;
        }
    }
    if total > 0 {
        for v in &mut out[start..] {
            *v /= total as f64;
        }
    }
    let tokens = text.split_whitespace().count();
    let non_space = text.chars().filter(|c| !c.is_whitespace()).count();
    let digits = text.chars().filter(char::is_ascii_digit).count();
    out.push((tokens as f64).ln_1p());
    out.push(if non_space == 0 { 0.0 } else { digits as f64 / non_space as f64 });
}

/// Feature vector for the ordered pair `(left, right)` on a page of size
/// `page = (width, height)`.
pub fn pair_features(cfg: &FeatureConfig, left: &BoundingBox, right: &BoundingBox, page: (f64, f64)) -> Vec<f64> {
    let mut out = Vec::with_capacity(cfg.dimension());
    if cfg.regime.uses_geometry() {
        let (w, h) = page;
        let norm = |v: f64, by: f64| (v / by).clamp(-1.0, 1.0);
        let (ci, cj) = (left.centroid(), right.centroid());
        let (xi, yi, xj, yj) = (norm(ci.x, w), norm(ci.y, h), norm(cj.x, w), norm(cj.y, h));
        out.extend_from_slice(&[
            xi,
            yi,
            xj,
            yj,
            xj - xi,
            yj - yi,
            norm(left.width(), w),
            norm(left.height(), h),
            norm(right.width(), w),
            norm(right.height(), h),
        ]);
    }
    if cfg.regime.uses_text() {
        push_text_block(&mut out, &left.text, cfg.hash_width);
        push_text_block(&mut out, &right.text, cfg.hash_width);
    }
    out
}
