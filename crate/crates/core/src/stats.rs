//! Corpus statistics in the layout of the dataset overview table: documents,
//! entities and tokens per split and subset.
//!
//! Entities are counted as boxes and tokens as whitespace-separated pieces
//! of box text. Both are approximations of whatever unit the source datasets
//! used.

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use serde::Serialize;

use crate::model::{Document, Split, SubsetTag};

pub const APPROXIMATION_NOTE: &str = "ent = boxes, tok = whitespace-separated tokens of box text";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRow {
    Train,
    Test,
    /// Documents without a split label.
    Unsplit,
}

impl SplitRow {
    pub const ALL: [SplitRow; 3] = [SplitRow::Train, SplitRow::Test, SplitRow::Unsplit];

    pub fn of(split: Option<Split>) -> Self {
        match split {
            Some(Split::Train) => SplitRow::Train,
            Some(Split::Test) => SplitRow::Test,
            None => SplitRow::Unsplit,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SplitRow::Train => "train",
            SplitRow::Test => "test",
            SplitRow::Unsplit => "unsplit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub docs: usize,
    pub entities: usize,
    pub tokens: usize,
}

impl Counts {
    fn of(doc: &Document) -> Self {
        Self {
            docs: 1,
            entities: doc.boxes.len(),
            tokens: doc.boxes.iter().map(|b| b.text.split_whitespace().count()).sum(),
        }
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, rhs: Self) {
        self.docs += rhs.docs;
        self.entities += rhs.entities;
        self.tokens += rhs.tokens;
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CorpusStats {
    pub cells: BTreeMap<SplitRow, BTreeMap<SubsetTag, Counts>>,
    pub note: &'static str,
}

impl CorpusStats {
    pub fn get(&self, split: SplitRow, subset: SubsetTag) -> Counts {
        self.cells
            .get(&split)
            .and_then(|row| row.get(&subset))
            .copied()
            .unwrap_or_default()
    }

    pub fn split_total(&self, split: SplitRow) -> Counts {
        let mut total = Counts::default();
        for subset in SubsetTag::ALL {
            total += self.get(split, subset);
        }
        total
    }

    pub fn subset_total(&self, subset: SubsetTag) -> Counts {
        let mut total = Counts::default();
        for split in SplitRow::ALL {
            total += self.get(split, subset);
        }
        total
    }

    pub fn total(&self) -> Counts {
        let mut total = Counts::default();
        for split in SplitRow::ALL {
            total += self.split_total(split);
        }
        total
    }

    /// Plain-text table: one row per split present (train and test always),
    /// one doc/ent/tok column group per subset, then the total.
    pub fn to_table(&self) -> String {
        let subsets: Vec<SubsetTag> = SubsetTag::ALL
            .into_iter()
            .filter(|s| *s != SubsetTag::Other || self.subset_total(*s).docs > 0)
            .collect();
        let mut out = String::new();
        let _ = write!(out, "{:<8}", "split");
        for s in &subsets {
            let _ = write!(out, " | {:^23}", s.as_str());
        }
        let _ = writeln!(out, " | {:^23}", "total");
        let _ = write!(out, "{:<8}", "");
        for _ in 0..=subsets.len() {
            let _ = write!(out, " | {:>5} {:>8} {:>8}", "doc", "ent", "tok");
        }
        out.push('\n');
        let row = |out: &mut String, label: &str, cells: Vec<Counts>| {
            let _ = write!(out, "{label:<8}");
            for c in cells {
                let _ = write!(out, " | {:>5} {:>8} {:>8}", c.docs, c.entities, c.tokens);
            }
            out.push('\n');
        };
        for split in SplitRow::ALL {
            if split == SplitRow::Unsplit && self.split_total(split).docs == 0 {
                continue;
            }
            let mut cells: Vec<Counts> = subsets.iter().map(|s| self.get(split, *s)).collect();
            cells.push(self.split_total(split));
            row(&mut out, split.as_str(), cells);
        }
        let mut cells: Vec<Counts> = subsets.iter().map(|s| self.subset_total(*s)).collect();
        cells.push(self.total());
        row(&mut out, "total", cells);
        let _ = writeln!(out, "({APPROXIMATION_NOTE})");
        out
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

pub fn corpus_stats<'a>(docs: impl IntoIterator<Item = &'a Document>) -> CorpusStats {
    let mut stats = CorpusStats {
        note: APPROXIMATION_NOTE,
        ..CorpusStats::default()
    };
    for doc in docs {
        *stats
            .cells
            .entry(SplitRow::of(doc.split))
            .or_default()
            .entry(doc.subset)
            .or_default() += Counts::of(doc);
    }
    stats
}
