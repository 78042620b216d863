//! On-disk formats.
//!
//! One document per JSON file:
//!
//! ```json
//! {"doc_id": "d1", "page_width": 612, "page_height": 792, "subset_tag": "weak",
//!  "boxes": [{"id": "b0", "text": "Invoice", "bbox": [10, 10, 90, 30]}],
//!  "gold_order": [{"id": "b0", "ordinal": 0}],
//!  "qa": [{"question": "...", "answers": ["..."]}]}
//! ```
//!
//! `gold_order` and `qa` are optional, as are `split` (`train`/`test`) and
//! `image` (page image path). Ids may be strings or integers. Gaze files hold
//! `{"doc_id", "points": [{"t", "x", "y", "dur"?, "pupil"?}]}` and order files
//! `{"doc_id", "strategy"?, "order": [{"id", "ordinal"}]}`; an ordinal of -1
//! marks a missing box.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ensure_valid, BoundingBox, Document, GazePoint, GazeTrajectory, QaPair, ReadingSequence, Split, SubsetTag,
};

pub mod doctrack;

/// Suffix of gaze files sitting next to document files in a corpus directory.
pub const GAZE_SUFFIX: &str = ".gaze.json";
/// Suffix of order files.
pub const ORDER_SUFFIX: &str = ".order.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum Id {
    Text(String),
    Number(i64),
}

impl Id {
    fn into_string(self) -> String {
        match self {
            Id::Text(s) => s,
            Id::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BoxRecord {
    id: Id,
    #[serde(default)]
    text: String,
    bbox: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OrdinalRecord {
    id: Id,
    ordinal: i64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocumentRecord {
    doc_id: Id,
    page_width: f64,
    page_height: f64,
    #[serde(default)]
    subset_tag: SubsetTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<Split>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image: Option<String>,
    boxes: Vec<BoxRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gold_order: Option<Vec<OrdinalRecord>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    qa: Vec<QaPair>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PointRecord {
    t: f64,
    x: f64,
    y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dur: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pupil: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GazeRecord {
    doc_id: Id,
    points: Vec<PointRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct OrderRecord {
    doc_id: Id,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strategy: Option<String>,
    order: Vec<OrdinalRecord>,
}

/// A document with its optional gold order and the file it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDocument {
    pub doc: Document,
    pub gold: Option<ReadingSequence>,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderFile {
    pub doc_id: String,
    pub strategy: Option<String>,
    pub order: ReadingSequence,
}

fn schema(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_owned(),
        message: message.into(),
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_owned(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, path: &Path) -> Result<T> {
    serde_json::from_str(text.strip_prefix('\u{feff}').unwrap_or(text)).map_err(|e| schema(path, e.to_string()))
}

fn sequence_from_records(records: Vec<OrdinalRecord>, path: &Path, field: &str) -> Result<ReadingSequence> {
    ReadingSequence::from_ordinals(records.into_iter().map(|r| (r.id.into_string(), r.ordinal)))
        .map_err(|e| schema(path, format!("{field}: {e}")))
}

fn sequence_records(seq: &ReadingSequence) -> Vec<OrdinalRecord> {
    seq.to_signed()
        .into_iter()
        .map(|(id, ordinal)| OrdinalRecord { id: Id::Text(id), ordinal })
        .collect()
}

/// Parses a canonical document without validating its geometry.
pub fn parse_document(text: &str, path: &Path) -> Result<LoadedDocument> {
    let record: DocumentRecord = parse_json(text, path)?;
    let mut boxes = Vec::with_capacity(record.boxes.len());
    for (i, b) in record.boxes.into_iter().enumerate() {
        let id = b.id.into_string();
        let bbox: [f64; 4] = b.bbox.as_slice().try_into().map_err(|_| {
            schema(
                path,
                format!("boxes[{i}] (id `{id}`): bbox must have 4 numbers, found {}", b.bbox.len()),
            )
        })?;
        boxes.push(BoundingBox::new(id, bbox, b.text));
    }
    let doc = Document {
        doc_id: record.doc_id.into_string(),
        page_width: record.page_width,
        page_height: record.page_height,
        subset: record.subset_tag,
        split: record.split,
        boxes,
        qa: record.qa,
        image: record.image,
    };
    let gold = record
        .gold_order
        .map(|records| sequence_from_records(records, path, "gold_order"))
        .transpose()?;
    if let Some(gold) = &gold {
        gold.check_against(&doc).map_err(|e| schema(path, format!("gold_order: {e}")))?;
    }
    Ok(LoadedDocument {
        doc,
        gold,
        path: path.to_owned(),
    })
}

/// Reads and validates one canonical document file.
pub fn read_document(path: impl AsRef<Path>) -> Result<LoadedDocument> {
    let path = path.as_ref();
    let loaded = parse_document(&read_text(path)?, path)?;
    ensure_valid(&loaded.doc).map_err(|e| schema(path, e.to_string()))?;
    Ok(loaded)
}

pub fn document_to_json(doc: &Document, gold: Option<&ReadingSequence>) -> Result<String> {
    let record = DocumentRecord {
        doc_id: Id::Text(doc.doc_id.clone()),
        page_width: doc.page_width,
        page_height: doc.page_height,
        subset_tag: doc.subset,
        split: doc.split,
        image: doc.image.clone(),
        boxes: doc
            .boxes
            .iter()
            .map(|b| BoxRecord {
                id: Id::Text(b.id.clone()),
                text: b.text.clone(),
                bbox: b.bbox().to_vec(),
            })
            .collect(),
        gold_order: gold.map(sequence_records),
        qa: doc.qa.clone(),
    };
    Ok(serde_json::to_string_pretty(&record)? + "\n")
}

pub fn write_document(path: impl AsRef<Path>, doc: &Document, gold: Option<&ReadingSequence>) -> Result<()> {
    write_text(path.as_ref(), &document_to_json(doc, gold)?)
}

pub fn parse_gaze(text: &str, path: &Path) -> Result<GazeTrajectory> {
    let record: GazeRecord = parse_json(text, path)?;
    let traj = GazeTrajectory::new(
        record.doc_id.into_string(),
        record
            .points
            .into_iter()
            .map(|p| GazePoint {
                t: p.t,
                x: p.x,
                y: p.y,
                duration: p.dur,
                pupil: p.pupil,
            })
            .collect(),
    );
    traj.check_monotonic().map_err(|e| schema(path, e.to_string()))?;
    Ok(traj)
}

pub fn read_gaze(path: impl AsRef<Path>) -> Result<GazeTrajectory> {
    let path = path.as_ref();
    parse_gaze(&read_text(path)?, path)
}

pub fn gaze_to_json(traj: &GazeTrajectory) -> Result<String> {
    let record = GazeRecord {
        doc_id: Id::Text(traj.doc_id.clone()),
        points: traj
            .points
            .iter()
            .map(|p| PointRecord {
                t: p.t,
                x: p.x,
                y: p.y,
                dur: p.duration,
                pupil: p.pupil,
            })
            .collect(),
    };
    Ok(serde_json::to_string(&record)? + "\n")
}

pub fn write_gaze(path: impl AsRef<Path>, traj: &GazeTrajectory) -> Result<()> {
    write_text(path.as_ref(), &gaze_to_json(traj)?)
}

pub fn parse_order(text: &str, path: &Path) -> Result<OrderFile> {
    let record: OrderRecord = parse_json(text, path)?;
    Ok(OrderFile {
        doc_id: record.doc_id.into_string(),
        strategy: record.strategy,
        order: sequence_from_records(record.order, path, "order")?,
    })
}

pub fn read_order(path: impl AsRef<Path>) -> Result<OrderFile> {
    let path = path.as_ref();
    parse_order(&read_text(path)?, path)
}

pub fn order_to_json(order: &OrderFile) -> Result<String> {
    let record = OrderRecord {
        doc_id: Id::Text(order.doc_id.clone()),
        strategy: order.strategy.clone(),
        order: sequence_records(&order.order),
    };
    Ok(serde_json::to_string_pretty(&record)? + "\n")
}

pub fn write_order(path: impl AsRef<Path>, order: &OrderFile) -> Result<()> {
    write_text(path.as_ref(), &order_to_json(order)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    #[default]
    Canonical,
    Doctrack,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(InputFormat::Canonical),
            "doctrack" => Ok(InputFormat::Doctrack),
            other => Err(Error::InvalidConfig(format!("unknown input format `{other}` (canonical, doctrack)"))),
        }
    }
}

/// Document files below `dir`, sorted by path. Gaze and order files are
/// skipped.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut pending = vec![dir.to_owned()];
    while let Some(current) = pending.pop() {
        let entries = fs::read_dir(&current).map_err(|source| Error::Io {
            path: current.clone(),
            source,
        })?;
        for entry in entries {
            let path = entry
                .map_err(|source| Error::Io {
                    path: current.clone(),
                    source,
                })?
                .path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            if path.is_dir() {
                pending.push(path);
            } else if name.ends_with(".json") && !name.ends_with(GAZE_SUFFIX) && !name.ends_with(ORDER_SUFFIX) {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Gaze file expected next to a document file: `x.json` -> `x.gaze.json`.
pub fn gaze_path_for(doc_path: &Path) -> PathBuf {
    let stem = doc_path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    doc_path.with_file_name(format!("{stem}{GAZE_SUFFIX}"))
}

/// Loads one file or every document file under a directory. Documents are
/// validated; the first failure names its file.
pub fn ingest(path: impl AsRef<Path>, format: InputFormat) -> Result<Vec<LoadedDocument>> {
    let path = path.as_ref();
    let files = if path.is_dir() {
        corpus_files(path)?
    } else {
        vec![path.to_owned()]
    };
    let mut out = Vec::new();
    for file in files {
        match format {
            InputFormat::Canonical => out.push(read_document(&file)?),
            InputFormat::Doctrack => out.extend(doctrack::read_file(&file)?),
        }
    }
    Ok(out)
}
