//! Adapter for released DocTrack annotation files.
//!
//! The adapter accepts FUNSD-style JSON: a top-level object (or an array of
//! them) holding a box list under `form`, `boxes`, `segments` or `ocr`. Each
//! box needs an id (`id`/`box_id`), coordinates (`box`/`bbox`, either
//! `[x0, y0, x1, y1]` or a flat 8-number quadrilateral) and optional `text`.
//! The human ordinal is read from `order`, `reading_order`, `ordinal`,
//! `gaze_order` or `eye_order`, with -1 for missing boxes.
//!
//! Page size comes from `width`/`height`, `page_width`/`page_height` or
//! `img_size`, and falls back to the extent of the boxes. Subset and split are
//! taken from the same-named fields or inferred from the directory path
//! (`funsd`/`weak`, `seabill`/`structured`, `infographic`/`infograph`,
//! `train`/`training`, `test`/`testing`).

use std::path::Path;

use serde_json::{Map, Value};

use super::{read_text, LoadedDocument};
use crate::error::{Error, Result};
use crate::model::{ensure_valid, BoundingBox, Document, QaPair, ReadingSequence, Split, SubsetTag};

const BOX_LISTS: [&str; 4] = ["form", "boxes", "segments", "ocr"];
const ORDINAL_KEYS: [&str; 5] = ["order", "reading_order", "ordinal", "gaze_order", "eye_order"];

fn fail(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_owned(),
        message: message.into(),
    }
}

fn id_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn numbers(v: &Value) -> Option<Vec<f64>> {
    let arr = v.as_array()?;
    let flat: Option<Vec<f64>> = arr.iter().map(Value::as_f64).collect();
    flat.or_else(|| {
        // list of [x, y] points
        arr.iter()
            .map(|p| p.as_array().filter(|xy| xy.len() == 2))
            .map(|xy| Some([xy?[0].as_f64()?, xy?[1].as_f64()?]))
            .collect::<Option<Vec<[f64; 2]>>>()
            .map(|pts| pts.concat())
    })
}

fn to_rect(coords: &[f64]) -> Option<[f64; 4]> {
    match coords.len() {
        4 => Some([coords[0], coords[1], coords[2], coords[3]]),
        n if n >= 6 && n % 2 == 0 => {
            let xs = coords.iter().step_by(2);
            let ys = coords.iter().skip(1).step_by(2);
            Some([
                xs.clone().copied().fold(f64::INFINITY, f64::min),
                ys.clone().copied().fold(f64::INFINITY, f64::min),
                xs.copied().fold(f64::NEG_INFINITY, f64::max),
                ys.copied().fold(f64::NEG_INFINITY, f64::max),
            ])
        }
        _ => None,
    }
}

fn path_hint<T>(path: &Path, table: &[(&str, T)]) -> Option<T>
where
    T: Copy,
{
    path.components().rev().find_map(|c| {
        let part = c.as_os_str().to_str()?.to_ascii_lowercase();
        table
            .iter()
            .find(|(needle, _)| part == *needle || part.starts_with(&format!("{needle}_")) || part.ends_with(&format!("_{needle}")))
            .map(|(_, v)| *v)
    })
}

fn subset_of(obj: &Map<String, Value>, path: &Path) -> SubsetTag {
    let named = ["subset", "subset_tag", "category"]
        .iter()
        .find_map(|k| obj.get(*k)?.as_str()?.parse().ok());
    named.unwrap_or_else(|| {
        path_hint(
            path,
            &[
                ("funsd", SubsetTag::Weak),
                ("weak", SubsetTag::Weak),
                ("seabill", SubsetTag::Structured),
                ("structured", SubsetTag::Structured),
                ("infographic", SubsetTag::Infograph),
                ("infographics", SubsetTag::Infograph),
                ("infograph", SubsetTag::Infograph),
            ],
        )
        .unwrap_or_default()
    })
}

fn split_of(obj: &Map<String, Value>, path: &Path) -> Option<Split> {
    let table = [
        ("train", Split::Train),
        ("training", Split::Train),
        ("test", Split::Test),
        ("testing", Split::Test),
    ];
    obj.get("split")
        .and_then(Value::as_str)
        .and_then(|s| table.iter().find(|(n, _)| *n == s.to_ascii_lowercase()).map(|(_, v)| *v))
        .or_else(|| path_hint(path, &table))
}

fn page_size(obj: &Map<String, Value>, boxes: &[BoundingBox]) -> (f64, f64) {
    let pair = |w: &str, h: &str| Some((obj.get(w)?.as_f64()?, obj.get(h)?.as_f64()?));
    let from_size = || {
        let size = obj.get("img_size").or_else(|| obj.get("size"))?;
        match size {
            Value::Array(a) if a.len() == 2 => Some((a[0].as_f64()?, a[1].as_f64()?)),
            Value::Object(o) => Some((o.get("width")?.as_f64()?, o.get("height")?.as_f64()?)),
            _ => None,
        }
    };
    pair("page_width", "page_height")
        .or_else(|| pair("width", "height"))
        .or_else(from_size)
        .unwrap_or_else(|| {
            let w = boxes.iter().map(|b| b.x_down).fold(1.0, f64::max);
            let h = boxes.iter().map(|b| b.y_down).fold(1.0, f64::max);
            (w, h)
        })
}

fn convert(obj: &Map<String, Value>, path: &Path, fallback_id: &str) -> Result<LoadedDocument> {
    let list = BOX_LISTS
        .iter()
        .find_map(|k| obj.get(*k)?.as_array().map(|a| (k, a)))
        .ok_or_else(|| fail(path, format!("no box list (expected one of {BOX_LISTS:?})")))?;
    let (list_key, items) = list;
    let mut boxes = Vec::with_capacity(items.len());
    let mut ordinals = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let field = |name: &str| format!("{list_key}[{i}].{name}");
        let item = item.as_object().ok_or_else(|| fail(path, format!("{list_key}[{i}] is not an object")))?;
        let id = item
            .get("id")
            .or_else(|| item.get("box_id"))
            .and_then(id_string)
            .ok_or_else(|| fail(path, format!("{} missing or not a string/number", field("id"))))?;
        let coords = item
            .get("box")
            .or_else(|| item.get("bbox"))
            .and_then(numbers)
            .ok_or_else(|| fail(path, format!("{} missing or not numeric (box `{id}`)", field("box"))))?;
        let rect = to_rect(&coords).ok_or_else(|| {
            fail(
                path,
                format!("{} has {} numbers, expected 4 or a polygon (box `{id}`)", field("box"), coords.len()),
            )
        })?;
        let text = item.get("text").and_then(Value::as_str).unwrap_or_default();
        if let Some(v) = ORDINAL_KEYS.iter().find_map(|k| item.get(*k)) {
            let ordinal = v
                .as_i64()
                .ok_or_else(|| fail(path, format!("{} ordinal is not an integer (box `{id}`)", field("order"))))?;
            ordinals.push((id.clone(), ordinal));
        }
        boxes.push(BoundingBox::new(id, rect, text));
    }

    let (page_width, page_height) = page_size(obj, &boxes);
    let qa = obj
        .get("qa")
        .and_then(|v| serde_json::from_value::<Vec<QaPair>>(v.clone()).ok())
        .unwrap_or_default();
    let doc = Document {
        doc_id: ["doc_id", "uid", "id"]
            .iter()
            .find_map(|k| obj.get(*k).and_then(id_string))
            .unwrap_or_else(|| fallback_id.to_owned()),
        page_width,
        page_height,
        subset: subset_of(obj, path),
        split: split_of(obj, path),
        boxes,
        qa,
        image: ["image", "image_path", "img"]
            .iter()
            .find_map(|k| obj.get(*k)?.as_str().map(str::to_owned)),
    };
    ensure_valid(&doc).map_err(|e| fail(path, e.to_string()))?;
    let gold = if ordinals.is_empty() {
        None
    } else {
        if ordinals.len() != doc.boxes.len() {
            return Err(fail(
                path,
                format!("{} of {} boxes carry an ordinal", ordinals.len(), doc.boxes.len()),
            ));
        }
        Some(ReadingSequence::from_ordinals(ordinals).map_err(|e| fail(path, e.to_string()))?)
    };
    Ok(LoadedDocument {
        doc,
        gold,
        path: path.to_owned(),
    })
}

pub fn parse(text: &str, path: &Path) -> Result<Vec<LoadedDocument>> {
    let value: Value = serde_json::from_str(text.strip_prefix('\u{feff}').unwrap_or(text)).map_err(|e| fail(path, e.to_string()))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("doc");
    match &value {
        Value::Object(obj) => Ok(vec![convert(obj, path, stem)?]),
        Value::Array(docs) => docs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let obj = d.as_object().ok_or_else(|| fail(path, format!("[{i}] is not an object")))?;
                convert(obj, path, &format!("{stem}-{i}"))
            })
            .collect(),
        _ => Err(fail(path, "expected an object or an array of objects")),
    }
}

pub fn read_file(path: &Path) -> Result<Vec<LoadedDocument>> {
    parse(&read_text(path)?, path)
}
