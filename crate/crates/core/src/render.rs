//! SVG overlay of a reading order: box outlines, red 1-based ordinals and
//! arrows between consecutive centroids. Boxes without an ordinal are drawn
//! dashed and unlabeled.

use std::fmt::Write;

use crate::model::{Document, ReadingSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Output pixels per page pixel.
    pub scale: f64,
    pub stroke_width: f64,
    pub font_size: f64,
    pub box_color: String,
    pub ordinal_color: String,
    pub arrow_color: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            scale: 1.0,
            stroke_width: 1.5,
            font_size: 14.0,
            box_color: "#1f4e79".into(),
            ordinal_color: "#d62728".into(),
            arrow_color: "#ff7f0e".into(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders `seq` over `doc` as a standalone SVG 1.1 document.
pub fn render_svg(doc: &Document, seq: &ReadingSequence, style: &SvgStyle) -> String {
    let k = style.scale;
    let (w, h) = (doc.page_width * k, doc.page_height * k);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, "<title>{}</title>", escape(&doc.doc_id));
    let _ = writeln!(
        svg,
        r#"<defs><marker id="arrowhead" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="{}"/></marker></defs>"#,
        style.arrow_color
    );
    let _ = writeln!(
        svg,
        r##"<rect class="page" x="0" y="0" width="{w}" height="{h}" fill="#ffffff" stroke="#999999" stroke-width="1"/>"##
    );

    for b in &doc.boxes {
        let dashed = seq.rank(&b.id).is_none();
        let _ = writeln!(
            svg,
            r#"<rect class="box{}" data-id="{}" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="{}" stroke-width="{}"{}/>"#,
            if dashed { " missing" } else { "" },
            escape(&b.id),
            b.x_up * k,
            b.y_up * k,
            b.width() * k,
            b.height() * k,
            style.box_color,
            style.stroke_width,
            if dashed { r#" stroke-dasharray="4 3""# } else { "" }
        );
    }

    let ordered: Vec<_> = seq
        .as_permutation()
        .into_iter()
        .filter_map(|id| doc.box_by_id(id))
        .collect();
    for pair in ordered.windows(2) {
        let (a, b) = (pair[0].centroid(), pair[1].centroid());
        let _ = writeln!(
            svg,
            r#"<line class="arrow" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}" marker-end="url(#arrowhead)"/>"#,
            a.x * k,
            a.y * k,
            b.x * k,
            b.y * k,
            style.arrow_color,
            style.stroke_width
        );
    }
    for (i, b) in ordered.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text class="ordinal" x="{}" y="{}" fill="{}" font-size="{}" font-family="sans-serif">{}</text>"#,
            b.x_up * k + 2.0,
            b.y_up * k + style.font_size,
            style.ordinal_color,
            style.font_size,
            i + 1
        );
    }
    svg.push_str("</svg>\n");
    svg
}
