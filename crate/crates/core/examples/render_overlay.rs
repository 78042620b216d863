//! Writes SVG overlays of the gold order and of a z-order prediction.

use readorder::gaze::ReadingPattern;
use readorder::orderers::{z_order, ZOrderConfig};
use readorder::render::{render_svg, SvgStyle};
use readorder::synth::{synth, SynthSpec};

fn main() -> anyhow::Result<()> {
    let s = synth(&SynthSpec { dropout_rate: 0.2, ..SynthSpec::new(ReadingPattern::CrossModal, 1, 8) })?;
    let dir = std::env::temp_dir().join("readorder-overlays");
    std::fs::create_dir_all(&dir)?;
    let style = SvgStyle { scale: 0.75, ..SvgStyle::default() };
    let predicted = z_order(&s.doc, &ZOrderConfig::default())?;
    for (name, seq) in [("gold", &s.gold), ("z-order", &predicted)] {
        let path = dir.join(format!("{}-{name}.svg", s.doc.doc_id));
        std::fs::write(&path, render_svg(&s.doc, seq, &style))?;
        println!("{name:<8} {}", path.display());
    }
    Ok(())
}
