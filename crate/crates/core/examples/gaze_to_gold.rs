//! Turns a gaze trajectory into a gold reading order: assignment,
//! first-visit ordering, repair of skipped boxes, and consolidation of
//! several readers.

use readorder::gaze::{assign_gaze, consolidate, first_visit_order, gold_pipeline, repair_missing, AlignmentConfig};
use readorder::synth::{synth, SynthSpec};
use readorder::gaze::ReadingPattern;

fn main() -> readorder::Result<()> {
    let spec = SynthSpec {
        jitter_px: 3.0,
        dropout_rate: 0.25,
        return_rate: 0.2,
        ..SynthSpec::new(ReadingPattern::NormalZ, 3, 4)
    };
    let s = synth(&spec)?;
    let cfg = AlignmentConfig::default();
    println!("document {} with {} boxes, {} gaze points", s.doc.doc_id, s.doc.boxes.len(), s.gaze.points.len());
    println!("periphery radius {:.1}px, repair reach {:.1}px", cfg.radius_for(&s.doc), cfg.repair_reach_for(&s.doc));

    let assignment = assign_gaze(&s.doc, &s.gaze, &cfg)?;
    println!("points off every box: {}", assignment.miss_count());
    let first = first_visit_order(&assignment);
    println!("first visits ({} missing): {:?}", first.missing_count(), first.as_permutation());
    let repaired = repair_missing(&s.doc, &first, cfg.repair_reach_for(&s.doc))?;
    println!("after repair ({} missing): {:?}", repaired.missing_count(), repaired.as_permutation());

    let readers: Vec<_> = (0..3)
        .map(|r| {
            let reader = synth(&SynthSpec { jitter_px: 4.0 + r as f64, ..spec.clone() })?;
            Ok(gold_pipeline(&s.doc, &reader.gaze, &cfg)?.sequence)
        })
        .collect::<readorder::Result<_>>()?;
    let chosen = consolidate(&readers)?;
    println!("consolidated over {} readers: {:?}", readers.len(), chosen.as_permutation());
    Ok(())
}
