//! Compares the rule-based orderers on a slanted grid.

use readorder::gaze::ReadingPattern;
use readorder::metrics::kendall_tau;
use readorder::orderers::{default_order, xy_order, z_order, ZOrderConfig};
use readorder::synth::{synth, SynthSpec};

fn main() -> readorder::Result<()> {
    let s = synth(&SynthSpec {
        row_jitter_px: 4.0,
        seed: 3,
        ..SynthSpec::new(ReadingPattern::NormalZ, 4, 5)
    })?;
    let zcfg = ZOrderConfig::default();
    println!("z-order line threshold {:.1}px", zcfg.threshold_for(&s.doc));
    let tight = ZOrderConfig::with_threshold(1.0);
    for (name, seq) in [
        ("default-ocr", default_order(&s.doc)),
        ("z-order", z_order(&s.doc, &zcfg)?),
        ("z-order 1px", z_order(&s.doc, &tight)?),
        ("xy-order", xy_order(&s.doc)),
    ] {
        let tau = kendall_tau(&seq, &s.gold).unwrap_or(f64::NAN);
        println!("{name:<12} tau {tau:>7.4}  {:?}", &seq.as_permutation()[..5]);
    }
    Ok(())
}
