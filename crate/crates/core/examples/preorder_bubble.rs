//! Runs the bubble preorder with different comparators and options and
//! reports comparator calls, swaps and passes.

use readorder::comparator::{FnComparator, LeftOfComparator, OrderComparator};
use readorder::gaze::ReadingPattern;
use readorder::metrics::kendall_tau;
use readorder::preorder::{preorder, PreorderOptions};
use readorder::synth::{synth, SynthSpec};

fn main() -> readorder::Result<()> {
    let s = synth(&SynthSpec::new(ReadingPattern::NormalZ, 3, 4))?;
    let input: Vec<&str> = s.doc.box_ids().collect();
    println!("{} boxes, emission tau {:.3}", input.len(), kendall_tau(&readorder::ReadingSequence::from_order(input.clone())?, &s.gold).unwrap());

    let variants = [
        ("plain", PreorderOptions::default()),
        ("early exit", PreorderOptions { early_exit: true, ..Default::default() }),
        ("cache", PreorderOptions { cache: true, ..Default::default() }),
        ("merge sort", PreorderOptions { merge_sort: true, ..Default::default() }),
    ];
    for (name, opts) in variants {
        let mut oracle = OrderComparator::new(&s.gold);
        let (seq, trace) = preorder(&s.doc, &input, &mut oracle, &opts)?;
        println!(
            "oracle {name:<10} tau {:.3}  calls {:>3}  hits {:>2}  swaps {:>3}  passes {:>2}",
            kendall_tau(&seq, &s.gold).unwrap(),
            trace.comparator_calls,
            trace.cache_hits,
            trace.swaps,
            trace.passes
        );
    }

    let (seq, _) = preorder(&s.doc, &input, &mut LeftOfComparator, &PreorderOptions::default())?;
    println!("left-of        tau {:.3}", kendall_tau(&seq, &s.gold).unwrap());

    let mut top_down = FnComparator(|l: &readorder::BoundingBox, r: &readorder::BoundingBox| {
        if l.centroid().y <= r.centroid().y { 0.8 } else { 0.2 }
    });
    let opts = PreorderOptions { log_swaps: true, ..Default::default() };
    let (_, trace) = preorder(&s.doc, &input, &mut top_down, &opts)?;
    println!("top-down swap positions in the first pass: {:?}", trace.swap_log.unwrap()[0]);
    Ok(())
}
