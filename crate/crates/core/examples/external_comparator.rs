//! Orders a document with a comparator living in another process. Run
//! without arguments; the example re-spawns itself with `--serve` as the
//! child, which answers left-of-means-before.

use std::io::{stdin, stdout};
use std::process::Command;
use std::time::Duration;

use readorder::comparator::external::{run_stub, ExternalComparator, StubMode};
use readorder::gaze::ReadingPattern;
use readorder::metrics::kendall_tau;
use readorder::preorder::{preorder, PreorderOptions};
use readorder::synth::{synth, SynthSpec};

fn main() -> anyhow::Result<()> {
    if std::env::args().any(|a| a == "--serve") {
        run_stub(StubMode::LeftOf, stdin().lock(), stdout().lock())?;
        return Ok(());
    }
    let mut child = Command::new(std::env::current_exe()?);
    child.arg("--serve");
    let mut ext = ExternalComparator::spawn_command(child, "external_comparator --serve", "box", Duration::from_secs(5))?;

    let s = synth(&SynthSpec::new(ReadingPattern::NormalZ, 1, 6))?;
    let input: Vec<&str> = s.doc.box_ids().collect();
    let (seq, trace) = preorder(&s.doc, &input, &mut ext, &PreorderOptions { cache: true, ..Default::default() })?;
    println!("{} requests over the wire, {} cache hits", ext.calls(), trace.cache_hits);
    println!("order {:?}", seq.as_permutation());
    println!("tau vs gold {:.3}", kendall_tau(&seq, &s.gold).unwrap());
    Ok(())
}
