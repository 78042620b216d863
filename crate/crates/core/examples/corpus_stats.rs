//! Corpus overview table for a mixed synthetic corpus split into train and
//! test.

use readorder::gaze::ReadingPattern;
use readorder::model::Split;
use readorder::stats::corpus_stats;
use readorder::synth::{synth_corpus, SynthSpec};

fn main() -> readorder::Result<()> {
    let mut docs = Vec::new();
    for (i, pattern) in ReadingPattern::ALL.into_iter().enumerate() {
        for (k, mut s) in synth_corpus(&SynthSpec { seed: i as u64, ..SynthSpec::new(pattern, 3, 2 + i) }, 5 + i)?.into_iter().enumerate() {
            s.doc.split = Some(if k % 4 == 3 { Split::Test } else { Split::Train });
            docs.push(s.doc);
        }
    }
    let stats = corpus_stats(&docs);
    print!("{stats}");
    Ok(())
}
