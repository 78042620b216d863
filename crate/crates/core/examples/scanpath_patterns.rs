//! Direction histograms and pattern classification for each synthetic
//! reading pattern.

use readorder::gaze::{classify_pattern, scanpath_stats, Compass, PatternThresholds, ReadingPattern};
use readorder::synth::{synth, SynthSpec};

fn main() -> readorder::Result<()> {
    let thresholds = PatternThresholds::default();
    let header: Vec<String> = Compass::ALL.iter().map(|c| format!("{:>4}", format!("{c:?}"))).collect();
    println!("{:<20}{}  backtrack revisit  classified", "pattern", header.join(""));
    for pattern in ReadingPattern::ALL {
        let s = synth(&SynthSpec { jitter_px: 2.0, ..SynthSpec::new(pattern, 3, 4) })?;
        let stats = scanpath_stats(&s.gaze, &s.doc)?;
        let shares: Vec<String> = Compass::ALL.iter().map(|&c| format!("{:>4.0}", 100.0 * stats.share(c))).collect();
        println!(
            "{:<20}{}  {:>9.2} {:>7.2}  {}",
            pattern.as_str(),
            shares.join(""),
            stats.backtrack_rate,
            stats.revisit_rate,
            classify_pattern(&stats, &thresholds)
        );
    }
    Ok(())
}
