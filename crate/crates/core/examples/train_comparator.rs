//! Trains the native pairwise comparator on synthetic documents for each
//! feature regime and saves the box model.

use readorder::comparator::{train, Regime, TrainConfig};
use readorder::gaze::ReadingPattern;
use readorder::synth::{synth_corpus, SynthSpec};

fn main() -> anyhow::Result<()> {
    let corpus = synth_corpus(&SynthSpec::new(ReadingPattern::NormalZ, 4, 5), 40)?;
    let pairs: Vec<_> = corpus.iter().map(|s| (&s.doc, &s.gold)).collect();
    for regime in [Regime::Box, Regime::Text, Regime::TextBox] {
        let cfg = TrainConfig { regime, epochs: 20, ..TrainConfig::default() };
        let (model, report) = train(&pairs, &cfg)?;
        println!(
            "{:<9} dim {:>4}  pairs {:>5}/{:<5} loss {:.4}  train acc {:.3}  held-out acc {}",
            regime.as_str(),
            model.weights.len(),
            report.train_pairs,
            report.heldout_pairs,
            report.final_loss,
            report.train_pair_accuracy,
            report.heldout_pair_accuracy.map_or("n/a".into(), |a| format!("{a:.3}")),
        );
        if regime == Regime::Box {
            let path = std::env::temp_dir().join("readorder-box-model.json");
            std::fs::write(&path, serde_json::to_string_pretty(&model)?)?;
            println!("          saved to {}", path.display());
        }
    }
    Ok(())
}
