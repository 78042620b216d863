//! Scores every strategy against gold orders with macro and micro
//! aggregation, per subset.

use readorder::comparator::{train, TrainConfig};
use readorder::gaze::ReadingPattern;
use readorder::metrics::{evaluate_corpus, Aggregation, EvalItem};
use readorder::preorder::{order_with_strategy, Strategy, StrategyConfig};
use readorder::synth::{synth_corpus, SynthSpec};

fn main() -> anyhow::Result<()> {
    let mut corpus = Vec::new();
    for pattern in ReadingPattern::ALL {
        corpus.extend(synth_corpus(&SynthSpec { dropout_rate: 0.1, ..SynthSpec::new(pattern, 3, 4) }, 6)?);
    }
    let pairs: Vec<_> = corpus.iter().map(|s| (&s.doc, &s.gold)).collect();
    let (mut model, _) = train(&pairs, &TrainConfig::default())?;

    let mut preds = Vec::new();
    for strategy in [Strategy::DefaultOcr, Strategy::ZOrder, Strategy::XyOrder, Strategy::Model] {
        for s in &corpus {
            let mut cfg = StrategyConfig::with_comparator(&mut model);
            preds.push((strategy, s, order_with_strategy(&s.doc, strategy, &mut cfg)?));
        }
    }
    let items: Vec<EvalItem> = preds
        .iter()
        .map(|(strategy, s, pred)| EvalItem { doc: &s.doc, gold: &s.gold, pred, strategy: strategy.as_str() })
        .collect();

    for aggregation in [Aggregation::MacroOverDocuments, Aggregation::MicroPooled] {
        println!("{aggregation:?}");
        for strategy in [Strategy::DefaultOcr, Strategy::ZOrder, Strategy::XyOrder, Strategy::Model] {
            let subset: Vec<EvalItem> = items.iter().filter(|i| i.strategy == strategy.as_str()).cloned().collect();
            let report = evaluate_corpus(&subset, aggregation)?;
            let cells: Vec<String> = report
                .summary
                .iter()
                .map(|(name, c)| format!("{name} {:.3}", c.tau.unwrap_or(f64::NAN)))
                .collect();
            println!("  {:<12} {}", strategy.as_str(), cells.join("  "));
        }
    }
    Ok(())
}
