//! Answer-level scoring with normalized Levenshtein similarity.

use readorder::metrics::{anls, corpus_anls, levenshtein};

fn main() -> readorder::Result<()> {
    for (pred, golds) in [
        ("2019", vec!["2019"]),
        ("209", vec!["2019"]),
        ("  Total Due ", vec!["total due", "amount due"]),
        ("invoice", vec!["receipt"]),
    ] {
        let score = anls(pred, &golds, 0.5)?;
        println!("{pred:?} vs {golds:?}: distance {} anls {:.3}", levenshtein(pred, golds[0]), score.value);
    }
    let questions = vec![("2019", vec!["2019"]), ("209", vec!["2019"]), ("x", vec!["yes", "y"])];
    println!("corpus anls {:.4}", corpus_anls(&questions, 0.5)?);
    Ok(())
}
