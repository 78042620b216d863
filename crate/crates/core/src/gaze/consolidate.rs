use crate::error::{Error, Result};
use crate::metrics::kendall_tau;
use crate::model::ReadingSequence;

/// Picks the annotation that agrees best with all the others.
///
/// Each candidate is scored by its mean Kendall tau against every other
/// annotation; pairs with fewer than two common boxes are skipped, and a
/// candidate with no defined pair scores 0. Ties go to the lower missing
/// count, then to the earlier position.
pub fn consolidate(annotations: &[ReadingSequence]) -> Result<&ReadingSequence> {
    if annotations.is_empty() {
        return Err(Error::EmptyInput("annotation list"));
    }
    let score = |i: usize| {
        let taus: Vec<f64> = annotations
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .filter_map(|(_, other)| kendall_tau(&annotations[i], other))
            .collect();
        if taus.is_empty() {
            0.0
        } else {
            taus.iter().sum::<f64>() / taus.len() as f64
        }
    };
    let mut best = 0;
    let mut best_score = score(0);
    for i in 1..annotations.len() {
        let s = score(i);
        let better = if (s - best_score).abs() <= 1e-12 {
            annotations[i].missing_count() < annotations[best].missing_count()
        } else {
            s > best_score
        };
        if better {
            best = i;
            best_score = s;
        }
    }
    Ok(&annotations[best])
}
