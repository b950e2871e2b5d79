use std::collections::HashMap;

use crate::emc::PredictionRecord;
use crate::error::{EmcError, Result};
use crate::memory::ModeId;

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index from the pair-counting contingency table.
///
/// Returns 1 when both labelings are trivially identical partitions (the
/// chance-corrected ratio is 0/0 there).
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(EmcError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&n| pairs(n)).sum();
    let sum_a: f64 = rows.values().map(|&n| pairs(n)).sum();
    let sum_b: f64 = cols.values().map(|&n| pairs(n)).sum();
    let total = pairs(a.len() as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// ARI over the steps that carry a prediction.
pub fn ari_assigned(truth: &[usize], predicted: &[Option<ModeId>]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(EmcError::LengthMismatch {
            left: truth.len(),
            right: predicted.len(),
        });
    }
    let (a, b): (Vec<usize>, Vec<usize>) = truth
        .iter()
        .zip(predicted)
        .filter_map(|(&t, p)| p.map(|p| (t, p.0)))
        .unzip();
    adjusted_rand_index(&a, &b)
}

/// ARI of a record sequence against per-step true labels.
pub fn record_ari(records: &[PredictionRecord], truth: &[usize]) -> Result<f64> {
    let preds: Vec<_> = records.iter().map(|r| r.mode).collect();
    ari_assigned(truth, &preds)
}

/// ARI restricted to steady steps; `None` when no step is steady.
pub fn steady_only_ari(records: &[PredictionRecord], truth: &[usize]) -> Result<Option<f64>> {
    if records.len() != truth.len() {
        return Err(EmcError::LengthMismatch {
            left: records.len(),
            right: truth.len(),
        });
    }
    let (t, p): (Vec<usize>, Vec<Option<ModeId>>) = records
        .iter()
        .zip(truth)
        .filter(|(r, _)| r.phase.is_steady())
        .map(|(r, &l)| (l, r.mode))
        .unzip();
    if t.is_empty() {
        return Ok(None);
    }
    ari_assigned(&t, &p).map(Some)
}

/// Fraction of records emitted while drifting.
pub fn drift_ratio(records: &[PredictionRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let drifting = records.iter().filter(|r| !r.phase.is_steady()).count();
    drifting as f64 / records.len() as f64
}
