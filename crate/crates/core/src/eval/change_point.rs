use std::collections::HashMap;

use crate::emc::{DriftEvent, PredictionRecord};
use crate::memory::ModeId;
use crate::synth::LabeledStream;

/// Classification-view scoring of change point detections.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// `2TP / (2TP + FP + FN)`; 1 when there is nothing to detect and nothing
    /// was detected.
    pub f1: f64,
    /// Mean of `detection - change_point` over true positives.
    pub mean_detection_lag: Option<f64>,
    pub margin_of_error: usize,
}

/// Matches each true change point `t`, in order, to the earliest unmatched
/// detection in `(t, t + moe]`. Everything unmatched is a false positive or a
/// false negative; a detection before its change point can never match.
pub fn change_point_f1(detections: &[usize], truth: &[usize], moe: usize) -> ChangeReport {
    let mut used = vec![false; detections.len()];
    let mut lags = Vec::new();
    for &t in truth {
        let hit = detections
            .iter()
            .enumerate()
            .find(|&(i, &d)| !used[i] && d > t && d - t <= moe);
        if let Some((i, &d)) = hit {
            used[i] = true;
            lags.push((d - t) as f64);
        }
    }
    let tp = lags.len();
    let fp = detections.len() - tp;
    let fn_ = truth.len() - tp;
    let denom = 2 * tp + fp + fn_;
    ChangeReport {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        f1: if denom == 0 {
            1.0
        } else {
            2.0 * tp as f64 / denom as f64
        },
        mean_detection_lag: (tp > 0).then(|| lags.iter().sum::<f64>() / tp as f64),
        margin_of_error: moe,
    }
}

/// Which records count as change point detections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectionSource {
    /// Steps where the predicted mode switches from one stored mode to another.
    #[default]
    ModeSwitch,
    /// Steps where the steady-to-drift transition fires.
    DriftEntered,
}

pub fn detections(records: &[PredictionRecord], source: DetectionSource) -> Vec<usize> {
    match source {
        DetectionSource::DriftEntered => records
            .iter()
            .filter(|r| r.events.drift == Some(DriftEvent::Entered))
            .map(|r| r.t as usize)
            .collect(),
        DetectionSource::ModeSwitch => {
            mode_switches(records.iter().map(|r| (r.t as usize, r.mode)))
        }
    }
}

pub(crate) fn mode_switches(modes: impl Iterator<Item = (usize, Option<ModeId>)>) -> Vec<usize> {
    let mut prev = None;
    let mut out = Vec::new();
    for (t, mode) in modes {
        if let (Some(p), Some(m)) = (prev, mode) {
            if p != m {
                out.push(t);
            }
        }
        if mode.is_some() {
            prev = mode;
        }
    }
    out
}

/// Average delay between each true change point and the first step in the new
/// regime whose prediction equals the mode that regime's true mode maps to.
/// The map sends each true mode to the predicted mode it co-occurs with most.
/// Regimes in which that mode is never predicted are skipped.
pub fn mean_recognition_lag(predictions: &[Option<ModeId>], truth: &LabeledStream) -> Option<f64> {
    let mut co: HashMap<(usize, ModeId), usize> = HashMap::new();
    for (&label, pred) in truth.labels.iter().zip(predictions) {
        if let Some(p) = pred {
            *co.entry((label, *p)).or_default() += 1;
        }
    }
    let mut best: HashMap<usize, (usize, ModeId)> = HashMap::new();
    for (&(label, pred), &n) in &co {
        let e = best.entry(label).or_insert((n, pred));
        if n > e.0 || (n == e.0 && pred < e.1) {
            *e = (n, pred);
        }
    }

    let len = predictions.len().min(truth.len());
    let mut lags = Vec::new();
    for (i, &cp) in truth.change_points.iter().enumerate() {
        let end = truth
            .change_points
            .get(i + 1)
            .copied()
            .unwrap_or(len)
            .min(len);
        let Some(&(_, target)) = best.get(&truth.labels[cp]) else {
            continue;
        };
        if let Some(t) = (cp..end).find(|&t| predictions[t] == Some(target)) {
            lags.push((t - cp) as f64);
        }
    }
    (!lags.is_empty()).then(|| lags.iter().sum::<f64>() / lags.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive search over every legal one-to-one matching; returns the
    /// best F1.
    fn brute_force_f1(detections: &[usize], truth: &[usize], moe: usize) -> f64 {
        fn go(ti: usize, det: &[usize], truth: &[usize], moe: usize, used: &mut [bool]) -> usize {
            if ti == truth.len() {
                return 0;
            }
            let mut best = go(ti + 1, det, truth, moe, used);
            for i in 0..det.len() {
                if !used[i] && det[i] > truth[ti] && det[i] - truth[ti] <= moe {
                    used[i] = true;
                    best = best.max(1 + go(ti + 1, det, truth, moe, used));
                    used[i] = false;
                }
            }
            best
        }
        let tp = go(
            0,
            detections,
            truth,
            moe,
            &mut vec![false; detections.len()],
        );
        let denom = 2 * tp + (detections.len() - tp) + (truth.len() - tp);
        if denom == 0 {
            1.0
        } else {
            2.0 * tp as f64 / denom as f64
        }
    }

    #[test]
    fn shifted_detections_are_all_hits() {
        let truth = [1500, 3300, 5000];
        let det: Vec<_> = truth.iter().map(|t| t + 1).collect();
        let r = change_point_f1(&det, &truth, 250);
        assert_eq!(
            (r.true_positives, r.false_positives, r.false_negatives),
            (3, 0, 0)
        );
        assert_eq!(r.f1, 1.0);
        assert_eq!(r.mean_detection_lag, Some(1.0));
    }

    #[test]
    fn early_detection_is_false_positive() {
        let r = change_point_f1(&[995], &[1000], 250);
        assert_eq!(
            (r.true_positives, r.false_positives, r.false_negatives),
            (0, 1, 1)
        );
        assert_eq!(r.f1, 0.0);
        assert_eq!(r.mean_detection_lag, None);
    }

    #[test]
    fn two_detections_in_one_window() {
        let det = [1010, 1100];
        let r = change_point_f1(&det, &[1000], 250);
        assert_eq!(
            (r.true_positives, r.false_positives, r.false_negatives),
            (1, 1, 0)
        );
        assert_eq!(r.f1, brute_force_f1(&det, &[1000], 250));
        assert_eq!(r.mean_detection_lag, Some(10.0));
    }

    #[test]
    fn greedy_matches_exhaustive_search() {
        let truth = [100, 400, 700, 1000];
        let mut state = 7u64;
        for _ in 0..300 {
            let n = (state % 6) as usize;
            let det: Vec<usize> = {
                let mut d: Vec<usize> = (0..n)
                    .map(|_| {
                        state = state
                            .wrapping_mul(6364136223846793005)
                            .wrapping_add(1442695040888963407);
                        ((state >> 33) % 1200) as usize
                    })
                    .collect();
                d.sort_unstable();
                d
            };
            state = state.wrapping_add(13);
            let r = change_point_f1(&det, &truth, 120);
            assert_eq!(r.f1, brute_force_f1(&det, &truth, 120), "{det:?}");
        }
    }

    #[test]
    fn boundary_of_margin() {
        let r = change_point_f1(&[1000, 1250], &[1000], 250);
        assert_eq!(r.true_positives, 1);
        assert_eq!(r.mean_detection_lag, Some(250.0));
        let r = change_point_f1(&[1251], &[1000], 250);
        assert_eq!(r.true_positives, 0);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(change_point_f1(&[], &[], 250).f1, 1.0);
        assert_eq!(change_point_f1(&[], &[10], 250).false_negatives, 1);
    }

    #[test]
    fn mode_switch_detection_ignores_first_assignment() {
        let modes = [
            None,
            None,
            Some(ModeId(0)),
            Some(ModeId(0)),
            Some(ModeId(1)),
            Some(ModeId(0)),
        ];
        let det = mode_switches(modes.iter().copied().enumerate());
        assert_eq!(det, vec![4, 5]);
    }

    #[test]
    fn recognition_lag_uses_majority_map() {
        let truth = LabeledStream {
            symbols: vec![0; 10],
            labels: vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1],
            change_points: vec![5],
            true_tensors: vec![],
        };
        let p = |v: usize| Some(ModeId(v));
        let preds = [p(2), p(2), p(2), p(2), p(2), p(2), p(2), p(7), p(7), p(7)];
        assert_eq!(mean_recognition_lag(&preds, &truth), Some(2.0));
        let shared = [p(2); 10];
        assert_eq!(mean_recognition_lag(&shared, &truth), Some(0.0));
        let unassigned = [p(2), p(2), p(2), p(2), p(2), None, None, None, None, None];
        assert_eq!(mean_recognition_lag(&unassigned, &truth), None);
    }
}
