use crate::emc::{Emc, EmcConfig};
use crate::error::{EmcError, Result};
use crate::eval::SlidingWindowChain;
use crate::synth::LabeledStream;
use crate::tensor::StochasticTensor;

/// Per-step absolute error of an estimate against the active true tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingReport {
    pub errors: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub mean_abs_error: f64,
}

impl TrackingReport {
    pub fn from_errors(errors: Vec<f64>) -> Self {
        let cumulative: Vec<f64> = errors
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect();
        let mean_abs_error = match cumulative.last() {
            Some(total) => total / errors.len() as f64,
            None => 0.0,
        };
        Self {
            errors,
            cumulative,
            mean_abs_error,
        }
    }

    pub fn cumulative_abs_error(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Mean absolute difference over all `m^(k+1)` entries.
pub fn abs_error(estimate: &StochasticTensor, truth: &StochasticTensor) -> Result<f64> {
    estimate.same_shape(truth)?;
    let total: f64 = estimate
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total / truth.values().len() as f64)
}

/// Error of per-step estimates, one per stream position.
pub fn tracking_error(
    estimates: &[StochasticTensor],
    truth: &LabeledStream,
) -> Result<TrackingReport> {
    if estimates.len() != truth.len() {
        return Err(EmcError::LengthMismatch {
            left: estimates.len(),
            right: truth.len(),
        });
    }
    let errors = estimates
        .iter()
        .enumerate()
        .map(|(t, est)| abs_error(est, truth.truth_at(t)))
        .collect::<Result<_>>()?;
    Ok(TrackingReport::from_errors(errors))
}

/// Replays the full pipeline over the stream, scoring the estimate after each
/// observation.
pub fn track_emc(config: EmcConfig, truth: &LabeledStream) -> Result<TrackingReport> {
    let mut emc = Emc::new(config)?;
    let mut errors = Vec::with_capacity(truth.len());
    for (t, &s) in truth.symbols.iter().enumerate() {
        emc.step(s)?;
        errors.push(abs_error(emc.estimator().tensor(), truth.truth_at(t))?);
    }
    Ok(TrackingReport::from_errors(errors))
}

/// Same as [`track_emc`] for the sliding-window baseline.
pub fn track_mcsw(window: usize, truth: &LabeledStream) -> Result<TrackingReport> {
    let first = truth
        .true_tensors
        .first()
        .ok_or(EmcError::LengthMismatch { left: 0, right: 1 })?;
    let mut chain = SlidingWindowChain::new(window, first.order(), first.alphabet_size())?;
    let mut errors = Vec::with_capacity(truth.len());
    for (t, &s) in truth.symbols.iter().enumerate() {
        chain.observe(s)?;
        errors.push(chain.abs_error(truth.truth_at(t))?);
    }
    Ok(TrackingReport::from_errors(errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synthesize, SyntheticSpec};

    #[test]
    fn exact_estimates_have_zero_error() {
        let stream = synthesize(&SyntheticSpec::short(1)).unwrap();
        let est: Vec<_> = (0..stream.len())
            .map(|t| stream.truth_at(t).clone())
            .collect();
        let rep = tracking_error(&est, &stream).unwrap();
        assert_eq!(rep.mean_abs_error, 0.0);
        assert_eq!(rep.cumulative_abs_error(), 0.0);
    }

    #[test]
    fn uniform_against_deterministic_rows() {
        let u = StochasticTensor::new_uniform(1, 2).unwrap();
        let truth = StochasticTensor::from_values(1, 2, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(abs_error(&u, &truth).unwrap(), 0.5);
    }

    #[test]
    fn aggregates() {
        let rep = TrackingReport::from_errors(vec![0.5, 0.25, 0.25]);
        assert_eq!(rep.cumulative, vec![0.5, 0.75, 1.0]);
        assert!((rep.mean_abs_error - 1.0 / 3.0).abs() < 1e-15);
        assert!(rep.cumulative.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn misaligned_lengths() {
        let stream = synthesize(&SyntheticSpec::short(1)).unwrap();
        assert!(matches!(
            tracking_error(&[], &stream),
            Err(EmcError::LengthMismatch { .. })
        ));
    }
}
