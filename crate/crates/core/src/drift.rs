//! Steady/drift tracking by periodic comparison against an older estimate.

use crate::error::{check_threshold, Result};
use crate::tensor::{tensor_distance, StochasticTensor};

/// The indicator φ: steady (1) or drifting (0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Steady,
    Drift,
}

impl Phase {
    pub fn is_steady(self) -> bool {
        self == Phase::Steady
    }

    /// 1 for steady, 0 for drift.
    pub fn indicator(self) -> u8 {
        match self {
            Phase::Steady => 1,
            Phase::Drift => 0,
        }
    }

    pub fn from_indicator(v: u8) -> Option<Self> {
        match v {
            1 => Some(Phase::Steady),
            0 => Some(Phase::Drift),
            _ => None,
        }
    }

    /// Picks the fast value while drifting and the slow value while steady.
    pub fn select<T>(self, fast: T, slow: T) -> T {
        match self {
            Phase::Steady => slow,
            Phase::Drift => fast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftOutcome {
    SteadyKept,
    DriftEntered,
    DriftContinuing,
    DriftEnded,
}

impl DriftOutcome {
    /// Whether the caller must follow up with a memory check.
    pub fn requires_regime_check(self) -> bool {
        self != DriftOutcome::SteadyKept
    }
}

/// Check cadence, reference snapshot and indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftState {
    phase: Phase,
    prev: StochasticTensor,
    last_distance: f64,
    tau: u64,
    since_check: u64,
}

impl DriftState {
    /// Starts steady with a uniform reference tensor.
    pub fn new(order: usize, alphabet: usize, tau: u64) -> Result<Self> {
        Ok(Self::from_parts(
            Phase::Steady,
            StochasticTensor::new_uniform(order, alphabet)?,
            0.0,
            tau.max(1),
            0,
        ))
    }

    pub(crate) fn from_parts(
        phase: Phase,
        prev: StochasticTensor,
        last_distance: f64,
        tau: u64,
        since_check: u64,
    ) -> Self {
        Self {
            phase,
            prev,
            last_distance,
            tau,
            since_check,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn last_distance(&self) -> f64 {
        self.last_distance
    }

    pub fn tau(&self) -> u64 {
        self.tau
    }

    /// Tensor updates counted since the last check.
    pub fn since_check(&self) -> u64 {
        self.since_check
    }

    /// Reference snapshot taken at the previous check.
    pub fn reference(&self) -> &StochasticTensor {
        &self.prev
    }

    /// Counts one tensor update; returns `true` when a check is due.
    pub fn record_update(&mut self) -> bool {
        self.since_check += 1;
        if self.since_check >= self.tau {
            self.since_check = 0;
            true
        } else {
            false
        }
    }

    /// Compares `current` with the reference and advances the indicator.
    /// Both comparisons are strict, so a distance equal to `delta` never
    /// changes the phase. The reference is replaced by `current` afterwards.
    pub fn check_drift(&mut self, current: &StochasticTensor, delta: f64) -> Result<DriftOutcome> {
        check_threshold("delta", delta)?;
        let distance = tensor_distance(current, &self.prev)?;
        Ok(self.apply(distance, current, delta))
    }

    fn apply(&mut self, distance: f64, current: &StochasticTensor, delta: f64) -> DriftOutcome {
        self.last_distance = distance;
        let outcome = match self.phase {
            Phase::Steady if distance > delta => {
                self.phase = Phase::Drift;
                DriftOutcome::DriftEntered
            }
            Phase::Steady => DriftOutcome::SteadyKept,
            Phase::Drift if distance < delta => {
                self.phase = Phase::Steady;
                DriftOutcome::DriftEnded
            }
            Phase::Drift => DriftOutcome::DriftContinuing,
        };
        self.prev.copy_values_from(current);
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(phase: Phase) -> DriftState {
        let mut d = DriftState::new(1, 2, 10).unwrap();
        d.phase = phase;
        d
    }

    fn uniform() -> StochasticTensor {
        StochasticTensor::new_uniform(1, 2).unwrap()
    }

    #[test]
    fn steady_to_drift() {
        let mut d = state(Phase::Steady);
        assert_eq!(d.apply(0.4, &uniform(), 0.3), DriftOutcome::DriftEntered);
        assert_eq!(d.phase(), Phase::Drift);
        assert_eq!(d.last_distance(), 0.4);
    }

    #[test]
    fn steady_kept() {
        let mut d = state(Phase::Steady);
        let out = d.apply(0.1, &uniform(), 0.3);
        assert_eq!(out, DriftOutcome::SteadyKept);
        assert!(!out.requires_regime_check());
        assert_eq!(d.phase(), Phase::Steady);
    }

    #[test]
    fn drift_ends() {
        let mut d = state(Phase::Drift);
        let out = d.apply(0.02, &uniform(), 0.05);
        assert_eq!(out, DriftOutcome::DriftEnded);
        assert!(out.requires_regime_check());
        assert_eq!(d.phase(), Phase::Steady);
    }

    #[test]
    fn drift_continues() {
        let mut d = state(Phase::Drift);
        let out = d.apply(0.2, &uniform(), 0.05);
        assert_eq!(out, DriftOutcome::DriftContinuing);
        assert!(out.requires_regime_check());
    }

    #[test]
    fn boundary_distance_changes_nothing() {
        let mut d = state(Phase::Steady);
        assert_eq!(d.apply(0.3, &uniform(), 0.3), DriftOutcome::SteadyKept);
        let mut d = state(Phase::Drift);
        assert_eq!(d.apply(0.3, &uniform(), 0.3), DriftOutcome::DriftContinuing);
    }

    #[test]
    fn reference_is_replaced_at_check() {
        let mut d = DriftState::new(1, 2, 10).unwrap();
        let current = StochasticTensor::from_values(1, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = d.check_drift(&current, 0.3).unwrap();
        assert_eq!(out, DriftOutcome::DriftEntered);
        assert!((d.last_distance() - ((2.0 - 2f64.sqrt()) / 2.0).sqrt()).abs() < 1e-15);
        assert_eq!(d.reference(), &current);
        let out = d.check_drift(&current, 0.3).unwrap();
        assert_eq!(out, DriftOutcome::DriftEnded);
        assert_eq!(d.last_distance(), 0.0);
    }

    #[test]
    fn cadence() {
        let mut d = DriftState::new(1, 2, 3).unwrap();
        let due: Vec<bool> = (0..7).map(|_| d.record_update()).collect();
        assert_eq!(due, [false, false, true, false, false, true, false]);
    }

    #[test]
    fn rejects_bad_delta_and_shape() {
        let mut d = DriftState::new(1, 2, 3).unwrap();
        assert!(d.check_drift(&uniform(), 0.0).is_err());
        assert!(d.check_drift(&uniform(), 1.5).is_err());
        let other = StochasticTensor::new_uniform(1, 3).unwrap();
        assert!(d.check_drift(&other, 0.3).is_err());
    }

    #[test]
    fn phase_selects_fast_during_drift() {
        assert_eq!(Phase::Drift.select(0.9, 0.99), 0.9);
        assert_eq!(Phase::Steady.select(0.9, 0.99), 0.99);
        assert_eq!(
            Phase::from_indicator(Phase::Steady.indicator()),
            Some(Phase::Steady)
        );
        assert_eq!(Phase::from_indicator(2), None);
    }
}
