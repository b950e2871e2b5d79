//! Memory of discovered modes.
//!
//! Each mode is the running mean of the estimates that were matched to it
//! while steady. During drift the memory is only read: the closest mode may
//! become the prediction, but nothing is created or refined.

use std::fmt;

use crate::drift::Phase;
use crate::error::{check_threshold, EmcError, Result};
use crate::tensor::{tensor_distance, StochasticTensor};

/// Identifier of a stored mode, assigned in creation order from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId(pub usize);

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    id: ModeId,
    mean: StochasticTensor,
    updates: u64,
}

impl Mode {
    pub(crate) fn from_parts(id: ModeId, mean: StochasticTensor, updates: u64) -> Self {
        Self { id, mean, updates }
    }

    pub fn id(&self) -> ModeId {
        self.id
    }

    pub fn mean(&self) -> &StochasticTensor {
        &self.mean
    }

    /// Number of estimates averaged into the mean (at least 1).
    pub fn updates(&self) -> u64 {
        self.updates
    }

    fn refine(&mut self, estimate: &StochasticTensor) {
        self.updates += 1;
        self.mean.blend_toward(estimate, 1.0 / self.updates as f64);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeEvent {
    None,
    Matched(ModeId),
    Refined(ModeId),
    Created(ModeId),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeMemory {
    modes: Vec<Mode>,
    prediction: Option<ModeId>,
    mutations: u64,
}

impl ModeMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn from_parts(modes: Vec<Mode>, prediction: Option<ModeId>, mutations: u64) -> Self {
        Self {
            modes,
            prediction,
            mutations,
        }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn prediction(&self) -> Option<ModeId> {
        self.prediction
    }

    /// Count of creations plus refinements; never advances while drifting.
    pub fn mutations(&self) -> u64 {
        self.mutations
    }

    /// Nearest stored mode and its distance; ties go to the lowest id.
    pub fn closest(&self, estimate: &StochasticTensor) -> Result<(ModeId, f64)> {
        let mut best: Option<(ModeId, f64)> = None;
        for mode in &self.modes {
            let d = tensor_distance(estimate, &mode.mean)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((mode.id, d));
            }
        }
        best.ok_or(EmcError::EmptyMemory)
    }

    /// Memory check against the current estimate.
    pub fn identify_regime(
        &mut self,
        estimate: &StochasticTensor,
        phase: Phase,
        eta: f64,
    ) -> Result<RegimeEvent> {
        check_threshold("eta", eta)?;
        if let Some(first) = self.modes.first() {
            first.mean.same_shape(estimate)?;
        } else {
            return Ok(if phase.is_steady() {
                RegimeEvent::Created(self.create(estimate))
            } else {
                RegimeEvent::None
            });
        }

        let (id, d) = self.closest(estimate)?;
        if d < eta {
            self.prediction = Some(id);
            if phase.is_steady() {
                self.modes[id.0].refine(estimate);
                self.mutations += 1;
                Ok(RegimeEvent::Refined(id))
            } else {
                Ok(RegimeEvent::Matched(id))
            }
        } else if phase.is_steady() {
            Ok(RegimeEvent::Created(self.create(estimate)))
        } else {
            Ok(RegimeEvent::None)
        }
    }

    fn create(&mut self, estimate: &StochasticTensor) -> ModeId {
        let id = ModeId(self.modes.len());
        self.modes.push(Mode {
            id,
            mean: estimate.clone(),
            updates: 1,
        });
        self.prediction = Some(id);
        self.mutations += 1;
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tensor(rows: &[[f64; 2]]) -> StochasticTensor {
        StochasticTensor::from_values(1, 2, rows.iter().flatten().copied().collect()).unwrap()
    }

    #[test]
    fn empty_memory_steady_creates() {
        let mut mem = ModeMemory::new();
        let ev = mem
            .identify_regime(&tensor(&[[0.5, 0.5], [0.5, 0.5]]), Phase::Steady, 0.3)
            .unwrap();
        assert_eq!(ev, RegimeEvent::Created(ModeId(0)));
        assert_eq!(mem.prediction(), Some(ModeId(0)));
        assert_eq!(mem.modes()[0].updates(), 1);
    }

    #[test]
    fn empty_memory_drift_does_nothing() {
        let mut mem = ModeMemory::new();
        let ev = mem
            .identify_regime(&tensor(&[[0.5, 0.5], [0.5, 0.5]]), Phase::Drift, 0.3)
            .unwrap();
        assert_eq!(ev, RegimeEvent::None);
        assert!(mem.is_empty());
        assert_eq!(mem.prediction(), None);
    }

    #[test]
    fn close_estimate_refines_running_mean() {
        let mut mem = ModeMemory::new();
        mem.identify_regime(&tensor(&[[0.5, 0.5], [0.5, 0.5]]), Phase::Steady, 0.35)
            .unwrap();
        let ev = mem
            .identify_regime(&tensor(&[[0.7, 0.3], [0.5, 0.5]]), Phase::Steady, 0.35)
            .unwrap();
        assert_eq!(ev, RegimeEvent::Refined(ModeId(0)));
        let mode = &mem.modes()[0];
        assert_eq!(mode.updates(), 2);
        assert!((mode.mean().row(0)[0] - 0.6).abs() < 1e-15);
        assert!((mode.mean().row(0)[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn drift_match_only_predicts() {
        let mut mem = ModeMemory::new();
        mem.identify_regime(&tensor(&[[0.5, 0.5], [0.5, 0.5]]), Phase::Steady, 0.35)
            .unwrap();
        mem.identify_regime(&tensor(&[[1.0, 0.0], [1.0, 0.0]]), Phase::Steady, 0.35)
            .unwrap();
        let before = mem.clone();
        let ev = mem
            .identify_regime(&tensor(&[[0.55, 0.45], [0.5, 0.5]]), Phase::Drift, 0.35)
            .unwrap();
        assert_eq!(ev, RegimeEvent::Matched(ModeId(0)));
        assert_eq!(mem.prediction(), Some(ModeId(0)));
        assert_eq!(mem.modes(), before.modes());
        assert_eq!(mem.mutations(), before.mutations());
    }

    #[test]
    fn distant_estimate_during_drift_is_ignored() {
        let mut mem = ModeMemory::new();
        mem.identify_regime(&tensor(&[[1.0, 0.0], [1.0, 0.0]]), Phase::Steady, 0.35)
            .unwrap();
        let far = tensor(&[[0.0, 1.0], [0.2, 0.8]]);
        let d = mem.closest(&far).unwrap().1;
        assert!(d >= 0.35, "{d}");
        let ev = mem.identify_regime(&far, Phase::Drift, 0.35).unwrap();
        assert_eq!(ev, RegimeEvent::None);
        assert_eq!(mem.prediction(), Some(ModeId(0)));
        assert_eq!(mem.len(), 1);
    }

    #[test]
    fn distant_estimate_while_steady_creates() {
        let mut mem = ModeMemory::new();
        mem.identify_regime(&tensor(&[[1.0, 0.0], [1.0, 0.0]]), Phase::Steady, 0.35)
            .unwrap();
        let ev = mem
            .identify_regime(&tensor(&[[0.0, 1.0], [0.0, 1.0]]), Phase::Steady, 0.35)
            .unwrap();
        assert_eq!(ev, RegimeEvent::Created(ModeId(1)));
        assert_eq!(mem.prediction(), Some(ModeId(1)));
    }

    #[test]
    fn closest_ties_break_low() {
        let mut mem = ModeMemory::new();
        assert_eq!(
            mem.closest(&tensor(&[[0.5, 0.5], [0.5, 0.5]])),
            Err(EmcError::EmptyMemory)
        );
        let t = tensor(&[[0.9, 0.1], [0.5, 0.5]]);
        mem.create(&t);
        mem.create(&t);
        let (id, d) = mem.closest(&tensor(&[[0.1, 0.9], [0.5, 0.5]])).unwrap();
        assert_eq!(id, ModeId(0));
        assert!(d > 0.0);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut mem = ModeMemory::new();
        mem.create(&tensor(&[[0.5, 0.5], [0.5, 0.5]]));
        let other = StochasticTensor::new_uniform(1, 3).unwrap();
        assert!(matches!(
            mem.identify_regime(&other, Phase::Steady, 0.3),
            Err(EmcError::ShapeMismatch { .. })
        ));
    }
}
