//! The per-observation pipeline: estimate, check for drift, consult memory.

use std::fmt;

use crate::drift::{DriftOutcome, DriftState, Phase};
use crate::error::{ConfigErrors, Result};
use crate::estimator::Estimator;
use crate::memory::{ModeId, ModeMemory, RegimeEvent};
use crate::tensor::{StochasticTensor, Symbol};

/// Hyperparameters. Paired values are (fast, slow): fast applies while
/// drifting, slow while steady.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmcConfig {
    pub order: usize,
    pub alphabet_size: usize,
    pub lambda_fast: f64,
    pub lambda_slow: f64,
    pub beta: f64,
    pub delta_fast: f64,
    pub delta_slow: f64,
    pub eta_fast: f64,
    pub eta_slow: f64,
    pub tau: u64,
}

/// Check interval matched to a learning coefficient, `round(1 / (1 - lambda))`.
pub fn tau_for(lambda: f64) -> u64 {
    (1.0 / (1.0 - lambda)).round().max(1.0) as u64
}

impl EmcConfig {
    /// Defaults for an order-`k` chain over `m` symbols.
    pub fn defaults(order: usize, alphabet_size: usize) -> Self {
        let lambda_slow = 0.99;
        Self {
            order,
            alphabet_size,
            lambda_fast: 0.9,
            lambda_slow,
            beta: 0.0,
            delta_fast: 0.3,
            delta_slow: 0.1,
            eta_fast: 0.5,
            eta_slow: 0.25,
            tau: tau_for(lambda_slow),
        }
    }

    /// Collects every range violation.
    pub fn validate(&self) -> Result<()> {
        let mut errs = ConfigErrors::default();
        if self.alphabet_size < 2 {
            errs.push(format!("m = {} must be at least 2", self.alphabet_size));
        } else if StochasticTensor::new_uniform(self.order, self.alphabet_size).is_err() {
            errs.push(format!(
                "k = {}, m = {} exceeds addressable tensor size",
                self.order, self.alphabet_size
            ));
        }
        let open = |v: f64| v > 0.0 && v < 1.0;
        let threshold = |v: f64| v > 0.0 && v <= 1.0;
        for (name, v) in [
            ("lambda_fast", self.lambda_fast),
            ("lambda_slow", self.lambda_slow),
        ] {
            if !open(v) {
                errs.push(format!("{name} = {v} must be in (0, 1)"));
            }
        }
        if !(0.0..1.0).contains(&self.beta) {
            errs.push(format!("beta = {} must be in [0, 1)", self.beta));
        }
        for (name, v) in [
            ("delta_fast", self.delta_fast),
            ("delta_slow", self.delta_slow),
            ("eta_fast", self.eta_fast),
            ("eta_slow", self.eta_slow),
        ] {
            if !threshold(v) {
                errs.push(format!("{name} = {v} must be in (0, 1]"));
            }
        }
        if self.lambda_fast > self.lambda_slow {
            errs.push(format!(
                "lambda_fast = {} must not exceed lambda_slow = {}",
                self.lambda_fast, self.lambda_slow
            ));
        }
        if self.tau < 1 {
            errs.push("tau must be at least 1");
        }
        errs.into_result()
    }
}

/// Steady/drift transition reported on a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftEvent {
    Entered,
    Ended,
}

/// Memory event reported on a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeEvent {
    Created(ModeId),
    Refined(ModeId),
    Matched(ModeId),
}

impl ModeEvent {
    fn from_regime(ev: RegimeEvent) -> Option<Self> {
        match ev {
            RegimeEvent::None => None,
            RegimeEvent::Matched(id) => Some(ModeEvent::Matched(id)),
            RegimeEvent::Refined(id) => Some(ModeEvent::Refined(id)),
            RegimeEvent::Created(id) => Some(ModeEvent::Created(id)),
        }
    }
}

/// What happened on one step. A check can yield both a drift transition and a
/// memory event (e.g. drift ends and the matched mode is refined).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepEvents {
    pub drift: Option<DriftEvent>,
    pub mode: Option<ModeEvent>,
}

impl StepEvents {
    pub fn is_empty(&self) -> bool {
        self.drift.is_none() && self.mode.is_none()
    }
}

impl fmt::Display for StepEvents {
    /// `none`, a single label, or two labels joined by `+`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let drift = self.drift.map(|d| match d {
            DriftEvent::Entered => "drift_entered",
            DriftEvent::Ended => "drift_ended",
        });
        let mode = self.mode.map(|m| match m {
            ModeEvent::Created(_) => "mode_created",
            ModeEvent::Refined(_) => "mode_refined",
            ModeEvent::Matched(_) => "mode_matched",
        });
        match (drift, mode) {
            (None, None) => f.write_str("none"),
            (Some(a), None) | (None, Some(a)) => f.write_str(a),
            (Some(a), Some(b)) => write!(f, "{a}+{b}"),
        }
    }
}

/// Output row for one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRecord {
    pub t: u64,
    pub symbol: Symbol,
    pub phase: Phase,
    /// Distance computed at the most recent check.
    pub distance: f64,
    /// Predicted mode; `None` until the first mode exists.
    pub mode: Option<ModeId>,
    pub events: StepEvents,
}

/// One stream's estimator, drift tracker and mode memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Emc {
    pub(crate) config: EmcConfig,
    pub(crate) estimator: Estimator,
    pub(crate) drift: DriftState,
    pub(crate) memory: ModeMemory,
}

impl Emc {
    pub fn new(config: EmcConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            estimator: Estimator::new(config.order, config.alphabet_size, config.beta)?,
            drift: DriftState::new(config.order, config.alphabet_size, config.tau)?,
            memory: ModeMemory::new(),
            config,
        })
    }

    pub fn config(&self) -> &EmcConfig {
        &self.config
    }

    pub fn estimator(&self) -> &Estimator {
        &self.estimator
    }

    pub fn drift(&self) -> &DriftState {
        &self.drift
    }

    pub fn memory(&self) -> &ModeMemory {
        &self.memory
    }

    pub fn phase(&self) -> Phase {
        self.drift.phase()
    }

    /// Observations processed so far.
    pub fn observations(&self) -> u64 {
        self.estimator.observations()
    }

    pub fn step(&mut self, s: Symbol) -> Result<PredictionRecord> {
        let t = self.estimator.observations();
        let cfg = &self.config;
        let lambda = self.drift.phase().select(cfg.lambda_fast, cfg.lambda_slow);
        let updated = self.estimator.observe(s, lambda)?;

        let mut events = StepEvents::default();
        if updated && self.drift.record_update() {
            let delta = self.drift.phase().select(cfg.delta_fast, cfg.delta_slow);
            let outcome = self.drift.check_drift(self.estimator.tensor(), delta)?;
            events.drift = match outcome {
                DriftOutcome::DriftEntered => Some(DriftEvent::Entered),
                DriftOutcome::DriftEnded => Some(DriftEvent::Ended),
                _ => None,
            };
            if outcome.requires_regime_check() {
                let phase = self.drift.phase();
                let eta = phase.select(cfg.eta_fast, cfg.eta_slow);
                let ev = self
                    .memory
                    .identify_regime(self.estimator.tensor(), phase, eta)?;
                events.mode = ModeEvent::from_regime(ev);
            }
        }

        Ok(PredictionRecord {
            t,
            symbol: s,
            phase: self.drift.phase(),
            distance: self.drift.last_distance(),
            mode: self.memory.prediction(),
            events,
        })
    }

    /// Steps through `stream`, collecting every record.
    pub fn run<I>(&mut self, stream: I) -> Result<Vec<PredictionRecord>>
    where
        I: IntoIterator<Item = Symbol>,
    {
        stream.into_iter().map(|s| self.step(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::EmcError;

    #[test]
    fn defaults() {
        let c = EmcConfig::defaults(1, 4);
        assert_eq!(c.tau, 100);
        assert_eq!((c.lambda_fast, c.lambda_slow), (0.9, 0.99));
        assert_eq!(c.beta, 0.0);
        assert_eq!((c.delta_fast, c.delta_slow), (0.3, 0.1));
        assert_eq!((c.eta_fast, c.eta_slow), (0.5, 0.25));
        c.validate().unwrap();
        for lambda in [c.lambda_fast, c.lambda_slow] {
            assert!((0.9..=0.99).contains(&lambda));
        }
        for delta in [c.delta_fast, c.delta_slow] {
            assert!((0.1..=0.3).contains(&delta));
        }
        for eta in [c.eta_fast, c.eta_slow] {
            assert!((0.25..=0.5).contains(&eta));
        }
        assert_eq!(tau_for(0.9), 10);
    }

    #[test]
    fn validation_lists_every_problem() {
        let mut c = EmcConfig::defaults(1, 1);
        c.lambda_fast = 1.2;
        c.beta = 1.0;
        c.eta_slow = 0.0;
        c.tau = 0;
        match c.validate() {
            Err(EmcError::Config(errs)) => {
                assert_eq!(errs.0.len(), 6, "{errs}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn warm_up_records() {
        let mut emc = Emc::new(EmcConfig::defaults(2, 3)).unwrap();
        for (i, s) in [0, 1].into_iter().enumerate() {
            let r = emc.step(s).unwrap();
            assert_eq!(r.t, i as u64);
            assert_eq!(r.phase, Phase::Steady);
            assert_eq!(r.mode, None);
            assert!(r.events.is_empty());
        }
    }

    #[test]
    fn first_check_after_tau_updates() {
        let mut cfg = EmcConfig::defaults(1, 2);
        cfg.tau = 5;
        let mut emc = Emc::new(cfg).unwrap();
        let recs = emc.run([0, 1, 0, 1, 0, 1, 0, 1]).unwrap();
        // updates begin at t = 1; the fifth update is at t = 5
        assert!(recs[..5]
            .iter()
            .all(|r| r.events.is_empty() && r.mode.is_none()));
        assert!(recs[5].distance > 0.0);
        assert_eq!(recs[4].distance, 0.0);
    }

    #[test]
    fn step_rejects_out_of_range() {
        let mut emc = Emc::new(EmcConfig::defaults(1, 2)).unwrap();
        emc.step(0).unwrap();
        assert!(matches!(
            emc.step(7),
            Err(EmcError::StreamSymbol { position: 1, .. })
        ));
    }

    #[test]
    fn event_labels() {
        let mut e = StepEvents::default();
        assert_eq!(e.to_string(), "none");
        e.drift = Some(DriftEvent::Entered);
        assert_eq!(e.to_string(), "drift_entered");
        e.drift = Some(DriftEvent::Ended);
        e.mode = Some(ModeEvent::Refined(ModeId(0)));
        assert_eq!(e.to_string(), "drift_ended+mode_refined");
    }
}
