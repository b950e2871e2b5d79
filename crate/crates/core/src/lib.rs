//! Evolving Markov chains over categorical streams.
//!
//! The pipeline keeps an always-current estimate of kth-order transition
//! probabilities ([`Estimator`]), flags drift by comparing it with an older
//! copy every `tau` updates ([`DriftState`]), and assigns each observation to
//! a recurring behavioral mode held in [`ModeMemory`]. [`Emc`] ties the three
//! together with fast/slow learning.
//!
//! ```
//! use emc_core::{Emc, EmcConfig};
//!
//! let mut emc = Emc::new(EmcConfig::defaults(1, 3)).unwrap();
//! for s in [0, 1, 2, 1, 0, 2] {
//!     let record = emc.step(s).unwrap();
//!     assert!(record.distance >= 0.0);
//! }
//! ```

pub mod drift;
pub mod emc;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod memory;
pub mod snapshot;
pub mod synth;
pub mod tensor;

pub use drift::{DriftOutcome, DriftState, Phase};
pub use emc::{tau_for, DriftEvent, Emc, EmcConfig, ModeEvent, PredictionRecord, StepEvents};
pub use error::{ConfigErrors, EmcError, Result};
pub use estimator::{Estimator, ObservationWindow};
pub use memory::{Mode, ModeId, ModeMemory, RegimeEvent};
pub use synth::{generate_modes, generate_stream, synthesize, LabeledStream, SyntheticSpec};
pub use tensor::{hellinger_row, tensor_distance, StochasticTensor, Symbol};
