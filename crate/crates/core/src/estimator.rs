//! Online estimation of transition probabilities from a symbol stream.

use std::collections::VecDeque;

use crate::error::{check_half_open_unit, check_open_unit, EmcError, Result};
use crate::tensor::{StochasticTensor, Symbol};

/// The last `k` observed symbols, i.e. the condition of the next update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationWindow {
    capacity: usize,
    symbols: VecDeque<Symbol>,
}

impl ObservationWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            symbols: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.symbols.len() == self.capacity
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.symbols.iter().copied()
    }

    /// Appends `s`, evicting the oldest symbol once `capacity` is exceeded.
    pub fn push(&mut self, s: Symbol) {
        if self.capacity == 0 {
            return;
        }
        if self.symbols.len() == self.capacity {
            self.symbols.pop_front();
        }
        self.symbols.push_back(s);
    }

    /// Flat condition index for a tensor over `alphabet` symbols.
    fn condition_index(&self, alphabet: usize) -> usize {
        self.symbols.iter().fold(0, |acc, &s| acc * alphabet + s)
    }
}

/// Maintains a [`StochasticTensor`] estimate updated one observation at a time.
///
/// The learning coefficient is supplied per observation so a caller can switch
/// between fast and slow learning without rebuilding the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimator {
    tensor: StochasticTensor,
    window: ObservationWindow,
    beta: f64,
    observations: u64,
}

impl Estimator {
    pub fn new(order: usize, alphabet: usize, beta: f64) -> Result<Self> {
        check_half_open_unit("beta", beta)?;
        Ok(Self {
            tensor: StochasticTensor::new_uniform(order, alphabet)?,
            window: ObservationWindow::new(order),
            beta,
            observations: 0,
        })
    }

    pub(crate) fn from_parts(
        tensor: StochasticTensor,
        window: ObservationWindow,
        beta: f64,
        observations: u64,
    ) -> Self {
        Self {
            tensor,
            window,
            beta,
            observations,
        }
    }

    /// Consumes one symbol. Returns `true` when the tensor was updated, which
    /// happens once the window holds `k` symbols.
    pub fn observe(&mut self, s: Symbol, lambda: f64) -> Result<bool> {
        let alphabet = self.tensor.alphabet_size();
        if s >= alphabet {
            return Err(EmcError::StreamSymbol {
                position: self.observations,
                symbol: s,
                alphabet,
            });
        }
        check_open_unit("lambda", lambda)?;

        let updated = self.window.is_full();
        if updated {
            let condition = self.window.condition_index(alphabet);
            self.tensor.update_row_at(condition, s, lambda);
            if self.beta > 0.0 {
                self.tensor.regulate_at(condition, self.beta);
            }
        }
        self.window.push(s);
        self.observations += 1;
        Ok(updated)
    }

    /// Current estimate.
    pub fn tensor(&self) -> &StochasticTensor {
        &self.tensor
    }

    /// Deep copy of the current estimate.
    pub fn snapshot(&self) -> StochasticTensor {
        self.tensor.clone()
    }

    pub fn window(&self) -> &ObservationWindow {
        &self.window
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Total symbols consumed.
    pub fn observations(&self) -> u64 {
        self.observations
    }
}
