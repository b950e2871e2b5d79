use std::collections::VecDeque;

use crate::error::{EmcError, Result};
use crate::tensor::{StochasticTensor, Symbol};

/// Markov chain built from exact transition counts over the last `w` symbols.
///
/// Only transitions lying entirely inside the window are counted. A condition
/// with no in-window transitions gets a uniform row.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingWindowChain {
    window: usize,
    order: usize,
    alphabet: usize,
    symbols: VecDeque<Symbol>,
    counts: Vec<u64>,
    totals: Vec<u64>,
}

impl SlidingWindowChain {
    /// `window` must hold at least one full transition (`k + 1` symbols).
    pub fn new(window: usize, order: usize, alphabet: usize) -> Result<Self> {
        let shape = StochasticTensor::new_uniform(order, alphabet)?;
        if window < order + 1 {
            return Err(EmcError::Parameter {
                name: "window",
                value: window as f64,
                expected: "[k + 1, inf)",
            });
        }
        Ok(Self {
            window,
            order,
            alphabet,
            symbols: VecDeque::with_capacity(window + 1),
            counts: vec![0; shape.values().len()],
            totals: vec![0; shape.n_conditions()],
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Flat index of the (k+1)-gram starting at `start` in the window.
    fn gram_index(&self, start: usize) -> (usize, usize) {
        let condition = self
            .symbols
            .range(start..start + self.order)
            .fold(0, |acc, &s| acc * self.alphabet + s);
        let outcome = self.symbols[start + self.order];
        (condition, condition * self.alphabet + outcome)
    }

    pub fn observe(&mut self, s: Symbol) -> Result<()> {
        if s >= self.alphabet {
            return Err(EmcError::SymbolOutOfRange {
                symbol: s,
                alphabet: self.alphabet,
            });
        }
        self.symbols.push_back(s);
        if self.symbols.len() > self.order {
            let (c, i) = self.gram_index(self.symbols.len() - self.order - 1);
            self.counts[i] += 1;
            self.totals[c] += 1;
        }
        if self.symbols.len() > self.window {
            let (c, i) = self.gram_index(0);
            self.counts[i] -= 1;
            self.totals[c] -= 1;
            self.symbols.pop_front();
        }
        Ok(())
    }

    /// `p(outcome | condition)` for a flat condition index.
    pub fn probability(&self, condition: usize, outcome: Symbol) -> f64 {
        match self.totals[condition] {
            0 => 1.0 / self.alphabet as f64,
            total => self.counts[condition * self.alphabet + outcome] as f64 / total as f64,
        }
    }

    pub fn tensor(&self) -> StochasticTensor {
        let conditions = self.totals.len();
        let values = (0..conditions)
            .flat_map(|c| (0..self.alphabet).map(move |o| (c, o)))
            .map(|(c, o)| self.probability(c, o))
            .collect();
        StochasticTensor::from_values(self.order, self.alphabet, values)
            .expect("count-normalized rows are distributions")
    }

    /// Mean absolute error against `truth`, without materializing a tensor.
    pub fn abs_error(&self, truth: &StochasticTensor) -> Result<f64> {
        if truth.order() != self.order || truth.alphabet_size() != self.alphabet {
            return Err(EmcError::ShapeMismatch {
                left_order: self.order,
                left_alphabet: self.alphabet,
                right_order: truth.order(),
                right_alphabet: truth.alphabet_size(),
            });
        }
        let mut total = 0.0;
        for c in 0..self.totals.len() {
            for (o, &p) in truth.row(c).iter().enumerate() {
                total += (self.probability(c, o) - p).abs();
            }
        }
        Ok(total / truth.values().len() as f64)
    }
}
