//! Regime-switching streams sampled from random kth-order Markov modes.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), a counter-based
//! generator. One seed drives everything: stream 0 of the generator draws the
//! mode tensors and stream 1 draws the regime sequence and symbols, so the
//! two can be regenerated independently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{ConfigErrors, Result};
use crate::estimator::ObservationWindow;
use crate::tensor::{StochasticTensor, Symbol};

const MODE_STREAM: u64 = 0;
const SEQUENCE_STREAM: u64 = 1;

/// Generator parameters. Regime lengths are uniform integers in
/// `[duration_low, duration_high]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub n_modes: usize,
    pub order: usize,
    pub alphabet_size: usize,
    pub duration_low: usize,
    pub duration_high: usize,
    pub n_regimes: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Five first-order modes over four symbols, ten regimes.
    pub fn five_modes(duration_low: usize, duration_high: usize, seed: u64) -> Self {
        Self {
            n_modes: 5,
            order: 1,
            alphabet_size: 4,
            duration_low,
            duration_high,
            n_regimes: 10,
            seed,
        }
    }

    pub fn short(seed: u64) -> Self {
        Self::five_modes(500, 1000, seed)
    }

    pub fn medium(seed: u64) -> Self {
        Self::five_modes(1500, 2000, seed)
    }

    pub fn long(seed: u64) -> Self {
        Self::five_modes(2500, 3000, seed)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = ConfigErrors::default();
        if self.n_modes < 2 {
            errs.push(format!("n_modes = {} must be at least 2", self.n_modes));
        }
        if self.n_regimes < 2 {
            errs.push(format!("n_regimes = {} must be at least 2", self.n_regimes));
        }
        if self.duration_low < 1 {
            errs.push("duration_low must be at least 1");
        }
        if self.duration_high < self.duration_low {
            errs.push(format!(
                "duration_high = {} is below duration_low = {}",
                self.duration_high, self.duration_low
            ));
        }
        if let Err(e) = StochasticTensor::new_uniform(self.order, self.alphabet_size) {
            errs.push(e.to_string());
        }
        errs.into_result()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// A generated stream with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStream {
    pub symbols: Vec<Symbol>,
    /// True mode index of every symbol.
    pub labels: Vec<usize>,
    /// Start index of every regime after the first.
    pub change_points: Vec<usize>,
    pub true_tensors: Vec<StochasticTensor>,
}

impl LabeledStream {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The generating tensor active at step `t`.
    pub fn truth_at(&self, t: usize) -> &StochasticTensor {
        &self.true_tensors[self.labels[t]]
    }
}

/// Draws every CPD of every mode from a flat Dirichlet distribution.
pub fn generate_modes(spec: &SyntheticSpec) -> Result<Vec<StochasticTensor>> {
    spec.validate()?;
    let mut rng = spec.rng(MODE_STREAM);
    let m = spec.alphabet_size;
    let conditions = StochasticTensor::new_uniform(spec.order, m)?.n_conditions();
    (0..spec.n_modes)
        .map(|_| {
            let mut values = Vec::with_capacity(conditions * m);
            for _ in 0..conditions {
                values.extend(flat_dirichlet(&mut rng, m));
            }
            StochasticTensor::from_values(spec.order, m, values)
        })
        .collect()
}

/// Normalized unit exponentials are Dirichlet(1, .., 1).
fn flat_dirichlet<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut draws: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    for d in &mut draws {
        *d /= total;
    }
    draws
}

/// Samples the regime sequence and the symbols.
pub fn generate_stream(spec: &SyntheticSpec, modes: &[StochasticTensor]) -> Result<LabeledStream> {
    spec.validate()?;
    let mut rng = spec.rng(SEQUENCE_STREAM);
    let m = spec.alphabet_size;

    let mut regime_modes = Vec::with_capacity(spec.n_regimes);
    let mut lengths = Vec::with_capacity(spec.n_regimes);
    for r in 0..spec.n_regimes {
        let mode = match r {
            0 => rng.random_range(0..modes.len()),
            _ => {
                // uniform over the modes other than the previous one
                let prev = regime_modes[r - 1];
                let pick = rng.random_range(0..modes.len() - 1);
                if pick >= prev {
                    pick + 1
                } else {
                    pick
                }
            }
        };
        regime_modes.push(mode);
        lengths.push(rng.random_range(spec.duration_low..=spec.duration_high));
    }

    let total: usize = lengths.iter().sum();
    let mut symbols = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    let mut change_points = Vec::with_capacity(spec.n_regimes - 1);
    let mut window = ObservationWindow::new(spec.order);
    for (r, (&mode, &len)) in regime_modes.iter().zip(&lengths).enumerate() {
        if r > 0 {
            change_points.push(symbols.len());
        }
        let tensor = &modes[mode];
        for _ in 0..len {
            let s = if window.is_full() {
                let condition = window.symbols().fold(0, |acc, c| acc * m + c);
                sample_row(&mut rng, tensor.row(condition))
            } else {
                rng.random_range(0..m)
            };
            window.push(s);
            symbols.push(s);
            labels.push(mode);
        }
    }

    Ok(LabeledStream {
        symbols,
        labels,
        change_points,
        true_tensors: modes.to_vec(),
    })
}

/// Modes and stream for `spec` in one call.
pub fn synthesize(spec: &SyntheticSpec) -> Result<LabeledStream> {
    let modes = generate_modes(spec)?;
    generate_stream(spec, &modes)
}

fn sample_row<R: Rng>(rng: &mut R, row: &[f64]) -> Symbol {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (s, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return s;
        }
    }
    // u landed in the rounding gap above the final partial sum
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}
