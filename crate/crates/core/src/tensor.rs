//! Dense kth-order transition-probability tensors.
//!
//! A tensor of order `k` over an alphabet of `m` symbols holds `m^k`
//! conditional distributions (CPDs), one per length-`k` condition, each with
//! `m` outcome probabilities. Rows are stored contiguously in lexicographic
//! condition order, so the row for condition `(c_1, .., c_k)` starts at
//! `m * (c_1 m^(k-1) + .. + c_k)`.
//!
//! The multiplicative update keeps every row on the simplex in exact
//! arithmetic. Floating drift is corrected only when a row's sum leaves
//! `1 ± ROW_SUM_TOLERANCE`; such corrections are counted and exposed through
//! [`StochasticTensor::renormalizations`].

use crate::error::{check_half_open_unit, check_open_unit, EmcError, Result};

/// An input symbol, an index into the alphabet `[0, m)`.
pub type Symbol = usize;

/// Maximum deviation of a row sum from 1 before a maintenance renormalization.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Estimate of all kth-order conditional probabilities `p(s | c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticTensor {
    order: usize,
    alphabet: usize,
    conditions: usize,
    values: Vec<f64>,
    renormalizations: u64,
}

impl StochasticTensor {
    /// Uniform tensor: every entry is `1/m`.
    pub fn new_uniform(order: usize, alphabet: usize) -> Result<Self> {
        let (conditions, len) = shape(order, alphabet)?;
        Ok(Self {
            order,
            alphabet,
            conditions,
            values: vec![1.0 / alphabet as f64; len],
            renormalizations: 0,
        })
    }

    /// Builds a tensor from condition-major values, checking that every row is
    /// a distribution.
    pub fn from_values(order: usize, alphabet: usize, values: Vec<f64>) -> Result<Self> {
        let (conditions, len) = shape(order, alphabet)?;
        if values.len() != len {
            return Err(EmcError::LengthMismatch {
                left: values.len(),
                right: len,
            });
        }
        for (condition, row) in values.chunks_exact(alphabet).enumerate() {
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(EmcError::InvalidRow {
                    condition,
                    reason: format!("entry {p} outside [0, 1]"),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(EmcError::InvalidRow {
                    condition,
                    reason: format!("row sums to {sum}"),
                });
            }
        }
        Ok(Self {
            order,
            alphabet,
            conditions,
            values,
            renormalizations: 0,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// Number of conditions, `m^k`.
    pub fn n_conditions(&self) -> usize {
        self.conditions
    }

    /// All `m^(k+1)` entries in condition-major order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Count of maintenance renormalizations applied so far.
    pub fn renormalizations(&self) -> u64 {
        self.renormalizations
    }

    pub(crate) fn set_renormalizations(&mut self, n: u64) {
        self.renormalizations = n;
    }

    /// The CPD of the condition with flat index `condition`.
    pub fn row(&self, condition: usize) -> &[f64] {
        let start = condition * self.alphabet;
        &self.values[start..start + self.alphabet]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.alphabet)
    }

    /// `p(outcome | condition)`.
    pub fn get(&self, condition: &[Symbol], outcome: Symbol) -> Result<f64> {
        let idx = self.condition_index(condition)?;
        self.check_symbol(outcome)?;
        Ok(self.values[idx * self.alphabet + outcome])
    }

    /// Flat index of a length-k condition.
    pub fn condition_index(&self, condition: &[Symbol]) -> Result<usize> {
        if condition.len() != self.order {
            return Err(EmcError::ConditionLength {
                expected: self.order,
                got: condition.len(),
            });
        }
        condition.iter().try_fold(0usize, |acc, &s| {
            self.check_symbol(s)?;
            Ok(acc * self.alphabet + s)
        })
    }

    fn check_symbol(&self, s: Symbol) -> Result<()> {
        if s < self.alphabet {
            Ok(())
        } else {
            Err(EmcError::SymbolOutOfRange {
                symbol: s,
                alphabet: self.alphabet,
            })
        }
    }

    pub(crate) fn same_shape(&self, other: &Self) -> Result<()> {
        if self.order == other.order && self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(EmcError::ShapeMismatch {
                left_order: self.order,
                left_alphabet: self.alphabet,
                right_order: other.order,
                right_alphabet: other.alphabet,
            })
        }
    }

    /// Multiplicative update of the row for `condition` after observing `s`:
    /// every entry is scaled by `lambda`, then `1 - lambda` is added to `s`.
    /// Rows of other conditions are untouched.
    pub fn update_row(&mut self, condition: &[Symbol], s: Symbol, lambda: f64) -> Result<()> {
        check_open_unit("lambda", lambda)?;
        let idx = self.condition_index(condition)?;
        self.check_symbol(s)?;
        self.update_row_at(idx, s, lambda);
        Ok(())
    }

    /// Unchecked form of [`update_row`](Self::update_row) on a flat index.
    pub(crate) fn update_row_at(&mut self, condition: usize, s: Symbol, lambda: f64) {
        let start = condition * self.alphabet;
        let row = &mut self.values[start..start + self.alphabet];
        for p in row.iter_mut() {
            *p *= lambda;
        }
        row[s] += 1.0 - lambda;
        if maintain_row(row) {
            self.renormalizations += 1;
        }
    }

    /// Blends every row except `exempt` toward uniform:
    /// `row <- (1 - beta) row + beta / m`. A no-op for `beta == 0`.
    pub fn regulate(&mut self, exempt: &[Symbol], beta: f64) -> Result<()> {
        check_half_open_unit("beta", beta)?;
        let idx = self.condition_index(exempt)?;
        self.regulate_at(idx, beta);
        Ok(())
    }

    pub(crate) fn regulate_at(&mut self, exempt: usize, beta: f64) {
        if beta == 0.0 {
            return;
        }
        let keep = 1.0 - beta;
        let lift = beta / self.alphabet as f64;
        let mut fixed = 0;
        for (c, row) in self.values.chunks_exact_mut(self.alphabet).enumerate() {
            if c == exempt {
                continue;
            }
            for p in row.iter_mut() {
                *p = keep * *p + lift;
            }
            if maintain_row(row) {
                fixed += 1;
            }
        }
        self.renormalizations += fixed;
    }

    /// Moves every entry toward `target` by `weight`:
    /// `self <- self + weight (target - self)`.
    pub(crate) fn blend_toward(&mut self, target: &Self, weight: f64) {
        for (p, &q) in self.values.iter_mut().zip(&target.values) {
            *p += (q - *p) * weight;
        }
        let mut fixed = 0;
        for row in self.values.chunks_exact_mut(self.alphabet) {
            if maintain_row(row) {
                fixed += 1;
            }
        }
        self.renormalizations += fixed;
    }

    /// Overwrites the values with those of `other` (same shape), reusing the
    /// allocation.
    pub(crate) fn copy_values_from(&mut self, other: &Self) {
        self.values.copy_from_slice(&other.values);
    }
}

fn shape(order: usize, alphabet: usize) -> Result<(usize, usize)> {
    if alphabet < 2 {
        return Err(EmcError::AlphabetTooSmall(alphabet));
    }
    let capacity = EmcError::Capacity { order, alphabet };
    let exp = u32::try_from(order).map_err(|_| capacity.clone())?;
    let conditions = alphabet.checked_pow(exp).ok_or(capacity.clone())?;
    let len = conditions.checked_mul(alphabet).ok_or(capacity.clone())?;
    // Vec<f64> cannot hold more than isize::MAX bytes.
    if len > isize::MAX as usize / std::mem::size_of::<f64>() {
        return Err(capacity);
    }
    Ok((conditions, len))
}

/// Renormalizes `row` if its sum drifted beyond tolerance. Returns whether it did.
fn maintain_row(row: &mut [f64]) -> bool {
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        for p in row.iter_mut() {
            *p /= sum;
        }
        true
    } else {
        false
    }
}

/// Hellinger distance between two distributions,
/// `sqrt(sum (sqrt p_i - sqrt q_i)^2) / sqrt 2`, in `[0, 1]`.
pub fn hellinger_row(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(EmcError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(hellinger_unchecked(p, q))
}

fn hellinger_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let sq: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    // Rounding can push the sum of two unit-mass rows a hair above 2.
    (sq / 2.0).sqrt().min(1.0)
}

/// Mean Hellinger distance over corresponding rows of two tensors.
pub fn tensor_distance(a: &StochasticTensor, b: &StochasticTensor) -> Result<f64> {
    a.same_shape(b)?;
    let total: f64 = a
        .rows()
        .zip(b.rows())
        .map(|(p, q)| hellinger_unchecked(p, q))
        .sum();
    Ok(total / a.conditions as f64)
}
