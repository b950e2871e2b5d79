use std::fmt;

use thiserror::Error;

/// Errors raised by the estimation, detection and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmcError {
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),

    #[error("a tensor of order {order} over {alphabet} symbols exceeds addressable capacity")]
    Capacity { order: usize, alphabet: usize },

    #[error("symbol {symbol} is outside the alphabet [0, {alphabet})")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error(
        "symbol {symbol} at stream position {position} is outside the alphabet [0, {alphabet})"
    )]
    StreamSymbol {
        position: u64,
        symbol: usize,
        alphabet: usize,
    },

    #[error("condition has length {got}, expected {expected}")]
    ConditionLength { expected: usize, got: usize },

    #[error("parameter {name} = {value} is outside {expected}")]
    Parameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error(
        "shape mismatch: ({left_order}, {left_alphabet}) vs ({right_order}, {right_alphabet})"
    )]
    ShapeMismatch {
        left_order: usize,
        left_alphabet: usize,
        right_order: usize,
        right_alphabet: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid probability row at condition {condition}: {reason}")]
    InvalidRow { condition: usize, reason: String },

    #[error("mode memory is empty")]
    EmptyMemory,

    #[error("invalid configuration: {0}")]
    Config(ConfigErrors),
}

pub type Result<T, E = EmcError> = std::result::Result<T, E>;

/// Every violation found while validating a configuration, not just the first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl ConfigErrors {
    pub fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(EmcError::Config(self))
        }
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("; "))
    }
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(EmcError::Parameter {
            name,
            value,
            expected: "(0, 1)",
        })
    }
}

pub(crate) fn check_half_open_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(EmcError::Parameter {
            name,
            value,
            expected: "[0, 1)",
        })
    }
}

pub(crate) fn check_threshold(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(EmcError::Parameter {
            name,
            value,
            expected: "(0, 1]",
        })
    }
}
