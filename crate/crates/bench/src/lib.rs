//! Fixtures shared by the benchmarks.

use emc_core::{synthesize, Symbol, SyntheticSpec};

/// About `len` symbols from a two-mode order-`k` source over `m` symbols.
pub fn stream(order: usize, alphabet_size: usize, len: usize) -> Vec<Symbol> {
    let half = (len / 2).max(1);
    let spec = SyntheticSpec {
        n_modes: 2,
        order,
        alphabet_size,
        duration_low: half,
        duration_high: half,
        n_regimes: 2,
        seed: 42,
    };
    synthesize(&spec).expect("valid fixture spec").symbols
}
