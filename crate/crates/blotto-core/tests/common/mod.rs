#![allow(dead_code)]

//! Shared helpers for integration tests: deterministic random game
//! construction within declared value/budget ratio envelopes.

use blotto_core::{GameSpec, RandomStream, ValidatedGame};

pub fn uniform_in(rng: &mut RandomStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

/// Heterogeneous game: both value vectors drawn independently from
/// `[1, w_ratio]`, budgets `1` and `uniform[1, budget_ratio]`.
pub fn random_game(
    rng: &mut RandomStream,
    n_lo: usize,
    n_hi: usize,
    w_ratio: f64,
    budget_ratio: f64,
) -> ValidatedGame {
    let n = n_lo + (rng.next_u64() as usize) % (n_hi - n_lo + 1);
    let values_a = (0..n).map(|_| uniform_in(rng, 1.0, w_ratio)).collect();
    let values_b = (0..n).map(|_| uniform_in(rng, 1.0, w_ratio)).collect();
    GameSpec {
        n,
        budget_a: 1.0,
        budget_b: uniform_in(rng, 1.0, budget_ratio),
        values_a,
        values_b,
        alpha: rng.next_f64(),
    }
    .validate()
    .expect("generated game is valid")
}

/// Constant-sum game with a shared random value vector.
pub fn random_constant_sum(
    rng: &mut RandomStream,
    n_lo: usize,
    n_hi: usize,
    w_ratio: f64,
    budget_ratio: f64,
) -> ValidatedGame {
    let n = n_lo + (rng.next_u64() as usize) % (n_hi - n_lo + 1);
    let values: Vec<f64> = (0..n).map(|_| uniform_in(rng, 1.0, w_ratio)).collect();
    GameSpec::constant_sum(1.0, uniform_in(rng, 1.0, budget_ratio), values, 0.5)
        .validate()
        .expect("generated game is valid")
}
