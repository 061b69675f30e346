//! Deterministic game generators used by sweeps and tests.

use blotto_core::{GameSpec, RandomStream};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn default_alpha() -> f64 {
    0.5
}

fn default_w_low() -> f64 {
    1.0
}

fn default_w_high() -> f64 {
    2.0
}

/// Parameterized game families. Every family is a pure function of its
/// parameters and the seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameFamily {
    /// Every battlefield worth 1 to both players.
    UniformValues {
        n: usize,
        budget_a: f64,
        budget_b: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// Alternating low/high values, shared by both players.
    TwoTier {
        n: usize,
        budget_a: f64,
        budget_b: f64,
        low: f64,
        high: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// Both players' values drawn independently and uniformly from
    /// `[w_low, w_high]`.
    RandomBounded {
        n: usize,
        budget_a: f64,
        budget_b: f64,
        #[serde(default = "default_w_low")]
        w_low: f64,
        #[serde(default = "default_w_high")]
        w_high: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    /// One random value vector shared by both players.
    ConstantSumRandom {
        n: usize,
        budget_a: f64,
        budget_b: f64,
        #[serde(default = "default_w_low")]
        w_low: f64,
        #[serde(default = "default_w_high")]
        w_high: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

impl GameFamily {
    pub fn n(&self) -> usize {
        match self {
            GameFamily::UniformValues { n, .. }
            | GameFamily::TwoTier { n, .. }
            | GameFamily::RandomBounded { n, .. }
            | GameFamily::ConstantSumRandom { n, .. } => *n,
        }
    }

    /// Same family with the battlefield count replaced (n-axis sweeps).
    pub fn with_n(&self, n: usize) -> GameFamily {
        let mut family = self.clone();
        match &mut family {
            GameFamily::UniformValues { n: slot, .. }
            | GameFamily::TwoTier { n: slot, .. }
            | GameFamily::RandomBounded { n: slot, .. }
            | GameFamily::ConstantSumRandom { n: slot, .. } => *slot = n,
        }
        family
    }

    /// Same family with `budget_b = ratio * budget_a` (budget-ratio sweeps).
    pub fn with_budget_ratio(&self, ratio: f64) -> GameFamily {
        let mut family = self.clone();
        match &mut family {
            GameFamily::UniformValues {
                budget_a, budget_b, ..
            }
            | GameFamily::TwoTier {
                budget_a, budget_b, ..
            }
            | GameFamily::RandomBounded {
                budget_a, budget_b, ..
            }
            | GameFamily::ConstantSumRandom {
                budget_a, budget_b, ..
            } => *budget_b = *budget_a * ratio,
        }
        family
    }
}

fn uniform_in(rng: &mut RandomStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

/// Builds the game spec for `(family, seed)`. Random families use a stream
/// derived from the seed alone, so regeneration is exact.
pub fn generate_game(family: &GameFamily, seed: u64) -> CliResult<GameSpec> {
    let spec = match family {
        GameFamily::UniformValues {
            n,
            budget_a,
            budget_b,
            alpha,
        } => GameSpec {
            n: *n,
            budget_a: *budget_a,
            budget_b: *budget_b,
            values_a: vec![1.0; *n],
            values_b: vec![1.0; *n],
            alpha: *alpha,
        },
        GameFamily::TwoTier {
            n,
            budget_a,
            budget_b,
            low,
            high,
            alpha,
        } => {
            if !(0.0 < *low && low <= high) {
                return Err(CliError::Config(format!(
                    "two_tier requires 0 < low <= high, got {low}, {high}"
                )));
            }
            let values: Vec<f64> = (0..*n)
                .map(|i| if i % 2 == 0 { *low } else { *high })
                .collect();
            GameSpec {
                n: *n,
                budget_a: *budget_a,
                budget_b: *budget_b,
                values_a: values.clone(),
                values_b: values,
                alpha: *alpha,
            }
        }
        GameFamily::RandomBounded {
            n,
            budget_a,
            budget_b,
            w_low,
            w_high,
            alpha,
        } => {
            check_bounds(*w_low, *w_high)?;
            let mut rng = RandomStream::from_seed(seed);
            let values_a = (0..*n)
                .map(|_| uniform_in(&mut rng, *w_low, *w_high))
                .collect();
            let values_b = (0..*n)
                .map(|_| uniform_in(&mut rng, *w_low, *w_high))
                .collect();
            GameSpec {
                n: *n,
                budget_a: *budget_a,
                budget_b: *budget_b,
                values_a,
                values_b,
                alpha: *alpha,
            }
        }
        GameFamily::ConstantSumRandom {
            n,
            budget_a,
            budget_b,
            w_low,
            w_high,
            alpha,
        } => {
            check_bounds(*w_low, *w_high)?;
            let mut rng = RandomStream::from_seed(seed);
            let values: Vec<f64> = (0..*n)
                .map(|_| uniform_in(&mut rng, *w_low, *w_high))
                .collect();
            GameSpec {
                n: *n,
                budget_a: *budget_a,
                budget_b: *budget_b,
                values_a: values.clone(),
                values_b: values,
                alpha: *alpha,
            }
        }
    };
    Ok(spec)
}

fn check_bounds(w_low: f64, w_high: f64) -> CliResult<()> {
    if !(0.0 < w_low && w_low <= w_high && w_high.is_finite()) {
        return Err(CliError::Config(format!(
            "value bounds must satisfy 0 < w_low <= w_high, got {w_low}, {w_high}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_values_are_all_ones() {
        let f = GameFamily::UniformValues {
            n: 10,
            budget_a: 1.0,
            budget_b: 2.0,
            alpha: 0.5,
        };
        let g = generate_game(&f, 0).unwrap();
        assert!(g.values_a.iter().all(|&w| w == 1.0));
        assert!(g.values_b.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn random_bounded_is_deterministic_in_seed() {
        let f = GameFamily::RandomBounded {
            n: 6,
            budget_a: 1.0,
            budget_b: 2.0,
            w_low: 1.0,
            w_high: 3.0,
            alpha: 0.5,
        };
        let g1 = generate_game(&f, 7).unwrap();
        let g2 = generate_game(&f, 7).unwrap();
        assert_eq!(g1.values_a, g2.values_a);
        assert_eq!(g1.values_b, g2.values_b);
        let g3 = generate_game(&f, 8).unwrap();
        assert_ne!(g1.values_a, g3.values_a);
        assert!(g1.values_a.iter().all(|&w| (1.0..=3.0).contains(&w)));
    }

    #[test]
    fn constant_sum_random_shares_values() {
        let f = GameFamily::ConstantSumRandom {
            n: 20,
            budget_a: 1.0,
            budget_b: 1.5,
            w_low: 1.0,
            w_high: 2.0,
            alpha: 0.5,
        };
        let g = generate_game(&f, 1).unwrap();
        assert_eq!(g.values_a, g.values_b);
        // budget-ratio root is exact for constant-sum games
        let validated = g.validate().unwrap();
        let sols = blotto_core::solve_gamma(&validated).unwrap();
        assert_eq!(sols.len(), 1);
        assert!((sols[0].gamma - 1.5).abs() < 1e-12);
    }

    #[test]
    fn two_tier_alternates_and_validates_bounds() {
        let f = GameFamily::TwoTier {
            n: 5,
            budget_a: 1.0,
            budget_b: 1.0,
            low: 1.0,
            high: 3.0,
            alpha: 0.5,
        };
        let g = generate_game(&f, 0).unwrap();
        assert_eq!(g.values_a, vec![1.0, 3.0, 1.0, 3.0, 1.0]);
        assert_eq!(g.values_a, g.values_b);
        let bad = GameFamily::TwoTier {
            n: 4,
            budget_a: 1.0,
            budget_b: 1.0,
            low: 3.0,
            high: 1.0,
            alpha: 0.5,
        };
        assert!(generate_game(&bad, 0).is_err());
    }

    #[test]
    fn rejects_bad_bounds() {
        let f = GameFamily::RandomBounded {
            n: 3,
            budget_a: 1.0,
            budget_b: 1.0,
            w_low: 3.0,
            w_high: 1.0,
            alpha: 0.5,
        };
        assert!(generate_game(&f, 0).is_err());
    }
}
