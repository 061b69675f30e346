//! Approximate equilibria of generalized Colonel Blotto and generalized
//! lottery Blotto games.
//!
//! Two players with fixed budgets spread resources over `n` battlefields
//! that each may value differently; a battlefield pays out by
//! winner-takes-all or by a contest success function. This crate computes
//! the sampling strategy built from the game's uniform-type marginals —
//! independent draws rescaled to the budget — and provides the machinery to
//! measure how exploitable that strategy is:
//!
//! - [`game`]: instances, validation, pure-strategy payoffs
//! - [`gamma`]: the incentive-balance equation, multipliers, parameter box
//! - [`dist`]: uniform-type marginals, moments, all-zero probability
//! - [`iu`]: the allocation sampler and empirical-marginal diagnostics
//! - [`br`]: analytic and grid best responses, exploitability reports
//! - [`csf`]: contest success functions and dissimilarity bounds
//! - [`oracle`]: slow reference implementations for cross-checking
//! - [`rng`]: splittable deterministic random streams
//!
//! ```
//! use blotto_core::{
//!     ContestSuccessFunction, GameSpec, IUSampler, Player, RandomStream,
//!     estimate_exploitability, solve_gamma,
//! };
//!
//! # fn main() -> blotto_core::Result<()> {
//! let game = GameSpec::constant_sum(1.0, 2.0, vec![1.0; 4], 0.5).validate()?;
//! let sol = solve_gamma(&game)?.remove(0);
//! assert!((sol.gamma - 2.0).abs() < 1e-12); // budget ratio, for constant-sum games
//!
//! let sampler = IUSampler::new(&game, &sol)?;
//! let draw = sampler.sample(Player::A, &mut RandomStream::from_seed(7));
//! assert!(draw.total() <= 1.0 + 1e-9);
//!
//! let rule = ContestSuccessFunction::blotto(0.5);
//! let (report_a, _report_b) = estimate_exploitability(&game, &sol, &rule, 2_000, 21, 7)?;
//! assert!(report_a.epsilon_hat < 0.2);
//! # Ok(())
//! # }
//! ```

pub mod br;
pub mod csf;
pub mod dist;
pub mod error;
pub mod game;
pub mod gamma;
pub mod iu;
pub mod oracle;
pub mod rng;

pub use br::{
    BestResponseResult, ExploitabilityReport, OpponentLaw, analytic_best_response,
    analytic_br_value, best_response_against_samples, best_response_over_table,
    discretized_best_response, estimate_exploitability, win_gain_table,
};
pub use csf::{
    ContestSuccessFunction, DeltaBound, DeltaMethod, DissimilaritySet, closed_form_delta,
    delta_bound, dissimilarity_set,
};
pub use dist::{MarginalSet, Role, UniformTypeDistribution, prob_all_zero, uniform_type_marginals};
pub use error::{Error, Result};
pub use game::{Allocation, GameSpec, Player, ValidatedGame, ValueBounds, validate_game};
pub use gamma::{
    GammaSolution, ParameterBounds, lagrange_multipliers, parameter_bounds, solve_gamma,
};
pub use iu::{EmpiricalMarginals, IUSampler, marginal_gap};
pub use rng::{RandomStream, derive_seed};
