//! Best responses and exploitability estimation.
//!
//! Against the analytic uniform-type marginals the responder's optimal value
//! has a closed form. Against arbitrary (typically empirical) marginals the
//! best response is computed by dynamic programming on a budget grid: the
//! responder's expected payoff separates across battlefields given the
//! opponent's marginals, so a knapsack over (battlefield, remaining grid
//! units) is exact on the grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::csf::ContestSuccessFunction;
use crate::error::{Error, Result};
use crate::game::{Allocation, Player, ValidatedGame};
use crate::gamma::{GammaSolution, RESIDUAL_TOLERANCE, equation_residual};
use crate::iu::{EmpiricalMarginals, IUSampler};
use crate::rng::RandomStream;

/// Opponent allocation law on one battlefield, as seen by the responder.
pub trait OpponentLaw {
    /// Probability of an opponent draw strictly below `x`.
    fn prob_below(&self, x: f64) -> f64;
    /// Probability of an opponent draw exactly at `x`.
    fn prob_eq(&self, x: f64) -> f64;
}

impl OpponentLaw for crate::dist::UniformTypeDistribution {
    fn prob_below(&self, x: f64) -> f64 {
        crate::dist::UniformTypeDistribution::prob_below(self, x)
    }

    fn prob_eq(&self, x: f64) -> f64 {
        if x == 0.0 { self.mass_at_zero() } else { 0.0 }
    }
}

/// One battlefield of an empirical marginal set.
pub struct EmpiricalLaw<'a> {
    marginals: &'a EmpiricalMarginals,
    battlefield: usize,
}

impl EmpiricalMarginals {
    pub fn law(&self, battlefield: usize) -> EmpiricalLaw<'_> {
        EmpiricalLaw {
            marginals: self,
            battlefield,
        }
    }
}

impl OpponentLaw for EmpiricalLaw<'_> {
    fn prob_below(&self, x: f64) -> f64 {
        self.marginals.prob_below(self.battlefield, x)
    }

    fn prob_eq(&self, x: f64) -> f64 {
        self.marginals.prob_eq(self.battlefield, x)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BestResponseResult {
    pub allocation: Allocation,
    /// Expected payoff of the responder at the returned allocation.
    pub value: f64,
    /// Grid resolution; zero for analytic results.
    pub grid_step: f64,
}

/// Monte Carlo exploitability of the sampled profile for one player.
#[derive(Debug, Clone, Serialize)]
pub struct ExploitabilityReport {
    pub player: Player,
    /// Estimated payoff when both players sample the profile.
    pub iu_value: f64,
    /// Best-response value against the opponent's empirical marginals.
    pub br_value: f64,
    /// `(br_value - iu_value) / W_P`.
    pub epsilon_hat: f64,
    /// 95% confidence halfwidth of `iu_value`, in payoff units.
    pub ci_halfwidth: f64,
    pub m_samples: usize,
    pub grid_points: usize,
    pub seed: u64,
}

/// Closed-form optimal expected payoff of `player` when the opponent draws
/// each battlefield independently from its uniform-type marginal. The
/// returned allocation (the per-battlefield marginal means) attains it and
/// spends the budget exactly.
pub fn analytic_best_response(
    game: &ValidatedGame,
    sol: &GammaSolution,
    player: Player,
) -> Result<BestResponseResult> {
    let value = analytic_br_value(game, sol, player)?;
    let marginals = crate::dist::uniform_type_marginals(game, sol)?;
    let means: Vec<f64> = marginals
        .for_player(game, player)
        .iter()
        .map(|d| d.mean())
        .collect();
    Ok(BestResponseResult {
        allocation: Allocation::new(means)?,
        value,
        grid_step: 0.0,
    })
}

/// The value component of [`analytic_best_response`]. Tie terms vanish
/// because the opposing marginals are atomless away from zero.
pub fn analytic_br_value(game: &ValidatedGame, sol: &GammaSolution, player: Player) -> Result<f64> {
    let residual = equation_residual(game, sol.gamma);
    if residual.abs() > RESIDUAL_TOLERANCE {
        return Err(Error::NotARoot {
            gamma: sol.gamma,
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    let gamma = sol.gamma;
    let va = game.norm_low();
    let vb = game.norm_high();
    let mut unit = 0.0;
    match game.internal_side(player) {
        0 => {
            for i in 0..game.n() {
                if va[i] / vb[i] > gamma {
                    unit += va[i] - gamma * vb[i] / 2.0;
                } else {
                    unit += va[i] * va[i] / (2.0 * gamma * vb[i]);
                }
            }
            Ok(game.total_low() * unit)
        }
        _ => {
            for i in 0..game.n() {
                if va[i] / vb[i] > gamma {
                    unit += gamma * vb[i] * vb[i] / (2.0 * va[i]);
                } else {
                    unit += vb[i] - va[i] / (2.0 * gamma);
                }
            }
            Ok(game.total_high() * unit)
        }
    }
}

/// Expected win share of the responder at each grid point, per battlefield:
/// probability of strictly beating the opponent plus `alpha_term` times the
/// tie probability.
pub fn win_gain_table(
    opponents: &[&dyn OpponentLaw],
    budget: f64,
    grid_points: usize,
    alpha_term: f64,
) -> Result<Vec<Vec<f64>>> {
    if grid_points < 2 {
        return Err(Error::GridTooSmall(grid_points));
    }
    Ok(opponents
        .iter()
        .map(|law| {
            (0..grid_points)
                .map(|k| {
                    let x = budget * (k as f64 / (grid_points - 1) as f64);
                    law.prob_below(x) + alpha_term * law.prob_eq(x)
                })
                .collect()
        })
        .collect())
}

/// Knapsack over (battlefield, remaining grid units) for an arbitrary gain
/// table; `gain[i][k]` is the responder's expected win share on battlefield
/// `i` when allocating `k` grid units. Ties in value resolve to the
/// lexicographically smallest allocation.
pub fn best_response_over_table(
    values: &[f64],
    gain: &[Vec<f64>],
    budget: f64,
    grid_points: usize,
) -> Result<BestResponseResult> {
    if grid_points < 2 {
        return Err(Error::GridTooSmall(grid_points));
    }
    let n = values.len();
    if gain.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: gain.len(),
        });
    }
    let units = grid_points - 1;

    // best[r] = optimal value over the current suffix with r units left;
    // choice[i][r] = smallest optimal spend, filled back to front
    let mut best = vec![0.0f64; units + 1];
    let mut choice = vec![vec![0u32; units + 1]; n];
    for i in (0..n).rev() {
        let mut next = vec![f64::NEG_INFINITY; units + 1];
        for r in 0..=units {
            let mut top = f64::NEG_INFINITY;
            let mut arg = 0u32;
            for g in 0..=r {
                let v = values[i] * gain[i][g] + best[r - g];
                if v > top {
                    top = v;
                    arg = g as u32;
                }
            }
            next[r] = top;
            choice[i][r] = arg;
        }
        best = next;
    }

    let step = budget / units as f64;
    let mut remaining = units;
    let mut amounts = Vec::with_capacity(n);
    for row in &choice {
        let g = row[remaining] as usize;
        amounts.push(budget * (g as f64 / units as f64));
        remaining -= g;
    }
    Ok(BestResponseResult {
        allocation: Allocation::new(amounts)?,
        value: best[units],
        grid_step: step,
    })
}

/// Grid best response against per-battlefield opponent laws under the
/// winner-takes-all rule with tie weight `alpha_term` for the responder.
pub fn discretized_best_response(
    values: &[f64],
    opponents: &[&dyn OpponentLaw],
    budget: f64,
    grid_points: usize,
    alpha_term: f64,
) -> Result<BestResponseResult> {
    if values.len() != opponents.len() {
        return Err(Error::LengthMismatch {
            expected: values.len(),
            got: opponents.len(),
        });
    }
    let gain = win_gain_table(opponents, budget, grid_points, alpha_term)?;
    best_response_over_table(values, &gain, budget, grid_points)
}

fn mean_and_ci(samples: &[f64]) -> (f64, f64) {
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    if samples.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    (mean, 1.96 * (var / m).sqrt())
}

/// Best response of `player` against an opponent's empirical marginals,
/// under either rule family.
///
/// For the winner-takes-all rule the gain at a grid point is the empirical
/// strictly-below probability plus the responder's tie share times the
/// empirical tie probability (exact equality counts; normalized samples are
/// atomless except at zero and the full budget). For any other rule the gain
/// is the Monte Carlo average of the rule's win share against the opponent
/// samples, per battlefield per grid point.
pub fn best_response_against_samples(
    game: &ValidatedGame,
    rule: &ContestSuccessFunction,
    player: Player,
    opponent: &EmpiricalMarginals,
    grid_points: usize,
) -> Result<BestResponseResult> {
    if grid_points < 2 {
        return Err(Error::GridTooSmall(grid_points));
    }
    let values = game.values_of(player);
    let budget = game.budget_of(player);
    if rule.is_blotto() {
        let tie = match player {
            Player::A => rule.alpha(),
            Player::B => 1.0 - rule.alpha(),
        };
        let laws: Vec<EmpiricalLaw<'_>> = (0..opponent.n()).map(|i| opponent.law(i)).collect();
        let refs: Vec<&dyn OpponentLaw> = laws.iter().map(|l| l as &dyn OpponentLaw).collect();
        return discretized_best_response(values, &refs, budget, grid_points, tie);
    }

    let units = grid_points - 1;
    let gain: Vec<Vec<f64>> = (0..opponent.n())
        .into_par_iter()
        .map(|i| {
            let samples = opponent.sorted(i);
            let m = samples.len() as f64;
            (0..grid_points)
                .map(|k| {
                    let x = budget * (k as f64 / units as f64);
                    let total: f64 = samples
                        .iter()
                        .map(|&s| match player {
                            Player::A => rule.evaluate(x, s).0,
                            Player::B => rule.evaluate(s, x).1,
                        })
                        .sum();
                    total / m
                })
                .collect()
        })
        .collect();
    best_response_over_table(values, &gain, budget, grid_points)
}

/// Monte Carlo exploitability of the sampled profile under `rule`.
///
/// Pairs `m_samples` independent draws of each player to estimate the
/// profile payoff, reuses the same draws as each side's empirical opponent
/// marginals, runs the grid best response for both players, and reports
/// `epsilon_hat = (br - iu) / W_P` with a 95% CI on the payoff estimate.
pub fn estimate_exploitability(
    game: &ValidatedGame,
    sol: &GammaSolution,
    rule: &ContestSuccessFunction,
    m_samples: usize,
    grid_points: usize,
    seed: u64,
) -> Result<(ExploitabilityReport, ExploitabilityReport)> {
    if m_samples == 0 {
        return Err(Error::EmptyBatch);
    }
    if grid_points < 2 {
        return Err(Error::GridTooSmall(grid_points));
    }
    let sampler = IUSampler::new(game, sol)?;
    let root = RandomStream::from_seed(seed);
    let (emp_a, draws_a) = sampler.sample_batch(Player::A, m_samples, &root.split(0))?;
    let (emp_b, draws_b) = sampler.sample_batch(Player::B, m_samples, &root.split(1))?;

    let payoffs: Vec<(f64, f64)> = draws_a
        .par_iter()
        .zip(draws_b.par_iter())
        .map(|(xa, xb)| game.csf_payoff(rule, xa, xb))
        .collect::<Result<_>>()?;
    let pays_a: Vec<f64> = payoffs.iter().map(|p| p.0).collect();
    let pays_b: Vec<f64> = payoffs.iter().map(|p| p.1).collect();
    let (iu_a, ci_a) = mean_and_ci(&pays_a);
    let (iu_b, ci_b) = mean_and_ci(&pays_b);

    let br_a = best_response_against_samples(game, rule, Player::A, &emp_b, grid_points)?;
    let br_b = best_response_against_samples(game, rule, Player::B, &emp_a, grid_points)?;

    let report = |player, iu, ci, br: &BestResponseResult| ExploitabilityReport {
        player,
        iu_value: iu,
        br_value: br.value,
        epsilon_hat: (br.value - iu) / game.total_of(player),
        ci_halfwidth: ci,
        m_samples,
        grid_points,
        seed,
    };
    Ok((
        report(Player::A, iu_a, ci_a, &br_a),
        report(Player::B, iu_b, ci_b, &br_b),
    ))
}
