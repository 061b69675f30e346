//! Allocation sampling: independent uniform-type draws rescaled to the
//! budget, batch generation, and empirical-marginal diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{MarginalSet, UniformTypeDistribution, uniform_type_marginals};
use crate::error::{Error, Result};
use crate::game::{Allocation, Player, ValidatedGame};
use crate::gamma::GammaSolution;
use crate::rng::RandomStream;

/// Draws budget-feasible allocations whose per-battlefield marginals
/// approach the uniform-type laws as the game grows.
#[derive(Debug, Clone)]
pub struct IUSampler {
    game: ValidatedGame,
    solution: GammaSolution,
    marginals: MarginalSet,
}

impl IUSampler {
    pub fn new(game: &ValidatedGame, solution: &GammaSolution) -> Result<Self> {
        let marginals = uniform_type_marginals(game, solution)?;
        Ok(IUSampler {
            game: game.clone(),
            solution: solution.clone(),
            marginals,
        })
    }

    pub fn game(&self) -> &ValidatedGame {
        &self.game
    }

    pub fn solution(&self) -> &GammaSolution {
        &self.solution
    }

    pub fn marginals(&self) -> &MarginalSet {
        &self.marginals
    }

    /// One allocation for the given player: draw each battlefield
    /// independently from its uniform-type law, then rescale the vector to
    /// spend the budget exactly. An all-zero draw is returned as-is.
    pub fn sample(&self, player: Player, rng: &mut RandomStream) -> Allocation {
        let dists = self.marginals.for_player(&self.game, player);
        let us: Vec<f64> = dists.iter().map(|_| rng.next_f64()).collect();
        allocation_from_uniforms(dists, &us, self.game.budget_of(player))
    }

    /// `m` independent draws plus their per-battlefield empirical marginals.
    ///
    /// Draw `j` uses the child stream `rng.split(j)`, so the output is a
    /// function of `(stream, m)` alone, independent of how the index range
    /// is partitioned across workers.
    pub fn sample_batch(
        &self,
        player: Player,
        m: usize,
        rng: &RandomStream,
    ) -> Result<(EmpiricalMarginals, Vec<Allocation>)> {
        if m == 0 {
            return Err(Error::EmptyBatch);
        }
        let allocations: Vec<Allocation> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut stream = rng.split(j as u64);
                self.sample(player, &mut stream)
            })
            .collect();
        let empirical =
            EmpiricalMarginals::from_allocations(&allocations, self.game.budget_of(player))?;
        Ok((empirical, allocations))
    }
}

/// Deterministic core of the sampler: inverse-CDF transforms followed by
/// budget normalization. Permuting the distributions and the uniforms
/// together permutes the output coordinates identically; the normalizing
/// sum is accumulated in sorted order so it does not depend on battlefield
/// labeling.
pub fn allocation_from_uniforms(
    dists: &[UniformTypeDistribution],
    us: &[f64],
    budget: f64,
) -> Allocation {
    debug_assert_eq!(dists.len(), us.len());
    let mut amounts: Vec<f64> = dists.iter().zip(us).map(|(d, &u)| d.quantile(u)).collect();
    let mut ordered = amounts.clone();
    ordered.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sum: f64 = ordered.iter().sum();
    if sum == 0.0 {
        return Allocation::zeros(dists.len());
    }
    for a in &mut amounts {
        *a = budget * (*a / sum);
    }
    Allocation::new(amounts).expect("normalized draws are finite and non-negative")
}

/// Sorted per-battlefield samples of normalized allocations.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalMarginals {
    samples: Vec<Vec<f64>>,
    m: usize,
    budget: f64,
}

impl EmpiricalMarginals {
    pub fn from_allocations(allocations: &[Allocation], budget: f64) -> Result<Self> {
        if allocations.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let n = allocations[0].len();
        let m = allocations.len();
        let samples: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut column: Vec<f64> = allocations.iter().map(|a| a.amounts()[i]).collect();
                column.sort_by(|a, b| a.partial_cmp(b).unwrap());
                column
            })
            .collect();
        Ok(EmpiricalMarginals { samples, m, budget })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn sorted(&self, battlefield: usize) -> &[f64] {
        &self.samples[battlefield]
    }

    /// Empirical probability of a draw strictly below `x`.
    pub fn prob_below(&self, battlefield: usize, x: f64) -> f64 {
        let col = &self.samples[battlefield];
        col.partition_point(|&s| s < x) as f64 / self.m as f64
    }

    /// Empirical probability of a draw exactly equal to `x`.
    pub fn prob_eq(&self, battlefield: usize, x: f64) -> f64 {
        let col = &self.samples[battlefield];
        let lo = col.partition_point(|&s| s < x);
        let hi = col.partition_point(|&s| s <= x);
        (hi - lo) as f64 / self.m as f64
    }

    /// Empirical CDF (draws at or below `x`).
    pub fn ecdf(&self, battlefield: usize, x: f64) -> f64 {
        let col = &self.samples[battlefield];
        col.partition_point(|&s| s <= x) as f64 / self.m as f64
    }
}

/// Per-battlefield sup-norm distance between the empirical CDFs and the
/// analytic uniform-type CDFs.
///
/// Both curves are step-or-piecewise-linear, so the supremum is attained at
/// a sample jump or at the analytic kinks `{0, upper}`; the distance is
/// evaluated exactly at those points from both sides.
pub fn marginal_gap(
    empirical: &EmpiricalMarginals,
    analytic: &[UniformTypeDistribution],
) -> Result<Vec<f64>> {
    if empirical.n() != analytic.len() {
        return Err(Error::LengthMismatch {
            expected: analytic.len(),
            got: empirical.n(),
        });
    }
    Ok((0..analytic.len())
        .map(|i| {
            let dist = &analytic[i];
            let col = empirical.sorted(i);
            let m = empirical.m() as f64;
            let mut gap = 0.0f64;
            let mut check = |x: f64, rank_le: f64, rank_lt: f64| {
                gap = gap
                    .max((rank_le / m - dist.cdf(x)).abs())
                    .max((rank_lt / m - dist.prob_below(x)).abs());
            };
            let mut k = 0usize;
            while k < col.len() {
                let x = col[k];
                let mut end = k + 1;
                while end < col.len() && col[end] == x {
                    end += 1;
                }
                check(x, end as f64, k as f64);
                k = end;
            }
            for x in [0.0, dist.upper()] {
                let le = col.partition_point(|&s| s <= x) as f64;
                let lt = col.partition_point(|&s| s < x) as f64;
                check(x, le, lt);
            }
            gap
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Role;
    use crate::game::GameSpec;
    use crate::gamma::solve_gamma;

    fn sampler(xa: f64, xb: f64, w: Vec<f64>) -> IUSampler {
        let game = GameSpec::constant_sum(xa, xb, w, 0.5).validate().unwrap();
        let sol = solve_gamma(&game).unwrap().remove(0);
        IUSampler::new(&game, &sol).unwrap()
    }

    #[test]
    fn nondegenerate_draws_spend_the_budget_exactly() {
        let s = sampler(1.0, 2.0, vec![1.0, 2.0, 3.0, 0.5]);
        let mut rng = RandomStream::from_seed(11);
        for _ in 0..200 {
            for (player, budget) in [(Player::A, 1.0), (Player::B, 2.0)] {
                let x = s.sample(player, &mut rng);
                let total = x.total();
                if total > 0.0 {
                    assert!((total - budget).abs() <= 1e-12 * budget);
                }
                assert!(x.amounts().iter().all(|&a| a >= 0.0));
            }
        }
    }

    #[test]
    fn batch_is_deterministic_and_thread_invariant() {
        let s = sampler(1.0, 1.5, vec![1.0; 6]);
        let root = RandomStream::from_seed(99);
        let (_, run1) = s.sample_batch(Player::A, 64, &root).unwrap();
        let (_, run2) = s.sample_batch(Player::A, 64, &root).unwrap();
        assert_eq!(run1, run2);
        // serial reference: split per index, independent of rayon's schedule
        let serial: Vec<Allocation> = (0..64)
            .map(|j| {
                let mut stream = root.split(j);
                s.sample(Player::A, &mut stream)
            })
            .collect();
        assert_eq!(run1, serial);
    }

    #[test]
    fn batch_of_one_and_empty_batch() {
        let s = sampler(1.0, 1.0, vec![1.0; 3]);
        let root = RandomStream::from_seed(3);
        let (emp, allocs) = s.sample_batch(Player::B, 1, &root).unwrap();
        assert_eq!(allocs.len(), 1);
        assert_eq!(emp.m(), 1);
        assert!(matches!(
            s.sample_batch(Player::B, 0, &root),
            Err(Error::EmptyBatch)
        ));
    }

    #[test]
    fn zero_draw_frequency_tracks_the_atom_product() {
        // constant-sum, n=4, budgets 1 and 2: all-zero probability 0.5^4
        let s = sampler(1.0, 2.0, vec![1.0; 4]);
        let root = RandomStream::from_seed(7);
        let trials = 200_000;
        let (_, allocs) = s.sample_batch(Player::A, trials, &root).unwrap();
        let zeros = allocs.iter().filter(|a| a.total() == 0.0).count() as f64;
        let p = 0.0625;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((zeros / trials as f64 - p).abs() <= 3.0 * sigma);
    }

    #[test]
    fn stratified_quantile_samples_have_tiny_gap() {
        let dist = UniformTypeDistribution::new(0.3, 2.0, Role::WeakA).unwrap();
        let m = 1000;
        let draws: Vec<Allocation> = (0..m)
            .map(|k| {
                let u = (k as f64 + 0.5) / m as f64;
                Allocation::new(vec![dist.quantile(u)]).unwrap()
            })
            .collect();
        let emp = EmpiricalMarginals::from_allocations(&draws, 2.0).unwrap();
        let gap = marginal_gap(&emp, std::slice::from_ref(&dist)).unwrap();
        assert!(gap[0] <= 1.0 / m as f64 + 1e-12, "gap {}", gap[0]);
    }

    #[test]
    fn single_battlefield_normalization_collapses_to_budget() {
        // degenerate smoke case: every positive draw normalizes to the full
        // budget, so the empirical law is a two-point mixture
        let dist = UniformTypeDistribution::new(0.4, 1.0, Role::WeakB).unwrap();
        let mut rng = RandomStream::from_seed(5);
        let draws: Vec<Allocation> = (0..500)
            .map(|_| {
                let a = dist.sample(&mut rng);
                let x = if a == 0.0 { 0.0 } else { 3.0 };
                Allocation::new(vec![x]).unwrap()
            })
            .collect();
        let emp = EmpiricalMarginals::from_allocations(&draws, 3.0).unwrap();
        let gaps = marginal_gap(&emp, &[dist]).unwrap();
        assert!(gaps[0] <= 1.0);
        assert!(gaps[0] > 0.3); // mass parked at the budget point
    }

    #[test]
    fn gap_requires_matching_battlefield_counts() {
        let dist = UniformTypeDistribution::new(0.0, 1.0, Role::StrongA).unwrap();
        let draws = vec![Allocation::new(vec![0.5, 0.5]).unwrap()];
        let emp = EmpiricalMarginals::from_allocations(&draws, 1.0).unwrap();
        assert!(marginal_gap(&emp, &[dist]).is_err());
    }

    #[test]
    fn empirical_lookups_agree_with_counts() {
        let draws = [
            Allocation::new(vec![0.0]).unwrap(),
            Allocation::new(vec![0.5]).unwrap(),
            Allocation::new(vec![0.5]).unwrap(),
            Allocation::new(vec![1.0]).unwrap(),
        ];
        let emp = EmpiricalMarginals::from_allocations(&draws, 1.0).unwrap();
        assert_eq!(emp.prob_below(0, 0.5), 0.25);
        assert_eq!(emp.prob_eq(0, 0.5), 0.5);
        assert_eq!(emp.ecdf(0, 0.5), 0.75);
    }
}
