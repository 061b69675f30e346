//! The uniform-type marginal distributions attached to a solution.
//!
//! Each battlefield carries one distribution per player: the player with the
//! stronger incentive there plays uniformly on `[0, b]`, the weaker player
//! puts a point mass at zero and spreads the rest uniformly on `(0, b]`,
//! with the shared support endpoint `b` set by the solution's multipliers.
//! These are the laws the allocation sampler draws from before normalizing
//! to the budget.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Player, ValidatedGame};
use crate::gamma::{GammaSolution, RESIDUAL_TOLERANCE, equation_residual};
use crate::rng::RandomStream;

/// Which player/strength case a distribution instantiates; kept for
/// diagnostics, the pair `(mass_at_zero, upper)` fully determines the law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    StrongA,
    WeakA,
    StrongB,
    WeakB,
}

/// Point mass at zero plus a uniform tail on `(0, upper]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UniformTypeDistribution {
    mass_at_zero: f64,
    upper: f64,
    role: Role,
}

impl UniformTypeDistribution {
    pub fn new(mass_at_zero: f64, upper: f64, role: Role) -> Result<Self> {
        if !(0.0..=1.0).contains(&mass_at_zero) || !(upper.is_finite() && upper > 0.0) {
            return Err(Error::NumericalFailure(format!(
                "invalid uniform-type parameters: mass {mass_at_zero}, upper {upper}"
            )));
        }
        Ok(UniformTypeDistribution {
            mass_at_zero,
            upper,
            role,
        })
    }

    pub fn mass_at_zero(&self) -> f64 {
        self.mass_at_zero
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Right-continuous CDF: `mass + (1 - mass) x / upper` on `[0, upper]`,
    /// clamped to `[0, 1]` outside.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x >= self.upper {
            1.0
        } else {
            self.mass_at_zero + (1.0 - self.mass_at_zero) * x / self.upper
        }
    }

    /// Probability of drawing strictly less than `x`; differs from the CDF
    /// only through the atom at zero.
    pub fn prob_below(&self, x: f64) -> f64 {
        if x <= 0.0 { 0.0 } else { self.cdf(x) }
    }

    /// Mass of the open interval `(lo, hi)` intersected with the continuous
    /// part of the support; the atom at zero never counts here.
    pub fn continuous_mass_between(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.clamp(0.0, self.upper);
        let hi = hi.clamp(0.0, self.upper);
        if hi <= lo {
            0.0
        } else {
            (1.0 - self.mass_at_zero) * (hi - lo) / self.upper
        }
    }

    pub fn mean(&self) -> f64 {
        (1.0 - self.mass_at_zero) * self.upper / 2.0
    }

    /// Inverse-CDF draw: zero with the atom's probability, otherwise
    /// uniform on the tail.
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        let u = rng.next_f64();
        self.quantile(u)
    }

    /// Inverse CDF at `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u < self.mass_at_zero {
            0.0
        } else {
            self.upper * (u - self.mass_at_zero) / (1.0 - self.mass_at_zero)
        }
    }
}

/// Per-battlefield marginal pairs generated by one solution.
#[derive(Debug, Clone, Serialize)]
pub struct MarginalSet {
    low: Vec<UniformTypeDistribution>,
    high: Vec<UniformTypeDistribution>,
    solution: GammaSolution,
}

impl MarginalSet {
    pub fn n(&self) -> usize {
        self.low.len()
    }

    pub fn solution(&self) -> &GammaSolution {
        &self.solution
    }

    /// Marginal of the smaller-budget player on battlefield `i`.
    pub fn low_side(&self, i: usize) -> &UniformTypeDistribution {
        &self.low[i]
    }

    /// Marginal of the larger-budget player on battlefield `i`.
    pub fn high_side(&self, i: usize) -> &UniformTypeDistribution {
        &self.high[i]
    }

    pub fn low_all(&self) -> &[UniformTypeDistribution] {
        &self.low
    }

    pub fn high_all(&self) -> &[UniformTypeDistribution] {
        &self.high
    }

    /// Marginals of a caller-label player.
    pub fn for_player(&self, game: &ValidatedGame, player: Player) -> &[UniformTypeDistribution] {
        match game.internal_side(player) {
            0 => &self.low,
            _ => &self.high,
        }
    }
}

/// Builds the marginal pair for every battlefield from a verified solution.
///
/// On a battlefield in the strong set the smaller-budget player is uniform
/// on `[0, v_b[i]/lambda_b]` and the opponent stacks the incentive gap at
/// zero; off the strong set the roles flip and the support is
/// `[0, v_a[i]/lambda_a]`.
pub fn uniform_type_marginals(game: &ValidatedGame, sol: &GammaSolution) -> Result<MarginalSet> {
    let residual = equation_residual(game, sol.gamma);
    if residual.abs() > RESIDUAL_TOLERANCE {
        return Err(Error::NotARoot {
            gamma: sol.gamma,
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }

    let va = game.norm_low();
    let vb = game.norm_high();
    let mut low = Vec::with_capacity(game.n());
    let mut high = Vec::with_capacity(game.n());
    for i in 0..game.n() {
        let reach_a = va[i] / sol.lambda_a;
        let reach_b = vb[i] / sol.lambda_b;
        if va[i] / vb[i] > sol.gamma {
            // smaller-budget player strong: both supported on [0, reach_b]
            low.push(UniformTypeDistribution::new(0.0, reach_b, Role::StrongA)?);
            high.push(UniformTypeDistribution::new(
                ((reach_a - reach_b) / reach_a).clamp(0.0, 1.0),
                reach_b,
                Role::WeakB,
            )?);
        } else {
            low.push(UniformTypeDistribution::new(
                ((reach_b - reach_a) / reach_b).clamp(0.0, 1.0),
                reach_a,
                Role::WeakA,
            )?);
            high.push(UniformTypeDistribution::new(0.0, reach_a, Role::StrongB)?);
        }
    }
    Ok(MarginalSet {
        low,
        high,
        solution: sol.clone(),
    })
}

/// Probability that a caller-label player draws zero on every battlefield:
/// the product of the per-battlefield zero masses. Zero as soon as the
/// player is strong somewhere.
pub fn prob_all_zero(marginals: &MarginalSet, game: &ValidatedGame, player: Player) -> f64 {
    marginals
        .for_player(game, player)
        .iter()
        .map(|d| d.mass_at_zero())
        .product()
}
