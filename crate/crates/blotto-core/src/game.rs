//! Game instances, validation, and pure-strategy payoffs.
//!
//! A game is described by two budgets, two per-battlefield value vectors
//! (players may value the same battlefield differently), and a tie parameter
//! `alpha`: on an exact tie player A collects `alpha * w_a[i]` and player B
//! collects `(1 - alpha) * w_b[i]`.

use serde::{Deserialize, Serialize};

use crate::csf::ContestSuccessFunction;
use crate::error::{Error, Result};

/// Absolute slack allowed on the budget constraint; absorbs normalization
/// round-off from the allocation sampler.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    A,
    B,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::A => Player::B,
            Player::B => Player::A,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Player::A => "A",
            Player::B => "B",
        }
    }
}

/// Raw description of a game, as read from a config file or built in code.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameSpec {
    pub n: usize,
    pub budget_a: f64,
    pub budget_b: f64,
    pub values_a: Vec<f64>,
    pub values_b: Vec<f64>,
    pub alpha: f64,
}

impl GameSpec {
    /// Convenience constructor for a game where both players hold the same
    /// value vector (the constant-sum variant when used as-is).
    pub fn constant_sum(budget_a: f64, budget_b: f64, values: Vec<f64>, alpha: f64) -> Self {
        GameSpec {
            n: values.len(),
            budget_a,
            budget_b,
            values_a: values.clone(),
            values_b: values,
            alpha,
        }
    }

    pub fn validate(self) -> Result<ValidatedGame> {
        validate_game(self)
    }
}

/// A pure strategy: one non-negative amount per battlefield.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    amounts: Vec<f64>,
}

impl Allocation {
    pub fn new(amounts: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = amounts.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::InvalidGame(format!(
                "allocation entry {bad} is negative or not finite"
            )));
        }
        Ok(Allocation { amounts })
    }

    pub fn zeros(n: usize) -> Self {
        Allocation {
            amounts: vec![0.0; n],
        }
    }

    pub fn amounts(&self) -> &[f64] {
        &self.amounts
    }

    pub fn len(&self) -> usize {
        self.amounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amounts.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.amounts.iter().sum()
    }
}

/// Tight lower/upper bounds on the battlefield values of a validated game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueBounds {
    pub w_low: f64,
    pub w_high: f64,
}

impl ValueBounds {
    pub fn new(w_low: f64, w_high: f64) -> Result<Self> {
        if !(w_low > 0.0 && w_low <= w_high && w_high.is_finite()) {
            return Err(Error::InvalidGame(format!(
                "value bounds must satisfy 0 < low <= high, got [{w_low}, {w_high}]"
            )));
        }
        Ok(ValueBounds { w_low, w_high })
    }
}

/// A validated game with derived quantities.
///
/// Internally the players are ordered so that the first player holds the
/// smaller budget; everything the solver computes (gamma, multipliers,
/// marginals) lives in that orientation. The `swapped` flag records whether
/// the caller's labels were exchanged, and all player-facing operations
/// accept and report the caller's labels.
#[derive(Debug, Clone)]
pub struct ValidatedGame {
    spec: GameSpec,
    swapped: bool,
    warnings: Vec<String>,
    // internal orientation: budget[0] <= budget[1]
    budgets: [f64; 2],
    values: [Vec<f64>; 2],
    norm: [Vec<f64>; 2],
    totals: [f64; 2],
    bounds: ValueBounds,
}

/// Checks a raw spec, derives totals and normalized values, and relabels the
/// players internally when the caller's player A holds the larger budget.
pub fn validate_game(spec: GameSpec) -> Result<ValidatedGame> {
    if spec.n < 2 {
        return Err(Error::InvalidGame(format!(
            "need at least 2 battlefields, got {}",
            spec.n
        )));
    }
    if spec.values_a.len() != spec.n || spec.values_b.len() != spec.n {
        return Err(Error::InvalidGame(format!(
            "value vectors must have length n = {}, got {} and {}",
            spec.n,
            spec.values_a.len(),
            spec.values_b.len()
        )));
    }
    for (player, values) in [("A", &spec.values_a), ("B", &spec.values_b)] {
        if let Some(&bad) = values.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::InvalidGame(format!(
                "player {player} has non-positive or non-finite battlefield value {bad}"
            )));
        }
    }
    for (label, budget) in [("A", spec.budget_a), ("B", spec.budget_b)] {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidGame(format!(
                "player {label} budget {budget} must be positive and finite"
            )));
        }
    }
    if !(0.0..=1.0).contains(&spec.alpha) || !spec.alpha.is_finite() {
        return Err(Error::InvalidGame(format!(
            "alpha = {} must lie in [0, 1]",
            spec.alpha
        )));
    }

    let mut warnings = Vec::new();
    if spec.n == 2 {
        warnings.push("n = 2 battlefields: asymptotic guarantees assume n >= 3".to_string());
    }

    let swapped = spec.budget_a > spec.budget_b;
    let (wa, wb, xa, xb) = if swapped {
        (&spec.values_b, &spec.values_a, spec.budget_b, spec.budget_a)
    } else {
        (&spec.values_a, &spec.values_b, spec.budget_a, spec.budget_b)
    };

    let total_a: f64 = wa.iter().sum();
    let total_b: f64 = wb.iter().sum();
    if !(total_a.is_finite() && total_b.is_finite()) {
        return Err(Error::InvalidGame("total values overflow".to_string()));
    }

    let norm_a: Vec<f64> = wa.iter().map(|w| w / total_a).collect();
    let norm_b: Vec<f64> = wb.iter().map(|w| w / total_b).collect();

    let mut w_low = f64::INFINITY;
    let mut w_high = 0.0f64;
    for &w in wa.iter().chain(wb.iter()) {
        w_low = w_low.min(w);
        w_high = w_high.max(w);
    }

    Ok(ValidatedGame {
        swapped,
        warnings,
        budgets: [xa, xb],
        values: [wa.clone(), wb.clone()],
        norm: [norm_a, norm_b],
        totals: [total_a, total_b],
        bounds: ValueBounds::new(w_low, w_high)?,
        spec,
    })
}

impl ValidatedGame {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    /// Whether the caller's players were relabeled to enforce the internal
    /// budget ordering.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The raw spec in the caller's orientation.
    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn bounds(&self) -> ValueBounds {
        self.bounds
    }

    /// Internal smaller/larger budgets (`X_A <= X_B`).
    pub fn budget_low(&self) -> f64 {
        self.budgets[0]
    }

    pub fn budget_high(&self) -> f64 {
        self.budgets[1]
    }

    /// Internal-orientation battlefield values for the smaller-budget player.
    pub fn values_low(&self) -> &[f64] {
        &self.values[0]
    }

    pub fn values_high(&self) -> &[f64] {
        &self.values[1]
    }

    /// Internal-orientation normalized values (sum to one per player).
    pub fn norm_low(&self) -> &[f64] {
        &self.norm[0]
    }

    pub fn norm_high(&self) -> &[f64] {
        &self.norm[1]
    }

    pub fn total_low(&self) -> f64 {
        self.totals[0]
    }

    pub fn total_high(&self) -> f64 {
        self.totals[1]
    }

    /// Maps a caller-label player onto the internal orientation: `A` is the
    /// smaller-budget side internally.
    pub fn internal_side(&self, player: Player) -> usize {
        match (player, self.swapped) {
            (Player::A, false) | (Player::B, true) => 0,
            (Player::B, false) | (Player::A, true) => 1,
        }
    }

    /// Budget of a caller-label player.
    pub fn budget_of(&self, player: Player) -> f64 {
        self.budgets[self.internal_side(player)]
    }

    /// Total value `W_P` of a caller-label player.
    pub fn total_of(&self, player: Player) -> f64 {
        self.totals[self.internal_side(player)]
    }

    /// Battlefield values of a caller-label player.
    pub fn values_of(&self, player: Player) -> &[f64] {
        &self.values[self.internal_side(player)]
    }

    /// Tie share of a caller-label player.
    pub fn tie_share_of(&self, player: Player) -> f64 {
        match player {
            Player::A => self.spec.alpha,
            Player::B => 1.0 - self.spec.alpha,
        }
    }

    pub fn check_feasible(&self, player: Player, allocation: &Allocation) -> Result<()> {
        if allocation.len() != self.spec.n {
            return Err(Error::LengthMismatch {
                expected: self.spec.n,
                got: allocation.len(),
            });
        }
        let budget = self.budget_of(player);
        let sum = allocation.total();
        if sum > budget + BUDGET_TOLERANCE {
            return Err(Error::InfeasibleAllocation {
                player: player.label(),
                sum,
                budget,
            });
        }
        Ok(())
    }

    /// Winner-takes-all payoffs `(pi_a, pi_b)` of a pure profile, in the
    /// caller's labels. Ties are exact floating-point equality.
    pub fn blotto_payoff(&self, x_a: &Allocation, x_b: &Allocation) -> Result<(f64, f64)> {
        let rule = ContestSuccessFunction::blotto(self.spec.alpha);
        self.csf_payoff(&rule, x_a, x_b)
    }

    /// Payoffs under an arbitrary contest success function: each battlefield
    /// pays `w_p[i] * win_share` where the shares come from the rule.
    pub fn csf_payoff(
        &self,
        csf: &ContestSuccessFunction,
        x_a: &Allocation,
        x_b: &Allocation,
    ) -> Result<(f64, f64)> {
        self.check_feasible(Player::A, x_a)?;
        self.check_feasible(Player::B, x_b)?;
        let wa = &self.spec.values_a;
        let wb = &self.spec.values_b;
        let mut pi_a = 0.0;
        let mut pi_b = 0.0;
        for i in 0..self.spec.n {
            let (za, zb) = csf.evaluate(x_a.amounts[i], x_b.amounts[i]);
            pi_a += wa[i] * za;
            pi_b += wb[i] * zb;
        }
        Ok((pi_a, pi_b))
    }
}
