//! Contest success functions and their dissimilarity to the
//! winner-takes-all rule.
//!
//! A pair of CSFs maps two allocations to win shares that are non-negative,
//! sum to one (C1), and are monotone in own/opponent effort (C2). The
//! built-in kinds are the winner-takes-all rule itself, the power form
//! (Tullock with exponent `R` and tie weight `alpha`), and the logit form.
//! Both ratio forms converge pointwise to winner-takes-all as `R` grows.
//!
//! The dissimilarity machinery quantifies how far a rule sits from
//! winner-takes-all under the equilibrium marginals: for a fixed opponent
//! point, the set of own allocations where the two rules differ by at least
//! `eps` decomposes into at most two half-intervals hugging the tie point
//! plus possibly the tie point itself. `delta_bound` maximizes the marginal
//! mass of that set over opponent points and battlefields, which is exactly
//! the quantity the lottery-game error budget is built from.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dist::UniformTypeDistribution;
use crate::error::{Error, Result};
use crate::game::{Player, ValidatedGame};
use crate::gamma::{GammaSolution, parameter_bounds};

/// Own-win-share evaluator for a custom rule; the opponent share is `1 - f`.
pub type CustomEval = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum CsfKind {
    /// Winner-takes-all with tie weight `alpha`.
    Blotto,
    /// `a x^R / (a x^R + (1-a) y^R)`, `(a, 1-a)` at the origin.
    Power { r: f64 },
    /// `a e^{Rx} / (a e^{Rx} + (1-a) e^{Ry})`.
    Logit { r: f64 },
    /// User-supplied `zeta_A`; must satisfy C2, and C1 holds by
    /// construction since `zeta_B := 1 - zeta_A`.
    Custom { eval: CustomEval, lipschitz: bool },
}

impl fmt::Debug for CsfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsfKind::Blotto => write!(f, "Blotto"),
            CsfKind::Power { r } => write!(f, "Power {{ r: {r} }}"),
            CsfKind::Logit { r } => write!(f, "Logit {{ r: {r} }}"),
            CsfKind::Custom { lipschitz, .. } => {
                write!(f, "Custom {{ lipschitz: {lipschitz} }}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContestSuccessFunction {
    kind: CsfKind,
    alpha: f64,
}

/// Exponent magnitude beyond which the logit form saturates to {0, 1}.
const LOGIT_SATURATION: f64 = 700.0;

impl ContestSuccessFunction {
    /// The winner-takes-all rule; `alpha` may be any value in `[0, 1]`.
    pub fn blotto(alpha: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&alpha));
        ContestSuccessFunction {
            kind: CsfKind::Blotto,
            alpha,
        }
    }

    /// Power form. Rejects `alpha` outside the open interval (0, 1): at the
    /// endpoints one player wins everything regardless of allocations.
    pub fn power(r: f64, alpha: f64) -> Result<Self> {
        require_ratio_params(r, alpha, "power")?;
        Ok(ContestSuccessFunction {
            kind: CsfKind::Power { r },
            alpha,
        })
    }

    /// Logit form; same parameter constraints as the power form.
    pub fn logit(r: f64, alpha: f64) -> Result<Self> {
        require_ratio_params(r, alpha, "logit")?;
        Ok(ContestSuccessFunction {
            kind: CsfKind::Logit { r },
            alpha,
        })
    }

    /// User-supplied rule. `alpha` is the tie weight of the winner-takes-all
    /// rule it is compared against.
    ///
    /// `lipschitz` declares that the rule is Lipschitz on the relevant box:
    /// for such rules the lottery error budget tightens from
    /// `8*delta + 13*eps` to `2*delta + 5*eps` (a documented consequence,
    /// not asserted anywhere). For a rule that is *not* Lipschitz, the
    /// dissimilarity maximum may be attained only in the limit and
    /// `delta_bound` reports the grid supremum.
    pub fn custom(eval: CustomEval, alpha: f64, lipschitz: bool) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::AlphaOutOfRange {
                alpha,
                kind: "custom",
            });
        }
        Ok(ContestSuccessFunction {
            kind: CsfKind::Custom { eval, lipschitz },
            alpha,
        })
    }

    pub fn kind(&self) -> &CsfKind {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_blotto(&self) -> bool {
        matches!(self.kind, CsfKind::Blotto)
    }

    /// Whether the rule is declared Lipschitz on the relevant box. Built-in
    /// ratio forms are; winner-takes-all is not.
    pub fn is_lipschitz(&self) -> bool {
        match self.kind {
            CsfKind::Blotto => false,
            CsfKind::Power { .. } | CsfKind::Logit { .. } => true,
            CsfKind::Custom { lipschitz, .. } => lipschitz,
        }
    }

    /// Win shares `(zeta_a, zeta_b)` for allocations `x` (player A) and `y`
    /// (player B). The opponent share is computed as `1 - zeta_a`, so C1
    /// holds exactly.
    pub fn evaluate(&self, x: f64, y: f64) -> (f64, f64) {
        let za = self.share_a(x, y);
        (za, 1.0 - za)
    }

    fn share_a(&self, x: f64, y: f64) -> f64 {
        let a = self.alpha;
        match &self.kind {
            CsfKind::Blotto => {
                if x > y {
                    1.0
                } else if x < y {
                    0.0
                } else {
                    a
                }
            }
            CsfKind::Power { r } => {
                if x == y {
                    // covers the defined (alpha, 1-alpha) case at the origin
                    // and keeps equal positive allocations exact
                    a
                } else if x > y {
                    let t = (y / x).powf(*r);
                    a / (a + (1.0 - a) * t)
                } else {
                    let t = (x / y).powf(*r);
                    a * t / (a * t + (1.0 - a))
                }
            }
            CsfKind::Logit { r } => {
                if x == y {
                    a
                } else {
                    let z = r * (y - x);
                    if z > LOGIT_SATURATION {
                        0.0
                    } else if z < -LOGIT_SATURATION {
                        1.0
                    } else {
                        a / (a + (1.0 - a) * z.exp())
                    }
                }
            }
            CsfKind::Custom { eval, .. } => eval(x, y),
        }
    }

    /// Own win share as a function of own allocation `t`, opponent fixed at
    /// `point`; non-decreasing in `t` by C2 for either perspective.
    fn own_share(&self, perspective: Player, t: f64, point: f64) -> f64 {
        match perspective {
            Player::A => self.share_a(t, point),
            Player::B => 1.0 - self.share_a(point, t),
        }
    }

    /// Tie weight of the winner-takes-all comparison rule from the given
    /// player's perspective.
    fn tie_share(&self, perspective: Player) -> f64 {
        match perspective {
            Player::A => self.alpha,
            Player::B => 1.0 - self.alpha,
        }
    }
}

fn require_ratio_params(r: f64, alpha: f64, kind: &'static str) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange { alpha, kind });
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidGame(format!(
            "{kind} exponent R = {r} must be positive and finite"
        )));
    }
    Ok(())
}

/// Where the rule differs from winner-takes-all by at least `eps`, for one
/// fixed opponent point: a half-interval below the point, a half-interval
/// above it, and possibly the point itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissimilaritySet {
    /// Opponent allocation the set was built around.
    pub point: f64,
    /// The tie point itself, present when the rule's tie share is `eps`-far
    /// from the winner-takes-all tie weight there.
    pub singleton: Option<f64>,
    /// `[lo, point)`: own allocations losing under winner-takes-all but
    /// collecting at least `eps` under the rule.
    pub lower: Option<(f64, f64)>,
    /// `(point, hi]`: own allocations winning under winner-takes-all but
    /// conceding at least `eps` under the rule.
    pub upper: Option<(f64, f64)>,
}

impl DissimilaritySet {
    pub fn is_empty(&self) -> bool {
        self.singleton.is_none() && self.lower.is_none() && self.upper.is_none()
    }

    /// Probability mass the distribution assigns to this set.
    ///
    /// Interval contributions are their continuous mass, so a zero atom
    /// sitting at the lower interval's infimum does not count: half
    /// intervals are evaluated as `F(b) - F(a)`, the same convention the
    /// membership bounds for the ratio forms are derived under. The
    /// singleton contributes its point mass (nonzero only at zero).
    pub fn mass_under(&self, dist: &UniformTypeDistribution) -> f64 {
        let mut mass = 0.0;
        if let Some(s) = self.singleton
            && s == 0.0
        {
            mass += dist.mass_at_zero();
        }
        if let Some((lo, point)) = self.lower {
            mass += dist.continuous_mass_between(lo, point);
        }
        if let Some((point, hi)) = self.upper {
            mass += dist.continuous_mass_between(point, hi);
        }
        mass
    }
}

/// Dissimilarity thresholds of a ratio-form rule as scale-free quantities:
/// multiplicative for the power form, additive for the logit form.
enum RatioThresholds {
    /// lower interval `[point * lo_ratio, point)`, upper `(point, point * hi_ratio]`
    Power { lo_ratio: f64, hi_ratio: f64 },
    /// lower interval `[point - lo_width, point)`, upper `(point, point + hi_width]`
    Logit { lo_width: f64, hi_width: f64 },
}

fn ratio_thresholds(
    kind: &CsfKind,
    alpha: f64,
    perspective: Player,
    eps: f64,
) -> Option<RatioThresholds> {
    let own = match perspective {
        Player::A => alpha,
        Player::B => 1.0 - alpha,
    };
    let opp = 1.0 - own;
    match kind {
        CsfKind::Power { r } => Some(RatioThresholds::Power {
            lo_ratio: (eps * opp / ((1.0 - eps) * own)).powf(1.0 / r),
            hi_ratio: ((1.0 - eps) * opp / (eps * own)).powf(1.0 / r),
        }),
        CsfKind::Logit { r } => Some(RatioThresholds::Logit {
            lo_width: ((1.0 - eps) * own / (eps * opp)).ln() / r,
            hi_width: ((1.0 - eps) * opp / (eps * own)).ln() / r,
        }),
        _ => None,
    }
}

fn check_eps(csf: &ContestSuccessFunction, eps: f64) -> Result<()> {
    let max = if csf.is_blotto() {
        1.0
    } else {
        csf.alpha.min(1.0 - csf.alpha)
    };
    if !(eps > 0.0 && eps < max) {
        return Err(Error::EpsOutOfRange { eps, max });
    }
    Ok(())
}

/// Computes the set of the given player's own allocations in `[0, bound]`
/// where the rule's win share is at least `eps` away from winner-takes-all,
/// with the opponent fixed at `point`.
///
/// Built-in ratio forms use closed-form thresholds; custom rules are
/// bracketed by binary search on the monotone own-share function, so for a
/// discontinuous custom rule the result is the search's resolution-limited
/// bracket rather than an exact supremum.
pub fn dissimilarity_set(
    csf: &ContestSuccessFunction,
    point: f64,
    eps: f64,
    bound: f64,
    perspective: Player,
) -> Result<DissimilaritySet> {
    check_eps(csf, eps)?;
    if !(0.0..=bound).contains(&point) {
        return Err(Error::NumericalFailure(format!(
            "opponent point {point} outside [0, {bound}]"
        )));
    }

    let mut set = DissimilaritySet {
        point,
        singleton: None,
        lower: None,
        upper: None,
    };

    match &csf.kind {
        CsfKind::Blotto => return Ok(set),
        kind @ (CsfKind::Power { .. } | CsfKind::Logit { .. }) => {
            match ratio_thresholds(kind, csf.alpha, perspective, eps).unwrap() {
                RatioThresholds::Power { lo_ratio, hi_ratio } => {
                    if point > 0.0 {
                        let lo = point * lo_ratio;
                        if lo < point {
                            set.lower = Some((lo, point));
                        }
                        let hi = (point * hi_ratio).min(bound);
                        if hi > point {
                            set.upper = Some((point, hi));
                        }
                    }
                }
                RatioThresholds::Logit { lo_width, hi_width } => {
                    let lo = (point - lo_width).max(0.0);
                    if lo < point {
                        set.lower = Some((lo, point));
                    }
                    let hi = (point + hi_width).min(bound);
                    if hi > point {
                        set.upper = Some((point, hi));
                    }
                }
            }
        }
        CsfKind::Custom { .. } => {
            let f = |t: f64| csf.own_share(perspective, t, point);
            let tie = csf.tie_share(perspective);
            if (f(point) - tie).abs() >= eps {
                set.singleton = Some(point);
            }
            // losing side: f is non-decreasing, so {t < point : f(t) >= eps}
            // is [t0, point)
            if point > 0.0 {
                let just_below = next_below(point);
                if f(just_below) >= eps {
                    let lo = if f(0.0) >= eps {
                        0.0
                    } else {
                        bisect_up(&f, eps, 0.0, just_below)
                    };
                    set.lower = Some((lo, point));
                }
            }
            // winning side: {t > point : 1 - f(t) >= eps} is (point, t1]
            if point < bound {
                let just_above = next_above(point);
                if 1.0 - f(just_above) >= eps {
                    let hi = if 1.0 - f(bound) >= eps {
                        bound
                    } else {
                        bisect_down(&f, 1.0 - eps, just_above, bound)
                    };
                    set.upper = Some((point, hi));
                }
            }
        }
    }
    Ok(set)
}

const BISECT_TOLERANCE: f64 = 1e-10;

/// Probe point just below `x > 0`, used to test whether the half-open set
/// reaching up to `x` is nonempty.
fn next_below(x: f64) -> f64 {
    x * (1.0 - 1e-12)
}

/// Probe point just above `x >= 0`.
fn next_above(x: f64) -> f64 {
    if x == 0.0 { 1e-300 } else { x * (1.0 + 1e-12) }
}

/// Leftmost `t` in `[lo, hi]` with `f(t) >= level`, given `f(lo) < level`
/// and `f(hi) >= level`, to within `BISECT_TOLERANCE`.
fn bisect_up(f: &dyn Fn(f64) -> f64, level: f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > BISECT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Rightmost `t` in `[lo, hi]` with `f(t) <= level`, given `f(lo) <= level`
/// and `f(hi) > level`.
fn bisect_down(f: &dyn Fn(f64) -> f64, level: f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > BISECT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaMethod {
    NumericMax,
    ClosedFormPower,
    ClosedFormLogit,
}

/// An upper bound on the dissimilarity mass between a rule and
/// winner-takes-all under the equilibrium marginals.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaBound {
    pub delta: f64,
    pub epsilon: f64,
    pub method: DeltaMethod,
    /// Opponent point attaining the maximum (numeric method only).
    pub argmax_y: Option<f64>,
    /// Battlefield attaining the maximum (numeric method only).
    pub argmax_battlefield: Option<usize>,
}

/// Number of evenly spaced opponent points probed in addition to the
/// analytic kink candidates.
const DELTA_GRID: usize = 1000;

/// Safety inflation applied to the numeric maximum.
const DELTA_INFLATION: f64 = 1e-6;

/// Exact maximization of the dissimilarity mass over battlefields, both
/// player sides, and opponent points in `[0, 2 X_B]`.
///
/// The marginals are piecewise uniform, so the mass of a dissimilarity set
/// is exact, and as a function of the opponent point it is piecewise linear
/// with kinks only where an interval endpoint crosses a support endpoint or
/// the zero atom toggles. All such kinks are enumerated as candidates, so
/// for the built-in kinds the grid only guards against implementation error.
pub fn delta_bound(
    game: &ValidatedGame,
    sol: &GammaSolution,
    csf: &ContestSuccessFunction,
    eps: f64,
) -> Result<DeltaBound> {
    check_eps(csf, eps)?;
    if csf.is_blotto() {
        return Ok(DeltaBound {
            delta: 0.0,
            epsilon: eps,
            method: DeltaMethod::NumericMax,
            argmax_y: Some(0.0),
            argmax_battlefield: Some(0),
        });
    }

    let marginals = crate::dist::uniform_type_marginals(game, sol)?;
    let bound = 2.0 * game.budget_high();

    let mut best = (0.0f64, 0.0f64, 0usize);
    for perspective in [Player::A, Player::B] {
        let own: Vec<&UniformTypeDistribution> = (0..game.n())
            .map(|i| match perspective {
                Player::A => marginals.low_side(i),
                Player::B => marginals.high_side(i),
            })
            .collect();

        let mut candidates: Vec<f64> = Vec::with_capacity(DELTA_GRID + 8 * game.n() + 2);
        for k in 0..=DELTA_GRID {
            candidates.push(bound * k as f64 / DELTA_GRID as f64);
        }
        match ratio_thresholds(&csf.kind, csf.alpha, perspective, eps) {
            Some(RatioThresholds::Power { lo_ratio, hi_ratio }) => {
                for d in own.iter() {
                    let b = d.upper();
                    candidates.extend([b, b / lo_ratio, b / hi_ratio]);
                }
            }
            Some(RatioThresholds::Logit { lo_width, hi_width }) => {
                candidates.push(lo_width);
                for d in own.iter() {
                    let b = d.upper();
                    candidates.extend([b, b + lo_width, b - hi_width]);
                }
            }
            None => {
                for d in own.iter() {
                    candidates.push(d.upper());
                }
            }
        }
        candidates.retain(|y| (0.0..=bound).contains(y));

        for &point in &candidates {
            let set = dissimilarity_set(csf, point, eps, bound, perspective)?;
            if set.is_empty() {
                continue;
            }
            for (i, d) in own.iter().enumerate() {
                let mass = set.mass_under(d);
                if mass > best.0 {
                    best = (mass, point, i);
                }
            }
        }
    }

    Ok(DeltaBound {
        delta: (best.0 * (1.0 + DELTA_INFLATION)).min(1.0),
        epsilon: eps,
        method: DeltaMethod::NumericMax,
        argmax_y: Some(best.1),
        argmax_battlefield: Some(best.2),
    })
}

/// The closed-form membership bound `min(1, 2 n lambda_high * width * w_high
/// / w_low)`, where `width` is the largest half-interval the dissimilarity
/// set can occupy around any opponent point. Solution-independent; available
/// for the power and logit forms only.
pub fn closed_form_delta(
    game: &ValidatedGame,
    csf: &ContestSuccessFunction,
    eps: f64,
) -> Result<Option<DeltaBound>> {
    check_eps(csf, eps)?;
    let bound = 2.0 * game.budget_high();
    let (width, method) = match &csf.kind {
        CsfKind::Power { .. } => {
            let mut w = 0.0f64;
            for p in [Player::A, Player::B] {
                if let Some(RatioThresholds::Power { lo_ratio, hi_ratio }) =
                    ratio_thresholds(&csf.kind, csf.alpha, p, eps)
                {
                    w = w
                        .max(bound * (1.0 - lo_ratio))
                        .max(bound * (hi_ratio - 1.0));
                }
            }
            (w, DeltaMethod::ClosedFormPower)
        }
        CsfKind::Logit { .. } => {
            let mut w = 0.0f64;
            for p in [Player::A, Player::B] {
                if let Some(RatioThresholds::Logit { lo_width, hi_width }) =
                    ratio_thresholds(&csf.kind, csf.alpha, p, eps)
                {
                    w = w.max(lo_width).max(hi_width);
                }
            }
            (w, DeltaMethod::ClosedFormLogit)
        }
        _ => return Ok(None),
    };

    let bounds = game.bounds();
    let pb = parameter_bounds(bounds, game.budget_low(), game.budget_high())?;
    let ratio = bounds.w_high / bounds.w_low;
    let delta = (2.0 * game.n() as f64 * pb.lambda_high * width * ratio).min(1.0);
    Ok(Some(DeltaBound {
        delta,
        epsilon: eps,
        method,
        argmax_y: None,
        argmax_battlefield: None,
    }))
}
