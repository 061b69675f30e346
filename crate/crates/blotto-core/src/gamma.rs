//! Solver for the incentive-balance equation and its multipliers.
//!
//! For a validated game, the ratio of the players' budget shadow prices is
//! pinned down by a one-dimensional equation in `gamma`. The strong set
//! `omega_a(gamma) = {i : v_a[i]/v_b[i] > gamma}` is piecewise constant in
//! `gamma`, so on each interval between consecutive distinct value ratios
//! the equation reduces to a cubic. The solver walks the sorted ratios with
//! prefix sums, solves each interval's cubic in closed form, polishes with
//! Newton steps, and keeps every distinct positive root whose residual
//! passes verification. Roots can be multiple; all are returned sorted.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{ValidatedGame, ValueBounds};

/// Accepted absolute residual of the cross-multiplied equation at a root.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Relative distance below which two roots are considered the same.
const DEDUP_RELATIVE: f64 = 1e-10;

const NEWTON_STEPS: usize = 5;

/// One positive root of the incentive-balance equation together with the
/// budget multipliers and the strong-set partition it induces.
///
/// `gamma`, `lambda_a`, and `lambda_b` refer to the internal orientation in
/// which player A holds the smaller budget.
#[derive(Debug, Clone, Serialize)]
pub struct GammaSolution {
    pub gamma: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    /// Battlefields where the smaller-budget player has the stronger
    /// incentive: `v_a[i]/v_b[i] > gamma`.
    pub omega_a: Vec<usize>,
    /// Absolute residual of the cross-multiplied equation at `gamma`.
    pub residual: f64,
}

/// A box that contains `gamma` and both multipliers for every game whose
/// values fall inside the given bounds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParameterBounds {
    pub gamma_low: f64,
    pub gamma_high: f64,
    pub lambda_low: f64,
    pub lambda_high: f64,
}

/// Battlefield sums entering the equation, for a fixed strong set.
///
/// `strong_*` run over the strong set, `weak_*` over its complement. The
/// second-moment terms are computed through the value ratio so that a
/// bitwise-equal value pair contributes exactly its own value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct OmegaSums {
    /// sum over strong i of (v_b[i])^2 / v_a[i]
    pub strong_bb_a: f64,
    /// sum over strong i of v_b[i]
    pub strong_b: f64,
    /// sum over weak i of v_a[i]
    pub weak_a: f64,
    /// sum over weak i of (v_a[i])^2 / v_b[i]
    pub weak_aa_b: f64,
}

impl OmegaSums {
    pub(crate) fn at_gamma(game: &ValidatedGame, gamma: f64) -> OmegaSums {
        let mut sums = OmegaSums::default();
        let va = game.norm_low();
        let vb = game.norm_high();
        for i in 0..game.n() {
            let ratio = va[i] / vb[i];
            if ratio > gamma {
                sums.strong_bb_a += vb[i] / ratio;
                sums.strong_b += vb[i];
            } else {
                sums.weak_a += va[i];
                sums.weak_aa_b += va[i] * ratio;
            }
        }
        sums
    }

    /// Residual of the equation in cross-multiplied form,
    /// `lhs * denominator - numerator`, which avoids division blow-ups when
    /// the denominator is small.
    pub(crate) fn residual(&self, gamma: f64, budget_a: f64, budget_b: f64) -> f64 {
        let lhs = budget_b * gamma / budget_a;
        lhs * (self.strong_b + self.weak_aa_b / (gamma * gamma))
            - (gamma * gamma * self.strong_bb_a + self.weak_a)
    }

    /// Coefficients `(a, b, c, d)` of the equivalent polynomial
    /// `a g^3 + b g^2 + c g + d` on an interval where the strong set is
    /// constant.
    fn cubic(&self, budget_a: f64, budget_b: f64) -> (f64, f64, f64, f64) {
        (
            budget_a * self.strong_bb_a,
            -budget_b * self.strong_b,
            budget_a * self.weak_a,
            -budget_b * self.weak_aa_b,
        )
    }
}

/// Residual of the equation at an arbitrary positive `gamma`, with the
/// strong set recomputed from scratch.
pub fn equation_residual(game: &ValidatedGame, gamma: f64) -> f64 {
    OmegaSums::at_gamma(game, gamma).residual(gamma, game.budget_low(), game.budget_high())
}

/// All real roots of `a x^3 + b x^2 + c x + d`, unordered. Degenerate
/// leading coefficients fall back to the quadratic and linear cases.
fn cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    if d == 0.0 {
        // factor out the exact root at zero rather than letting the general
        // formula smear it into spurious tiny candidates
        let mut roots = cubic_roots(0.0, a, b, c);
        roots.push(0.0);
        return roots;
    }
    if a == 0.0 {
        if b == 0.0 {
            if c == 0.0 {
                return Vec::new();
            }
            return vec![-d / c];
        }
        let disc = c * c - 4.0 * b * d;
        if disc < 0.0 {
            return Vec::new();
        }
        let sq = disc.sqrt();
        let q = -0.5 * (c + c.signum() * sq);
        if q == 0.0 {
            return vec![0.0, -c / b];
        }
        return vec![q / b, d / q];
    }

    // depressed form t^3 + p t + q with x = t - b / (3a)
    let bn = b / a;
    let cn = c / a;
    let dn = d / a;
    let shift = bn / 3.0;
    let p = cn - bn * bn / 3.0;
    let q = 2.0 * bn * bn * bn / 27.0 - bn * cn / 3.0 + dn;

    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let mut roots = Vec::with_capacity(3);
    if disc > 0.0 {
        // one real root (Cardano)
        let sq = disc.sqrt();
        let u = (-half_q + sq).cbrt();
        let v = (-half_q - sq).cbrt();
        roots.push(u + v - shift);
    } else if p == 0.0 {
        // triple root
        roots.push(-shift);
    } else {
        // three real roots (trigonometric form), possibly repeated
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let theta = arg.clamp(-1.0, 1.0).acos();
        for k in 0..3 {
            let t = m * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
            roots.push(t - shift);
        }
    }
    roots
}

fn newton_polish(mut x: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    for _ in 0..NEWTON_STEPS {
        let f = ((a * x + b) * x + c) * x + d;
        let df = (3.0 * a * x + 2.0 * b) * x + c;
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let next = x - f / df;
        if !next.is_finite() {
            break;
        }
        x = next;
    }
    x
}

/// Finds all positive solutions of the incentive-balance equation, each
/// verified to residual `RESIDUAL_TOLERANCE` and returned sorted ascending.
/// Nonempty for every validated game.
pub fn solve_gamma(game: &ValidatedGame) -> Result<Vec<GammaSolution>> {
    let n = game.n();
    let va = game.norm_low();
    let vb = game.norm_high();
    let xa = game.budget_low();
    let xb = game.budget_high();

    let mut order: Vec<usize> = (0..n).collect();
    let ratio = |i: usize| va[i] / vb[i];
    order.sort_by(|&i, &j| ratio(i).partial_cmp(&ratio(j)).unwrap());

    // prefix[k] holds the weak-side sums of the first k sorted battlefields,
    // suffix[k] the strong-side sums of the rest
    let mut prefix_a = vec![0.0; n + 1];
    let mut prefix_aa_b = vec![0.0; n + 1];
    for (pos, &i) in order.iter().enumerate() {
        prefix_a[pos + 1] = prefix_a[pos] + va[i];
        prefix_aa_b[pos + 1] = prefix_aa_b[pos] + va[i] * ratio(i);
    }
    let mut suffix_bb_a = vec![0.0; n + 1];
    let mut suffix_b = vec![0.0; n + 1];
    for pos in (0..n).rev() {
        let i = order[pos];
        suffix_bb_a[pos] = suffix_bb_a[pos + 1] + vb[i] / ratio(i);
        suffix_b[pos] = suffix_b[pos + 1] + vb[i];
    }

    // cut positions: one interval per maximal run of equal ratios
    let mut cuts: Vec<(f64, usize)> = Vec::new(); // (ratio value, first position past the run)
    let mut pos = 0;
    while pos < n {
        let r = ratio(order[pos]);
        let mut end = pos + 1;
        while end < n && ratio(order[end]) == r {
            end += 1;
        }
        cuts.push((r, end));
        pos = end;
    }

    let mut candidates: Vec<f64> = Vec::new();
    let mut scan_interval = |cut_pos: usize, lo: f64, lo_closed: bool, hi: f64| {
        let sums = OmegaSums {
            strong_bb_a: suffix_bb_a[cut_pos],
            strong_b: suffix_b[cut_pos],
            weak_a: prefix_a[cut_pos],
            weak_aa_b: prefix_aa_b[cut_pos],
        };
        let (a, b, c, d) = sums.cubic(xa, xb);
        for root in cubic_roots(a, b, c, d) {
            if !root.is_finite() || root <= 0.0 {
                continue;
            }
            let inside = (root > lo || (lo_closed && root == lo)) && root < hi;
            if inside {
                candidates.push(newton_polish(root, a, b, c, d));
            }
        }
    };

    // gamma below every ratio: strong set is everything
    scan_interval(0, 0.0, false, cuts[0].0);
    // between consecutive distinct ratios, and at/above the largest
    for (j, &(r, cut_pos)) in cuts.iter().enumerate() {
        let hi = if j + 1 < cuts.len() {
            cuts[j + 1].0
        } else {
            f64::INFINITY
        };
        scan_interval(cut_pos, r, true, hi);
    }

    candidates.retain(|g| g.is_finite() && *g > 0.0);
    candidates.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut solutions: Vec<GammaSolution> = Vec::new();
    for gamma in candidates {
        match lagrange_multipliers(game, gamma) {
            Ok(sol) => {
                if let Some(last) = solutions.last_mut()
                    && (sol.gamma - last.gamma).abs() <= DEDUP_RELATIVE * sol.gamma.max(last.gamma)
                {
                    if sol.residual.abs() < last.residual.abs() {
                        *last = sol;
                    }
                    continue;
                }
                solutions.push(sol);
            }
            Err(Error::NotARoot { .. }) => continue,
            Err(e) => return Err(e),
        }
    }

    if solutions.is_empty() {
        return Err(Error::NumericalFailure(
            "no root of the incentive-balance equation survived verification".to_string(),
        ));
    }
    Ok(solutions)
}

/// Builds the full solution record for a verified root: multipliers, strong
/// set, and residual. Fails with `NotARoot` when `gamma` does not satisfy
/// the equation to `RESIDUAL_TOLERANCE`.
pub fn lagrange_multipliers(game: &ValidatedGame, gamma: f64) -> Result<GammaSolution> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::NotARoot {
            gamma,
            residual: f64::INFINITY,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    let xa = game.budget_low();
    let xb = game.budget_high();
    let sums = OmegaSums::at_gamma(game, gamma);
    let residual = sums.residual(gamma, xa, xb);
    if residual.abs() > RESIDUAL_TOLERANCE {
        return Err(Error::NotARoot {
            gamma,
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }

    let lambda_a = gamma * gamma / (2.0 * xb) * sums.strong_bb_a + sums.weak_a / (2.0 * xb);
    let lambda_b = sums.strong_b / (2.0 * xa) + sums.weak_aa_b / (2.0 * gamma * gamma * xa);
    if !(lambda_a > 0.0 && lambda_b > 0.0) {
        return Err(Error::NumericalFailure(format!(
            "non-positive multipliers at gamma = {gamma}"
        )));
    }
    // the cross-multiplied residual can vanish spuriously near zero; a
    // genuine root also satisfies gamma = lambda_a / lambda_b
    if (gamma - lambda_a / lambda_b).abs() > 1e-9 * gamma {
        return Err(Error::NotARoot {
            gamma,
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }

    let va = game.norm_low();
    let vb = game.norm_high();
    let omega_a = (0..game.n()).filter(|&i| va[i] / vb[i] > gamma).collect();

    Ok(GammaSolution {
        gamma,
        lambda_a,
        lambda_b,
        omega_a,
        residual: residual.abs(),
    })
}

/// Box bounds on `gamma` and the multipliers for any game whose values lie
/// in `bounds` and whose budgets are `budget_a <= budget_b`.
pub fn parameter_bounds(
    bounds: ValueBounds,
    budget_a: f64,
    budget_b: f64,
) -> Result<ParameterBounds> {
    if !(budget_a > 0.0 && budget_a <= budget_b && budget_b.is_finite()) {
        return Err(Error::InvalidGame(format!(
            "budgets must satisfy 0 < budget_a <= budget_b, got {budget_a}, {budget_b}"
        )));
    }
    let budget_ratio = budget_b / budget_a;
    let down = bounds.w_low / bounds.w_high;
    let up = bounds.w_high / bounds.w_low;

    let gamma_low = (budget_ratio * down.powi(4)).min(down * down);
    let gamma_high = (budget_ratio * up.powi(4)).max(up * up);

    let lambda_low = (gamma_low * gamma_low / (2.0 * budget_b))
        .min(1.0 / (2.0 * budget_b))
        .min(1.0 / (2.0 * budget_a))
        .min(1.0 / (2.0 * gamma_high * gamma_high * budget_a))
        * down.powi(3);
    let lambda_high = (gamma_high * gamma_high / (2.0 * budget_b))
        .max(1.0 / (2.0 * budget_b))
        .max(1.0 / (2.0 * budget_a))
        .max(1.0 / (2.0 * gamma_low * gamma_low * budget_a))
        * up.powi(3);

    Ok(ParameterBounds {
        gamma_low,
        gamma_high,
        lambda_low,
        lambda_high,
    })
}

impl ParameterBounds {
    /// Inclusive containment with a small relative slack for round-off.
    pub fn contains(&self, sol: &GammaSolution) -> bool {
        let slack = 1e-12;
        let in_range = |x: f64, lo: f64, hi: f64| {
            x >= lo * (1.0 - slack) - f64::MIN_POSITIVE && x <= hi * (1.0 + slack)
        };
        in_range(sol.gamma, self.gamma_low, self.gamma_high)
            && in_range(sol.lambda_a, self.lambda_low, self.lambda_high)
            && in_range(sol.lambda_b, self.lambda_low, self.lambda_high)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameSpec;

    fn game(xa: f64, xb: f64, wa: Vec<f64>, wb: Vec<f64>) -> ValidatedGame {
        GameSpec {
            n: wa.len(),
            budget_a: xa,
            budget_b: xb,
            values_a: wa,
            values_b: wb,
            alpha: 0.5,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn constant_sum_has_unique_budget_ratio_root() {
        let g = game(1.0, 2.0, vec![1.0, 2.0, 0.5, 1.5], vec![1.0, 2.0, 0.5, 1.5]);
        let sols = solve_gamma(&g).unwrap();
        assert_eq!(sols.len(), 1);
        let s = &sols[0];
        assert!((s.gamma - 2.0).abs() < 1e-13);
        assert!((s.lambda_a - 0.25).abs() < 1e-13);
        assert!((s.lambda_b - 0.125).abs() < 1e-13);
        assert!(s.omega_a.is_empty());
    }

    #[test]
    fn symmetric_game_root_is_one() {
        let g = game(1.0, 1.0, vec![1.0; 4], vec![1.0; 4]);
        let sols = solve_gamma(&g).unwrap();
        assert_eq!(sols.len(), 1);
        let s = &sols[0];
        assert!((s.gamma - 1.0).abs() < 1e-13);
        assert!((s.lambda_a - 0.5).abs() < 1e-13);
        assert!((s.lambda_b - 0.5).abs() < 1e-13);
    }

    #[test]
    fn multipliers_reject_non_roots() {
        let g = game(1.0, 2.0, vec![1.0; 3], vec![1.0; 3]);
        assert!(matches!(
            lagrange_multipliers(&g, 1.5),
            Err(Error::NotARoot { .. })
        ));
        assert!(lagrange_multipliers(&g, 2.0).is_ok());
    }

    #[test]
    fn parameter_bounds_uniform_values() {
        let b = ValueBounds {
            w_low: 1.0,
            w_high: 1.0,
        };
        let pb = parameter_bounds(b, 1.0, 2.0).unwrap();
        assert_eq!(pb.gamma_low, 1.0);
        assert_eq!(pb.gamma_high, 2.0);
        assert_eq!(pb.lambda_low, 0.125);
        assert_eq!(pb.lambda_high, 1.0);
    }

    #[test]
    fn fully_symmetric_bounds_collapse_gamma() {
        let b = ValueBounds {
            w_low: 2.0,
            w_high: 2.0,
        };
        let pb = parameter_bounds(b, 3.0, 3.0).unwrap();
        assert_eq!(pb.gamma_low, 1.0);
        assert_eq!(pb.gamma_high, 1.0);
    }

    #[test]
    fn cubic_solver_recovers_known_roots() {
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let mut roots = cubic_roots(1.0, -6.0, 11.0, -6.0);
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(roots.len(), 3);
        for (r, expect) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - expect).abs() < 1e-9, "{r} vs {expect}");
        }
        // single real root: x^3 + x - 2 = (x-1)(x^2+x+2)
        let roots = cubic_roots(1.0, 0.0, 1.0, -2.0);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() < 1e-12);
        // degenerate: linear
        assert_eq!(cubic_roots(0.0, 0.0, 2.0, -4.0), vec![2.0]);
    }

    #[test]
    fn heterogeneous_game_roots_verify() {
        let g = game(1.0, 1.5, vec![3.0, 1.0, 1.0], vec![1.0, 1.0, 3.0]);
        let sols = solve_gamma(&g).unwrap();
        assert!(!sols.is_empty());
        for s in &sols {
            assert!(s.residual <= RESIDUAL_TOLERANCE);
            assert!((s.gamma - s.lambda_a / s.lambda_b).abs() <= 1e-9 * s.gamma);
            for i in 0..g.n() {
                let strong = g.norm_low()[i] / g.norm_high()[i] > s.gamma;
                assert_eq!(strong, s.omega_a.contains(&i));
            }
        }
        let pb = parameter_bounds(g.bounds(), 1.0, 1.5).unwrap();
        for s in &sols {
            assert!(pb.contains(s));
        }
    }
}
