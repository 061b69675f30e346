//! Slow reference implementations used to cross-check the fast paths.
//!
//! These deliberately avoid the closed-form machinery of the main solver:
//! roots are found by dense scanning and bisection of the equation residual,
//! and grid best responses by exhausting every feasible grid allocation.

use crate::game::ValidatedGame;
use crate::gamma::{OmegaSums, parameter_bounds};

/// Scan step for the residual sign search.
const SCAN_STEP: f64 = 1e-5;

/// Cap on scan points per continuity interval; wide parameter boxes would
/// otherwise make the literal step astronomically slow.
const MAX_POINTS_PER_INTERVAL: usize = 200_000;

const BISECT_ITERATIONS: usize = 200;

/// All positive roots of the incentive-balance equation, found by scanning
/// the residual over the parameter box.
///
/// The residual is piecewise continuous with breaks only at the distinct
/// value ratios, so each continuity interval is scanned separately: sign
/// changes are bracketed and bisected to about 1e-12, and interval left
/// endpoints are accepted directly when the residual vanishes there (the
/// strong set is defined with a strict inequality, so a boundary root
/// belongs to the interval on its right).
pub fn bisection_roots(game: &ValidatedGame) -> Vec<f64> {
    let xa = game.budget_low();
    let xb = game.budget_high();
    let bounds = parameter_bounds(game.bounds(), xa, xb).expect("validated game");
    let lo = bounds.gamma_low * (1.0 - 1e-9);
    let hi = bounds.gamma_high * (1.0 + 1e-9);

    let va = game.norm_low();
    let vb = game.norm_high();
    let mut ratios: Vec<f64> = (0..game.n()).map(|i| va[i] / vb[i]).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ratios.dedup();

    // continuity intervals of the residual inside [lo, hi]
    let mut edges = vec![lo];
    edges.extend(ratios.iter().copied().filter(|r| *r > lo && *r < hi));
    edges.push(hi);

    let mut roots: Vec<f64> = Vec::new();
    for pair in edges.windows(2) {
        let (left, right) = (pair[0], pair[1]);
        if right <= left {
            continue;
        }
        // strong set is constant on [left, right): probe just inside
        let probe = left + 0.25 * (right - left);
        let sums = OmegaSums::at_gamma(game, probe);
        let residual = |g: f64| sums.residual(g, xa, xb);

        let span = right - left;
        let points = ((span / SCAN_STEP).ceil() as usize).clamp(16, MAX_POINTS_PER_INTERVAL);
        let step = span / points as f64;

        let mut prev_x = left;
        let mut prev_r = residual(prev_x);
        if prev_r == 0.0 {
            roots.push(prev_x);
        }
        for k in 1..=points {
            let x = if k == points {
                right
            } else {
                left + step * k as f64
            };
            let r = residual(x);
            if r == 0.0 {
                // exact hit counts only if it is not the right edge, which
                // belongs to the next interval's strong set
                if x < right {
                    roots.push(x);
                }
            } else if prev_r != 0.0 && (prev_r < 0.0) != (r < 0.0) {
                let mut a = prev_x;
                let mut b = x;
                let mut fa = prev_r;
                for _ in 0..BISECT_ITERATIONS {
                    let mid = 0.5 * (a + b);
                    if b - a <= 1e-12 * mid.max(1.0) {
                        break;
                    }
                    let fm = residual(mid);
                    if fm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if (fa < 0.0) == (fm < 0.0) {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                let root = 0.5 * (a + b);
                if root < right {
                    roots.push(root);
                }
            }
            prev_x = x;
            prev_r = r;
        }
    }

    // a boundary ratio can itself be a root of the interval on its right
    for &r in &ratios {
        if r >= lo && r <= hi {
            let sums = OmegaSums::at_gamma(game, r);
            if sums.residual(r, xa, xb).abs() <= 1e-10 {
                roots.push(r);
            }
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.max(*b));
    roots
}

/// Exhaustive grid best response: enumerates every allocation of at most
/// `units` grid units across the battlefields and returns the
/// lexicographically smallest maximizer of `sum(values[i] * gain[i][g_i])`
/// along with its value.
pub fn exhaustive_best_response(
    values: &[f64],
    gain: &[Vec<f64>],
    units: usize,
) -> (Vec<usize>, f64) {
    let n = values.len();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_alloc = vec![0usize; n];
    let mut current = vec![0usize; n];

    // leaf values fold back to front so the float summation order matches
    // the knapsack recurrence exactly
    fn leaf_value(values: &[f64], gain: &[Vec<f64>], current: &[usize]) -> f64 {
        let mut v = 0.0;
        for i in (0..values.len()).rev() {
            v += values[i] * gain[i][current[i]];
        }
        v
    }

    fn recurse(
        i: usize,
        left: usize,
        values: &[f64],
        gain: &[Vec<f64>],
        current: &mut Vec<usize>,
        best_value: &mut f64,
        best_alloc: &mut Vec<usize>,
    ) {
        if i == values.len() {
            let value = leaf_value(values, gain, current);
            if value > *best_value {
                *best_value = value;
                best_alloc.copy_from_slice(current);
            }
            return;
        }
        for g in 0..=left {
            current[i] = g;
            recurse(
                i + 1,
                left - g,
                values,
                gain,
                current,
                best_value,
                best_alloc,
            );
        }
        current[i] = 0;
    }

    recurse(
        0,
        units,
        values,
        gain,
        &mut current,
        &mut best_value,
        &mut best_alloc,
    );
    (best_alloc, best_value)
}
