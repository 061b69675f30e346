//! Best-response verification: dynamic program vs exhaustive enumeration,
//! the deviation-payoff inequality, and grid refinement behavior.

mod common;

use blotto_core::{
    Allocation, ContestSuccessFunction, EmpiricalMarginals, Player, RandomStream,
    analytic_br_value, best_response_over_table, estimate_exploitability, solve_gamma,
    uniform_type_marginals,
};
use blotto_core::{OpponentLaw, win_gain_table};
use common::{random_constant_sum, random_game, uniform_in};

/// DP equals brute force exactly on every instance small enough to
/// enumerate: random opponent samples, random weights, grids up to 12.
#[test]
fn dp_matches_exhaustive_enumeration() {
    let mut rng = RandomStream::from_seed(606);
    for trial in 0..100 {
        let n = 2 + (rng.next_u64() as usize) % 3; // 2..=4
        let grid_points = 3 + (rng.next_u64() as usize) % 10; // 3..=12
        let budget = uniform_in(&mut rng, 0.5, 3.0);
        let weights: Vec<f64> = (0..n).map(|_| uniform_in(&mut rng, 0.2, 3.0)).collect();
        let alpha_term = rng.next_f64();

        // opponent: a handful of random draws, some exactly on the grid to
        // exercise the tie term
        let m = 1 + (rng.next_u64() as usize) % 6;
        let draws: Vec<Allocation> = (0..m)
            .map(|_| {
                let amounts: Vec<f64> = (0..n)
                    .map(|_| {
                        if rng.next_f64() < 0.4 {
                            let k = (rng.next_u64() as usize) % grid_points;
                            budget * (k as f64 / (grid_points - 1) as f64)
                        } else {
                            uniform_in(&mut rng, 0.0, budget / n as f64)
                        }
                    })
                    .collect();
                Allocation::new(amounts).unwrap()
            })
            .collect();
        let emp = EmpiricalMarginals::from_allocations(&draws, budget).unwrap();
        let laws: Vec<_> = (0..n).map(|i| emp.law(i)).collect();
        let refs: Vec<&dyn OpponentLaw> = laws.iter().map(|l| l as &dyn OpponentLaw).collect();

        let gain = win_gain_table(&refs, budget, grid_points, alpha_term).unwrap();
        let (brute_alloc, brute_value) =
            blotto_core::oracle::exhaustive_best_response(&weights, &gain, grid_points - 1);
        let dp = best_response_over_table(&weights, &gain, budget, grid_points).unwrap();

        assert_eq!(dp.value, brute_value, "trial {trial}");
        let brute_amounts: Vec<f64> = brute_alloc
            .iter()
            .map(|&g| budget * (g as f64 / (grid_points - 1) as f64))
            .collect();
        assert_eq!(
            dp.allocation.amounts(),
            brute_amounts.as_slice(),
            "trial {trial}"
        );
    }
}

/// No pure strategy's deviation payoff against the analytic marginals
/// exceeds the closed-form optimum.
#[test]
fn deviation_payoffs_are_capped_by_the_analytic_value() {
    let mut rng = RandomStream::from_seed(33);
    for _ in 0..10 {
        let game = random_game(&mut rng, 3, 10, 5.0, 3.0);
        for sol in solve_gamma(&game).unwrap() {
            let marginals = uniform_type_marginals(&game, &sol).unwrap();
            for player in [Player::A, Player::B] {
                let cap = analytic_br_value(&game, &sol, player).unwrap();
                let opp = marginals.for_player(&game, player.opponent());
                let values = game.values_of(player);
                let budget = game.budget_of(player);
                for _ in 0..1000 {
                    // random feasible pure strategy
                    let raw: Vec<f64> = (0..game.n()).map(|_| rng.next_f64()).collect();
                    let scale = budget * rng.next_f64() / raw.iter().sum::<f64>();
                    let payoff: f64 = raw
                        .iter()
                        .zip(values)
                        .zip(opp)
                        .map(|((x, w), law)| w * law.cdf(x * scale))
                        .sum();
                    assert!(
                        payoff <= cap + 1e-9,
                        "deviation payoff {payoff} beats analytic cap {cap}"
                    );
                }
            }
        }
    }
}

/// On nested grids the DP value against the analytic marginals climbs
/// monotonically toward the analytic optimum, getting within 1% on a fine
/// grid; dropping the tie term keeps it capped by the optimum.
#[test]
fn grid_refinement_climbs_to_the_analytic_value() {
    let mut rng = RandomStream::from_seed(77);
    for _ in 0..5 {
        let game = random_game(&mut rng, 3, 8, 3.0, 2.5);
        let sol = solve_gamma(&game).unwrap().remove(0);
        let marginals = uniform_type_marginals(&game, &sol).unwrap();
        for player in [Player::A, Player::B] {
            let analytic = analytic_br_value(&game, &sol, player).unwrap();
            let opp = marginals.for_player(&game, player.opponent());
            let refs: Vec<&dyn OpponentLaw> = opp.iter().map(|d| d as &dyn OpponentLaw).collect();
            let mut last = f64::NEG_INFINITY;
            for grid_points in [26usize, 51, 101, 201] {
                let gain = win_gain_table(&refs, game.budget_of(player), grid_points, 0.0).unwrap();
                let br = best_response_over_table(
                    game.values_of(player),
                    &gain,
                    game.budget_of(player),
                    grid_points,
                )
                .unwrap();
                assert!(
                    br.value >= last - 1e-12,
                    "refinement dropped: {} after {last}",
                    br.value
                );
                assert!(
                    br.value <= analytic + 1e-9,
                    "grid value {} beats analytic {analytic}",
                    br.value
                );
                last = br.value;
            }
            assert!(
                last >= analytic * 0.99,
                "fine grid value {last} not within 1% of {analytic}"
            );
        }
    }
}

/// Constant-sum profile: paired estimates split the pot exactly, and the
/// opponent's best response caps the loss at the reported exploitability.
#[test]
fn constant_sum_best_response_caps_the_loss() {
    let mut rng = RandomStream::from_seed(404);
    let game = random_constant_sum(&mut rng, 20, 20, 3.0, 2.0);
    let sol = solve_gamma(&game).unwrap().remove(0);
    let rule = ContestSuccessFunction::blotto(0.5);
    let (ra, rb) = estimate_exploitability(&game, &sol, &rule, 20_000, 101, 15).unwrap();
    let w = game.total_of(Player::A);
    assert!((ra.iu_value + rb.iu_value - w).abs() <= 1e-9 * w);
    // guaranteed payoff identity: what B's best response leaves A is
    // exactly A's profile payoff minus B's exploitability gain
    let guaranteed_a = w - rb.br_value;
    assert!((guaranteed_a - (ra.iu_value - rb.epsilon_hat * w)).abs() <= 1e-9 * w);
    assert!(ra.epsilon_hat < 0.1);
    assert!(rb.epsilon_hat < 0.1);
}
