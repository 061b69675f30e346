//! End-to-end behavior of the harness: exit codes, sweep mechanics, record
//! schemas, and scaling.

use std::process::Command;
use std::time::Instant;

use blotto_cli::config::{ExperimentConfig, GameSource, OutputFormat, SweepAxis, SweepSpec, Task};
use blotto_cli::families::GameFamily;
use blotto_cli::records::SweepRecord;
use blotto_cli::sweep::{render_records, run_sweep};
use blotto_core::{ContestSuccessFunction, derive_seed, estimate_exploitability, solve_gamma};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_blotto")
}

fn write_game(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("game.json");
    std::fs::write(
        &path,
        r#"{"n":5,"budget_a":1.0,"budget_b":2.0,"values_a":[1,2,1,0.5,1.5],"values_b":[1,1,2,1,0.5],"alpha":0.5}"#,
    )
    .unwrap();
    path
}

#[test]
fn exit_codes_partition_failures() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path());

    // success
    let ok = Command::new(bin())
        .args(["solve", "--game", game.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));

    // config errors: missing file, invalid game, bad flag value
    let missing = Command::new(bin())
        .args(["solve", "--game", "/no/such/file.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let bad_game = dir.path().join("bad.json");
    std::fs::write(
        &bad_game,
        r#"{"n":3,"budget_a":-1.0,"budget_b":2.0,"values_a":[1,1,1],"values_b":[1,1,1],"alpha":0.5}"#,
    )
    .unwrap();
    let invalid = Command::new(bin())
        .args(["solve", "--game", bad_game.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(invalid.status.code(), Some(2));

    // numerical failure: infeasible allocation in payoff evaluation
    let infeasible = Command::new(bin())
        .args([
            "payoff",
            "--game",
            game.to_str().unwrap(),
            "--xa",
            "5,5,5,5,5",
            "--xb",
            "0,0,0,0,0",
        ])
        .output()
        .unwrap();
    assert_eq!(infeasible.status.code(), Some(3));
}

#[test]
fn single_point_sweep_equals_one_exploit_run() {
    let config = ExperimentConfig {
        game: GameSource::Generator {
            generator: GameFamily::ConstantSumRandom {
                n: 8,
                budget_a: 1.0,
                budget_b: 1.5,
                w_low: 1.0,
                w_high: 2.0,
                alpha: 0.5,
            },
        },
        task: Task::Exploit,
        sweep: None,
        csf: None,
        eps: None,
        m_samples: 2000,
        grid_points: 21,
        repetitions: 1,
        seed: Some(4),
        out: None,
        format: None,
    };
    let outcome = run_sweep(&config, 4, 1, None).unwrap();
    assert_eq!(outcome.records.len(), 1);
    let record = &outcome.records[0];
    assert!(record.error.is_none());

    // reproduce the single cell by hand from the derived seed
    let seed = derive_seed(4, &[0, 0]);
    let spec = blotto_cli::generate_game(
        &GameFamily::ConstantSumRandom {
            n: 8,
            budget_a: 1.0,
            budget_b: 1.5,
            w_low: 1.0,
            w_high: 2.0,
            alpha: 0.5,
        },
        seed,
    )
    .unwrap();
    let game = spec.validate().unwrap();
    let sol = solve_gamma(&game).unwrap().remove(0);
    let rule = ContestSuccessFunction::blotto(0.5);
    let (ra, rb) = estimate_exploitability(&game, &sol, &rule, 2000, 21, seed).unwrap();
    assert_eq!(record.eps_a, Some(ra.epsilon_hat));
    assert_eq!(record.eps_b, Some(rb.epsilon_hat));
}

/// Sharpness sweep in the regime where the rule is close to
/// winner-takes-all: the measured exploitability decreases toward the
/// winner-takes-all level as R grows.
#[test]
fn sharpness_sweep_trends_toward_winner_takes_all() {
    let config = ExperimentConfig {
        game: GameSource::Generator {
            generator: GameFamily::UniformValues {
                n: 20,
                budget_a: 1.0,
                budget_b: 1.5,
                alpha: 0.5,
            },
        },
        task: Task::Sweep,
        sweep: Some(SweepSpec {
            axis: SweepAxis::R,
            values: vec![100.0, 1000.0, 10_000.0],
        }),
        csf: Some(blotto_cli::CsfSpec {
            kind: blotto_cli::CsfKindName::Logit,
            r: Some(100.0),
            alpha: None,
        }),
        eps: Some(0.05),
        m_samples: 10_000,
        grid_points: 51,
        repetitions: 10,
        seed: Some(21),
        out: None,
        format: None,
    };
    let outcome = run_sweep(&config, 21, 0, None).unwrap();
    assert_eq!(outcome.records.len(), 30);
    assert!(outcome.records.iter().all(|r| r.error.is_none()));
    let medians: Vec<f64> = outcome
        .summary
        .points
        .iter()
        .map(|p| p.median_eps_a.unwrap().max(p.median_eps_b.unwrap()))
        .collect();
    assert!(
        medians[0] >= medians[1] && medians[1] >= medians[2],
        "medians not non-increasing in R: {medians:?}"
    );
    // delta accompanies lottery sweeps and shrinks with sharpness
    let deltas: Vec<f64> = outcome
        .summary
        .points
        .iter()
        .map(|p| p.median_delta.unwrap())
        .collect();
    assert!(deltas[0] >= deltas[1] && deltas[1] >= deltas[2]);
}

#[test]
fn rendered_records_validate_against_the_schema() {
    let config = ExperimentConfig {
        game: GameSource::Generator {
            generator: GameFamily::ConstantSumRandom {
                n: 6,
                budget_a: 1.0,
                budget_b: 2.0,
                w_low: 1.0,
                w_high: 2.0,
                alpha: 0.5,
            },
        },
        task: Task::Sweep,
        sweep: Some(SweepSpec {
            axis: SweepAxis::N,
            values: vec![4.0, 6.0],
        }),
        csf: None,
        eps: None,
        m_samples: 500,
        grid_points: 11,
        repetitions: 2,
        seed: Some(3),
        out: None,
        format: None,
    };
    let outcome = run_sweep(&config, 3, 2, None).unwrap();

    let csv = render_records(&outcome.records, OutputFormat::Csv);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), SweepRecord::csv_header());
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 9, "bad row {line}");
        assert_eq!(cells[0], "n");
        cells[1].parse::<f64>().unwrap();
        cells[2].parse::<u64>().unwrap();
        for cell in &cells[3..7] {
            cell.parse::<f64>().unwrap();
        }
        assert!(cells[7].is_empty()); // no rule, no delta column value
        assert_eq!(cells[8], "0"); // canonical ms is pinned
    }

    let json = render_records(&outcome.records, OutputFormat::Json);
    for line in json.lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in [
            "axis", "value", "seed", "eps_a", "eps_b", "ci_a", "ci_b", "delta", "ms",
        ] {
            assert!(value.get(key).is_some(), "missing {key} in {line}");
        }
    }
}

/// Wall clock grows near-linearly in repetitions: quadrupling the cell
/// count must not blow past a generous linearity envelope.
#[test]
fn sweep_scales_near_linearly_in_repetitions() {
    let config = |reps: usize| ExperimentConfig {
        game: GameSource::Generator {
            generator: GameFamily::UniformValues {
                n: 8,
                budget_a: 1.0,
                budget_b: 1.5,
                alpha: 0.5,
            },
        },
        task: Task::Sweep,
        sweep: Some(SweepSpec {
            axis: SweepAxis::N,
            values: vec![8.0],
        }),
        csf: None,
        eps: None,
        m_samples: 5000,
        grid_points: 21,
        repetitions: reps,
        seed: Some(5),
        out: None,
        format: None,
    };

    let warm = Instant::now();
    run_sweep(&config(2), 5, 1, None).unwrap();
    let base = warm.elapsed();

    let started = Instant::now();
    run_sweep(&config(8), 5, 1, None).unwrap();
    let quad = started.elapsed();

    assert!(
        quad.as_secs_f64() <= 10.0 * base.as_secs_f64().max(0.005),
        "8 reps took {quad:?} vs 2 reps {base:?}"
    );
}

#[test]
fn root_index_selects_among_multiple_roots() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("opposed.json");
    std::fs::write(
        &game,
        r#"{"n":2,"budget_a":1.0,"budget_b":1.5,"values_a":[10,1],"values_b":[1,10],"alpha":0.5}"#,
    )
    .unwrap();
    let solve = Command::new(bin())
        .args(["solve", "--game", game.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(solve.status.success());
    let roots = String::from_utf8(solve.stdout).unwrap().lines().count();
    assert_eq!(roots, 3);

    for index in ["0", "1", "2"] {
        let out = Command::new(bin())
            .args([
                "sample",
                "--game",
                game.to_str().unwrap(),
                "--player",
                "a",
                "-m",
                "1",
                "--root-index",
                index,
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "root index {index} failed");
    }
    let out_of_range = Command::new(bin())
        .args([
            "sample",
            "--game",
            game.to_str().unwrap(),
            "--player",
            "a",
            "-m",
            "1",
            "--root-index",
            "3",
        ])
        .output()
        .unwrap();
    assert_eq!(out_of_range.status.code(), Some(2));
}

#[test]
fn sample_csv_header_names_battlefields() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_game(dir.path());
    let out = Command::new(bin())
        .args([
            "sample",
            "--game",
            game.to_str().unwrap(),
            "--player",
            "b",
            "-m",
            "2",
            "--seed",
            "9",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "bf1,bf2,bf3,bf4,bf5");
    assert_eq!(lines.count(), 2);
}

#[test]
fn interrupted_style_partial_has_indices_and_is_removed_on_success() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("cfg.json");
    std::fs::write(
        &config_path,
        r#"{
          "game": {"generator": {"family": "uniform_values", "n": 5, "budget_a": 1.0, "budget_b": 1.5}},
          "task": "sweep",
          "sweep": {"axis": "n", "values": [5]},
          "m_samples": 500,
          "grid_points": 11,
          "repetitions": 2,
          "seed": 1
        }"#,
    )
    .unwrap();
    let out_path = dir.path().join("results.csv");
    let status = Command::new(bin())
        .args([
            "sweep",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out_path.exists());
    assert!(!dir.path().join("results.csv.partial").exists());
}
