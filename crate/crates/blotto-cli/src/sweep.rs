//! The sweep engine: expands a config into (axis value, repetition) cells,
//! runs them on a worker pool, and writes canonical, byte-reproducible
//! results.
//!
//! Each cell's seed is derived as `hash(root, axis_index, repetition)`
//! under the stream-splitting contract, so any record can be reproduced in
//! isolation from the paper trail. Completed cells are appended to a
//! `.partial` sidecar as they finish (with explicit indices, since
//! completion order depends on scheduling); the final file is written in
//! canonical `(axis index, repetition)` order and the sidecar removed.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use blotto_core::{
    ContestSuccessFunction, delta_bound, derive_seed, estimate_exploitability, solve_gamma,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{CsfSpec, ExperimentConfig, OutputFormat, SweepAxis, Task};
use crate::error::{CliError, CliResult};
use crate::records::{SweepRecord, to_json_line};

/// Default dissimilarity threshold when a sweep computes delta bounds and
/// the config does not pin one.
const DEFAULT_EPS: f64 = 0.05;

struct Cell {
    axis_idx: usize,
    rep: usize,
    value: f64,
    seed: u64,
}

#[derive(Serialize)]
struct PartialLine<'a> {
    axis_idx: usize,
    rep: usize,
    ms_measured: u128,
    record: &'a SweepRecord,
}

/// Per-axis-value medians plus the fitted log-log slope of median epsilon
/// against the axis (battlefield-count sweeps only). Written to stderr,
/// never into the canonical results.
#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub axis: String,
    pub points: Vec<SummaryPoint>,
    pub slope_eps_a: Option<f64>,
    pub slope_eps_b: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SummaryPoint {
    pub value: f64,
    pub median_eps_a: Option<f64>,
    pub median_eps_b: Option<f64>,
    pub median_delta: Option<f64>,
    pub records: usize,
    pub errors: usize,
}

pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
}

/// Runs every cell of the sweep on a dedicated pool of `threads` workers.
pub fn run_sweep(
    config: &ExperimentConfig,
    root_seed: u64,
    threads: usize,
    partial_path: Option<&PathBuf>,
) -> CliResult<SweepOutcome> {
    let sweep = config
        .sweep
        .clone()
        .unwrap_or_else(|| crate::config::SweepSpec {
            axis: SweepAxis::N,
            values: vec![f64::NAN],
        });
    let single_point = config.sweep.is_none();
    if !matches!(config.task, Task::Sweep | Task::Exploit | Task::Delta) {
        return Err(CliError::Config(format!(
            "sweep supports exploit or delta style tasks, got {:?}",
            config.task
        )));
    }

    let mut cells = Vec::new();
    for (axis_idx, &value) in sweep.values.iter().enumerate() {
        for rep in 0..config.repetitions {
            cells.push(Cell {
                axis_idx,
                rep,
                value,
                seed: derive_seed(root_seed, &[axis_idx as u64, rep as u64]),
            });
        }
    }

    let partial = match partial_path {
        Some(path) => Some(Mutex::new(fs::File::create(path).map_err(CliError::Io)?)),
        None => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;

    let mut indexed: Vec<((usize, usize), SweepRecord)> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let started = Instant::now();
                let record = run_cell(config, &sweep.axis, single_point, cell);
                if let Some(lock) = &partial {
                    let line = to_json_line(&PartialLine {
                        axis_idx: cell.axis_idx,
                        rep: cell.rep,
                        ms_measured: started.elapsed().as_millis(),
                        record: &record,
                    });
                    if let Ok(mut f) = lock.lock() {
                        let _ = writeln!(f, "{line}");
                        let _ = f.flush();
                    }
                }
                ((cell.axis_idx, cell.rep), record)
            })
            .collect()
    });

    indexed.sort_by_key(|(key, _)| *key);
    let records: Vec<SweepRecord> = indexed.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(&sweep.axis, &sweep.values, config.repetitions, &records);
    Ok(SweepOutcome { records, summary })
}

fn run_cell(
    config: &ExperimentConfig,
    axis: &SweepAxis,
    single_point: bool,
    cell: &Cell,
) -> SweepRecord {
    let axis_name = if single_point {
        "single".to_string()
    } else {
        axis.name().to_string()
    };
    let mut record = SweepRecord {
        axis: axis_name,
        value: if single_point { 0.0 } else { cell.value },
        seed: cell.seed,
        eps_a: None,
        eps_b: None,
        ci_a: None,
        ci_b: None,
        delta: None,
        ms: 0,
        error: None,
    };
    if let Err(e) = fill_cell(config, axis, single_point, cell, &mut record) {
        record.error = Some(e.to_string());
    }
    record
}

fn fill_cell(
    config: &ExperimentConfig,
    axis: &SweepAxis,
    single_point: bool,
    cell: &Cell,
    record: &mut SweepRecord,
) -> CliResult<()> {
    // apply the axis value to the game source, rule, or threshold
    let mut csf_spec: Option<CsfSpec> = config.csf.clone();
    let mut eps = config.eps;
    let game_spec = if single_point {
        config.game.load(cell.seed)?
    } else {
        match axis {
            SweepAxis::N => {
                let n = cell.value.round();
                if n < 2.0 || (n - cell.value).abs() > 1e-9 {
                    return Err(CliError::Config(format!(
                        "n-axis value {} is not an integer >= 2",
                        cell.value
                    )));
                }
                let family = config.game.generator().unwrap().with_n(n as usize);
                crate::families::generate_game(&family, cell.seed)?
            }
            SweepAxis::BudgetRatio => {
                if cell.value <= 0.0 {
                    return Err(CliError::Config(format!(
                        "budget_ratio {} must be positive",
                        cell.value
                    )));
                }
                let family = config
                    .game
                    .generator()
                    .unwrap()
                    .with_budget_ratio(cell.value);
                crate::families::generate_game(&family, cell.seed)?
            }
            SweepAxis::R => {
                csf_spec = Some(
                    csf_spec
                        .ok_or_else(|| CliError::Config("r-axis needs a csf".to_string()))?
                        .with_r(cell.value),
                );
                config.game.load(cell.seed)?
            }
            SweepAxis::Eps => {
                eps = Some(cell.value);
                config.game.load(cell.seed)?
            }
        }
    };

    let game = game_spec.validate()?;
    let solutions = solve_gamma(&game)?;
    let sol = &solutions[0]; // smallest root; selection documented as arbitrary

    let rule: ContestSuccessFunction = match &csf_spec {
        Some(spec) => spec.build(game.alpha())?,
        None => ContestSuccessFunction::blotto(game.alpha()),
    };

    match config.task {
        Task::Delta => {
            let bound = delta_bound(&game, sol, &rule, eps.unwrap_or(DEFAULT_EPS))?;
            record.delta = Some(bound.delta);
        }
        _ => {
            let (ra, rb) = estimate_exploitability(
                &game,
                sol,
                &rule,
                config.m_samples,
                config.grid_points,
                cell.seed,
            )?;
            record.eps_a = Some(ra.epsilon_hat);
            record.eps_b = Some(rb.epsilon_hat);
            record.ci_a = Some(ra.ci_halfwidth / game.total_of(blotto_core::Player::A));
            record.ci_b = Some(rb.ci_halfwidth / game.total_of(blotto_core::Player::B));
            if !rule.is_blotto() {
                let bound = delta_bound(&game, sol, &rule, eps.unwrap_or(DEFAULT_EPS))?;
                record.delta = Some(bound.delta);
            }
        }
    }
    Ok(())
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(values[values.len() / 2])
}

fn summarize(
    axis: &SweepAxis,
    values: &[f64],
    repetitions: usize,
    records: &[SweepRecord],
) -> SweepSummary {
    let mut points = Vec::with_capacity(values.len());
    for (axis_idx, &value) in values.iter().enumerate() {
        let chunk = &records[axis_idx * repetitions..(axis_idx + 1) * repetitions];
        let mut eps_a: Vec<f64> = chunk.iter().filter_map(|r| r.eps_a).collect();
        let mut eps_b: Vec<f64> = chunk.iter().filter_map(|r| r.eps_b).collect();
        let mut delta: Vec<f64> = chunk.iter().filter_map(|r| r.delta).collect();
        points.push(SummaryPoint {
            value,
            median_eps_a: median(&mut eps_a),
            median_eps_b: median(&mut eps_b),
            median_delta: median(&mut delta),
            records: chunk.len(),
            errors: chunk.iter().filter(|r| r.error.is_some()).count(),
        });
    }

    let slope = |pick: &dyn Fn(&SummaryPoint) -> Option<f64>| -> Option<f64> {
        if !matches!(axis, SweepAxis::N) {
            return None;
        }
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter_map(|p| pick(p).map(|e| (p.value.ln(), e.max(1e-300).ln())))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let var: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        (var > 0.0).then(|| cov / var)
    };

    SweepSummary {
        axis: axis.name().to_string(),
        slope_eps_a: slope(&|p: &SummaryPoint| p.median_eps_a),
        slope_eps_b: slope(&|p: &SummaryPoint| p.median_eps_b),
        points,
    }
}

/// Renders the canonical results document (CSV with the pinned header, or
/// one JSON object per line).
pub fn render_records(records: &[SweepRecord], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str(SweepRecord::csv_header());
            out.push('\n');
            for r in records {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
        }
        OutputFormat::Json => {
            for r in records {
                out.push_str(&to_json_line(r));
                out.push('\n');
            }
        }
    }
    out
}
