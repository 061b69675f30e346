//! Experiment configuration: game sources, task parameters, sweep axes.

use std::fs;
use std::path::{Path, PathBuf};

use blotto_core::{ContestSuccessFunction, GameSpec, ValidatedGame};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::families::{GameFamily, generate_game};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Solve,
    Sample,
    Payoff,
    Exploit,
    Delta,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    N,
    R,
    Eps,
    BudgetRatio,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::N => "n",
            SweepAxis::R => "r",
            SweepAxis::Eps => "eps",
            SweepAxis::BudgetRatio => "budget_ratio",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Contest rule selection; `alpha` falls back to the game's tie parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsfSpec {
    pub kind: CsfKindName,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsfKindName {
    Blotto,
    Power,
    Logit,
}

impl CsfSpec {
    pub fn build(&self, game_alpha: f64) -> CliResult<ContestSuccessFunction> {
        let alpha = self.alpha.unwrap_or(game_alpha);
        match self.kind {
            CsfKindName::Blotto => {
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(CliError::Config(format!("alpha = {alpha} outside [0, 1]")));
                }
                Ok(ContestSuccessFunction::blotto(alpha))
            }
            CsfKindName::Power => {
                let r = self
                    .r
                    .ok_or_else(|| CliError::Config("power rule needs r".to_string()))?;
                Ok(ContestSuccessFunction::power(r, alpha)?)
            }
            CsfKindName::Logit => {
                let r = self
                    .r
                    .ok_or_else(|| CliError::Config("logit rule needs r".to_string()))?;
                Ok(ContestSuccessFunction::logit(r, alpha)?)
            }
        }
    }

    pub fn with_r(&self, r: f64) -> CsfSpec {
        CsfSpec {
            kind: self.kind,
            r: Some(r),
            alpha: self.alpha,
        }
    }
}

/// Where the game comes from: an inline spec, a JSON/TOML file, or a
/// generator family paired with a per-game seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameSource {
    File { file: PathBuf },
    Generator { generator: GameFamily },
    Inline(GameSpec),
}

impl GameSource {
    pub fn load(&self, seed: u64) -> CliResult<GameSpec> {
        match self {
            GameSource::File { file } => load_game_file(file),
            GameSource::Generator { generator } => generate_game(generator, seed),
            GameSource::Inline(spec) => Ok(spec.clone()),
        }
    }

    pub fn generator(&self) -> Option<&GameFamily> {
        match self {
            GameSource::Generator { generator } => Some(generator),
            _ => None,
        }
    }
}

fn default_m_samples() -> usize {
    100_000
}

fn default_grid_points() -> usize {
    201
}

fn default_repetitions() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSource,
    pub task: Task,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub csf: Option<CsfSpec>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_m_samples")]
    pub m_samples: usize,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ExperimentConfig = parse_document(path, &text)?;
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> CliResult<()> {
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::Config(
                    "sweep.values must be nonempty".to_string(),
                ));
            }
            match sweep.axis {
                SweepAxis::N | SweepAxis::BudgetRatio => {
                    if self.game.generator().is_none() {
                        return Err(CliError::Config(format!(
                            "axis {} requires a generator game source",
                            sweep.axis.name()
                        )));
                    }
                }
                SweepAxis::R => {
                    if self
                        .csf
                        .as_ref()
                        .is_none_or(|c| c.kind == CsfKindName::Blotto)
                    {
                        return Err(CliError::Config(
                            "axis r requires a power or logit csf".to_string(),
                        ));
                    }
                }
                SweepAxis::Eps => {
                    if self.task != Task::Delta {
                        return Err(CliError::Config(
                            "axis eps requires task = delta".to_string(),
                        ));
                    }
                }
            }
        }
        if let GameSource::File { file } = &self.game
            && !file.exists()
        {
            return Err(CliError::Config(format!(
                "game file {} does not exist",
                file.display()
            )));
        }
        if self.repetitions == 0 {
            return Err(CliError::Config("repetitions must be positive".to_string()));
        }
        Ok(())
    }
}

/// Parses a JSON or TOML document by extension (defaulting to JSON), with
/// errors reporting the offending key path and position.
fn parse_document<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    let is_toml = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path_str = e.path().to_string();
            if path_str == "." {
                CliError::Config(format!("{}: {}", path.display(), e.into_inner()))
            } else {
                CliError::Config(format!(
                    "{}: at key `{path_str}`: {}",
                    path.display(),
                    e.into_inner()
                ))
            }
        })
    }
}

/// Loads and parses a standalone game file (JSON by default, TOML by
/// extension) without validating it.
pub fn load_game_file(path: &Path) -> CliResult<GameSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_document(path, &text)
}

/// Loads and validates, printing validation warnings to stderr.
pub fn load_validated_game(path: &Path) -> CliResult<ValidatedGame> {
    let game = load_game_file(path)?.validate()?;
    for w in game.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(game)
}
