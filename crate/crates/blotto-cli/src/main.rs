use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use blotto_core::{
    Allocation, ContestSuccessFunction, IUSampler, Player, RandomStream, ValidatedGame,
    delta_bound, estimate_exploitability, solve_gamma, uniform_type_marginals,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use blotto_cli::config::{self, CsfKindName, CsfSpec, ExperimentConfig, OutputFormat};
use blotto_cli::error::{CliError, CliResult};
use blotto_cli::records::{DeltaRecord, ExploitRecord, SolutionRecord, to_json_line};
use blotto_cli::sweep::{render_records, run_sweep};

/// Equilibrium analysis for generalized Colonel Blotto and lottery Blotto
/// games: solve the incentive-balance equation, sample budget-feasible
/// allocations, and measure exploitability.
///
/// When a game has several equation roots, commands that need one default
/// to the smallest (an arbitrary but documented choice); `--root-index`
/// selects another. Exit codes: 0 success, 2 config error, 3 numerical
/// failure.
#[derive(Parser)]
#[command(name = "blotto", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config file (JSON or TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed; overrides the config's seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output path; stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlayerArg {
    A,
    B,
}

impl From<PlayerArg> for Player {
    fn from(p: PlayerArg) -> Player {
        match p {
            PlayerArg::A => Player::A,
            PlayerArg::B => Player::B,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CsfArg {
    Blotto,
    Power,
    Logit,
}

#[derive(Args)]
struct RuleArgs {
    /// Contest rule; defaults to winner-takes-all with the game's alpha
    #[arg(long, value_enum)]
    csf: Option<CsfArg>,

    /// Sharpness exponent for power/logit rules
    #[arg(long)]
    r: Option<f64>,

    /// Tie weight; defaults to the game's alpha
    #[arg(long)]
    alpha: Option<f64>,
}

impl RuleArgs {
    fn spec(&self) -> Option<CsfSpec> {
        self.csf.map(|kind| CsfSpec {
            kind: match kind {
                CsfArg::Blotto => CsfKindName::Blotto,
                CsfArg::Power => CsfKindName::Power,
                CsfArg::Logit => CsfKindName::Logit,
            },
            r: self.r,
            alpha: self.alpha,
        })
    }

    fn build(&self, game_alpha: f64) -> CliResult<ContestSuccessFunction> {
        match self.spec() {
            Some(spec) => spec.build(game_alpha),
            None => Ok(ContestSuccessFunction::blotto(game_alpha)),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Find all positive roots of the incentive-balance equation
    Solve {
        /// Game file (JSON or TOML)
        #[arg(long)]
        game: Option<PathBuf>,
    },
    /// Draw allocations from the sampling strategy (CSV, one row per draw)
    Sample {
        #[arg(long)]
        game: Option<PathBuf>,

        #[arg(long, value_enum)]
        player: PlayerArg,

        /// Number of draws
        #[arg(short, long)]
        m: usize,

        /// Which equation root to use when several exist
        #[arg(long, default_value_t = 0)]
        root_index: usize,
    },
    /// Evaluate a pure strategy profile
    Payoff {
        #[arg(long)]
        game: Option<PathBuf>,

        /// Player A allocation, comma separated
        #[arg(long)]
        xa: String,

        /// Player B allocation, comma separated
        #[arg(long)]
        xb: String,

        #[command(flatten)]
        rule: RuleArgs,
    },
    /// Monte Carlo exploitability of the sampling strategy
    Exploit {
        #[arg(long)]
        game: Option<PathBuf>,

        /// Monte Carlo sample count
        #[arg(short, long)]
        m: Option<usize>,

        /// Best-response budget grid points
        #[arg(long)]
        grid: Option<usize>,

        #[arg(long, default_value_t = 0)]
        root_index: usize,

        #[command(flatten)]
        rule: RuleArgs,
    },
    /// Dissimilarity bound between a rule and winner-takes-all
    Delta {
        #[arg(long)]
        game: Option<PathBuf>,

        /// Dissimilarity threshold, in (0, min(alpha, 1 - alpha))
        #[arg(long)]
        eps: f64,

        #[arg(long, default_value_t = 0)]
        root_index: usize,

        #[command(flatten)]
        rule: RuleArgs,
    },
    /// Run a config-driven sweep over n, R, eps, or the budget ratio
    Sweep {},
    /// Show the equilibrium marginals of a game
    Inspect {
        #[arg(long)]
        game: Option<PathBuf>,

        #[arg(long, default_value_t = 0)]
        root_index: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let config = cli
        .config
        .as_ref()
        .map(|p| ExperimentConfig::from_file(p))
        .transpose()?;

    match &cli.command {
        Command::Sweep {} => run_sweep_command(cli, config.as_ref()),
        other => {
            if cli.threads > 0 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(cli.threads)
                    .build()
                    .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
                pool.install(|| dispatch(cli, config.as_ref(), other))
            } else {
                dispatch(cli, config.as_ref(), other)
            }
        }
    }
}

fn dispatch(cli: &Cli, config: Option<&ExperimentConfig>, command: &Command) -> CliResult<()> {
    match command {
        Command::Solve { game } => {
            let game = resolve_game(cli, config, game)?;
            let solutions = solve_gamma(&game)?;
            let records: Vec<SolutionRecord> = solutions
                .iter()
                .map(|s| SolutionRecord::in_caller_labels(&game, s))
                .collect();
            let mut out = String::new();
            match output_format(cli, config) {
                OutputFormat::Json => {
                    for r in &records {
                        out.push_str(&to_json_line(r));
                        out.push('\n');
                    }
                }
                OutputFormat::Csv => {
                    out.push_str(SolutionRecord::csv_header());
                    out.push('\n');
                    for r in &records {
                        out.push_str(&r.csv_row());
                        out.push('\n');
                    }
                }
            }
            write_output(cli, config, &out)
        }
        Command::Sample {
            game,
            player,
            m,
            root_index,
        } => {
            let game = resolve_game(cli, config, game)?;
            let sol = pick_root(&game, *root_index)?;
            let sampler = IUSampler::new(&game, &sol)?;
            let stream = RandomStream::from_seed(root_seed(cli, config));
            let (_, draws) = sampler.sample_batch((*player).into(), *m, &stream)?;
            let mut out = String::new();
            let header: Vec<String> = (1..=game.n()).map(|i| format!("bf{i}")).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for draw in &draws {
                let row: Vec<String> = draw.amounts().iter().map(|x| x.to_string()).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            write_output(cli, config, &out)
        }
        Command::Payoff { game, xa, xb, rule } => {
            let game = resolve_game(cli, config, game)?;
            let xa = parse_allocation(xa)?;
            let xb = parse_allocation(xb)?;
            let rule = rule.build(game.alpha())?;
            let (pi_a, pi_b) = game.csf_payoff(&rule, &xa, &xb)?;
            let out = match output_format(cli, config) {
                OutputFormat::Json => format!(
                    "{}\n",
                    to_json_line(&serde_json::json!({"pi_a": pi_a, "pi_b": pi_b}))
                ),
                OutputFormat::Csv => format!("pi_a,pi_b\n{pi_a},{pi_b}\n"),
            };
            write_output(cli, config, &out)
        }
        Command::Exploit {
            game,
            m,
            grid,
            root_index,
            rule,
        } => {
            let game = resolve_game(cli, config, game)?;
            let sol = pick_root(&game, *root_index)?;
            let rule = rule.build(game.alpha())?;
            let m = m.or(config.map(|c| c.m_samples)).unwrap_or(100_000);
            let grid = grid.or(config.map(|c| c.grid_points)).unwrap_or(201);
            let seed = root_seed(cli, config);
            let (ra, rb) = estimate_exploitability(&game, &sol, &rule, m, grid, seed)?;
            let (ra, rb) = (
                ExploitRecord::from_report(&ra),
                ExploitRecord::from_report(&rb),
            );
            let out = match output_format(cli, config) {
                OutputFormat::Json => {
                    format!("{}\n", to_json_line(&serde_json::json!({"a": ra, "b": rb})))
                }
                OutputFormat::Csv => format!(
                    "{}\n{}\n{}\n",
                    ExploitRecord::csv_header(),
                    ra.csv_row(),
                    rb.csv_row()
                ),
            };
            write_output(cli, config, &out)
        }
        Command::Delta {
            game,
            eps,
            root_index,
            rule,
        } => {
            let game = resolve_game(cli, config, game)?;
            let sol = pick_root(&game, *root_index)?;
            let rule = rule.build(game.alpha())?;
            let record = DeltaRecord::from_bound(&delta_bound(&game, &sol, &rule, *eps)?);
            let out = match output_format(cli, config) {
                OutputFormat::Json => format!("{}\n", to_json_line(&record)),
                OutputFormat::Csv => {
                    format!("{}\n{}\n", DeltaRecord::csv_header(), record.csv_row())
                }
            };
            write_output(cli, config, &out)
        }
        Command::Inspect { game, root_index } => {
            let game = resolve_game(cli, config, game)?;
            let sol = pick_root(&game, *root_index)?;
            let marginals = uniform_type_marginals(&game, &sol)?;
            let record = serde_json::json!({
                "solution": SolutionRecord::in_caller_labels(&game, &sol),
                "marginals": {
                    "a": marginals.for_player(&game, Player::A),
                    "b": marginals.for_player(&game, Player::B),
                },
            });
            write_output(cli, config, &format!("{}\n", to_json_line(&record)))
        }
        Command::Sweep {} => unreachable!("handled in run"),
    }
}

fn run_sweep_command(cli: &Cli, config: Option<&ExperimentConfig>) -> CliResult<()> {
    let config = config.ok_or_else(|| CliError::Config("sweep requires --config".to_string()))?;
    let seed = root_seed(cli, Some(config));
    let out_path = cli.out.clone().or_else(|| config.out.clone());
    let partial = out_path.as_ref().map(|p| {
        let mut partial = p.as_os_str().to_owned();
        partial.push(".partial");
        PathBuf::from(partial)
    });

    let outcome = run_sweep(config, seed, cli.threads, partial.as_ref())?;
    let format = cli
        .format
        .map(OutputFormat::from)
        .or(config.format)
        .unwrap_or(OutputFormat::Csv);
    let rendered = render_records(&outcome.records, format);

    match &out_path {
        Some(path) => {
            fs::write(path, rendered)?;
            if let Some(partial) = partial {
                let _ = fs::remove_file(partial);
            }
        }
        None => print!("{rendered}"),
    }
    eprintln!(
        "{}",
        serde_json::to_string(&outcome.summary).expect("summary")
    );
    Ok(())
}

fn resolve_game(
    cli: &Cli,
    config: Option<&ExperimentConfig>,
    game_flag: &Option<PathBuf>,
) -> CliResult<ValidatedGame> {
    let spec = match (game_flag, config) {
        (Some(path), _) => config::load_game_file(path)?,
        (None, Some(config)) => config.game.load(root_seed(cli, Some(config)))?,
        (None, None) => {
            return Err(CliError::Config(
                "no game given: pass --game <path> or --config <path>".to_string(),
            ));
        }
    };
    let game = spec.validate()?;
    for w in game.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(game)
}

fn pick_root(game: &ValidatedGame, root_index: usize) -> CliResult<blotto_core::GammaSolution> {
    let mut solutions = solve_gamma(game)?;
    if root_index >= solutions.len() {
        return Err(CliError::Config(format!(
            "root index {root_index} out of range: the equation has {} root(s)",
            solutions.len()
        )));
    }
    Ok(solutions.swap_remove(root_index))
}

fn root_seed(cli: &Cli, config: Option<&ExperimentConfig>) -> u64 {
    cli.seed.or(config.and_then(|c| c.seed)).unwrap_or(0)
}

fn output_format(cli: &Cli, config: Option<&ExperimentConfig>) -> OutputFormat {
    cli.format
        .map(OutputFormat::from)
        .or(config.and_then(|c| c.format))
        .unwrap_or(OutputFormat::Json)
}

fn write_output(cli: &Cli, config: Option<&ExperimentConfig>, content: &str) -> CliResult<()> {
    let path = cli
        .out
        .clone()
        .or_else(|| config.and_then(|c| c.out.clone()));
    match path {
        Some(path) => fs::write(path, content).map_err(CliError::Io),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_allocation(text: &str) -> CliResult<Allocation> {
    let amounts: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let amounts = amounts.map_err(|e| CliError::Config(format!("bad allocation `{text}`: {e}")))?;
    Allocation::new(amounts).map_err(CliError::from)
}
