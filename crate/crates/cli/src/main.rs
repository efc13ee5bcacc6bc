use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use causalqa_cli::{cmd_ask, cmd_bench, cmd_datagen, cmd_eval, parse_tasks, CliError, RunConfig, BENCH_FILE, DEFAULT_ROWS, DEFAULT_SEED};
use causalqa_core::datagen::{GenSpec, DEFAULT_P_MASK};
use causalqa_core::engine::pc::DEFAULT_ALPHA;
use clap::{Parser, Subcommand};

/// Answer causal questions about tabular data, and generate and score the
/// synthetic benchmarks used to test that pipeline.
///
/// The optional LLM endpoint reads its bearer token from the
/// CAUSALQA_LLM_TOKEN environment variable.
#[derive(Parser, Debug)]
#[command(name = "causalqa", version)]
struct Cli {
    /// Root seed; every random stage derives its own stream from it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Significance level of the PC algorithm's independence tests.
    #[arg(long, global = true, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Rows per generated table.
    #[arg(long, global = true, default_value_t = DEFAULT_ROWS)]
    n: usize,
    /// Comma-separated tasks to include (CGL, ATE, HTE, MA, OPO).
    #[arg(long, global = true)]
    tasks: Option<String>,
    /// Print the parsed query and the raw estimator output.
    #[arg(long, global = true)]
    trace: bool,
    /// Emit a JSON envelope {intent, method, result, interpretation}.
    #[arg(long, global = true)]
    json: bool,
    /// HTTP endpoint of an LLM used for parsing and narration.
    #[arg(long, global = true)]
    llm_endpoint: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Answer a question about a CSV file.
    Ask {
        question: String,
        #[arg(long)]
        data: PathBuf,
    },
    /// Generate a synthetic table and its golden-label sidecar.
    Datagen {
        #[arg(long)]
        task: String,
        /// Nodes (CGL) or covariates (ATE, HTE, OPO).
        #[arg(long, default_value_t = 3)]
        j: usize,
        #[arg(long, default_value_t = DEFAULT_P_MASK)]
        p_mask: f64,
        #[arg(long, default_value_t = 1)]
        stages: usize,
        /// Fixed mediator coefficient for MA.
        #[arg(long, allow_negative_numbers = true)]
        beta_m: Option<f64>,
    },
    /// Write the question bench and the interpretation bench.
    Bench {
        /// Questions per task.
        #[arg(long)]
        per_task: Option<usize>,
    },
    /// Score the full pipeline over a question bench.
    Eval {
        /// Bench file; defaults to bench.jsonl in --out.
        #[arg(long)]
        bench: Option<PathBuf>,
        /// Cases per task.
        #[arg(long)]
        per_task: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig {
        seed: cli.seed,
        alpha: cli.alpha,
        n: cli.n,
        llm_endpoint: cli.llm_endpoint,
        out: cli.out,
        trace: cli.trace,
        json: cli.json,
        ..RunConfig::default()
    };
    if let Some(t) = &cli.tasks {
        cfg.tasks = parse_tasks(t)?;
    }
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Ask { question, data } => cmd_ask(&question, &data, &cfg, &mut stdout),
        Command::Datagen { task, j, p_mask, stages, beta_m } => {
            let task = match parse_tasks(&task)?.as_slice() {
                [t] => *t,
                _ => return Err(CliError::BadParams("--task takes exactly one task".into())),
            };
            let spec = GenSpec { j, n: cfg.n, p_mask, stages, beta_m };
            cmd_datagen(task, &spec, cfg.seed, &cfg.out, &mut stdout).map(|_| ())
        }
        Command::Bench { per_task } => {
            cfg.per_task = per_task;
            cmd_bench(&cfg, &mut stdout).map(|_| ())
        }
        Command::Eval { bench, per_task } => {
            cfg.per_task = per_task;
            let bench = bench.unwrap_or_else(|| cfg.out.join(BENCH_FILE));
            cmd_eval(&bench, &cfg, &mut stdout).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
