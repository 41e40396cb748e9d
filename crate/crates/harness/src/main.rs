use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mvpg::optimizers::{finite_sample_bound, BoundInputs};
use mvpg_harness::oracle_check::oracle_check;
use mvpg_harness::{export, run_experiment, ExperimentConfig, Format, HarnessError};

#[derive(Parser)]
#[command(name = "mvpg", version, about = "Mean-variance policy search experiments")]
struct Cli {
    /// Replace the configured seed list with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for result files.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Both)]
    format: OutFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
    Both,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
            OutFormat::Both => Format::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate the first λ of the grid.
    Run { config: PathBuf },
    /// Train and evaluate every (λ, seed) cell of the grid.
    Sweep { config: PathBuf },
    /// Compare sampled estimators with exact enumeration on a chain MDP.
    OracleCheck { config: PathBuf },
    /// Evaluate the finite-sample bound for constant stepsizes.
    Bound {
        #[arg(long = "L")]
        lipschitz: f64,
        #[arg(long = "G")]
        grad_bound: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long = "A")]
        bias_const: f64,
        /// Largest stepsize.
        #[arg(long)]
        beta: f64,
        /// Smallest stepsize; defaults to --beta.
        #[arg(long)]
        beta_min: Option<f64>,
        #[arg(long = "N")]
        episodes: u64,
        #[arg(long)]
        fgap: f64,
        #[arg(long, default_value_t = 2)]
        blocks: u32,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    Ok(cfg)
}

fn sweep(cfg: &ExperimentConfig, cli: &Cli) -> Result<ExitCode, HarnessError> {
    let results = run_experiment(cfg)?;
    for path in export(&results, &cli.out, cli.format.into())? {
        println!("wrote {}", path.display());
    }
    for row in &results.summary {
        println!(
            "{} {} lambda={} runs={} diverged={} eval_mean={} eval_std={}",
            row.env,
            row.algo,
            row.lambda,
            row.runs,
            row.diverged,
            row.eval_mean.map_or("NaN".into(), |v| format!("{v:.6}")),
            row.eval_std.map_or("NaN".into(), |v| format!("{v:.6}")),
        );
    }
    Ok(if results.any_diverged() {
        eprintln!("at least one run diverged");
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn execute(cli: &Cli) -> Result<ExitCode, HarnessError> {
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = load(config, cli.seed)?;
            cfg.lambda_grid.truncate(1);
            cfg.seeds.truncate(1);
            sweep(&cfg, cli)
        }
        Command::Sweep { config } => sweep(&load(config, cli.seed)?, cli),
        Command::OracleCheck { config } => {
            let report = oracle_check(&load(config, cli.seed)?)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| HarnessError::Serialize(e.to_string()))?;
            println!("{text}");
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("oracle check failed");
                ExitCode::from(2)
            })
        }
        Command::Bound {
            lipschitz,
            grad_bound,
            sigma,
            bias_const,
            beta,
            beta_min,
            episodes,
            fgap,
            blocks,
        } => {
            let inputs = BoundInputs {
                lipschitz: *lipschitz,
                grad_bound: *grad_bound,
                variance_bound: *sigma,
                bias_const: *bias_const,
                beta_max: *beta,
                beta_min: beta_min.unwrap_or(*beta),
                n_episodes: *episodes,
                f_gap: *fgap,
                blocks: *blocks,
            };
            let value = finite_sample_bound(&inputs).map_err(|e| HarnessError::Config(e.to_string()))?;
            match cli.format {
                OutFormat::Json => println!("{}", serde_json::json!({ "inputs": inputs, "bound": value })),
                _ => println!("{value:.16e}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
