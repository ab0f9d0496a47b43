mod fit;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use bayes_eval::evaluation::tll_from_log_densities;
use bayes_eval::experiments::emit_results;
use bayes_eval::{
    rmse_with_ci, run_experiment, Dataset, DgpSpec, Error, ExperimentConfig, ExperimentId, MetricRecord, OutputFormat,
};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::fit::FitFile;

const THREADS_VAR: &str = "BAYES_EVAL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "bayes-eval", version, about = "Seeded experiments on test log-likelihood, posterior approximation and RMSE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment and write its result table.
    Run {
        #[arg(long)]
        experiment: ExperimentId,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        n_train: Option<usize>,
        #[arg(long)]
        n_test: Option<usize>,
        /// JSON experiment config; explicit flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Draw a dataset from a data-generating process.
    Generate {
        #[arg(long)]
        dgp: DgpSpec,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `.csv` writes CSV, anything else JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a fit file on a test dataset and print a metric record.
    Eval {
        #[arg(long, value_enum)]
        metric: Metric,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Print the experiment ids.
    List,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Metric {
    Tll,
    Rmse,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return usage(&first_line(&e.to_string())),
    };
    if let Err(reason) = configure_threads() {
        return usage(&reason);
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(reason)) => usage(&reason),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn usage(reason: &str) -> ExitCode {
    eprintln!("{}", reason.trim());
    ExitCode::from(1)
}

fn first_line(msg: &str) -> String {
    msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error").to_string()
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("error: {THREADS_VAR} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("error: {e}"))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::List => {
            for id in ExperimentId::ALL {
                println!("{id}");
            }
        }
        Command::Run {
            experiment,
            seed,
            out,
            format,
            n_train,
            n_test,
            config,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| Error::Io { path, source: e })?;
                    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("error: bad config: {e}")))?
                }
                None => ExperimentConfig::new(experiment, seed),
            };
            cfg.experiment = experiment;
            cfg.seed = seed;
            cfg.n_train = n_train.or(cfg.n_train);
            cfg.n_test = n_test.or(cfg.n_test);
            cfg.validate().map_err(|e| Failure::Usage(format!("error: {e}")))?;
            let rows = run_experiment(&cfg)?;
            emit_results(&rows, &out, format)?;
        }
        Command::Generate { dgp, n, seed, out } => {
            if n == 0 {
                return Err(Failure::Usage("error: --n must be >= 1".into()));
            }
            dgp.generate(n, seed)?.save(&out)?;
        }
        Command::Eval { metric, pred, test } => {
            let forecaster = FitFile::load(&pred)?.into_forecaster()?;
            let test = Dataset::load(&test)?;
            let record = match metric {
                Metric::Tll => {
                    let values = test
                        .xs()
                        .par_iter()
                        .zip(test.ys().par_iter())
                        .map(|(&x, &y)| forecaster.log_density(y, x))
                        .collect::<Result<Vec<f64>, Error>>()?;
                    MetricRecord::from(&tll_from_log_densities(&values)?)
                }
                Metric::Rmse => {
                    let preds = test
                        .xs()
                        .iter()
                        .map(|&x| forecaster.point(x))
                        .collect::<Result<Vec<f64>, Error>>()?;
                    MetricRecord::from(&rmse_with_ci(&preds, test.ys())?)
                }
            };
            println!("{}", serde_json::to_string(&record).map_err(Error::from)?);
        }
    }
    Ok(())
}
