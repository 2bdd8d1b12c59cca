mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::CliError;

/// Abstaining classifiers from confidence scores.
#[derive(Debug, Parser)]
#[command(name = "moba", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scores CSV (`id,label,score`).
    #[arg(long)]
    scores: PathBuf,
    /// Seed for the 60/20/20 split and the optimizer.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct OptimizerArgs {
    #[arg(long, default_value_t = 20)]
    popsize: usize,
    #[arg(long, default_value_t = 100)]
    gensize: usize,
    /// Crossover probability.
    #[arg(long, default_value_t = 0.9)]
    pc: f64,
    /// Per-variable mutation probability.
    #[arg(long, default_value_t = 0.5)]
    pm: f64,
    #[arg(long = "eta-c", default_value_t = 20.0)]
    eta_c: f64,
    #[arg(long = "eta-m", default_value_t = 20.0)]
    eta_m: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineModel {
    Ba,
    Tortorella,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SelectMode {
    MinCost,
    BestMetric,
}

#[derive(Debug, Clone, Args)]
struct CostArgs {
    #[arg(long, allow_hyphen_values = true)]
    ctp: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ctn: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    cfp: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    cfn: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    crp: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    crn: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search the Pareto set of threshold pairs under per-class reject caps.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        pmax: f64,
        #[arg(long, default_value_t = 0.1)]
        nmax: f64,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Run one of the comparison models on the validation split.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        model: BaselineModel,
        /// Overall reject cap (ba).
        #[arg(long)]
        kmax: Option<f64>,
        #[command(flatten)]
        costs: CostArgs,
    },
    /// Count lower / higher / identical test costs against the hull baseline.
    CompareCosts {
        #[command(flatten)]
        common: Common,
        #[arg(long = "cost-model", default_value = "cm1")]
        cost_model: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Draw CTP and CTN from one sample.
        #[arg(long)]
        joint_correct: bool,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Performance-rejection curves over reject levels 0.01..0.29.
    Curves {
        #[command(flatten)]
        common: Common,
        /// Metric used to pick the optimizer's solution at each level.
        #[arg(long, default_value = "auc")]
        metric: String,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Pick one solution from a Pareto JSON file.
    Select {
        #[arg(long)]
        pareto: PathBuf,
        #[arg(long, value_enum)]
        mode: SelectMode,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        costs: CostArgs,
        /// Positive-class prior; defaults to the file's validation counts.
        #[arg(long)]
        ppos: Option<f64>,
        #[arg(long, default_value = "auc")]
        metric: String,
        /// Overall reject cap.
        #[arg(long)]
        cap: Option<f64>,
        /// Positive-class reject cap.
        #[arg(long)]
        pcap: Option<f64>,
        /// Negative-class reject cap.
        #[arg(long)]
        ncap: Option<f64>,
    },
    /// Write a synthetic two-Gaussian scores CSV.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 268)]
        n_pos: usize,
        #[arg(long, default_value_t = 500)]
        n_neg: usize,
        #[arg(long, default_value_t = 0.85, allow_hyphen_values = true)]
        mu_pos: f64,
        #[arg(long, default_value_t = -0.85, allow_hyphen_values = true)]
        mu_neg: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Optimize {
            common,
            pmax,
            nmax,
            opt,
        } => commands::optimize(&common, pmax, nmax, &opt),
        Command::Baseline {
            common,
            model,
            kmax,
            costs,
        } => commands::baseline(&common, model, kmax, &costs),
        Command::CompareCosts {
            common,
            cost_model,
            trials,
            joint_correct,
            opt,
        } => commands::compare_costs(&common, &cost_model, trials, joint_correct, &opt),
        Command::Curves {
            common,
            metric,
            opt,
        } => commands::curves(&common, &metric, &opt),
        Command::Select {
            pareto,
            mode,
            out,
            costs,
            ppos,
            metric,
            cap,
            pcap,
            ncap,
        } => commands::select(&commands::SelectArgs {
            pareto,
            mode,
            out,
            costs,
            ppos,
            metric,
            cap,
            pcap,
            ncap,
        }),
        Command::Synth {
            out,
            n_pos,
            n_neg,
            mu_pos,
            mu_neg,
            sigma,
            seed,
        } => commands::synth(&out, n_pos, n_neg, mu_pos, mu_neg, sigma, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
