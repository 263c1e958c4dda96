//! Command-line harness: single runs, full grids and report regeneration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use curricle::experiments::{
    apply_fast_profile, emit_provenance, emit_results, load_bundle, parse_grid_file,
    parse_seed_list, regenerate_reports, run_grid, CellResult, DatasetKind, ExperimentConfig,
    GridResults, GridSpec, PriorSource, Scenario, ScoringSource,
};
use curricle::nn::OptimizerKind;
use curricle::scheduler::{Mechanism, OrderingKind, StrategyKind};
use curricle::scoring::PriorClassWeights;

#[derive(Parser)]
#[command(
    name = "curricle",
    about = "Curriculum data scheduling experiments for mini-batch training",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one (scenario, strategy, scoring) cell over a seed list.
    Run(RunArgs),
    /// Expand a grid config file into the full strategy x scoring matrix.
    Grid(GridArgs),
    /// Regenerate aggregate.csv and curves.csv from persisted run CSVs.
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset kind: digits | mnist | synth.
    #[arg(long, default_value = "digits")]
    dataset: String,
    /// Directory holding the IDX files.
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
    /// Seed for the train/validation/test partition (digits and synth).
    #[arg(long, default_value_t = 17)]
    split_seed: u64,
    /// Train/validation/test ratios for digits and synth (MNIST uses the
    /// canonical 50000/10000 + official test split).
    #[arg(long, default_value = "0.7,0.15,0.15")]
    split_ratios: String,
}

fn parse_ratios(value: &str) -> curricle::Result<[f64; 3]> {
    let parts: Vec<f64> = value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| curricle::Error::config(format!("bad split ratio '{s}'")))
        })
        .collect::<curricle::Result<_>>()?;
    if parts.len() != 3 {
        return Err(curricle::Error::config(
            "exactly three split ratios are required",
        ));
    }
    Ok([parts[0], parts[1], parts[2]])
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Scenario: full | limited-30 | limited-50 | imbalance | noise.
    #[arg(long, default_value = "full")]
    scenario: String,
    /// Strategy: baseline | reorder | subsets | weights.
    #[arg(long, default_value = "baseline")]
    strategy: String,
    /// Ordering control: curriculum | anti | random.
    #[arg(long, default_value = "curriculum")]
    ordering: String,
    /// Score source: prior | uncertainty.
    #[arg(long, default_value = "prior")]
    scoring: String,
    /// Prior weights: bootstrap:<epochs> or fixture:<w1,w2,..>.
    #[arg(long, default_value = "bootstrap:5")]
    prior: String,

    /// Seed list: `0..10` or `3,5,8`.
    #[arg(long, default_value = "0..10")]
    seeds: String,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 20)]
    patience: usize,
    /// Hidden layer sizes, comma separated.
    #[arg(long, default_value = "256")]
    hidden: String,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Divide the learning rate by this factor every --lr-decay-period
    /// epochs (1.0 disables decay).
    #[arg(long, default_value_t = 10.0)]
    lr_decay_factor: f64,
    #[arg(long, default_value_t = 10)]
    lr_decay_period: usize,
    /// Optimizer: adam | sgd-momentum.
    #[arg(long, default_value = "adam")]
    optimizer: String,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,

    /// Keep probability for training dropout.
    #[arg(long, default_value_t = 0.9)]
    train_keep: f64,
    /// Keep probability during MC uncertainty passes.
    #[arg(long, default_value_t = 0.7)]
    mc_keep: f64,
    /// Interpret --train-keep/--mc-keep as drop rates instead.
    #[arg(long, default_value_t = false)]
    rates_are_drop: bool,
    /// Stochastic forward passes per uncertainty estimate.
    #[arg(long, default_value_t = 10)]
    mc_passes: usize,
    /// Initial subset fraction for the subsets strategy.
    #[arg(long, default_value_t = 0.25)]
    pacing_fraction: f64,
    /// Warm-up epochs before the subsets strategy sees the whole set.
    #[arg(long, default_value_t = 10)]
    warmup_epochs: usize,
    /// Enable score decay in the reorder strategy.
    #[arg(long, default_value_t = false)]
    decay_in_reorder: bool,
    /// Test metrics from `best-validation` checkpoint or the `final-epoch`
    /// model.
    #[arg(long, default_value = "best-validation")]
    model_selection: String,

    /// Smaller profile: at most 5 seeds and 5 MC passes.
    #[arg(long, default_value_t = false)]
    fast: bool,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    /// Grid config file (flat key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Smaller profile: at most 5 seeds and 5 MC passes.
    #[arg(long, default_value_t = false)]
    fast: bool,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory containing runs.csv and epochs.csv.
    #[arg(long, default_value = "results")]
    results: PathBuf,
}

fn parse_prior_arg(value: &str) -> curricle::Result<PriorSource> {
    if let Some(epochs) = value.strip_prefix("bootstrap:") {
        let epochs = epochs.trim().parse().map_err(|_| {
            curricle::Error::config(format!("bad bootstrap epochs in '{value}'"))
        })?;
        return Ok(PriorSource::Bootstrap { epochs });
    }
    if let Some(list) = value.strip_prefix("fixture:") {
        let weights = list
            .split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| {
                    curricle::Error::config(format!("bad fixture weight '{s}'"))
                })
            })
            .collect::<curricle::Result<Vec<f64>>>()?;
        return Ok(PriorSource::Fixture(PriorClassWeights::new(weights)?));
    }
    Err(curricle::Error::config(format!(
        "prior must be 'bootstrap:<epochs>' or 'fixture:<w1,..>', got '{value}'"
    )))
}

fn run_single(args: RunArgs) -> curricle::Result<GridResults> {
    let mut cfg = ExperimentConfig::default();
    cfg.scenario = Scenario::parse(&args.scenario)?;
    let mechanism: Mechanism = args.strategy.parse()?;
    let ordering: OrderingKind = args.ordering.parse()?;
    cfg.strategy = StrategyKind::new(mechanism, ordering);
    cfg.scoring = args.scoring.parse::<ScoringSource>()?;
    cfg.prior = parse_prior_arg(&args.prior)?;
    cfg.hidden = args
        .hidden
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| curricle::Error::config(format!("bad hidden size '{s}'")))
        })
        .collect::<curricle::Result<_>>()?;
    cfg.train.epochs = args.epochs;
    cfg.train.batch_size = args.batch_size;
    cfg.train.patience = args.patience.min(args.epochs);
    cfg.train.initial_lr = args.lr;
    cfg.train.lr_decay_factor = args.lr_decay_factor;
    cfg.train.lr_decay_period = args.lr_decay_period;
    cfg.train.optimizer = args.optimizer.parse::<OptimizerKind>()?;
    cfg.train.momentum = args.momentum;
    cfg.train_keep = if args.rates_are_drop {
        1.0 - args.train_keep
    } else {
        args.train_keep
    };
    cfg.uncertainty.keep_prob = if args.rates_are_drop {
        1.0 - args.mc_keep
    } else {
        args.mc_keep
    };
    cfg.uncertainty.passes = args.mc_passes;
    cfg.pacing_fraction = args.pacing_fraction;
    cfg.warmup_epochs = args.warmup_epochs;
    cfg.decay_in_reorder = args.decay_in_reorder;
    cfg.model_selection = args.model_selection.parse()?;

    let mut seeds = parse_seed_list(&args.seeds)?;
    if args.fast {
        cfg.uncertainty.passes = cfg.uncertainty.passes.min(5);
        seeds.truncate(5);
    }

    let dataset = DatasetKind::parse(&args.data.dataset)?;
    let ratios = parse_ratios(&args.data.split_ratios)?;
    let bundle = curricle::experiments::load_bundle_with_ratios(
        &dataset,
        &args.data.data_dir,
        args.data.split_seed,
        &ratios,
    )?;

    let scenario = cfg.scenario.clone();
    let strategy_label = cfg.strategy.label();
    let scoring_label = if mechanism == Mechanism::Baseline || ordering == OrderingKind::Random {
        "-".to_string()
    } else {
        cfg.scoring.as_str().to_string()
    };

    let (runs, summary) = curricle::experiments::repeat_runs(&bundle, &cfg, &seeds)?;
    for run in &runs {
        println!(
            "seed {:>3}: test error {:6.2}%  macro F1 {:6.2}%  best epoch {:>2}  ({:.1}s){}",
            run.seed,
            run.test.error_rate,
            run.test.macro_f1,
            run.best_epoch,
            run.wall_secs,
            run.failed
                .map_or(String::new(), |e| format!("  FAILED at epoch {e}")),
        );
    }
    println!(
        "{} / {} / {}: mean {:.2}%  median {:.2}%  std {:.2}",
        scenario.label(),
        scoring_label,
        strategy_label,
        summary.mean,
        summary.median,
        summary.std_dev
    );

    let results = GridResults {
        cells: vec![CellResult {
            scenario: scenario.label(),
            scoring: scoring_label,
            strategy: strategy_label,
            summary,
            runs,
        }],
    };
    emit_results(&results, &args.out)?;
    emit_provenance(&bundle, &[scenario], &seeds, &args.out)?;
    println!("results written to {}", args.out.display());
    Ok(results)
}

fn run_grid_command(args: GridArgs) -> curricle::Result<GridResults> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut spec: GridSpec = parse_grid_file(&text)?;
    if args.fast {
        apply_fast_profile(&mut spec);
    }
    let bundle = load_bundle(&spec.dataset, &spec.data_dir, spec.split_seed)?;
    let results = run_grid(&bundle, &spec)?;
    for cell in &results.cells {
        println!(
            "{:<12} {:<12} {:<16} mean {:6.2}%  median {:6.2}%  std {:5.2}",
            cell.scenario, cell.scoring, cell.strategy, cell.summary.mean, cell.summary.median,
            cell.summary.std_dev
        );
    }
    emit_results(&results, &args.out)?;
    emit_provenance(&bundle, &spec.scenarios, &spec.seeds, &args.out)?;
    println!("results written to {}", args.out.display());
    Ok(results)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run_single(args).map(|r| r.any_failed()),
        Command::Grid(args) => run_grid_command(args).map(|r| r.any_failed()),
        Command::Report(args) => regenerate_reports(&args.results).map(|()| false),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: at least one run aborted with a numeric failure");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
