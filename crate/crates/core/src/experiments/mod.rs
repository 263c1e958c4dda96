//! Experiment harness: scenario construction, full training runs,
//! multi-seed repetition, metrics, significance testing and CSV reports.

mod grid;
mod metrics;
mod report;
mod stats;

pub use grid::{
    apply_fast_profile, load_bundle, load_bundle_with_ratios, parse_grid_file, parse_seed_list,
    run_grid, DatasetKind, GridResults, GridSpec,
};
pub use metrics::{evaluate, metrics_from_confusion, Metrics};
pub use report::{
    emit_provenance, emit_results, regenerate_reports, CellResult, STRATEGY_COLUMNS,
};
pub use stats::{chi_square_sf, summarize, welch_t_test, Summary};

use std::time::Instant;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{
    gradients, init_params, optimizer_step, ClassifierParams, DropoutConfig, TrainConfig,
};
use crate::rng::{fnv1a64, RunStreams};
use crate::scheduler::{
    make_batches, plan_epoch, CurriculumState, InitialSubset, Mechanism, OrderingKind,
    PacingConfig, StrategyKind,
};
use crate::scoring::{
    bootstrap_prior_from_f1, prior_scores, uncertainty_scores, PriorClassWeights, ScoreProvenance,
    ScoreVector, UncertaintyConfig,
};

/// Controlled data scenario applied to the training split of a run.
/// Transforms compose in the order subsample -> imbalance -> corruption.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// The unmodified training split.
    Full,
    /// Stratified subsample to 30% of the training data.
    Limited30,
    /// Stratified subsample to 50% of the training data.
    Limited50,
    /// Classes 1 and 7 reduced to 30% of their samples.
    Imbalance,
    /// 30% of training labels advanced to the next class.
    Noise,
    Custom {
        subsample: Option<f64>,
        minority_classes: Vec<usize>,
        minority_keep: Option<f64>,
        noise: Option<f64>,
    },
}

impl Scenario {
    pub fn label(&self) -> String {
        match self {
            Scenario::Full => "full".to_string(),
            Scenario::Limited30 => "limited-30".to_string(),
            Scenario::Limited50 => "limited-50".to_string(),
            Scenario::Imbalance => "imbalance".to_string(),
            Scenario::Noise => "noise".to_string(),
            Scenario::Custom {
                subsample,
                minority_classes,
                minority_keep,
                noise,
            } => format!(
                "custom(sub={subsample:?},min={minority_classes:?},keep={minority_keep:?},noise={noise:?})"
            ),
        }
    }

    pub fn parse(s: &str) -> Result<Scenario> {
        match s {
            "full" => Ok(Scenario::Full),
            "limited-30" => Ok(Scenario::Limited30),
            "limited-50" => Ok(Scenario::Limited50),
            "imbalance" => Ok(Scenario::Imbalance),
            "noise" => Ok(Scenario::Noise),
            other => Err(Error::config(format!("unknown scenario '{other}'"))),
        }
    }

    /// The minority classes whose F1 the imbalance study tracks.
    pub fn minority_classes(&self) -> Vec<usize> {
        match self {
            Scenario::Imbalance => vec![1, 7],
            Scenario::Custom {
                minority_classes, ..
            } => minority_classes.clone(),
            _ => Vec::new(),
        }
    }

    /// Apply the scenario transforms to a training split. Seeds for the
    /// individual transforms are drawn from the run's data stream.
    pub fn apply(&self, train: &Dataset, streams: &mut RunStreams) -> Result<Dataset> {
        use rand::Rng;
        let (subsample, minority, keep, noise) = match self {
            Scenario::Full => (None, Vec::new(), None, None),
            Scenario::Limited30 => (Some(0.3), Vec::new(), None, None),
            Scenario::Limited50 => (Some(0.5), Vec::new(), None, None),
            Scenario::Imbalance => (None, vec![1, 7], Some(0.3), None),
            Scenario::Noise => (None, Vec::new(), None, Some(0.3)),
            Scenario::Custom {
                subsample,
                minority_classes,
                minority_keep,
                noise,
            } => (
                *subsample,
                minority_classes.clone(),
                *minority_keep,
                *noise,
            ),
        };

        let mut out = train.clone();
        if let Some(fraction) = subsample {
            out = out.subsample_fraction(fraction, streams.data.gen())?;
        }
        if !minority.is_empty() {
            out = out.induce_imbalance(&minority, keep.unwrap_or(0.3), streams.data.gen())?;
        }
        if let Some(fraction) = noise {
            out = out.corrupt_labels(fraction, streams.data.gen())?;
        }
        Ok(out)
    }
}

/// What produces the curriculum scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoringSource {
    Prior,
    Uncertainty,
}

impl ScoringSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScoringSource::Prior => "prior",
            ScoringSource::Uncertainty => "uncertainty",
        }
    }
}

impl std::str::FromStr for ScoringSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prior" => Ok(ScoringSource::Prior),
            "uncertainty" => Ok(ScoringSource::Uncertainty),
            other => Err(Error::config(format!("unknown scoring source '{other}'"))),
        }
    }
}

/// Where prior class weights come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSource {
    /// A fixed per-class weight vector.
    Fixture(PriorClassWeights),
    /// Rank classes by F1 after a short bootstrap training run.
    Bootstrap { epochs: usize },
}

/// Which parameters the test metrics are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSelection {
    /// Restore the checkpoint with the lowest validation error.
    BestValidation,
    /// Keep the parameters as of the last epoch run (the early-stopping
    /// point), without restoring a checkpoint.
    FinalEpoch,
}

impl ModelSelection {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelSelection::BestValidation => "best-validation",
            ModelSelection::FinalEpoch => "final-epoch",
        }
    }
}

impl std::str::FromStr for ModelSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best-validation" | "best" => Ok(ModelSelection::BestValidation),
            "final-epoch" | "final" => Ok(ModelSelection::FinalEpoch),
            other => Err(Error::config(format!("unknown model selection '{other}'"))),
        }
    }
}

/// Everything needed to reproduce one experiment cell.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub strategy: StrategyKind,
    pub scoring: ScoringSource,
    pub prior: PriorSource,
    /// Hidden layer sizes; the input and class dims come from the data.
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    /// Keep probability for training-step dropout.
    pub train_keep: f64,
    pub uncertainty: UncertaintyConfig,
    /// Initial subset fraction for pacing.
    pub pacing_fraction: f64,
    pub warmup_epochs: usize,
    pub decay_divisor: f64,
    /// Run reorder with subset bookkeeping (score decay) enabled.
    pub decay_in_reorder: bool,
    pub model_selection: ModelSelection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: Scenario::Full,
            strategy: StrategyKind::baseline(),
            scoring: ScoringSource::Prior,
            prior: PriorSource::Bootstrap { epochs: 5 },
            hidden: vec![256],
            train: TrainConfig::default(),
            train_keep: 0.9,
            uncertainty: UncertaintyConfig::default(),
            pacing_fraction: 0.25,
            warmup_epochs: 10,
            decay_divisor: crate::scheduler::DEFAULT_DECAY_DIVISOR,
            decay_in_reorder: false,
            model_selection: ModelSelection::BestValidation,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.uncertainty.validate()?;
        DropoutConfig::train(self.train_keep).validate()?;
        if self.hidden.is_empty() {
            return Err(Error::config("at least one hidden layer is required"));
        }
        if !(self.pacing_fraction > 0.0 && self.pacing_fraction <= 1.0) {
            return Err(Error::config("pacing fraction must lie in (0, 1]"));
        }
        if self.warmup_epochs < 1 {
            return Err(Error::config("warm-up epochs must be >= 1"));
        }
        if self.decay_divisor <= 0.0 {
            return Err(Error::config("decay divisor must be positive"));
        }
        Ok(())
    }

    /// Stable hash identifying this configuration (seed-independent).
    pub fn config_hash(&self) -> u64 {
        fnv1a64(self.canonical_string().as_bytes())
    }

    fn canonical_string(&self) -> String {
        let prior = match &self.prior {
            PriorSource::Fixture(w) => format!("fixture{:?}", w.values()),
            PriorSource::Bootstrap { epochs } => format!("bootstrap{epochs}"),
        };
        format!(
            "scenario={};strategy={};scoring={};prior={};hidden={:?};batch={};epochs={};lr={};\
             decay={}x{};opt={};momentum={};patience={};keep={};mc={}x{};refresh={};pace={}@{};\
             divisor={};decay_reorder={}",
            self.scenario.label(),
            self.strategy.label(),
            self.scoring.as_str(),
            prior,
            self.hidden,
            self.train.batch_size,
            self.train.epochs,
            self.train.initial_lr,
            self.train.lr_decay_factor,
            self.train.lr_decay_period,
            self.train.optimizer.as_str(),
            self.train.momentum,
            self.train.patience,
            self.train_keep,
            self.uncertainty.passes,
            self.uncertainty.keep_prob,
            self.uncertainty.refresh_every,
            self.pacing_fraction,
            self.warmup_epochs,
            self.decay_divisor,
            self.decay_in_reorder,
        ) + ";select=" + self.model_selection.as_str()
    }
}

/// Mean loss weight over corrupted and clean samples in the last epoch
/// plan (weights strategy only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightAudit {
    pub corrupted_mean: f64,
    pub clean_mean: f64,
}

/// Outcome of a single (config, seed) training run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub config_hash: u64,
    /// Validation error (%) per completed epoch.
    pub val_error_curve: Vec<f64>,
    /// 1-based epoch whose validation error was best (checkpoint).
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub stopped_early: bool,
    /// Test metrics at the best-validation checkpoint.
    pub test: Metrics,
    /// Epoch at which a numeric abort happened, if any.
    pub failed: Option<usize>,
    pub wall_secs: f64,
    /// Subset size per epoch (equals N outside the subsets strategy).
    pub subset_sizes: Vec<usize>,
    pub weight_audit: Option<WeightAudit>,
}

/// Immutable train/validation/test triple shared by all runs of a grid.
#[derive(Debug, Clone)]
pub struct DataBundle {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

impl DataBundle {
    pub fn new(train: Dataset, validation: Dataset, test: Dataset) -> Result<Self> {
        if train.dim() != validation.dim() || train.dim() != test.dim() {
            return Err(Error::dimension(
                "train/validation/test feature dims differ".to_string(),
            ));
        }
        Ok(DataBundle {
            train,
            validation,
            test,
        })
    }

    /// Split an unpartitioned dataset 70/15/15.
    pub fn from_single(dataset: &Dataset, seed: u64) -> Result<Self> {
        Self::from_single_with_ratios(dataset, seed, &[0.7, 0.15, 0.15])
    }

    /// Split an unpartitioned dataset by explicit train/validation/test
    /// ratios.
    pub fn from_single_with_ratios(
        dataset: &Dataset,
        seed: u64,
        ratios: &[f64; 3],
    ) -> Result<Self> {
        let mut parts = dataset.split(ratios, seed)?;
        let test = parts.pop().unwrap();
        let validation = parts.pop().unwrap();
        let train = parts.pop().unwrap();
        DataBundle::new(train, validation, test)
    }
}

fn initial_scores(
    cfg: &ExperimentConfig,
    bundle: &DataBundle,
    train: &Dataset,
    architecture: &[usize],
    params: &ClassifierParams,
    streams: &mut RunStreams,
) -> Result<ScoreVector> {
    use rand::Rng;

    let needs_scores = cfg.strategy.mechanism != Mechanism::Baseline
        && cfg.strategy.ordering != OrderingKind::Random;
    if !needs_scores {
        // placeholder; the random ordering redraws every epoch and the
        // baseline never looks at it
        return ScoreVector::new(vec![1.0; train.len()], 0, ScoreProvenance::Random);
    }
    match cfg.scoring {
        ScoringSource::Prior => {
            let weights = match &cfg.prior {
                PriorSource::Fixture(w) => w.clone(),
                PriorSource::Bootstrap { epochs } => bootstrap_prior_from_f1(
                    train,
                    &bundle.validation,
                    architecture,
                    &cfg.train,
                    &DropoutConfig::train(cfg.train_keep),
                    *epochs,
                    streams.bootstrap.gen(),
                )?,
            };
            prior_scores(&weights, train.labels())
        }
        ScoringSource::Uncertainty => {
            uncertainty_scores(params, train, &cfg.uncertainty, &mut streams.mc, 0)
        }
    }
}

/// Execute one full training run for `(cfg, seed)`.
///
/// Each epoch refreshes uncertainty scores when due, draws an epoch plan,
/// applies weighted gradient steps and evaluates on the validation split;
/// test metrics come from the best-validation checkpoint. A NaN abort
/// marks the result failed instead of returning an error.
pub fn run_training(bundle: &DataBundle, cfg: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let started = Instant::now();
    let mut streams = RunStreams::new(seed);

    let train = cfg.scenario.apply(&bundle.train, &mut streams)?;
    let classes = bundle
        .train
        .class_count()
        .max(bundle.validation.class_count())
        .max(bundle.test.class_count());
    let mut architecture = Vec::with_capacity(cfg.hidden.len() + 2);
    architecture.push(train.dim());
    architecture.extend_from_slice(&cfg.hidden);
    architecture.push(classes);

    let mut params = init_params(&architecture, crate::rng::stream_seed(seed, "init"))?;
    let scores = initial_scores(cfg, bundle, &train, &architecture, &params, &mut streams)?;
    let mut state = CurriculumState::new(scores).with_decay_divisor(cfg.decay_divisor);

    // reorder-with-decay is subsets pacing over the full set from epoch 1
    let effective_strategy = if cfg.decay_in_reorder && cfg.strategy.mechanism == Mechanism::Reorder
    {
        StrategyKind::new(Mechanism::Subsets, cfg.strategy.ordering)
    } else {
        cfg.strategy
    };
    let pacing = if effective_strategy.mechanism == Mechanism::Subsets
        && cfg.strategy.mechanism == Mechanism::Subsets
    {
        PacingConfig::new(
            InitialSubset::Fraction(cfg.pacing_fraction),
            cfg.warmup_epochs,
            train.len(),
        )?
    } else {
        PacingConfig::new(InitialSubset::Count(train.len()), 1, train.len())?
    };

    let dropout = DropoutConfig::train(cfg.train_keep);
    let config_hash = cfg.config_hash();
    let has_corruption = train.corrupted_count() > 0;

    let mut val_error_curve = Vec::with_capacity(cfg.train.epochs);
    let mut subset_sizes = Vec::with_capacity(cfg.train.epochs);
    let keep_checkpoint = cfg.model_selection == ModelSelection::BestValidation;
    let mut best_epoch = 0usize;
    let mut best_error = f64::INFINITY;
    let mut best_params: Option<ClassifierParams> = None;
    let mut failed = None;
    let mut stopped_early = false;
    let mut weight_audit = None;

    let refresh_uncertainty = cfg.scoring == ScoringSource::Uncertainty
        && cfg.strategy.mechanism != Mechanism::Baseline
        && cfg.strategy.ordering != OrderingKind::Random;

    'epochs: for epoch in 1..=cfg.train.epochs {
        if refresh_uncertainty && epoch > 1 && (epoch - 1) % cfg.uncertainty.refresh_every == 0 {
            let fresh =
                uncertainty_scores(&params, &train, &cfg.uncertainty, &mut streams.mc, epoch)?;
            state.replace_scores(fresh)?;
            if effective_strategy.mechanism == Mechanism::Subsets {
                // a refresh replaces the score vector, so the selection
                // suppression of already-seen samples has to be re-applied
                // on the fresh base or the subset never rotates
                let suppressed = crate::scheduler::decay_scores(&state);
                state.replace_scores(suppressed)?;
            }
        }

        let plan = plan_epoch(
            &mut state,
            effective_strategy,
            &pacing,
            cfg.train.batch_size,
            &mut streams.schedule,
        )?;
        subset_sizes.push(plan.subset_size);

        for batch in make_batches(&plan) {
            let features = train.feature_matrix(batch.indices)?;
            let labels = train.gather_labels(batch.indices);
            let (_, grads) = gradients(
                &params,
                &features,
                &labels,
                batch.weights,
                &dropout,
                &mut streams.dropout,
            )?;
            match optimizer_step(&mut params, &grads, &cfg.train, epoch - 1) {
                Ok(()) => {}
                Err(Error::Numeric(_)) => {
                    failed = Some(epoch);
                    break 'epochs;
                }
                Err(other) => return Err(other),
            }
        }

        if has_corruption && cfg.strategy.mechanism == Mechanism::Weights {
            let mut corrupted = (0.0, 0usize);
            let mut clean = (0.0, 0usize);
            for (&i, &w) in plan.indices.iter().zip(plan.weights.iter()) {
                if train.is_corrupted(i) {
                    corrupted = (corrupted.0 + w, corrupted.1 + 1);
                } else {
                    clean = (clean.0 + w, clean.1 + 1);
                }
            }
            if corrupted.1 > 0 && clean.1 > 0 {
                weight_audit = Some(WeightAudit {
                    corrupted_mean: corrupted.0 / corrupted.1 as f64,
                    clean_mean: clean.0 / clean.1 as f64,
                });
            }
        }

        let val = evaluate(&params, &bundle.validation)?;
        val_error_curve.push(val.error_rate);
        if val.error_rate < best_error {
            best_error = val.error_rate;
            best_epoch = epoch;
            if keep_checkpoint {
                best_params = Some(params.clone());
            }
        }
        if epoch - best_epoch >= cfg.train.patience {
            stopped_early = true;
            break;
        }
    }

    let eval_params = best_params.as_ref().unwrap_or(&params);
    let test = evaluate(eval_params, &bundle.test)?;

    Ok(RunResult {
        seed,
        config_hash,
        epochs_run: val_error_curve.len(),
        best_epoch,
        stopped_early,
        val_error_curve,
        test,
        failed,
        wall_secs: started.elapsed().as_secs_f64(),
        subset_sizes,
        weight_audit,
    })
}

/// Run `cfg` once per seed (in parallel) and summarize the error rates.
///
/// Failed runs are kept in the result list but excluded from the
/// aggregates; if every run failed this is a harness error.
pub fn repeat_runs(
    bundle: &DataBundle,
    cfg: &ExperimentConfig,
    seeds: &[u64],
) -> Result<(Vec<RunResult>, Summary)> {
    if seeds.is_empty() {
        return Err(Error::Harness("at least one seed is required".to_string()));
    }
    let results: Vec<Result<RunResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| scope.spawn(move || run_training(bundle, cfg, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    });

    let mut runs = Vec::with_capacity(seeds.len());
    for r in results {
        runs.push(r?);
    }
    let ok_errors: Vec<f64> = runs
        .iter()
        .filter(|r| r.failed.is_none())
        .map(|r| r.test.error_rate)
        .collect();
    if ok_errors.is_empty() {
        return Err(Error::Harness(
            "all runs failed with numeric aborts".to_string(),
        ));
    }
    let summary = summarize(&ok_errors)?;
    Ok((runs, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_blobs;

    fn tiny_bundle() -> DataBundle {
        let ds = synth_blobs(3, 40, 4, 8.0, 5).unwrap();
        DataBundle::from_single(&ds, 9).unwrap()
    }

    fn fast_config() -> ExperimentConfig {
        ExperimentConfig {
            hidden: vec![16],
            train: TrainConfig {
                epochs: 8,
                batch_size: 16,
                patience: 8,
                initial_lr: 5e-3,
                ..TrainConfig::default()
            },
            uncertainty: UncertaintyConfig {
                passes: 3,
                keep_prob: 0.7,
                refresh_every: 1,
            },
            ..ExperimentConfig::default()
        }
    }

    fn scenario_train_len(bundle: &DataBundle, cfg: &ExperimentConfig, seed: u64) -> usize {
        let mut streams = RunStreams::new(seed);
        cfg.scenario.apply(&bundle.train, &mut streams).unwrap().len()
    }

    #[test]
    fn baseline_solves_separable_blobs() {
        let bundle = tiny_bundle();
        let cfg = fast_config();
        let run = run_training(&bundle, &cfg, 1).unwrap();
        assert!(run.failed.is_none());
        assert_eq!(run.test.error_rate, 0.0, "separable data should hit 0%");
        assert_eq!(run.subset_sizes[0], scenario_train_len(&bundle, &cfg, 1));
        assert!(run.best_epoch >= 1);
    }

    #[test]
    fn runs_are_reproducible() {
        let bundle = tiny_bundle();
        let mut cfg = fast_config();
        cfg.strategy = StrategyKind::new(Mechanism::Subsets, OrderingKind::Curriculum);
        cfg.scoring = ScoringSource::Uncertainty;
        let a = run_training(&bundle, &cfg, 7).unwrap();
        let b = run_training(&bundle, &cfg, 7).unwrap();
        assert_eq!(a.val_error_curve, b.val_error_curve);
        assert_eq!(a.test.error_rate, b.test.error_rate);
        assert_eq!(a.test.confusion, b.test.confusion);
        assert_eq!(a.subset_sizes, b.subset_sizes);
    }

    #[test]
    fn subset_sizes_follow_pacing() {
        let bundle = tiny_bundle();
        let mut cfg = fast_config();
        cfg.strategy = StrategyKind::new(Mechanism::Subsets, OrderingKind::Curriculum);
        cfg.scoring = ScoringSource::Uncertainty;
        cfg.pacing_fraction = 0.25;
        cfg.warmup_epochs = 4;
        let run = run_training(&bundle, &cfg, 3).unwrap();
        let n = scenario_train_len(&bundle, &cfg, 3);
        let pacing = PacingConfig::new(InitialSubset::Fraction(0.25), 4, n).unwrap();
        for (i, &size) in run.subset_sizes.iter().enumerate() {
            assert_eq!(size, crate::scheduler::pacing_size(i + 1, &pacing));
        }
    }

    #[test]
    fn weights_with_equal_scores_matches_baseline_bitwise() {
        let bundle = tiny_bundle();
        let mut cfg_w = fast_config();
        cfg_w.strategy = StrategyKind::new(Mechanism::Weights, OrderingKind::Curriculum);
        cfg_w.scoring = ScoringSource::Prior;
        cfg_w.prior = PriorSource::Fixture(PriorClassWeights::new(vec![1.0; 3]).unwrap());
        let mut cfg_b = fast_config();
        cfg_b.strategy = StrategyKind::baseline();

        let w = run_training(&bundle, &cfg_w, 11).unwrap();
        let b = run_training(&bundle, &cfg_b, 11).unwrap();
        assert_eq!(w.val_error_curve, b.val_error_curve);
        assert_eq!(w.test.error_rate, b.test.error_rate);
        assert_eq!(w.test.confusion, b.test.confusion);
    }

    #[test]
    fn early_stopping_respects_patience() {
        let bundle = tiny_bundle();
        let mut cfg = fast_config();
        cfg.train.epochs = 8;
        cfg.train.patience = 2;
        let run = run_training(&bundle, &cfg, 2).unwrap();
        if run.stopped_early {
            assert!(run.epochs_run < cfg.train.epochs);
            assert_eq!(run.epochs_run - run.best_epoch, cfg.train.patience);
        }
        // never continues past `patience` epochs without a new best
        let mut best = f64::INFINITY;
        let mut best_at = 0usize;
        for (i, &e) in run.val_error_curve.iter().enumerate() {
            if e < best {
                best = e;
                best_at = i + 1;
            }
            assert!(i + 1 - best_at <= cfg.train.patience);
        }
    }

    #[test]
    fn repeat_runs_aggregates_and_duplicate_seeds_agree() {
        let bundle = tiny_bundle();
        let cfg = fast_config();
        let (runs, summary) = repeat_runs(&bundle, &cfg, &[5, 5]).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].test.error_rate, runs[1].test.error_rate);
        assert_eq!(summary.std_dev, 0.0);
        assert_eq!(summary.mean, runs[0].test.error_rate);
        assert_eq!(summary.median, summary.mean);
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let cfg = fast_config();
        assert_eq!(cfg.config_hash(), cfg.config_hash());
        let mut other = fast_config();
        other.train.batch_size = 32;
        assert_ne!(cfg.config_hash(), other.config_hash());
    }

    #[test]
    fn noise_scenario_flags_and_audit() {
        let bundle = tiny_bundle();
        let mut cfg = fast_config();
        cfg.scenario = Scenario::Noise;
        cfg.strategy = StrategyKind::new(Mechanism::Weights, OrderingKind::Curriculum);
        cfg.scoring = ScoringSource::Uncertainty;
        let run = run_training(&bundle, &cfg, 4).unwrap();
        let audit = run.weight_audit.expect("corrupted scenario records audit");
        assert!(audit.corrupted_mean > 0.0 && audit.corrupted_mean <= 1.0);
        assert!(audit.clean_mean > 0.0 && audit.clean_mean <= 1.0);
    }
}
