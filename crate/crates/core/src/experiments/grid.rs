//! Grid expansion: run the full strategy x scoring matrix of a scenario
//! list, plus dataset resolution and the flat key = value grid file.

use std::path::{Path, PathBuf};

use crate::data::{load_mnist_idx, synth_blobs, SplitTag};
use crate::error::{Error, Result};
use crate::scheduler::{Mechanism, OrderingKind, StrategyKind};

use super::report::CellResult;
use super::{
    repeat_runs, DataBundle, ExperimentConfig, PriorSource, Scenario, ScoringSource,
};

/// Which dataset a grid or run operates on.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetKind {
    /// IDX pair `digits-images-idx3-ubyte.gz` / `digits-labels-idx1-ubyte.gz`
    /// split 70/15/15 with `split_seed`.
    Digits,
    /// The four canonical MNIST IDX files; train archive split into the
    /// first 50000 (train) and last 10000 (validation) samples.
    Mnist,
    /// Gaussian blobs, split 70/15/15 with `split_seed`.
    Synth,
}

impl DatasetKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "digits" => Ok(DatasetKind::Digits),
            "mnist" => Ok(DatasetKind::Mnist),
            "synth" => Ok(DatasetKind::Synth),
            other => Err(Error::config(format!("unknown dataset '{other}'"))),
        }
    }
}

fn resolve(dir: &Path, name: &str) -> Result<PathBuf> {
    let raw = dir.join(name);
    if raw.exists() {
        return Ok(raw);
    }
    let gz = dir.join(format!("{name}.gz"));
    if gz.exists() {
        return Ok(gz);
    }
    Err(Error::Data(format!(
        "neither {} nor {}.gz found in {}",
        name,
        name,
        dir.display()
    )))
}

/// Load the train/validation/test bundle for `kind` from `data_dir`.
pub fn load_bundle(kind: &DatasetKind, data_dir: &Path, split_seed: u64) -> Result<DataBundle> {
    load_bundle_with_ratios(kind, data_dir, split_seed, &[0.7, 0.15, 0.15])
}

/// [`load_bundle`] with custom train/validation/test ratios (ignored for
/// MNIST, whose splits are canonical).
pub fn load_bundle_with_ratios(
    kind: &DatasetKind,
    data_dir: &Path,
    split_seed: u64,
    ratios: &[f64; 3],
) -> Result<DataBundle> {
    match kind {
        DatasetKind::Digits => {
            let images = resolve(data_dir, "digits-images-idx3-ubyte")?;
            let labels = resolve(data_dir, "digits-labels-idx1-ubyte")?;
            let ds = load_mnist_idx(images, labels)?;
            DataBundle::from_single_with_ratios(&ds, split_seed, ratios)
        }
        DatasetKind::Mnist => {
            let archive = load_mnist_idx(
                resolve(data_dir, "train-images-idx3-ubyte")?,
                resolve(data_dir, "train-labels-idx1-ubyte")?,
            )?;
            if archive.len() < 60_000 {
                return Err(Error::Data(format!(
                    "MNIST train archive has {} samples, expected 60000",
                    archive.len()
                )));
            }
            let train_ids: Vec<usize> = (0..50_000).collect();
            let val_ids: Vec<usize> = (50_000..archive.len()).collect();
            let train = archive.select(&train_ids)?.with_split_tag(SplitTag::Train);
            let validation = archive
                .select(&val_ids)?
                .with_split_tag(SplitTag::Validation);
            let test = load_mnist_idx(
                resolve(data_dir, "t10k-images-idx3-ubyte")?,
                resolve(data_dir, "t10k-labels-idx1-ubyte")?,
            )?
            .with_split_tag(SplitTag::Test);
            DataBundle::new(train, validation, test)
        }
        DatasetKind::Synth => {
            let ds = synth_blobs(10, 150, 64, 5.0, split_seed)?;
            DataBundle::from_single_with_ratios(&ds, split_seed, ratios)
        }
    }
}

/// Expanded grid request: scenarios x the nine strategy cells per scoring
/// source, with a shared base configuration.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub dataset: DatasetKind,
    pub data_dir: PathBuf,
    pub split_seed: u64,
    pub scenarios: Vec<Scenario>,
    pub seeds: Vec<u64>,
    pub base: ExperimentConfig,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::config("grid needs at least one scenario"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("grid needs at least one seed"));
        }
        self.base.validate()
    }
}

/// All cell results of a grid run, in deterministic execution order.
#[derive(Debug, Clone)]
pub struct GridResults {
    pub cells: Vec<CellResult>,
}

impl GridResults {
    pub fn any_failed(&self) -> bool {
        self.cells
            .iter()
            .any(|c| c.runs.iter().any(|r| r.failed.is_some()))
    }

    pub fn find(&self, scenario: &str, scoring: &str, strategy: &str) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.scenario == scenario && c.scoring == scoring && c.strategy == strategy
        })
    }
}

/// The nine strategy columns of a results table. Baseline and the random
/// controls do not depend on the scoring source and are shared between the
/// prior and uncertainty sections.
fn grid_cells() -> Vec<(Option<ScoringSource>, StrategyKind)> {
    use Mechanism::*;
    use OrderingKind::*;
    let mut cells = vec![
        (None, StrategyKind::baseline()),
        (None, StrategyKind::new(Subsets, Random)),
        (None, StrategyKind::new(Weights, Random)),
    ];
    for scoring in [ScoringSource::Prior, ScoringSource::Uncertainty] {
        for mech in [Reorder, Subsets, Weights] {
            for ordering in [Anti, Curriculum] {
                cells.push((Some(scoring), StrategyKind::new(mech, ordering)));
            }
        }
    }
    cells
}

/// Run every cell of the grid. Each cell repeats over all seeds; the
/// scoring column is `-` for the source-independent cells.
pub fn run_grid(bundle: &DataBundle, spec: &GridSpec) -> Result<GridResults> {
    spec.validate()?;
    let mut cells = Vec::new();
    for scenario in &spec.scenarios {
        for (scoring, strategy) in grid_cells() {
            let mut cfg = spec.base.clone();
            cfg.scenario = scenario.clone();
            cfg.strategy = strategy;
            if let Some(s) = scoring {
                cfg.scoring = s;
            }
            let (runs, summary) = repeat_runs(bundle, &cfg, &spec.seeds)?;
            cells.push(CellResult {
                scenario: scenario.label(),
                scoring: scoring.map_or("-".to_string(), |s| s.as_str().to_string()),
                strategy: strategy.label(),
                summary,
                runs,
            });
        }
    }
    Ok(GridResults { cells })
}

/// Parse a flat `key = value` grid file. Unknown keys are rejected so
/// typos surface instead of silently running defaults.
pub fn parse_grid_file(text: &str) -> Result<GridSpec> {
    let mut spec = GridSpec {
        dataset: DatasetKind::Digits,
        data_dir: PathBuf::from("data"),
        split_seed: 17,
        scenarios: vec![Scenario::Full],
        seeds: (0..10).collect(),
        base: ExperimentConfig::default(),
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(format!("grid file line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let parse_err =
            |what: &str| Error::config(format!("grid file line {}: bad {what}", lineno + 1));

        match key {
            "dataset" => spec.dataset = DatasetKind::parse(value)?,
            "data_dir" => spec.data_dir = PathBuf::from(value),
            "split_seed" => {
                spec.split_seed = value.parse().map_err(|_| parse_err("split_seed"))?
            }
            "scenarios" => {
                spec.scenarios = value
                    .split(',')
                    .map(|s| Scenario::parse(s.trim()))
                    .collect::<Result<_>>()?;
            }
            "seeds" => spec.seeds = parse_seed_list(value)?,
            "epochs" => {
                spec.base.train.epochs = value.parse().map_err(|_| parse_err("epochs"))?
            }
            "batch_size" => {
                spec.base.train.batch_size =
                    value.parse().map_err(|_| parse_err("batch_size"))?
            }
            "patience" => {
                spec.base.train.patience = value.parse().map_err(|_| parse_err("patience"))?
            }
            "lr" => spec.base.train.initial_lr = value.parse().map_err(|_| parse_err("lr"))?,
            "lr_decay_factor" => {
                spec.base.train.lr_decay_factor =
                    value.parse().map_err(|_| parse_err("lr_decay_factor"))?
            }
            "lr_decay_period" => {
                spec.base.train.lr_decay_period =
                    value.parse().map_err(|_| parse_err("lr_decay_period"))?
            }
            "optimizer" => spec.base.train.optimizer = value.parse()?,
            "momentum" => {
                spec.base.train.momentum = value.parse().map_err(|_| parse_err("momentum"))?
            }
            "hidden" => {
                spec.base.hidden = value
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|_| parse_err("hidden")))
                    .collect::<Result<_>>()?;
            }
            "train_keep" => {
                spec.base.train_keep = value.parse().map_err(|_| parse_err("train_keep"))?
            }
            "mc_keep" => {
                spec.base.uncertainty.keep_prob =
                    value.parse().map_err(|_| parse_err("mc_keep"))?
            }
            "mc_passes" => {
                spec.base.uncertainty.passes =
                    value.parse().map_err(|_| parse_err("mc_passes"))?
            }
            "refresh_every" => {
                spec.base.uncertainty.refresh_every =
                    value.parse().map_err(|_| parse_err("refresh_every"))?
            }
            "pacing_fraction" => {
                spec.base.pacing_fraction =
                    value.parse().map_err(|_| parse_err("pacing_fraction"))?
            }
            "warmup_epochs" => {
                spec.base.warmup_epochs =
                    value.parse().map_err(|_| parse_err("warmup_epochs"))?
            }
            "decay_divisor" => {
                spec.base.decay_divisor =
                    value.parse().map_err(|_| parse_err("decay_divisor"))?
            }
            "prior" => {
                spec.base.prior = parse_prior(value)?;
            }
            "model_selection" => {
                spec.base.model_selection = value.parse()?;
            }
            other => {
                return Err(Error::config(format!(
                    "grid file line {}: unknown key '{other}'",
                    lineno + 1
                )));
            }
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// `0..10` (half-open range) or a comma list `1,4,9`.
pub fn parse_seed_list(value: &str) -> Result<Vec<u64>> {
    if let Some((start, end)) = value.split_once("..") {
        let start: u64 = start
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad seed range '{value}'")))?;
        let end: u64 = end
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad seed range '{value}'")))?;
        if end <= start {
            return Err(Error::config(format!("empty seed range '{value}'")));
        }
        return Ok((start..end).collect());
    }
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::config(format!("bad seed '{s}'")))
        })
        .collect()
}

/// `bootstrap:5` or `fixture:0.69,0.56,...`.
fn parse_prior(value: &str) -> Result<PriorSource> {
    if let Some(epochs) = value.strip_prefix("bootstrap:") {
        let epochs = epochs
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad bootstrap epochs '{value}'")))?;
        return Ok(PriorSource::Bootstrap { epochs });
    }
    if let Some(list) = value.strip_prefix("fixture:") {
        let weights = list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::config(format!("bad fixture weight '{s}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        return Ok(PriorSource::Fixture(crate::scoring::PriorClassWeights::new(
            weights,
        )?));
    }
    Err(Error::config(format!(
        "prior must be 'bootstrap:<epochs>' or 'fixture:<w1,w2,..>', got '{value}'"
    )))
}

/// Training datasets kept for quick developer iterations: a smaller MC
/// pass count, fewer seeds and a training subsample. Returns the adjusted
/// spec; documented in the CLI as `--fast`.
pub fn apply_fast_profile(spec: &mut GridSpec) {
    spec.base.uncertainty.passes = spec.base.uncertainty.passes.min(5);
    if spec.seeds.len() > 5 {
        spec.seeds.truncate(5);
    }
    if spec.dataset == DatasetKind::Mnist {
        // desk-scale MNIST: cap the train split at 10000 samples
        for scenario in spec.scenarios.iter_mut() {
            if let Scenario::Full = scenario {
                *scenario = Scenario::Custom {
                    subsample: Some(0.2),
                    minority_classes: Vec::new(),
                    minority_keep: None,
                    noise: None,
                };
            }
        }
    }
}
