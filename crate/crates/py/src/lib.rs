//! Python bindings for the curriculum scheduling library.
//!
//! Exposes the dataset transforms, the scoring/scheduling primitives and a
//! one-call experiment runner. Build with `cargo build -p curricle-py
//! --release` and import the produced cdylib as `curricle_py` (see
//! `python/smoke_test.py`).

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use curricle::experiments::{
    repeat_runs, DataBundle, ExperimentConfig, PriorSource, Scenario, ScoringSource,
};
use curricle::nn::OptimizerKind;
use curricle::scheduler::{
    pacing_size, InitialSubset, Mechanism, OrderingKind, PacingConfig, StrategyKind,
};
use curricle::scoring::{PriorClassWeights, ScoreProvenance, ScoreVector};

fn to_py_err(err: curricle::Error) -> PyErr {
    match err {
        curricle::Error::Config(_) | curricle::Error::Dimension(_) => {
            PyValueError::new_err(err.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// An immutable (features, labels) collection with corruption audit flags.
#[pyclass(name = "Dataset")]
#[derive(Clone)]
struct PyDataset {
    inner: curricle::data::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Load an IDX image/label file pair (gzip accepted).
    #[staticmethod]
    fn from_idx(images: PathBuf, labels: PathBuf) -> PyResult<Self> {
        Ok(PyDataset {
            inner: curricle::data::load_mnist_idx(images, labels).map_err(to_py_err)?,
        })
    }

    /// Gaussian clusters with class means at pairwise distance `separation`.
    #[staticmethod]
    fn synth_blobs(
        classes: usize,
        per_class: usize,
        dim: usize,
        separation: f64,
        seed: u64,
    ) -> PyResult<Self> {
        Ok(PyDataset {
            inner: curricle::data::synth_blobs(classes, per_class, dim, separation, seed)
                .map_err(to_py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn labels(&self) -> Vec<usize> {
        self.inner.labels().to_vec()
    }

    fn feature(&self, index: usize) -> PyResult<Vec<f32>> {
        if index >= self.inner.len() {
            return Err(PyValueError::new_err(format!(
                "index {index} out of range"
            )));
        }
        Ok(self.inner.feature(index).to_vec())
    }

    fn corrupted_count(&self) -> usize {
        self.inner.corrupted_count()
    }

    fn is_corrupted(&self, index: usize) -> bool {
        self.inner.is_corrupted(index)
    }

    fn class_histogram(&self) -> Vec<usize> {
        self.inner.class_histogram()
    }

    /// Deterministic partition by positive ratios summing to 1.
    fn split(&self, ratios: Vec<f64>, seed: u64) -> PyResult<Vec<PyDataset>> {
        Ok(self
            .inner
            .split(&ratios, seed)
            .map_err(to_py_err)?
            .into_iter()
            .map(|inner| PyDataset { inner })
            .collect())
    }

    /// Per-class stratified subsample.
    fn subsample_fraction(&self, fraction: f64, seed: u64) -> PyResult<PyDataset> {
        Ok(PyDataset {
            inner: self
                .inner
                .subsample_fraction(fraction, seed)
                .map_err(to_py_err)?,
        })
    }

    /// Reduce the listed classes to `keep` of their samples.
    fn induce_imbalance(
        &self,
        minority_classes: Vec<usize>,
        keep: f64,
        seed: u64,
    ) -> PyResult<PyDataset> {
        Ok(PyDataset {
            inner: self
                .inner
                .induce_imbalance(&minority_classes, keep, seed)
                .map_err(to_py_err)?,
        })
    }

    /// Advance `fraction` of labels to the next class, flagging them.
    fn corrupt_labels(&self, fraction: f64, seed: u64) -> PyResult<PyDataset> {
        Ok(PyDataset {
            inner: self
                .inner
                .corrupt_labels(fraction, seed)
                .map_err(to_py_err)?,
        })
    }

    fn provenance(&self) -> String {
        self.inner.provenance_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(len={}, dim={}, classes={})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.class_count()
        )
    }
}

/// Shannon entropy of a probability vector (natural log).
#[pyfunction]
fn predictive_entropy(probs: Vec<f64>) -> PyResult<f64> {
    curricle::scoring::predictive_entropy(&probs).map_err(to_py_err)
}

/// L1-normalize scores into curriculum probabilities (with the small
/// positive floor).
#[pyfunction]
fn to_probabilities(scores: Vec<f64>) -> PyResult<Vec<f64>> {
    let sv = ScoreVector::new(scores, 0, ScoreProvenance::Prior).map_err(to_py_err)?;
    Ok(curricle::scoring::to_probabilities(&sv).values().to_vec())
}

/// Reflect scores so the priority order reverses.
#[pyfunction]
fn anti_curriculum(scores: Vec<f64>) -> PyResult<Vec<f64>> {
    let sv = ScoreVector::new(scores, 0, ScoreProvenance::Prior).map_err(to_py_err)?;
    Ok(curricle::scoring::anti_curriculum(&sv).values().to_vec())
}

/// Per-sample scores from per-class weights (0-based labels).
#[pyfunction]
fn prior_scores(class_weights: Vec<f64>, labels: Vec<usize>) -> PyResult<Vec<f64>> {
    let w = PriorClassWeights::new(class_weights).map_err(to_py_err)?;
    Ok(curricle::scoring::prior_scores(&w, &labels)
        .map_err(to_py_err)?
        .values()
        .to_vec())
}

/// Staircase subset size for 1-based `epoch`.
#[pyfunction]
fn staircase_size(epoch: usize, initial: usize, warmup_epochs: usize, total: usize) -> PyResult<usize> {
    let cfg = PacingConfig::new(InitialSubset::Count(initial), warmup_epochs, total)
        .map_err(to_py_err)?;
    Ok(pacing_size(epoch, &cfg))
}

/// Per-batch normalized loss weights for `batch` indices into `probs`.
#[pyfunction]
fn batch_weights(probs: Vec<f64>, batch: Vec<usize>) -> PyResult<Vec<f64>> {
    let sv = ScoreVector::new(probs, 0, ScoreProvenance::Prior).map_err(to_py_err)?;
    let p = curricle::scoring::to_probabilities(&sv);
    curricle::scheduler::batch_weights(&p, &batch).map_err(to_py_err)
}

/// Two-sided Welch t-test; returns (t, p).
#[pyfunction]
fn welch_t_test(sample_a: Vec<f64>, sample_b: Vec<f64>) -> PyResult<(f64, f64)> {
    curricle::experiments::welch_t_test(&sample_a, &sample_b).map_err(to_py_err)
}

/// Train one experiment cell over several seeds and return a summary dict.
///
/// The dataset is split 70/15/15 with `split_seed`; the scenario transform
/// is applied to the training part per run.
#[pyfunction]
#[pyo3(signature = (
    dataset,
    scenario = "full",
    strategy = "baseline",
    ordering = "curriculum",
    scoring = "prior",
    seeds = vec![0, 1, 2],
    epochs = 10,
    batch_size = 32,
    hidden = vec![64],
    lr = 1e-3,
    lr_decay_factor = 1.0,
    lr_decay_period = 10,
    optimizer = "adam",
    train_keep = 0.9,
    mc_keep = 0.7,
    mc_passes = 5,
    pacing_fraction = 0.25,
    warmup_epochs = 5,
    bootstrap_epochs = 3,
    split_seed = 17,
))]
#[allow(clippy::too_many_arguments)]
fn run_experiment(
    py: Python<'_>,
    dataset: PyDataset,
    scenario: &str,
    strategy: &str,
    ordering: &str,
    scoring: &str,
    seeds: Vec<u64>,
    epochs: usize,
    batch_size: usize,
    hidden: Vec<usize>,
    lr: f64,
    lr_decay_factor: f64,
    lr_decay_period: usize,
    optimizer: &str,
    train_keep: f64,
    mc_keep: f64,
    mc_passes: usize,
    pacing_fraction: f64,
    warmup_epochs: usize,
    bootstrap_epochs: usize,
    split_seed: u64,
) -> PyResult<Py<PyDict>> {
    let bundle = DataBundle::from_single(&dataset.inner, split_seed).map_err(to_py_err)?;

    let mut cfg = ExperimentConfig::default();
    cfg.scenario = Scenario::parse(scenario).map_err(to_py_err)?;
    let mechanism: Mechanism = strategy.parse().map_err(to_py_err)?;
    let ordering: OrderingKind = ordering.parse().map_err(to_py_err)?;
    cfg.strategy = StrategyKind::new(mechanism, ordering);
    cfg.scoring = scoring.parse::<ScoringSource>().map_err(to_py_err)?;
    cfg.prior = PriorSource::Bootstrap {
        epochs: bootstrap_epochs,
    };
    cfg.hidden = hidden;
    cfg.train.epochs = epochs;
    cfg.train.batch_size = batch_size;
    cfg.train.patience = epochs;
    cfg.train.initial_lr = lr;
    cfg.train.lr_decay_factor = lr_decay_factor;
    cfg.train.lr_decay_period = lr_decay_period;
    cfg.train.optimizer = optimizer.parse::<OptimizerKind>().map_err(to_py_err)?;
    cfg.train_keep = train_keep;
    cfg.uncertainty.keep_prob = mc_keep;
    cfg.uncertainty.passes = mc_passes;
    cfg.pacing_fraction = pacing_fraction;
    cfg.warmup_epochs = warmup_epochs;

    let (runs, summary) = repeat_runs(&bundle, &cfg, &seeds).map_err(to_py_err)?;

    let out = PyDict::new_bound(py);
    out.set_item("mean_error", summary.mean)?;
    out.set_item("median_error", summary.median)?;
    out.set_item("std_error", summary.std_dev)?;
    out.set_item(
        "errors",
        runs.iter().map(|r| r.test.error_rate).collect::<Vec<_>>(),
    )?;
    out.set_item(
        "macro_f1",
        runs.iter().map(|r| r.test.macro_f1).collect::<Vec<_>>(),
    )?;
    out.set_item(
        "best_epochs",
        runs.iter().map(|r| r.best_epoch).collect::<Vec<_>>(),
    )?;
    out.set_item(
        "failed",
        runs.iter().filter(|r| r.failed.is_some()).count(),
    )?;
    Ok(out.into())
}

#[pymodule]
fn curricle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(predictive_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(to_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(anti_curriculum, m)?)?;
    m.add_function(wrap_pyfunction!(prior_scores, m)?)?;
    m.add_function(wrap_pyfunction!(staircase_size, m)?)?;
    m.add_function(wrap_pyfunction!(batch_weights, m)?)?;
    m.add_function(wrap_pyfunction!(welch_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
