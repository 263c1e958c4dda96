//! Per-sample priority scores and curriculum probabilities.
//!
//! Scores come from one of two sources: static per-class prior weights, or
//! predictive entropy estimated with Monte-Carlo dropout. Anti and random
//! variants exist as experiment controls. Probabilities are L1-normalized
//! scores with a small floor so every sample keeps positive mass.

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{forward, ClassifierParams, DropoutConfig, Matrix};

/// Relative floor added to every score before normalization so zero-score
/// samples remain sampleable under resampling without replacement. The
/// effective floor is this factor times the mean score, which keeps the
/// normalization scale-invariant: the exponential decay can shrink a score
/// vector by many orders of magnitude without flattening its shape.
pub const PROBABILITY_FLOOR: f64 = 1e-8;

/// Where a score vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreProvenance {
    Prior,
    Uncertainty,
    Random,
    Anti,
}

/// Non-negative per-sample priority scores stamped with the epoch they
/// were computed at.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    values: Vec<f64>,
    pub epoch: usize,
    pub provenance: ScoreProvenance,
}

impl ScoreVector {
    pub fn new(values: Vec<f64>, epoch: usize, provenance: ScoreProvenance) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::data("score vector must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::data(
                "scores must be finite and non-negative".to_string(),
            ));
        }
        Ok(ScoreVector {
            values,
            epoch,
            provenance,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All entries equal (including the all-zero vector); normalization
    /// degenerates to uniform.
    pub fn is_degenerate(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }
}

/// L1-normalized curriculum probabilities; strictly positive, sum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumProbabilities {
    values: Vec<f64>,
}

impl CurriculumProbabilities {
    /// Uniform distribution over `n` samples.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::data("cannot build probabilities over 0 samples"));
        }
        Ok(CurriculumProbabilities {
            values: vec![1.0 / n as f64; n],
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-class prior scores; higher = higher curriculum priority.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorClassWeights {
    values: Vec<f64>,
}

impl PriorClassWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("class weight vector must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("class weights must be finite"));
        }
        Ok(PriorClassWeights { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn class_count(&self) -> usize {
        self.values.len()
    }

    /// All classes equal: the curriculum degenerates to uniform.
    pub fn is_degenerate(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }
}

/// Monte-Carlo dropout settings for uncertainty estimation.
#[derive(Debug, Clone, Copy)]
pub struct UncertaintyConfig {
    /// Number of stochastic forward passes per estimate.
    pub passes: usize,
    /// Keep probability during the stochastic passes.
    pub keep_prob: f64,
    /// Recompute scores every this many epochs.
    pub refresh_every: usize,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        UncertaintyConfig {
            passes: 10,
            keep_prob: 0.7,
            refresh_every: 1,
        }
    }
}

impl UncertaintyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.passes < 1 {
            return Err(Error::config("MC pass count must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.keep_prob) {
            return Err(Error::config("MC keep probability must lie in [0, 1]"));
        }
        if self.refresh_every < 1 {
            return Err(Error::config("refresh cadence must be >= 1 epoch"));
        }
        Ok(())
    }
}

/// Static per-class scores: sample i gets the weight of its class.
///
/// If any class weight is negative the whole vector is shifted by
/// `-min(weights)` so scores stay non-negative.
pub fn prior_scores(weights: &PriorClassWeights, labels: &[usize]) -> Result<ScoreVector> {
    if labels.is_empty() {
        return Err(Error::data("no labels to score"));
    }
    let t = weights.class_count();
    let min = weights.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let shift = if min < 0.0 { -min } else { 0.0 };
    let mut values = Vec::with_capacity(labels.len());
    for &label in labels {
        if label >= t {
            return Err(Error::data(format!(
                "label {} out of range for {} classes",
                label, t
            )));
        }
        values.push(weights.values()[label] + shift);
    }
    ScoreVector::new(values, 0, ScoreProvenance::Prior)
}

/// MC-dropout mean prediction for one sample: the average of `passes`
/// stochastic forward passes. With keep probability 1 this equals the
/// deterministic forward pass for any pass count.
pub fn mc_predict<R: Rng>(
    params: &ClassifierParams,
    sample: &[f64],
    cfg: &UncertaintyConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let batch = Matrix::from_vec(1, sample.len(), sample.to_vec())?;
    let dropout = DropoutConfig::mc(cfg.keep_prob);
    let classes = params.class_count();
    let mut mean = vec![0.0; classes];
    for _ in 0..cfg.passes {
        let probs = forward(params, &batch, &dropout, rng)?;
        for (m, &p) in mean.iter_mut().zip(probs.row(0)) {
            *m += p;
        }
    }
    for m in mean.iter_mut() {
        *m /= cfg.passes as f64;
    }
    Ok(mean)
}

/// Shannon entropy of a probability vector (natural log, 0·ln 0 = 0).
pub fn predictive_entropy(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::data("empty probability vector"));
    }
    if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::data("probabilities must be finite and >= 0"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::data(format!(
            "probability vector sums to {sum}, expected 1"
        )));
    }
    Ok(probs
        .iter()
        .map(|&p| if p > 0.0 { -p * p.ln() } else { 0.0 })
        .sum())
}

/// Predictive-entropy scores for every sample of `dataset`.
///
/// Runs `cfg.passes` stochastic passes over the whole set in chunks and
/// averages the softmax outputs per sample before taking the entropy, which
/// is the batched equivalent of [`mc_predict`] + [`predictive_entropy`]
/// per sample.
pub fn uncertainty_scores<R: Rng>(
    params: &ClassifierParams,
    dataset: &Dataset,
    cfg: &UncertaintyConfig,
    rng: &mut R,
    epoch: usize,
) -> Result<ScoreVector> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::data("cannot score an empty dataset"));
    }
    let dropout = DropoutConfig::mc(cfg.keep_prob);
    let classes = params.class_count();
    let chunk = 512usize;
    let mut values = Vec::with_capacity(dataset.len());
    let indices: Vec<usize> = (0..dataset.len()).collect();
    for ids in indices.chunks(chunk) {
        let batch = dataset.feature_matrix(ids)?;
        let mut mean = Matrix::zeros(ids.len(), classes);
        for _ in 0..cfg.passes {
            let probs = forward(params, &batch, &dropout, rng)?;
            for r in 0..ids.len() {
                for (m, &p) in mean.row_mut(r).iter_mut().zip(probs.row(r)) {
                    *m += p;
                }
            }
        }
        for r in 0..ids.len() {
            for m in mean.row_mut(r).iter_mut() {
                *m /= cfg.passes as f64;
            }
            values.push(predictive_entropy(mean.row(r))?);
        }
    }
    ScoreVector::new(values, epoch, ScoreProvenance::Uncertainty)
}

/// Normalize scores to probabilities: `p_i = (s_i + eps) / sum(s_j + eps)`
/// with `eps = PROBABILITY_FLOOR * mean(s)`, so the result is invariant to
/// rescaling the whole vector. An all-zero vector yields the uniform
/// distribution.
pub fn to_probabilities(scores: &ScoreVector) -> CurriculumProbabilities {
    let n = scores.len() as f64;
    let sum: f64 = scores.values().iter().sum();
    if sum <= 0.0 {
        // degenerate all-zero scores: flagged uniform fallback
        return CurriculumProbabilities {
            values: vec![1.0 / n; scores.len()],
        };
    }
    let eps = PROBABILITY_FLOOR * (sum / n);
    let total = sum + n * eps;
    let values = scores
        .values()
        .iter()
        .map(|&s| (s + eps) / total)
        .collect();
    CurriculumProbabilities { values }
}

/// Reflect scores so the priority order is exactly reversed:
/// `s'_i = max(s) + min(s) - s_i`. Applying it twice restores the input.
pub fn anti_curriculum(scores: &ScoreVector) -> ScoreVector {
    let max = scores.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = scores.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let values = scores.values().iter().map(|&s| max + min - s).collect();
    ScoreVector {
        values,
        epoch: scores.epoch,
        provenance: ScoreProvenance::Anti,
    }
}

/// I.i.d. uniform scores in (0, 1]; the random-ordering control.
pub fn random_scores<R: Rng>(n: usize, rng: &mut R, epoch: usize) -> Result<ScoreVector> {
    if n == 0 {
        return Err(Error::data("cannot draw scores for 0 samples"));
    }
    let values = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
    ScoreVector::new(values, epoch, ScoreProvenance::Random)
}

/// Assign integer ranks 1..=T to per-class quality scores: the class with
/// the highest score receives rank T (highest curriculum priority), the
/// lowest rank 1. Ties are broken by ascending class index, the lower
/// index taking the lower rank.
pub fn ranks_from_class_scores(scores: &[f64]) -> Vec<f64> {
    let t = scores.len();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; t];
    for (position, &class) in order.iter().enumerate() {
        ranks[class] = (position + 1) as f64;
    }
    ranks
}

/// Derive per-class prior weights by training a throwaway classifier for a
/// few epochs and ranking the classes by validation F1.
///
/// The class with the highest F1 receives rank T (highest priority), the
/// lowest rank 1; ties are broken by ascending class index. The bootstrap
/// classifier itself is discarded and training later restarts from scratch.
pub fn bootstrap_prior_from_f1(
    train: &Dataset,
    validation: &Dataset,
    architecture: &[usize],
    cfg: &crate::nn::TrainConfig,
    dropout: &DropoutConfig,
    epochs: usize,
    seed: u64,
) -> Result<PriorClassWeights> {
    use rand::seq::SliceRandom;

    if epochs < 1 {
        return Err(Error::config("bootstrap needs at least one epoch"));
    }
    cfg.validate()?;
    if train.class_histogram().contains(&0) {
        return Err(Error::data(
            "every class needs at least one training sample for the bootstrap",
        ));
    }
    if validation.class_histogram().contains(&0) {
        return Err(Error::data(
            "class absent from the validation split; cannot rank by F1",
        ));
    }

    let mut params = crate::nn::init_params(architecture, crate::rng::stream_seed(seed, "boot-init"))?;
    let mut rng = crate::rng::stream_rng(seed, "boot-train");
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch = train.feature_matrix(chunk)?;
            let labels = train.gather_labels(chunk);
            let weights = vec![1.0; chunk.len()];
            let (_, grads) =
                crate::nn::gradients(&params, &batch, &labels, &weights, dropout, &mut rng)?;
            crate::nn::optimizer_step(&mut params, &grads, cfg, epoch)?;
        }
    }

    let metrics = crate::experiments::evaluate(&params, validation)?;
    PriorClassWeights::new(ranks_from_class_scores(&metrics.per_class_f1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_params;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Seven-class inter-reader kappa agreement scores; a prior-weight
    /// fixture for domains where experts grade per-class reliability.
    pub const KAPPA_FIXTURE: [f64; 7] = [0.69, 0.56, 0.62, 0.60, 0.56, 0.38, 0.92];

    #[test]
    fn prior_scores_look_up_class_weights() {
        let w = PriorClassWeights::new(KAPPA_FIXTURE.to_vec()).unwrap();
        // labels are 0-based class indices: classes 7, 6, 1 -> indices 6, 5, 0
        let s = prior_scores(&w, &[6, 5, 0]).unwrap();
        assert_eq!(s.values(), &[0.92, 0.38, 0.69]);
        assert_eq!(s.epoch, 0);
        assert_eq!(s.provenance, ScoreProvenance::Prior);
    }

    #[test]
    fn prior_scores_handle_rank_weights() {
        let limited = vec![7.0, 10.0, 5.0, 4.0, 9.0, 1.0, 8.0, 6.0, 2.0, 3.0];
        let w = PriorClassWeights::new(limited).unwrap();
        let s = prior_scores(&w, &[1, 5]).unwrap();
        assert_eq!(s.values(), &[10.0, 1.0]);
    }

    #[test]
    fn prior_scores_shift_negative_weights() {
        let w = PriorClassWeights::new(vec![-1.0, 0.5]).unwrap();
        let s = prior_scores(&w, &[0, 1]).unwrap();
        assert_eq!(s.values(), &[0.0, 1.5]);
    }

    #[test]
    fn prior_scores_reject_out_of_range_labels() {
        let w = PriorClassWeights::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(prior_scores(&w, &[2]), Err(Error::Data(_))));
    }

    #[test]
    fn prior_scores_equal_weights_give_uniform() {
        let w = PriorClassWeights::new(vec![3.0; 4]).unwrap();
        assert!(w.is_degenerate());
        let s = prior_scores(&w, &[0, 1, 2, 3, 1]).unwrap();
        assert!(s.is_degenerate());
    }

    #[test]
    fn entropy_reference_values() {
        assert_eq!(predictive_entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        let h = predictive_entropy(&[0.1; 10]).unwrap();
        assert!((h - 10f64.ln()).abs() < 1e-12);
        let h = predictive_entropy(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_bad_input() {
        assert!(predictive_entropy(&[0.5, 0.6]).is_err());
        assert!(predictive_entropy(&[-0.1, 1.1]).is_err());
        assert!(predictive_entropy(&[]).is_err());
    }

    #[test]
    fn to_probabilities_normalizes_and_preserves_order() {
        let s = ScoreVector::new(vec![1.0, 3.0], 0, ScoreProvenance::Prior).unwrap();
        let p = to_probabilities(&s);
        assert!((p.values()[0] - 0.25).abs() < 1e-7);
        assert!((p.values()[1] - 0.75).abs() < 1e-7);

        let s = ScoreVector::new(vec![0.92, 0.38, 0.69], 0, ScoreProvenance::Prior).unwrap();
        let p = to_probabilities(&s);
        assert!((p.values()[0] - 0.4623).abs() < 1e-4);
        assert!((p.values()[1] - 0.1910).abs() < 1e-4);
        assert!((p.values()[2] - 0.3467).abs() < 1e-4);
        let sum: f64 = p.values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn to_probabilities_floors_all_zero_scores() {
        let s = ScoreVector::new(vec![0.0; 4], 0, ScoreProvenance::Prior).unwrap();
        assert!(s.is_degenerate());
        let p = to_probabilities(&s);
        for &v in p.values() {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn anti_curriculum_reflects_and_is_involutive() {
        let s = ScoreVector::new(vec![1.0, 2.0, 3.0], 0, ScoreProvenance::Prior).unwrap();
        let a = anti_curriculum(&s);
        assert_eq!(a.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(a.provenance, ScoreProvenance::Anti);
        let back = anti_curriculum(&a);
        assert_eq!(back.values(), s.values());

        let c = ScoreVector::new(vec![2.0; 3], 0, ScoreProvenance::Prior).unwrap();
        assert_eq!(anti_curriculum(&c).values(), &[2.0; 3]);
    }

    #[test]
    fn random_scores_are_reproducible_and_in_range() {
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        let a = random_scores(5, &mut r1, 0).unwrap();
        let b = random_scores(5, &mut r2, 0).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(a.values().iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn ranks_highest_score_gets_highest_rank() {
        assert_eq!(ranks_from_class_scores(&[0.9, 0.1, 0.5]), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn ranks_break_ties_by_ascending_class_index() {
        assert_eq!(
            ranks_from_class_scores(&[0.5, 0.5, 0.1]),
            vec![2.0, 3.0, 1.0]
        );
        assert_eq!(ranks_from_class_scores(&[0.2; 4]), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn bootstrap_prior_yields_a_rank_permutation() {
        let ds = crate::data::synth_blobs(4, 30, 4, 5.0, 11).unwrap();
        let parts = ds.split(&[0.7, 0.3], 3).unwrap();
        let cfg = crate::nn::TrainConfig {
            epochs: 3,
            batch_size: 16,
            patience: 3,
            ..Default::default()
        };
        let w = bootstrap_prior_from_f1(
            &parts[0],
            &parts[1],
            &[4, 16, 4],
            &cfg,
            &DropoutConfig::train(0.9),
            3,
            7,
        )
        .unwrap();
        let mut sorted = w.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, vec![1.0, 2.0, 3.0, 4.0]);

        // deterministic given the same seed
        let again = bootstrap_prior_from_f1(
            &parts[0],
            &parts[1],
            &[4, 16, 4],
            &cfg,
            &DropoutConfig::train(0.9),
            3,
            7,
        )
        .unwrap();
        assert_eq!(w, again);
    }

    #[test]
    fn random_score_ranks_are_uniform() {
        // rank of the first element across repeated draws ~ uniform over 1..=5
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let reps = 5_000;
        let mut counts = [0usize; 5];
        for _ in 0..reps {
            let s = random_scores(5, &mut rng, 0).unwrap();
            let rank = s
                .values()
                .iter()
                .filter(|&&v| v < s.values()[0])
                .count();
            counts[rank] += 1;
        }
        let expected = reps as f64 / 5.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let p = crate::experiments::chi_square_sf(chi2, 4.0);
        assert!(p > 0.01, "rank distribution not uniform: chi2={chi2}, p={p}");
    }

    #[test]
    fn mc_predict_with_keep_one_equals_deterministic() {
        let params = init_params(&[4, 8, 3], 3).unwrap();
        let sample = vec![0.2, -0.4, 0.6, 0.1];
        let cfg = UncertaintyConfig {
            passes: 7,
            keep_prob: 1.0,
            refresh_every: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mc = mc_predict(&params, &sample, &cfg, &mut rng).unwrap();
        let batch = Matrix::from_vec(1, 4, sample.clone()).unwrap();
        let det = forward(
            &params,
            &batch,
            &DropoutConfig::deterministic(),
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap();
        for (a, b) in mc.iter().zip(det.row(0)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mc_predict_single_pass_is_one_forward() {
        let params = init_params(&[4, 8, 3], 3).unwrap();
        let sample = vec![0.2, -0.4, 0.6, 0.1];
        let cfg = UncertaintyConfig {
            passes: 1,
            keep_prob: 0.6,
            refresh_every: 1,
        };
        let mut rng_a = ChaCha8Rng::seed_from_u64(42);
        let mc = mc_predict(&params, &sample, &cfg, &mut rng_a).unwrap();
        let batch = Matrix::from_vec(1, 4, sample).unwrap();
        let mut rng_b = ChaCha8Rng::seed_from_u64(42);
        let single = forward(&params, &batch, &DropoutConfig::mc(0.6), &mut rng_b).unwrap();
        for (a, b) in mc.iter().zip(single.row(0)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mc_variance_shrinks_with_more_passes() {
        let params = init_params(&[4, 32, 3], 1).unwrap();
        let sample = vec![0.5, -0.25, 0.75, 0.3];
        let variance_of = |passes: usize, seed: u64| {
            let cfg = UncertaintyConfig {
                passes,
                keep_prob: 0.5,
                refresh_every: 1,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let reps = 200;
            let mut first = Vec::with_capacity(reps);
            for _ in 0..reps {
                first.push(mc_predict(&params, &sample, &cfg, &mut rng).unwrap()[0]);
            }
            let mean: f64 = first.iter().sum::<f64>() / reps as f64;
            first.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64
        };
        let v1 = variance_of(1, 11);
        let v100 = variance_of(100, 13);
        // ~1/L scaling; allow generous slack for Monte-Carlo noise
        assert!(
            v100 < v1 / 20.0,
            "variance did not shrink: v1={v1}, v100={v100}"
        );
    }

    #[test]
    fn uncertainty_scores_on_zero_net_hit_max_entropy() {
        let mut params = init_params(&[5, 4, 5], 0).unwrap();
        for li in 0..params.layer_count() {
            params.layer_weights_mut(li).fill(0.0);
        }
        let ds = crate::data::synth_blobs(5, 3, 5, 10.0, 0).unwrap();
        let cfg = UncertaintyConfig {
            passes: 2,
            keep_prob: 1.0,
            refresh_every: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = uncertainty_scores(&params, &ds, &cfg, &mut rng, 1).unwrap();
        for &v in s.values() {
            assert!((v - 5f64.ln()).abs() < 1e-9);
        }
        assert_eq!(s.epoch, 1);
    }

    #[test]
    fn uncertainty_scores_respect_entropy_bounds() {
        let params = init_params(&[5, 8, 5], 2).unwrap();
        let ds = crate::data::synth_blobs(5, 4, 5, 4.0, 7).unwrap();
        let cfg = UncertaintyConfig {
            passes: 3,
            keep_prob: 0.7,
            refresh_every: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = uncertainty_scores(&params, &ds, &cfg, &mut rng, 1).unwrap();
        let max = 5f64.ln();
        for &v in s.values() {
            assert!(v >= 0.0 && v <= max + 1e-12);
        }
    }
}
