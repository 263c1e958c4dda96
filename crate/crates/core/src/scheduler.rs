//! Epoch planning for the three scheduling strategies.
//!
//! `reorder` draws a full probabilistic permutation, `subsets` keeps the
//! first `g(e)` entries of that permutation with the staircase pacing
//! function and decays the scores of the selected samples, and `weights`
//! trains on a uniform permutation but scales each sample's loss by its
//! per-batch normalized curriculum probability. `baseline` is a uniform
//! shuffle with unit weights.
//!
//! The baseline/weights permutations are drawn through the same
//! exponential-keys sampler with uniform probabilities, so a curriculum
//! with all-equal scores reproduces the baseline stream for stream.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scoring::{
    anti_curriculum, random_scores, to_probabilities, CurriculumProbabilities, ScoreProvenance,
    ScoreVector,
};

/// Default divisor in the exponential score decay `exp(-tau^2 / divisor)`.
pub const DEFAULT_DECAY_DIVISOR: f64 = 10.0;

/// Scheduling mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    Baseline,
    Reorder,
    Subsets,
    Weights,
}

impl Mechanism {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::Baseline => "baseline",
            Mechanism::Reorder => "reorder",
            Mechanism::Subsets => "subsets",
            Mechanism::Weights => "weights",
        }
    }
}

impl std::str::FromStr for Mechanism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Mechanism::Baseline),
            "reorder" => Ok(Mechanism::Reorder),
            "subsets" => Ok(Mechanism::Subsets),
            "weights" => Ok(Mechanism::Weights),
            other => Err(Error::config(format!("unknown strategy '{other}'"))),
        }
    }
}

/// How the score vector is oriented before probabilities are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingKind {
    /// Use the scores as-is (the curriculum order).
    Curriculum,
    /// Reverse the priority order (control).
    Anti,
    /// Fresh random scores every epoch (control).
    Random,
}

impl OrderingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderingKind::Curriculum => "curriculum",
            OrderingKind::Anti => "anti",
            OrderingKind::Random => "random",
        }
    }
}

impl std::str::FromStr for OrderingKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "curriculum" | "cl" => Ok(OrderingKind::Curriculum),
            "anti" | "anti-curriculum" => Ok(OrderingKind::Anti),
            "random" => Ok(OrderingKind::Random),
            other => Err(Error::config(format!("unknown ordering '{other}'"))),
        }
    }
}

/// Mechanism plus ordering; the baseline ignores the ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyKind {
    pub mechanism: Mechanism,
    pub ordering: OrderingKind,
}

impl StrategyKind {
    pub fn new(mechanism: Mechanism, ordering: OrderingKind) -> Self {
        StrategyKind {
            mechanism,
            ordering,
        }
    }

    pub fn baseline() -> Self {
        StrategyKind::new(Mechanism::Baseline, OrderingKind::Curriculum)
    }

    /// Short label used in CSV columns, e.g. `subsets-cl`, `weights-anti`.
    pub fn label(&self) -> String {
        match self.mechanism {
            Mechanism::Baseline => "baseline".to_string(),
            mech => {
                let ord = match self.ordering {
                    OrderingKind::Curriculum => "cl",
                    OrderingKind::Anti => "anti",
                    OrderingKind::Random => "random",
                };
                format!("{}-{}", mech.as_str(), ord)
            }
        }
    }
}

/// Initial subset size for pacing: an absolute count or a fraction of N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSubset {
    Count(usize),
    Fraction(f64),
}

/// Staircase pacing parameters: start at `initial`, reach all `total`
/// samples after `warmup_epochs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacingConfig {
    pub initial: InitialSubset,
    pub warmup_epochs: usize,
    pub total: usize,
}

impl PacingConfig {
    pub fn new(initial: InitialSubset, warmup_epochs: usize, total: usize) -> Result<Self> {
        let cfg = PacingConfig {
            initial,
            warmup_epochs,
            total,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.total == 0 {
            return Err(Error::config("pacing total must be >= 1"));
        }
        if self.warmup_epochs == 0 {
            return Err(Error::config("warm-up epochs must be >= 1"));
        }
        let n0 = self.initial_count();
        if n0 == 0 || n0 > self.total {
            return Err(Error::config(format!(
                "initial subset size {n0} must lie in [1, {}]",
                self.total
            )));
        }
        Ok(())
    }

    /// The resolved initial subset size N_S^(0).
    pub fn initial_count(&self) -> usize {
        match self.initial {
            InitialSubset::Count(c) => c,
            InitialSubset::Fraction(f) => crate::data::round_half_up(f * self.total as f64),
        }
    }
}

/// Staircase pacing: `N_S^(0) + e * (N - N_S^(0)) / E_S` for epochs before
/// the warm-up ends, the full set afterwards. `epoch` is 1-based. The
/// division stays in real arithmetic; each size is rounded to the nearest
/// integer and clamped to [1, N].
pub fn pacing_size(epoch: usize, cfg: &PacingConfig) -> usize {
    let n = cfg.total;
    let n0 = cfg.initial_count();
    if epoch >= cfg.warmup_epochs {
        return n;
    }
    let delta = (n - n0) as f64 / cfg.warmup_epochs as f64;
    let size = crate::data::round_half_up(n0 as f64 + epoch as f64 * delta);
    size.clamp(1, n)
}

/// Mutable curriculum bookkeeping for one training run: effective scores,
/// their probabilities, per-sample selection counters and the epoch clock.
#[derive(Debug, Clone)]
pub struct CurriculumState {
    scores: ScoreVector,
    probs: CurriculumProbabilities,
    counters: Vec<u32>,
    epoch: usize,
    decay_divisor: f64,
}

impl CurriculumState {
    pub fn new(scores: ScoreVector) -> Self {
        let probs = to_probabilities(&scores);
        let n = scores.len();
        CurriculumState {
            scores,
            probs,
            counters: vec![0; n],
            epoch: 0,
            decay_divisor: DEFAULT_DECAY_DIVISOR,
        }
    }

    pub fn with_decay_divisor(mut self, divisor: f64) -> Self {
        self.decay_divisor = divisor;
        self
    }

    /// Resume with existing selection counters; the epoch clock advances to
    /// the largest counter so `tau_i <= epoch` keeps holding.
    pub fn with_counters(mut self, counters: Vec<u32>) -> Result<Self> {
        if counters.len() != self.scores.len() {
            return Err(Error::Internal(format!(
                "{} counters for {} samples",
                counters.len(),
                self.scores.len()
            )));
        }
        self.epoch = self.epoch.max(counters.iter().copied().max().unwrap_or(0) as usize);
        self.counters = counters;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn scores(&self) -> &ScoreVector {
        &self.scores
    }

    pub fn probabilities(&self) -> &CurriculumProbabilities {
        &self.probs
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }

    /// Install fresh scores (e.g. an uncertainty refresh), keeping the
    /// selection counters and epoch clock.
    pub fn replace_scores(&mut self, scores: ScoreVector) -> Result<()> {
        if scores.len() != self.counters.len() {
            return Err(Error::Internal(format!(
                "score vector of length {} for state of {} samples",
                scores.len(),
                self.counters.len()
            )));
        }
        self.probs = to_probabilities(&scores);
        self.scores = scores;
        Ok(())
    }

    fn check_consistent(&self) -> Result<()> {
        if self.scores.len() != self.counters.len() || self.probs.len() != self.scores.len() {
            return Err(Error::Internal(
                "curriculum state vectors have diverging lengths".to_string(),
            ));
        }
        Ok(())
    }
}

/// One epoch's worth of scheduled data: ordered indices, the subset size,
/// and per-sample loss weights aligned to the index list.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochPlan {
    pub indices: Vec<usize>,
    pub subset_size: usize,
    pub weights: Vec<f64>,
    pub batch_size: usize,
    pub epoch: usize,
}

/// An index/weight batch view into an [`EpochPlan`].
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub indices: &'a [usize],
    pub weights: &'a [f64],
}

/// Split a plan into consecutive batches of `batch_size`; the final
/// partial batch is kept.
pub fn make_batches(plan: &EpochPlan) -> Vec<Batch<'_>> {
    plan.indices
        .chunks(plan.batch_size)
        .zip(plan.weights.chunks(plan.batch_size))
        .map(|(indices, weights)| Batch { indices, weights })
        .collect()
}

/// Weighted sampling without replacement via exponential keys: draw
/// `k_i = -ln(u_i) / p_i` and sort ascending. Equivalent in distribution
/// to repeatedly drawing remaining items proportionally to `p`.
pub fn sample_permutation<R: Rng>(p: &CurriculumProbabilities, rng: &mut R) -> Vec<usize> {
    let mut keyed: Vec<(usize, f64)> = p
        .values()
        .iter()
        .enumerate()
        .map(|(i, &pi)| {
            let u = 1.0 - rng.gen::<f64>();
            (i, -u.ln() / pi)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    keyed.into_iter().map(|(i, _)| i).collect()
}

/// Exponentially decay each score by its selection counter:
/// `s_i * exp(-tau_i^2 / divisor)`.
pub fn decay_scores(state: &CurriculumState) -> ScoreVector {
    let values: Vec<f64> = state
        .scores
        .values()
        .iter()
        .zip(state.counters.iter())
        .map(|(&s, &tau)| s * (-(f64::from(tau).powi(2)) / state.decay_divisor).exp())
        .collect();
    // scores stay non-negative under the decay, so this cannot fail
    ScoreVector::new(values, state.scores.epoch, state.scores.provenance).unwrap()
}

/// Per-batch normalized loss weights: `alpha_k = p_k / max(p over batch)`.
pub fn batch_weights(p: &CurriculumProbabilities, batch: &[usize]) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::data("cannot weight an empty batch"));
    }
    let mut max = 0.0f64;
    for &i in batch {
        if i >= p.len() {
            return Err(Error::data(format!("batch index {i} out of range")));
        }
        max = max.max(p.values()[i]);
    }
    Ok(batch.iter().map(|&i| p.values()[i] / max).collect())
}

/// Build the epoch plan for `strategy` and advance the curriculum state.
///
/// Baseline and weights permute uniformly; reorder and subsets permute by
/// the curriculum probabilities. The anti ordering reflects the state's
/// scores once per refresh; the random ordering replaces them with fresh
/// draws every epoch. Subsets additionally selects the first
/// [`pacing_size`] entries, increments their counters, applies
/// [`decay_scores`] and renormalizes.
pub fn plan_epoch<R: Rng>(
    state: &mut CurriculumState,
    strategy: StrategyKind,
    pacing: &PacingConfig,
    batch_size: usize,
    rng: &mut R,
) -> Result<EpochPlan> {
    state.check_consistent()?;
    if batch_size == 0 {
        return Err(Error::config("batch size must be >= 1"));
    }
    let n = state.len();
    let epoch = state.epoch + 1;
    state.epoch = epoch;

    if strategy.mechanism != Mechanism::Baseline {
        match strategy.ordering {
            OrderingKind::Curriculum => {}
            OrderingKind::Anti => {
                if state.scores.provenance != ScoreProvenance::Anti {
                    let anti = anti_curriculum(&state.scores);
                    state.replace_scores(anti)?;
                }
            }
            OrderingKind::Random => {
                let scores = random_scores(n, rng, epoch)?;
                state.replace_scores(scores)?;
            }
        }
    }

    let uniform;
    let perm_probs = match strategy.mechanism {
        Mechanism::Baseline | Mechanism::Weights => {
            uniform = CurriculumProbabilities::uniform(n)?;
            &uniform
        }
        Mechanism::Reorder | Mechanism::Subsets => &state.probs,
    };
    let permutation = sample_permutation(perm_probs, rng);

    let subset_size = match strategy.mechanism {
        Mechanism::Subsets => {
            if pacing.total != n {
                return Err(Error::config(format!(
                    "pacing total {} does not match dataset size {n}",
                    pacing.total
                )));
            }
            pacing.validate()?;
            pacing_size(epoch, pacing)
        }
        _ => n,
    };

    let indices: Vec<usize> = permutation[..subset_size].to_vec();

    let weights = match strategy.mechanism {
        Mechanism::Weights => {
            let mut weights = Vec::with_capacity(n);
            for chunk in indices.chunks(batch_size) {
                weights.extend(batch_weights(&state.probs, chunk)?);
            }
            weights
        }
        _ => vec![1.0; subset_size],
    };

    if strategy.mechanism == Mechanism::Subsets {
        for &i in &indices {
            state.counters[i] += 1;
        }
        let decayed = decay_scores(state);
        state.replace_scores(decayed)?;
    }

    Ok(EpochPlan {
        indices,
        subset_size,
        weights,
        batch_size,
        epoch,
    })
}
