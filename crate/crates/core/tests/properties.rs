//! Property tests for the scoring and scheduling invariants.

use proptest::prelude::*;

use curricle::scheduler::{
    batch_weights, make_batches, pacing_size, sample_permutation, EpochPlan, InitialSubset,
    PacingConfig,
};
use curricle::scoring::{
    anti_curriculum, predictive_entropy, to_probabilities, ScoreProvenance, ScoreVector,
};

fn score_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..100.0, 1..max_len)
}

proptest! {
    #[test]
    fn entropy_is_bounded_by_ln_t(weights in prop::collection::vec(1e-9f64..1.0, 1..24)) {
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let h = predictive_entropy(&probs).unwrap();
        prop_assert!(h >= -1e-12);
        prop_assert!(h <= (probs.len() as f64).ln() + 1e-9);
    }

    #[test]
    fn normalization_preserves_score_order(values in score_vec(40)) {
        let scores = ScoreVector::new(values.clone(), 0, ScoreProvenance::Prior).unwrap();
        let p = to_probabilities(&scores);
        let sum: f64 = p.values().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        for i in 0..values.len() {
            for j in 0..values.len() {
                if values[i] > values[j] {
                    prop_assert!(p.values()[i] > p.values()[j]);
                }
                if values[i] == values[j] {
                    prop_assert!((p.values()[i] - p.values()[j]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn anti_curriculum_is_an_involution(values in score_vec(40)) {
        let scores = ScoreVector::new(values.clone(), 0, ScoreProvenance::Prior).unwrap();
        let twice = anti_curriculum(&anti_curriculum(&scores));
        for (a, b) in twice.values().iter().zip(values.iter()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        // strict order reversal
        let once = anti_curriculum(&scores);
        for i in 0..values.len() {
            for j in 0..values.len() {
                if values[i] > values[j] {
                    prop_assert!(once.values()[i] < once.values()[j]);
                }
            }
        }
    }

    #[test]
    fn batch_weights_are_scale_invariant(
        values in prop::collection::vec(0.1f64..50.0, 2..30),
        scale in 0.01f64..100.0,
    ) {
        let p1 = to_probabilities(&ScoreVector::new(values.clone(), 0, ScoreProvenance::Prior).unwrap());
        let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
        let p2 = to_probabilities(&ScoreVector::new(scaled, 0, ScoreProvenance::Prior).unwrap());
        let batch: Vec<usize> = (0..values.len()).collect();
        let w1 = batch_weights(&p1, &batch).unwrap();
        let w2 = batch_weights(&p2, &batch).unwrap();
        let mut max = 0.0f64;
        for (a, b) in w1.iter().zip(w2.iter()) {
            prop_assert!((a - b).abs() < 1e-6);
            prop_assert!(*a > 0.0 && *a <= 1.0);
            max = max.max(*a);
        }
        prop_assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pacing_is_monotone_and_saturates(
        total in 1usize..5000,
        init_frac in 0.01f64..1.0,
        warmup in 1usize..40,
        horizon in 1usize..80,
    ) {
        let initial = (init_frac * total as f64).max(1.0) as usize;
        prop_assume!(initial >= 1 && initial <= total);
        let cfg = PacingConfig::new(InitialSubset::Count(initial), warmup, total).unwrap();
        let mut last = 0usize;
        for e in 1..=horizon {
            let size = pacing_size(e, &cfg);
            prop_assert!(size >= last, "pacing decreased at epoch {e}");
            prop_assert!(size >= 1 && size <= total);
            if e >= warmup {
                prop_assert_eq!(size, total);
            }
            last = size;
        }
    }

    #[test]
    fn batches_partition_the_plan(
        n in 1usize..300,
        batch_size in 1usize..80,
    ) {
        let plan = EpochPlan {
            indices: (0..n).rev().collect(),
            subset_size: n,
            weights: (0..n).map(|i| 1.0 / (i + 1) as f64).collect(),
            batch_size,
            epoch: 1,
        };
        let batches = make_batches(&plan);
        let indices: Vec<usize> = batches.iter().flat_map(|b| b.indices.iter().copied()).collect();
        let weights: Vec<f64> = batches.iter().flat_map(|b| b.weights.iter().copied()).collect();
        prop_assert_eq!(indices, plan.indices.clone());
        prop_assert_eq!(weights, plan.weights.clone());
        for b in &batches[..batches.len() - 1] {
            prop_assert_eq!(b.indices.len(), batch_size);
        }
        prop_assert!(batches.last().unwrap().indices.len() <= batch_size);
    }

    #[test]
    fn permutations_are_bijections(values in prop::collection::vec(0.0f64..10.0, 1..120), seed in 0u64..1000) {
        use rand::SeedableRng;
        let scores = ScoreVector::new(values, 0, ScoreProvenance::Prior).unwrap();
        let p = to_probabilities(&scores);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let perm = sample_permutation(&p, &mut rng);
        let mut seen = vec![false; p.len()];
        for &i in &perm {
            prop_assert!(!seen[i], "duplicate index {i}");
            seen[i] = true;
        }
        prop_assert!(seen.iter().all(|&s| s));
    }
}
