//! Dataset ingestion, deterministic splits and controlled corruptions.
//!
//! All transforms are pure functions of (input, parameters, seed) and
//! append to a flat key/value provenance record, so any derived dataset
//! can be reconstructed exactly from its source.

mod idx;

pub use idx::load_mnist_idx;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Which split a dataset belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Unsplit,
    Train,
    Validation,
    Test,
}

impl SplitTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitTag::Unsplit => "unsplit",
            SplitTag::Train => "train",
            SplitTag::Validation => "validation",
            SplitTag::Test => "test",
        }
    }
}

/// Round half up; counts derived from fractions use this rule everywhere.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Immutable collection of (feature vector, label) pairs with corruption
/// audit flags and a replayable provenance record.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f32>,
    dim: usize,
    labels: Vec<usize>,
    original_labels: Vec<usize>,
    corrupted: Vec<bool>,
    classes: usize,
    split: SplitTag,
    provenance: Vec<(String, String)>,
}

impl Dataset {
    pub fn from_parts(
        features: Vec<f32>,
        dim: usize,
        labels: Vec<usize>,
        classes: usize,
        source: &str,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::data("feature dimension must be >= 1"));
        }
        if labels.is_empty() {
            return Err(Error::data("dataset must contain at least one sample"));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::dimension(format!(
                "{} feature values for {} samples of dim {}",
                features.len(),
                labels.len(),
                dim
            )));
        }
        if labels.iter().any(|&l| l >= classes) {
            return Err(Error::data(format!(
                "label out of range for {classes} classes"
            )));
        }
        let original_labels = labels.clone();
        let n = labels.len();
        Ok(Dataset {
            features,
            dim,
            labels,
            original_labels,
            corrupted: vec![false; n],
            classes,
            split: SplitTag::Unsplit,
            provenance: vec![("source".to_string(), source.to_string())],
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_count(&self) -> usize {
        self.classes
    }

    pub fn split_tag(&self) -> SplitTag {
        self.split
    }

    pub fn feature(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn original_label(&self, i: usize) -> usize {
        self.original_labels[i]
    }

    pub fn is_corrupted(&self, i: usize) -> bool {
        self.corrupted[i]
    }

    pub fn corrupted_count(&self) -> usize {
        self.corrupted.iter().filter(|&&c| c).count()
    }

    /// Samples per class, indexed by class.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Gather rows `indices` into an f64 matrix for the classifier.
    pub fn feature_matrix(&self, indices: &[usize]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::data(format!("sample index {i} out of range")));
            }
            data.extend(self.feature(i).iter().map(|&v| v as f64));
        }
        Matrix::from_vec(indices.len(), self.dim, data)
    }

    /// Gather labels for `indices`.
    pub fn gather_labels(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.labels[i]).collect()
    }

    /// Keep only the listed rows, in the order given.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        let mut original = Vec::with_capacity(indices.len());
        let mut corrupted = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::data(format!("sample index {i} out of range")));
            }
            features.extend_from_slice(self.feature(i));
            labels.push(self.labels[i]);
            original.push(self.original_labels[i]);
            corrupted.push(self.corrupted[i]);
        }
        let mut out = Dataset {
            features,
            dim: self.dim,
            labels,
            original_labels: original,
            corrupted,
            classes: self.classes,
            split: self.split,
            provenance: self.provenance.clone(),
        };
        out.push_provenance(&format!(
            "select(count={}, first={:?})",
            indices.len(),
            indices.first()
        ));
        Ok(out)
    }

    pub fn with_split_tag(mut self, tag: SplitTag) -> Self {
        self.split = tag;
        self
    }

    /// The provenance record as a flat key = value text block.
    pub fn provenance_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.provenance {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    fn push_provenance(&mut self, step: &str) {
        let idx = self
            .provenance
            .iter()
            .filter(|(k, _)| k.starts_with("transform."))
            .count()
            + 1;
        self.provenance
            .push((format!("transform.{idx}"), step.to_string()));
    }

    fn keep_rows(&self, keep: &[bool], step: String) -> Dataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut original = Vec::new();
        let mut corrupted = Vec::new();
        for i in 0..self.len() {
            if keep[i] {
                features.extend_from_slice(self.feature(i));
                labels.push(self.labels[i]);
                original.push(self.original_labels[i]);
                corrupted.push(self.corrupted[i]);
            }
        }
        let mut out = Dataset {
            features,
            dim: self.dim,
            labels,
            original_labels: original,
            corrupted,
            classes: self.classes,
            split: self.split,
            provenance: self.provenance.clone(),
        };
        out.push_provenance(&step);
        out
    }

    /// Deterministically partition into `ratios.len()` disjoint parts.
    ///
    /// Ratios must be positive and sum to 1 within 1e-9. Sizes are rounded
    /// half-up except the last part, which takes the remainder so the parts
    /// are exhaustive. With three ratios the parts are tagged train /
    /// validation / test in order.
    pub fn split(&self, ratios: &[f64], seed: u64) -> Result<Vec<Dataset>> {
        if ratios.is_empty() {
            return Err(Error::config("split needs at least one ratio"));
        }
        if ratios.iter().any(|&r| r <= 0.0) {
            return Err(Error::config("split ratios must be positive"));
        }
        let sum: f64 = ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "split ratios sum to {sum}, expected 1"
            )));
        }

        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);

        let mut sizes: Vec<usize> = Vec::with_capacity(ratios.len());
        let mut used = 0usize;
        for (i, &r) in ratios.iter().enumerate() {
            let size = if i + 1 == ratios.len() {
                n - used
            } else {
                round_half_up(r * n as f64).min(n - used)
            };
            sizes.push(size);
            used += size;
        }

        let tags = [SplitTag::Train, SplitTag::Validation, SplitTag::Test];
        let mut parts = Vec::with_capacity(ratios.len());
        let mut cursor = 0usize;
        for (pi, &size) in sizes.iter().enumerate() {
            let mut keep = vec![false; n];
            for &idx in &order[cursor..cursor + size] {
                keep[idx] = true;
            }
            cursor += size;
            let mut part = self.keep_rows(
                &keep,
                format!("split(part={pi}, ratios={ratios:?}, seed={seed})"),
            );
            part.split = if ratios.len() <= 3 {
                tags[pi]
            } else {
                SplitTag::Unsplit
            };
            parts.push(part);
        }
        Ok(parts)
    }

    /// Per-class stratified subsample: each class keeps
    /// `round_half_up(fraction * n_class)` samples; kept samples retain
    /// their original relative order.
    pub fn subsample_fraction(&self, fraction: f64, seed: u64) -> Result<Dataset> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::config(format!(
                "subsample fraction must lie in (0, 1], got {fraction}"
            )));
        }
        self.reduce_classes(
            &(0..self.classes).collect::<Vec<_>>(),
            fraction,
            seed,
            format!("subsample_fraction(fraction={fraction}, seed={seed})"),
        )
    }

    /// Reduce the listed classes to `keep_fraction` of their samples,
    /// leaving all other classes untouched.
    pub fn induce_imbalance(
        &self,
        minority_classes: &[usize],
        keep_fraction: f64,
        seed: u64,
    ) -> Result<Dataset> {
        if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
            return Err(Error::config(format!(
                "keep fraction must lie in (0, 1], got {keep_fraction}"
            )));
        }
        for &c in minority_classes {
            if c >= self.classes {
                return Err(Error::data(format!(
                    "minority class {c} out of range for {} classes",
                    self.classes
                )));
            }
        }
        self.reduce_classes(
            minority_classes,
            keep_fraction,
            seed,
            format!(
                "induce_imbalance(classes={minority_classes:?}, keep={keep_fraction}, seed={seed})"
            ),
        )
    }

    fn reduce_classes(
        &self,
        classes: &[usize],
        fraction: f64,
        seed: u64,
        step: String,
    ) -> Result<Dataset> {
        let mut keep = vec![true; self.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for class in 0..self.classes {
            if !classes.contains(&class) {
                continue;
            }
            let members: Vec<usize> = (0..self.len())
                .filter(|&i| self.labels[i] == class)
                .collect();
            if members.is_empty() {
                continue;
            }
            let target = round_half_up(fraction * members.len() as f64);
            if target == 0 {
                return Err(Error::data(format!(
                    "fraction {fraction} keeps 0 samples of class {class}"
                )));
            }
            if target >= members.len() {
                continue;
            }
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut rng);
            for &drop in &shuffled[target..] {
                keep[drop] = false;
            }
        }
        Ok(self.keep_rows(&keep, step))
    }

    /// Corrupt exactly `round_half_up(fraction * N)` uniformly chosen
    /// samples by advancing their label to the next class (mod T).
    /// Original labels are retained and flags set for auditing.
    pub fn corrupt_labels(&self, fraction: f64, seed: u64) -> Result<Dataset> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::config(format!(
                "corruption fraction must lie in [0, 1], got {fraction}"
            )));
        }
        let n = self.len();
        let count = round_half_up(fraction * n as f64).min(n);
        let mut out = self.clone();
        out.push_provenance(&format!(
            "corrupt_labels(fraction={fraction}, seed={seed})"
        ));
        if count == 0 {
            return Ok(out);
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        for &i in &order[..count] {
            out.labels[i] = (out.labels[i] + 1) % self.classes;
            out.corrupted[i] = out.labels[i] != out.original_labels[i];
        }
        Ok(out)
    }
}

/// Gaussian clusters with class means at pairwise distance `separation`;
/// a network-free stand-in for image data in tests. Requires
/// `dim >= class_count` so the means can sit on a scaled orthogonal frame.
pub fn synth_blobs(
    class_count: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if class_count == 0 || per_class == 0 || dim == 0 {
        return Err(Error::config("all synth_blobs counts must be >= 1"));
    }
    if dim < class_count {
        return Err(Error::config(format!(
            "synth_blobs needs dim >= class_count ({dim} < {class_count})"
        )));
    }
    let scale = separation / std::f64::consts::SQRT_2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(class_count * per_class * dim);
    let mut labels = Vec::with_capacity(class_count * per_class);
    for class in 0..class_count {
        for _ in 0..per_class {
            for d in 0..dim {
                let mean = if d == class { scale } else { 0.0 };
                features.push((mean + gauss(&mut rng)) as f32);
            }
            labels.push(class);
        }
    }
    let mut ds = Dataset::from_parts(
        features,
        dim,
        labels,
        class_count,
        &format!(
            "synth_blobs(classes={class_count}, per_class={per_class}, dim={dim}, \
             separation={separation}, seed={seed})"
        ),
    )?;
    ds.split = SplitTag::Train;
    Ok(ds)
}

/// Standard normal draw via Box-Muller.
fn gauss<R: Rng>(rng: &mut R) -> f64 {
    let u1 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n_per_class: usize, classes: usize) -> Dataset {
        synth_blobs(classes, n_per_class, classes.max(2), 10.0, 0).unwrap()
    }

    #[test]
    fn synth_blobs_shapes_and_determinism() {
        let ds = synth_blobs(3, 5, 4, 8.0, 1).unwrap();
        assert_eq!(ds.len(), 15);
        assert_eq!(ds.class_histogram(), vec![5, 5, 5]);
        let again = synth_blobs(3, 5, 4, 8.0, 1).unwrap();
        assert_eq!(ds, again);
        let other = synth_blobs(3, 5, 4, 8.0, 2).unwrap();
        assert_ne!(ds, other);
    }

    #[test]
    fn synth_blobs_validates_dims() {
        assert!(synth_blobs(5, 2, 3, 1.0, 0).is_err());
        assert!(synth_blobs(0, 2, 3, 1.0, 0).is_err());
    }

    #[test]
    fn split_is_disjoint_exhaustive_and_deterministic() {
        let ds = toy(5, 2); // 10 samples
        let parts = ds.split(&[0.8, 0.2], 7).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].len(), 8);
        assert_eq!(parts[1].len(), 2);
        assert_eq!(parts[0].split_tag(), SplitTag::Train);
        assert_eq!(parts[1].split_tag(), SplitTag::Validation);

        let again = ds.split(&[0.8, 0.2], 7).unwrap();
        assert_eq!(parts[0], again[0]);
        assert_eq!(parts[1], again[1]);

        // union of features matches the original multiset size
        assert_eq!(parts[0].len() + parts[1].len(), ds.len());
    }

    #[test]
    fn split_validates_ratios() {
        let ds = toy(5, 2);
        assert!(ds.split(&[0.5, 0.4], 0).is_err());
        assert!(ds.split(&[0.5, -0.5, 1.0], 0).is_err());
        assert!(ds.split(&[], 0).is_err());
    }

    #[test]
    fn subsample_is_stratified_and_identity_at_one() {
        let ds = toy(10, 3);
        let sub = ds.subsample_fraction(0.5, 3).unwrap();
        assert_eq!(sub.class_histogram(), vec![5, 5, 5]);

        let same = ds.subsample_fraction(1.0, 3).unwrap();
        assert_eq!(same.len(), ds.len());
        assert_eq!(same.labels(), ds.labels());
    }

    #[test]
    fn subsample_rounds_half_up() {
        // class of 7 samples at fraction 0.5 keeps 4
        let ds = synth_blobs(1, 7, 2, 1.0, 0).unwrap();
        let sub = ds.subsample_fraction(0.5, 0).unwrap();
        assert_eq!(sub.len(), 4);
    }

    #[test]
    fn subsample_rejects_emptying_a_class() {
        let ds = toy(2, 2);
        assert!(matches!(
            ds.subsample_fraction(0.1, 0),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn imbalance_touches_only_minority_classes() {
        let ds = toy(10, 3);
        let out = ds.induce_imbalance(&[1], 0.3, 5).unwrap();
        assert_eq!(out.class_histogram(), vec![10, 3, 10]);

        let identity = ds.induce_imbalance(&[1], 1.0, 5).unwrap();
        assert_eq!(identity.class_histogram(), vec![10, 10, 10]);

        let none = ds.induce_imbalance(&[], 0.3, 5).unwrap();
        assert_eq!(none.class_histogram(), vec![10, 10, 10]);
    }

    #[test]
    fn corrupt_labels_flags_exact_count_and_wraps() {
        let ds = toy(10, 5); // 50 samples
        let out = ds.corrupt_labels(0.3, 9).unwrap();
        assert_eq!(out.corrupted_count(), 15);
        for i in 0..out.len() {
            if out.is_corrupted(i) {
                assert_eq!(out.label(i), (out.original_label(i) + 1) % 5);
                assert_eq!(out.feature(i), ds.feature(i));
            } else {
                assert_eq!(out.label(i), out.original_label(i));
            }
        }

        let zero = ds.corrupt_labels(0.0, 9).unwrap();
        assert_eq!(zero.corrupted_count(), 0);
        assert_eq!(zero.labels(), ds.labels());
    }

    #[test]
    fn corrupt_labels_wraps_last_class_to_zero() {
        let ds = synth_blobs(2, 4, 2, 1.0, 0).unwrap();
        let out = ds.corrupt_labels(1.0, 0).unwrap();
        for i in 0..out.len() {
            if out.original_label(i) == 1 {
                assert_eq!(out.label(i), 0);
            }
        }
    }

    #[test]
    fn transforms_record_provenance() {
        let ds = toy(10, 2);
        let out = ds
            .subsample_fraction(0.5, 1)
            .unwrap()
            .corrupt_labels(0.2, 2)
            .unwrap();
        let text = out.provenance_text();
        assert!(text.contains("transform.1 = subsample_fraction(fraction=0.5, seed=1)"));
        assert!(text.contains("transform.2 = corrupt_labels(fraction=0.2, seed=2)"));
        assert!(text.starts_with("source = "));
    }

    #[test]
    fn provenance_replay_reconstructs_dataset() {
        let ds = toy(10, 3);
        let a = ds
            .subsample_fraction(0.6, 11)
            .unwrap()
            .corrupt_labels(0.25, 12)
            .unwrap();
        let b = ds
            .subsample_fraction(0.6, 11)
            .unwrap()
            .corrupt_labels(0.25, 12)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn select_keeps_rows_in_given_order() {
        let ds = toy(4, 2);
        let picked = ds.select(&[5, 0, 3]).unwrap();
        assert_eq!(picked.len(), 3);
        assert_eq!(picked.label(0), ds.label(5));
        assert_eq!(picked.feature(1), ds.feature(0));
        assert_eq!(picked.label(2), ds.label(3));
        assert!(ds.select(&[99]).is_err());
    }

    #[test]
    fn feature_matrix_gathers_rows() {
        let ds = toy(3, 2);
        let m = ds.feature_matrix(&[2, 0]).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), ds.dim());
        for (a, b) in m.row(0).iter().zip(ds.feature(2)) {
            assert_eq!(*a, *b as f64);
        }
        assert!(ds.feature_matrix(&[99]).is_err());
    }
}
