//! Minimal dense classifier: ReLU hidden layers, dropout on the last
//! hidden activation, softmax output, weighted cross-entropy loss with
//! analytic gradients.
//!
//! The reference architecture is a flattened-input MLP with one hidden
//! layer; any `[input, hidden.., classes]` chain is accepted so larger
//! variants slot in without touching the scheduling code.

mod optim;

pub use optim::{learning_rate, optimizer_step, OptimizerKind, TrainConfig};

use rand::Rng;

use crate::error::{Error, Result};

/// Floor applied inside `ln` when evaluating cross-entropy.
pub const LOG_FLOOR: f64 = 1e-12;

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dimension(format!(
                "matrix {}x{} needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// How dropout behaves during a forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    /// Stochastic masking as used for training steps.
    TrainStochastic,
    /// Stochastic masking as used for Monte-Carlo uncertainty passes.
    McStochastic,
    /// No masking; repeated calls on the same input are identical.
    Deterministic,
}

/// Dropout applied to the last hidden activation (before the output layer).
///
/// `keep_prob` is the probability of *keeping* a unit. The literature often
/// quotes drop rates instead; both conventions are one `1 - p` away, so the
/// value here is always a keep probability and callers convert if needed.
#[derive(Debug, Clone, Copy)]
pub struct DropoutConfig {
    pub keep_prob: f64,
    pub mode: DropoutMode,
}

impl DropoutConfig {
    pub fn deterministic() -> Self {
        DropoutConfig {
            keep_prob: 1.0,
            mode: DropoutMode::Deterministic,
        }
    }

    pub fn train(keep_prob: f64) -> Self {
        DropoutConfig {
            keep_prob,
            mode: DropoutMode::TrainStochastic,
        }
    }

    pub fn mc(keep_prob: f64) -> Self {
        DropoutConfig {
            keep_prob,
            mode: DropoutMode::McStochastic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.keep_prob) || !self.keep_prob.is_finite() {
            return Err(Error::config(format!(
                "dropout keep probability must lie in [0, 1], got {}",
                self.keep_prob
            )));
        }
        Ok(())
    }

    fn is_stochastic(&self) -> bool {
        matches!(
            self.mode,
            DropoutMode::TrainStochastic | DropoutMode::McStochastic
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    /// Row-major (out_dim x in_dim).
    weights: Vec<f64>,
    biases: Vec<f64>,
    in_dim: usize,
    out_dim: usize,
}

/// Per-layer optimizer buffers plus the Adam step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    /// First-moment / momentum buffers, congruent to weights and biases.
    pub m_weights: Vec<Vec<f64>>,
    pub m_biases: Vec<Vec<f64>>,
    /// Second-moment buffers (Adam only).
    pub v_weights: Vec<Vec<f64>>,
    pub v_biases: Vec<Vec<f64>>,
    pub step: u64,
}

/// Weights, biases, architecture and optimizer state of the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams {
    sizes: Vec<usize>,
    layers: Vec<Dense>,
    pub opt: OptimizerState,
}

/// Gradient structure congruent to [`ClassifierParams`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Max absolute entry; handy for diagnostics.
    pub fn max_abs(&self) -> f64 {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .flat_map(|v| v.iter())
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    }
}

/// Scaled-uniform bound for a layer: sqrt(6 / (fan_in + fan_out)).
pub fn init_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Create a classifier for `architecture = [input, hidden.., classes]`.
///
/// Weights are drawn uniformly in +/- [`init_bound`]; biases start at zero
/// and optimizer buffers are zeroed. Identical inputs give identical bytes.
pub fn init_params(architecture: &[usize], seed: u64) -> Result<ClassifierParams> {
    if architecture.is_empty() {
        return Err(Error::config("architecture must not be empty"));
    }
    if architecture.len() < 3 {
        return Err(Error::config(
            "architecture needs at least one hidden layer: [input, hidden.., classes]",
        ));
    }
    if architecture.contains(&0) {
        return Err(Error::config("all layer sizes must be >= 1"));
    }

    let mut rng = crate::rng::stream_rng(seed, "nn-init");
    let mut layers = Vec::with_capacity(architecture.len() - 1);
    for w in architecture.windows(2) {
        let (in_dim, out_dim) = (w[0], w[1]);
        let bound = init_bound(in_dim, out_dim);
        let weights = (0..in_dim * out_dim)
            .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * bound)
            .collect();
        layers.push(Dense {
            weights,
            biases: vec![0.0; out_dim],
            in_dim,
            out_dim,
        });
    }

    let opt = OptimizerState {
        m_weights: layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
        m_biases: layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
        v_weights: layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
        v_biases: layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
        step: 0,
    };

    Ok(ClassifierParams {
        sizes: architecture.to_vec(),
        layers,
        opt,
    })
}

impl ClassifierParams {
    pub fn architecture(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn class_count(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// (out_dim, in_dim) of layer `idx`.
    pub fn layer_shape(&self, idx: usize) -> (usize, usize) {
        (self.layers[idx].out_dim, self.layers[idx].in_dim)
    }

    pub fn layer_weights(&self, idx: usize) -> &[f64] {
        &self.layers[idx].weights
    }

    pub fn layer_biases(&self, idx: usize) -> &[f64] {
        &self.layers[idx].biases
    }

    pub fn layer_weights_mut(&mut self, idx: usize) -> &mut [f64] {
        &mut self.layers[idx].weights
    }

    pub fn layer_biases_mut(&mut self, idx: usize) -> &mut [f64] {
        &mut self.layers[idx].biases
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|x| x.is_finite()) && l.biases.iter().all(|x| x.is_finite())
        })
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: self.layers.iter().map(|l| vec![0.0; l.out_dim]).collect(),
        }
    }
}

struct ForwardCache {
    /// Post-activation values per layer, activations[0] is the input batch.
    activations: Vec<Matrix>,
    /// Inverted-dropout mask on the last hidden activation (0 or 1/keep).
    mask: Option<Matrix>,
    probs: Matrix,
}

fn softmax_rows(logits: &mut Matrix) {
    for r in 0..logits.rows() {
        let row = logits.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

fn affine(layer: &Dense, input: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(input.rows(), layer.out_dim);
    for r in 0..input.rows() {
        let x = input.row(r);
        let y = out.row_mut(r);
        for (o, yo) in y.iter_mut().enumerate() {
            let wrow = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            let mut acc = layer.biases[o];
            for (w, xi) in wrow.iter().zip(x.iter()) {
                acc += w * xi;
            }
            *yo = acc;
        }
    }
    out
}

fn forward_cache<R: Rng>(
    params: &ClassifierParams,
    batch: &Matrix,
    dropout: &DropoutConfig,
    rng: &mut R,
) -> Result<ForwardCache> {
    dropout.validate()?;
    if batch.cols() != params.input_dim() {
        return Err(Error::dimension(format!(
            "batch feature dim {} does not match network input dim {}",
            batch.cols(),
            params.input_dim()
        )));
    }

    let n_layers = params.layers.len();
    let mut activations: Vec<Matrix> = Vec::with_capacity(n_layers);
    activations.push(batch.clone());
    let mut mask = None;

    for (li, layer) in params.layers.iter().enumerate() {
        let mut z = affine(layer, activations.last().unwrap());
        if li + 1 < n_layers {
            // hidden layer: ReLU
            for v in z.data.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            // dropout on the last hidden activation only
            if li + 2 == n_layers && dropout.is_stochastic() {
                let keep = dropout.keep_prob;
                let mut m = Matrix::zeros(z.rows(), z.cols());
                for (mv, zv) in m.data.iter_mut().zip(z.data.iter_mut()) {
                    if keep > 0.0 && rng.gen::<f64>() < keep {
                        *mv = 1.0 / keep;
                        *zv *= *mv;
                    } else {
                        *mv = 0.0;
                        *zv = 0.0;
                    }
                }
                mask = Some(m);
            }
            activations.push(z);
        } else {
            softmax_rows(&mut z);
            return Ok(ForwardCache {
                activations,
                mask,
                probs: z,
            });
        }
    }
    unreachable!("architecture has at least two layers")
}

/// Class-probability matrix for `batch`: one normalized row per sample.
pub fn forward<R: Rng>(
    params: &ClassifierParams,
    batch: &Matrix,
    dropout: &DropoutConfig,
    rng: &mut R,
) -> Result<Matrix> {
    Ok(forward_cache(params, batch, dropout, rng)?.probs)
}

/// Mean weighted negative log-likelihood:
/// `(1/n) * sum_i w_i * (-ln probs[i][label_i])`, with `ln` floored at
/// [`LOG_FLOOR`].
pub fn weighted_cross_entropy(probs: &Matrix, labels: &[usize], weights: &[f64]) -> Result<f64> {
    if labels.len() != probs.rows() {
        return Err(Error::dimension(format!(
            "{} labels for {} probability rows",
            labels.len(),
            probs.rows()
        )));
    }
    if weights.len() != probs.rows() {
        return Err(Error::dimension(format!(
            "{} weights for {} probability rows",
            weights.len(),
            probs.rows()
        )));
    }
    let classes = probs.cols();
    let mut total = 0.0;
    for (i, (&label, &w)) in labels.iter().zip(weights.iter()).enumerate() {
        if label >= classes {
            return Err(Error::data(format!(
                "label {} out of range for {} classes",
                label, classes
            )));
        }
        if w < 0.0 {
            return Err(Error::data(format!("negative sample weight {}", w)));
        }
        total += w * -(probs.row(i)[label].max(LOG_FLOOR)).ln();
    }
    Ok(total / probs.rows() as f64)
}

/// Analytic gradients of [`weighted_cross_entropy`] after [`forward`].
///
/// The dropout mask drawn here is the one differentiated through, so a
/// training step does forward and backward in this single call.
pub fn gradients<R: Rng>(
    params: &ClassifierParams,
    batch: &Matrix,
    labels: &[usize],
    weights: &[f64],
    dropout: &DropoutConfig,
    rng: &mut R,
) -> Result<(f64, Gradients)> {
    let cache = forward_cache(params, batch, dropout, rng)?;
    let loss = weighted_cross_entropy(&cache.probs, labels, weights)?;

    let n = batch.rows() as f64;
    let n_layers = params.layers.len();
    let mut grads = params.zero_gradients();

    // dL/dz for the softmax layer: w_i/n * (sigma - onehot)
    let mut delta = cache.probs.clone();
    for i in 0..delta.rows() {
        let w = weights[i] / n;
        let row = delta.row_mut(i);
        row[labels[i]] -= 1.0;
        for v in row.iter_mut() {
            *v *= w;
        }
    }

    for li in (0..n_layers).rev() {
        let layer = &params.layers[li];
        let input = &cache.activations[li];

        // accumulate dW = delta^T * input, db = column sums of delta
        let gw = &mut grads.weights[li];
        let gb = &mut grads.biases[li];
        for r in 0..delta.rows() {
            let drow = delta.row(r);
            let xrow = input.row(r);
            for (o, &d) in drow.iter().enumerate() {
                gb[o] += d;
                let base = o * layer.in_dim;
                for (k, &x) in xrow.iter().enumerate() {
                    gw[base + k] += d * x;
                }
            }
        }

        if li == 0 {
            break;
        }

        // propagate: d_input = delta * W, then through dropout and ReLU
        let mut next = Matrix::zeros(delta.rows(), layer.in_dim);
        for r in 0..delta.rows() {
            let drow = delta.row(r);
            let nrow = next.row_mut(r);
            for (o, &d) in drow.iter().enumerate() {
                let wrow = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (k, &w) in wrow.iter().enumerate() {
                    nrow[k] += d * w;
                }
            }
        }
        if li == n_layers - 1 {
            if let Some(mask) = &cache.mask {
                for (nv, mv) in next.data.iter_mut().zip(mask.data.iter()) {
                    *nv *= mv;
                }
            }
        }
        // ReLU gate: activation zero means the unit was inactive (or dropped)
        let act = &cache.activations[li];
        for (nv, &a) in next.data.iter_mut().zip(act.data.iter()) {
            if a <= 0.0 {
                *nv = 0.0;
            }
        }
        delta = next;
    }

    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn det() -> DropoutConfig {
        DropoutConfig::deterministic()
    }

    #[test]
    fn init_shapes_and_determinism() {
        let p = init_params(&[4, 3, 2], 7).unwrap();
        assert_eq!(p.layer_count(), 2);
        assert_eq!(p.layer_shape(0), (3, 4));
        assert_eq!(p.layer_shape(1), (2, 3));
        assert_eq!(p.layer_biases(0), &[0.0; 3]);
        assert_eq!(p.layer_biases(1), &[0.0; 2]);

        let q = init_params(&[4, 3, 2], 7).unwrap();
        assert_eq!(p, q);
        let r = init_params(&[4, 3, 2], 8).unwrap();
        assert_ne!(p, r);
    }

    #[test]
    fn init_respects_bound() {
        let p = init_params(&[784, 256, 10], 0).unwrap();
        let bound = init_bound(784, 256);
        assert!(p.layer_weights(0).iter().all(|w| w.abs() <= bound));
        let bound2 = init_bound(256, 10);
        assert!(p.layer_weights(1).iter().all(|w| w.abs() <= bound2));
    }

    #[test]
    fn init_rejects_bad_architectures() {
        assert!(matches!(init_params(&[], 0), Err(Error::Config(_))));
        assert!(matches!(init_params(&[4, 2], 0), Err(Error::Config(_))));
        assert!(matches!(init_params(&[4, 0, 2], 0), Err(Error::Config(_))));
    }

    #[test]
    fn zero_network_outputs_uniform() {
        let mut p = init_params(&[3, 4, 5], 0).unwrap();
        for li in 0..p.layer_count() {
            p.layer_weights_mut(li).fill(0.0);
        }
        let batch = Matrix::from_vec(2, 3, vec![0.3, -1.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let probs = forward(&p, &batch, &det(), &mut rng).unwrap();
        for r in 0..2 {
            for &v in probs.row(r) {
                assert!((v - 0.2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn forward_rows_normalized() {
        let p = init_params(&[6, 8, 4], 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<f64> = (0..30).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let batch = Matrix::from_vec(5, 6, data).unwrap();
        let probs = forward(&p, &batch, &det(), &mut rng).unwrap();
        for r in 0..probs.rows() {
            let sum: f64 = probs.row(r).iter().sum();
            assert!((sum - 1.0).abs() <= 1e-9);
            assert!(probs.row(r).iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn deterministic_mode_is_pure() {
        let p = init_params(&[4, 5, 3], 11).unwrap();
        let batch = Matrix::from_vec(1, 4, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut rng1 = ChaCha8Rng::seed_from_u64(1);
        let mut rng2 = ChaCha8Rng::seed_from_u64(999);
        let a = forward(&p, &batch, &det(), &mut rng1).unwrap();
        let b = forward(&p, &batch, &det(), &mut rng2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mc_mode_varies_with_rng() {
        let p = init_params(&[4, 16, 3], 11).unwrap();
        let batch = Matrix::from_vec(1, 4, vec![0.5, -0.2, 0.9, 0.1]).unwrap();
        let cfg = DropoutConfig::mc(0.5);
        let mut rng1 = ChaCha8Rng::seed_from_u64(1);
        let mut rng2 = ChaCha8Rng::seed_from_u64(2);
        let a = forward(&p, &batch, &cfg, &mut rng1).unwrap();
        let b = forward(&p, &batch, &cfg, &mut rng2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn forward_rejects_shape_mismatch() {
        let p = init_params(&[4, 5, 3], 0).unwrap();
        let batch = Matrix::zeros(2, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            forward(&p, &batch, &det(), &mut rng),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn cross_entropy_reference_values() {
        // one-hot at the true label -> zero contribution
        let probs = Matrix::from_vec(1, 3, vec![0.0, 1.0, 0.0]).unwrap();
        let loss = weighted_cross_entropy(&probs, &[1], &[1.0]).unwrap();
        assert!(loss.abs() < 1e-12);

        // uniform over 10 classes -> ln 10
        let probs = Matrix::from_vec(1, 10, vec![0.1; 10]).unwrap();
        let loss = weighted_cross_entropy(&probs, &[4], &[1.0]).unwrap();
        assert!((loss - 10f64.ln()).abs() < 1e-9);

        // all weights zero annihilate the loss
        let probs = Matrix::from_vec(2, 2, vec![0.9, 0.1, 0.2, 0.8]).unwrap();
        let loss = weighted_cross_entropy(&probs, &[1, 0], &[0.0, 0.0]).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn cross_entropy_rejects_length_mismatch() {
        let probs = Matrix::from_vec(2, 2, vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(matches!(
            weighted_cross_entropy(&probs, &[0, 1], &[1.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn loss_is_homogeneous_in_weights() {
        let p = init_params(&[3, 4, 3], 2).unwrap();
        let batch = Matrix::from_vec(2, 3, vec![0.2, 0.4, -0.3, 1.0, 0.0, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let probs = forward(&p, &batch, &det(), &mut rng).unwrap();
        let base = weighted_cross_entropy(&probs, &[0, 2], &[1.0, 0.5]).unwrap();
        let scaled = weighted_cross_entropy(&probs, &[0, 2], &[3.0, 1.5]).unwrap();
        assert!((scaled - 3.0 * base).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_zero_gradients() {
        let p = init_params(&[4, 3, 2], 9).unwrap();
        let batch = Matrix::from_vec(2, 4, vec![0.1; 8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (loss, g) = gradients(&p, &batch, &[0, 1], &[0.0, 0.0], &det(), &mut rng).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn gradients_scale_linearly_with_weights() {
        let p = init_params(&[4, 3, 2], 9).unwrap();
        let batch =
            Matrix::from_vec(2, 4, vec![0.3, -0.1, 0.7, 0.2, 0.9, 0.4, -0.5, 0.6]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, g1) = gradients(&p, &batch, &[0, 1], &[1.0, 0.5], &det(), &mut rng).unwrap();
        let (_, g2) = gradients(&p, &batch, &[0, 1], &[2.0, 1.0], &det(), &mut rng).unwrap();
        for li in 0..p.layer_count() {
            for (a, b) in g1.weights[li].iter().zip(g2.weights[li].iter()) {
                assert!((2.0 * a - b).abs() < 1e-12);
            }
            for (a, b) in g1.biases[li].iter().zip(g2.biases[li].iter()) {
                assert!((2.0 * a - b).abs() < 1e-12);
            }
        }
    }

    /// Central finite-difference check on a small random network.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..3 {
            let p = init_params(&[4, 3, 2], 100 + trial).unwrap();
            let data: Vec<f64> = (0..12).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let batch = Matrix::from_vec(3, 4, data).unwrap();
            let labels = vec![0, 1, 1];
            let weights = vec![1.0, 0.25, 2.0];
            crate::nn::gradcheck::assert_grad_matches_fd(&p, &batch, &labels, &weights, 1e-4);
        }
    }
}

pub mod gradcheck {
    //! Finite-difference gradient checking.
    //!
    //! The numeric side evaluates only [`forward`] and
    //! [`weighted_cross_entropy`], so it stays independent of the analytic
    //! backward pass it is used to verify.

    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Loss of `params` perturbed at one coordinate (deterministic dropout).
    fn loss_at(
        params: &ClassifierParams,
        batch: &Matrix,
        labels: &[usize],
        weights: &[f64],
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let probs = forward(params, batch, &DropoutConfig::deterministic(), &mut rng).unwrap();
        weighted_cross_entropy(&probs, labels, weights).unwrap()
    }

    /// Check every analytic gradient entry against the central finite
    /// difference within `rel_tol` relative error (1e-7 absolute floor).
    /// Returns the first offending entry as an error message.
    pub fn check_grad_matches_fd(
        params: &ClassifierParams,
        batch: &Matrix,
        labels: &[usize],
        weights: &[f64],
        rel_tol: f64,
    ) -> std::result::Result<(), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, analytic) = gradients(
            params,
            batch,
            labels,
            weights,
            &DropoutConfig::deterministic(),
            &mut rng,
        )
        .map_err(|e| e.to_string())?;

        let h = 1e-6;
        let mut p = params.clone();
        for li in 0..p.layer_count() {
            for kind in 0..2 {
                let len = if kind == 0 {
                    p.layer_weights(li).len()
                } else {
                    p.layer_biases(li).len()
                };
                for idx in 0..len {
                    let orig = if kind == 0 {
                        p.layer_weights(li)[idx]
                    } else {
                        p.layer_biases(li)[idx]
                    };
                    let set = |p: &mut ClassifierParams, v: f64| {
                        if kind == 0 {
                            p.layer_weights_mut(li)[idx] = v;
                        } else {
                            p.layer_biases_mut(li)[idx] = v;
                        }
                    };
                    set(&mut p, orig + h);
                    let plus = loss_at(&p, batch, labels, weights);
                    set(&mut p, orig - h);
                    let minus = loss_at(&p, batch, labels, weights);
                    set(&mut p, orig);

                    let numeric = (plus - minus) / (2.0 * h);
                    let a = if kind == 0 {
                        analytic.weights[li][idx]
                    } else {
                        analytic.biases[li][idx]
                    };
                    let diff = (a - numeric).abs();
                    let scale = a.abs().max(numeric.abs());
                    if diff > 1e-7 && diff / scale > rel_tol {
                        return Err(format!(
                            "layer {li} kind {kind} idx {idx}: analytic {a} vs numeric {numeric} (diff {diff})"
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Panicking wrapper around [`check_grad_matches_fd`] for unit tests.
    pub fn assert_grad_matches_fd(
        params: &ClassifierParams,
        batch: &Matrix,
        labels: &[usize],
        weights: &[f64],
        rel_tol: f64,
    ) {
        if let Err(msg) = check_grad_matches_fd(params, batch, labels, weights, rel_tol) {
            panic!("gradient check failed: {msg}");
        }
    }
}
