//! Weak classifiers: ridge-regularized solutions on small class-covering
//! batches of frozen features, their iterative counterparts and ensembles.
//!
//! Regularization convention used throughout: the objective is
//! `Σᵢ loss(θ̄ᵀfᵢ + θ⁰, tᵢ) + λ‖θ̄‖²`. The bias is never penalized.
//! [`solve_pair_ridge`] instead uses the two-sample form whose normal
//! equation is `[(f₁−f₂)(f₁−f₂)ᵀ + λI]θ̄ = (t₁−t₂)(f₁−f₂)`; that solution
//! equals [`solve_batch_ridge`] on the same two samples with `λ/2`.

use rand::Rng;

use crate::error::{contract, FocaError, Result};
use crate::exec::Exec;
use crate::linalg::{self, Matrix};
use crate::nn::{
    self, batch_gradient, Activation, Architecture, Layer, LayerSpec, LossKind, NetworkParams,
    OptimizerState,
};
use crate::seeded_rng;

/// Affine scalar classifier `θ̄ᵀf + θ⁰`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub theta_bar: Vec<f64>,
    pub theta_0: f64,
}

impl LinearClassifier {
    pub fn output(&self, feature: &[f64]) -> f64 {
        linalg::dot(&self.theta_bar, feature) + self.theta_0
    }

    /// Single identity layer with one output.
    pub fn to_params(&self) -> NetworkParams {
        let spec = LayerSpec {
            in_dim: self.theta_bar.len(),
            out_dim: 1,
            activation: Activation::Identity,
        };
        NetworkParams {
            layers: vec![Layer { spec, weights: self.theta_bar.clone(), bias: vec![self.theta_0] }],
        }
    }
}

/// Hyper-parameters of one weak-classifier fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakBatchSpec {
    /// Samples drawn per class.
    pub k: usize,
    /// Ridge strength, > 0.
    pub lambda: f64,
    /// Gradient steps of the iterative solver.
    pub inner_steps: usize,
    /// Std of the Gaussian initialization of the iterative solver.
    pub init_std: f64,
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Default for WeakBatchSpec {
    fn default() -> Self {
        WeakBatchSpec {
            k: 1,
            lambda: 1e-4,
            inner_steps: 32,
            init_std: 0.1,
            learning_rate: 0.1,
            momentum: 0.9,
        }
    }
}

impl WeakBatchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return contract("k must be at least 1");
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return contract(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.init_std >= 0.0) {
            return contract("init_std must be nonnegative");
        }
        Ok(())
    }
}

/// `k` indices per class, drawn uniformly with replacement from each
/// class's members, class by class.
pub fn sample_class_covering_batch<R: Rng + ?Sized>(
    class_index: &[Vec<usize>],
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if let Some(c) = class_index.iter().position(Vec::is_empty) {
        return contract(format!("class {c} has no samples to draw from"));
    }
    let mut batch = Vec::with_capacity(k * class_index.len());
    for members in class_index {
        for _ in 0..k {
            batch.push(members[rng.random_range(0..members.len())]);
        }
    }
    Ok(batch)
}

/// Closed-form minimum-norm ridge solution for one sample per class:
/// `θ̄ = (t₁−t₂)/(λ+‖f₁−f₂‖²)·(f₁−f₂)`, `θ⁰ = ½[(t₁+t₂) − θ̄ᵀ(f₁+f₂)]`.
pub fn solve_pair_ridge(
    f1: &[f64],
    f2: &[f64],
    t1: f64,
    t2: f64,
    lambda: f64,
) -> Result<LinearClassifier> {
    if f1.len() != f2.len() {
        return contract("pair features differ in dimension");
    }
    if !(lambda > 0.0) {
        return contract(format!("lambda must be positive, got {lambda}"));
    }
    let diff = linalg::sub(f1, f2);
    let scale = (t1 - t2) / (lambda + linalg::dot(&diff, &diff));
    let theta_bar: Vec<f64> = diff.iter().map(|d| scale * d).collect();
    let sum: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| a + b).collect();
    let theta_0 = 0.5 * ((t1 + t2) - linalg::dot(&theta_bar, &sum));
    Ok(LinearClassifier { theta_bar, theta_0 })
}

/// Exact minimizer of `Σᵢ‖Wfᵢ + b − tᵢ‖² + λ‖W‖²` for a matrix of targets,
/// returned as one identity layer. Features and targets are centered, then
/// the primal (`d×d`) or dual (`n×n`) regularized normal equations are
/// solved, whichever is smaller.
pub fn solve_batch_ridge_multi(features: &Matrix, targets: &Matrix, lambda: f64) -> Result<NetworkParams> {
    let (n, d) = (features.rows(), features.cols());
    if n < 2 {
        return contract("batch ridge needs at least two samples");
    }
    if targets.rows() != n {
        return contract("one target row per feature row required");
    }
    if !(lambda > 0.0) {
        return contract(format!("lambda must be positive, got {lambda}"));
    }
    if !features.is_finite() || !targets.is_finite() {
        return Err(FocaError::NonFinite("features or targets of a weak batch".into()));
    }
    let o = targets.cols();
    let f_mean = features.column_means();
    let t_mean = targets.column_means();
    let mut fc = features.clone();
    let mut tc = targets.clone();
    for i in 0..n {
        fc.row_mut(i).iter_mut().zip(&f_mean).for_each(|(x, m)| *x -= m);
        tc.row_mut(i).iter_mut().zip(&t_mean).for_each(|(x, m)| *x -= m);
    }

    // weights[r] holds output r's weight vector
    let mut weights = vec![vec![0.0; d]; o];
    if d <= n {
        let mut a = fc.gram();
        a.add_diagonal(lambda);
        let l = linalg::cholesky(&a)?;
        let rhs = fc.transpose().matmul(&tc)?;
        for (r, w) in weights.iter_mut().enumerate() {
            let b = rhs.column(r);
            *w = linalg::solve_lower_transpose(&l, &linalg::solve_lower(&l, &b));
        }
    } else {
        let mut a = fc.outer_gram();
        a.add_diagonal(lambda);
        let l = linalg::cholesky(&a)?;
        for (r, w) in weights.iter_mut().enumerate() {
            let alpha = linalg::solve_lower_transpose(&l, &linalg::solve_lower(&l, &tc.column(r)));
            for (i, &ai) in alpha.iter().enumerate() {
                w.iter_mut().zip(fc.row(i)).for_each(|(wj, x)| *wj += ai * x);
            }
        }
    }
    let bias = weights
        .iter()
        .zip(&t_mean)
        .map(|(w, tm)| tm - linalg::dot(w, &f_mean))
        .collect();
    let spec = LayerSpec { in_dim: d, out_dim: o, activation: Activation::Identity };
    Ok(NetworkParams { layers: vec![Layer { spec, weights: weights.concat(), bias }] })
}

/// Exact minimizer of `Σᵢ(θ̄ᵀfᵢ + θ⁰ − tᵢ)² + λ‖θ̄‖²`.
pub fn solve_batch_ridge(features: &Matrix, targets: &[f64], lambda: f64) -> Result<LinearClassifier> {
    let t = Matrix::from_vec(targets.len(), 1, targets.to_vec())?;
    let p = solve_batch_ridge_multi(features, &t, lambda)?;
    let layer = p.layers.into_iter().next().expect("one layer");
    Ok(LinearClassifier { theta_bar: layer.weights, theta_0: layer.bias[0] })
}

/// `Σᵢ(θ̄ᵀfᵢ + θ⁰ − tᵢ)² + λ‖θ̄‖²`.
pub fn ridge_objective(c: &LinearClassifier, features: &Matrix, targets: &[f64], lambda: f64) -> f64 {
    let data: f64 = features
        .iter_rows()
        .zip(targets)
        .map(|(f, t)| (c.output(f) - t).powi(2))
        .sum();
    data + lambda * linalg::dot(&c.theta_bar, &c.theta_bar)
}

/// Fits a (possibly multi-layer) classifier head on a frozen feature batch
/// by full-batch gradient descent with momentum, starting from
/// `N(0, init_std²)` parameters. Minimizes `Σᵢ L + λ‖W‖²` over all weight
/// matrices (biases unpenalized); the step uses the gradient of that
/// objective divided by the batch size.
pub fn train_weak_iterative(
    features: &Matrix,
    targets: &Matrix,
    arch: &Architecture,
    loss: LossKind,
    spec: &WeakBatchSpec,
    seed: u64,
) -> Result<NetworkParams> {
    let mut rng = seeded_rng(seed, 10);
    train_weak_iterative_with(features, targets, arch, loss, spec, &mut rng)
}

pub fn train_weak_iterative_with<R: Rng + ?Sized>(
    features: &Matrix,
    targets: &Matrix,
    arch: &Architecture,
    loss: LossKind,
    spec: &WeakBatchSpec,
    rng: &mut R,
) -> Result<NetworkParams> {
    spec.validate()?;
    if spec.inner_steps == 0 {
        return contract("inner_steps must be at least 1");
    }
    if features.rows() == 0 || features.rows() != targets.rows() {
        return contract("weak batch features and targets must be nonempty and aligned");
    }
    if features.cols() != arch.input_dim() || targets.cols() != arch.output_dim() {
        return contract("classifier architecture does not match the weak batch");
    }
    let mut params = NetworkParams::init_gaussian(arch, spec.init_std, rng);
    let mut opt = OptimizerState::new(arch, spec.learning_rate, spec.momentum)?;
    let all: Vec<usize> = (0..features.rows()).collect();
    let reg = 2.0 * spec.lambda / features.rows() as f64;
    for step in 0..spec.inner_steps {
        let (value, mut grads) = batch_gradient(&params, features, targets, &all, loss, Exec::Sequential)?;
        if !value.is_finite() {
            return Err(FocaError::Numerical(format!("weak classifier diverged at step {step}")));
        }
        for (g, p) in grads.layers.iter_mut().zip(&params.layers) {
            g.weights.iter_mut().zip(&p.weights).for_each(|(gw, w)| *gw += reg * w);
        }
        nn::sgd_step(&mut params, &grads, &mut opt).map_err(|e| match e {
            FocaError::NonFinite(_) => {
                FocaError::Numerical(format!("weak classifier diverged at step {step}"))
            }
            other => other,
        })?;
    }
    Ok(params)
}

/// Arithmetic mean of the raw (pre-softmax) outputs of `classifiers`.
pub fn ensemble_average_output(classifiers: &[NetworkParams], feature: &[f64]) -> Result<Vec<f64>> {
    let first = classifiers.first().ok_or_else(|| {
        FocaError::Contract("ensemble needs at least one classifier".into())
    })?;
    let mut acc = vec![0.0; first.output_dim()];
    for c in classifiers {
        if c.output_dim() != acc.len() {
            return contract("ensemble members disagree on output dimension");
        }
        let y = nn::predict(c, feature)?;
        acc.iter_mut().zip(y).for_each(|(a, v)| *a += v);
    }
    let n = classifiers.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_ridge_unit_case() {
        let c = solve_pair_ridge(&[1.0, 0.0], &[0.0, 0.0], 1.0, -1.0, 1.0).unwrap();
        assert_eq!(c.theta_bar, vec![1.0, 0.0]);
        assert_eq!(c.theta_0, -0.5);
    }

    #[test]
    fn pair_ridge_coincident_features() {
        let c = solve_pair_ridge(&[0.3, 0.7], &[0.3, 0.7], 1.0, -1.0, 1e-4).unwrap();
        assert_eq!(c.theta_bar, vec![0.0, 0.0]);
        assert_eq!(c.theta_0, 0.0);
        assert!(solve_pair_ridge(&[0.0], &[1.0], 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn batch_ridge_constant_targets() {
        let f = Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.0, 3.0]]).unwrap();
        let c = solve_batch_ridge(&f, &[2.5, 2.5, 2.5], 0.1).unwrap();
        assert!(c.theta_bar.iter().all(|v| v.abs() < 1e-14));
        assert!((c.theta_0 - 2.5).abs() < 1e-14);
    }

    #[test]
    fn batch_ridge_rejects_bad_input() {
        let f = Matrix::from_rows(&[vec![1.0, f64::NAN], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(solve_batch_ridge(&f, &[1.0, -1.0], 0.1), Err(FocaError::NonFinite(_))));
        let f = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert!(solve_batch_ridge(&f, &[1.0], 0.1).is_err());
    }

    #[test]
    fn covering_batch_counts() {
        let classes = vec![vec![0, 1, 2], vec![3], vec![4, 5]];
        let mut rng = seeded_rng(0, 0);
        let b = sample_class_covering_batch(&classes, 3, &mut rng).unwrap();
        assert_eq!(b.len(), 9);
        assert!(b[..3].iter().all(|i| *i <= 2));
        assert_eq!(&b[3..6], &[3, 3, 3]);
        assert!(sample_class_covering_batch(&[vec![0], vec![]], 1, &mut rng).is_err());
    }

    #[test]
    fn iterative_requires_steps() {
        let arch = Architecture::mlp(&[2, 1], Activation::Identity, Activation::Identity).unwrap();
        let f = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let t = Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let spec = WeakBatchSpec { inner_steps: 0, ..Default::default() };
        assert!(train_weak_iterative(&f, &t, &arch, LossKind::SquaredError, &spec, 0).is_err());
    }

    #[test]
    fn iterative_reports_divergence() {
        let arch = Architecture::mlp(&[2, 1], Activation::Identity, Activation::Identity).unwrap();
        let f = Matrix::from_rows(&[vec![100.0, 0.0], vec![0.0, 100.0]]).unwrap();
        let t = Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let spec = WeakBatchSpec { inner_steps: 500, learning_rate: 0.5, momentum: 0.0, ..Default::default() };
        let err = train_weak_iterative(&f, &t, &arch, LossKind::SquaredError, &spec, 0).unwrap_err();
        assert!(err.to_string().contains("diverged at step"), "{err}");
    }

    #[test]
    fn ensemble_mean() {
        let a = LinearClassifier { theta_bar: vec![0.0], theta_0: 1.0 }.to_params();
        let b = LinearClassifier { theta_bar: vec![0.0], theta_0: -1.0 }.to_params();
        assert_eq!(ensemble_average_output(&[a.clone()], &[3.0]).unwrap(), vec![1.0]);
        assert_eq!(ensemble_average_output(&[a, b], &[3.0]).unwrap(), vec![0.0]);
        assert!(ensemble_average_output(&[], &[3.0]).is_err());
    }
}
