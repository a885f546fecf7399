//! Training procedures: anonymized extractor training against weak
//! classifiers, joint baselines (plain, noisy classifier weights, classifier
//! dropout), and secondary classifier optimization on frozen features.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal};

use crate::datasets::{subsample_covering_indices, LabeledDataset, TargetEncoding};
use crate::error::{contract, FocaError, Result};
use crate::exec::Exec;
use crate::linalg::Matrix;
use crate::nn::{
    self, backward_from, decide, forward, forward_masked, Activation, Architecture, LossKind,
    NetworkParams, OptimizerState, GRADIENT_CHUNK,
};
use crate::weak::{self, WeakBatchSpec};
use crate::{derive_seed, seeded_rng};

/// How each weak classifier is obtained from its batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakSolver {
    /// Closed-form two-sample solution; two classes, ±1 targets, `k = 1`.
    AnalyticPairRidge,
    /// Exact ridge solution on the whole class-covering batch (squared error).
    AnalyticBatchRidge,
    /// A few gradient-descent-with-momentum steps from a random start.
    Iterative,
}

impl std::str::FromStr for WeakSolver {
    type Err = FocaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "pair_ridge" => Ok(WeakSolver::AnalyticPairRidge),
            "batch_ridge" => Ok(WeakSolver::AnalyticBatchRidge),
            "iterative" => Ok(WeakSolver::Iterative),
            other => Err(FocaError::Config(format!("unknown weak solver '{other}'"))),
        }
    }
}

/// Step learning-rate schedule: multiply by `factor` once `drop_at` (a
/// fraction of the budget) has been reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub drop_at: Option<f64>,
    pub factor: f64,
}

impl LrSchedule {
    pub const CONSTANT: LrSchedule = LrSchedule { drop_at: None, factor: 1.0 };

    /// One ×1/3 drop halfway through.
    pub const HALFWAY_THIRD: LrSchedule = LrSchedule { drop_at: Some(0.5), factor: 1.0 / 3.0 };

    pub fn rate(&self, base: f64, step: usize, total: usize) -> f64 {
        match self.drop_at {
            Some(at) if total > 0 && step as f64 >= at * total as f64 => base * self.factor,
            _ => base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocaConfig {
    /// Total iterations `T` (one weak classifier each).
    pub iterations: usize,
    /// Extractor minibatch size `m`.
    pub minibatch: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Extractor updates per weak classifier `u`.
    pub updates_per_classifier: usize,
    pub weak: WeakBatchSpec,
    pub solver: WeakSolver,
    pub loss: LossKind,
    pub max_norm: Option<f64>,
    pub schedule: LrSchedule,
    pub seed: u64,
    /// Record a log row every this many iterations (0 disables logging).
    pub log_every: usize,
}

impl Default for FocaConfig {
    fn default() -> Self {
        FocaConfig {
            iterations: 1000,
            minibatch: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            updates_per_classifier: 1,
            weak: WeakBatchSpec::default(),
            solver: WeakSolver::AnalyticBatchRidge,
            loss: LossKind::SquaredError,
            max_norm: Some(4.0),
            schedule: LrSchedule::CONSTANT,
            seed: 0,
            log_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JointVariant {
    Plain,
    /// Fresh `N(0, noise_std²)` added to classifier parameters before every
    /// training forward pass.
    Noisy { noise_std: f64 },
    /// Classifier hidden activations kept with probability `keep_prob`
    /// during training and scaled by it at inference.
    Dropout { keep_prob: f64 },
}

impl JointVariant {
    fn validate(&self) -> Result<()> {
        match *self {
            JointVariant::Noisy { noise_std } if !(noise_std >= 0.0) || !noise_std.is_finite() => {
                contract("noise_std must be a finite nonnegative number")
            }
            JointVariant::Dropout { keep_prob } if !(keep_prob > 0.0 && keep_prob <= 1.0) => {
                contract("keep_prob must lie in (0, 1]")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig {
    pub epochs: usize,
    pub minibatch: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub max_norm: Option<f64>,
    pub loss: LossKind,
    pub schedule: LrSchedule,
    pub seed: u64,
    /// Optional cap on the total number of updates (to match another
    /// trainer's budget exactly).
    pub max_updates: Option<usize>,
}

impl Default for JointConfig {
    fn default() -> Self {
        JointConfig {
            epochs: 50,
            minibatch: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            weight_decay: 0.0,
            max_norm: Some(4.0),
            loss: LossKind::SquaredError,
            schedule: LrSchedule::CONSTANT,
            seed: 0,
            max_updates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub iteration: usize,
    pub loss: f64,
    pub train_acc: f64,
    pub test_acc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<LogRecord>,
}

impl TrainingLog {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,loss,train_acc,test_acc")?;
        for r in &self.records {
            let test = r.test_acc.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{}", r.iteration, r.loss, r.train_acc, test)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub feature_extractor: NetworkParams,
    /// `None` for anonymized training, which yields no single classifier.
    pub classifier: Option<NetworkParams>,
    pub log: TrainingLog,
}

/// Loss, correct count and gradients of `classifier ∘ extractor` over a batch.
struct BatchEval {
    loss: f64,
    correct: usize,
    extractor_grad: NetworkParams,
    classifier_grad: NetworkParams,
}

/// Per-sample classifier masks, indexed like `indices`.
type SampleMasks = [Vec<Vec<f64>>];

fn composed_batch(
    extractor: &NetworkParams,
    classifier: &NetworkParams,
    data: &LabeledDataset,
    indices: &[usize],
    loss: LossKind,
    masks: Option<&SampleMasks>,
    exec: Exec,
) -> Result<BatchEval> {
    let ext_arch = extractor.architecture();
    let cls_arch = classifier.architecture();
    let parts = exec.map_chunks(indices.len(), GRADIENT_CHUNK, |range| -> Result<BatchEval> {
        let mut acc = BatchEval {
            loss: 0.0,
            correct: 0,
            extractor_grad: NetworkParams::zeros(&ext_arch),
            classifier_grad: NetworkParams::zeros(&cls_arch),
        };
        for pos in range {
            let i = indices[pos];
            let (feature, ext_cache) = forward(extractor, data.inputs().row(i))?;
            let mask = masks.map(|m| m[pos].as_slice());
            let (out, cls_cache) = forward_masked(classifier, &feature, mask)?;
            let target = data.targets().row(i);
            acc.loss += loss.value(&out, target)?;
            acc.correct += usize::from(decide(&out) == data.labels()[i]);
            let g_out = loss.gradient(&out, target)?;
            let (g_cls, g_feat) = backward_from(classifier, &cls_cache, &g_out)?;
            let (g_ext, _) = backward_from(extractor, &ext_cache, &g_feat)?;
            acc.classifier_grad.add_scaled(&g_cls, 1.0);
            acc.extractor_grad.add_scaled(&g_ext, 1.0);
        }
        Ok(acc)
    });
    let mut total = BatchEval {
        loss: 0.0,
        correct: 0,
        extractor_grad: NetworkParams::zeros(&ext_arch),
        classifier_grad: NetworkParams::zeros(&cls_arch),
    };
    for part in parts {
        let p = part?;
        total.loss += p.loss;
        total.correct += p.correct;
        total.extractor_grad.add_scaled(&p.extractor_grad, 1.0);
        total.classifier_grad.add_scaled(&p.classifier_grad, 1.0);
    }
    let m = indices.len() as f64;
    total.loss /= m;
    total.extractor_grad.scale(1.0 / m);
    total.classifier_grad.scale(1.0 / m);
    Ok(total)
}

/// Extractor outputs for every row of `inputs`.
pub fn extract_features(extractor: &NetworkParams, inputs: &Matrix, exec: Exec) -> Result<Matrix> {
    let rows = exec.map(inputs.rows(), |i| nn::predict(extractor, inputs.row(i)));
    let mut data = Vec::with_capacity(inputs.rows() * extractor.output_dim());
    for r in rows {
        data.extend(r?);
    }
    Matrix::from_vec(inputs.rows(), extractor.output_dim(), data)
}

/// The dataset with inputs replaced by extractor features.
pub fn featurize(extractor: &NetworkParams, dataset: &LabeledDataset, exec: Exec) -> Result<LabeledDataset> {
    dataset.with_inputs(extract_features(extractor, dataset.inputs(), exec)?)
}

/// Fraction of misclassified samples of `classifier ∘ extractor`
/// (`extractor = None` means the inputs already are features).
pub fn classification_error(
    extractor: Option<&NetworkParams>,
    classifier: &NetworkParams,
    data: &LabeledDataset,
) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut wrong = 0usize;
    for (row, &label) in data.inputs().iter_rows().zip(data.labels()) {
        let y = match extractor {
            Some(e) => nn::predict(classifier, &nn::predict(e, row)?)?,
            None => nn::predict(classifier, row)?,
        };
        wrong += usize::from(decide(&y) != label);
    }
    Ok(wrong as f64 / data.len() as f64)
}

fn check_chain(extractor_arch: &Architecture, classifier_arch: &Architecture, data: &LabeledDataset) -> Result<()> {
    if extractor_arch.input_dim() != data.input_dim() {
        return contract(format!(
            "extractor expects {} inputs but the data has {}",
            extractor_arch.input_dim(),
            data.input_dim()
        ));
    }
    if classifier_arch.input_dim() != extractor_arch.output_dim() {
        return contract(format!(
            "classifier expects {} features but the extractor produces {}",
            classifier_arch.input_dim(),
            extractor_arch.output_dim()
        ));
    }
    if classifier_arch.output_dim() != data.targets().cols() {
        return contract("classifier output does not match the target dimension");
    }
    Ok(())
}

fn validate_foca(config: &FocaConfig, classifier_arch: &Architecture, data: &LabeledDataset) -> Result<()> {
    config.weak.validate().map_err(|e| FocaError::Config(e.to_string()))?;
    if config.minibatch == 0 || config.updates_per_classifier == 0 {
        return Err(FocaError::Config("minibatch and updates_per_classifier must be positive".into()));
    }
    let single_linear = classifier_arch.layers().len() == 1
        && classifier_arch.layers()[0].activation == Activation::Identity;
    match config.solver {
        WeakSolver::AnalyticPairRidge => {
            if data.num_classes() != 2 || data.encoding() != TargetEncoding::PlusMinusOne {
                return Err(FocaError::Config(
                    "pair ridge weak classifiers need two classes with ±1 targets".into(),
                ));
            }
            if config.weak.k != 1 {
                return Err(FocaError::Config("pair ridge weak classifiers need k = 1".into()));
            }
        }
        WeakSolver::AnalyticBatchRidge => {}
        WeakSolver::Iterative => {
            if config.weak.inner_steps == 0 {
                return Err(FocaError::Config("iterative weak classifiers need inner_steps >= 1".into()));
            }
        }
    }
    if config.solver != WeakSolver::Iterative {
        if !single_linear {
            return Err(FocaError::Config("analytic weak classifiers need a single linear layer".into()));
        }
        if config.loss != LossKind::SquaredError {
            return Err(FocaError::Config("analytic weak classifiers use the squared error".into()));
        }
    }
    Ok(())
}

/// Fits one weak classifier on the class-covering batch `batch` with the
/// extractor frozen.
pub fn fit_weak_classifier<R: Rng + ?Sized>(
    extractor: &NetworkParams,
    data: &LabeledDataset,
    batch: &[usize],
    classifier_arch: &Architecture,
    config: &FocaConfig,
    rng: &mut R,
) -> Result<NetworkParams> {
    let feats = extract_features(extractor, &data.inputs().select_rows(batch), Exec::Sequential)?;
    let targets = data.targets().select_rows(batch);
    match config.solver {
        WeakSolver::AnalyticPairRidge => {
            let c = weak::solve_pair_ridge(
                feats.row(0),
                feats.row(1),
                targets[(0, 0)],
                targets[(1, 0)],
                config.weak.lambda,
            )?;
            Ok(c.to_params())
        }
        WeakSolver::AnalyticBatchRidge => weak::solve_batch_ridge_multi(&feats, &targets, config.weak.lambda),
        WeakSolver::Iterative => {
            weak::train_weak_iterative_with(&feats, &targets, classifier_arch, config.loss, &config.weak, rng)
        }
    }
}

/// Anonymized extractor training. Each iteration draws a class-covering
/// batch, fits a weak classifier on the frozen features, then performs
/// `updates_per_classifier` momentum-SGD steps on the extractor with that
/// classifier held fixed.
pub fn train_foca(
    data: &LabeledDataset,
    extractor_arch: &Architecture,
    classifier_arch: &Architecture,
    config: &FocaConfig,
) -> Result<TrainedModel> {
    let mut init_rng = seeded_rng(config.seed, 30);
    let extractor = NetworkParams::init_fan_in(extractor_arch, &mut init_rng);
    train_foca_from(data, extractor, classifier_arch, config, None, Exec::default())
}

/// [`train_foca`] from a given extractor, with optional held-out data for
/// the log's `test_acc` (accuracy of the current weak classifier).
pub fn train_foca_from(
    data: &LabeledDataset,
    mut extractor: NetworkParams,
    classifier_arch: &Architecture,
    config: &FocaConfig,
    test: Option<&LabeledDataset>,
    exec: Exec,
) -> Result<TrainedModel> {
    check_chain(&extractor.architecture(), classifier_arch, data)?;
    validate_foca(config, classifier_arch, data)?;
    let mut batch_rng = seeded_rng(config.seed, 31);
    let mut weak_rng = seeded_rng(config.seed, 32);
    let mut opt = OptimizerState::new(&extractor.architecture(), config.learning_rate, config.momentum)?
        .with_max_norm(config.max_norm);
    let mut log = TrainingLog::default();
    let n = data.len();

    for it in 0..config.iterations {
        let batch = weak::sample_class_covering_batch(data.class_index(), config.weak.k, &mut batch_rng)?;
        let classifier = fit_weak_classifier(&extractor, data, &batch, classifier_arch, config, &mut weak_rng)?;
        let frozen = classifier.checksum();
        opt.learning_rate = config.schedule.rate(config.learning_rate, it, config.iterations);

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for _ in 0..config.updates_per_classifier {
            let idx: Vec<usize> = (0..config.minibatch).map(|_| batch_rng.random_range(0..n)).collect();
            let eval = composed_batch(&extractor, &classifier, data, &idx, config.loss, None, exec)?;
            if !eval.loss.is_finite() {
                return Err(FocaError::NonFinite(format!("anonymized loss at iteration {it}")));
            }
            loss_sum += eval.loss;
            correct += eval.correct;
            nn::sgd_step(&mut extractor, &eval.extractor_grad, &mut opt)
                .map_err(|e| FocaError::NonFinite(format!("iteration {it}: {e}")))?;
        }
        assert_eq!(frozen, classifier.checksum(), "weak classifier changed during extractor updates");

        if config.log_every > 0 && (it % config.log_every == 0 || it + 1 == config.iterations) {
            let u = config.updates_per_classifier;
            let test_acc = match test {
                Some(t) => Some(1.0 - classification_error(Some(&extractor), &classifier, t)?),
                None => None,
            };
            log.records.push(LogRecord {
                iteration: it,
                loss: loss_sum / u as f64,
                train_acc: correct as f64 / (u * config.minibatch) as f64,
                test_acc,
            });
        }
    }
    Ok(TrainedModel { feature_extractor: extractor, classifier: None, log })
}

/// Draws `count` weak classifiers at a fixed extractor (e.g. for the
/// averaged decision map). Member `j` uses its own seed derived from `seed`.
pub fn sample_weak_ensemble(
    extractor: &NetworkParams,
    data: &LabeledDataset,
    classifier_arch: &Architecture,
    config: &FocaConfig,
    count: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<NetworkParams>> {
    validate_foca(config, classifier_arch, data)?;
    exec.map(count, |j| {
        let mut rng = seeded_rng(derive_seed(seed, j as u64), 33);
        let batch = weak::sample_class_covering_batch(data.class_index(), config.weak.k, &mut rng)?;
        fit_weak_classifier(extractor, data, &batch, classifier_arch, config, &mut rng)
    })
    .into_iter()
    .collect()
}

/// Joint minibatch SGD with momentum on `classifier ∘ extractor`.
pub fn train_joint(
    data: &LabeledDataset,
    extractor_arch: &Architecture,
    classifier_arch: &Architecture,
    variant: JointVariant,
    config: &JointConfig,
    test: Option<&LabeledDataset>,
) -> Result<TrainedModel> {
    check_chain(extractor_arch, classifier_arch, data)?;
    variant.validate()?;
    if config.minibatch == 0 {
        return Err(FocaError::Config("minibatch must be positive".into()));
    }
    let exec = Exec::default();
    let mut init_rng = seeded_rng(config.seed, 30);
    let mut extractor = NetworkParams::init_fan_in(extractor_arch, &mut init_rng);
    let mut classifier = NetworkParams::init_fan_in(classifier_arch, &mut init_rng);
    let mut order_rng = seeded_rng(config.seed, 31);
    let mut noise_rng = seeded_rng(config.seed, 34);
    let mut dropout_rng = seeded_rng(config.seed, 35);

    let make_opt = |arch: &Architecture| -> Result<OptimizerState> {
        Ok(OptimizerState::new(arch, config.learning_rate, config.momentum)?
            .with_max_norm(config.max_norm)
            .with_weight_decay(config.weight_decay))
    };
    let mut ext_opt = make_opt(extractor_arch)?;
    let mut cls_opt = make_opt(classifier_arch)?;

    let n = data.len();
    let m = config.minibatch.min(n);
    let steps_per_epoch = n.div_ceil(m);
    let total = config.max_updates.map_or(config.epochs * steps_per_epoch, |cap| cap.min(config.epochs * steps_per_epoch));
    let hidden_widths: Vec<usize> = classifier_arch.layers()[..classifier_arch.layers().len() - 1]
        .iter()
        .map(|l| l.out_dim)
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = TrainingLog::default();
    let mut step = 0;

    'epochs: for epoch in 0..config.epochs {
        order.shuffle(&mut order_rng);
        let mut loss_sum = 0.0;
        let mut correct = 0;
        let mut seen = 0;
        for idx in order.chunks(m) {
            if step >= total {
                break 'epochs;
            }
            let lr = config.schedule.rate(config.learning_rate, step, total);
            ext_opt.learning_rate = lr;
            cls_opt.learning_rate = lr;

            let (forward_cls, masks) = match variant {
                JointVariant::Plain => (None, None),
                JointVariant::Noisy { noise_std } => {
                    let normal = Normal::new(0.0, noise_std).expect("validated");
                    let mut noisy = classifier.clone();
                    for l in &mut noisy.layers {
                        l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|v| *v += normal.sample(&mut noise_rng));
                    }
                    (Some(noisy), None)
                }
                JointVariant::Dropout { keep_prob } => {
                    let coin = Bernoulli::new(keep_prob).expect("validated");
                    let masks: Vec<Vec<Vec<f64>>> = idx
                        .iter()
                        .map(|_| {
                            hidden_widths
                                .iter()
                                .map(|&w| (0..w).map(|_| if coin.sample(&mut dropout_rng) { 1.0 } else { 0.0 }).collect())
                                .collect()
                        })
                        .collect();
                    (None, Some(masks))
                }
            };
            let cls_ref = forward_cls.as_ref().unwrap_or(&classifier);
            let eval = composed_batch(&extractor, cls_ref, data, idx, config.loss, masks.as_deref(), exec)?;
            if !eval.loss.is_finite() {
                return Err(FocaError::NonFinite(format!("joint loss at epoch {epoch}, step {step}")));
            }
            nn::sgd_step(&mut extractor, &eval.extractor_grad, &mut ext_opt)?;
            nn::sgd_step(&mut classifier, &eval.classifier_grad, &mut cls_opt)?;
            loss_sum += eval.loss * idx.len() as f64;
            correct += eval.correct;
            seen += idx.len();
            step += 1;
        }
        if seen > 0 {
            let mut record = LogRecord {
                iteration: epoch,
                loss: loss_sum / seen as f64,
                train_acc: correct as f64 / seen as f64,
                test_acc: None,
            };
            if let Some(t) = test {
                let c = inference_classifier(&classifier, variant);
                record.test_acc = Some(1.0 - classification_error(Some(&extractor), &c, t)?);
            }
            log.records.push(record);
        }
    }
    let classifier = inference_classifier(&classifier, variant);
    Ok(TrainedModel { feature_extractor: extractor, classifier: Some(classifier), log })
}

/// Folds the inference-time dropout scaling of hidden activations into the
/// weights of the following layers.
fn inference_classifier(classifier: &NetworkParams, variant: JointVariant) -> NetworkParams {
    let mut c = classifier.clone();
    if let JointVariant::Dropout { keep_prob } = variant {
        for l in c.layers.iter_mut().skip(1) {
            l.weights.iter_mut().for_each(|w| *w *= keep_prob);
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryConfig {
    /// Size of the class-covering training subset.
    pub n_prime: usize,
    pub epochs: usize,
    pub minibatch: usize,
    /// Lower bound on the number of updates; epochs are raised to reach it,
    /// so tiny subsets are not trained for only a handful of steps.
    pub min_updates: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub loss: LossKind,
    pub schedule: LrSchedule,
}

impl Default for SecondaryConfig {
    fn default() -> Self {
        SecondaryConfig {
            n_prime: 10,
            epochs: 30,
            minibatch: 32,
            min_updates: 0,
            learning_rate: 0.05,
            momentum: 0.9,
            loss: LossKind::SoftmaxCrossEntropy,
            schedule: LrSchedule::HALFWAY_THIRD,
        }
    }
}

/// Trains `init` on `train` (already featurized) by minibatch momentum SGD.
pub fn fit_classifier(
    train: &LabeledDataset,
    init: NetworkParams,
    config: &SecondaryConfig,
    order_seed: u64,
) -> Result<NetworkParams> {
    if init.input_dim() != train.input_dim() || init.output_dim() != train.targets().cols() {
        return contract("classifier shape does not match the feature dataset");
    }
    if config.minibatch == 0 {
        return Err(FocaError::Config("minibatch must be positive".into()));
    }
    let mut params = init;
    let arch = params.architecture();
    let mut opt = OptimizerState::new(&arch, config.learning_rate, config.momentum)?;
    let n = train.len();
    let m = config.minibatch.min(n);
    let per_epoch = n.div_ceil(m);
    let epochs = config.epochs.max(config.min_updates.div_ceil(per_epoch));
    let total = epochs * per_epoch;
    let mut rng = seeded_rng(order_seed, 41);
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for idx in order.chunks(m) {
            opt.learning_rate = config.schedule.rate(config.learning_rate, step, total);
            let (loss, grads) =
                nn::batch_gradient(&params, train.inputs(), train.targets(), idx, config.loss, Exec::Sequential)?;
            if !loss.is_finite() {
                return Err(FocaError::NonFinite(format!("secondary loss at step {step}")));
            }
            nn::sgd_step(&mut params, &grads, &mut opt)?;
            step += 1;
        }
    }
    Ok(params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryRun {
    pub seed: u64,
    pub classifier: NetworkParams,
    pub test_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryOutcome {
    pub runs: Vec<SecondaryRun>,
    pub mean_error: f64,
    /// Sample standard deviation across runs (0 for a single run).
    pub std_error: f64,
}

/// Secondary optimization on frozen features: for each seed, draw a
/// class-covering subset of `n_prime` training features, train a fresh
/// classifier on it and measure its test error. Seeds run in parallel.
pub fn train_secondary(
    train: &LabeledDataset,
    test: &LabeledDataset,
    classifier_arch: &Architecture,
    config: &SecondaryConfig,
    seeds: &[u64],
) -> Result<SecondaryOutcome> {
    if seeds.is_empty() {
        return contract("train_secondary needs at least one seed");
    }
    if classifier_arch.input_dim() != train.input_dim() || test.input_dim() != train.input_dim() {
        return contract("classifier and feature dimensions disagree");
    }
    let c = train.num_classes();
    if config.n_prime < c || config.n_prime > train.len() {
        return contract(format!("n_prime {} must lie in [{c}, {}]", config.n_prime, train.len()));
    }
    let runs = Exec::default()
        .map(seeds.len(), |j| -> Result<SecondaryRun> {
            let seed = seeds[j];
            let subset = train.subset(&subsample_covering_indices(train, config.n_prime, seed)?)?;
            let mut init_rng = seeded_rng(seed, 40);
            let init = NetworkParams::init_fan_in(classifier_arch, &mut init_rng);
            let classifier = fit_classifier(&subset, init, config, seed)?;
            let test_error = classification_error(None, &classifier, test)?;
            Ok(SecondaryRun { seed, classifier, test_error })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = runs.iter().map(|r| r.test_error).collect();
    let (mean_error, std_error) = mean_std(&errors);
    Ok(SecondaryOutcome { runs, mean_error, std_error })
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}
