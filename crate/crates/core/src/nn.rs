//! Dense feed-forward networks with analytic gradients, losses and a
//! momentum SGD optimizer with max-norm and weight decay.
//!
//! Weights of a layer are stored row-major with shape `(out_dim, in_dim)`.
//! Flattening is layer-major; inside a layer the weight matrix comes first
//! (row-major) followed by the bias.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{contract, FocaError, Result};
use crate::exec::Exec;
use crate::linalg::Matrix;

/// Element-wise activation applied after a layer's affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }

    /// Whether the activation maps into the positive reals and has a
    /// derivative that never vanishes. The point-like feature result for
    /// anonymized training assumes this; ReLU breaks both halves.
    pub fn satisfies_c1(self) -> bool {
        matches!(self, Activation::Sigmoid)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = FocaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(FocaError::Config(format!("unknown activation '{other}'"))),
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return contract(format!("layer dims must be positive, got {in_dim}->{out_dim}"));
        }
        Ok(LayerSpec { in_dim, out_dim, activation })
    }

    pub fn num_params(&self) -> usize {
        self.out_dim * (self.in_dim + 1)
    }
}

/// A validated chain of layers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Architecture {
    layers: Vec<LayerSpec>,
}

impl Architecture {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self> {
        if layers.is_empty() {
            return contract("an architecture needs at least one layer");
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim != pair[1].in_dim {
                return contract(format!(
                    "layer {i} outputs {} values but layer {} expects {}",
                    pair[0].out_dim,
                    i + 1,
                    pair[1].in_dim
                ));
            }
        }
        for l in &layers {
            LayerSpec::new(l.in_dim, l.out_dim, l.activation)?;
        }
        Ok(Architecture { layers })
    }

    /// Multi-layer perceptron over `dims` (`dims.len() - 1` layers), with
    /// `hidden` on every layer but the last, which uses `output`.
    pub fn mlp(dims: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        if dims.len() < 2 {
            return contract("an MLP needs at least an input and an output dimension");
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                LayerSpec::new(dims[i], dims[i + 1], act)
            })
            .collect::<Result<Vec<_>>>()?;
        Architecture::new(layers)
    }

    /// Parses `"4-16-16-2"`, `"4-16-2:relu"` or `"4-16-2:relu:identity"`
    /// (hidden activation, then output activation). Missing activations
    /// fall back to the given defaults.
    pub fn parse(text: &str, hidden: Activation, output: Activation) -> Result<Self> {
        let mut parts = text.trim().split(':');
        let dims = parts
            .next()
            .unwrap_or_default()
            .split('-')
            .map(|d| {
                d.trim()
                    .parse::<usize>()
                    .map_err(|_| FocaError::Config(format!("bad layer width '{d}' in '{text}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        let hidden = match parts.next() {
            Some(a) => a.parse()?,
            None => hidden,
        };
        let output = match parts.next() {
            Some(a) => a.parse()?,
            None => output,
        };
        if parts.next().is_some() {
            return Err(FocaError::Config(format!("too many ':' sections in '{text}'")));
        }
        Architecture::mlp(&dims, hidden, output).map_err(|e| FocaError::Config(e.to_string()))
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(LayerSpec::num_params).sum()
    }

    /// Flat-vector ranges of each layer (weights and bias together).
    pub fn layer_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.layers
            .iter()
            .map(|l| {
                let r = start..start + l.num_params();
                start = r.end;
                r
            })
            .collect()
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.input_dim())?;
        for l in &self.layers {
            write!(f, "-{}", l.out_dim)?;
        }
        let hidden = self.layers[0].activation;
        let out = self.layers[self.layers.len() - 1].activation;
        write!(f, ":{hidden}:{out}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    /// Row-major `out_dim x in_dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(spec: LayerSpec) -> Self {
        Layer {
            spec,
            weights: vec![0.0; spec.out_dim * spec.in_dim],
            bias: vec![0.0; spec.out_dim],
        }
    }

    pub fn weight_row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.spec.in_dim..(r + 1) * self.spec.in_dim]
    }

    fn affine(&self, input: &[f64]) -> Vec<f64> {
        let n = self.spec.in_dim;
        self.bias
            .iter()
            .enumerate()
            .map(|(r, b)| {
                let row = &self.weights[r * n..(r + 1) * n];
                b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect()
    }
}

/// Weights and biases of a dense network. Also used for gradients and
/// optimizer velocities, which share the parameter shape.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub layers: Vec<Layer>,
}

impl NetworkParams {
    pub fn zeros(arch: &Architecture) -> Self {
        NetworkParams { layers: arch.layers().iter().map(|&s| Layer::zeros(s)).collect() }
    }

    /// Zero-mean Gaussian weights with fan-in scaling (`sqrt(2/in)` for
    /// ReLU layers, `sqrt(1/in)` otherwise), zero biases.
    pub fn init_fan_in<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> Self {
        let mut p = NetworkParams::zeros(arch);
        for layer in &mut p.layers {
            let gain = match layer.spec.activation {
                Activation::Relu => 2.0,
                _ => 1.0,
            };
            let std = (gain / layer.spec.in_dim as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("finite std");
            layer.weights.iter_mut().for_each(|w| *w = normal.sample(rng));
        }
        p
    }

    /// Every weight and bias drawn from `N(0, std²)`.
    pub fn init_gaussian<R: Rng + ?Sized>(arch: &Architecture, std: f64, rng: &mut R) -> Self {
        let mut p = NetworkParams::zeros(arch);
        if std > 0.0 {
            let normal = Normal::new(0.0, std).expect("finite std");
            for layer in &mut p.layers {
                layer.weights.iter_mut().for_each(|w| *w = normal.sample(rng));
                layer.bias.iter_mut().for_each(|b| *b = normal.sample(rng));
            }
        }
        p
    }

    pub fn architecture(&self) -> Architecture {
        Architecture { layers: self.layers.iter().map(|l| l.spec).collect() }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].spec.out_dim
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.spec.num_params()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn unflatten(values: &[f64], arch: &Architecture) -> Result<Self> {
        if values.len() != arch.num_params() {
            return contract(format!(
                "flat vector has {} entries but architecture {arch} needs {}",
                values.len(),
                arch.num_params()
            ));
        }
        let mut offset = 0;
        let layers = arch
            .layers()
            .iter()
            .map(|&spec| {
                let nw = spec.in_dim * spec.out_dim;
                let weights = values[offset..offset + nw].to_vec();
                let bias = values[offset + nw..offset + nw + spec.out_dim].to_vec();
                offset += nw + spec.out_dim;
                Layer { spec, weights, bias }
            })
            .collect();
        Ok(NetworkParams { layers })
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    fn same_shape(&self, other: &NetworkParams) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.spec.in_dim == b.spec.in_dim && a.spec.out_dim == b.spec.out_dim
            })
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &NetworkParams, scale: f64) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += scale * y);
            a.bias.iter_mut().zip(&b.bias).for_each(|(x, y)| *x += scale * y);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|v| *v *= factor);
        }
    }

    /// Sum of squared weights (biases excluded).
    pub fn weight_sq_norm(&self) -> f64 {
        self.layers.iter().flat_map(|l| &l.weights).map(|w| w * w).sum()
    }

    /// Hash of the exact bit patterns of all parameters.
    pub fn checksum(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for l in &self.layers {
            for v in l.weights.iter().chain(&l.bias) {
                v.to_bits().hash(&mut h);
            }
        }
        h.finish()
    }
}

/// Intermediate values recorded by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input, `activations[l + 1]` the output of layer `l`.
    activations: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
    masks: Option<Vec<Vec<f64>>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("cache has the input at least")
    }

    pub fn input(&self) -> &[f64] {
        &self.activations[0]
    }
}

pub fn forward(params: &NetworkParams, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    forward_masked(params, input, None)
}

/// Forward pass where the post-activations of every layer except the last
/// are multiplied element-wise by `masks[l]` (dropout masks during
/// training, or the keep probability at inference).
pub fn forward_masked(
    params: &NetworkParams,
    input: &[f64],
    masks: Option<&[Vec<f64>]>,
) -> Result<(Vec<f64>, ForwardCache)> {
    if input.len() != params.input_dim() {
        return contract(format!(
            "input has {} values but the network expects {}",
            input.len(),
            params.input_dim()
        ));
    }
    let n = params.layers.len();
    if let Some(m) = masks {
        if m.len() != n.saturating_sub(1)
            || m.iter().zip(&params.layers).any(|(mask, l)| mask.len() != l.spec.out_dim)
        {
            return contract("dropout masks do not match the hidden layer widths");
        }
    }
    let mut activations = Vec::with_capacity(n + 1);
    let mut pre_activations = Vec::with_capacity(n);
    activations.push(input.to_vec());
    for (li, layer) in params.layers.iter().enumerate() {
        let z = layer.affine(&activations[li]);
        let mut a: Vec<f64> = z.iter().map(|&v| layer.spec.activation.apply(v)).collect();
        if let Some(m) = masks.and_then(|m| m.get(li)) {
            a.iter_mut().zip(m).for_each(|(v, k)| *v *= k);
        }
        pre_activations.push(z);
        activations.push(a);
    }
    let output = activations[n].clone();
    Ok((
        output,
        ForwardCache { activations, pre_activations, masks: masks.map(<[_]>::to_vec) },
    ))
}

/// Forward pass without keeping a cache.
pub fn predict(params: &NetworkParams, input: &[f64]) -> Result<Vec<f64>> {
    if input.len() != params.input_dim() {
        return contract(format!(
            "input has {} values but the network expects {}",
            input.len(),
            params.input_dim()
        ));
    }
    let mut x = input.to_vec();
    for layer in &params.layers {
        x = layer.affine(&x).into_iter().map(|z| layer.spec.activation.apply(z)).collect();
    }
    Ok(x)
}

/// Applies `predict` to every row.
pub fn predict_rows(params: &NetworkParams, inputs: &Matrix) -> Result<Matrix> {
    let mut data = Vec::with_capacity(inputs.rows() * params.output_dim());
    for row in inputs.iter_rows() {
        data.extend(predict(params, row)?);
    }
    Matrix::from_vec(inputs.rows(), params.output_dim(), data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `‖y − t‖²` (no ½ factor).
    SquaredError,
    /// `−Σ t log softmax(y)` with a one-hot target.
    SoftmaxCrossEntropy,
}

impl LossKind {
    fn check(self, output: &[f64], target: &[f64]) -> Result<()> {
        if output.len() != target.len() {
            return contract(format!(
                "target has {} values but output has {}",
                target.len(),
                output.len()
            ));
        }
        if self == LossKind::SoftmaxCrossEntropy {
            let ones = target.iter().filter(|&&t| t == 1.0).count();
            let zeros = target.iter().filter(|&&t| t == 0.0).count();
            if ones != 1 || ones + zeros != target.len() {
                return contract("softmax cross-entropy needs a one-hot target");
            }
        }
        Ok(())
    }

    pub fn value(self, output: &[f64], target: &[f64]) -> Result<f64> {
        self.check(output, target)?;
        Ok(match self {
            LossKind::SquaredError => output.iter().zip(target).map(|(y, t)| (y - t).powi(2)).sum(),
            LossKind::SoftmaxCrossEntropy => {
                let lse = log_sum_exp(output);
                output.iter().zip(target).map(|(y, t)| t * (lse - y)).sum()
            }
        })
    }

    /// Gradient of the loss with respect to the network output.
    pub fn gradient(self, output: &[f64], target: &[f64]) -> Result<Vec<f64>> {
        self.check(output, target)?;
        Ok(match self {
            LossKind::SquaredError => {
                output.iter().zip(target).map(|(y, t)| 2.0 * (y - t)).collect()
            }
            LossKind::SoftmaxCrossEntropy => {
                softmax(output).into_iter().zip(target).map(|(p, t)| p - t).collect()
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::SquaredError => "squared_error",
            LossKind::SoftmaxCrossEntropy => "softmax_cross_entropy",
        }
    }
}

impl FromStr for LossKind {
    type Err = FocaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "squared_error" | "l2" | "mse" => Ok(LossKind::SquaredError),
            "softmax_cross_entropy" | "cross_entropy" | "ce" => Ok(LossKind::SoftmaxCrossEntropy),
            other => Err(FocaError::Config(format!("unknown loss '{other}'"))),
        }
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Class decision for a network output: sign for scalar outputs (`>= 0` is
/// class 1, matching the `2·label − 1` target encoding), argmax otherwise.
pub fn decide(output: &[f64]) -> usize {
    if output.len() == 1 {
        usize::from(output[0] >= 0.0)
    } else {
        output
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0
    }
}

pub fn backward(
    params: &NetworkParams,
    cache: &ForwardCache,
    loss: LossKind,
    target: &[f64],
) -> Result<(NetworkParams, Vec<f64>)> {
    let g = loss.gradient(cache.output(), target)?;
    backward_from(params, cache, &g)
}

/// Back-propagates `grad_output` (∂L/∂output) and returns the parameter
/// gradient together with ∂L/∂input.
pub fn backward_from(
    params: &NetworkParams,
    cache: &ForwardCache,
    grad_output: &[f64],
) -> Result<(NetworkParams, Vec<f64>)> {
    let n = params.layers.len();
    let stale = cache.pre_activations.len() != n
        || cache.activations.len() != n + 1
        || params
            .layers
            .iter()
            .zip(&cache.pre_activations)
            .enumerate()
            .any(|(i, (l, z))| z.len() != l.spec.out_dim || cache.activations[i].len() != l.spec.in_dim);
    if stale {
        return contract("forward cache does not match the network shape");
    }
    if grad_output.len() != params.output_dim() {
        return contract("output gradient has the wrong length");
    }
    let mut grads = NetworkParams::zeros(&params.architecture());
    let mut delta = grad_output.to_vec();
    for li in (0..n).rev() {
        let layer = &params.layers[li];
        let z = &cache.pre_activations[li];
        let mask = cache.masks.as_ref().and_then(|m| m.get(li));
        for (o, d) in delta.iter_mut().enumerate() {
            *d *= layer.spec.activation.derivative(z[o]);
            if let Some(m) = mask {
                *d *= m[o];
            }
        }
        let input = &cache.activations[li];
        let in_dim = layer.spec.in_dim;
        let g = &mut grads.layers[li];
        for (o, &d) in delta.iter().enumerate() {
            g.bias[o] = d;
            if d != 0.0 {
                for (gw, &x) in g.weights[o * in_dim..(o + 1) * in_dim].iter_mut().zip(input) {
                    *gw = d * x;
                }
            }
        }
        let mut prev = vec![0.0; in_dim];
        for (o, &d) in delta.iter().enumerate() {
            if d != 0.0 {
                for (p, &w) in prev.iter_mut().zip(layer.weight_row(o)) {
                    *p += w * d;
                }
            }
        }
        delta = prev;
    }
    Ok((grads, delta))
}

/// Samples per chunk when per-sample gradients are fanned out. Fixed so that
/// the reduction order, and thus the result, does not depend on the
/// execution mode.
pub const GRADIENT_CHUNK: usize = 16;

/// Mean loss and mean parameter gradient over `indices`.
pub fn batch_gradient(
    params: &NetworkParams,
    inputs: &Matrix,
    targets: &Matrix,
    indices: &[usize],
    loss: LossKind,
    exec: Exec,
) -> Result<(f64, NetworkParams)> {
    if indices.is_empty() {
        return contract("cannot compute a gradient over an empty batch");
    }
    let arch = params.architecture();
    let parts = exec.map_chunks(indices.len(), GRADIENT_CHUNK, |range| -> Result<(f64, NetworkParams)> {
        let mut acc = NetworkParams::zeros(&arch);
        let mut total = 0.0;
        for &i in &indices[range] {
            let (out, cache) = forward(params, inputs.row(i))?;
            total += loss.value(&out, targets.row(i))?;
            let (g, _) = backward(params, &cache, loss, targets.row(i))?;
            acc.add_scaled(&g, 1.0);
        }
        Ok((total, acc))
    });
    let mut grads = NetworkParams::zeros(&arch);
    let mut total = 0.0;
    for part in parts {
        let (l, g) = part?;
        total += l;
        grads.add_scaled(&g, 1.0);
    }
    let m = indices.len() as f64;
    grads.scale(1.0 / m);
    Ok((total / m, grads))
}

/// Momentum SGD state.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub learning_rate: f64,
    pub momentum: f64,
    pub velocity: NetworkParams,
    pub max_norm: Option<f64>,
    pub weight_decay: f64,
}

impl OptimizerState {
    pub fn new(arch: &Architecture, learning_rate: f64, momentum: f64) -> Result<Self> {
        if !(learning_rate > 0.0) || !learning_rate.is_finite() {
            return contract(format!("learning rate must be positive, got {learning_rate}"));
        }
        if !(0.0..1.0).contains(&momentum) {
            return contract(format!("momentum must lie in [0, 1), got {momentum}"));
        }
        Ok(OptimizerState {
            learning_rate,
            momentum,
            velocity: NetworkParams::zeros(arch),
            max_norm: None,
            weight_decay: 0.0,
        })
    }

    pub fn with_max_norm(mut self, cap: Option<f64>) -> Self {
        self.max_norm = cap;
        self
    }

    pub fn with_weight_decay(mut self, weight_decay: f64) -> Self {
        self.weight_decay = weight_decay;
        self
    }
}

/// `v ← μ·v − η·(g + wd·p)`, `p ← p + v`, then max-norm if configured.
pub fn sgd_step(
    params: &mut NetworkParams,
    grads: &NetworkParams,
    state: &mut OptimizerState,
) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(&state.velocity) {
        return contract("parameter, gradient and velocity shapes differ");
    }
    if !grads.is_finite() {
        return Err(FocaError::NonFinite("gradient passed to sgd_step".into()));
    }
    let (eta, mu, wd) = (state.learning_rate, state.momentum, state.weight_decay);
    for ((p, g), v) in params.layers.iter_mut().zip(&grads.layers).zip(&mut state.velocity.layers) {
        let update = |p: &mut [f64], g: &[f64], v: &mut [f64]| {
            for ((p, g), v) in p.iter_mut().zip(g).zip(v.iter_mut()) {
                *v = mu * *v - eta * (g + wd * *p);
                *p += *v;
            }
        };
        update(&mut p.weights, &g.weights, &mut v.weights);
        update(&mut p.bias, &g.bias, &mut v.bias);
    }
    if let Some(cap) = state.max_norm {
        apply_max_norm(params, cap);
    }
    if !params.is_finite() {
        return Err(FocaError::NonFinite("parameters after sgd_step".into()));
    }
    Ok(())
}

/// Rescales every weight row whose L2 norm exceeds `cap` to norm `cap`.
/// Rows within a relative 1e-12 of the cap count as capped, so a rescaled
/// row is never touched again.
pub fn apply_max_norm(params: &mut NetworkParams, cap: f64) {
    debug_assert!(cap > 0.0);
    let limit = cap * (1.0 + 1e-12);
    for layer in &mut params.layers {
        let n = layer.spec.in_dim;
        for row in layer.weights.chunks_exact_mut(n) {
            let norm = row.iter().map(|w| w * w).sum::<f64>().sqrt();
            if norm > limit {
                let s = cap / norm;
                row.iter_mut().for_each(|w| *w *= s);
            }
        }
    }
}
