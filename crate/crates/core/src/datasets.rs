//! Labeled datasets: synthetic generators, CIFAR-10 binary ingestion,
//! standardization and class-covering subsampling.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{contract, FocaError, Result};
use crate::linalg::Matrix;
use crate::seeded_rng;

/// How class labels are turned into regression/classification targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetEncoding {
    /// Two classes, scalar target `2·label − 1` (label 0 ↦ −1, label 1 ↦ +1).
    PlusMinusOne,
    /// One-hot vector of length `num_classes`.
    OneHot,
}

impl TargetEncoding {
    pub fn encode(self, label: usize, num_classes: usize) -> Vec<f64> {
        match self {
            TargetEncoding::PlusMinusOne => vec![2.0 * label as f64 - 1.0],
            TargetEncoding::OneHot => {
                let mut t = vec![0.0; num_classes];
                t[label] = 1.0;
                t
            }
        }
    }

    pub fn dim(self, num_classes: usize) -> usize {
        match self {
            TargetEncoding::PlusMinusOne => 1,
            TargetEncoding::OneHot => num_classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    inputs: Matrix,
    labels: Vec<usize>,
    targets: Matrix,
    num_classes: usize,
    encoding: TargetEncoding,
    class_index: Vec<Vec<usize>>,
}

impl LabeledDataset {
    /// Builds targets and the per-class index. Every class in
    /// `0..num_classes` must occur at least once.
    pub fn new(
        inputs: Matrix,
        labels: Vec<usize>,
        num_classes: usize,
        encoding: TargetEncoding,
    ) -> Result<Self> {
        if inputs.rows() != labels.len() {
            return contract(format!(
                "{} input rows but {} labels",
                inputs.rows(),
                labels.len()
            ));
        }
        if num_classes < 2 {
            return contract("a labeled dataset needs at least two classes");
        }
        if encoding == TargetEncoding::PlusMinusOne && num_classes != 2 {
            return contract("±1 targets are only defined for two classes");
        }
        let mut class_index = vec![Vec::new(); num_classes];
        for (i, &l) in labels.iter().enumerate() {
            if l >= num_classes {
                return contract(format!("label {l} out of range for {num_classes} classes"));
            }
            class_index[l].push(i);
        }
        if let Some(c) = class_index.iter().position(Vec::is_empty) {
            return contract(format!("class {c} has no samples"));
        }
        let tdim = encoding.dim(num_classes);
        let mut tdata = Vec::with_capacity(labels.len() * tdim);
        for &l in &labels {
            tdata.extend(encoding.encode(l, num_classes));
        }
        let targets = Matrix::from_vec(labels.len(), tdim, tdata)?;
        Ok(LabeledDataset { inputs, labels, targets, num_classes, encoding, class_index })
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn targets(&self) -> &Matrix {
        &self.targets
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn encoding(&self) -> TargetEncoding {
        self.encoding
    }

    pub fn class_index(&self) -> &[Vec<usize>] {
        &self.class_index
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    /// Same labels with different inputs (e.g. features of a frozen extractor).
    pub fn with_inputs(&self, inputs: Matrix) -> Result<Self> {
        if inputs.rows() != self.len() {
            return contract("replacement inputs must keep the sample count");
        }
        Ok(LabeledDataset { inputs, ..self.clone() })
    }

    /// Same samples with a different target encoding.
    pub fn with_encoding(&self, encoding: TargetEncoding) -> Result<Self> {
        LabeledDataset::new(self.inputs.clone(), self.labels.clone(), self.num_classes, encoding)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return contract(format!("index {bad} out of range for {} samples", self.len()));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        LabeledDataset::new(self.inputs.select_rows(indices), labels, self.num_classes, self.encoding)
    }

    /// CSV with a header row, one sample per line, label last.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (0..self.input_dim()).map(|j| format!("x{j}")).collect();
        writeln!(out, "{},label", header.join(","))?;
        for (row, label) in self.inputs.iter_rows().zip(&self.labels) {
            for v in row {
                write!(out, "{v},")?;
            }
            writeln!(out, "{label}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyShape {
    TwoArcs,
    GaussianBlobs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyConfig {
    pub samples_per_class: usize,
    pub noise_std: f64,
    pub shape: ToyShape,
    pub seed: u64,
}

/// Generates the two-class toy set described by `config`. The blob variant
/// uses centers `(−1, 0)` and `(1, 0)` with `noise_std` as the blob spread
/// and ±1 targets.
pub fn gen_toy(config: &ToyConfig) -> Result<LabeledDataset> {
    match config.shape {
        ToyShape::TwoArcs => gen_two_arcs(config),
        ToyShape::GaussianBlobs => gen_gaussian_blobs(
            &[vec![-1.0, 0.0], vec![1.0, 0.0]],
            config.noise_std,
            config.samples_per_class,
            config.seed,
        )?
        .with_encoding(TargetEncoding::PlusMinusOne),
    }
}

/// Two interleaving half circles of radius 1. Class 0 follows
/// `(cos a, sin a)`, class 1 follows `(1 − cos a, 0.5 − sin a)` for
/// `a ∈ [0, π]` evenly spaced, plus isotropic Gaussian noise.
pub fn gen_two_arcs(config: &ToyConfig) -> Result<LabeledDataset> {
    let n = config.samples_per_class;
    if n == 0 {
        return contract("samples_per_class must be at least 1");
    }
    if !(config.noise_std >= 0.0) {
        return contract("noise_std must be nonnegative");
    }
    let mut rng = seeded_rng(config.seed, 0);
    let noise = Normal::new(0.0, config.noise_std).expect("validated std");
    let angle = |i: usize| if n == 1 { 0.0 } else { PI * i as f64 / (n - 1) as f64 };
    let mut data = Vec::with_capacity(4 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for class in 0..2 {
        for i in 0..n {
            let a = angle(i);
            let (x, y) = if class == 0 { (a.cos(), a.sin()) } else { (1.0 - a.cos(), 0.5 - a.sin()) };
            let (dx, dy) = if config.noise_std > 0.0 {
                (noise.sample(&mut rng), noise.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            data.push(x + dx);
            data.push(y + dy);
            labels.push(class);
        }
    }
    LabeledDataset::new(Matrix::from_vec(2 * n, 2, data)?, labels, 2, TargetEncoding::PlusMinusOne)
}

/// Class `c` drawn from `N(centers[c], std²·I)`, one-hot targets.
pub fn gen_gaussian_blobs(
    centers: &[Vec<f64>],
    std: f64,
    n_per_class: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if centers.len() < 2 {
        return contract("need at least two centers");
    }
    if n_per_class == 0 {
        return contract("n_per_class must be at least 1");
    }
    if !(std >= 0.0) {
        return contract("std must be nonnegative");
    }
    let dim = centers[0].len();
    if dim == 0 || centers.iter().any(|c| c.len() != dim) {
        return contract("centers must share one positive dimension");
    }
    let mut rng = seeded_rng(seed, 0);
    let normal = Normal::new(0.0, std).expect("validated std");
    let mut data = Vec::with_capacity(centers.len() * n_per_class * dim);
    let mut labels = Vec::with_capacity(centers.len() * n_per_class);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            data.extend(center.iter().map(|&m| m + normal.sample(&mut rng)));
            labels.push(c);
        }
    }
    LabeledDataset::new(
        Matrix::from_vec(labels.len(), dim, data)?,
        labels,
        centers.len(),
        TargetEncoding::OneHot,
    )
}

/// `num_classes` centers drawn from `N(0, scale²·I)` in `dim` dimensions.
pub fn random_centers(num_classes: usize, dim: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed, 1);
    let normal = Normal::new(0.0, scale).expect("finite scale");
    (0..num_classes).map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect()).collect()
}

/// A fixed random two-layer map `x ↦ W₂·tanh(W₁x + b₁)` used to bend
/// otherwise linearly separable data.
#[derive(Debug, Clone)]
pub struct RandomWarp {
    first: Matrix,
    first_bias: Vec<f64>,
    second: Matrix,
}

impl RandomWarp {
    pub fn new(in_dim: usize, hidden: usize, out_dim: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed, 2);
        let mut draw = |rows: usize, cols: usize, std: f64| {
            let normal = Normal::new(0.0, std).expect("finite std");
            Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| normal.sample(&mut rng)).collect())
                .expect("shape by construction")
        };
        let first = draw(hidden, in_dim, (1.0 / in_dim as f64).sqrt());
        let second = draw(out_dim, hidden, (1.0 / hidden as f64).sqrt());
        let first_bias = draw(1, hidden, 0.5).into_vec();
        RandomWarp { first, first_bias, second }
    }

    pub fn map(&self, x: &[f64]) -> Result<Vec<f64>> {
        let h: Vec<f64> = self
            .first
            .matvec(x)?
            .into_iter()
            .zip(&self.first_bias)
            .map(|(v, b)| (v + b).tanh())
            .collect();
        self.second.matvec(&h)
    }

    pub fn apply(&self, dataset: &LabeledDataset) -> Result<LabeledDataset> {
        let mut data = Vec::with_capacity(dataset.len() * self.second.rows());
        for row in dataset.inputs().iter_rows() {
            data.extend(self.map(row)?);
        }
        dataset.with_inputs(Matrix::from_vec(dataset.len(), self.second.rows(), data)?)
    }
}

pub const CIFAR10_RECORD_BYTES: usize = 3073;
pub const CIFAR10_CLASSES: usize = 10;

/// Parses CIFAR-10 binary records: one label byte followed by 3072 pixel
/// bytes (three 32×32 planes, channel-major then row-major). Pixels are
/// scaled to `[0, 1]`.
pub fn parse_cifar10_records(bytes: &[u8]) -> Result<(Vec<f64>, Vec<usize>)> {
    if bytes.len() % CIFAR10_RECORD_BYTES != 0 {
        return Err(FocaError::Format(format!(
            "{} bytes is not a whole number of {CIFAR10_RECORD_BYTES}-byte records",
            bytes.len()
        )));
    }
    let n = bytes.len() / CIFAR10_RECORD_BYTES;
    let mut pixels = Vec::with_capacity(n * (CIFAR10_RECORD_BYTES - 1));
    let mut labels = Vec::with_capacity(n);
    for (r, record) in bytes.chunks_exact(CIFAR10_RECORD_BYTES).enumerate() {
        let label = record[0] as usize;
        if label >= CIFAR10_CLASSES {
            return Err(FocaError::Format(format!("record {r} has label byte {label}")));
        }
        labels.push(label);
        pixels.extend(record[1..].iter().map(|&b| f64::from(b) / 255.0));
    }
    Ok((pixels, labels))
}

pub fn load_cifar10_binary<P: AsRef<Path>>(paths: &[P]) -> Result<LabeledDataset> {
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for path in paths {
        let bytes = std::fs::read(path.as_ref())?;
        let (p, l) = parse_cifar10_records(&bytes).map_err(|e| match e {
            FocaError::Format(msg) => {
                FocaError::Format(format!("{}: {msg}", path.as_ref().display()))
            }
            other => other,
        })?;
        pixels.extend(p);
        labels.extend(l);
    }
    let n = labels.len();
    LabeledDataset::new(
        Matrix::from_vec(n, CIFAR10_RECORD_BYTES - 1, pixels)?,
        labels,
        CIFAR10_CLASSES,
        TargetEncoding::OneHot,
    )
}

/// Per-dimension affine transform fitted on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Divisor per dimension; 1 for zero-variance dimensions.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(inputs: &Matrix) -> Self {
        let mean = inputs.column_means();
        let mut var = vec![0.0; inputs.cols()];
        for row in inputs.iter_rows() {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let n = inputs.rows().max(1) as f64;
        let scale = var.into_iter().map(|v| {
            let s = (v / n).sqrt();
            if s > 0.0 { s } else { 1.0 }
        });
        Standardizer { mean, scale: scale.collect() }
    }

    pub fn transform(&self, inputs: &Matrix) -> Result<Matrix> {
        if inputs.cols() != self.mean.len() {
            return contract("standardizer fitted on a different input dimension");
        }
        let mut out = inputs.clone();
        for i in 0..out.rows() {
            for ((x, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.scale) {
                *x = (*x - m) / s;
            }
        }
        Ok(out)
    }

    pub fn apply(&self, dataset: &LabeledDataset) -> Result<LabeledDataset> {
        dataset.with_inputs(self.transform(dataset.inputs())?)
    }
}

/// Standardizes a training set, returning the fitted transform for reuse on
/// held-out data.
pub fn standardize(dataset: &LabeledDataset) -> Result<(LabeledDataset, Standardizer)> {
    let st = Standardizer::fit(dataset.inputs());
    Ok((st.apply(dataset)?, st))
}

/// Indices of a subsample of size `n_prime` covering every class: one
/// uniform pick per class first, then a uniform fill without replacement.
pub fn subsample_covering_indices(
    dataset: &LabeledDataset,
    n_prime: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let c = dataset.num_classes();
    if n_prime < c || n_prime > dataset.len() {
        return contract(format!(
            "subsample size {n_prime} must lie in [{c}, {}]",
            dataset.len()
        ));
    }
    let mut rng = seeded_rng(seed, 3);
    let mut taken = vec![false; dataset.len()];
    let mut picks = Vec::with_capacity(n_prime);
    for members in dataset.class_index() {
        let i = members[rng.random_range(0..members.len())];
        taken[i] = true;
        picks.push(i);
    }
    let rest: Vec<usize> = (0..dataset.len()).filter(|&i| !taken[i]).collect();
    for j in index::sample(&mut rng, rest.len(), n_prime - c) {
        picks.push(rest[j]);
    }
    Ok(picks)
}

pub fn subsample_covering(
    dataset: &LabeledDataset,
    n_prime: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    dataset.subset(&subsample_covering_indices(dataset, n_prime, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arcs(n: usize, noise: f64, seed: u64) -> LabeledDataset {
        gen_two_arcs(&ToyConfig {
            samples_per_class: n,
            noise_std: noise,
            shape: ToyShape::TwoArcs,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn two_arcs_first_point_and_counts() {
        let d = arcs(100, 0.0, 1);
        assert_eq!(d.inputs().row(0), &[1.0, 0.0]);
        assert_eq!(d.len(), 200);
        assert_eq!(d.class_index()[0].len(), 100);
        assert_eq!(d.class_index()[1].len(), 100);
        assert_eq!(d.targets().row(0), &[-1.0]);
        assert_eq!(d.targets().row(150), &[1.0]);
    }

    #[test]
    fn two_arcs_deterministic() {
        assert_eq!(arcs(30, 0.1, 5), arcs(30, 0.1, 5));
        assert_ne!(arcs(30, 0.1, 5), arcs(30, 0.1, 6));
    }

    #[test]
    fn blobs_degenerate_and_counts() {
        let centers = random_centers(10, 3, 2.0, 4);
        let d = gen_gaussian_blobs(&centers, 0.0, 50, 1).unwrap();
        assert_eq!(d.len(), 500);
        assert_eq!(d.num_classes(), 10);
        for (i, &l) in d.labels().iter().enumerate() {
            assert_eq!(d.inputs().row(i), centers[l].as_slice());
        }
        assert!(gen_gaussian_blobs(&centers[..1], 1.0, 5, 1).is_err());
    }

    #[test]
    fn blob_means_within_clt_bound() {
        let centers = vec![vec![0.0, 5.0], vec![3.0, -1.0], vec![-2.0, 2.0]];
        let (std, n) = (0.7, 400);
        for seed in 0..5 {
            let d = gen_gaussian_blobs(&centers, std, n, seed).unwrap();
            for (c, members) in d.class_index().iter().enumerate() {
                let sub = d.inputs().select_rows(members);
                for (m, t) in sub.column_means().iter().zip(&centers[c]) {
                    assert!((m - t).abs() < 4.0 * std / (n as f64).sqrt());
                }
            }
        }
    }

    #[test]
    fn cifar_record_parsing() {
        let mut bytes = vec![0u8; 2 * CIFAR10_RECORD_BYTES];
        bytes[0] = 7;
        bytes[1] = 255;
        bytes[CIFAR10_RECORD_BYTES] = 2;
        let (px, labels) = parse_cifar10_records(&bytes).unwrap();
        assert_eq!(labels, vec![7, 2]);
        assert_eq!(px.len(), 2 * 3072);
        assert_eq!(px[0], 1.0);
        assert_eq!(px[1], 0.0);

        assert!(matches!(parse_cifar10_records(&bytes[..100]), Err(FocaError::Format(_))));
        bytes[0] = 10;
        assert!(matches!(parse_cifar10_records(&bytes), Err(FocaError::Format(_))));
    }

    #[test]
    fn standardize_cases() {
        let inputs = Matrix::from_rows(&[
            vec![3.0, -1.0, 0.0],
            vec![3.0, 1.0, 2.0],
            vec![3.0, -1.0, 4.0],
            vec![3.0, 1.0, 6.0],
        ])
        .unwrap();
        let d = LabeledDataset::new(inputs, vec![0, 1, 0, 1], 2, TargetEncoding::PlusMinusOne).unwrap();
        let (s, st) = standardize(&d).unwrap();
        assert!(s.inputs().column(0).iter().all(|&v| v == 0.0));
        assert_eq!(s.inputs().column(1), vec![-1.0, 1.0, -1.0, 1.0]);
        let m = s.inputs().column_means();
        assert!(m[2].abs() < 1e-15);

        // held-out data uses the training statistics
        let test = Matrix::from_rows(&[vec![4.0, 0.0, 3.0], vec![4.0, 2.0, 3.0]]).unwrap();
        let t = st.transform(&test).unwrap();
        assert_eq!(t[(0, 0)], 1.0);
        assert_eq!(t[(0, 2)], 0.0);
        assert_ne!(Standardizer::fit(&test).mean, st.mean);
    }

    #[test]
    fn subsample_one_per_class_and_full() {
        let centers = random_centers(10, 2, 3.0, 0);
        let d = gen_gaussian_blobs(&centers, 1.0, 20, 0).unwrap();
        let s = subsample_covering(&d, 10, 3).unwrap();
        let mut labels = s.labels().to_vec();
        labels.sort_unstable();
        assert_eq!(labels, (0..10).collect::<Vec<_>>());

        let mut all = subsample_covering_indices(&d, d.len(), 9).unwrap();
        all.sort_unstable();
        assert_eq!(all, (0..d.len()).collect::<Vec<_>>());

        assert!(subsample_covering(&d, 9, 0).is_err());
        assert!(subsample_covering(&d, d.len() + 1, 0).is_err());
        assert_eq!(subsample_covering(&d, 100, 4).unwrap(), subsample_covering(&d, 100, 4).unwrap());
    }

    #[test]
    fn csv_export_has_label_last() {
        let d = arcs(2, 0.0, 0);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x0,x1,label"));
        assert_eq!(lines.next(), Some("1,0,0"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn warp_is_fixed_and_changes_dimension() {
        let d = arcs(10, 0.0, 0);
        let w = RandomWarp::new(2, 8, 5, 11);
        let a = w.apply(&d).unwrap();
        assert_eq!(a.input_dim(), 5);
        assert_eq!(a, RandomWarp::new(2, 8, 5, 11).apply(&d).unwrap());
    }
}
