//! Measurements on trained models and their features: the feature
//! optimality residual, straight-line paths between classifier solutions
//! with Fisher-metric distances and error curves, PCA, normalized
//! one-vs-rest LDA with threshold scans, and feature compactness.

use std::ops::Range;

use crate::datasets::LabeledDataset;
use crate::error::{contract, FocaError, Result};
use crate::exec::Exec;
use crate::linalg::{self, Matrix};
use crate::nn::{self, backward_from, forward, Architecture, LossKind, NetworkParams, GRADIENT_CHUNK};
use crate::trainers::classification_error;

/// Straight line between a large-dataset and a small-dataset classifier
/// solution, cut into `segments` equal pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub theta_ld: Vec<f64>,
    pub theta_sd: Vec<f64>,
    pub segments: usize,
}

impl PathSpec {
    pub fn new(theta_ld: Vec<f64>, theta_sd: Vec<f64>, segments: usize) -> Result<Self> {
        if theta_ld.len() != theta_sd.len() {
            return contract("path endpoints differ in length");
        }
        if segments == 0 {
            return contract("a path needs at least one segment");
        }
        Ok(PathSpec { theta_ld, theta_sd, segments })
    }

    pub fn dim(&self) -> usize {
        self.theta_ld.len()
    }
}

/// `θ^α = (α·θ_SD + (P−α)·θ_LD) / P`.
pub fn interpolate_params(path: &PathSpec, alpha: usize) -> Result<Vec<f64>> {
    let p = path.segments;
    if alpha > p {
        return contract(format!("alpha {alpha} outside [0, {p}]"));
    }
    let (a, b) = (alpha as f64, (p - alpha) as f64);
    Ok(path
        .theta_sd
        .iter()
        .zip(&path.theta_ld)
        .map(|(sd, ld)| (a * sd + b * ld) / p as f64)
        .collect())
}

/// Empirical Fisher information `E[∇L ∇Lᵀ]` at a parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMetric {
    pub matrix: Matrix,
    pub eval_point: Vec<f64>,
    pub subset_size: usize,
}

impl FisherMetric {
    /// Symmetric and PSD up to `-1e-8·trace` on the smallest eigenvalue.
    pub fn check_psd(&self) -> Result<bool> {
        let eig = linalg::symmetric_eigen(&self.matrix)?;
        let floor = -1e-8 * self.matrix.trace().abs();
        let min = eig.values.last().copied().unwrap_or(0.0);
        Ok(self.matrix.max_asymmetry() <= 1e-12 * (1.0 + self.matrix.trace().abs()) && min >= floor)
    }
}

/// Mean of per-sample gradient outer products of the data loss (no
/// regularization) with respect to the classifier parameters, over the
/// rows of `features` and `targets`.
pub fn fisher_matrix(
    classifier: &NetworkParams,
    features: &Matrix,
    targets: &Matrix,
    loss: LossKind,
    exec: Exec,
) -> Result<FisherMetric> {
    if features.rows() == 0 || features.rows() != targets.rows() {
        return contract("Fisher matrix needs aligned, nonempty features and targets");
    }
    let n = features.rows();
    let p = classifier.num_params();
    let parts = exec.map_chunks(n, GRADIENT_CHUNK, |range| -> Result<Matrix> {
        let mut acc = Matrix::zeros(p, p);
        for i in range {
            let (_, cache) = forward(classifier, features.row(i))?;
            let (g, _) = nn::backward(classifier, &cache, loss, targets.row(i))?;
            let g = g.flatten();
            if g.iter().any(|v| !v.is_finite()) {
                return Err(FocaError::NonFinite(format!("per-sample gradient of sample {i}")));
            }
            for a in 0..p {
                if g[a] == 0.0 {
                    continue;
                }
                let row = acc.row_mut(a);
                for b in a..p {
                    row[b] += g[a] * g[b];
                }
            }
        }
        Ok(acc)
    });
    let mut matrix = Matrix::zeros(p, p);
    for part in parts {
        let part = part?;
        matrix.as_mut_slice().iter_mut().zip(part.as_slice()).for_each(|(m, v)| *m += v);
    }
    let scale = 1.0 / n as f64;
    for a in 0..p {
        for b in a..p {
            let v = matrix[(a, b)] * scale;
            matrix[(a, b)] = v;
            matrix[(b, a)] = v;
        }
    }
    Ok(FisherMetric { matrix, eval_point: classifier.flatten(), subset_size: n })
}

/// `sqrt((b−a)ᵀ M (b−a))`, clamped at zero against round-off.
pub fn segment_distance(metric: &Matrix, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || metric.rows() != a.len() || !metric.is_square() {
        return contract("segment endpoints and metric disagree in dimension");
    }
    let d = linalg::sub(b, a);
    let q = linalg::dot(&d, &metric.matvec(&d)?);
    Ok(q.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicReport {
    /// `sqrt(Σ segment²)`.
    pub total: f64,
    pub segments: Vec<f64>,
}

fn geodesic_from_blocks(
    path: &PathSpec,
    metrics: &[FisherMetric],
    block: Range<usize>,
) -> Result<GeodesicReport> {
    if metrics.len() != path.segments {
        return contract(format!(
            "{} metrics supplied for {} segments",
            metrics.len(),
            path.segments
        ));
    }
    let mut segments = Vec::with_capacity(path.segments);
    for (alpha, metric) in metrics.iter().enumerate() {
        if metric.matrix.rows() != path.dim() {
            return contract("metric dimension does not match the path");
        }
        let a = interpolate_params(path, alpha)?;
        let b = interpolate_params(path, alpha + 1)?;
        let sub = metric.matrix.submatrix(block.clone(), block.clone());
        segments.push(segment_distance(&sub, &a[block.clone()], &b[block.clone()])?);
    }
    let total = segments.iter().map(|s| s * s).sum::<f64>().sqrt();
    Ok(GeodesicReport { total, segments })
}

/// Approximate geodesic distance from `θ_LD` to `θ_SD`: the root sum of
/// squared segment lengths, each measured with the metric evaluated at the
/// segment start `θ^α`.
pub fn geodesic_distance(path: &PathSpec, metrics: &[FisherMetric]) -> Result<GeodesicReport> {
    geodesic_from_blocks(path, metrics, 0..path.dim())
}

/// Per-block distances: the displacement is restricted to each block and
/// measured with the matching diagonal block of the full metric at `θ^α`.
pub fn layerwise_distance(
    path: &PathSpec,
    metrics: &[FisherMetric],
    partition: &[Range<usize>],
) -> Result<Vec<GeodesicReport>> {
    let mut next = 0;
    for r in partition {
        if r.start != next || r.end <= r.start {
            return contract(format!("partition has a gap or overlap at {}", r.start));
        }
        next = r.end;
    }
    if next != path.dim() {
        return contract("partition does not cover the parameter vector");
    }
    partition.iter().map(|r| geodesic_from_blocks(path, metrics, r.clone())).collect()
}

/// Fisher metrics at `θ^0 … θ^{P−1}` for a classifier of shape `arch`.
pub fn path_metrics(
    path: &PathSpec,
    arch: &Architecture,
    data: &LabeledDataset,
    loss: LossKind,
    exec: Exec,
) -> Result<Vec<FisherMetric>> {
    exec.map(path.segments, |alpha| {
        let theta = NetworkParams::unflatten(&interpolate_params(path, alpha)?, arch)?;
        fisher_matrix(&theta, data.inputs(), data.targets(), loss, Exec::Sequential)
    })
    .into_iter()
    .collect()
}

/// Test error of the classifier at each of the `P + 1` path points.
pub fn error_along_path(path: &PathSpec, arch: &Architecture, test: &LabeledDataset) -> Result<Vec<f64>> {
    (0..=path.segments)
        .map(|alpha| {
            let theta = NetworkParams::unflatten(&interpolate_params(path, alpha)?, arch)?;
            classification_error(None, &theta, test)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub mean: Vec<f64>,
    /// All covariance eigenvalues, decreasing.
    pub eigenvalues: Vec<f64>,
    /// `dim × d`, one principal axis per row.
    pub basis: Matrix,
    /// `n × dim` projections of the centered features.
    pub projected: Matrix,
}

impl PcaResult {
    /// Mean squared distance between each row and its reconstruction.
    pub fn reconstruction_error(&self, features: &Matrix) -> f64 {
        let mut total = 0.0;
        for (i, row) in features.iter_rows().enumerate() {
            let mut rec = self.mean.clone();
            for (k, &c) in self.projected.row(i).iter().enumerate() {
                rec.iter_mut().zip(self.basis.row(k)).for_each(|(r, b)| *r += c * b);
            }
            total += row.iter().zip(&rec).map(|(x, r)| (x - r).powi(2)).sum::<f64>();
        }
        total / features.rows().max(1) as f64
    }
}

/// Projects features onto the top-`dim` eigenvectors of their covariance.
pub fn pca_project(features: &Matrix, dim: usize) -> Result<PcaResult> {
    let (n, d) = (features.rows(), features.cols());
    if n < 2 {
        return contract("PCA needs at least two samples");
    }
    if dim == 0 || dim > d {
        return contract(format!("PCA dimension {dim} outside [1, {d}]"));
    }
    let mean = features.column_means();
    let mut centered = features.clone();
    for i in 0..n {
        centered.row_mut(i).iter_mut().zip(&mean).for_each(|(x, m)| *x -= m);
    }
    let mut cov = centered.gram();
    cov.as_mut_slice().iter_mut().for_each(|v| *v /= (n - 1) as f64);
    let eig = linalg::symmetric_eigen(&cov)?;
    let mut basis = Matrix::zeros(dim, d);
    for k in 0..dim {
        for j in 0..d {
            basis[(k, j)] = eig.vectors[(j, k)];
        }
    }
    let projected = centered.matmul(&basis.transpose())?;
    Ok(PcaResult { mean, eigenvalues: eig.values, basis, projected })
}

/// Rows scaled to unit L2 norm; zero rows stay zero and are counted.
pub fn normalize_features(features: &Matrix) -> (Matrix, usize) {
    let mut out = features.clone();
    let mut zero_rows = 0;
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let norm = linalg::norm(row);
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        } else {
            zero_rows += 1;
        }
    }
    (out, zero_rows)
}

/// Between-group and within-group scatter matrices for a two-group split:
/// `S_B = Σ_g n_g(μ_g−μ)(μ_g−μ)ᵀ`, `S_W = Σ_g Σ_{x∈g}(x−μ_g)(x−μ_g)ᵀ`.
pub fn two_group_scatter(features: &Matrix, positive: &[bool]) -> Result<(Matrix, Matrix)> {
    if positive.len() != features.rows() {
        return contract("one group flag per feature row required");
    }
    let d = features.cols();
    let pos: Vec<usize> = (0..positive.len()).filter(|&i| positive[i]).collect();
    let neg: Vec<usize> = (0..positive.len()).filter(|&i| !positive[i]).collect();
    if pos.is_empty() || neg.is_empty() {
        return contract("both LDA groups must be nonempty");
    }
    let mu = features.column_means();
    let mut sb = Matrix::zeros(d, d);
    let mut sw = Matrix::zeros(d, d);
    for group in [&pos, &neg] {
        let rows = features.select_rows(group);
        let mg = rows.column_means();
        let diff = linalg::sub(&mg, &mu);
        let ng = group.len() as f64;
        for a in 0..d {
            for b in 0..d {
                sb[(a, b)] += ng * diff[a] * diff[b];
            }
        }
        let mut c = rows;
        for i in 0..c.rows() {
            c.row_mut(i).iter_mut().zip(&mg).for_each(|(x, m)| *x -= m);
        }
        let g = c.gram();
        sw.as_mut_slice().iter_mut().zip(g.as_slice()).for_each(|(s, v)| *s += v);
    }
    Ok((sb, sw))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdChoice {
    pub threshold: f64,
    /// +1: values above the threshold are predicted positive; −1: below.
    pub polarity: f64,
    pub train_error: f64,
    pub test_error: f64,
}

/// Threshold chosen on the training projections and, as the
/// best-achievable reference, on the test projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub train_chosen: ThresholdChoice,
    pub test_chosen: ThresholdChoice,
}

fn error_at(values: &[f64], positive: &[bool], threshold: f64, polarity: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let wrong = values
        .iter()
        .zip(positive)
        .filter(|(&v, &p)| (polarity * (v - threshold) > 0.0) != p)
        .count();
    wrong as f64 / values.len() as f64
}

fn best_threshold(values: &[f64], positive: &[bool]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut candidates = Vec::with_capacity(sorted.len() + 1);
    candidates.push(sorted.first().map_or(0.0, |v| v - 1.0));
    candidates.extend(sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    candidates.push(sorted.last().map_or(0.0, |v| v + 1.0));
    let mut best = (candidates[0], 1.0, f64::INFINITY);
    for &t in &candidates {
        for polarity in [1.0, -1.0] {
            let e = error_at(values, positive, t, polarity);
            if e < best.2 {
                best = (t, polarity, e);
            }
        }
    }
    (best.0, best.1)
}

/// Exhaustive scan of thresholds along a 1-D projection (both polarities).
pub fn threshold_error(
    projected_train: &[f64],
    train_positive: &[bool],
    projected_test: &[f64],
    test_positive: &[bool],
) -> Result<ThresholdReport> {
    if projected_train.len() != train_positive.len() || projected_test.len() != test_positive.len() {
        return contract("projection and label lengths differ");
    }
    let choose = |vals: &[f64], pos: &[bool]| {
        let (threshold, polarity) = best_threshold(vals, pos);
        ThresholdChoice {
            threshold,
            polarity,
            train_error: error_at(projected_train, train_positive, threshold, polarity),
            test_error: error_at(projected_test, test_positive, threshold, polarity),
        }
    };
    Ok(ThresholdReport {
        train_chosen: choose(projected_train, train_positive),
        test_chosen: choose(projected_test, test_positive),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaResult {
    /// Unit-norm discriminant direction.
    pub direction: Vec<f64>,
    pub generalized_eigenvalue: f64,
    pub ridge_eps: f64,
    pub projected_train: Vec<f64>,
    pub projected_test: Vec<f64>,
    pub threshold: ThresholdReport,
}

/// Default ridge: `1e-8 · trace(S_W) / d`.
pub fn default_ridge_eps(sw: &Matrix) -> f64 {
    1e-8 * sw.trace() / sw.rows().max(1) as f64
}

/// Largest generalized eigenpair of `S_B v = μ (S_W + εI) v` via the
/// Cholesky reduction `L⁻¹ S_B L⁻ᵀ` and Jacobi.
pub fn generalized_top_eigen(sb: &Matrix, sw: &Matrix, eps: f64) -> Result<(f64, Vec<f64>)> {
    let mut a = sw.clone();
    a.add_diagonal(eps);
    let l = linalg::cholesky(&a).map_err(|_| {
        FocaError::Numerical(
            "within-class scatter is singular; pass ridge_eps > 0 to regularize it".into(),
        )
    })?;
    let d = sb.rows();
    // M = L⁻¹ S_B L⁻ᵀ, built column by column
    let mut tmp = Matrix::zeros(d, d);
    for j in 0..d {
        let col = linalg::solve_lower(&l, &sb.column(j));
        for i in 0..d {
            tmp[(i, j)] = col[i];
        }
    }
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        let row = linalg::solve_lower(&l, tmp.row(i));
        for j in 0..d {
            m[(i, j)] = row[j];
        }
    }
    let eig = linalg::symmetric_eigen(&m)?;
    let y = eig.vectors.column(0);
    let mut v = linalg::solve_lower_transpose(&l, &y);
    let norm = linalg::norm(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    Ok((eig.values[0].max(0.0), v))
}

/// Class-vs-rest LDA on (already normalized) features. `ridge_eps = None`
/// uses [`default_ridge_eps`]. Projections of train and test features onto
/// the direction are scanned for the best threshold.
pub fn lda_one_vs_rest(
    train: &Matrix,
    train_labels: &[usize],
    test: &Matrix,
    test_labels: &[usize],
    positive_class: usize,
    ridge_eps: Option<f64>,
) -> Result<LdaResult> {
    if test.cols() != train.cols() || test.rows() != test_labels.len() {
        return contract("test features do not match the training features");
    }
    let train_pos: Vec<bool> = train_labels.iter().map(|&l| l == positive_class).collect();
    let test_pos: Vec<bool> = test_labels.iter().map(|&l| l == positive_class).collect();
    let (sb, sw) = two_group_scatter(train, &train_pos)?;
    let eps = ridge_eps.unwrap_or_else(|| default_ridge_eps(&sw));
    if eps < 0.0 {
        return contract("ridge_eps must be nonnegative");
    }
    let (mu, direction) = generalized_top_eigen(&sb, &sw, eps)?;
    let projected_train = train.matvec(&direction)?;
    let projected_test = test.matvec(&direction)?;
    let threshold = threshold_error(&projected_train, &train_pos, &projected_test, &test_pos)?;
    Ok(LdaResult {
        direction,
        generalized_eigenvalue: mu,
        ridge_eps: eps,
        projected_train,
        projected_test,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterStats {
    pub centroids: Vec<Vec<f64>>,
    /// `sqrt(mean ‖x − centroid‖²)` per class.
    pub rms_radius: Vec<f64>,
    pub min_centroid_distance: f64,
    /// Largest RMS radius over the smallest inter-centroid distance
    /// (infinite when two centroids coincide).
    pub compactness_ratio: f64,
}

pub fn scatter_stats(features: &Matrix, labels: &[usize], num_classes: usize) -> Result<ScatterStats> {
    if labels.len() != features.rows() {
        return contract("one label per feature row required");
    }
    if num_classes < 2 {
        return contract("compactness needs at least two classes");
    }
    let mut members = vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return contract(format!("label {l} out of range"));
        }
        members[l].push(i);
    }
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return contract(format!("class {c} has no samples"));
    }
    let mut centroids = Vec::with_capacity(num_classes);
    let mut rms_radius = Vec::with_capacity(num_classes);
    for m in &members {
        let rows = features.select_rows(m);
        let c = rows.column_means();
        let ms = rows.iter_rows().map(|r| linalg::sub(r, &c)).map(|d| linalg::dot(&d, &d)).sum::<f64>()
            / m.len() as f64;
        rms_radius.push(ms.sqrt());
        centroids.push(c);
    }
    let mut min_centroid_distance = f64::INFINITY;
    for a in 0..num_classes {
        for b in a + 1..num_classes {
            min_centroid_distance = min_centroid_distance.min(linalg::norm(&linalg::sub(&centroids[a], &centroids[b])));
        }
    }
    let max_radius = rms_radius.iter().copied().fold(0.0, f64::max);
    let compactness_ratio = if min_centroid_distance > 0.0 {
        max_radius / min_centroid_distance
    } else {
        f64::INFINITY
    };
    Ok(ScatterStats { centroids, rms_radius, min_centroid_distance, compactness_ratio })
}

/// Per sample, the norm of the mean (over `classifiers`) gradient of the
/// loss with respect to the extracted feature. Vanishes at a feature
/// extractor that is optimal for every sample against the classifier
/// distribution.
pub fn feature_optimality_residual(
    extractor: &NetworkParams,
    classifiers: &[NetworkParams],
    data: &LabeledDataset,
    loss: LossKind,
    exec: Exec,
) -> Result<Vec<f64>> {
    if classifiers.is_empty() {
        return contract("residual needs at least one classifier");
    }
    exec.map(data.len(), |i| -> Result<f64> {
        let f = nn::predict(extractor, data.inputs().row(i))?;
        let mut mean = vec![0.0; f.len()];
        for c in classifiers {
            let (out, cache) = forward(c, &f)?;
            let g_out = loss.gradient(&out, data.targets().row(i))?;
            let (_, g_f) = backward_from(c, &cache, &g_out)?;
            mean.iter_mut().zip(g_f).for_each(|(m, g)| *m += g);
        }
        let n = classifiers.len() as f64;
        Ok(linalg::norm(&mean) / n)
    })
    .into_iter()
    .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
        use crate::nn::Activation;
    use crate::weak::LinearClassifier;

    fn path(ld: Vec<f64>, sd: Vec<f64>, p: usize) -> PathSpec {
        PathSpec::new(ld, sd, p).unwrap()
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let pa = path(vec![1.0, -2.0], vec![3.0, 4.0], 4);
        assert_eq!(interpolate_params(&pa, 0).unwrap(), vec![1.0, -2.0]);
        assert_eq!(interpolate_params(&pa, 4).unwrap(), vec![3.0, 4.0]);
        assert_eq!(interpolate_params(&pa, 2).unwrap(), vec![2.0, 1.0]);
        assert!(interpolate_params(&pa, 5).is_err());
    }

    #[test]
    fn segment_distance_cases() {
        let id = Matrix::identity(2);
        assert_eq!(segment_distance(&id, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(segment_distance(&id, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let mut m = Matrix::zeros(2, 2);
        m[(0, 0)] = 4.0;
        assert_eq!(segment_distance(&m, &[0.0, 0.0], &[1.0, 1.0]).unwrap(), 2.0);
    }

    fn identity_metrics(p: usize, segments: usize) -> Vec<FisherMetric> {
        (0..segments)
            .map(|_| FisherMetric { matrix: Matrix::identity(p), eval_point: vec![0.0; p], subset_size: 1 })
            .collect()
    }

    #[test]
    fn geodesic_identity_and_errors() {
        let pa = path(vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 2.0], 9);
        let r = geodesic_distance(&pa, &identity_metrics(3, 9)).unwrap();
        assert!((r.total - 3.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.segments.len(), 9);
        assert!(geodesic_distance(&pa, &identity_metrics(3, 8)).is_err());
        let same = path(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0], 4);
        assert_eq!(geodesic_distance(&same, &identity_metrics(3, 4)).unwrap().total, 0.0);
    }

    #[test]
    fn layerwise_partition_checks() {
        let pa = path(vec![0.0; 4], vec![1.0, 1.0, 0.0, 0.0], 2);
        let m = identity_metrics(4, 2);
        let full = layerwise_distance(&pa, &m, &[0..4]).unwrap();
        assert!((full[0].total - geodesic_distance(&pa, &m).unwrap().total).abs() < 1e-15);
        let parts = layerwise_distance(&pa, &m, &[0..2, 2..4]).unwrap();
        assert_eq!(parts[1].total, 0.0);
        assert!((parts[0].total - 2f64.sqrt() / 2f64.sqrt()).abs() < 1e-12);
        assert!(layerwise_distance(&pa, &m, &[0..2, 3..4]).is_err());
        assert!(layerwise_distance(&pa, &m, &[0..3, 2..4]).is_err());
        assert!(layerwise_distance(&pa, &m, &[0..3]).is_err());
    }

    #[test]
    fn fisher_zero_and_single_sample() {
        let c = LinearClassifier { theta_bar: vec![0.5, -0.25], theta_0: 0.0 }.to_params();
        let f = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        // output is exactly 0
        let zero = fisher_matrix(&c, &f, &Matrix::zeros(1, 1), LossKind::SquaredError, Exec::Sequential).unwrap();
        assert!(zero.matrix.as_slice().iter().all(|&v| v == 0.0));

        // residual −1 → gradient 2·(−1)·(1, 2, 1)
        let t = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let fm = fisher_matrix(&c, &f, &t, LossKind::SquaredError, Exec::Sequential).unwrap();
        assert_eq!(fm.subset_size, 1);
        let g = [-2.0, -4.0, -2.0];
        for a in 0..3 {
            for b in 0..3 {
                assert!((fm.matrix[(a, b)] - g[a] * g[b]).abs() < 1e-12);
            }
        }
        assert!(fm.check_psd().unwrap());
        assert_eq!(fm.eval_point, c.flatten());
    }

    #[test]
    fn pca_degenerate_line() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| {
            let t = i as f64 * 0.3 - 2.0;
            vec![t, 2.0 * t, -t]
        })
        .collect();
        let f = Matrix::from_rows(&rows).unwrap();
        let p = pca_project(&f, 2).unwrap();
        assert!(p.eigenvalues[0] > 1.0);
        assert!(p.eigenvalues[1].abs() < 1e-12);
        assert!(pca_project(&f, 0).is_err());
    }

    #[test]
    fn normalize_cases() {
        let f = Matrix::from_rows(&[vec![3.0, 4.0], vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let (n, zeros) = normalize_features(&f);
        assert_eq!(n.row(0), &[0.6, 0.8]);
        assert_eq!(n.row(1), &[1.0, 0.0]);
        assert_eq!(n.row(2), &[0.0, 0.0]);
        assert_eq!(zeros, 1);
    }

    #[test]
    fn lda_point_classes_and_identical_groups() {
        // five samples per class at exact points one unit apart: μ = n·d²/(2ε)
        let mut rows = vec![vec![0.0]; 5];
        rows.extend(vec![vec![1.0]; 5]);
        let f = Matrix::from_rows(&rows).unwrap();
        let labels: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
        let r = lda_one_vs_rest(&f, &labels, &f, &labels, 1, Some(1e-6)).unwrap();
        assert!(r.generalized_eigenvalue >= 1e6);
        assert!((r.generalized_eigenvalue - 2.5e6).abs() < 1.0);
        assert_eq!(r.threshold.train_chosen.test_error, 0.0);

        let err = lda_one_vs_rest(&f, &labels, &f, &labels, 1, None).unwrap_err();
        assert!(err.to_string().contains("ridge_eps"));

        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![(i % 4) as f64, ((i % 4) * (i % 4)) as f64]).collect();
        let f = Matrix::from_rows(&rows).unwrap();
        let labels: Vec<usize> = (0..8).map(|i| usize::from(i >= 4)).collect();
        let r = lda_one_vs_rest(&f, &labels, &f, &labels, 1, None).unwrap();
        assert!(r.generalized_eigenvalue.abs() < 1e-12);
        assert!((linalg::norm(&r.direction) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_cases() {
        let train = [0.1, 0.2, 0.9, 1.0];
        let pos = [false, false, true, true];
        let r = threshold_error(&train, &pos, &train, &pos).unwrap();
        assert_eq!(r.train_chosen.test_error, 0.0);
        assert_eq!(r.test_chosen.test_error, 0.0);

        // identical distributions, prior p = 1/4
        let vals = [0.5; 8];
        let pos = [true, false, false, false, true, false, false, false];
        let r = threshold_error(&vals, &pos, &vals, &pos).unwrap();
        assert_eq!(r.test_chosen.test_error, 0.25);

        // reversed polarity is found
        let pos = [true, true, false, false];
        let r = threshold_error(&train, &pos, &train, &pos).unwrap();
        assert_eq!(r.train_chosen.train_error, 0.0);
        assert_eq!(r.train_chosen.polarity, -1.0);
    }

    #[test]
    fn scatter_point_classes() {
        let f = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let s = scatter_stats(&f, &[0, 0, 1], 2).unwrap();
        assert_eq!(s.compactness_ratio, 0.0);
        assert!((s.min_centroid_distance - 2f64.sqrt()).abs() < 1e-15);
        assert!(scatter_stats(&f, &[0, 0, 0], 2).is_err());
    }

    #[test]
    fn residual_zero_for_flat_classifier() {
        let data = crate::datasets::gen_two_arcs(&crate::datasets::ToyConfig {
            samples_per_class: 5,
            noise_std: 0.0,
            shape: crate::datasets::ToyShape::TwoArcs,
            seed: 0,
        })
        .unwrap();
        let arch = Architecture::mlp(&[2, 3], Activation::Sigmoid, Activation::Sigmoid).unwrap();
        let mut rng = crate::seeded_rng(0, 0);
        let ext = NetworkParams::init_fan_in(&arch, &mut rng);
        let flat = LinearClassifier { theta_bar: vec![0.0; 3], theta_0: 0.3 }.to_params();
        let r = feature_optimality_residual(&ext, &[flat], &data, LossKind::SquaredError, Exec::Sequential).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
