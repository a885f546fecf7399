//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs as a plain binary (`harness = false`) so the lines
//! are always printed.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use foca::analysis::{
    fisher_matrix, generalized_top_eigen, geodesic_distance, lda_one_vs_rest, two_group_scatter, FisherMetric,
    PathSpec,
};
use foca::experiment::{
    display_classifiers, encode_for, feature_scatter, geodesic_study, lda_study, load_data, normalized_features,
    partial_curve, run_experiment, train_method, ExperimentConfig, ExperimentKind, Method,
};
use foca::linalg::{dot, norm, symmetric_eigen, Matrix};
use foca::nn::{self, Activation, Architecture, LossKind, NetworkParams};
use foca::render::{render_decision_map, Bounds};
use foca::trainers::{extract_features, fit_classifier, TrainedModel};
use foca::weak::{ensemble_average_output, ridge_objective, solve_batch_ridge, solve_pair_ridge, LinearClassifier};
use foca::{derive_seed, seeded_rng, Exec};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn config(kind: ExperimentKind, seed: u64, overrides: &[(&str, &str)]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(kind);
    cfg.seed = seed;
    for (k, v) in overrides {
        cfg.set(k, v).unwrap_or_else(|e| panic!("{k}={v}: {e}"));
    }
    cfg
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| gaussian(rng)).collect()).unwrap()
}

// ---------------------------------------------------------------- criterion 1

fn loss_at(params: &NetworkParams, x: &[f64], t: &[f64], loss: LossKind) -> f64 {
    loss.value(&nn::predict(params, x).unwrap(), t).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = seeded_rng(1, 0);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut nets = 0;
    let mut seen = [[false; 2]; 2];
    for trial in 0..120 {
        let depth = rng.random_range(1..=4);
        let mut dims: Vec<usize> = (0..=depth).map(|_| rng.random_range(1..=16)).collect();
        let loss = if trial % 2 == 0 { LossKind::SquaredError } else { LossKind::SoftmaxCrossEntropy };
        if loss == LossKind::SoftmaxCrossEntropy {
            dims[depth] = dims[depth].max(2);
        }
        let hidden = if (trial / 2) % 2 == 0 { Activation::Relu } else { Activation::Sigmoid };
        let output = [Activation::Identity, Activation::Sigmoid, Activation::Relu][trial % 3];
        seen[(hidden == Activation::Sigmoid) as usize][(loss == LossKind::SoftmaxCrossEntropy) as usize] = true;
        let arch = Architecture::mlp(&dims, hidden, output).unwrap();
        let params = NetworkParams::init_gaussian(&arch, 0.7, &mut rng);
        let x: Vec<f64> = (0..dims[0]).map(|_| gaussian(&mut rng)).collect();
        let out_dim = dims[depth];
        let t: Vec<f64> = match loss {
            LossKind::SquaredError => (0..out_dim).map(|_| gaussian(&mut rng)).collect(),
            LossKind::SoftmaxCrossEntropy => {
                let c = rng.random_range(0..out_dim);
                (0..out_dim).map(|j| if j == c { 1.0 } else { 0.0 }).collect()
            }
        };
        let (_, cache) = nn::forward(&params, &x).unwrap();
        let (grads, _) = nn::backward(&params, &cache, loss, &t).unwrap();
        let analytic = grads.flatten();
        let theta = params.flatten();
        for (i, &a) in analytic.iter().enumerate() {
            let mut plus = theta.clone();
            plus[i] += h;
            let mut minus = theta.clone();
            minus[i] -= h;
            let fp = loss_at(&NetworkParams::unflatten(&plus, &arch).unwrap(), &x, &t, loss);
            let fm = loss_at(&NetworkParams::unflatten(&minus, &arch).unwrap(), &x, &t, loss);
            let numeric = (fp - fm) / (2.0 * h);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
        nets += 1;
    }
    let covered = seen.iter().flatten().all(|&s| s);
    outcome(
        worst < 1e-4 && covered && nets >= 100,
        format!("{nets} networks, max relative error {worst:.2e} (< 1e-4)"),
    )
}

// ---------------------------------------------------------------- criterion 2

fn criterion_2() -> Outcome {
    let mut rng = seeded_rng(2, 0);
    let mut worst_normal: f64 = 0.0;
    let mut worst_bias: f64 = 0.0;
    let mut beaten = 0;
    let trials = 1000;
    for _ in 0..trials {
        let d = rng.random_range(1..=64);
        let lambda = 10f64.powf(rng.random_range(-4.0..1.0));
        let f1: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
        let f2: Vec<f64> = (0..d).map(|_| gaussian(&mut rng)).collect();
        let (t1, t2) = (gaussian(&mut rng), gaussian(&mut rng));
        let c = solve_pair_ridge(&f1, &f2, t1, t2, lambda).unwrap();
        // [(f1−f2)(f1−f2)ᵀ + λI]θ̄ − (t1−t2)(f1−f2)
        let diff: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a - b).collect();
        let proj = dot(&diff, &c.theta_bar);
        for j in 0..d {
            let r = diff[j] * proj + lambda * c.theta_bar[j] - (t1 - t2) * diff[j];
            worst_normal = worst_normal.max(r.abs());
        }
        // bias stationarity: the two residuals cancel
        worst_bias = worst_bias.max(((c.output(&f1) - t1) + (c.output(&f2) - t2)).abs());

        let n = rng.random_range(2..=40);
        let d = rng.random_range(1..=64);
        let features = gaussian_matrix(n, d, &mut rng);
        let targets: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let sol = solve_batch_ridge(&features, &targets, lambda).unwrap();
        let best = ridge_objective(&sol, &features, &targets, lambda);
        let mut ok = true;
        for p in 0..1000 {
            let scale = 10f64.powf(-3.0 + 3.0 * (p as f64 / 999.0));
            let cand = LinearClassifier {
                theta_bar: sol.theta_bar.iter().map(|w| w + scale * gaussian(&mut rng)).collect(),
                theta_0: sol.theta_0 + scale * gaussian(&mut rng),
            };
            if ridge_objective(&cand, &features, &targets, lambda) < best {
                ok = false;
                break;
            }
        }
        beaten += ok as usize;
    }
    outcome(
        worst_normal <= 1e-10 && worst_bias <= 1e-10 && beaten == trials,
        format!(
            "pair normal-equation residual {worst_normal:.1e}, bias residual {worst_bias:.1e} (<= 1e-10); \
             batch ridge beat every perturbation in {beaten}/{trials} trials"
        ),
    )
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for seed in 0..3 {
        let cfg = config(
            ExperimentKind::ToyFoca,
            seed,
            &[
                ("data.samples_per_class", "10"),
                ("extractor", "2-16-16-2:sigmoid:sigmoid"),
                ("classifier", "2-1:identity:identity"),
                ("weak.lambda", "0.01"),
                ("foca.learning_rate", "0.01"),
                ("foca.updates", "1"),
                ("foca.iterations", "100000"),
                ("foca.max_norm", "none"),
            ],
        );
        let (train, test) = load_data(&cfg).unwrap();
        let model = train_method(&cfg, Method::Foca, &train, &test).unwrap();
        let stats = feature_scatter(&model.feature_extractor, &train).unwrap();
        let ensemble = display_classifiers(&cfg, &model, &train).unwrap();
        // label 0 is encoded as −1, label 1 as +1
        let margins: Vec<f64> = stats
            .centroids
            .iter()
            .enumerate()
            .map(|(c, centroid)| {
                let sign = if c == 1 { 1.0 } else { -1.0 };
                sign * ensemble_average_output(&ensemble, centroid).unwrap()[0]
            })
            .collect();
        let ok = stats.compactness_ratio < 0.05 && margins.iter().all(|&m| m > 0.0);
        pass &= ok;
        details.push(format!(
            "seed {seed}: ratio {:.4}, margins {:.3}/{:.3}",
            stats.compactness_ratio, margins[0], margins[1]
        ));
    }
    outcome(pass, details.join("; "))
}

// ------------------------------------------------------------- criteria 4 & 8

struct ToyRun {
    cfg: ExperimentConfig,
    train: foca::datasets::LabeledDataset,
    test: foca::datasets::LabeledDataset,
    foca: TrainedModel,
    plain: TrainedModel,
}

fn toy_runs() -> &'static [ToyRun] {
    static RUNS: OnceLock<Vec<ToyRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        (0..3)
            .map(|seed| {
                let cfg = config(ExperimentKind::ToyFoca, seed, &[]);
                let (train, test) = load_data(&cfg).unwrap();
                let foca = train_method(&cfg, Method::Foca, &train, &test).unwrap();
                let plain = train_method(&cfg, Method::Plain, &train, &test).unwrap();
                ToyRun { cfg, train, test, foca, plain }
            })
            .collect()
    })
}

fn criterion_4() -> Outcome {
    let mut details = Vec::new();
    let mut wins = 0;
    let mut rendered = true;
    for (seed, run) in toy_runs().iter().enumerate() {
        assert_eq!(run.cfg.data.samples_per_class, 200);
        assert_eq!(run.cfg.ensemble_size, 256);
        let same_params = run.foca.feature_extractor.num_params() == run.plain.feature_extractor.num_params();
        let budget = run.cfg.foca.iterations * run.cfg.foca.updates_per_classifier;
        let plain_budget = run.cfg.joint_config(run.train.len()).max_updates;
        let ensemble = display_classifiers(&run.cfg, &run.foca, &run.train).unwrap();
        let svg = render_decision_map(
            Some(&run.foca.feature_extractor),
            &ensemble,
            Bounds::around(run.train.inputs(), 0.1),
            run.cfg.grid_resolution,
            Some((run.train.inputs(), run.train.labels())),
        )
        .unwrap();
        rendered &= ensemble.len() == 256 && roxmltree::Document::parse(&svg).is_ok();
        let f = feature_scatter(&run.foca.feature_extractor, &run.train).unwrap().compactness_ratio;
        let p = feature_scatter(&run.plain.feature_extractor, &run.train).unwrap().compactness_ratio;
        let ok = same_params && plain_budget == Some(budget) && f <= 0.5 * p;
        wins += ok as usize;
        details.push(format!("seed {seed}: FOCA {f:.3} vs Plain {p:.3} ({:.2}x)", f / p));
    }
    outcome(wins == 3 && rendered, format!("{wins}/3 seeds; {}", details.join("; ")))
}

/// Largest Rayleigh quotient `wᵀ S_B w / wᵀ (S_W + εI) w` found among
/// `samples` random unit directions: half uniform on the sphere, half
/// Gaussian perturbations of the running best with a shrinking radius.
fn brute_force_rayleigh<R: Rng>(sb: &Matrix, sw: &Matrix, eps: f64, samples: usize, rng: &mut R) -> f64 {
    let d = sb.rows();
    let quotient = |w: &[f64]| {
        let num = dot(w, &sb.matvec(w).unwrap());
        let den = dot(w, &sw.matvec(w).unwrap()) + eps * dot(w, w);
        num / den
    };
    let unit = |v: Vec<f64>| {
        let n = norm(&v);
        v.into_iter().map(|x| x / n).collect::<Vec<_>>()
    };
    let mut best_w = unit((0..d).map(|_| gaussian(rng)).collect());
    let mut best = quotient(&best_w);
    let half = samples / 2;
    for _ in 1..half {
        let w = unit((0..d).map(|_| gaussian(rng)).collect());
        let q = quotient(&w);
        if q > best {
            best = q;
            best_w = w;
        }
    }
    let local = samples - half;
    for i in 0..local {
        let radius = 0.5 * (1e-6f64 / 0.5).powf(i as f64 / local as f64);
        let w = unit(best_w.iter().map(|x| x + radius * gaussian(rng)).collect());
        let q = quotient(&w);
        if q > best {
            best = q;
            best_w = w;
        }
    }
    best
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded_rng(8, 0);
    let mut worst_gap: f64 = 0.0;
    let mut worst_below: f64 = 0.0;
    let mut worst_dense: f64 = 0.0;
    let cases = 12;
    for case in 0..cases {
        let d = 1 + case % 8;
        let n = 40 + 10 * case;
        let mut features = gaussian_matrix(n, d, &mut rng);
        // anisotropic, correlated features with a class shift
        let mix = gaussian_matrix(d, d, &mut rng);
        features = features.matmul(&mix).unwrap();
        let positive: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        for (i, &p) in positive.iter().enumerate() {
            if p {
                features.row_mut(i).iter_mut().enumerate().for_each(|(j, x)| *x += 0.5 + 0.2 * j as f64);
            }
        }
        let (sb, sw) = two_group_scatter(&features, &positive).unwrap();
        let eps = foca::analysis::default_ridge_eps(&sw);
        let (mu, _) = generalized_top_eigen(&sb, &sw, eps).unwrap();
        let brute = brute_force_rayleigh(&sb, &sw, eps, 100_000, &mut rng);
        worst_gap = worst_gap.max((mu - brute).abs() / brute);
        worst_below = worst_below.min((mu - brute) / brute);
        // dense route: top eigenvalue of (S_W + εI)⁻¹ S_B via nalgebra
        let a = nalgebra::DMatrix::from_row_slice(d, d, sw.as_slice()) + nalgebra::DMatrix::identity(d, d) * eps;
        let b = nalgebra::DMatrix::from_row_slice(d, d, sb.as_slice());
        let m = a.try_inverse().unwrap() * b;
        let dense = m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        worst_dense = worst_dense.max((mu - dense).abs() / dense);
    }
    let oracle_ok = worst_gap <= 0.01 && worst_below >= -0.01 && worst_dense <= 1e-6;

    let mut ratios = Vec::new();
    let mut uncentered = Vec::new();
    for run in toy_runs() {
        let (f, _) = lda_study(&run.cfg, &run.foca.feature_extractor, &run.train, &run.test).unwrap();
        let (p, _) = lda_study(&run.cfg, &run.plain.feature_extractor, &run.train, &run.test).unwrap();
        ratios.push((f.generalized_eigenvalue, p.generalized_eigenvalue));
        let raw = |m: &TrainedModel| {
            let (a, b, _) = normalized_features(&m.feature_extractor, &run.train, &run.test, false).unwrap();
            lda_one_vs_rest(&a, run.train.labels(), &b, run.test.labels(), run.cfg.positive_class, None)
                .unwrap()
                .generalized_eigenvalue
        };
        uncentered.push(format!("{:.1}/{:.1}", raw(&run.foca), raw(&run.plain)));
    }
    let wins = ratios.iter().filter(|(f, p)| *f >= 5.0 * p).count();
    let elapsed = start.elapsed();
    outcome(
        oracle_ok && wins == 3,
        format!(
            "oracle: max |gap| {:.2e}, min signed gap {:.2e}, dense route {:.1e} over {cases} cases; \
             normalized LDA FOCA/Plain {}; {wins}/3 >= 5x (uncentered {}); lda time {:.0?}",
            worst_gap,
            worst_below,
            worst_dense,
            ratios.iter().map(|(f, p)| format!("{f:.1}/{p:.1}")).collect::<Vec<_>>().join(", "),
            uncentered.join(", "),
            elapsed
        ),
    )
}

// ------------------------------------------------------------- criteria 5 & 7

struct BlobRun {
    foca_deg: f64,
    plain_deg: f64,
    foca_geo: f64,
    plain_geo: f64,
    foca_spread: f64,
    plain_spread: f64,
    psd: bool,
}

struct BlobResults {
    runs: Vec<BlobRun>,
    train_time: Duration,
    geodesic_time: Duration,
}

fn blob_results() -> &'static BlobResults {
    static RESULTS: OnceLock<BlobResults> = OnceLock::new();
    RESULTS.get_or_init(|| {
        let mut train_time = Duration::ZERO;
        let mut geodesic_time = Duration::ZERO;
        let runs = (0..5)
            .map(|seed| {
                let cfg = config(
                    ExperimentKind::Geodesic,
                    seed,
                    &[("secondary.n_primes", "full,classes"), ("geodesic.segments", "15")],
                );
                let (train, test) = load_data(&cfg).unwrap();
                let mut deg = [0.0; 2];
                let mut geo = [0.0; 2];
                let mut spread = [0.0; 2];
                let mut psd = true;
                for (i, m) in [Method::Foca, Method::Plain].into_iter().enumerate() {
                    let t = Instant::now();
                    let model = train_method(&cfg, m, &train, &test).unwrap();
                    let curve = partial_curve(&cfg, &model.feature_extractor, &train, &test).unwrap();
                    assert_eq!(curve[1].n_prime, cfg.data.num_classes);
                    deg[i] = curve[1].mean_error - curve[0].mean_error;
                    train_time += t.elapsed();
                    let t = Instant::now();
                    let study = geodesic_study(&cfg, &model.feature_extractor, &train, &test).unwrap();
                    assert_eq!(study.report.segments.len(), 15);
                    geo[i] = study.report.total;
                    spread[i] = study.error_spread();
                    psd &= study.fisher_psd;
                    geodesic_time += t.elapsed();
                }
                BlobRun {
                    foca_deg: deg[0],
                    plain_deg: deg[1],
                    foca_geo: geo[0],
                    plain_geo: geo[1],
                    foca_spread: spread[0],
                    plain_spread: spread[1],
                    psd,
                }
            })
            .collect();
        BlobResults { runs, train_time, geodesic_time }
    })
}

fn criterion_5() -> Outcome {
    let r = blob_results();
    let small = r.runs.iter().all(|b| b.foca_deg < 0.03);
    let wins = r.runs.iter().filter(|b| b.foca_deg < b.plain_deg).count();
    let detail = r
        .runs
        .iter()
        .enumerate()
        .map(|(s, b)| format!("seed {s}: {:+.3}/{:+.3}", b.foca_deg, b.plain_deg))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(
        small && wins >= 4 && r.train_time < Duration::from_secs(1800),
        format!(
            "degradation at n'=C FOCA/Plain {detail}; FOCA < 0.03 in all: {small}; FOCA smaller in {wins}/5; {:.0?}",
            r.train_time
        ),
    )
}

fn criterion_7() -> Outcome {
    let r = blob_results();
    let geo_wins = r.runs.iter().filter(|b| b.foca_geo < b.plain_geo).count();
    let spread_wins = r.runs.iter().filter(|b| b.foca_spread < 0.03 && b.plain_spread > 0.03).count();
    let psd = r.runs.iter().all(|b| b.psd);
    let detail = r
        .runs
        .iter()
        .enumerate()
        .map(|(s, b)| {
            format!(
                "seed {s}: geo {:.3}/{:.3} spread {:.3}/{:.3}",
                b.foca_geo, b.plain_geo, b.foca_spread, b.plain_spread
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(
        geo_wins >= 4 && spread_wins >= 4 && psd && r.train_time + r.geodesic_time < Duration::from_secs(1800),
        format!(
            "FOCA/Plain {detail}; geodesic {geo_wins}/5, spread {spread_wins}/5, Fisher PSD {psd}; {:.0?}",
            r.train_time + r.geodesic_time
        ),
    )
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let mut rng = seeded_rng(6, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let dim = rng.random_range(1..=50);
        let segments = rng.random_range(1..=20);
        let a: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
        let b: Vec<f64> = (0..dim).map(|_| 3.0 * gaussian(&mut rng)).collect();
        let want = norm(&foca::linalg::sub(&b, &a)) / (segments as f64).sqrt();
        let path = PathSpec::new(a, b, segments).unwrap();
        let metrics: Vec<FisherMetric> = (0..segments)
            .map(|_| FisherMetric { matrix: Matrix::identity(dim), eval_point: vec![0.0; dim], subset_size: 1 })
            .collect();
        let got = geodesic_distance(&path, &metrics).unwrap().total;
        worst = worst.max((got - want).abs());
    }

    // Fisher matrices of classifiers fitted on features of a short real run
    let cfg = config(ExperimentKind::Geodesic, 6, &[("foca.iterations", "300"), ("data.samples_per_class", "30")]);
    let (train, test) = load_data(&cfg).unwrap();
    let model = train_method(&cfg, Method::Foca, &train, &test).unwrap();
    let features = extract_features(&model.feature_extractor, train.inputs(), Exec::default()).unwrap();
    let data = encode_for(&train.with_inputs(features).unwrap(), &cfg.secondary_classifier).unwrap();
    let mut max_asym: f64 = 0.0;
    let mut min_rel_eig = f64::INFINITY;
    for s in 0..3 {
        let init = NetworkParams::init_fan_in(&cfg.secondary_classifier, &mut seeded_rng(derive_seed(6, s), 0));
        let classifier = fit_classifier(&data, init, &cfg.secondary, derive_seed(6, 100 + s)).unwrap();
        let m = fisher_matrix(&classifier, data.inputs(), data.targets(), cfg.secondary.loss, Exec::default()).unwrap();
        max_asym = max_asym.max(m.matrix.max_asymmetry());
        let eig = symmetric_eigen(&m.matrix).unwrap();
        let min = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
        min_rel_eig = min_rel_eig.min(min / m.matrix.trace().max(f64::MIN_POSITIVE));
    }
    outcome(
        worst <= 1e-10 && max_asym == 0.0 && min_rel_eig >= -1e-8,
        format!(
            "identity-metric error {worst:.1e} (<= 1e-10); real Fisher max asymmetry {max_asym:.1e}, \
             min eigenvalue/trace {min_rel_eig:.1e}"
        ),
    )
}

// ---------------------------------------------------------------- criterion 9

fn criterion_9() -> Outcome {
    let small: &[(ExperimentKind, &[(&str, &str)])] = &[
        (
            ExperimentKind::ToyFoca,
            &[("foca.iterations", "200"), ("render.ensemble_size", "8"), ("render.grid_resolution", "6")],
        ),
        (ExperimentKind::ToyJoint, &[("foca.iterations", "200"), ("render.grid_resolution", "6")]),
        (
            ExperimentKind::PartialDatasetCurve,
            &[
                ("data.samples_per_class", "20"),
                ("foca.iterations", "100"),
                ("secondary.repeats", "2"),
                ("secondary.min_updates", "20"),
            ],
        ),
        (
            ExperimentKind::Geodesic,
            &[("data.samples_per_class", "20"), ("foca.iterations", "100"), ("geodesic.segments", "3")],
        ),
        (ExperimentKind::LdaPca, &[("data.samples_per_class", "30"), ("foca.iterations", "300")]),
    ];
    let root = tempfile::tempdir().unwrap();
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for (kind, overrides) in small {
        let cfg = config(*kind, 9, overrides);
        let first = root.path().join(format!("{}_a", kind.name()));
        let second = root.path().join(format!("{}_b", kind.name()));
        let out = run_experiment(&cfg, &first).unwrap();
        let manifest = std::fs::read_to_string(first.join("manifest.conf")).unwrap();
        run_experiment(&ExperimentConfig::parse(&manifest).unwrap(), &second).unwrap();
        for path in out.files.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")) {
            let name = path.file_name().unwrap();
            compared += 1;
            if std::fs::read(path).unwrap() != std::fs::read(second.join(name)).unwrap() {
                mismatches.push(format!("{}/{}", kind.name(), name.to_string_lossy()));
            }
        }
    }
    outcome(
        mismatches.is_empty() && compared > 0,
        format!("{compared} CSV artifacts over {} experiment kinds; mismatches: {:?}", small.len(), mismatches),
    )
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 9] = [
        (1, "gradient correctness", Duration::from_secs(60), criterion_1),
        (2, "ridge oracle equivalence", Duration::from_secs(60), criterion_2),
        (3, "two-sample desk check", Duration::from_secs(300), criterion_3),
        (4, "two-arcs compactness", Duration::from_secs(900), criterion_4),
        (5, "partial-dataset degradation", Duration::from_secs(1800), criterion_5),
        (6, "geodesic identity and Fisher PSD", Duration::from_secs(60), criterion_6),
        (7, "geodesic distance and error spread", Duration::from_secs(1800), criterion_7),
        (8, "LDA oracle and normalized eigenvalue", Duration::from_secs(600), criterion_8),
        (9, "artifact determinism", Duration::from_secs(600), criterion_9),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let t = Instant::now();
        let o = run();
        let elapsed = t.elapsed();
        let pass = o.pass && elapsed < limit;
        failed += !pass as usize;
        println!(
            "criterion {id} [{}] {name}: {} ({elapsed:.1?}, limit {limit:?})",
            if pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {}/9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
