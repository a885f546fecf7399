use foca::datasets::{
    gen_gaussian_blobs, gen_two_arcs, standardize, LabeledDataset, TargetEncoding, ToyConfig, ToyShape,
};
use foca::linalg::Matrix;
use foca::nn::{Activation, Architecture, LossKind, NetworkParams};
use foca::trainers::{
    sample_weak_ensemble, train_foca, train_foca_from, train_joint, train_secondary, FocaConfig, JointConfig,
    JointVariant, SecondaryConfig, WeakSolver,
};
use foca::weak::WeakBatchSpec;
use foca::{seeded_rng, Exec};

fn arcs() -> LabeledDataset {
    gen_two_arcs(&ToyConfig { samples_per_class: 40, noise_std: 0.1, shape: ToyShape::TwoArcs, seed: 3 }).unwrap()
}

fn arch(spec: &str) -> Architecture {
    Architecture::parse(spec, Activation::Relu, Activation::Identity).unwrap()
}

fn foca_config(iterations: usize) -> FocaConfig {
    FocaConfig {
        iterations,
        updates_per_classifier: 2,
        weak: WeakBatchSpec { lambda: 1.0, ..WeakBatchSpec::default() },
        solver: WeakSolver::AnalyticPairRidge,
        log_every: 10,
        seed: 5,
        ..FocaConfig::default()
    }
}

#[test]
fn foca_is_reproducible_and_independent_of_execution_mode() {
    let data = arcs();
    let cfg = foca_config(60);
    let init = NetworkParams::init_fan_in(&arch("2-8-2"), &mut seeded_rng(1, 0));
    let a = train_foca_from(&data, init.clone(), &arch("2-1"), &cfg, None, Exec::Sequential).unwrap();
    let b = train_foca_from(&data, init, &arch("2-1"), &cfg, None, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    assert!(a.classifier.is_none());
    assert!(a.feature_extractor.is_finite());
    // iterations 0, 10, …, 50 and the final one
    assert_eq!(a.log.records.len(), 7);
}

#[test]
fn weak_ensemble_is_seeded() {
    let data = arcs();
    let cfg = foca_config(20);
    let model = train_foca(&data, &arch("2-8-2"), &arch("2-1"), &cfg).unwrap();
    let e1 = sample_weak_ensemble(&model.feature_extractor, &data, &arch("2-1"), &cfg, 16, 9, Exec::Parallel).unwrap();
    let e2 =
        sample_weak_ensemble(&model.feature_extractor, &data, &arch("2-1"), &cfg, 16, 9, Exec::Sequential).unwrap();
    assert_eq!(e1.len(), 16);
    assert_eq!(e1, e2);
    assert_ne!(e1[0], e1[1]);
}

#[test]
fn joint_variants_with_inert_settings_equal_plain() {
    let data = arcs();
    let cfg = JointConfig { epochs: 3, loss: LossKind::SquaredError, seed: 2, ..JointConfig::default() };
    let run = |v| train_joint(&data, &arch("2-8-2"), &arch("2-1"), v, &cfg, None).unwrap();
    let plain = run(JointVariant::Plain);
    assert_eq!(run(JointVariant::Noisy { noise_std: 0.0 }), plain);
    assert_eq!(run(JointVariant::Dropout { keep_prob: 1.0 }), plain);
    assert!(plain.classifier.is_some());
}

#[test]
fn joint_update_cap_stops_mid_schedule() {
    // 80 samples in minibatches of 32: three updates per epoch
    let data = arcs().with_encoding(TargetEncoding::OneHot).unwrap();
    let run = |epochs, cap| {
        let cfg = JointConfig { epochs, max_updates: cap, seed: 1, ..JointConfig::default() };
        train_joint(&data, &arch("2-4-2"), &arch("2-2"), JointVariant::Plain, &cfg, None).unwrap()
    };
    let capped = run(50, Some(3));
    let one_epoch = run(1, None);
    assert_eq!(capped.feature_extractor, one_epoch.feature_extractor);
    assert_eq!(capped.classifier, one_epoch.classifier);
    assert_ne!(run(50, Some(4)).feature_extractor, one_epoch.feature_extractor);
}

#[test]
fn secondary_error_is_flat_in_n_prime_for_point_features() {
    // every class collapsed onto a single feature point
    let points = [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
    let build = |per: usize| {
        let rows: Vec<Vec<f64>> = (0..3 * per).map(|i| points[i % 3].clone()).collect();
        let labels = (0..3 * per).map(|i| i % 3).collect();
        LabeledDataset::new(Matrix::from_rows(&rows).unwrap(), labels, 3, TargetEncoding::OneHot).unwrap()
    };
    let (train, test) = (build(20), build(10));
    let head = Architecture::mlp(&[3, 3], Activation::Identity, Activation::Identity).unwrap();
    let errors: Vec<f64> = [3, 10, 60]
        .iter()
        .map(|&n| {
            let cfg = SecondaryConfig { n_prime: n, min_updates: 200, ..SecondaryConfig::default() };
            train_secondary(&train, &test, &head, &cfg, &[1, 2, 3]).unwrap().mean_error
        })
        .collect();
    assert!(errors.iter().all(|&e| e == 0.0), "{errors:?}");
}

#[test]
fn blobs_are_learnable_by_both_trainers() {
    let centers = foca::datasets::random_centers(3, 2, 3.0, 4);
    let (data, _) = standardize(&gen_gaussian_blobs(&centers, 0.3, 30, 4).unwrap()).unwrap();
    let ext = arch("2-16-4");
    let head = arch("4-3");
    let foca_cfg = FocaConfig {
        iterations: 300,
        weak: WeakBatchSpec { k: 3, lambda: 1.0, ..WeakBatchSpec::default() },
        solver: WeakSolver::AnalyticBatchRidge,
        loss: LossKind::SquaredError,
        ..FocaConfig::default()
    };
    let model = train_foca(&data, &ext, &head, &foca_cfg).unwrap();
    assert!(model.log.records.last().unwrap().train_acc > 0.9);
    let joint = JointConfig { epochs: 150, seed: 4, ..JointConfig::default() };
    let model = train_joint(&data, &ext, &head, JointVariant::Plain, &joint, None).unwrap();
    assert_eq!(model.log.records.last().unwrap().train_acc, 1.0);
}
