//! Configuration-driven experiment runs: flat `key = value` configs, the
//! end-to-end protocols, and their CSV/SVG/checkpoint artifacts.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::{
    self, error_along_path, feature_optimality_residual, geodesic_distance, layerwise_distance,
    lda_one_vs_rest, normalize_features, path_metrics, pca_project, scatter_stats, GeodesicReport,
    LdaResult, PathSpec, PcaResult, ScatterStats,
};
use crate::checkpoint::{read_checkpoint, write_checkpoint};
use crate::datasets::{
    gen_gaussian_blobs, gen_two_arcs, load_cifar10_binary, random_centers, standardize,
    subsample_covering, LabeledDataset, RandomWarp, TargetEncoding, ToyConfig, ToyShape,
};
use crate::error::{FocaError, Result};
use crate::linalg::Matrix;
use crate::nn::{Activation, Architecture, LossKind, NetworkParams};
use crate::render::{render_decision_map, render_scatter, Bounds};
use crate::trainers::{
    extract_features, featurize, fit_classifier, sample_weak_ensemble, train_foca_from,
    train_joint, train_secondary, FocaConfig, JointConfig, JointVariant, LrSchedule,
    SecondaryConfig, TrainedModel, WeakSolver,
};
use crate::weak::WeakBatchSpec;
use crate::{derive_seed, seeded_rng, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    ToyFoca,
    ToyJoint,
    PartialDatasetCurve,
    Geodesic,
    LdaPca,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ToyFoca => "toy_foca",
            ExperimentKind::ToyJoint => "toy_joint",
            ExperimentKind::PartialDatasetCurve => "partial_dataset_curve",
            ExperimentKind::Geodesic => "geodesic",
            ExperimentKind::LdaPca => "lda_pca",
        }
    }

    pub fn is_toy(self) -> bool {
        matches!(self, ExperimentKind::ToyFoca | ExperimentKind::ToyJoint)
    }
}

impl FromStr for ExperimentKind {
    type Err = FocaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toy_foca" => Ok(ExperimentKind::ToyFoca),
            "toy_joint" => Ok(ExperimentKind::ToyJoint),
            "partial_dataset_curve" => Ok(ExperimentKind::PartialDatasetCurve),
            "geodesic" => Ok(ExperimentKind::Geodesic),
            "lda_pca" => Ok(ExperimentKind::LdaPca),
            other => Err(FocaError::Config(format!("unknown experiment kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    TwoArcs,
    Blobs,
    Cifar10,
}

impl DatasetKind {
    fn name(self) -> &'static str {
        match self {
            DatasetKind::TwoArcs => "two_arcs",
            DatasetKind::Blobs => "blobs",
            DatasetKind::Cifar10 => "cifar10",
        }
    }
}

impl FromStr for DatasetKind {
    type Err = FocaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_arcs" => Ok(DatasetKind::TwoArcs),
            "blobs" => Ok(DatasetKind::Blobs),
            "cifar10" => Ok(DatasetKind::Cifar10),
            other => Err(FocaError::Config(format!("unknown dataset '{other}'"))),
        }
    }
}

/// Extractor training method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Foca,
    Plain,
    Noisy,
    Dropout,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Foca => "foca",
            Method::Plain => "plain",
            Method::Noisy => "noisy",
            Method::Dropout => "dropout",
        }
    }
}

impl FromStr for Method {
    type Err = FocaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "foca" => Ok(Method::Foca),
            "plain" => Ok(Method::Plain),
            "noisy" => Ok(Method::Noisy),
            "dropout" => Ok(Method::Dropout),
            other => Err(FocaError::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Size of a reduced training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetSize {
    Full,
    /// One sample per class.
    Classes,
    Count(usize),
}

impl SubsetSize {
    pub fn resolve(self, dataset: &LabeledDataset) -> usize {
        match self {
            SubsetSize::Full => dataset.len(),
            SubsetSize::Classes => dataset.num_classes(),
            SubsetSize::Count(n) => n,
        }
    }
}

impl fmt::Display for SubsetSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetSize::Full => f.write_str("full"),
            SubsetSize::Classes => f.write_str("classes"),
            SubsetSize::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for SubsetSize {
    type Err = FocaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SubsetSize::Full),
            "classes" => Ok(SubsetSize::Classes),
            n => n
                .parse()
                .map(SubsetSize::Count)
                .map_err(|_| FocaError::Config(format!("bad subset size '{n}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    Lda,
    Pca,
}

impl FromStr for Section {
    type Err = FocaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lda" => Ok(Section::Lda),
            "pca" => Ok(Section::Pca),
            other => Err(FocaError::Config(format!("unknown analysis section '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub samples_per_class: usize,
    pub test_per_class: usize,
    /// Two-arcs jitter or blob spread.
    pub noise_std: f64,
    pub num_classes: usize,
    /// Blob dimension before the warp.
    pub dim: usize,
    pub center_scale: f64,
    /// Hidden width of the random warp; 0 disables it.
    pub warp_hidden: usize,
    pub warp_dim: usize,
    pub cifar_train: Vec<String>,
    pub cifar_test: Vec<String>,
    pub max_train: Option<usize>,
    pub standardize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub data: DatasetSpec,
    pub extractor: Architecture,
    pub classifier: Architecture,
    pub methods: Vec<Method>,
    /// Seeds of `foca` are replaced by one derived from `seed` at run time.
    pub foca: FocaConfig,
    pub joint: JointConfig,
    /// Give joint training exactly FOCA's number of extractor updates.
    pub match_budget: bool,
    pub noise_std: f64,
    pub keep_prob: f64,
    pub secondary_classifier: Architecture,
    pub secondary: SecondaryConfig,
    pub n_primes: Vec<SubsetSize>,
    pub repeats: usize,
    pub ensemble_size: usize,
    pub grid_resolution: usize,
    pub segments: usize,
    pub fisher_fraction: f64,
    pub small_n: SubsetSize,
    pub positive_class: usize,
    pub ridge_eps: Option<f64>,
    /// Subtract the mean training feature before unit-normalizing.
    pub center: bool,
    pub pca_dim: usize,
    pub sections: Vec<Section>,
}

fn arch(text: &str, hidden: Activation, output: Activation) -> Architecture {
    Architecture::parse(text, hidden, output).expect("built-in architecture")
}

impl ExperimentConfig {
    /// Defaults for `kind`: toy kinds use two-arcs data and an 8-D feature
    /// space; the others use warped 10-class blobs.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let blobs = DatasetSpec {
            kind: DatasetKind::Blobs,
            samples_per_class: 100,
            test_per_class: 100,
            noise_std: 0.5,
            num_classes: 10,
            dim: 8,
            center_scale: 1.5,
            warp_hidden: 32,
            warp_dim: 8,
            cifar_train: Vec::new(),
            cifar_test: Vec::new(),
            max_train: None,
            standardize: true,
        };
        let mut cfg = ExperimentConfig {
            kind,
            seed: 0,
            data: blobs,
            extractor: arch("8-64-64-16", Activation::Relu, Activation::Relu),
            classifier: arch("16-10", Activation::Relu, Activation::Identity),
            methods: vec![Method::Foca, Method::Plain],
            foca: FocaConfig {
                iterations: 6000,
                minibatch: 32,
                learning_rate: 0.01,
                momentum: 0.9,
                updates_per_classifier: 2,
                weak: WeakBatchSpec { k: 10, ..WeakBatchSpec::default() },
                solver: WeakSolver::Iterative,
                loss: LossKind::SoftmaxCrossEntropy,
                max_norm: Some(4.0),
                schedule: LrSchedule::CONSTANT,
                seed: 0,
                log_every: 100,
            },
            joint: JointConfig {
                epochs: 100,
                minibatch: 32,
                learning_rate: 0.01,
                momentum: 0.9,
                weight_decay: 0.0,
                max_norm: Some(4.0),
                loss: LossKind::SoftmaxCrossEntropy,
                schedule: LrSchedule::CONSTANT,
                seed: 0,
                max_updates: None,
            },
            match_budget: true,
            noise_std: 0.1,
            keep_prob: 0.5,
            secondary_classifier: arch("16-10", Activation::Relu, Activation::Identity),
            secondary: SecondaryConfig { min_updates: 300, ..SecondaryConfig::default() },
            n_primes: vec![SubsetSize::Full, SubsetSize::Count(100), SubsetSize::Classes],
            repeats: 5,
            ensemble_size: 256,
            grid_resolution: 48,
            segments: 15,
            fisher_fraction: 0.05,
            small_n: SubsetSize::Classes,
            positive_class: 0,
            ridge_eps: None,
            center: true,
            pca_dim: 2,
            sections: vec![Section::Lda, Section::Pca],
        };
        if kind.is_toy() {
            cfg.data = DatasetSpec {
                kind: DatasetKind::TwoArcs,
                samples_per_class: 200,
                test_per_class: 200,
                noise_std: 0.1,
                num_classes: 2,
                dim: 2,
                center_scale: 1.0,
                warp_hidden: 0,
                warp_dim: 2,
                standardize: false,
                ..cfg.data
            };
            cfg.extractor = arch("2-32-32-8", Activation::Relu, Activation::Identity);
            cfg.classifier = arch("8-1", Activation::Identity, Activation::Identity);
            cfg.secondary_classifier = arch("8-2", Activation::Identity, Activation::Identity);
            cfg.foca.solver = WeakSolver::AnalyticPairRidge;
            cfg.foca.loss = LossKind::SquaredError;
            cfg.foca.weak.k = 1;
            cfg.foca.weak.lambda = 1.0;
            cfg.foca.learning_rate = 0.005;
            cfg.foca.iterations = 30000;
            cfg.joint.loss = LossKind::SquaredError;
            cfg.methods = match kind {
                ExperimentKind::ToyFoca => vec![Method::Foca],
                _ => vec![Method::Plain],
            };
        }
        cfg
    }

    /// Seed of the trainers (shared by every method so that all of them
    /// start from the same extractor).
    pub fn train_seed(&self) -> u64 {
        derive_seed(self.seed, 10)
    }

    pub fn foca_config(&self) -> FocaConfig {
        FocaConfig { seed: self.train_seed(), ..self.foca.clone() }
    }

    /// Joint-training config for a training set of `n` samples; with
    /// `match_budget` the update count equals FOCA's `T·u`.
    pub fn joint_config(&self, n: usize) -> JointConfig {
        let mut c = JointConfig { seed: self.train_seed(), ..self.joint.clone() };
        if self.match_budget {
            let budget = self.foca.iterations * self.foca.updates_per_classifier;
            let per_epoch = n.div_ceil(c.minibatch.clamp(1, n.max(1)));
            c.epochs = budget.div_ceil(per_epoch.max(1));
            c.max_updates = Some(budget);
        }
        c
    }

    pub fn variant(&self, method: Method) -> Option<JointVariant> {
        match method {
            Method::Foca => None,
            Method::Plain => Some(JointVariant::Plain),
            Method::Noisy => Some(JointVariant::Noisy { noise_std: self.noise_std }),
            Method::Dropout => Some(JointVariant::Dropout { keep_prob: self.keep_prob }),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FocaError::Config(m));
        if self.methods.is_empty() {
            return bad("methods must name at least one training method".into());
        }
        let unique: BTreeSet<_> = self.methods.iter().collect();
        if unique.len() != self.methods.len() {
            return bad("methods lists a method twice".into());
        }
        match self.kind {
            ExperimentKind::ToyFoca if !self.methods.contains(&Method::Foca) => {
                return bad("toy_foca runs need 'foca' among the methods".into())
            }
            ExperimentKind::ToyJoint if self.methods.contains(&Method::Foca) => {
                return bad("toy_joint runs only joint methods (plain, noisy, dropout)".into())
            }
            _ => {}
        }
        if self.kind.is_toy() && self.data.kind == DatasetKind::Cifar10 {
            return bad("toy experiments need a synthetic dataset".into());
        }
        if self.data.samples_per_class == 0 || self.data.test_per_class == 0 {
            return bad("data.samples_per_class and data.test_per_class must be positive".into());
        }
        if self.data.num_classes < 2 {
            return bad("data.num_classes must be at least 2".into());
        }
        if self.data.kind == DatasetKind::TwoArcs && self.data.num_classes != 2 {
            return bad("two_arcs data has exactly two classes".into());
        }
        if self.repeats == 0 || self.ensemble_size == 0 || self.grid_resolution == 0 {
            return bad("repeats, render.ensemble_size and render.grid_resolution must be positive".into());
        }
        if self.segments == 0 {
            return bad("geodesic.segments must be positive".into());
        }
        if !(self.fisher_fraction > 0.0 && self.fisher_fraction <= 1.0) {
            return bad("geodesic.fisher_fraction must lie in (0, 1]".into());
        }
        if self.n_primes.is_empty() {
            return bad("secondary.n_primes must list at least one size".into());
        }
        if self.sections.is_empty() {
            return bad("analysis.sections must list lda and/or pca".into());
        }
        if self.pca_dim == 0 {
            return bad("pca.dim must be positive".into());
        }
        if self.positive_class >= self.data.num_classes && self.data.kind != DatasetKind::Cifar10 {
            return bad("lda.positive_class must be a valid class id".into());
        }
        if self.extractor.output_dim() != self.classifier.input_dim() {
            return bad("classifier input must match the extractor output".into());
        }
        if self.secondary_classifier.input_dim() != self.extractor.output_dim() {
            return bad("secondary.classifier input must match the extractor output".into());
        }
        Ok(())
    }

    /// Every key with its resolved value, in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<f64>, none: &str| v.map_or(none.to_string(), |x| x.to_string());
        let list = |v: &[String]| v.join(",");
        let d = &self.data;
        let f = &self.foca;
        let j = &self.joint;
        let s = &self.secondary;
        vec![
            ("kind", self.kind.name().into()),
            ("seed", self.seed.to_string()),
            ("data.kind", d.kind.name().into()),
            ("data.samples_per_class", d.samples_per_class.to_string()),
            ("data.test_per_class", d.test_per_class.to_string()),
            ("data.noise_std", d.noise_std.to_string()),
            ("data.num_classes", d.num_classes.to_string()),
            ("data.dim", d.dim.to_string()),
            ("data.center_scale", d.center_scale.to_string()),
            ("data.warp_hidden", d.warp_hidden.to_string()),
            ("data.warp_dim", d.warp_dim.to_string()),
            ("data.cifar_train", list(&d.cifar_train)),
            ("data.cifar_test", list(&d.cifar_test)),
            ("data.max_train", d.max_train.map_or("none".into(), |v| v.to_string())),
            ("data.standardize", d.standardize.to_string()),
            ("extractor", self.extractor.to_string()),
            ("classifier", self.classifier.to_string()),
            ("methods", self.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")),
            ("foca.iterations", f.iterations.to_string()),
            ("foca.minibatch", f.minibatch.to_string()),
            ("foca.learning_rate", f.learning_rate.to_string()),
            ("foca.momentum", f.momentum.to_string()),
            ("foca.updates", f.updates_per_classifier.to_string()),
            ("foca.solver", solver_name(f.solver).into()),
            ("foca.loss", f.loss.name().into()),
            ("foca.max_norm", opt(f.max_norm, "none")),
            ("foca.lr_drop_at", opt(f.schedule.drop_at, "none")),
            ("foca.lr_drop_factor", f.schedule.factor.to_string()),
            ("foca.log_every", f.log_every.to_string()),
            ("weak.k", f.weak.k.to_string()),
            ("weak.lambda", f.weak.lambda.to_string()),
            ("weak.inner_steps", f.weak.inner_steps.to_string()),
            ("weak.init_std", f.weak.init_std.to_string()),
            ("weak.learning_rate", f.weak.learning_rate.to_string()),
            ("weak.momentum", f.weak.momentum.to_string()),
            ("joint.epochs", j.epochs.to_string()),
            ("joint.minibatch", j.minibatch.to_string()),
            ("joint.learning_rate", j.learning_rate.to_string()),
            ("joint.momentum", j.momentum.to_string()),
            ("joint.weight_decay", j.weight_decay.to_string()),
            ("joint.max_norm", opt(j.max_norm, "none")),
            ("joint.loss", j.loss.name().into()),
            ("joint.lr_drop_at", opt(j.schedule.drop_at, "none")),
            ("joint.lr_drop_factor", j.schedule.factor.to_string()),
            ("joint.match_budget", self.match_budget.to_string()),
            ("joint.noise_std", self.noise_std.to_string()),
            ("joint.keep_prob", self.keep_prob.to_string()),
            ("secondary.classifier", self.secondary_classifier.to_string()),
            ("secondary.n_primes", self.n_primes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")),
            ("secondary.repeats", self.repeats.to_string()),
            ("secondary.epochs", s.epochs.to_string()),
            ("secondary.minibatch", s.minibatch.to_string()),
            ("secondary.min_updates", s.min_updates.to_string()),
            ("secondary.learning_rate", s.learning_rate.to_string()),
            ("secondary.momentum", s.momentum.to_string()),
            ("secondary.loss", s.loss.name().into()),
            ("secondary.lr_drop_at", opt(s.schedule.drop_at, "none")),
            ("secondary.lr_drop_factor", s.schedule.factor.to_string()),
            ("render.ensemble_size", self.ensemble_size.to_string()),
            ("render.grid_resolution", self.grid_resolution.to_string()),
            ("geodesic.segments", self.segments.to_string()),
            ("geodesic.fisher_fraction", self.fisher_fraction.to_string()),
            ("geodesic.small_n", self.small_n.to_string()),
            ("lda.positive_class", self.positive_class.to_string()),
            ("lda.ridge_eps", opt(self.ridge_eps, "default")),
            ("lda.center", self.center.to_string()),
            ("pca.dim", self.pca_dim.to_string()),
            (
                "analysis.sections",
                self.sections
                    .iter()
                    .map(|s| match s {
                        Section::Lda => "lda",
                        Section::Pca => "pca",
                    })
                    .collect::<Vec<_>>()
                    .join(","),
            ),
        ]
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let d = &mut self.data;
        match key {
            "kind" => {
                let kind: ExperimentKind = v.parse()?;
                if kind != self.kind {
                    return Err(FocaError::Config("'kind' must be the first setting".into()));
                }
            }
            "seed" => self.seed = num(key, v)?,
            "data.kind" => d.kind = v.parse()?,
            "data.samples_per_class" => d.samples_per_class = num(key, v)?,
            "data.test_per_class" => d.test_per_class = num(key, v)?,
            "data.noise_std" => d.noise_std = nonneg(key, v)?,
            "data.num_classes" => d.num_classes = num(key, v)?,
            "data.dim" => d.dim = num(key, v)?,
            "data.center_scale" => d.center_scale = nonneg(key, v)?,
            "data.warp_hidden" => d.warp_hidden = num(key, v)?,
            "data.warp_dim" => d.warp_dim = num(key, v)?,
            "data.cifar_train" => d.cifar_train = split_list(v),
            "data.cifar_test" => d.cifar_test = split_list(v),
            "data.max_train" => d.max_train = optional(key, v, "none")?,
            "data.standardize" => d.standardize = num(key, v)?,
            "extractor" => self.extractor = Architecture::parse(v, Activation::Relu, Activation::Relu)?,
            "classifier" => {
                self.classifier = Architecture::parse(v, Activation::Relu, Activation::Identity)?
            }
            "methods" => self.methods = split_list(v).iter().map(|m| m.parse()).collect::<Result<_>>()?,
            "foca.iterations" => self.foca.iterations = num(key, v)?,
            "foca.minibatch" => self.foca.minibatch = positive(key, v)?,
            "foca.learning_rate" => self.foca.learning_rate = rate(key, v)?,
            "foca.momentum" => self.foca.momentum = momentum(key, v)?,
            "foca.updates" => self.foca.updates_per_classifier = positive(key, v)?,
            "foca.solver" => self.foca.solver = v.parse()?,
            "foca.loss" => self.foca.loss = v.parse()?,
            "foca.max_norm" => self.foca.max_norm = optional(key, v, "none")?,
            "foca.lr_drop_at" => self.foca.schedule.drop_at = optional(key, v, "none")?,
            "foca.lr_drop_factor" => self.foca.schedule.factor = rate(key, v)?,
            "foca.log_every" => self.foca.log_every = num(key, v)?,
            "weak.k" => self.foca.weak.k = positive(key, v)?,
            "weak.lambda" => self.foca.weak.lambda = rate(key, v)?,
            "weak.inner_steps" => self.foca.weak.inner_steps = num(key, v)?,
            "weak.init_std" => self.foca.weak.init_std = nonneg(key, v)?,
            "weak.learning_rate" => self.foca.weak.learning_rate = rate(key, v)?,
            "weak.momentum" => self.foca.weak.momentum = momentum(key, v)?,
            "joint.epochs" => self.joint.epochs = num(key, v)?,
            "joint.minibatch" => self.joint.minibatch = positive(key, v)?,
            "joint.learning_rate" => self.joint.learning_rate = rate(key, v)?,
            "joint.momentum" => self.joint.momentum = momentum(key, v)?,
            "joint.weight_decay" => self.joint.weight_decay = nonneg(key, v)?,
            "joint.max_norm" => self.joint.max_norm = optional(key, v, "none")?,
            "joint.loss" => self.joint.loss = v.parse()?,
            "joint.lr_drop_at" => self.joint.schedule.drop_at = optional(key, v, "none")?,
            "joint.lr_drop_factor" => self.joint.schedule.factor = rate(key, v)?,
            "joint.match_budget" => self.match_budget = num(key, v)?,
            "joint.noise_std" => self.noise_std = nonneg(key, v)?,
            "joint.keep_prob" => {
                let p: f64 = num(key, v)?;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(FocaError::Config(format!("{key} must lie in (0, 1], got {v}")));
                }
                self.keep_prob = p;
            }
            "secondary.classifier" => {
                self.secondary_classifier = Architecture::parse(v, Activation::Relu, Activation::Identity)?
            }
            "secondary.n_primes" => {
                self.n_primes = split_list(v).iter().map(|n| n.parse()).collect::<Result<_>>()?
            }
            "secondary.repeats" => self.repeats = positive(key, v)?,
            "secondary.epochs" => self.secondary.epochs = num(key, v)?,
            "secondary.minibatch" => self.secondary.minibatch = positive(key, v)?,
            "secondary.min_updates" => self.secondary.min_updates = num(key, v)?,
            "secondary.learning_rate" => self.secondary.learning_rate = rate(key, v)?,
            "secondary.momentum" => self.secondary.momentum = momentum(key, v)?,
            "secondary.loss" => self.secondary.loss = v.parse()?,
            "secondary.lr_drop_at" => self.secondary.schedule.drop_at = optional(key, v, "none")?,
            "secondary.lr_drop_factor" => self.secondary.schedule.factor = rate(key, v)?,
            "render.ensemble_size" => self.ensemble_size = positive(key, v)?,
            "render.grid_resolution" => self.grid_resolution = positive(key, v)?,
            "geodesic.segments" => self.segments = positive(key, v)?,
            "geodesic.fisher_fraction" => self.fisher_fraction = rate(key, v)?,
            "geodesic.small_n" => self.small_n = v.parse()?,
            "lda.positive_class" => self.positive_class = num(key, v)?,
            "lda.ridge_eps" => self.ridge_eps = optional(key, v, "default")?,
            "lda.center" => self.center = num(key, v)?,
            "pca.dim" => self.pca_dim = positive(key, v)?,
            "analysis.sections" => {
                self.sections = split_list(v).iter().map(|s| s.parse()).collect::<Result<_>>()?
            }
            other => return Err(FocaError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses a flat config: one `key = value` per line, `#` starts a
    /// comment, `kind` must come first, repeated keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: Option<ExperimentConfig> = None;
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                FocaError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(FocaError::Config(format!("key '{key}' given twice")));
            }
            let c = match cfg.as_mut() {
                Some(c) => c,
                None if key == "kind" => cfg.insert(ExperimentConfig::defaults(value.trim().parse()?)),
                None => {
                    return Err(FocaError::Config(format!(
                        "line {}: the first setting must be 'kind'",
                        lineno + 1
                    )))
                }
            };
            c.set(key, value)
                .map_err(|e| FocaError::Config(format!("line {}: {}", lineno + 1, strip_prefix(&e))))?;
        }
        let cfg = cfg.ok_or_else(|| FocaError::Config("config does not set 'kind'".into()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

fn strip_prefix(e: &FocaError) -> String {
    match e {
        FocaError::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

fn solver_name(s: WeakSolver) -> &'static str {
    match s {
        WeakSolver::AnalyticPairRidge => "pair_ridge",
        WeakSolver::AnalyticBatchRidge => "batch_ridge",
        WeakSolver::Iterative => "iterative",
    }
}

fn split_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| FocaError::Config(format!("{key}: cannot parse '{v}'")))
}

fn positive(key: &str, v: &str) -> Result<usize> {
    match num::<usize>(key, v)? {
        0 => Err(FocaError::Config(format!("{key} must be positive"))),
        n => Ok(n),
    }
}

fn nonneg(key: &str, v: &str) -> Result<f64> {
    let x: f64 = num(key, v)?;
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(FocaError::Config(format!("{key} must be a finite nonnegative number, got {v}")))
    }
}

fn rate(key: &str, v: &str) -> Result<f64> {
    let x = nonneg(key, v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(FocaError::Config(format!("{key} must be positive")))
    }
}

fn momentum(key: &str, v: &str) -> Result<f64> {
    let x = nonneg(key, v)?;
    if x < 1.0 {
        Ok(x)
    } else {
        Err(FocaError::Config(format!("{key} must lie in [0, 1)")))
    }
}

fn optional<T: FromStr>(key: &str, v: &str, none: &str) -> Result<Option<T>> {
    if v == none {
        Ok(None)
    } else {
        num(key, v).map(Some)
    }
}

// ---------------------------------------------------------------------------
// protocols

/// Training and test sets described by the config.
pub fn load_data(cfg: &ExperimentConfig) -> Result<(LabeledDataset, LabeledDataset)> {
    let d = &cfg.data;
    let (train, test) = match d.kind {
        DatasetKind::TwoArcs => {
            let gen = |n: usize, tag: u64| {
                gen_two_arcs(&ToyConfig {
                    samples_per_class: n,
                    noise_std: d.noise_std,
                    shape: ToyShape::TwoArcs,
                    seed: derive_seed(cfg.seed, tag),
                })
            };
            (gen(d.samples_per_class, 1)?, gen(d.test_per_class, 2)?)
        }
        DatasetKind::Blobs => {
            let centers = random_centers(d.num_classes, d.dim, d.center_scale, derive_seed(cfg.seed, 4));
            let mut train = gen_gaussian_blobs(&centers, d.noise_std, d.samples_per_class, derive_seed(cfg.seed, 1))?;
            let mut test = gen_gaussian_blobs(&centers, d.noise_std, d.test_per_class, derive_seed(cfg.seed, 2))?;
            if d.warp_hidden > 0 {
                let warp = RandomWarp::new(d.dim, d.warp_hidden, d.warp_dim, derive_seed(cfg.seed, 3));
                train = warp.apply(&train)?;
                test = warp.apply(&test)?;
            }
            (train, test)
        }
        DatasetKind::Cifar10 => {
            if d.cifar_train.is_empty() || d.cifar_test.is_empty() {
                return Err(FocaError::Config(
                    "cifar10 data needs data.cifar_train and data.cifar_test files".into(),
                ));
            }
            let mut train = load_cifar10_binary(&d.cifar_train)?;
            if let Some(m) = d.max_train {
                train = subsample_covering(&train, m, derive_seed(cfg.seed, 5))?;
            }
            (train, load_cifar10_binary(&d.cifar_test)?)
        }
    };
    if d.standardize {
        let (train, st) = standardize(&train)?;
        let test = st.apply(&test)?;
        Ok((train, test))
    } else {
        Ok((train, test))
    }
}

/// The dataset with targets encoded for a head of shape `arch`: ±1 for a
/// single output, one-hot otherwise.
pub fn encode_for(data: &LabeledDataset, arch: &Architecture) -> Result<LabeledDataset> {
    let enc = if arch.output_dim() == 1 { TargetEncoding::PlusMinusOne } else { TargetEncoding::OneHot };
    if enc == data.encoding() {
        Ok(data.clone())
    } else {
        data.with_encoding(enc)
    }
}

/// Trains the extractor with `method`. All methods start from the same
/// extractor initialization.
pub fn train_method(
    cfg: &ExperimentConfig,
    method: Method,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<TrainedModel> {
    let train = encode_for(train, &cfg.classifier)?;
    let test = encode_for(test, &cfg.classifier)?;
    match cfg.variant(method) {
        None => {
            let foca = cfg.foca_config();
            let mut init_rng = seeded_rng(foca.seed, 30);
            let init = NetworkParams::init_fan_in(&cfg.extractor, &mut init_rng);
            train_foca_from(&train, init, &cfg.classifier, &foca, Some(&test), Exec::default())
        }
        Some(variant) => train_joint(
            &train,
            &cfg.extractor,
            &cfg.classifier,
            variant,
            &cfg.joint_config(train.len()),
            Some(&test),
        ),
    }
}

/// Classifiers whose mean output is visualized: a fresh weak ensemble for
/// FOCA, the trained classifier for joint methods.
pub fn display_classifiers(
    cfg: &ExperimentConfig,
    model: &TrainedModel,
    train: &LabeledDataset,
) -> Result<Vec<NetworkParams>> {
    match &model.classifier {
        Some(c) => Ok(vec![c.clone()]),
        None => sample_weak_ensemble(
            &model.feature_extractor,
            &encode_for(train, &cfg.classifier)?,
            &cfg.classifier,
            &cfg.foca_config(),
            cfg.ensemble_size,
            derive_seed(cfg.seed, 20),
            Exec::default(),
        ),
    }
}

pub fn feature_scatter(extractor: &NetworkParams, data: &LabeledDataset) -> Result<ScatterStats> {
    let features = extract_features(extractor, data.inputs(), Exec::default())?;
    scatter_stats(&features, data.labels(), data.num_classes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub n_prime: usize,
    pub repeats: usize,
    pub mean_error: f64,
    pub std_error: f64,
}

/// Secondary optimization on frozen features for each configured subset
/// size. The full set is trained once; reduced sets `secondary.repeats`
/// times.
pub fn partial_curve(
    cfg: &ExperimentConfig,
    extractor: &NetworkParams,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<Vec<CurvePoint>> {
    let arch = &cfg.secondary_classifier;
    let ftrain = encode_for(&featurize(extractor, train, Exec::default())?, arch)?;
    let ftest = encode_for(&featurize(extractor, test, Exec::default())?, arch)?;
    cfg.n_primes
        .iter()
        .enumerate()
        .map(|(i, size)| {
            let n_prime = size.resolve(&ftrain);
            let repeats = if n_prime == ftrain.len() { 1 } else { cfg.repeats };
            let base = derive_seed(cfg.seed, 100 + i as u64);
            let seeds: Vec<u64> = (0..repeats as u64).map(|j| derive_seed(base, j)).collect();
            let sec = SecondaryConfig { n_prime, ..cfg.secondary.clone() };
            let outcome = train_secondary(&ftrain, &ftest, arch, &sec, &seeds)?;
            Ok(CurvePoint { n_prime, repeats, mean_error: outcome.mean_error, std_error: outcome.std_error })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicStudy {
    pub report: GeodesicReport,
    pub layers: Vec<GeodesicReport>,
    /// Test error at `θ^0 … θ^P`.
    pub errors: Vec<f64>,
    pub fisher_psd: bool,
    pub fisher_subset: usize,
}

impl GeodesicStudy {
    pub fn error_spread(&self) -> f64 {
        let max = self.errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.errors.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Large- and small-dataset classifiers trained from one shared
/// initialization on frozen features, the straight path between them, the
/// Fisher metrics on a subset of the training features, the resulting
/// distances and the test error along the path.
pub fn geodesic_study(
    cfg: &ExperimentConfig,
    extractor: &NetworkParams,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<GeodesicStudy> {
    let arch = &cfg.secondary_classifier;
    let ftrain = encode_for(&featurize(extractor, train, Exec::default())?, arch)?;
    let ftest = encode_for(&featurize(extractor, test, Exec::default())?, arch)?;
    let mut init_rng = seeded_rng(derive_seed(cfg.seed, 22), 40);
    let init = NetworkParams::init_fan_in(arch, &mut init_rng);
    let order_seed = derive_seed(cfg.seed, 23);
    let theta_ld = fit_classifier(&ftrain, init.clone(), &cfg.secondary, order_seed)?;
    let small = subsample_covering(&ftrain, cfg.small_n.resolve(&ftrain), derive_seed(cfg.seed, 24))?;
    let theta_sd = fit_classifier(&small, init, &cfg.secondary, order_seed)?;

    let path = PathSpec::new(theta_ld.flatten(), theta_sd.flatten(), cfg.segments)?;
    let c = ftrain.num_classes();
    let fisher_n = ((cfg.fisher_fraction * ftrain.len() as f64).round() as usize).clamp(c, ftrain.len());
    let subset = subsample_covering(&ftrain, fisher_n, derive_seed(cfg.seed, 21))?;
    let metrics = path_metrics(&path, arch, &subset, cfg.secondary.loss, Exec::default())?;
    let mut fisher_psd = true;
    for m in &metrics {
        fisher_psd &= m.check_psd()?;
    }
    Ok(GeodesicStudy {
        report: geodesic_distance(&path, &metrics)?,
        layers: layerwise_distance(&path, &metrics, &arch.layer_ranges())?,
        errors: error_along_path(&path, arch, &ftest)?,
        fisher_psd,
        fisher_subset: fisher_n,
    })
}

/// Unit-normalized features of both sets (optionally centered on the mean
/// training feature first) and the number of zero rows met.
pub fn normalized_features(
    extractor: &NetworkParams,
    train: &LabeledDataset,
    test: &LabeledDataset,
    center: bool,
) -> Result<(Matrix, Matrix, usize)> {
    let mut a = extract_features(extractor, train.inputs(), Exec::default())?;
    let mut b = extract_features(extractor, test.inputs(), Exec::default())?;
    if center {
        let mean = a.column_means();
        for m in [&mut a, &mut b] {
            for i in 0..m.rows() {
                m.row_mut(i).iter_mut().zip(&mean).for_each(|(v, c)| *v -= c);
            }
        }
    }
    let (a, za) = normalize_features(&a);
    let (b, zb) = normalize_features(&b);
    Ok((a, b, za + zb))
}

/// Class-vs-rest LDA on unit-normalized features; also returns the count
/// of zero feature vectors left unnormalized.
pub fn lda_study(
    cfg: &ExperimentConfig,
    extractor: &NetworkParams,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<(LdaResult, usize)> {
    if cfg.positive_class >= train.num_classes() {
        return Err(FocaError::Config("lda.positive_class must be a valid class id".into()));
    }
    let (a, b, zeros) = normalized_features(extractor, train, test, cfg.center)?;
    let lda = lda_one_vs_rest(&a, train.labels(), &b, test.labels(), cfg.positive_class, cfg.ridge_eps)?;
    Ok((lda, zeros))
}

/// PCA of the unit-normalized test features (centered on the training
/// mean when `lda.center` is set).
pub fn pca_study(
    cfg: &ExperimentConfig,
    extractor: &NetworkParams,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<PcaResult> {
    let (_, f, _) = normalized_features(extractor, train, test, cfg.center)?;
    pca_project(&f, cfg.pca_dim.min(f.cols()))
}

// ---------------------------------------------------------------------------
// artifacts

/// Files written by one run, in creation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

impl RunOutput {
    fn write(&mut self, dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

/// Resolved config plus comment lines; parseable by [`ExperimentConfig::parse`].
pub fn manifest_text(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# foca {} run manifest", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        out,
        "# derived seeds: data={} test={} train={} ensemble={}",
        derive_seed(cfg.seed, 1),
        derive_seed(cfg.seed, 2),
        cfg.train_seed(),
        derive_seed(cfg.seed, 20)
    );
    out.push_str(&cfg.to_text());
    out
}

fn csv_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

fn features_csv(features: &crate::linalg::Matrix, labels: &[usize]) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = (0..features.cols()).map(|i| format!("f{i}")).collect();
    header.push("label".into());
    csv_row(&mut out, &header);
    for (r, l) in features.iter_rows().zip(labels) {
        let mut cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        cells.push(l.to_string());
        csv_row(&mut out, &cells);
    }
    out
}

fn log_csv(model: &TrainedModel) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    model.log.write_csv(&mut buf)?;
    Ok(buf)
}

fn checkpoint_bytes(params: &NetworkParams) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_checkpoint(params, &mut buf)?;
    Ok(buf)
}

fn decision_map_svg(
    cfg: &ExperimentConfig,
    extractor: &NetworkParams,
    classifiers: &[NetworkParams],
    train: &LabeledDataset,
) -> Result<String> {
    render_decision_map(
        Some(extractor),
        classifiers,
        Bounds::around(train.inputs(), 0.1),
        cfg.grid_resolution,
        Some((train.inputs(), train.labels())),
    )
}

/// Runs the experiment and writes its artifacts into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let mut files = RunOutput::default();
    files.write(out, "manifest.conf", manifest_text(cfg))?;
    let (train, test) = load_data(cfg)?;
    match cfg.kind {
        ExperimentKind::ToyFoca | ExperimentKind::ToyJoint => run_toy(cfg, &train, &test, out, &mut files)?,
        ExperimentKind::PartialDatasetCurve => {
            let mut csv = String::from("method,n_prime,repeats,mean_error,std_error\n");
            for &m in &cfg.methods {
                let model = train_method(cfg, m, &train, &test)?;
                files.write(out, &format!("{}_log.csv", m.name()), log_csv(&model)?)?;
                for p in partial_curve(cfg, &model.feature_extractor, &train, &test)? {
                    csv_row(
                        &mut csv,
                        &[m.name().into(), p.n_prime.to_string(), p.repeats.to_string(), p.mean_error.to_string(), p.std_error.to_string()],
                    );
                }
            }
            files.write(out, "curve.csv", csv)?;
        }
        ExperimentKind::Geodesic => {
            let mut summary = String::from("method,total_distance,ld_error,sd_error,error_spread,fisher_subset,fisher_psd\n");
            let mut segments = String::from("method,segment,distance\n");
            let mut layers = String::from("method,layer,distance\n");
            let mut path = String::from("method,alpha,test_error\n");
            for &m in &cfg.methods {
                let model = train_method(cfg, m, &train, &test)?;
                files.write(out, &format!("{}_log.csv", m.name()), log_csv(&model)?)?;
                let g = geodesic_study(cfg, &model.feature_extractor, &train, &test)?;
                csv_row(
                    &mut summary,
                    &[
                        m.name().into(),
                        g.report.total.to_string(),
                        g.errors[0].to_string(),
                        g.errors[g.errors.len() - 1].to_string(),
                        g.error_spread().to_string(),
                        g.fisher_subset.to_string(),
                        g.fisher_psd.to_string(),
                    ],
                );
                for (i, s) in g.report.segments.iter().enumerate() {
                    csv_row(&mut segments, &[m.name().into(), i.to_string(), s.to_string()]);
                }
                for (i, l) in g.layers.iter().enumerate() {
                    csv_row(&mut layers, &[m.name().into(), i.to_string(), l.total.to_string()]);
                }
                for (a, e) in g.errors.iter().enumerate() {
                    csv_row(&mut path, &[m.name().into(), a.to_string(), e.to_string()]);
                }
            }
            files.write(out, "geodesic.csv", summary)?;
            files.write(out, "segments.csv", segments)?;
            files.write(out, "layers.csv", layers)?;
            files.write(out, "error_path.csv", path)?;
        }
        ExperimentKind::LdaPca => {
            let mut lda_csv = String::from(
                "method,positive_class,eigenvalue,ridge_eps,zero_rows,train_threshold,train_polarity,train_chosen_train_error,train_chosen_test_error,test_threshold,test_polarity,test_chosen_test_error\n",
            );
            for &m in &cfg.methods {
                let model = train_method(cfg, m, &train, &test)?;
                files.write(out, &format!("{}_log.csv", m.name()), log_csv(&model)?)?;
                let ext = &model.feature_extractor;
                if cfg.sections.contains(&Section::Lda) {
                    let (lda, zeros) = lda_study(cfg, ext, &train, &test)?;
                    let t = &lda.threshold;
                    csv_row(
                        &mut lda_csv,
                        &[
                            m.name().into(),
                            cfg.positive_class.to_string(),
                            lda.generalized_eigenvalue.to_string(),
                            lda.ridge_eps.to_string(),
                            zeros.to_string(),
                            t.train_chosen.threshold.to_string(),
                            t.train_chosen.polarity.to_string(),
                            t.train_chosen.train_error.to_string(),
                            t.train_chosen.test_error.to_string(),
                            t.test_chosen.threshold.to_string(),
                            t.test_chosen.polarity.to_string(),
                            t.test_chosen.test_error.to_string(),
                        ],
                    );
                }
                if cfg.sections.contains(&Section::Pca) {
                    let pca = pca_study(cfg, ext, &train, &test)?;
                    files.write(out, &format!("pca_{}.csv", m.name()), features_csv(&pca.projected, test.labels()))?;
                    if pca.projected.cols() == 2 {
                        let svg = render_scatter(&pca.projected, test.labels(), test.num_classes())?;
                        files.write(out, &format!("pca_{}.svg", m.name()), svg)?;
                    }
                }
            }
            if cfg.sections.contains(&Section::Lda) {
                files.write(out, "lda.csv", lda_csv)?;
            }
        }
    }
    Ok(files)
}

fn run_toy(
    cfg: &ExperimentConfig,
    train: &LabeledDataset,
    test: &LabeledDataset,
    out: &Path,
    files: &mut RunOutput,
) -> Result<()> {
    let mut buf = Vec::new();
    train.write_csv(&mut buf)?;
    files.write(out, "train.csv", buf)?;
    let mut csv = String::from("method,compactness_ratio,min_centroid_distance,max_rms_radius,median_residual\n");
    for &m in &cfg.methods {
        let model = train_method(cfg, m, train, test)?;
        let ext = &model.feature_extractor;
        files.write(out, &format!("{}_log.csv", m.name()), log_csv(&model)?)?;
        files.write(out, &format!("{}_extractor.ckpt", m.name()), checkpoint_bytes(ext)?)?;
        if let Some(c) = &model.classifier {
            files.write(out, &format!("{}_classifier.ckpt", m.name()), checkpoint_bytes(c)?)?;
        }
        let features = extract_features(ext, train.inputs(), Exec::default())?;
        files.write(out, &format!("{}_features.csv", m.name()), features_csv(&features, train.labels()))?;
        let stats = scatter_stats(&features, train.labels(), train.num_classes())?;
        let classifiers = display_classifiers(cfg, &model, train)?;
        let loss = if m == Method::Foca { cfg.foca.loss } else { cfg.joint.loss };
        let residual = feature_optimality_residual(
            ext,
            &classifiers,
            &encode_for(train, &cfg.classifier)?,
            loss,
            Exec::default(),
        )?;
        let max_radius = stats.rms_radius.iter().copied().fold(0.0, f64::max);
        csv_row(
            &mut csv,
            &[
                m.name().into(),
                stats.compactness_ratio.to_string(),
                stats.min_centroid_distance.to_string(),
                max_radius.to_string(),
                analysis::median(&residual).to_string(),
            ],
        );
        if train.input_dim() == 2 {
            let svg = decision_map_svg(cfg, ext, &classifiers, train)?;
            files.write(out, &format!("{}_decision_map.svg", m.name()), svg)?;
        }
    }
    files.write(out, "compactness.csv", csv)?;
    Ok(())
}

/// Re-renders the decision maps of a finished toy run from the checkpoints
/// in `dir`.
pub fn render_from_checkpoints(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutput> {
    if !cfg.kind.is_toy() {
        return Err(FocaError::Config("render needs a toy_foca or toy_joint config".into()));
    }
    let (train, _) = load_data(cfg)?;
    let mut files = RunOutput::default();
    for &m in &cfg.methods {
        let read = |name: String| -> Result<NetworkParams> {
            read_checkpoint(fs::File::open(dir.join(&name)).map_err(|e| {
                FocaError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.join(&name).display())))
            })?)
        };
        let extractor = read(format!("{}_extractor.ckpt", m.name()))?;
        let classifier = match m {
            Method::Foca => None,
            _ => Some(read(format!("{}_classifier.ckpt", m.name()))?),
        };
        let model = TrainedModel { feature_extractor: extractor, classifier, log: Default::default() };
        let classifiers = display_classifiers(cfg, &model, &train)?;
        let svg = decision_map_svg(cfg, &model.feature_extractor, &classifiers, &train)?;
        files.write(dir, &format!("{}_decision_map.svg", m.name()), svg)?;
    }
    Ok(files)
}
