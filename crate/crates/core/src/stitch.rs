//! Zero-shot stitching experiments at desk scale.
//!
//! Two "encoders" are simulated as one synthetic blob dataset and an
//! angle-preserving transform of it. Ridge-trained linear heads play the role
//! of task decoders; training them on encoder 1 and evaluating them on
//! encoder 2 features with no adaptation is the stitching operation. Heads
//! consume either absolute coordinates or anchor-relative ones, and every
//! head remembers which, so a mode or anchor mismatch is an error instead of
//! a silently wrong number.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::anchors::{select, AnchorSet, SelectionConfig};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, Matrix};
use crate::metrics::{alignment_report, latent_similarity_proxy, pearson, AlignmentReport};
use crate::relative::{project, RelativeSpace};
use crate::space::{EmbeddingSpace, VectorSet};
use crate::transforms::{apply, bounded_distortion, TransformSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobConfig {
    pub n_classes: usize,
    pub per_class: usize,
    pub dim: usize,
    pub separation: f64,
    pub seed: u64,
}

/// Labeled synthetic embedding space standing in for an encoder's output.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub space: EmbeddingSpace,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub config: BlobConfig,
}

/// Gaussian blobs: class `c` is centered at a seeded random unit vector
/// scaled by `separation`, with unit isotropic noise.
pub fn make_blobs(config: &BlobConfig) -> Result<SyntheticDataset> {
    if config.n_classes == 0 || config.per_class == 0 || config.dim == 0 {
        return Err(Error::InvalidParameter(
            "blob counts and dimension must be >= 1".into(),
        ));
    }
    if !(config.separation > 0.0) || !config.separation.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "separation must be positive, got {}",
            config.separation
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let d = config.dim;

    let mut centers = Vec::with_capacity(config.n_classes);
    for _ in 0..config.n_classes {
        let mut c: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = crate::linalg::norm(&c);
        if n > 0.0 {
            for v in &mut c {
                *v *= config.separation / n;
            }
        } else {
            c[0] = config.separation;
        }
        centers.push(c);
    }

    let n = config.n_classes * config.per_class;
    let mut ids = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    for (c, center) in centers.iter().enumerate() {
        for j in 0..config.per_class {
            ids.push(format!("c{c}-{j}"));
            labels.push(c);
            for k in 0..d {
                let noise: f64 = rng.sample(StandardNormal);
                data.push(center[k] + noise);
            }
        }
    }
    let space = EmbeddingSpace::from_flat_unchecked(
        format!("blobs-{}", config.seed),
        ids,
        data,
        d,
    );
    Ok(SyntheticDataset {
        space,
        labels,
        n_classes: config.n_classes,
        config: config.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadTask {
    Classify,
    Reconstruct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    Absolute,
    Relative,
}

/// What a feature matrix was made of. Heads compare this before predicting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub mode: FeatureMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor_ids: Option<Vec<String>>,
    #[serde(default)]
    pub quantize_threshold: f64,
}

impl FeatureSpec {
    pub fn absolute() -> Self {
        FeatureSpec {
            mode: FeatureMode::Absolute,
            anchor_ids: None,
            quantize_threshold: 0.0,
        }
    }

    pub fn relative(space: &RelativeSpace) -> Self {
        FeatureSpec {
            mode: FeatureMode::Relative,
            anchor_ids: Some(space.anchor_ids().to_vec()),
            quantize_threshold: space.quantize_threshold(),
        }
    }

    fn describe(&self) -> String {
        match self.mode {
            FeatureMode::Absolute => "absolute".to_string(),
            FeatureMode::Relative => format!(
                "relative[{} anchors, t={}]",
                self.anchor_ids.as_ref().map(Vec::len).unwrap_or(0),
                self.quantize_threshold
            ),
        }
    }
}

/// Ridge-trained linear map with a bias row: weights are
/// `(input_dim + 1) x output_dim`.
#[derive(Debug, Clone)]
pub struct LinearHead {
    weights: Matrix,
    task: HeadTask,
    lambda: f64,
    features: FeatureSpec,
}

pub enum TrainTargets<'a> {
    Labels {
        labels: &'a [usize],
        n_classes: usize,
    },
    Values(&'a Matrix),
}

/// Closed-form ridge fit on the normal equations
/// `(XᵀX + λI) W = XᵀY` with a bias column appended to `X`.
pub fn train_head(
    features: &Matrix,
    targets: TrainTargets<'_>,
    lambda: f64,
    feature_spec: FeatureSpec,
) -> Result<LinearHead> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let n = features.rows();
    let (y, task) = match targets {
        TrainTargets::Labels { labels, n_classes } => {
            if labels.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "{} labels for {} feature rows",
                    labels.len(),
                    n
                )));
            }
            let mut y = Matrix::zeros(n, n_classes);
            for (i, &c) in labels.iter().enumerate() {
                if c >= n_classes {
                    return Err(Error::InvalidParameter(format!(
                        "label {c} out of range for {n_classes} classes"
                    )));
                }
                y.set(i, c, 1.0);
            }
            (y, HeadTask::Classify)
        }
        TrainTargets::Values(v) => {
            if v.rows() != n {
                return Err(Error::InvalidParameter(format!(
                    "{} target rows for {} feature rows",
                    v.rows(),
                    n
                )));
            }
            (v.clone(), HeadTask::Reconstruct)
        }
    };

    let x = with_bias(features);
    let p = x.cols();
    let xt = x.transpose();
    let mut gram = xt.matmul(&x);
    for i in 0..p {
        gram.set(i, i, gram.get(i, i) + lambda);
    }
    let rhs = xt.matmul(&y);
    let weights = cholesky_solve(&gram, &rhs)?;
    Ok(LinearHead {
        weights,
        task,
        lambda,
        features: feature_spec,
    })
}

fn with_bias(features: &Matrix) -> Matrix {
    let n = features.rows();
    let p = features.cols();
    let mut x = Matrix::zeros(n, p + 1);
    for i in 0..n {
        x.row_mut(i)[..p].copy_from_slice(features.row(i));
        x.set(i, p, 1.0);
    }
    x
}

impl LinearHead {
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn task(&self) -> HeadTask {
        self.task
    }

    pub fn feature_spec(&self) -> &FeatureSpec {
        &self.features
    }

    fn check_features(&self, spec: &FeatureSpec, dim: usize) -> Result<()> {
        if *spec != self.features {
            return Err(Error::FeatureMismatch {
                expected: self.features.describe(),
                actual: spec.describe(),
            });
        }
        if dim + 1 != self.weights.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.rows() - 1,
                actual: dim,
            });
        }
        Ok(())
    }

    /// Raw linear outputs, one row per feature row.
    pub fn predict_values(&self, features: &Matrix, spec: &FeatureSpec) -> Result<Matrix> {
        self.check_features(spec, features.cols())?;
        Ok(with_bias(features).matmul(&self.weights))
    }

    /// Argmax class per row; only valid for classifier heads.
    pub fn predict_labels(&self, features: &Matrix, spec: &FeatureSpec) -> Result<Vec<usize>> {
        if self.task != HeadTask::Classify {
            return Err(Error::InvalidParameter(
                "label prediction from a reconstruction head".into(),
            ));
        }
        let scores = self.predict_values(features, spec)?;
        Ok((0..scores.rows())
            .map(|i| {
                let row = scores.row(i);
                let mut best = 0usize;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }
}

/// Deterministic stratified split; every class keeps at least one training
/// sample.
pub fn stratified_split(
    labels: &[usize],
    n_classes: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must be in [0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..n_classes {
        let members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == c)
            .map(|(i, _)| i)
            .collect();
        let order = rand::seq::index::sample(&mut rng, members.len(), members.len());
        let n_test = ((members.len() as f64 * test_fraction).round() as usize)
            .min(members.len().saturating_sub(1));
        for (pos, o) in order.into_iter().enumerate() {
            if pos < n_test {
                test.push(members[o]);
            } else {
                train.push(members[o]);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

fn feature_rows<S: VectorSet>(space: &S, rows: &[usize]) -> Matrix {
    let mut m = Matrix::zeros(rows.len(), space.dim());
    for (out, &i) in rows.iter().enumerate() {
        m.row_mut(out).copy_from_slice(space.vector(i));
    }
    m
}

fn accuracy(predicted: &[usize], actual: &[usize]) -> f64 {
    let hits = predicted
        .iter()
        .zip(actual)
        .filter(|(p, a)| p == a)
        .count();
    hits as f64 / actual.len() as f64
}

fn mse(predicted: &Matrix, actual: &Matrix) -> f64 {
    let mut acc = crate::linalg::KahanSum::new();
    for i in 0..predicted.rows() {
        for (p, a) in predicted.row(i).iter().zip(actual.row(i)) {
            let d = p - a;
            acc.add(d * d);
        }
    }
    acc.value() / (predicted.rows() * predicted.cols()) as f64
}

/// How encoder 2 relates to encoder 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StitchTransform {
    #[default]
    Identity,
    AnglePreserving {
        seed: u64,
        scale: f64,
    },
}

impl StitchTransform {
    fn spec(&self, dim: usize) -> Result<TransformSpec> {
        match self {
            StitchTransform::Identity => Ok(TransformSpec::identity()),
            StitchTransform::AnglePreserving { seed, scale } => {
                TransformSpec::random_angle_preserving(dim, *seed, *scale)
            }
        }
    }
}

fn default_lambda() -> f64 {
    1e-3
}

fn default_k() -> usize {
    10
}

fn default_test_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StitchConfig {
    pub dataset: BlobConfig,
    #[serde(default)]
    pub transform: StitchTransform,
    pub anchors: SelectionConfig,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub center: bool,
}

/// Scores for one feature mode: the head evaluated on its own encoder and
/// zero-shot on the other one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeOutcome {
    pub non_stitched: f64,
    pub stitched: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Accuracies with raw coordinates as features.
    pub absolute: ModeOutcome,
    /// Accuracies with anchor-relative features.
    pub relative: ModeOutcome,
    /// Mean cosine between the stitched and source relative spaces.
    pub relative_proxy: f64,
    /// Alignment of the two relative spaces over the test split.
    pub relative_alignment: AlignmentReport,
    pub n_train: usize,
    pub n_test: usize,
    pub config: StitchConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionReport {
    /// Mean squared reconstruction errors, absolute-feature heads.
    pub absolute: ModeOutcome,
    /// Mean squared reconstruction errors, relative-feature heads.
    pub relative: ModeOutcome,
    pub n_train: usize,
    pub n_test: usize,
    pub config: StitchConfig,
}

struct StitchSetup {
    labels: Vec<usize>,
    n_classes: usize,
    x1: EmbeddingSpace,
    x2: EmbeddingSpace,
    rel1: RelativeSpace,
    rel2: RelativeSpace,
    train: Vec<usize>,
    test: Vec<usize>,
}

/// Shared harness: two encoders, parallel anchors (the same sample ids
/// re-embedded in both), projections, and a stratified split.
fn prepare(config: &StitchConfig) -> Result<StitchSetup> {
    let dataset = make_blobs(&config.dataset)?;
    let spec = config.transform.spec(config.dataset.dim)?;
    let mut x1 = dataset.space.renamed("encoder-1");
    let mut x2 = apply(&x1, &spec)?.renamed("encoder-2");
    if config.center {
        x1 = x1.center().0;
        x2 = x2.center().0;
    }

    let anchors1 = select(&x1, &config.anchors, None)?;
    let anchor_ids = anchors1.ids(&x1)?;
    let anchors2 = AnchorSet::from_ids(&x2, &anchor_ids)?;
    let rel1 = project(&x1, &anchors1)?;
    let rel2 = project(&x2, &anchors2)?;

    let (train, test) = stratified_split(
        &dataset.labels,
        dataset.n_classes,
        config.test_fraction,
        config.split_seed,
    )?;
    Ok(StitchSetup {
        labels: dataset.labels,
        n_classes: dataset.n_classes,
        x1,
        x2,
        rel1,
        rel2,
        train,
        test,
    })
}

/// Trains classifier heads on encoder 1 in both feature modes and evaluates
/// them on encoder 1 (non-stitched) and encoder 2 (stitched) test features.
pub fn stitch_classification(config: &StitchConfig) -> Result<ClassificationReport> {
    let setup = prepare(config)?;
    let train_labels: Vec<usize> = setup.train.iter().map(|&i| setup.labels[i]).collect();
    let test_labels: Vec<usize> = setup.test.iter().map(|&i| setup.labels[i]).collect();
    let targets = TrainTargets::Labels {
        labels: &train_labels,
        n_classes: setup.n_classes,
    };
    let abs_spec = FeatureSpec::absolute();
    let rel_spec = FeatureSpec::relative(&setup.rel1);

    let abs_head = train_head(
        &feature_rows(&setup.x1, &setup.train),
        TrainTargets::Labels {
            labels: &train_labels,
            n_classes: setup.n_classes,
        },
        config.lambda,
        abs_spec.clone(),
    )?;
    let rel_head = train_head(
        &feature_rows(&setup.rel1, &setup.train),
        targets,
        config.lambda,
        rel_spec.clone(),
    )?;

    let absolute = ModeOutcome {
        non_stitched: accuracy(
            &abs_head.predict_labels(&feature_rows(&setup.x1, &setup.test), &abs_spec)?,
            &test_labels,
        ),
        stitched: accuracy(
            &abs_head.predict_labels(&feature_rows(&setup.x2, &setup.test), &abs_spec)?,
            &test_labels,
        ),
    };
    let stitched_rel_spec = FeatureSpec::relative(&setup.rel2);
    let relative = ModeOutcome {
        non_stitched: accuracy(
            &rel_head.predict_labels(&feature_rows(&setup.rel1, &setup.test), &rel_spec)?,
            &test_labels,
        ),
        stitched: accuracy(
            &rel_head.predict_labels(
                &feature_rows(&setup.rel2, &setup.test),
                &stitched_rel_spec,
            )?,
            &test_labels,
        ),
    };

    let relative_proxy = latent_similarity_proxy(&setup.rel2, &setup.rel1)?;
    let test_ids: Vec<String> = setup
        .test
        .iter()
        .map(|&i| setup.rel1.ids()[i].clone())
        .collect();
    let rel1_test = setup.rel1.to_embedding_space().subspace(&test_ids)?;
    let rel2_test = setup.rel2.to_embedding_space().subspace(&test_ids)?;
    let relative_alignment = alignment_report(&rel1_test, &rel2_test, config.k)?;

    Ok(ClassificationReport {
        absolute,
        relative,
        relative_proxy,
        relative_alignment,
        n_train: setup.train.len(),
        n_test: setup.test.len(),
        config: config.clone(),
    })
}

/// Same harness with reconstructor heads: features map back to encoder 1's
/// absolute coordinates, and the score is test MSE.
pub fn stitch_reconstruction(config: &StitchConfig) -> Result<ReconstructionReport> {
    let setup = prepare(config)?;
    let train_targets = feature_rows(&setup.x1, &setup.train);
    let test_targets = feature_rows(&setup.x1, &setup.test);
    let abs_spec = FeatureSpec::absolute();
    let rel_spec = FeatureSpec::relative(&setup.rel1);

    let abs_head = train_head(
        &feature_rows(&setup.x1, &setup.train),
        TrainTargets::Values(&train_targets),
        config.lambda,
        abs_spec.clone(),
    )?;
    let rel_head = train_head(
        &feature_rows(&setup.rel1, &setup.train),
        TrainTargets::Values(&train_targets),
        config.lambda,
        rel_spec.clone(),
    )?;

    let absolute = ModeOutcome {
        non_stitched: mse(
            &abs_head.predict_values(&feature_rows(&setup.x1, &setup.test), &abs_spec)?,
            &test_targets,
        ),
        stitched: mse(
            &abs_head.predict_values(&feature_rows(&setup.x2, &setup.test), &abs_spec)?,
            &test_targets,
        ),
    };
    let stitched_rel_spec = FeatureSpec::relative(&setup.rel2);
    let relative = ModeOutcome {
        non_stitched: mse(
            &rel_head.predict_values(&feature_rows(&setup.rel1, &setup.test), &rel_spec)?,
            &test_targets,
        ),
        stitched: mse(
            &rel_head.predict_values(
                &feature_rows(&setup.rel2, &setup.test),
                &stitched_rel_spec,
            )?,
            &test_targets,
        ),
    };

    Ok(ReconstructionReport {
        absolute,
        relative,
        n_train: setup.train.len(),
        n_test: setup.test.len(),
        config: config.clone(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyConfig {
    pub dataset: BlobConfig,
    pub anchors: SelectionConfig,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub n_models: usize,
    pub noise_grid: Vec<f64>,
    #[serde(default)]
    pub transform_seed: u64,
    #[serde(default)]
    pub noise_seed: u64,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxyReport {
    /// Distortion bound of each degraded encoder.
    pub noise: Vec<f64>,
    /// Stitched-head accuracy per encoder.
    pub accuracy: Vec<f64>,
    /// Latent similarity to the reference per encoder.
    pub proxy: Vec<f64>,
    /// Pearson correlation between the two series.
    pub pearson_r: f64,
    pub config: ProxyConfig,
}

/// Degrades a reference encoder with isometries plus bounded distortion and
/// measures how well latent similarity predicts stitched accuracy.
pub fn proxy_experiment(config: &ProxyConfig) -> Result<ProxyReport> {
    if config.n_models < 2 {
        return Err(Error::InvalidParameter(
            "need at least two models for a correlation".into(),
        ));
    }
    if config.noise_grid.is_empty() {
        return Err(Error::InvalidParameter("noise grid is empty".into()));
    }
    let dataset = make_blobs(&config.dataset)?;
    let reference = dataset.space.renamed("reference");
    let anchors = select(&reference, &config.anchors, None)?;
    let anchor_ids = anchors.ids(&reference)?;
    let rel_ref = project(&reference, &anchors)?;

    let (train, test) = stratified_split(
        &dataset.labels,
        dataset.n_classes,
        config.test_fraction,
        config.split_seed,
    )?;
    let train_labels: Vec<usize> = train.iter().map(|&i| dataset.labels[i]).collect();
    let test_labels: Vec<usize> = test.iter().map(|&i| dataset.labels[i]).collect();
    let rel_spec = FeatureSpec::relative(&rel_ref);
    let head = train_head(
        &feature_rows(&rel_ref, &train),
        TrainTargets::Labels {
            labels: &train_labels,
            n_classes: dataset.n_classes,
        },
        config.lambda,
        rel_spec,
    )?;

    let mut noise = Vec::with_capacity(config.n_models);
    let mut acc = Vec::with_capacity(config.n_models);
    let mut proxy = Vec::with_capacity(config.n_models);
    for i in 0..config.n_models {
        let eps = config.noise_grid[i % config.noise_grid.len()];
        let spec = TransformSpec::random_angle_preserving(
            config.dataset.dim,
            config.transform_seed.wrapping_add(i as u64),
            1.0,
        )?;
        let encoder = bounded_distortion(
            &apply(&reference, &spec)?,
            eps,
            config.noise_seed.wrapping_add(i as u64),
        )?;
        let anchors_i = AnchorSet::from_ids(&encoder, &anchor_ids)?;
        let rel_i = project(&encoder, &anchors_i)?;

        let stitched_spec = FeatureSpec::relative(&rel_i);
        let predictions =
            head.predict_labels(&feature_rows(&rel_i, &test), &stitched_spec)?;
        noise.push(eps);
        acc.push(accuracy(&predictions, &test_labels));
        proxy.push(latent_similarity_proxy(&rel_i, &rel_ref)?);
    }

    let pearson_r = pearson(&acc, &proxy)?;
    Ok(ProxyReport {
        noise,
        accuracy: acc,
        proxy,
        pearson_r,
        config: config.clone(),
    })
}
