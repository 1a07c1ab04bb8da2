//! Experiment configuration: one strict JSON document per run.
//!
//! Unknown keys are rejected so that typos fail fast instead of silently
//! running a different experiment.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use mfl_core::data::{
    load_idx, make_synthetic, partition_uniform, subset_samples, to_samples, Partition, Sample,
};
use mfl_core::fed::InitKind;
use mfl_core::models::ModelSpec;
use mfl_core::rng::Stream;
use mfl_core::ParamVector;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub eta: f64,
    pub gamma: f64,
    pub tau: usize,
    pub total_iters: usize,
    pub nodes: usize,
    pub seed: u64,
    #[serde(default)]
    pub init: InitConfig,
    /// Which algorithms `run` simulates; defaults to all three.
    #[serde(default)]
    pub algorithms: Option<Vec<AlgorithmName>>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub estimate: Option<EstimateConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    Synthetic {
        dim: usize,
        spread: f64,
    },
    Mnist {
        images: PathBuf,
        labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        #[serde(default = "default_subset")]
        subset: usize,
    },
}

fn default_subset() -> usize {
    5000
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Svm { lambda: f64 },
    Linreg,
    Logreg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    Mfl,
    Fl,
    Mgd,
}

impl AlgorithmName {
    pub fn label(self) -> &'static str {
        match self {
            AlgorithmName::Mfl => "mfl",
            AlgorithmName::Fl => "fl",
            AlgorithmName::Mgd => "mgd",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    Gamma(Vec<f64>),
    Tau(Vec<usize>),
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitConfig {
    #[default]
    Zeros,
    Uniform(f64),
}

impl InitConfig {
    pub fn to_kind(self) -> InitKind {
        match self {
            InitConfig::Zeros => InitKind::Zeros,
            InitConfig::Uniform(scale) => InitKind::Uniform { scale },
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_probes() -> usize {
    16
}

fn default_radius() -> f64 {
    1.0
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            probes: default_probes(),
            radius: default_radius(),
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: ConfigFile = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn model_spec(&self) -> anyhow::Result<ModelSpec> {
        Ok(match self.model {
            ModelConfig::Svm { lambda } => ModelSpec::svm(lambda)?,
            ModelConfig::Linreg => ModelSpec::linreg(),
            ModelConfig::Logreg => ModelSpec::logreg(),
        })
    }

    fn validate(&self) -> anyhow::Result<()> {
        let eta_ok = self.eta.is_finite() && self.eta > 0.0;
        if !eta_ok {
            bail!("eta must be positive");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            bail!("gamma must lie in [0, 1)");
        }
        if self.tau < 1 {
            bail!("tau must be at least 1");
        }
        if self.total_iters < 1 {
            bail!("total_iters must be at least 1");
        }
        if !self.total_iters.is_multiple_of(self.tau) {
            bail!(
                "total_iters ({}) must be a multiple of tau ({})",
                self.total_iters,
                self.tau
            );
        }
        if self.nodes < 1 {
            bail!("nodes must be at least 1");
        }
        if let ModelConfig::Svm { lambda } = self.model {
            let lambda_ok = lambda.is_finite() && lambda > 0.0;
            if !lambda_ok {
                bail!("svm lambda must be positive");
            }
        }
        match &self.dataset {
            DatasetConfig::Synthetic { dim, spread } => {
                if *dim < 1 {
                    bail!("synthetic dim must be at least 1");
                }
                let spread_ok = spread.is_finite() && *spread >= 0.0;
                if !spread_ok {
                    bail!("synthetic spread must be nonnegative");
                }
                if !matches!(self.model, ModelConfig::Linreg) {
                    bail!("the synthetic dataset encodes a least-squares problem; set model kind to linreg");
                }
            }
            DatasetConfig::Mnist { subset, .. } => {
                if *subset < self.nodes {
                    bail!("subset ({subset}) must cover at least one sample per node");
                }
            }
        }
        match &self.sweep {
            Some(SweepConfig::Gamma(values)) => {
                if values.is_empty() {
                    bail!("gamma sweep must list at least one value");
                }
                if !values.windows(2).all(|w| w[0] < w[1]) {
                    bail!("gamma sweep values must be unique and sorted ascending");
                }
                if values.iter().any(|g| !(0.0..1.0).contains(g)) {
                    bail!("gamma sweep values must lie in [0, 1)");
                }
            }
            Some(SweepConfig::Tau(values)) => {
                if values.is_empty() {
                    bail!("tau sweep must list at least one value");
                }
                if !values.windows(2).all(|w| w[0] < w[1]) {
                    bail!("tau sweep values must be unique and sorted ascending");
                }
                if let Some(bad) = values
                    .iter()
                    .find(|t| **t < 1 || !self.total_iters.is_multiple_of(**t))
                {
                    bail!("tau sweep value {bad} does not divide total_iters");
                }
            }
            None => {}
        }
        if let Some(est) = &self.estimate {
            if est.probes < 2 {
                bail!("estimate.probes must be at least 2");
            }
            let radius_ok = est.radius.is_finite() && est.radius > 0.0;
            if !radius_ok {
                bail!("estimate.radius must be positive");
            }
        }
        Ok(())
    }
}

/// Exact constants carried by the synthetic dataset.
#[derive(Debug, Clone)]
pub struct SyntheticTruth {
    pub beta: f64,
    pub delta: f64,
    pub w_star: ParamVector,
}

/// A fully materialized experiment: partitioned training data, the optional
/// test set, the model, and exact constants when the data provides them.
pub struct Problem {
    pub partition: Partition,
    pub test_set: Option<Vec<Sample>>,
    pub model: ModelSpec,
    pub truth: Option<SyntheticTruth>,
}

impl Problem {
    pub fn build(config: &ConfigFile, seed: u64) -> anyhow::Result<Self> {
        let model = config.model_spec()?;
        match &config.dataset {
            DatasetConfig::Synthetic { dim, spread } => {
                let problem = make_synthetic(*dim, config.nodes, seed, *spread)?;
                Ok(Problem {
                    partition: problem.partition,
                    test_set: None,
                    model,
                    truth: Some(SyntheticTruth {
                        beta: problem.beta,
                        delta: problem.delta,
                        w_star: problem.w_star,
                    }),
                })
            }
            DatasetConfig::Mnist {
                images,
                labels,
                test_images,
                test_labels,
                subset,
            } => {
                let scheme = model.label_scheme();
                let train_raw = load_idx(images, labels)?;
                let train_all = to_samples(&train_raw, scheme)?;
                let train = subset_samples(
                    train_all,
                    (*subset).min(train_raw.labels.len()),
                    seed,
                    Stream::SubsetTrain,
                )?;
                let test_raw = load_idx(test_images, test_labels)?;
                let test_all = to_samples(&test_raw, scheme)?;
                let test = subset_samples(
                    test_all,
                    (*subset).min(test_raw.labels.len()),
                    seed,
                    Stream::SubsetTest,
                )?;
                let partition = partition_uniform(train, config.nodes, seed)?;
                Ok(Problem {
                    partition,
                    test_set: Some(test),
                    model,
                    truth: None,
                })
            }
        }
    }

    /// Test set handed to simulators: present only when the model reports
    /// accuracy curves.
    pub fn accuracy_test_set(&self) -> Option<&[Sample]> {
        if self.model.reports_accuracy() {
            self.test_set.as_deref()
        } else {
            None
        }
    }
}
