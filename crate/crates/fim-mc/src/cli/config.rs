//! Flat key-value configuration with `[model]` / `[estimator]` / `[study]`
//! sections, merged as defaults < config file < command-line flags.
//!
//! Unknown sections and keys are rejected with the list of valid ones, and
//! every value error names the offending key and its expected domain.

use crate::error::{Error, Result};
use crate::estimator::{
    EstimatorConfig, InputMode, PerturbationDistribution, Variant, DEFAULT_HALF_WIDTH,
    DEFAULT_INNER_SAMPLES,
};
use crate::experiments::{OutputFormat, DEFAULT_ORACLE_REPS, DEFAULT_ORACLE_SEED};
use crate::models::{
    build_noise_covariances, equicorrelated, MixtureModel, MixtureParams, Model,
    ScalarNormalMeanModel, ScalarNormalVarianceModel, SignalPlusNoiseModel,
};
use crate::numerics::Vector;
use crate::rng::{labels, RngStream};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

const SECTIONS: &[&str] = &["model", "estimator", "study"];
const MODEL_KEYS: &[&str] = &[
    "name",
    "d",
    "n",
    "mu",
    "sigma-diag",
    "sigma-offdiag",
    "noise",
    "lambda",
    "mu1",
    "sigma1",
    "mu2",
    "sigma2",
    "mean",
    "variance",
    "black-box",
];
const ESTIMATOR_KEYS: &[&str] = &[
    "variant",
    "input-mode",
    "num-datasets",
    "N",
    "inner-samples",
    "M",
    "c",
    "c-tilde",
    "perturbation",
    "pert-lo",
    "pert-hi",
];
const STUDY_KEYS: &[&str] = &[
    "reps",
    "paired",
    "seed",
    "format",
    "out",
    "threads",
    "oracle-reps",
    "oracle-seed",
    "cache-dir",
];

/// Parsed `[section] key = value` text.
#[derive(Debug)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::Config(format!(
                        "line {}: unknown section `[{name}]`; valid sections: [model], [estimator], [study]",
                        lineno + 1
                    )));
                }
                current = Some(name.to_string());
                sections.entry(name.to_string()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let Some(section) = &current else {
                return Err(Error::Config(format!(
                    "line {}: `{}` appears before any [section] header",
                    lineno + 1,
                    key.trim()
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let valid_keys = match section.as_str() {
                "model" => MODEL_KEYS,
                "estimator" => ESTIMATOR_KEYS,
                _ => STUDY_KEYS,
            };
            if !valid_keys.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown key `{key}` in [{section}]; valid keys: {}",
                    valid_keys.join(", ")
                )));
            }
            let entry = sections.entry(section.clone()).or_default();
            if entry.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!(
                    "duplicate key `{key}` in [{section}]"
                )));
            }
        }
        Ok(Self { sections })
    }

    fn section(&self, name: &str) -> Option<&BTreeMap<String, String>> {
        self.sections.get(name)
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, domain: &str) -> Result<T> {
    value.parse::<T>().map_err(|_| {
        Error::Config(format!(
            "invalid value `{value}` for key `{key}`: expected {domain}"
        ))
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!(
            "invalid value `{value}` for key `{key}`: expected true or false"
        ))),
    }
}

/// Which reference model a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    SignalPlusNoise,
    Mixture,
    ScalarNormal,
    ScalarVariance,
}

impl ModelName {
    pub const ALL: [ModelName; 4] = [
        ModelName::SignalPlusNoise,
        ModelName::Mixture,
        ModelName::ScalarNormal,
        ModelName::ScalarVariance,
    ];
}

impl std::fmt::Display for ModelName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ModelName::SignalPlusNoise => "signal-plus-noise",
            ModelName::Mixture => "mixture",
            ModelName::ScalarNormal => "scalar-normal",
            ModelName::ScalarVariance => "scalar-variance",
        };
        write!(f, "{name}")
    }
}

impl FromStr for ModelName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signal-plus-noise" => Ok(ModelName::SignalPlusNoise),
            "mixture" => Ok(ModelName::Mixture),
            "scalar-normal" => Ok(ModelName::ScalarNormal),
            "scalar-variance" => Ok(ModelName::ScalarVariance),
            other => Err(Error::Config(format!(
                "unknown model `{other}`; valid: signal-plus-noise, mixture, scalar-normal, scalar-variance"
            ))),
        }
    }
}

/// How the signal-plus-noise model builds its per-row noise covariances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// `P_i = sqrt(i) UᵀU` with `U` uniform(0,1), drawn once per seed.
    ScaledGram,
    /// All `P_i = 0`.
    None,
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseKind::ScaledGram => write!(f, "scaled-gram"),
            NoiseKind::None => write!(f, "none"),
        }
    }
}

impl FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scaled-gram" => Ok(NoiseKind::ScaledGram),
            "none" => Ok(NoiseKind::None),
            other => Err(Error::Config(format!(
                "unknown noise kind `{other}`; valid: scaled-gram, none"
            ))),
        }
    }
}

/// Model choice plus its parameters (with per-model defaults).
#[derive(Debug, Clone)]
pub struct ModelSettings {
    pub name: ModelName,
    pub d: usize,
    pub n: Option<usize>,
    pub mu: f64,
    pub sigma_diag: f64,
    pub sigma_offdiag: f64,
    pub noise: NoiseKind,
    pub lambda: f64,
    pub mu1: f64,
    pub sigma1: f64,
    pub mu2: f64,
    pub sigma2: f64,
    pub mean: f64,
    pub variance: f64,
    pub black_box: bool,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            name: ModelName::SignalPlusNoise,
            d: 4,
            n: None,
            mu: 0.0,
            sigma_diag: 1.0,
            sigma_offdiag: 0.5,
            noise: NoiseKind::ScaledGram,
            lambda: 0.2,
            mu1: 0.0,
            sigma1: 1.0,
            mu2: 4.0,
            sigma2: 9.0,
            mean: 0.0,
            variance: 1.0,
            black_box: false,
        }
    }
}

impl ModelSettings {
    /// Rows per dataset, with the model's own default.
    pub fn rows(&self) -> usize {
        self.n.unwrap_or(match self.name {
            ModelName::SignalPlusNoise | ModelName::Mixture => 30,
            ModelName::ScalarNormal | ModelName::ScalarVariance => 1,
        })
    }

    /// Instantiates the model. The noise covariances of the
    /// signal-plus-noise model come from a dedicated child of `seed`, so
    /// they are fixed across all replications of a study.
    pub fn build(&self, seed: u64) -> Result<Box<dyn Model + Send + Sync>> {
        let n = self.rows();
        let inner: Box<dyn Model + Send + Sync> = match self.name {
            ModelName::SignalPlusNoise => {
                let noise = match self.noise {
                    NoiseKind::ScaledGram => {
                        let mut rng =
                            RngStream::from_seed(seed).child(labels::NOISE_COVARIANCES);
                        build_noise_covariances(self.d, n, &mut rng)
                    }
                    NoiseKind::None => {
                        vec![crate::numerics::SymmetricMatrix::zeros(self.d); n]
                    }
                };
                Box::new(SignalPlusNoiseModel::new(
                    Vector::from_element(self.d, self.mu),
                    equicorrelated(self.d, self.sigma_diag, self.sigma_offdiag),
                    noise,
                )?)
            }
            ModelName::Mixture => Box::new(MixtureModel::new(
                MixtureParams::new(self.lambda, self.mu1, self.sigma1, self.mu2, self.sigma2)?,
                n,
            )?),
            ModelName::ScalarNormal => Box::new(ScalarNormalMeanModel::new(n, self.mean)?),
            ModelName::ScalarVariance => {
                Box::new(ScalarNormalVarianceModel::new(n, self.variance)?)
            }
        };
        if self.black_box {
            let name = format!("{}(black-box)", inner.name());
            Ok(Box::new(BlackBoxWrapper { inner, name }))
        } else {
            Ok(inner)
        }
    }

    fn apply(&mut self, entries: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in entries {
            match key.as_str() {
                "name" => self.name = value.parse()?,
                "d" => self.d = parse_value(key, value, "a positive integer")?,
                "n" => self.n = Some(parse_value(key, value, "a positive integer")?),
                "mu" => self.mu = parse_value(key, value, "a real number")?,
                "sigma-diag" => self.sigma_diag = parse_value(key, value, "a real number")?,
                "sigma-offdiag" => self.sigma_offdiag = parse_value(key, value, "a real number")?,
                "noise" => self.noise = value.parse()?,
                "lambda" => self.lambda = parse_value(key, value, "a real in (0, 1)")?,
                "mu1" => self.mu1 = parse_value(key, value, "a real number")?,
                "sigma1" => self.sigma1 = parse_value(key, value, "a positive real")?,
                "mu2" => self.mu2 = parse_value(key, value, "a real number")?,
                "sigma2" => self.sigma2 = parse_value(key, value, "a positive real")?,
                "mean" => self.mean = parse_value(key, value, "a real number")?,
                "variance" => self.variance = parse_value(key, value, "a positive real")?,
                "black-box" => self.black_box = parse_bool(key, value)?,
                _ => unreachable!("keys validated during parsing"),
            }
        }
        if self.d == 0 {
            return Err(Error::Config("model d must be >= 1".into()));
        }
        if self.n == Some(0) {
            return Err(Error::Config("model n must be >= 1".into()));
        }
        Ok(())
    }

    fn echo(&self, into: &mut Vec<(String, String)>) {
        into.push(("model.name".into(), self.name.to_string()));
        into.push(("model.n".into(), self.rows().to_string()));
        match self.name {
            ModelName::SignalPlusNoise => {
                into.push(("model.d".into(), self.d.to_string()));
                into.push(("model.mu".into(), self.mu.to_string()));
                into.push(("model.sigma-diag".into(), self.sigma_diag.to_string()));
                into.push(("model.sigma-offdiag".into(), self.sigma_offdiag.to_string()));
                into.push(("model.noise".into(), self.noise.to_string()));
            }
            ModelName::Mixture => {
                into.push((
                    "model.theta".into(),
                    format!(
                        "[{}, {}, {}, {}, {}]",
                        self.lambda, self.mu1, self.sigma1, self.mu2, self.sigma2
                    ),
                ));
            }
            ModelName::ScalarNormal => {
                into.push(("model.mean".into(), self.mean.to_string()));
            }
            ModelName::ScalarVariance => {
                into.push(("model.variance".into(), self.variance.to_string()));
            }
        }
        if self.black_box {
            into.push(("model.black-box".into(), "true".into()));
        }
    }
}

/// Type-erased black-box wrapper for boxed models.
struct BlackBoxWrapper {
    inner: Box<dyn Model + Send + Sync>,
    name: String,
}

impl Model for BlackBoxWrapper {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim_theta(&self) -> usize {
        self.inner.dim_theta()
    }
    fn data_dim(&self) -> usize {
        self.inner.data_dim()
    }
    fn num_data(&self) -> usize {
        self.inner.num_data()
    }
    fn theta_star(&self) -> Vector {
        self.inner.theta_star()
    }
    fn sample_pseudo(
        &self,
        theta: &Vector,
        rng: &mut RngStream,
    ) -> Result<crate::models::Dataset> {
        self.inner.sample_pseudo(theta, rng)
    }
    fn neg_loglik(&self, theta: &Vector, data: &crate::models::Dataset) -> Result<f64> {
        self.inner.neg_loglik(theta, data)
    }
}

/// Estimator knobs shared by every variant in a run.
#[derive(Debug, Clone)]
pub struct EstimatorSettings {
    pub variants: Vec<Variant>,
    pub input_mode: InputMode,
    pub num_datasets: usize,
    pub samples_per_dataset: usize,
    pub c: f64,
    pub c_tilde: Option<f64>,
    pub perturbation_kind: String,
    pub pert_lo: f64,
    pub pert_hi: f64,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            variants: vec![Variant::Basic],
            input_mode: InputMode::Gradient,
            num_datasets: 1_000,
            samples_per_dataset: DEFAULT_INNER_SAMPLES,
            c: DEFAULT_HALF_WIDTH,
            c_tilde: None,
            perturbation_kind: "bernoulli".into(),
            pert_lo: 0.5,
            pert_hi: 1.5,
        }
    }
}

impl EstimatorSettings {
    pub fn perturbation(&self) -> Result<PerturbationDistribution> {
        match self.perturbation_kind.as_str() {
            "bernoulli" => Ok(PerturbationDistribution::BernoulliPm1),
            "segmented-uniform" => Ok(PerturbationDistribution::SegmentedUniform {
                lo: self.pert_lo,
                hi: self.pert_hi,
            }),
            other => Err(Error::Config(format!(
                "unknown perturbation `{other}`; valid: bernoulli, segmented-uniform"
            ))),
        }
    }

    /// One estimator configuration per requested variant.
    pub fn estimator_configs(&self, seed: u64) -> Result<Vec<EstimatorConfig>> {
        let perturbation = self.perturbation()?;
        perturbation.validate()?;
        Ok(self
            .variants
            .iter()
            .map(|&variant| EstimatorConfig {
                variant,
                input_mode: self.input_mode,
                num_datasets: self.num_datasets,
                samples_per_dataset: self.samples_per_dataset,
                c: self.c,
                c_tilde: self.c_tilde.unwrap_or(self.c),
                perturbation,
                seed,
            })
            .collect())
    }

    fn apply(&mut self, entries: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in entries {
            match key.as_str() {
                "variant" => {
                    self.variants = value
                        .split(',')
                        .map(|v| v.trim().parse())
                        .collect::<Result<Vec<Variant>>>()?;
                }
                "input-mode" => self.input_mode = value.parse()?,
                "num-datasets" | "N" => {
                    self.num_datasets = parse_value(key, value, "a positive integer")?
                }
                "inner-samples" | "M" => {
                    self.samples_per_dataset = parse_value(key, value, "a positive integer")?
                }
                "c" => self.c = parse_value(key, value, "a positive real")?,
                "c-tilde" => {
                    self.c_tilde = Some(parse_value(key, value, "a positive real")?)
                }
                "perturbation" => self.perturbation_kind = value.clone(),
                "pert-lo" => self.pert_lo = parse_value(key, value, "a positive real")?,
                "pert-hi" => self.pert_hi = parse_value(key, value, "a positive real")?,
                _ => unreachable!("keys validated during parsing"),
            }
        }
        if self.variants.is_empty() {
            return Err(Error::Config("at least one variant is required".into()));
        }
        Ok(())
    }

    fn echo(&self, into: &mut Vec<(String, String)>) {
        let variant_list: Vec<String> = self.variants.iter().map(|v| v.to_string()).collect();
        into.push(("estimator.variant".into(), variant_list.join(",")));
        into.push(("estimator.input-mode".into(), self.input_mode.to_string()));
        into.push((
            "estimator.num-datasets".into(),
            self.num_datasets.to_string(),
        ));
        into.push((
            "estimator.inner-samples".into(),
            self.samples_per_dataset.to_string(),
        ));
        into.push(("estimator.c".into(), format!("{:e}", self.c)));
        into.push((
            "estimator.c-tilde".into(),
            format!("{:e}", self.c_tilde.unwrap_or(self.c)),
        ));
        into.push((
            "estimator.perturbation".into(),
            self.perturbation_kind.clone(),
        ));
    }
}

/// Study-level knobs: replication count, pairing, seeds, output.
#[derive(Debug, Clone)]
pub struct StudySettings {
    pub replications: usize,
    pub paired: bool,
    pub seed: Option<u64>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub oracle_reps: usize,
    pub oracle_seed: u64,
    pub cache_dir: PathBuf,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            replications: 50,
            paired: true,
            seed: None,
            format: OutputFormat::Text,
            out: None,
            threads: None,
            oracle_reps: DEFAULT_ORACLE_REPS,
            oracle_seed: DEFAULT_ORACLE_SEED,
            cache_dir: PathBuf::from("oracle-cache"),
        }
    }
}

impl StudySettings {
    fn apply(&mut self, entries: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in entries {
            match key.as_str() {
                "reps" => self.replications = parse_value(key, value, "an integer >= 2")?,
                "paired" => self.paired = parse_bool(key, value)?,
                "seed" => self.seed = Some(parse_value(key, value, "an unsigned integer")?),
                "format" => self.format = value.parse()?,
                "out" => self.out = Some(PathBuf::from(value)),
                "threads" => self.threads = Some(parse_value(key, value, "a positive integer")?),
                "oracle-reps" => {
                    self.oracle_reps = parse_value(key, value, "a positive integer")?
                }
                "oracle-seed" => {
                    self.oracle_seed = parse_value(key, value, "an unsigned integer")?
                }
                "cache-dir" => self.cache_dir = PathBuf::from(value),
                _ => unreachable!("keys validated during parsing"),
            }
        }
        Ok(())
    }

    fn echo(&self, resolved_seed: u64, seed_was_given: bool, into: &mut Vec<(String, String)>) {
        into.push(("study.reps".into(), self.replications.to_string()));
        into.push(("study.paired".into(), self.paired.to_string()));
        into.push((
            "study.seed".into(),
            if seed_was_given {
                resolved_seed.to_string()
            } else {
                format!("{resolved_seed} (auto)")
            },
        ));
        into.push(("study.format".into(), self.format.to_string()));
        into.push(("study.oracle-reps".into(), self.oracle_reps.to_string()));
        into.push(("study.oracle-seed".into(), self.oracle_seed.to_string()));
    }
}

/// Fully merged settings for one invocation.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub model: ModelSettings,
    pub estimator: EstimatorSettings,
    pub study: StudySettings,
}

impl Settings {
    /// Applies a parsed config file on top of the defaults.
    pub fn apply_file(&mut self, raw: &RawConfig) -> Result<()> {
        if let Some(entries) = raw.section("model") {
            self.model.apply(entries)?;
        }
        if let Some(entries) = raw.section("estimator") {
            self.estimator.apply(entries)?;
        }
        if let Some(entries) = raw.section("study") {
            self.study.apply(entries)?;
        }
        Ok(())
    }

    /// Echo of the fully resolved configuration, defaults included.
    pub fn echo(&self, resolved_seed: u64, seed_was_given: bool) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.model.echo(&mut out);
        self.estimator.echo(&mut out);
        self.study.echo(resolved_seed, seed_was_given, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let raw = RawConfig::parse(
            "# comment\n[model]\nname = mixture\nn = 12\n\n[estimator]\nvariant = basic, feedback\nN = 500\n\n[study]\nreps = 10\nseed = 7\n",
        )
        .unwrap();
        let mut settings = Settings::default();
        settings.apply_file(&raw).unwrap();
        assert_eq!(settings.model.name, ModelName::Mixture);
        assert_eq!(settings.model.rows(), 12);
        assert_eq!(
            settings.estimator.variants,
            vec![Variant::Basic, Variant::Feedback]
        );
        assert_eq!(settings.estimator.num_datasets, 500);
        assert_eq!(settings.estimator.samples_per_dataset, 2);
        assert_eq!(settings.study.replications, 10);
        assert_eq!(settings.study.seed, Some(7));
        assert!(settings.study.paired);
    }

    #[test]
    fn unknown_key_is_rejected_with_valid_domain() {
        let err = RawConfig::parse("[model]\nbogus = 1\n").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("unknown key `bogus`"));
        assert!(message.contains("valid keys"));
    }

    #[test]
    fn unknown_section_and_model_are_rejected() {
        assert!(RawConfig::parse("[nope]\n").is_err());
        let raw = RawConfig::parse("[model]\nname = whatever\n").unwrap();
        let mut settings = Settings::default();
        let err = settings.apply_file(&raw).unwrap_err();
        assert!(err.to_string().contains("unknown model"));
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        assert!(RawConfig::parse("[study]\nreps = 2\nreps = 3\n").is_err());
    }

    #[test]
    fn invalid_values_name_the_key() {
        let raw = RawConfig::parse("[estimator]\nN = not-a-number\n").unwrap();
        let mut settings = Settings::default();
        let err = settings.apply_file(&raw).unwrap_err();
        assert!(err.to_string().contains("`N`"));
    }

    #[test]
    fn scalar_oracle_case_builds() {
        let raw = RawConfig::parse("[model]\nname = signal-plus-noise\nd = 1\nn = 1\nnoise = none\n")
            .unwrap();
        let mut settings = Settings::default();
        settings.apply_file(&raw).unwrap();
        let model = settings.model.build(0).unwrap();
        assert_eq!(model.dim_theta(), 2);
        let fim = model.true_fim(&model.theta_star()).unwrap().unwrap();
        assert!((fim.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((fim.get(1, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reference_configuration_is_accepted() {
        let raw = RawConfig::parse(
            "[model]\nname = signal-plus-noise\nd = 4\nn = 30\n[estimator]\nvariant = basic,feedback\nN = 40000\nM = 2\nc = 1e-4\n[study]\nreps = 50\n",
        )
        .unwrap();
        let mut settings = Settings::default();
        settings.apply_file(&raw).unwrap();
        let configs = settings.estimator.estimator_configs(1).unwrap();
        assert_eq!(configs.len(), 2);
        assert_eq!(configs[0].num_datasets, 40_000);
        assert_eq!(configs[0].samples_per_dataset, 2);
        assert!((configs[0].c - 1e-4).abs() < 1e-18);
        let model = settings.model.build(1).unwrap();
        assert_eq!(model.dim_theta(), 14);
    }

    #[test]
    fn black_box_strips_capabilities() {
        let raw = RawConfig::parse("[model]\nname = mixture\nblack-box = true\n").unwrap();
        let mut settings = Settings::default();
        settings.apply_file(&raw).unwrap();
        let model = settings.model.build(0).unwrap();
        assert!(!model.has_gradient());
        assert!(!model.has_per_datum());
        assert!(model.true_fim(&model.theta_star()).is_none());
    }
}
