//! Monte Carlo information-matrix estimators.
//!
//! All four variants share the same double-averaging skeleton: draw `N`
//! pseudo datasets at the evaluation point, form `M` perturbation-based
//! Hessian samples per dataset, and average. The feedback variants subtract
//! the zero-mean noise component `Psi` evaluated at the running estimate;
//! the independent-perturbation variants decompose each Hessian sample into
//! per-datum contributions with their own perturbation directions.

mod hessian;
mod perturb;

pub use hessian::{delta_g_gradient, delta_g_loglik, hessian_estimate, psi};
pub use perturb::{
    bernoulli_patterns, draw_perturbation, PerturbationDistribution, PerturbationVector,
};

use crate::error::{Error, Result};
use crate::models::{Dataset, Model};
use crate::numerics::{SymmetricMatrix, Vector};
use crate::rng::{labels, RngStream};
use hessian::Scope;
use std::fmt;

/// Estimator variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Plain double averaging of Hessian samples.
    Basic,
    /// Recursive feedback correction of the Hessian noise.
    Feedback,
    /// One independent perturbation per data row.
    Indep,
    /// Feedback applied to per-datum running estimates.
    FeedbackIndep,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Basic,
        Variant::Feedback,
        Variant::Indep,
        Variant::FeedbackIndep,
    ];

    pub fn needs_per_datum(self) -> bool {
        matches!(self, Variant::Indep | Variant::FeedbackIndep)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Variant::Basic => "basic",
            Variant::Feedback => "feedback",
            Variant::Indep => "indep",
            Variant::FeedbackIndep => "feedback-indep",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Variant::Basic),
            "feedback" => Ok(Variant::Feedback),
            "indep" => Ok(Variant::Indep),
            "feedback-indep" | "feedback_indep" => Ok(Variant::FeedbackIndep),
            other => Err(Error::Config(format!(
                "unknown variant `{other}`; valid: basic, feedback, indep, feedback-indep"
            ))),
        }
    }
}

/// What the Hessian samples are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMode {
    /// The model's exact gradient.
    Gradient,
    /// Likelihood values only.
    LoglikOnly,
}

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputMode::Gradient => write!(f, "gradient"),
            InputMode::LoglikOnly => write!(f, "loglik-only"),
        }
    }
}

impl std::str::FromStr for InputMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(InputMode::Gradient),
            "loglik-only" | "loglik_only" => Ok(InputMode::LoglikOnly),
            other => Err(Error::Config(format!(
                "unknown input mode `{other}`; valid: gradient, loglik-only"
            ))),
        }
    }
}

/// Estimator knobs. `num_datasets` is the outer average (`N`),
/// `samples_per_dataset` the inner average (`M`).
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub variant: Variant,
    pub input_mode: InputMode,
    pub num_datasets: usize,
    pub samples_per_dataset: usize,
    /// Outer perturbation half-width.
    pub c: f64,
    /// Inner half-width for likelihood-only mode.
    pub c_tilde: f64,
    pub perturbation: PerturbationDistribution,
    pub seed: u64,
}

/// Reference defaults: `M = 2`, `c = 1e-4`, Bernoulli ±1 perturbations.
pub const DEFAULT_INNER_SAMPLES: usize = 2;
pub const DEFAULT_HALF_WIDTH: f64 = 1e-4;

impl EstimatorConfig {
    pub fn new(variant: Variant, input_mode: InputMode, num_datasets: usize) -> Self {
        Self {
            variant,
            input_mode,
            num_datasets,
            samples_per_dataset: DEFAULT_INNER_SAMPLES,
            c: DEFAULT_HALF_WIDTH,
            c_tilde: DEFAULT_HALF_WIDTH,
            perturbation: PerturbationDistribution::BernoulliPm1,
            seed: 0,
        }
    }

    /// Stable label used for reporting and stream derivation.
    pub fn label(&self) -> String {
        format!("{}/{}", self.variant, self.input_mode)
    }

    /// Validates numeric invariants and model capabilities.
    pub fn validate_against<M: Model + ?Sized>(&self, model: &M) -> Result<()> {
        if self.num_datasets == 0 {
            return Err(Error::Config("N (num_datasets) must be >= 1".into()));
        }
        if self.samples_per_dataset == 0 {
            return Err(Error::Config("M (samples_per_dataset) must be >= 1".into()));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Config(format!("c must be positive, got {}", self.c)));
        }
        if !(self.c_tilde.is_finite() && self.c_tilde > 0.0) {
            return Err(Error::Config(format!(
                "c_tilde must be positive, got {}",
                self.c_tilde
            )));
        }
        self.perturbation.validate()?;
        if self.input_mode == InputMode::Gradient && !model.has_gradient() {
            return Err(model.missing("an exact gradient"));
        }
        if self.variant.needs_per_datum() {
            if !model.has_per_datum() {
                return Err(model.missing("per-datum likelihood access"));
            }
            if self.input_mode == InputMode::Gradient && !model.has_gradient() {
                return Err(model.missing("per-datum gradient access"));
            }
        }
        Ok(())
    }
}

/// An information-matrix estimate with the configuration that produced it.
#[derive(Debug, Clone)]
pub struct FimEstimate {
    matrix: SymmetricMatrix,
    meta: EstimatorConfig,
    datasets_used: usize,
}

impl FimEstimate {
    fn new(matrix: SymmetricMatrix, meta: EstimatorConfig) -> Self {
        let datasets_used = meta.num_datasets;
        Self {
            matrix,
            meta,
            datasets_used,
        }
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SymmetricMatrix {
        self.matrix
    }

    pub fn meta(&self) -> &EstimatorConfig {
        &self.meta
    }

    pub fn datasets_used(&self) -> usize {
        self.datasets_used
    }
}

/// The two random streams an estimator consumes: pseudo-data draws and
/// perturbation draws.
///
/// Keeping them separate is what allows common-random-number pairing: a
/// study hands every variant the same data stream and a variant-specific
/// perturbation stream.
#[derive(Debug, Clone)]
pub struct EstimatorStreams {
    pub data: RngStream,
    pub pert: RngStream,
}

impl EstimatorStreams {
    /// The canonical split used when a single stream is supplied.
    pub fn derive(rng: &RngStream) -> Self {
        Self {
            data: rng.child(labels::DATA),
            pert: rng.child(labels::PERTURBATION),
        }
    }

    pub fn new(data: RngStream, pert: RngStream) -> Self {
        Self { data, pert }
    }
}

/// Estimates the information matrix at `theta`, splitting `rng` into data
/// and perturbation streams.
pub fn estimate<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    config: &EstimatorConfig,
    rng: &RngStream,
) -> Result<FimEstimate> {
    let mut streams = EstimatorStreams::derive(rng);
    estimate_with_streams(model, theta, config, &mut streams)
}

/// Like [`estimate`], seeding the stream from `config.seed`.
pub fn estimate_seeded<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    config: &EstimatorConfig,
) -> Result<FimEstimate> {
    estimate(model, theta, config, &RngStream::from_seed(config.seed))
}

/// Estimates with explicitly provided streams (the study harness uses this
/// for common-random-number pairing).
pub fn estimate_with_streams<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    config: &EstimatorConfig,
    streams: &mut EstimatorStreams,
) -> Result<FimEstimate> {
    config.validate_against(model)?;
    if theta.len() != model.dim_theta() {
        return Err(Error::DimensionMismatch {
            expected: model.dim_theta(),
            got: theta.len(),
        });
    }
    let matrix = match config.variant {
        Variant::Basic => run_basic(model, theta, config, streams)?,
        Variant::Feedback => run_feedback(model, theta, config, streams)?,
        Variant::Indep => run_indep(model, theta, config, streams)?,
        Variant::FeedbackIndep => run_feedback_indep(model, theta, config, streams)?,
    };
    // Final symmetrization pass; the recursions preserve symmetry exactly,
    // this guards accumulated round-off in the averages.
    let matrix = SymmetricMatrix::symmetrized(matrix.matrix())?;
    Ok(FimEstimate::new(matrix, config.clone()))
}

struct HessianSample {
    h: SymmetricMatrix,
    delta: PerturbationVector,
}

fn draw_hessian_sample<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    data: &Dataset,
    config: &EstimatorConfig,
    scope: Scope,
    pert: &mut RngStream,
) -> Result<HessianSample> {
    let p = model.dim_theta();
    let delta = draw_perturbation(p, &config.perturbation, pert)?;
    let delta_g = match config.input_mode {
        InputMode::Gradient => {
            hessian::delta_g_gradient_scoped(model, theta, data, &delta, config.c, scope)?
        }
        InputMode::LoglikOnly => {
            let delta_tilde = draw_perturbation(p, &config.perturbation, pert)?;
            hessian::delta_g_loglik_scoped(
                model,
                theta,
                data,
                &delta,
                &delta_tilde,
                config.c,
                config.c_tilde,
                scope,
            )?
        }
    };
    let h = hessian_estimate(&delta_g, &delta, config.c)?;
    Ok(HessianSample { h, delta })
}

fn run_basic<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    config: &EstimatorConfig,
    streams: &mut EstimatorStreams,
) -> Result<SymmetricMatrix> {
    let p = model.dim_theta();
    let mut acc = SymmetricMatrix::zeros(p);
    for _ in 0..config.num_datasets {
        let data = model.sample_pseudo(theta, &mut streams.data)?;
        for _ in 0..config.samples_per_dataset {
            let sample =
                draw_hessian_sample(model, theta, &data, config, Scope::Full, &mut streams.pert)?;
            acc += &sample.h;
        }
    }
    let count = (config.num_datasets * config.samples_per_dataset) as f64;
    Ok(&acc * (1.0 / count))
}

fn run_feedback<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    config: &EstimatorConfig,
    streams: &mut EstimatorStreams,
) -> Result<SymmetricMatrix> {
    let p = model.dim_theta();
    let m = config.samples_per_dataset as f64;
    let mut running = SymmetricMatrix::zeros(p);
    for i in 1..=config.num_datasets {
        let data = model.sample_pseudo(theta, &mut streams.data)?;
        let mut inner = SymmetricMatrix::zeros(p);
        for _ in 0..config.samples_per_dataset {
            let sample =
                draw_hessian_sample(model, theta, &data, config, Scope::Full, &mut streams.pert)?;
            let correction = psi(&running, &sample.delta)?;
            inner += &(&sample.h - &correction);
        }
        let i = i as f64;
        running = &(&running * ((i - 1.0) / i)) + &(&inner * (1.0 / (i * m)));
    }
    Ok(running)
}

fn run_indep<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    config: &EstimatorConfig,
    streams: &mut EstimatorStreams,
) -> Result<SymmetricMatrix> {
    let p = model.dim_theta();
    let n = model.num_data();
    let m = config.samples_per_dataset as f64;
    // One accumulator per data row, grouped and scaled in the same order as
    // the feedback-indep recursion.
    let mut acc: Vec<SymmetricMatrix> = vec![SymmetricMatrix::zeros(p); n];
    for _ in 0..config.num_datasets {
        let data = model.sample_pseudo(theta, &mut streams.data)?;
        for _ in 0..config.samples_per_dataset {
            // The per-datum samples sum to one full-dataset Hessian sample.
            for (j, slot) in acc.iter_mut().enumerate() {
                let sample = draw_hessian_sample(
                    model,
                    theta,
                    &data,
                    config,
                    Scope::Datum(j),
                    &mut streams.pert,
                )?;
                *slot += &sample.h;
            }
        }
    }
    let scale = 1.0 / (config.num_datasets as f64 * m);
    let mut total = SymmetricMatrix::zeros(p);
    for part in &acc {
        total += &(part * scale);
    }
    Ok(total)
}

fn run_feedback_indep<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    config: &EstimatorConfig,
    streams: &mut EstimatorStreams,
) -> Result<SymmetricMatrix> {
    let p = model.dim_theta();
    let n = model.num_data();
    let m = config.samples_per_dataset as f64;
    let mut running: Vec<SymmetricMatrix> = vec![SymmetricMatrix::zeros(p); n];
    let mut inner: Vec<SymmetricMatrix> = Vec::with_capacity(n);
    for i in 1..=config.num_datasets {
        let data = model.sample_pseudo(theta, &mut streams.data)?;
        inner.clear();
        inner.resize(n, SymmetricMatrix::zeros(p));
        for _ in 0..config.samples_per_dataset {
            for (j, slot) in inner.iter_mut().enumerate() {
                let sample = draw_hessian_sample(
                    model,
                    theta,
                    &data,
                    config,
                    Scope::Datum(j),
                    &mut streams.pert,
                )?;
                let correction = psi(&running[j], &sample.delta)?;
                *slot += &(&sample.h - &correction);
            }
        }
        let i = i as f64;
        for j in 0..n {
            running[j] = &(&running[j] * ((i - 1.0) / i)) + &(&inner[j] * (1.0 / (i * m)));
        }
    }
    let mut total = SymmetricMatrix::zeros(p);
    for part in &running {
        total += part;
    }
    Ok(total)
}
