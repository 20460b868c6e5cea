//! Pluggable statistical models: the capability trait, the dataset container,
//! and the reference models used by the experiments.

mod mixture;
mod oracle;
mod quadratic;
mod scalar;
mod signal_noise;

pub use mixture::{mix_density, MixtureModel, MixtureParams};
pub use oracle::{monte_carlo_fim, OracleCache};
pub use quadratic::QuadraticModel;
pub use scalar::{ScalarNormalMeanModel, ScalarNormalVarianceModel};
pub use signal_noise::{
    build_noise_covariances, equicorrelated, theta_dim, theta_pack, theta_unpack,
    SignalPlusNoiseModel,
};

use crate::error::{Error, Result};
use crate::numerics::{all_finite, Matrix, SymmetricMatrix, Vector};
use crate::rng::RngStream;

/// One pseudo dataset: `n` rows of dimension `data_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Matrix,
}

impl Dataset {
    pub fn new(rows: Matrix) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::InvalidInput("dataset must be non-empty".into()));
        }
        if !all_finite(rows.iter()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: &[Vector]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("dataset must be non-empty".into()));
        }
        let dim = rows[0].len();
        let m = Matrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        Self::new(m)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    /// Row `i` as a column vector.
    pub fn row(&self, i: usize) -> Vector {
        self.rows.row(i).transpose()
    }

    /// Scalar datasets (dimension 1) expose the raw value directly.
    pub fn scalar(&self, i: usize) -> f64 {
        self.rows[(i, 0)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rows
    }
}

/// Capability-based model interface consumed by the estimators.
///
/// Every model can synthesize pseudo data at a parameter point and evaluate
/// the negative log-likelihood. Gradients, per-datum access, analytic
/// Hessians, and an analytic information matrix are optional; the matching
/// `has_*` flag advertises each one, and the default method bodies report a
/// capability error.
pub trait Model {
    fn name(&self) -> &str;

    /// Parameter dimension `p`.
    fn dim_theta(&self) -> usize;

    /// Dimension of one data row.
    fn data_dim(&self) -> usize;

    /// Number of rows per dataset.
    fn num_data(&self) -> usize;

    /// Canonical evaluation point (also the generation point for pseudo
    /// data in the replication studies).
    fn theta_star(&self) -> Vector;

    /// Draws one pseudo dataset from the model at `theta`.
    fn sample_pseudo(&self, theta: &Vector, rng: &mut RngStream) -> Result<Dataset>;

    /// Negative log-likelihood of `data` at `theta`.
    fn neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<f64>;

    fn has_gradient(&self) -> bool {
        false
    }

    /// Gradient of the negative log-likelihood.
    fn grad_neg_loglik(&self, _theta: &Vector, _data: &Dataset) -> Result<Vector> {
        Err(self.missing("an exact gradient"))
    }

    fn has_per_datum(&self) -> bool {
        false
    }

    /// Contribution of row `index` to the negative log-likelihood.
    fn neg_loglik_datum(&self, _theta: &Vector, _index: usize, _data: &Dataset) -> Result<f64> {
        Err(self.missing("per-datum likelihood access"))
    }

    /// Gradient of the contribution of row `index`.
    fn grad_neg_loglik_datum(
        &self,
        _theta: &Vector,
        _index: usize,
        _data: &Dataset,
    ) -> Result<Vector> {
        Err(self.missing("per-datum gradient access"))
    }

    fn has_hessian(&self) -> bool {
        false
    }

    /// Analytic Hessian of the negative log-likelihood over a full dataset.
    fn hessian_neg_loglik(&self, _theta: &Vector, _data: &Dataset) -> Result<SymmetricMatrix> {
        Err(self.missing("an analytic Hessian"))
    }

    /// Analytic information matrix, when the model has one.
    fn true_fim(&self, _theta: &Vector) -> Option<Result<SymmetricMatrix>> {
        None
    }

    fn missing(&self, capability: &'static str) -> Error {
        Error::MissingCapability {
            model: self.name().to_string(),
            capability,
        }
    }
}

/// Wrapper that hides every optional capability of an inner model, leaving
/// only pseudo-data sampling and likelihood values.
///
/// Useful for exercising the likelihood-only estimation path exactly as it
/// would run against a model where nothing else is available.
pub struct BlackBoxModel<M: Model> {
    inner: M,
    name: String,
}

impl<M: Model> BlackBoxModel<M> {
    pub fn new(inner: M) -> Self {
        let name = format!("{}(black-box)", inner.name());
        Self { inner, name }
    }
}

impl<M: Model> Model for BlackBoxModel<M> {
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

    fn sample_pseudo(&self, theta: &Vector, rng: &mut RngStream) -> Result<Dataset> {
        self.inner.sample_pseudo(theta, rng)
    }

    fn neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<f64> {
        self.inner.neg_loglik(theta, data)
    }
}

pub(crate) fn check_theta_len(theta: &Vector, expected: usize) -> Result<()> {
    if theta.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: theta.len(),
        });
    }
    if !all_finite(theta.iter()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

pub(crate) fn check_dataset<M: Model + ?Sized>(model: &M, data: &Dataset) -> Result<()> {
    if data.num_rows() != model.num_data() || data.dim() != model.data_dim() {
        return Err(Error::InvalidInput(format!(
            "dataset shape {}x{} does not match model `{}` ({}x{})",
            data.num_rows(),
            data.dim(),
            model.name(),
            model.num_data(),
            model.data_dim(),
        )));
    }
    Ok(())
}
