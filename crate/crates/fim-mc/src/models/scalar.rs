//! One-parameter Gaussian reference models.

use super::{check_dataset, check_theta_len, Dataset, Model};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SymmetricMatrix, Vector};
use crate::rng::RngStream;

const LN_2PI: f64 = 1.8378770664093453;

/// `z ~ N(theta, 1)` with `n` i.i.d. observations; the unknown is the mean.
///
/// The negative log-likelihood is quadratic in `theta`, so every
/// perturbation-based Hessian estimate is exact here. That makes this model
/// a sharp determinism check for the estimators, but useless for studying
/// Monte Carlo error (see [`ScalarNormalVarianceModel`] for that).
pub struct ScalarNormalMeanModel {
    n: usize,
    mean: f64,
}

impl ScalarNormalMeanModel {
    pub fn new(n: usize, mean: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dataset size must be >= 1".into()));
        }
        if !mean.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { n, mean })
    }
}

impl Model for ScalarNormalMeanModel {
    fn name(&self) -> &str {
        "scalar-normal"
    }

    fn dim_theta(&self) -> usize {
        1
    }

    fn data_dim(&self) -> usize {
        1
    }

    fn num_data(&self) -> usize {
        self.n
    }

    fn theta_star(&self) -> Vector {
        Vector::from_row_slice(&[self.mean])
    }

    fn sample_pseudo(&self, theta: &Vector, rng: &mut RngStream) -> Result<Dataset> {
        check_theta_len(theta, 1)?;
        let rows = Matrix::from_fn(self.n, 1, |_, _| theta[0] + rng.standard_normal());
        Dataset::new(rows)
    }

    fn neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<f64> {
        check_dataset(self, data)?;
        check_theta_len(theta, 1)?;
        let mut total = 0.0;
        for i in 0..self.n {
            let r = data.scalar(i) - theta[0];
            total += 0.5 * (r * r + LN_2PI);
        }
        Ok(total)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn grad_neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<Vector> {
        check_dataset(self, data)?;
        check_theta_len(theta, 1)?;
        let sum: f64 = (0..self.n).map(|i| theta[0] - data.scalar(i)).sum();
        Ok(Vector::from_row_slice(&[sum]))
    }

    fn has_per_datum(&self) -> bool {
        true
    }

    fn neg_loglik_datum(&self, theta: &Vector, index: usize, data: &Dataset) -> Result<f64> {
        check_dataset(self, data)?;
        check_theta_len(theta, 1)?;
        let r = data.scalar(index) - theta[0];
        Ok(0.5 * (r * r + LN_2PI))
    }

    fn grad_neg_loglik_datum(&self, theta: &Vector, index: usize, data: &Dataset) -> Result<Vector> {
        check_dataset(self, data)?;
        check_theta_len(theta, 1)?;
        Ok(Vector::from_row_slice(&[theta[0] - data.scalar(index)]))
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn hessian_neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<SymmetricMatrix> {
        check_dataset(self, data)?;
        check_theta_len(theta, 1)?;
        Ok(SymmetricMatrix::from_diagonal(&Vector::from_row_slice(&[
            self.n as f64,
        ])))
    }

    fn true_fim(&self, _theta: &Vector) -> Option<Result<SymmetricMatrix>> {
        Some(Ok(SymmetricMatrix::from_diagonal(&Vector::from_row_slice(
            &[self.n as f64],
        ))))
    }
}

/// `z ~ N(0, theta)` with `n` i.i.d. observations; the unknown is the
/// variance.
///
/// Unlike the mean model, the per-observation Hessian `z²/θ³ - 1/(2θ²)`
/// depends on the data, so information-matrix estimates carry genuine Monte
/// Carlo error. True FIM: `n / (2 theta²)`.
pub struct ScalarNormalVarianceModel {
    n: usize,
    variance: f64,
}

impl ScalarNormalVarianceModel {
    pub fn new(n: usize, variance: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dataset size must be >= 1".into()));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "variance must be positive, got {variance}"
            )));
        }
        Ok(Self { n, variance })
    }

    fn check_variance(theta: &Vector) -> Result<f64> {
        check_theta_len(theta, 1)?;
        if theta[0] <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "variance must be positive, got {}",
                theta[0]
            )));
        }
        Ok(theta[0])
    }
}

impl Model for ScalarNormalVarianceModel {
    fn name(&self) -> &str {
        "scalar-variance"
    }

    fn dim_theta(&self) -> usize {
        1
    }

    fn data_dim(&self) -> usize {
        1
    }

    fn num_data(&self) -> usize {
        self.n
    }

    fn theta_star(&self) -> Vector {
        Vector::from_row_slice(&[self.variance])
    }

    fn sample_pseudo(&self, theta: &Vector, rng: &mut RngStream) -> Result<Dataset> {
        let var = Self::check_variance(theta)?;
        let sd = var.sqrt();
        let rows = Matrix::from_fn(self.n, 1, |_, _| sd * rng.standard_normal());
        Dataset::new(rows)
    }

    fn neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<f64> {
        check_dataset(self, data)?;
        let var = Self::check_variance(theta)?;
        let mut total = 0.0;
        for i in 0..self.n {
            let z = data.scalar(i);
            total += 0.5 * (LN_2PI + var.ln() + z * z / var);
        }
        Ok(total)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn grad_neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<Vector> {
        check_dataset(self, data)?;
        let var = Self::check_variance(theta)?;
        let sum: f64 = (0..self.n)
            .map(|i| {
                let z = data.scalar(i);
                0.5 / var - z * z / (2.0 * var * var)
            })
            .sum();
        Ok(Vector::from_row_slice(&[sum]))
    }

    fn has_per_datum(&self) -> bool {
        true
    }

    fn neg_loglik_datum(&self, theta: &Vector, index: usize, data: &Dataset) -> Result<f64> {
        check_dataset(self, data)?;
        let var = Self::check_variance(theta)?;
        let z = data.scalar(index);
        Ok(0.5 * (LN_2PI + var.ln() + z * z / var))
    }

    fn grad_neg_loglik_datum(&self, theta: &Vector, index: usize, data: &Dataset) -> Result<Vector> {
        check_dataset(self, data)?;
        let var = Self::check_variance(theta)?;
        let z = data.scalar(index);
        Ok(Vector::from_row_slice(&[
            0.5 / var - z * z / (2.0 * var * var),
        ]))
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn hessian_neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<SymmetricMatrix> {
        check_dataset(self, data)?;
        let var = Self::check_variance(theta)?;
        let sum: f64 = (0..self.n)
            .map(|i| {
                let z = data.scalar(i);
                z * z / (var * var * var) - 0.5 / (var * var)
            })
            .sum();
        Ok(SymmetricMatrix::from_diagonal(&Vector::from_row_slice(&[
            sum,
        ])))
    }

    fn true_fim(&self, theta: &Vector) -> Option<Result<SymmetricMatrix>> {
        let var = match Self::check_variance(theta) {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        Some(Ok(SymmetricMatrix::from_diagonal(&Vector::from_row_slice(
            &[self.n as f64 / (2.0 * var * var)],
        ))))
    }
}
