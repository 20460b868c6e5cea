//! Synthetic model with a fixed quadratic objective, used to validate
//! perturbation-based Hessian machinery against exact algebra.

use super::{check_theta_len, Dataset, Model};
use crate::error::Result;
use crate::numerics::{Matrix, SymmetricMatrix, Vector};
use crate::rng::RngStream;

/// Deterministic objective `L(theta) = 0.5 thetaᵀ A theta`.
///
/// The "dataset" carries no information; gradients and Hessians are exact,
/// which pins every simultaneous-perturbation identity to machine precision.
pub struct QuadraticModel {
    a: SymmetricMatrix,
}

impl QuadraticModel {
    pub fn new(a: SymmetricMatrix) -> Self {
        Self { a }
    }

    pub fn hessian(&self) -> &SymmetricMatrix {
        &self.a
    }
}

impl Model for QuadraticModel {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim_theta(&self) -> usize {
        self.a.order()
    }

    fn data_dim(&self) -> usize {
        1
    }

    fn num_data(&self) -> usize {
        1
    }

    fn theta_star(&self) -> Vector {
        Vector::zeros(self.a.order())
    }

    fn sample_pseudo(&self, _theta: &Vector, _rng: &mut RngStream) -> Result<Dataset> {
        Dataset::new(Matrix::zeros(1, 1))
    }

    fn neg_loglik(&self, theta: &Vector, _data: &Dataset) -> Result<f64> {
        check_theta_len(theta, self.dim_theta())?;
        Ok(0.5 * theta.dot(&(self.a.matrix() * theta)))
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn grad_neg_loglik(&self, theta: &Vector, _data: &Dataset) -> Result<Vector> {
        check_theta_len(theta, self.dim_theta())?;
        Ok(self.a.matrix() * theta)
    }

    fn has_per_datum(&self) -> bool {
        true
    }

    fn neg_loglik_datum(&self, theta: &Vector, _index: usize, data: &Dataset) -> Result<f64> {
        self.neg_loglik(theta, data)
    }

    fn grad_neg_loglik_datum(&self, theta: &Vector, _index: usize, data: &Dataset) -> Result<Vector> {
        self.grad_neg_loglik(theta, data)
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn hessian_neg_loglik(&self, _theta: &Vector, _data: &Dataset) -> Result<SymmetricMatrix> {
        Ok(self.a.clone())
    }

    fn true_fim(&self, _theta: &Vector) -> Option<Result<SymmetricMatrix>> {
        Some(Ok(self.a.clone()))
    }
}
