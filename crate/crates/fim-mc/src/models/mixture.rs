//! Two-component univariate Gaussian mixture with parameters
//! `theta = [lambda, mu1, sigma1, mu2, sigma2]` (sigmas are standard
//! deviations).
//!
//! Likelihoods are evaluated in log space with the max-exponent trick so
//! observations far in the tails of both components do not underflow. The
//! per-datum gradient and Hessian of the negative log-likelihood are closed
//! forms in the component posterior weights.

use super::{check_dataset, check_theta_len, Dataset, Model};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, SymmetricMatrix, Vector};
use crate::rng::RngStream;

const LN_2PI: f64 = 1.8378770664093453;

/// Validated mixture parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    pub lambda: f64,
    pub mu1: f64,
    pub sigma1: f64,
    pub mu2: f64,
    pub sigma2: f64,
}

impl MixtureParams {
    pub fn new(lambda: f64, mu1: f64, sigma1: f64, mu2: f64, sigma2: f64) -> Result<Self> {
        let params = Self {
            lambda,
            mu1,
            sigma1,
            mu2,
            sigma2,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn from_theta(theta: &Vector) -> Result<Self> {
        check_theta_len(theta, 5)?;
        Self::new(theta[0], theta[1], theta[2], theta[3], theta[4])
    }

    pub fn to_theta(self) -> Vector {
        Vector::from_row_slice(&[self.lambda, self.mu1, self.sigma1, self.mu2, self.sigma2])
    }

    fn validate(&self) -> Result<()> {
        let all = [self.lambda, self.mu1, self.sigma1, self.mu2, self.sigma2];
        if !all.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mixture weight must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        if self.sigma1 <= 0.0 || self.sigma2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "standard deviations must be positive, got {} and {}",
                self.sigma1, self.sigma2
            )));
        }
        Ok(())
    }
}

fn log_normal_pdf(z: f64, mu: f64, sigma: f64) -> f64 {
    let standardized = (z - mu) / sigma;
    -0.5 * LN_2PI - sigma.ln() - 0.5 * standardized * standardized
}

/// Log density plus the component density ratios `phi_k / f`.
fn log_density_terms(z: f64, p: &MixtureParams) -> (f64, f64, f64) {
    let lp1 = log_normal_pdf(z, p.mu1, p.sigma1);
    let lp2 = log_normal_pdf(z, p.mu2, p.sigma2);
    let l1 = p.lambda.ln() + lp1;
    let l2 = (1.0 - p.lambda).ln() + lp2;
    let m = l1.max(l2);
    let log_f = m + ((l1 - m).exp() + (l2 - m).exp()).ln();
    (log_f, (lp1 - log_f).exp(), (lp2 - log_f).exp())
}

/// Mixture density at `z`.
pub fn mix_density(z: f64, params: &MixtureParams) -> Result<f64> {
    params.validate()?;
    let (log_f, _, _) = log_density_terms(z, params);
    let f = log_f.exp();
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(f)
}

/// I.i.d. mixture-Gaussian model with `n` observations per dataset.
pub struct MixtureModel {
    params: MixtureParams,
    n: usize,
}

impl MixtureModel {
    pub fn new(params: MixtureParams, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "dataset size must be >= 1".into(),
            ));
        }
        Ok(Self { params, n })
    }

    /// Per-datum negative log-density gradient at `z`.
    fn datum_grad(p: &MixtureParams, z: f64) -> Vector {
        let (_, ratio1, ratio2) = log_density_terms(z, p);
        let w1 = p.lambda * ratio1;
        let w2 = (1.0 - p.lambda) * ratio2;
        let u = (z - p.mu1) / p.sigma1;
        let v = (z - p.mu2) / p.sigma2;
        Vector::from_row_slice(&[
            -(ratio1 - ratio2),
            -w1 * u / p.sigma1,
            -w1 * (u * u - 1.0) / p.sigma1,
            -w2 * v / p.sigma2,
            -w2 * (v * v - 1.0) / p.sigma2,
        ])
    }

    /// Per-datum negative log-density Hessian at `z`.
    ///
    /// With `g = -∇f/f` the identity is `∇²(-log f) = g gᵀ - (∇²f)/f`; the
    /// second-derivative terms of each Gaussian component reduce to Hermite
    /// polynomials in the standardized residual.
    fn datum_hessian(p: &MixtureParams, z: f64) -> Matrix {
        let (_, ratio1, ratio2) = log_density_terms(z, p);
        let w1 = p.lambda * ratio1;
        let w2 = (1.0 - p.lambda) * ratio2;
        let u = (z - p.mu1) / p.sigma1;
        let v = (z - p.mu2) / p.sigma2;
        let s1 = p.sigma1;
        let s2 = p.sigma2;

        let g = Self::datum_grad(p, z);
        let mut h = &g * g.transpose();

        // Subtract (∇²f)/f entry by entry.
        let mut b = Matrix::zeros(5, 5);
        b[(0, 1)] = ratio1 * u / s1;
        b[(0, 2)] = ratio1 * (u * u - 1.0) / s1;
        b[(0, 3)] = -ratio2 * v / s2;
        b[(0, 4)] = -ratio2 * (v * v - 1.0) / s2;
        b[(1, 1)] = w1 * (u * u - 1.0) / (s1 * s1);
        b[(1, 2)] = w1 * u * (u * u - 3.0) / (s1 * s1);
        b[(2, 2)] = w1 * (u.powi(4) - 5.0 * u * u + 2.0) / (s1 * s1);
        b[(3, 3)] = w2 * (v * v - 1.0) / (s2 * s2);
        b[(3, 4)] = w2 * v * (v * v - 3.0) / (s2 * s2);
        b[(4, 4)] = w2 * (v.powi(4) - 5.0 * v * v + 2.0) / (s2 * s2);
        for i in 0..5 {
            for j in (i + 1)..5 {
                b[(j, i)] = b[(i, j)];
            }
        }
        h -= b;
        h
    }
}

impl Model for MixtureModel {
    fn name(&self) -> &str {
        "mixture"
    }

    fn dim_theta(&self) -> usize {
        5
    }

    fn data_dim(&self) -> usize {
        1
    }

    fn num_data(&self) -> usize {
        self.n
    }

    fn theta_star(&self) -> Vector {
        self.params.to_theta()
    }

    fn sample_pseudo(&self, theta: &Vector, rng: &mut RngStream) -> Result<Dataset> {
        let p = MixtureParams::from_theta(theta)?;
        let mut rows = Matrix::zeros(self.n, 1);
        for i in 0..self.n {
            // Fixed draw count per observation keeps streams alignable.
            let pick_first = rng.uniform() < p.lambda;
            let noise = rng.standard_normal();
            rows[(i, 0)] = if pick_first {
                p.mu1 + p.sigma1 * noise
            } else {
                p.mu2 + p.sigma2 * noise
            };
        }
        Dataset::new(rows)
    }

    fn neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<f64> {
        check_dataset(self, data)?;
        let p = MixtureParams::from_theta(theta)?;
        let mut total = 0.0;
        for i in 0..self.n {
            let (log_f, _, _) = log_density_terms(data.scalar(i), &p);
            total -= log_f;
        }
        if !total.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(total)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn grad_neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<Vector> {
        check_dataset(self, data)?;
        let p = MixtureParams::from_theta(theta)?;
        let mut g = Vector::zeros(5);
        for i in 0..self.n {
            g += Self::datum_grad(&p, data.scalar(i));
        }
        if !g.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(g)
    }

    fn has_per_datum(&self) -> bool {
        true
    }

    fn neg_loglik_datum(&self, theta: &Vector, index: usize, data: &Dataset) -> Result<f64> {
        check_dataset(self, data)?;
        let p = MixtureParams::from_theta(theta)?;
        let (log_f, _, _) = log_density_terms(data.scalar(index), &p);
        Ok(-log_f)
    }

    fn grad_neg_loglik_datum(&self, theta: &Vector, index: usize, data: &Dataset) -> Result<Vector> {
        check_dataset(self, data)?;
        let p = MixtureParams::from_theta(theta)?;
        Ok(Self::datum_grad(&p, data.scalar(index)))
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn hessian_neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<SymmetricMatrix> {
        check_dataset(self, data)?;
        let p = MixtureParams::from_theta(theta)?;
        let mut h = Matrix::zeros(5, 5);
        for i in 0..self.n {
            h += Self::datum_hessian(&p, data.scalar(i));
        }
        if !h.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        SymmetricMatrix::symmetrized(&h)
    }
}
