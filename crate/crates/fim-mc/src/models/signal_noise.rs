//! Signal-plus-noise multivariate normal model: independent rows
//! `z_i ~ N(mu, Sigma + P_i)` with known noise covariances `P_i`.
//!
//! The parameter vector stacks `mu` with the unique elements of `Sigma`
//! (upper triangle by rows), so `p = d + d(d+1)/2`. Likelihood, gradient,
//! Hessian, and the information matrix are all available in closed form;
//! derivatives with respect to the covariance elements use symmetric
//! single-entry basis matrices `E_ab` and reduce to entrywise expressions in
//! `Q_i = (Sigma + P_i)^{-1}` and `w_i = Q_i (z_i - mu)`.

use super::{check_dataset, check_theta_len, Dataset, Model};
use crate::error::{Error, Result};
use crate::numerics::{
    cholesky_factor, cholesky_inverse, cholesky_log_det, cholesky_solve, Matrix, SymmetricMatrix,
    Vector,
};
use crate::rng::RngStream;

const LN_2PI: f64 = 1.8378770664093453;

/// Parameter dimension for data dimension `d`.
pub fn theta_dim(d: usize) -> usize {
    d + d * (d + 1) / 2
}

/// Unique covariance positions `(a, b)` with `a <= b`, upper triangle by rows.
fn sigma_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(d * (d + 1) / 2);
    for a in 0..d {
        for b in a..d {
            pairs.push((a, b));
        }
    }
    pairs
}

/// Stacks `(mu, Sigma)` into a parameter vector.
pub fn theta_pack(mu: &Vector, sigma: &SymmetricMatrix) -> Result<Vector> {
    let d = mu.len();
    if sigma.order() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: sigma.order(),
        });
    }
    let mut theta = Vector::zeros(theta_dim(d));
    for a in 0..d {
        theta[a] = mu[a];
    }
    for (idx, (a, b)) in sigma_pairs(d).into_iter().enumerate() {
        theta[d + idx] = sigma.get(a, b);
    }
    Ok(theta)
}

/// Inverse of [`theta_pack`]; `theta` must have length `theta_dim(d)`.
pub fn theta_unpack(theta: &Vector, d: usize) -> Result<(Vector, SymmetricMatrix)> {
    check_theta_len(theta, theta_dim(d))?;
    let mu = Vector::from_fn(d, |a, _| theta[a]);
    let mut sigma = Matrix::zeros(d, d);
    for (idx, (a, b)) in sigma_pairs(d).into_iter().enumerate() {
        sigma[(a, b)] = theta[d + idx];
        sigma[(b, a)] = theta[d + idx];
    }
    Ok((mu, SymmetricMatrix::new(sigma)?))
}

/// Equicorrelation-style covariance: `diag` on the diagonal, `offdiag` off it.
pub fn equicorrelated(d: usize, diag: f64, offdiag: f64) -> SymmetricMatrix {
    SymmetricMatrix::new(Matrix::from_fn(d, d, |i, j| {
        if i == j {
            diag
        } else {
            offdiag
        }
    }))
    .expect("construction is symmetric")
}

/// Noise covariances `P_i = sqrt(i) UᵀU`, `i = 1..n`, with a single `U` of
/// i.i.d. uniform(0,1) entries drawn from `rng` and then fixed.
pub fn build_noise_covariances(d: usize, n: usize, rng: &mut RngStream) -> Vec<SymmetricMatrix> {
    let u = Matrix::from_fn(d, d, |_, _| rng.uniform());
    let gram = u.transpose() * &u;
    (1..=n)
        .map(|i| {
            SymmetricMatrix::symmetrized(&(&gram * (i as f64).sqrt()))
                .expect("Gram matrix is symmetric")
        })
        .collect()
}

/// `tr(Q E_ab Q E_cd)` for symmetric `Q` and symmetric single-entry basis
/// matrices, reduced to entries of `Q`.
fn trace_pair(q: &Matrix, a: usize, b: usize, c: usize, d: usize) -> f64 {
    match (a == b, c == d) {
        (false, false) => 2.0 * (q[(a, c)] * q[(b, d)] + q[(a, d)] * q[(b, c)]),
        (true, false) => 2.0 * q[(a, c)] * q[(a, d)],
        (false, true) => 2.0 * q[(a, c)] * q[(b, c)],
        (true, true) => q[(a, c)] * q[(a, c)],
    }
}

/// `Q E_cd w` as a vector.
fn q_basis_w(q: &Matrix, c: usize, d: usize, w: &Vector) -> Vector {
    let n = w.len();
    Vector::from_fn(n, |x, _| {
        if c == d {
            q[(x, c)] * w[c]
        } else {
            q[(x, c)] * w[d] + q[(x, d)] * w[c]
        }
    })
}

/// Per-datum likelihood workspace: inverse covariance and whitened residual.
struct DatumTerms {
    log_det: f64,
    q: Matrix,
    w: Vector,
    quad: f64,
}

/// Multivariate normal model with per-row noise covariances.
pub struct SignalPlusNoiseModel {
    mu: Vector,
    sigma: SymmetricMatrix,
    noise: Vec<SymmetricMatrix>,
}

impl SignalPlusNoiseModel {
    pub fn new(mu: Vector, sigma: SymmetricMatrix, noise: Vec<SymmetricMatrix>) -> Result<Self> {
        let d = mu.len();
        if d == 0 {
            return Err(Error::InvalidParameter("data dimension must be >= 1".into()));
        }
        if sigma.order() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: sigma.order(),
            });
        }
        if noise.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one noise covariance is required".into(),
            ));
        }
        for p in &noise {
            if p.order() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.order(),
                });
            }
        }
        Ok(Self { mu, sigma, noise })
    }

    /// Noise-free variant (all `P_i = 0`) with `n` rows.
    pub fn noise_free(mu: Vector, sigma: SymmetricMatrix, n: usize) -> Result<Self> {
        let d = mu.len();
        Self::new(mu, sigma, vec![SymmetricMatrix::zeros(d); n.max(1)])
    }

    pub fn noise(&self) -> &[SymmetricMatrix] {
        &self.noise
    }

    fn d(&self) -> usize {
        self.mu.len()
    }

    /// Cholesky-based terms for row `index` at the unpacked parameters.
    fn datum_terms(
        &self,
        sigma: &SymmetricMatrix,
        mu: &Vector,
        index: usize,
        data: &Dataset,
    ) -> Result<DatumTerms> {
        let s = SymmetricMatrix::new(sigma.matrix() + self.noise[index].matrix())
            .expect("sum of symmetric matrices");
        let chol = cholesky_factor(&s).map_err(|e| match e {
            Error::NotPositiveDefinite { pivot, .. } => {
                Error::ObservationNotPositiveDefinite { index, pivot }
            }
            other => other,
        })?;
        let r = data.row(index) - mu;
        let w = cholesky_solve(&chol, &r);
        let quad = r.dot(&w);
        Ok(DatumTerms {
            log_det: cholesky_log_det(&chol),
            q: cholesky_inverse(&chol),
            w,
            quad,
        })
    }

    fn datum_nll(&self, terms: &DatumTerms) -> f64 {
        0.5 * (self.d() as f64 * LN_2PI + terms.log_det + terms.quad)
    }

    fn datum_grad(&self, terms: &DatumTerms) -> Vector {
        let d = self.d();
        let mut g = Vector::zeros(theta_dim(d));
        for a in 0..d {
            g[a] = -terms.w[a];
        }
        for (idx, (a, b)) in sigma_pairs(d).into_iter().enumerate() {
            g[d + idx] = if a == b {
                0.5 * (terms.q[(a, a)] - terms.w[a] * terms.w[a])
            } else {
                terms.q[(a, b)] - terms.w[a] * terms.w[b]
            };
        }
        g
    }

    fn datum_hessian(&self, terms: &DatumTerms) -> Matrix {
        let d = self.d();
        let p = theta_dim(d);
        let pairs = sigma_pairs(d);
        let mut h = Matrix::zeros(p, p);
        // mu-mu block.
        for a in 0..d {
            for b in 0..d {
                h[(a, b)] = terms.q[(a, b)];
            }
        }
        // mu-sigma block.
        for (idx, &(b, c)) in pairs.iter().enumerate() {
            let col = q_basis_w(&terms.q, b, c, &terms.w);
            for a in 0..d {
                h[(a, d + idx)] = col[a];
                h[(d + idx, a)] = col[a];
            }
        }
        // sigma-sigma block.
        for (i, &(a, b)) in pairs.iter().enumerate() {
            for (j, &(c, e)) in pairs.iter().enumerate().skip(i) {
                let t = q_basis_w(&terms.q, c, e, &terms.w);
                let quad = if a == b {
                    terms.w[a] * t[a]
                } else {
                    terms.w[a] * t[b] + terms.w[b] * t[a]
                };
                let value = -0.5 * trace_pair(&terms.q, a, b, c, e) + quad;
                h[(d + i, d + j)] = value;
                h[(d + j, d + i)] = value;
            }
        }
        h
    }
}

impl Model for SignalPlusNoiseModel {
    fn name(&self) -> &str {
        "signal-plus-noise"
    }

    fn dim_theta(&self) -> usize {
        theta_dim(self.d())
    }

    fn data_dim(&self) -> usize {
        self.d()
    }

    fn num_data(&self) -> usize {
        self.noise.len()
    }

    fn theta_star(&self) -> Vector {
        theta_pack(&self.mu, &self.sigma).expect("stored parameters are consistent")
    }

    fn sample_pseudo(&self, theta: &Vector, rng: &mut RngStream) -> Result<Dataset> {
        let (mu, sigma) = theta_unpack(theta, self.d())?;
        let mut rows = Vec::with_capacity(self.noise.len());
        for (i, p) in self.noise.iter().enumerate() {
            let cov = SymmetricMatrix::new(sigma.matrix() + p.matrix())
                .expect("sum of symmetric matrices");
            let row = crate::numerics::mvn_sample(&mu, &cov, rng).map_err(|e| match e {
                Error::NotPositiveDefinite { pivot, .. } => {
                    Error::ObservationNotPositiveDefinite { index: i, pivot }
                }
                other => other,
            })?;
            rows.push(row);
        }
        Dataset::from_rows(&rows)
    }

    fn neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<f64> {
        check_dataset(self, data)?;
        let (mu, sigma) = theta_unpack(theta, self.d())?;
        let mut total = 0.0;
        for i in 0..self.noise.len() {
            total += self.datum_nll(&self.datum_terms(&sigma, &mu, i, data)?);
        }
        Ok(total)
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn grad_neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<Vector> {
        check_dataset(self, data)?;
        let (mu, sigma) = theta_unpack(theta, self.d())?;
        let mut g = Vector::zeros(self.dim_theta());
        for i in 0..self.noise.len() {
            g += self.datum_grad(&self.datum_terms(&sigma, &mu, i, data)?);
        }
        Ok(g)
    }

    fn has_per_datum(&self) -> bool {
        true
    }

    fn neg_loglik_datum(&self, theta: &Vector, index: usize, data: &Dataset) -> Result<f64> {
        check_dataset(self, data)?;
        let (mu, sigma) = theta_unpack(theta, self.d())?;
        Ok(self.datum_nll(&self.datum_terms(&sigma, &mu, index, data)?))
    }

    fn grad_neg_loglik_datum(&self, theta: &Vector, index: usize, data: &Dataset) -> Result<Vector> {
        check_dataset(self, data)?;
        let (mu, sigma) = theta_unpack(theta, self.d())?;
        Ok(self.datum_grad(&self.datum_terms(&sigma, &mu, index, data)?))
    }

    fn has_hessian(&self) -> bool {
        true
    }

    fn hessian_neg_loglik(&self, theta: &Vector, data: &Dataset) -> Result<SymmetricMatrix> {
        check_dataset(self, data)?;
        let (mu, sigma) = theta_unpack(theta, self.d())?;
        let p = self.dim_theta();
        let mut h = Matrix::zeros(p, p);
        for i in 0..self.noise.len() {
            h += self.datum_hessian(&self.datum_terms(&sigma, &mu, i, data)?);
        }
        SymmetricMatrix::symmetrized(&h)
    }

    fn true_fim(&self, theta: &Vector) -> Option<Result<SymmetricMatrix>> {
        Some(self.analytic_fim(theta))
    }
}

impl SignalPlusNoiseModel {
    /// Block-diagonal information matrix: `mu` block `sum_i Q_i`, covariance
    /// block `0.5 sum_i tr(Q_i E_ab Q_i E_cd)`, zero cross block.
    fn analytic_fim(&self, theta: &Vector) -> Result<SymmetricMatrix> {
        let d = self.d();
        let (_, sigma) = theta_unpack(theta, d)?;
        let p = self.dim_theta();
        let pairs = sigma_pairs(d);
        let mut fim = Matrix::zeros(p, p);
        for (i, noise) in self.noise.iter().enumerate() {
            let s = SymmetricMatrix::new(sigma.matrix() + noise.matrix())
                .expect("sum of symmetric matrices");
            let chol = cholesky_factor(&s).map_err(|e| match e {
                Error::NotPositiveDefinite { pivot, .. } => {
                    Error::ObservationNotPositiveDefinite { index: i, pivot }
                }
                other => other,
            })?;
            let q = cholesky_inverse(&chol);
            for a in 0..d {
                for b in 0..d {
                    fim[(a, b)] += q[(a, b)];
                }
            }
            for (x, &(a, b)) in pairs.iter().enumerate() {
                for (y, &(c, e)) in pairs.iter().enumerate().skip(x) {
                    let value = 0.5 * trace_pair(&q, a, b, c, e);
                    fim[(d + x, d + y)] += value;
                    if x != y {
                        fim[(d + y, d + x)] += value;
                    }
                }
            }
        }
        SymmetricMatrix::new(fim)
    }
}
