//! Simultaneous-perturbation Hessian samples and the feedback correction.
//!
//! One Hessian sample costs two gradient evaluations (gradient mode) or four
//! likelihood evaluations (likelihood-only mode), independent of dimension.

use super::perturb::PerturbationVector;
use crate::error::{Error, Result};
use crate::models::{Dataset, Model};
use crate::numerics::{SymmetricMatrix, Vector};

/// Which slice of the likelihood a gradient difference is taken over.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Scope {
    /// The full-dataset likelihood.
    Full,
    /// The contribution of a single data row.
    Datum(usize),
}

fn check_c(c: f64, what: &str) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{what} must be positive and finite, got {c}"
        )));
    }
    Ok(())
}

fn check_dims<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    delta: &PerturbationVector,
) -> Result<()> {
    let p = model.dim_theta();
    if theta.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: theta.len(),
        });
    }
    if delta.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: delta.len(),
        });
    }
    Ok(())
}

fn gradient_at<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    data: &Dataset,
    scope: Scope,
) -> Result<Vector> {
    match scope {
        Scope::Full => model.grad_neg_loglik(theta, data),
        Scope::Datum(j) => model.grad_neg_loglik_datum(theta, j, data),
    }
}

fn value_at<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    data: &Dataset,
    scope: Scope,
) -> Result<f64> {
    match scope {
        Scope::Full => model.neg_loglik(theta, data),
        Scope::Datum(j) => model.neg_loglik_datum(theta, j, data),
    }
}

pub(crate) fn delta_g_gradient_scoped<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    data: &Dataset,
    delta: &PerturbationVector,
    c: f64,
    scope: Scope,
) -> Result<Vector> {
    if !model.has_gradient() {
        return Err(model.missing("an exact gradient"));
    }
    check_c(c, "c")?;
    check_dims(model, theta, delta)?;
    let plus = theta + delta.entries() * c;
    let minus = theta - delta.entries() * c;
    Ok(gradient_at(model, &plus, data, scope)? - gradient_at(model, &minus, data, scope)?)
}

/// Two-point gradient difference `g(theta + c*delta) - g(theta - c*delta)`
/// on one dataset, using the model's exact gradient.
pub fn delta_g_gradient<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    data: &Dataset,
    delta: &PerturbationVector,
    c: f64,
) -> Result<Vector> {
    delta_g_gradient_scoped(model, theta, data, delta, c, Scope::Full)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn delta_g_loglik_scoped<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    data: &Dataset,
    delta: &PerturbationVector,
    delta_tilde: &PerturbationVector,
    c: f64,
    c_tilde: f64,
    scope: Scope,
) -> Result<Vector> {
    check_c(c, "c")?;
    check_c(c_tilde, "c_tilde")?;
    check_dims(model, theta, delta)?;
    check_dims(model, theta, delta_tilde)?;
    let plus = theta + delta.entries() * c;
    let minus = theta - delta.entries() * c;
    let inner = delta_tilde.entries() * c_tilde;
    let l_pp = value_at(model, &(&plus + &inner), data, scope)?;
    let l_p = value_at(model, &plus, data, scope)?;
    let l_mp = value_at(model, &(&minus + &inner), data, scope)?;
    let l_m = value_at(model, &minus, data, scope)?;
    let diff = l_pp - l_p - l_mp + l_m;
    Ok(delta_tilde.inverse() * (diff / c_tilde))
}

/// Gradient difference built from likelihood values only.
///
/// Each `g(theta ± c*delta)` is replaced by a one-sided simultaneous-
/// perturbation approximation with a shared inner direction `delta_tilde`:
/// exactly four likelihood evaluations in total.
#[allow(clippy::too_many_arguments)]
pub fn delta_g_loglik<M: Model + ?Sized>(
    model: &M,
    theta: &Vector,
    data: &Dataset,
    delta: &PerturbationVector,
    delta_tilde: &PerturbationVector,
    c: f64,
    c_tilde: f64,
) -> Result<Vector> {
    delta_g_loglik_scoped(model, theta, data, delta, delta_tilde, c, c_tilde, Scope::Full)
}

/// Symmetrized rank-one Hessian sample
/// `0.5 [ (delta_g / 2c) (delta^{-1})ᵀ + transpose ]`.
pub fn hessian_estimate(
    delta_g: &Vector,
    delta: &PerturbationVector,
    c: f64,
) -> Result<SymmetricMatrix> {
    check_c(c, "c")?;
    if delta_g.len() != delta.len() {
        return Err(Error::DimensionMismatch {
            expected: delta.len(),
            got: delta_g.len(),
        });
    }
    if !delta_g.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scaled = delta_g / (2.0 * c);
    let outer = &scaled * delta.inverse().transpose();
    SymmetricMatrix::symmetrized(&outer)
}

/// The zero-mean noise component of a Hessian sample:
/// `Psi(H) = 0.5 H D + 0.5 Dᵀ H` with `D = delta (delta^{-1})ᵀ - I`.
///
/// For symmetric `H` this reduces to the symmetric part of
/// `(H delta)(delta^{-1})ᵀ` minus `H`, which is how it is computed here.
pub fn psi(h: &SymmetricMatrix, delta: &PerturbationVector) -> Result<SymmetricMatrix> {
    if h.order() != delta.len() {
        return Err(Error::DimensionMismatch {
            expected: h.order(),
            got: delta.len(),
        });
    }
    let u = h.matrix() * delta.entries();
    let outer = &u * delta.inverse().transpose();
    let sym = SymmetricMatrix::symmetrized(&outer)?;
    Ok(&sym - h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::estimator::perturb::bernoulli_patterns;
    use crate::models::QuadraticModel;
    use crate::numerics::Matrix;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    fn diag_quadratic() -> QuadraticModel {
        QuadraticModel::new(
            SymmetricMatrix::new(Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0])).unwrap(),
        )
    }

    /// Model with constant gradient `b` (affine objective).
    struct AffineModel {
        b: Vector,
    }

    impl Model for AffineModel {
        fn name(&self) -> &str {
            "affine"
        }
        fn dim_theta(&self) -> usize {
            self.b.len()
        }
        fn data_dim(&self) -> usize {
            1
        }
        fn num_data(&self) -> usize {
            1
        }
        fn theta_star(&self) -> Vector {
            Vector::zeros(self.b.len())
        }
        fn sample_pseudo(&self, _theta: &Vector, _rng: &mut RngStream) -> Result<Dataset> {
            Dataset::new(Matrix::zeros(1, 1))
        }
        fn neg_loglik(&self, theta: &Vector, _data: &Dataset) -> Result<f64> {
            Ok(self.b.dot(theta))
        }
        fn has_gradient(&self) -> bool {
            true
        }
        fn grad_neg_loglik(&self, _theta: &Vector, _data: &Dataset) -> Result<Vector> {
            Ok(self.b.clone())
        }
    }

    fn dummy_data(model: &impl Model) -> Dataset {
        model
            .sample_pseudo(&model.theta_star(), &mut RngStream::from_seed(0))
            .unwrap()
    }

    #[test]
    fn gradient_difference_is_exact_for_quadratics() {
        let model = diag_quadratic();
        let data = dummy_data(&model);
        let delta = PerturbationVector::from_slice(&[1.0, 1.0]).unwrap();
        let dg = delta_g_gradient(&model, &model.theta_star(), &data, &delta, 0.01).unwrap();
        assert_relative_eq!(dg[0], 0.04, epsilon = 1e-15);
        assert_relative_eq!(dg[1], 0.08, epsilon = 1e-15);
    }

    #[test]
    fn gradient_difference_vanishes_for_affine_objectives() {
        let model = AffineModel {
            b: Vector::from_row_slice(&[3.0, -1.0]),
        };
        let data = dummy_data(&model);
        let delta = PerturbationVector::from_slice(&[1.0, -1.0]).unwrap();
        let dg = delta_g_gradient(&model, &model.theta_star(), &data, &delta, 0.5).unwrap();
        assert_eq!(dg, Vector::zeros(2));
    }

    #[test]
    fn gradient_difference_is_odd_in_delta() {
        let model = diag_quadratic();
        let data = dummy_data(&model);
        let theta = Vector::from_row_slice(&[0.3, -0.7]);
        let delta = PerturbationVector::from_slice(&[1.0, -1.0]).unwrap();
        let plus = delta_g_gradient(&model, &theta, &data, &delta, 0.01).unwrap();
        let minus = delta_g_gradient(&model, &theta, &data, &delta.negated(), 0.01).unwrap();
        assert_relative_eq!((plus + minus).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn loglik_difference_matches_hand_algebra_for_quadratics() {
        let model = diag_quadratic();
        let data = dummy_data(&model);
        let delta = PerturbationVector::from_slice(&[1.0, 1.0]).unwrap();
        let tilde = PerturbationVector::from_slice(&[1.0, -1.0]).unwrap();
        let dg = delta_g_loglik(
            &model,
            &model.theta_star(),
            &data,
            &delta,
            &tilde,
            0.01,
            0.01,
        )
        .unwrap();
        assert_relative_eq!(dg[0], -0.04, epsilon = 1e-12);
        assert_relative_eq!(dg[1], 0.04, epsilon = 1e-12);
    }

    #[test]
    fn loglik_difference_vanishes_for_constant_objectives() {
        let model = AffineModel {
            b: Vector::zeros(2),
        };
        let data = dummy_data(&model);
        let delta = PerturbationVector::from_slice(&[1.0, 1.0]).unwrap();
        let tilde = PerturbationVector::from_slice(&[-1.0, 1.0]).unwrap();
        let dg =
            delta_g_loglik(&model, &model.theta_star(), &data, &delta, &tilde, 0.1, 0.1).unwrap();
        assert_relative_eq!(dg.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn loglik_difference_averages_to_gradient_difference_for_quadratics() {
        // For quadratic objectives the inner-direction noise is exactly
        // mean-zero: averaging over all Bernoulli inner signs recovers the
        // gradient-based difference.
        let model = diag_quadratic();
        let data = dummy_data(&model);
        let theta = Vector::from_row_slice(&[0.2, 0.1]);
        let delta = PerturbationVector::from_slice(&[1.0, 1.0]).unwrap();
        let exact = delta_g_gradient(&model, &theta, &data, &delta, 0.01).unwrap();
        let mut avg = Vector::zeros(2);
        let patterns = bernoulli_patterns(2);
        for tilde in &patterns {
            avg += delta_g_loglik(&model, &theta, &data, &delta, tilde, 0.01, 0.01).unwrap();
        }
        avg /= patterns.len() as f64;
        assert_relative_eq!((avg - exact).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn hessian_estimate_hand_values() {
        let delta = PerturbationVector::from_slice(&[1.0, 1.0]).unwrap();
        let dg = Vector::from_row_slice(&[0.04, 0.08]);
        let h = hessian_estimate(&dg, &delta, 0.01).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[2.0, 3.0, 3.0, 4.0]);
        assert_relative_eq!((h.matrix() - expected).norm(), 0.0, epsilon = 1e-12);

        let zero = hessian_estimate(&Vector::zeros(2), &delta, 0.01).unwrap();
        assert_eq!(zero.matrix(), &Matrix::zeros(2, 2));

        let delta2 = PerturbationVector::from_slice(&[1.0, -1.0]).unwrap();
        let dg2 = Vector::from_row_slice(&[0.04, -0.08]);
        let h2 = hessian_estimate(&dg2, &delta2, 0.01).unwrap();
        let expected2 = Matrix::from_row_slice(2, 2, &[2.0, -3.0, -3.0, 4.0]);
        assert_relative_eq!((h2.matrix() - expected2).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hessian_diagonal_matches_bernoulli_identity() {
        // With ±1 entries, delta^{-1} = delta, so the diagonal of the sample
        // is (delta_g / 2c) ⊙ delta.
        let mut rng = RngStream::from_seed(44);
        for _ in 0..50 {
            let delta = super::super::perturb::draw_perturbation(
                4,
                &super::super::perturb::PerturbationDistribution::BernoulliPm1,
                &mut rng,
            )
            .unwrap();
            let dg = Vector::from_fn(4, |_, _| rng.uniform_in(-1.0, 1.0));
            let h = hessian_estimate(&dg, &delta, 0.05).unwrap();
            for j in 0..4 {
                let expected = dg[j] / (2.0 * 0.05) * delta.entries()[j];
                assert_relative_eq!(h.get(j, j), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn psi_hand_value_and_vanishing_cases() {
        let h = SymmetricMatrix::identity(2);
        let delta = PerturbationVector::from_slice(&[1.0, -1.0]).unwrap();
        let out = psi(&h, &delta).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert_relative_eq!((out.matrix() - expected).norm(), 0.0, epsilon = 1e-12);

        // All-ones Bernoulli direction: D = J - I is hollow, so Psi keeps
        // only the off-diagonal coupling. For A = diag(2, 4), the sample at
        // delta = [1, 1] is [[2,3],[3,4]], hence Psi(A) = [[0,3],[3,0]].
        let ones = PerturbationVector::from_slice(&[1.0, 1.0]).unwrap();
        let a = SymmetricMatrix::new(Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]))
            .unwrap();
        let coupling = psi(&a, &ones).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]);
        assert_relative_eq!((coupling.matrix() - expected).norm(), 0.0, epsilon = 1e-12);

        // p = 1: D = delta/delta - 1 = 0 identically, for any direction.
        let scalar_h = SymmetricMatrix::from_diagonal(&Vector::from_row_slice(&[5.0]));
        let scalar_delta = PerturbationVector::from_slice(&[-1.0]).unwrap();
        assert_relative_eq!(
            psi(&scalar_h, &scalar_delta).unwrap().matrix().norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn psi_matches_explicit_definition_on_random_input() {
        let mut rng = RngStream::from_seed(9);
        for _ in 0..25 {
            let raw = Matrix::from_fn(3, 3, |_, _| rng.uniform_in(-2.0, 2.0));
            let h = SymmetricMatrix::symmetrized(&raw).unwrap();
            let delta = super::super::perturb::draw_perturbation(
                3,
                &super::super::perturb::PerturbationDistribution::BernoulliPm1,
                &mut rng,
            )
            .unwrap();
            // D = delta (delta^{-1})ᵀ - I, built explicitly.
            let d = delta.entries() * delta.inverse().transpose() - Matrix::identity(3, 3);
            for j in 0..3 {
                assert_eq!(d[(j, j)], 0.0);
            }
            let explicit = (h.matrix() * &d + d.transpose() * h.matrix()) * 0.5;
            let fast = psi(&h, &delta).unwrap();
            assert_relative_eq!((fast.matrix() - explicit).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn psi_sums_to_zero_over_all_sign_patterns() {
        let mut rng = RngStream::from_seed(2);
        for p in 1..=4 {
            let raw = Matrix::from_fn(p, p, |_, _| rng.uniform_in(-3.0, 3.0));
            let h = SymmetricMatrix::symmetrized(&raw).unwrap();
            let mut total = Matrix::zeros(p, p);
            for delta in bernoulli_patterns(p) {
                total += psi(&h, &delta).unwrap().into_matrix();
            }
            assert_relative_eq!(total.norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn capability_error_without_gradient() {
        let model =
            crate::models::BlackBoxModel::new(AffineModel { b: Vector::zeros(2) });
        let data = dummy_data(&model);
        let delta = PerturbationVector::from_slice(&[1.0, 1.0]).unwrap();
        match delta_g_gradient(&model, &Vector::zeros(2), &data, &delta, 0.1) {
            Err(Error::MissingCapability { .. }) => {}
            other => panic!("expected capability error, got {other:?}"),
        }
    }
}
