//! Monte Carlo estimation of the Fisher information matrix.
//!
//! For models where no closed-form information matrix exists, the matrix can
//! be estimated by averaging simultaneous-perturbation Hessian samples over
//! synthesized pseudo datasets. This crate implements the basic resampling
//! estimator plus two variance-reduction enhancements — a feedback
//! correction that subtracts the predictable part of the sample noise, and
//! independent perturbations per data row — together with reference models
//! that have analytic oracles, and a replication harness for comparing the
//! estimators against those oracles.
//!
//! Entry points:
//! - [`estimator::estimate`] runs one estimator variant at a parameter point.
//! - [`experiments::run_study`] runs replication studies and summarizes
//!   relative deviation norms, confidence intervals, and one-sided tests.
//! - [`cli`] exposes the same machinery as the `fim-mc` binary.
//!
//! ```
//! use fim_mc::estimator::{estimate_seeded, EstimatorConfig, InputMode, Variant};
//! use fim_mc::experiments::relative_deviation_norm;
//! use fim_mc::models::{Model, ScalarNormalVarianceModel};
//!
//! let model = ScalarNormalVarianceModel::new(1, 1.0)?;
//! let theta = model.theta_star();
//! let config = EstimatorConfig::new(Variant::Feedback, InputMode::Gradient, 2_000);
//! let fim = estimate_seeded(&model, &theta, &config)?;
//! let truth = model.true_fim(&theta).unwrap()?;
//! assert!(relative_deviation_norm(fim.matrix(), &truth)? < 0.1);
//! # Ok::<(), fim_mc::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod models;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};
