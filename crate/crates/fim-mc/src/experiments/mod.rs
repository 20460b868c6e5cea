//! Replicated comparative studies: run estimator variants against an oracle,
//! compute relative deviation norms, and summarize with confidence intervals
//! and one-sided tests.

mod report;
mod stats;

pub use report::{render_study, render_table, OutputFormat, StudyMeta};
pub use stats::{mean_ci, one_sided_t_test, MeanCi, TTestOutcome};

use crate::error::{Error, Result};
use crate::estimator::{estimate_with_streams, EstimatorConfig, EstimatorStreams};
use crate::models::{monte_carlo_fim, Model, OracleCache};
use crate::numerics::{spectral_norm, SymmetricMatrix, Vector};
use crate::rng::{labels, RngStream};
use rayon::prelude::*;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Default seed for Monte Carlo oracles. Kept separate from the study seed
/// so oracle cache entries survive across studies.
pub const DEFAULT_ORACLE_SEED: u64 = 241;

/// Default replication count for Monte Carlo oracles.
pub const DEFAULT_ORACLE_REPS: usize = 100_000;

/// How the reference information matrix is obtained when the model has no
/// analytic form.
#[derive(Debug, Clone)]
pub struct OracleSettings {
    pub mc_reps: usize,
    pub mc_seed: u64,
    /// Cache directory for Monte Carlo oracles; `None` recomputes each time.
    pub cache_dir: Option<PathBuf>,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            mc_reps: DEFAULT_ORACLE_REPS,
            mc_seed: DEFAULT_ORACLE_SEED,
            cache_dir: None,
        }
    }
}

/// Where a study's oracle matrix came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleSource {
    Analytic,
    MonteCarlo {
        reps: usize,
        seed: u64,
        from_cache: bool,
    },
}

/// The resolved reference matrix for a study.
#[derive(Debug, Clone)]
pub struct StudyOracle {
    pub matrix: SymmetricMatrix,
    pub source: OracleSource,
}

/// Resolves the oracle for a model: analytic when available, otherwise a
/// Monte Carlo Hessian average (cached when a directory is configured).
pub fn resolve_oracle<M: Model + Sync + ?Sized>(
    model: &M,
    theta: &Vector,
    settings: &OracleSettings,
) -> Result<StudyOracle> {
    if let Some(result) = model.true_fim(theta) {
        return Ok(StudyOracle {
            matrix: result?,
            source: OracleSource::Analytic,
        });
    }
    if !model.has_hessian() {
        return Err(Error::Config(format!(
            "no oracle available for model `{}`: it has neither an analytic \
             information matrix nor an analytic Hessian",
            model.name()
        )));
    }
    if settings.mc_reps == 0 {
        return Err(Error::Config("oracle replications must be >= 1".into()));
    }
    let (matrix, from_cache) = match &settings.cache_dir {
        Some(dir) => OracleCache::new(dir).load_or_compute(
            model,
            theta,
            settings.mc_reps,
            settings.mc_seed,
        )?,
        None => {
            let parent = RngStream::from_seed(settings.mc_seed).child(labels::ORACLE);
            (
                monte_carlo_fim(model, theta, settings.mc_reps, &parent)?,
                false,
            )
        }
    };
    Ok(StudyOracle {
        matrix,
        source: OracleSource::MonteCarlo {
            reps: settings.mc_reps,
            seed: settings.mc_seed,
            from_cache,
        },
    })
}

/// `‖F_est − F_ref‖ / ‖F_ref‖` in the spectral norm.
pub fn relative_deviation_norm(
    estimate: &SymmetricMatrix,
    reference: &SymmetricMatrix,
) -> Result<f64> {
    if estimate.order() != reference.order() {
        return Err(Error::DimensionMismatch {
            expected: reference.order(),
            got: estimate.order(),
        });
    }
    let ref_norm = reference.spectral_norm();
    if ref_norm == 0.0 {
        return Err(Error::ZeroReferenceNorm);
    }
    Ok(spectral_norm(&(estimate.matrix() - reference.matrix()))? / ref_norm)
}

/// A replicated comparative study.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    /// Estimator variants to compare; labels must be unique.
    pub estimators: Vec<EstimatorConfig>,
    pub replications: usize,
    /// Common random numbers: share the pseudo-data and perturbation
    /// streams across variants within a replication. Variants with the same
    /// per-sample draw pattern then consume identical Hessian samples and
    /// differ only through their correction terms.
    pub paired: bool,
    pub seed: u64,
    /// Evaluation point; defaults to the model's canonical parameters.
    pub theta: Option<Vector>,
    pub oracle: OracleSettings,
}

impl StudyConfig {
    pub fn new(estimators: Vec<EstimatorConfig>, replications: usize, seed: u64) -> Self {
        Self {
            estimators,
            replications,
            paired: true,
            seed,
            theta: None,
            oracle: OracleSettings::default(),
        }
    }
}

/// Relative deviation norms for one replication, ordered like the study's
/// estimator list.
#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub replication: usize,
    pub norms: Vec<f64>,
}

/// Per-variant mean and confidence interval.
#[derive(Debug, Clone)]
pub struct VariantSummary {
    pub label: String,
    pub mean: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

/// One-sided comparison between two variants (`H1: mean norm of `lhs` >
/// mean norm of `rhs``, i.e. `rhs` is the more accurate method).
#[derive(Debug, Clone)]
pub struct VariantComparison {
    pub lhs: String,
    pub rhs: String,
    pub p_value: f64,
    pub degenerate: bool,
}

/// Study-level summary: one row per variant plus all pairwise tests in list
/// order.
#[derive(Debug, Clone)]
pub struct StudySummary {
    pub variants: Vec<VariantSummary>,
    pub comparisons: Vec<VariantComparison>,
    pub replications: usize,
    pub paired: bool,
    pub seed: u64,
    pub oracle_source: OracleSource,
}

/// Runs a study without progress reporting.
pub fn run_study<M: Model + Sync + ?Sized>(
    model: &M,
    config: &StudyConfig,
) -> Result<(Vec<ReplicationResult>, StudySummary)> {
    run_study_with_progress(model, config, &|_, _| {})
}

/// Runs `config.replications` paired (or independent) replications of every
/// estimator in the study and summarizes the relative deviation norms.
///
/// `progress` receives `(completed, total)` after each replication.
/// Replications execute in parallel; results are keyed by replication index,
/// and every stream is derived from `(seed, replication, variant label)`, so
/// the output is a pure function of the configuration.
pub fn run_study_with_progress<M: Model + Sync + ?Sized>(
    model: &M,
    config: &StudyConfig,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<(Vec<ReplicationResult>, StudySummary)> {
    if config.replications < 2 {
        return Err(Error::Config(
            "a study needs at least 2 replications".into(),
        ));
    }
    if config.estimators.is_empty() {
        return Err(Error::Config("a study needs at least one estimator".into()));
    }
    let labels_list: Vec<String> = config.estimators.iter().map(|e| e.label()).collect();
    for (i, label) in labels_list.iter().enumerate() {
        if labels_list[..i].contains(label) {
            return Err(Error::Config(format!(
                "duplicate estimator `{label}` in study"
            )));
        }
    }
    for est in &config.estimators {
        est.validate_against(model)?;
    }
    let theta = match &config.theta {
        Some(theta) => theta.clone(),
        None => model.theta_star(),
    };
    if theta.len() != model.dim_theta() {
        return Err(Error::DimensionMismatch {
            expected: model.dim_theta(),
            got: theta.len(),
        });
    }
    let oracle = resolve_oracle(model, &theta, &config.oracle)?;
    if oracle.matrix.spectral_norm() == 0.0 {
        return Err(Error::ZeroReferenceNorm);
    }

    let master = RngStream::from_seed(config.seed);
    let done = AtomicUsize::new(0);
    let results: Result<Vec<ReplicationResult>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let data_parent = master.child(labels::DATA).child(r as u64);
            let pert_parent = master.child(labels::PERTURBATION).child(r as u64);
            let mut norms = Vec::with_capacity(config.estimators.len());
            for (est, label) in config.estimators.iter().zip(&labels_list) {
                let (data, pert) = if config.paired {
                    (data_parent.clone(), pert_parent.clone())
                } else {
                    (
                        data_parent.child_str(label),
                        pert_parent.child_str(label),
                    )
                };
                let mut streams = EstimatorStreams::new(data, pert);
                let fim = estimate_with_streams(model, &theta, est, &mut streams)?;
                norms.push(relative_deviation_norm(fim.matrix(), &oracle.matrix)?);
            }
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, config.replications);
            Ok(ReplicationResult {
                replication: r,
                norms,
            })
        })
        .collect();
    let results = results?;

    let mut variants = Vec::with_capacity(labels_list.len());
    for (idx, label) in labels_list.iter().enumerate() {
        let column: Vec<f64> = results.iter().map(|r| r.norms[idx]).collect();
        let ci = mean_ci(&column, 0.95)?;
        variants.push(VariantSummary {
            label: label.clone(),
            mean: ci.mean,
            ci_lower: ci.lower,
            ci_upper: ci.upper,
        });
    }
    let mut comparisons = Vec::new();
    for i in 0..labels_list.len() {
        for j in (i + 1)..labels_list.len() {
            let a: Vec<f64> = results.iter().map(|r| r.norms[i]).collect();
            let b: Vec<f64> = results.iter().map(|r| r.norms[j]).collect();
            let test = one_sided_t_test(&a, &b, config.paired)?;
            comparisons.push(VariantComparison {
                lhs: labels_list[i].clone(),
                rhs: labels_list[j].clone(),
                p_value: test.p_value,
                degenerate: test.degenerate,
            });
        }
    }
    let summary = StudySummary {
        variants,
        comparisons,
        replications: config.replications,
        paired: config.paired,
        seed: config.seed,
        oracle_source: oracle.source,
    };
    Ok((results, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{EstimatorConfig, InputMode, Variant};
    use crate::models::{
        build_noise_covariances, equicorrelated, BlackBoxModel, MixtureModel, MixtureParams,
        ScalarNormalVarianceModel, SignalPlusNoiseModel,
    };
    use crate::numerics::Matrix;

    fn small_spn(seed: u64) -> SignalPlusNoiseModel {
        let mut rng = RngStream::from_seed(seed);
        let noise = build_noise_covariances(2, 4, &mut rng);
        SignalPlusNoiseModel::new(Vector::zeros(2), equicorrelated(2, 1.0, 0.5), noise).unwrap()
    }

    fn small_study(variants: &[Variant], reps: usize, n: usize) -> StudyConfig {
        let estimators = variants
            .iter()
            .map(|&v| EstimatorConfig::new(v, InputMode::Gradient, n))
            .collect();
        StudyConfig::new(estimators, reps, 42)
    }

    #[test]
    fn relative_norm_basic_identities() {
        let f = SymmetricMatrix::new(Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]))
            .unwrap();
        assert_eq!(relative_deviation_norm(&f, &f).unwrap(), 0.0);
        let double = SymmetricMatrix::new(f.matrix() * 2.0).unwrap();
        let rel = relative_deviation_norm(&double, &f).unwrap();
        assert!((rel - 1.0).abs() < 1e-12);
        let zero = SymmetricMatrix::zeros(2);
        assert!(matches!(
            relative_deviation_norm(&f, &zero),
            Err(Error::ZeroReferenceNorm)
        ));
    }

    #[test]
    fn study_produces_one_record_per_replication() {
        let model = small_spn(1);
        let (results, summary) =
            run_study(&model, &small_study(&[Variant::Basic, Variant::Feedback], 5, 30)).unwrap();
        assert_eq!(results.len(), 5);
        for (i, r) in results.iter().enumerate() {
            assert_eq!(r.replication, i);
            assert_eq!(r.norms.len(), 2);
            assert!(r.norms.iter().all(|&x| x.is_finite() && x >= 0.0));
        }
        assert_eq!(summary.variants.len(), 2);
        assert_eq!(summary.comparisons.len(), 1);
        assert_eq!(summary.oracle_source, OracleSource::Analytic);
    }

    #[test]
    fn summary_means_are_recomputable_from_records() {
        let model = small_spn(2);
        let (results, summary) =
            run_study(&model, &small_study(&[Variant::Basic], 6, 20)).unwrap();
        let mean: f64 = results.iter().map(|r| r.norms[0]).sum::<f64>() / 6.0;
        assert!((summary.variants[0].mean - mean).abs() < 1e-15);
        assert!(summary.variants[0].ci_lower <= summary.variants[0].mean);
        assert!(summary.variants[0].mean <= summary.variants[0].ci_upper);
    }

    #[test]
    fn studies_are_deterministic() {
        let model = small_spn(3);
        let cfg = small_study(&[Variant::Basic, Variant::Feedback], 4, 25);
        let (r1, s1) = run_study(&model, &cfg).unwrap();
        let (r2, s2) = run_study(&model, &cfg).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert_eq!(a.norms, b.norms);
        }
        assert_eq!(s1.variants[0].mean, s2.variants[0].mean);
        assert_eq!(s1.comparisons[0].p_value, s2.comparisons[0].p_value);
    }

    #[test]
    fn pairing_fixes_data_regardless_of_variant_list() {
        let model = small_spn(4);
        let solo = small_study(&[Variant::Feedback], 4, 25);
        let both = small_study(&[Variant::Basic, Variant::Feedback], 4, 25);
        let (solo_results, _) = run_study(&model, &solo).unwrap();
        let (both_results, _) = run_study(&model, &both).unwrap();
        for (a, b) in solo_results.iter().zip(&both_results) {
            assert_eq!(a.norms[0], b.norms[1], "feedback norms must match");
        }
    }

    #[test]
    fn unpaired_mode_gives_each_variant_its_own_data() {
        let model = small_spn(5);
        let mut paired_cfg = small_study(&[Variant::Basic, Variant::Basic], 3, 20);
        // Duplicate labels are rejected, so give the second a different mode.
        paired_cfg.estimators[1].input_mode = InputMode::LoglikOnly;
        let mut unpaired_cfg = paired_cfg.clone();
        unpaired_cfg.paired = false;
        let (paired_results, _) = run_study(&model, &paired_cfg).unwrap();
        let (unpaired_results, _) = run_study(&model, &unpaired_cfg).unwrap();
        // Same first-variant stream layout in both modes is not required;
        // just check both run and produce finite norms.
        assert!(paired_results
            .iter()
            .chain(&unpaired_results)
            .all(|r| r.norms.iter().all(|x| x.is_finite())));
    }

    #[test]
    fn duplicate_variants_are_rejected() {
        let model = small_spn(6);
        let cfg = small_study(&[Variant::Basic, Variant::Basic], 3, 10);
        assert!(matches!(
            run_study(&model, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn missing_oracle_is_a_configuration_error_before_any_work() {
        let model = BlackBoxModel::new(ScalarNormalVarianceModel::new(2, 1.0).unwrap());
        let mut cfg = small_study(&[Variant::Basic], 3, 10);
        cfg.estimators[0].input_mode = InputMode::LoglikOnly;
        match run_study(&model, &cfg) {
            Err(Error::Config(message)) => assert!(message.contains("oracle")),
            other => panic!("expected configuration error, got {other:?}"),
        }
    }

    #[test]
    fn mixture_study_uses_monte_carlo_oracle() {
        let model =
            MixtureModel::new(MixtureParams::new(0.2, 0.0, 1.0, 4.0, 9.0).unwrap(), 10).unwrap();
        let mut cfg = small_study(&[Variant::Basic], 3, 15);
        cfg.oracle.mc_reps = 4_000;
        let (_, summary) = run_study(&model, &cfg).unwrap();
        assert!(matches!(
            summary.oracle_source,
            OracleSource::MonteCarlo { reps: 4_000, .. }
        ));
    }
}
