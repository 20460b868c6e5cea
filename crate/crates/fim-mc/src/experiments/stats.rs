//! The two statistics the study tables need: Student-t confidence intervals
//! and one-sided t-tests (paired, or Welch for unpaired samples).

use crate::error::{Error, Result};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// A mean with a two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn student_t(freedom: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, freedom).expect("degrees of freedom are positive")
}

/// Student-t interval `mean ± t_{(1+level)/2, n-1} · s/sqrt(n)`.
pub fn mean_ci(values: &[f64], level: f64) -> Result<MeanCi> {
    if values.len() < 2 {
        return Err(Error::InvalidInput(
            "confidence interval needs at least 2 values".into(),
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    if !values.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = values.len() as f64;
    let (mean, var) = mean_and_variance(values);
    let quantile = student_t(n - 1.0).inverse_cdf(0.5 * (1.0 + level));
    let half_width = quantile * (var / n).sqrt();
    Ok(MeanCi {
        mean,
        lower: mean - half_width,
        upper: mean + half_width,
    })
}

/// Outcome of a one-sided t-test of `H1: mean(a) > mean(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestOutcome {
    pub p_value: f64,
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    /// Set when both variance and mean difference are exactly zero, in which
    /// case the reported p-value of 0.5 carries no information.
    pub degenerate: bool,
}

/// One-sided t-test: upper-tail p-value for `H1: mean(a) > mean(b)`.
///
/// Paired mode tests the differences `a - b`; unpaired mode uses the Welch
/// statistic with Welch–Satterthwaite degrees of freedom.
pub fn one_sided_t_test(a: &[f64], b: &[f64], paired: bool) -> Result<TTestOutcome> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput(
            "t-test needs at least 2 values per sample".into(),
        ));
    }
    if !a.iter().chain(b.iter()).all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if paired {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let n = diffs.len() as f64;
        let (mean, var) = mean_and_variance(&diffs);
        let df = n - 1.0;
        if var == 0.0 {
            return Ok(degenerate_outcome(mean, df));
        }
        let t = mean / (var / n).sqrt();
        Ok(TTestOutcome {
            p_value: 1.0 - student_t(df).cdf(t),
            t_statistic: t,
            degrees_of_freedom: df,
            degenerate: false,
        })
    } else {
        let (mean_a, var_a) = mean_and_variance(a);
        let (mean_b, var_b) = mean_and_variance(b);
        let na = a.len() as f64;
        let nb = b.len() as f64;
        let se2 = var_a / na + var_b / nb;
        if se2 == 0.0 {
            return Ok(degenerate_outcome(mean_a - mean_b, na + nb - 2.0));
        }
        let t = (mean_a - mean_b) / se2.sqrt();
        let df = se2 * se2
            / ((var_a / na).powi(2) / (na - 1.0) + (var_b / nb).powi(2) / (nb - 1.0));
        Ok(TTestOutcome {
            p_value: 1.0 - student_t(df).cdf(t),
            t_statistic: t,
            degrees_of_freedom: df,
            degenerate: false,
        })
    }
}

/// Zero-variance fallback: the sign of the mean difference decides alone.
fn degenerate_outcome(mean_diff: f64, df: f64) -> TTestOutcome {
    let (p, t, degenerate) = if mean_diff > 0.0 {
        (0.0, f64::INFINITY, false)
    } else if mean_diff < 0.0 {
        (1.0, f64::NEG_INFINITY, false)
    } else {
        (0.5, 0.0, true)
    };
    TTestOutcome {
        p_value: p,
        t_statistic: t,
        degrees_of_freedom: df,
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_sample_has_zero_width_interval() {
        let ci = mean_ci(&[2.5, 2.5, 2.5], 0.95).unwrap();
        assert_eq!(ci.mean, 2.5);
        assert_eq!(ci.lower, 2.5);
        assert_eq!(ci.upper, 2.5);
    }

    #[test]
    fn interval_for_one_two_three_matches_t_table() {
        // t_{0.975,2} = 4.3027; s = 1 so half-width = 4.3027/sqrt(3) = 2.4841.
        let ci = mean_ci(&[1.0, 2.0, 3.0], 0.95).unwrap();
        assert_relative_eq!(ci.mean, 2.0);
        assert_relative_eq!(ci.lower, 2.0 - 2.4841, epsilon = 1e-4);
        assert_relative_eq!(ci.upper, 2.0 + 2.4841, epsilon = 1e-4);
    }

    #[test]
    fn too_few_values_is_an_error() {
        assert!(mean_ci(&[1.0], 0.95).is_err());
        assert!(one_sided_t_test(&[1.0], &[2.0], true).is_err());
    }

    #[test]
    fn interval_width_shrinks_like_sqrt_n() {
        let mut rng = RngStream::from_seed(301);
        let draw = |rng: &mut RngStream, n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.standard_normal()).collect()
        };
        let small = draw(&mut rng, 200);
        let large = draw(&mut rng, 3_200);
        let wide = mean_ci(&small, 0.95).unwrap();
        let narrow = mean_ci(&large, 0.95).unwrap();
        let ratio = (wide.upper - wide.lower) / (narrow.upper - narrow.lower);
        // 16x the sample should shrink the width ~4x; allow a factor of 2.
        assert!(
            ratio > 2.0 && ratio < 8.0,
            "width ratio {ratio} outside [2, 8]"
        );
    }

    #[test]
    fn identical_paired_samples_are_degenerate() {
        let a = [0.3, 0.7, 0.9];
        let out = one_sided_t_test(&a, &a, true).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.p_value, 0.5);
    }

    #[test]
    fn constant_positive_shift_gives_zero_p() {
        let b = [0.1, 0.5, 0.3, 0.9];
        let a: Vec<f64> = b.iter().map(|x| x + 1.0).collect();
        let out = one_sided_t_test(&a, &b, true).unwrap();
        assert!(!out.degenerate);
        assert!(out.p_value < 1e-6);

        let down: Vec<f64> = b.iter().map(|x| x - 1.0).collect();
        let out = one_sided_t_test(&down, &b, true).unwrap();
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn noisy_shift_matches_reference_formula() {
        // Cross-check the paired p-value against the incomplete-beta form
        // of the t CDF, an independent evaluation path.
        let mut rng = RngStream::from_seed(88);
        let b: Vec<f64> = (0..50).map(|_| rng.standard_normal()).collect();
        let a: Vec<f64> = b
            .iter()
            .map(|x| x + 1.0 + 0.05 * rng.standard_normal())
            .collect();
        let out = one_sided_t_test(&a, &b, true).unwrap();
        assert!(out.p_value < 1e-6);

        let df = out.degrees_of_freedom;
        let x = df / (df + out.t_statistic * out.t_statistic);
        let reference = 0.5 * statrs::function::beta::beta_reg(df / 2.0, 0.5, x);
        assert_relative_eq!(out.p_value, reference, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn welch_test_handles_unequal_sizes() {
        let mut rng = RngStream::from_seed(5);
        let a: Vec<f64> = (0..40).map(|_| 1.0 + rng.standard_normal()).collect();
        let b: Vec<f64> = (0..25).map(|_| 0.5 * rng.standard_normal()).collect();
        let out = one_sided_t_test(&a, &b, false).unwrap();
        assert!(out.p_value < 1e-4, "p = {}", out.p_value);
    }

    #[test]
    fn null_rejection_rate_is_calibrated() {
        // Smaller version of the acceptance check: ~2000 null repetitions.
        let mut rng = RngStream::from_seed(2025);
        let reps = 2_000;
        let mut rejections = 0;
        for _ in 0..reps {
            let a: Vec<f64> = (0..20).map(|_| rng.standard_normal()).collect();
            let b: Vec<f64> = (0..20).map(|_| rng.standard_normal()).collect();
            if one_sided_t_test(&a, &b, false).unwrap().p_value < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / reps as f64;
        assert!((rate - 0.05).abs() < 0.02, "rejection rate {rate}");
    }

    proptest! {
        #[test]
        fn shifting_a_upward_never_increases_p(
            seed in 0u64..200,
            shift in 0.0f64..2.0,
        ) {
            let mut rng = RngStream::from_seed(seed);
            let b: Vec<f64> = (0..12).map(|_| rng.standard_normal()).collect();
            let a: Vec<f64> = (0..12).map(|_| rng.standard_normal()).collect();
            let shifted: Vec<f64> = a.iter().map(|x| x + shift).collect();
            let p0 = one_sided_t_test(&a, &b, true).unwrap().p_value;
            let p1 = one_sided_t_test(&shifted, &b, true).unwrap().p_value;
            prop_assert!(p1 <= p0 + 1e-12);
        }
    }
}
