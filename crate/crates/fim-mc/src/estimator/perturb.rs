//! Perturbation direction draws for simultaneous-perturbation Hessian
//! estimates.

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::rng::RngStream;
use std::fmt;

/// Admissible perturbation distributions: symmetric about zero, bounded,
/// with a finite bound on `|1/Delta_j|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationDistribution {
    /// Fair coin on {-1, +1}. The default, and the distribution for which
    /// the feedback estimator's advantage is strict.
    BernoulliPm1,
    /// Uniform on `[-hi, -lo] ∪ [lo, hi]` with `0 < lo <= hi`.
    SegmentedUniform { lo: f64, hi: f64 },
}

impl PerturbationDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PerturbationDistribution::BernoulliPm1 => Ok(()),
            PerturbationDistribution::SegmentedUniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
                    Err(Error::Config(format!(
                        "segmented-uniform requires 0 < lo <= hi, got lo={lo}, hi={hi}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Declared bound on `|1/Delta_j|`.
    pub fn inverse_moment_bound(&self) -> f64 {
        match *self {
            PerturbationDistribution::BernoulliPm1 => 1.0,
            PerturbationDistribution::SegmentedUniform { lo, .. } => 1.0 / lo,
        }
    }

    fn draw_entry(&self, rng: &mut RngStream) -> f64 {
        match *self {
            PerturbationDistribution::BernoulliPm1 => rng.sign(),
            PerturbationDistribution::SegmentedUniform { lo, hi } => {
                rng.sign() * rng.uniform_in(lo, hi)
            }
        }
    }
}

impl fmt::Display for PerturbationDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PerturbationDistribution::BernoulliPm1 => write!(f, "bernoulli"),
            PerturbationDistribution::SegmentedUniform { lo, hi } => {
                write!(f, "segmented-uniform[{lo},{hi}]")
            }
        }
    }
}

/// A perturbation direction with every entry nonzero, stored together with
/// its elementwise inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationVector {
    entries: Vector,
    inverse: Vector,
}

impl PerturbationVector {
    pub fn new(entries: Vector) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("perturbation must be non-empty".into()));
        }
        if !entries.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if entries.iter().any(|&x| x == 0.0) {
            return Err(Error::InvalidInput(
                "perturbation entries must be nonzero".into(),
            ));
        }
        let inverse = entries.map(|x| 1.0 / x);
        Ok(Self { entries, inverse })
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(Vector::from_row_slice(entries))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &Vector {
        &self.entries
    }

    pub fn inverse(&self) -> &Vector {
        &self.inverse
    }

    /// Sign-flipped copy.
    pub fn negated(&self) -> Self {
        Self {
            entries: -&self.entries,
            inverse: -&self.inverse,
        }
    }
}

/// Draws a p-dimensional perturbation with i.i.d. entries from `dist`.
pub fn draw_perturbation(
    p: usize,
    dist: &PerturbationDistribution,
    rng: &mut RngStream,
) -> Result<PerturbationVector> {
    if p == 0 {
        return Err(Error::InvalidInput(
            "perturbation dimension must be >= 1".into(),
        ));
    }
    dist.validate()?;
    let entries = Vector::from_fn(p, |_, _| dist.draw_entry(rng));
    PerturbationVector::new(entries)
}

/// All `2^p` Bernoulli sign patterns, in lexicographic order.
///
/// Enumeration-based tests use this to realize exact zero-mean identities.
pub fn bernoulli_patterns(p: usize) -> Vec<PerturbationVector> {
    (0..(1usize << p))
        .map(|mask| {
            let entries = Vector::from_fn(p, |j, _| {
                if mask & (1 << j) == 0 {
                    1.0
                } else {
                    -1.0
                }
            });
            PerturbationVector::new(entries).expect("entries are ±1")
        })
        .collect()
}
