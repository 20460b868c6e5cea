//! Dense linear-algebra substrate: matrix types, spectral norm, Cholesky
//! factorization, and multivariate-normal sampling.
//!
//! Everything here operates on small dense matrices (the experiments top out
//! at order 14), so exact decompositions are cheap and no sparse formats are
//! provided.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use std::ops::{Add, AddAssign, Mul, Sub};

/// Dense real matrix, the working type for all matrix-valued quantities.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type Vector = nalgebra::DVector<f64>;

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub(crate) fn all_finite<'a, I: IntoIterator<Item = &'a f64>>(entries: I) -> bool {
    entries.into_iter().all(|x| x.is_finite())
}

/// A square matrix validated (or forced) to be symmetric.
///
/// Entrywise sums, differences, and scalings of symmetric matrices are
/// symmetric, so the arithmetic impls below stay inside the invariant without
/// re-checking.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    m: Matrix,
}

impl SymmetricMatrix {
    /// Validates squareness, finiteness, and symmetry within
    /// [`SYMMETRY_TOL`] relative tolerance.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if !all_finite(m.iter()) {
            return Err(Error::NonFinite);
        }
        for j in 0..m.nrows() {
            for k in (j + 1)..m.ncols() {
                let a = m[(j, k)];
                let b = m[(k, j)];
                if (a - b).abs() > SYMMETRY_TOL * f64::max(1.0, a.abs()) {
                    return Err(Error::NotSymmetric {
                        row: k,
                        col: j,
                        lower: b,
                        upper: a,
                    });
                }
            }
        }
        Ok(Self { m })
    }

    /// Builds from a square matrix by averaging with its transpose.
    pub fn symmetrized(m: &Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if !all_finite(m.iter()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            m: (m + m.transpose()) * 0.5,
        })
    }

    /// Zero matrix of the given order.
    pub fn zeros(order: usize) -> Self {
        Self {
            m: Matrix::zeros(order, order),
        }
    }

    /// Identity matrix of the given order.
    pub fn identity(order: usize) -> Self {
        Self {
            m: Matrix::identity(order, order),
        }
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &Vector) -> Self {
        Self {
            m: Matrix::from_diagonal(diag),
        }
    }

    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.m[(row, col)]
    }

    /// Spectral norm (largest absolute eigenvalue for symmetric input).
    pub fn spectral_norm(&self) -> f64 {
        // Invariants guarantee finite entries, so this cannot fail.
        spectral_norm(&self.m).expect("symmetric matrix has finite entries")
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        symmetric_eigenvalues(&self.m)
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

impl Add<&SymmetricMatrix> for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn add(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix {
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub<&SymmetricMatrix> for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn sub(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix {
            m: &self.m - &rhs.m,
        }
    }
}

impl Mul<f64> for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn mul(self, rhs: f64) -> SymmetricMatrix {
        SymmetricMatrix { m: &self.m * rhs }
    }
}

impl AddAssign<&SymmetricMatrix> for SymmetricMatrix {
    fn add_assign(&mut self, rhs: &SymmetricMatrix) {
        self.m += &rhs.m;
    }
}

/// Largest singular value of a dense matrix.
///
/// Symmetric inputs go through the symmetric eigensolver; general inputs use
/// the SVD. Power iteration on `AᵀA` is the fallback if either solver fails
/// to converge.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidInput("matrix must be non-empty".into()));
    }
    if !all_finite(a.iter()) {
        return Err(Error::NonFinite);
    }
    if a.nrows() == a.ncols() && is_numerically_symmetric(a) {
        if let Some(eig) =
            nalgebra::SymmetricEigen::try_new(a.clone(), f64::EPSILON, 10_000)
        {
            return Ok(eig.eigenvalues.iter().fold(0.0, |acc, &x| acc.max(x.abs())));
        }
    } else if let Some(svd) = a.clone().try_svd(false, false, f64::EPSILON, 10_000) {
        return Ok(svd.singular_values.iter().fold(0.0, |acc, &x| acc.max(x)));
    }
    Ok(power_iteration_norm(a))
}

fn is_numerically_symmetric(a: &Matrix) -> bool {
    for j in 0..a.nrows() {
        for k in (j + 1)..a.ncols() {
            if (a[(j, k)] - a[(k, j)]).abs() > SYMMETRY_TOL * f64::max(1.0, a[(j, k)].abs()) {
                return false;
            }
        }
    }
    true
}

fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    nalgebra::SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Power iteration on AᵀA; tolerance 1e-12, at most 10^4 iterations.
fn power_iteration_norm(a: &Matrix) -> f64 {
    let b = a.transpose() * a;
    let n = b.nrows();
    let mut v = Vector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w = &b * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        let next = (v.transpose() * &b * &v)[(0, 0)];
        if (next - lambda).abs() <= 1e-12 * f64::max(1.0, next.abs()) {
            return next.max(0.0).sqrt();
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}

/// `(A + Aᵀ)/2` for square `A`.
pub fn symmetrize(a: &Matrix) -> Result<SymmetricMatrix> {
    SymmetricMatrix::symmetrized(a)
}

/// Lower-triangular Cholesky factor `C` with `C·Cᵀ = S`.
///
/// Fails with the offending pivot index when `S` is not positive definite.
pub fn cholesky_factor(s: &SymmetricMatrix) -> Result<Matrix> {
    let p = s.order();
    let a = s.matrix();
    let mut c = Matrix::zeros(p, p);
    for j in 0..p {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= c[(j, k)] * c[(j, k)];
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: pivot,
            });
        }
        let root = pivot.sqrt();
        c[(j, j)] = root;
        for i in (j + 1)..p {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= c[(i, k)] * c[(j, k)];
            }
            c[(i, j)] = sum / root;
        }
    }
    Ok(c)
}

/// Solves `S x = b` given the lower Cholesky factor `c` of `S`.
pub fn cholesky_solve(c: &Matrix, b: &Vector) -> Vector {
    let n = c.nrows();
    debug_assert_eq!(b.len(), n);
    // Forward: C y = b
    let mut y = b.clone();
    for i in 0..n {
        for k in 0..i {
            y[i] -= c[(i, k)] * y[k];
        }
        y[i] /= c[(i, i)];
    }
    // Back: Cᵀ x = y
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= c[(k, i)] * y[k];
        }
        y[i] /= c[(i, i)];
    }
    y
}

/// Inverse of `S` from its lower Cholesky factor.
pub fn cholesky_inverse(c: &Matrix) -> Matrix {
    let n = c.nrows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        let e = Vector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
        let col = cholesky_solve(c, &e);
        inv.set_column(j, &col);
    }
    // Symmetrize away round-off between the solves.
    (&inv + inv.transpose()) * 0.5
}

/// `log det S` from the lower Cholesky factor of `S`.
pub fn cholesky_log_det(c: &Matrix) -> f64 {
    (0..c.nrows()).map(|j| c[(j, j)].ln()).sum::<f64>() * 2.0
}

/// Draws one `N(mean, cov)` sample as `mean + C·w` with `w` standard normal.
///
/// A zero covariance returns the mean exactly; otherwise `cov` must be
/// positive definite.
pub fn mvn_sample(mean: &Vector, cov: &SymmetricMatrix, rng: &mut RngStream) -> Result<Vector> {
    if mean.len() != cov.order() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            got: cov.order(),
        });
    }
    if cov.matrix().iter().all(|&x| x == 0.0) {
        return Ok(mean.clone());
    }
    let c = cholesky_factor(cov)?;
    let w = Vector::from_fn(mean.len(), |_, _| rng.standard_normal());
    Ok(mean + c * w)
}
