//! Dense linear-algebra substrate.
//!
//! All factorization internals (SVD, QR, real Schur) live here; the rest of the
//! crate talks to them through [`svd`], [`spectral_norm`], [`orthonormalize`]
//! and [`orthogonal_schur`].

mod schur;

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use schur::{orthogonal_schur, skew_canonical, BlockKind, CanonicalBlock, CanonicalForm};

pub type Mat = DMatrix<f64>;

/// Relative reconstruction tolerance for factorizations.
pub const FACT_TOL: f64 = 1e-12;
/// Absolute Frobenius tolerance on `QᵀQ - I`.
pub const ORTH_TOL: f64 = 1e-8;
/// Phase clustering tolerance for eigenvalues on the unit circle.
pub const PHASE_TOL: f64 = 1e-9;

/// A finite, square, dense real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix(Mat);

impl SquareMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(Self(m))
    }

    /// Builds an `n x n` matrix from entries listed row by row.
    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        Self::new(Mat::from_row_slice(n, n, entries))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(Mat::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    pub fn transpose(&self) -> SquareMatrix {
        SquareMatrix(self.0.transpose())
    }
}

impl Deref for SquareMatrix {
    type Target = Mat;

    fn deref(&self) -> &Mat {
        &self.0
    }
}

impl AsRef<Mat> for SquareMatrix {
    fn as_ref(&self) -> &Mat {
        &self.0
    }
}

pub(crate) fn check_square_finite(m: &Mat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// Skew-symmetric part `(A - Aᵀ)/2`.
pub fn skew(a: &Mat) -> Mat {
    (a - a.transpose()) * 0.5
}

/// Symmetric part `(A + Aᵀ)/2`.
pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// `|QᵀQ - I|_F`.
pub fn orthogonality_residual(q: &Mat) -> f64 {
    let n = q.ncols();
    let mut g = q.tr_mul(q);
    for i in 0..n {
        g[(i, i)] -= 1.0;
    }
    g.norm()
}

/// Thin SVD of a square matrix, `C = U diag(sigma) Vᵀ`.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: Mat,
    /// Nonincreasing, nonnegative.
    pub sigma: Vec<f64>,
    pub v: Mat,
}

impl SvdFactors {
    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> Mat {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

/// Singular value decomposition with a deterministic sign convention: the
/// largest-magnitude entry of every column of `U` is positive.
pub fn svd(c: &Mat) -> Result<SvdFactors> {
    check_square_finite(c)?;
    let n = c.nrows();
    if n == 0 {
        return Ok(SvdFactors {
            u: Mat::zeros(0, 0),
            sigma: Vec::new(),
            v: Mat::zeros(0, 0),
        });
    }
    let (mut u, sigma, mut v) = faer_svd(c)?;
    for j in 0..n {
        let col = u.column(j);
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            u.column_mut(j).neg_mut();
            v.column_mut(j).neg_mut();
        }
    }
    Ok(SvdFactors { u, sigma, v })
}

fn to_faer(m: &Mat) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

// nalgebra's bidiagonal SVD finishes 2×2 blocks with a formula that divides by
// the smaller singular value, losing backward stability on ill-conditioned
// input (residuals near 1e-10 at cond 1e6). faer's is backward stable.
fn faer_svd(c: &Mat) -> Result<(Mat, Vec<f64>, Mat)> {
    let n = c.nrows();
    let dec = to_faer(c)
        .svd()
        .map_err(|_| Error::Factorization("SVD iteration did not converge"))?;
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fs[b].abs().total_cmp(&fs[a].abs()));
    let u = Mat::from_fn(n, n, |i, j| fu[(i, order[j])]);
    let v = Mat::from_fn(n, n, |i, j| fv[(i, order[j])]);
    let sigma = order.iter().map(|&k| fs[k].abs()).collect();
    Ok((u, sigma, v))
}

fn faer_singular_values(a: &Mat) -> Result<Vec<f64>> {
    let s = to_faer(a)
        .singular_values()
        .map_err(|_| Error::Factorization("SVD iteration did not converge"))?;
    Ok(s.into_iter().map(f64::abs).collect())
}

/// Singular values only, nonincreasing.
pub fn singular_values(a: &Mat) -> Result<Vec<f64>> {
    check_square_finite(a)?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut s = faer_singular_values(a)?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Largest singular value.
pub fn spectral_norm(a: &Mat) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Q factor of a QR decomposition with columns re-signed so that `diag(R) ≥ 0`.
pub fn orthonormalize(m: &Mat) -> Mat {
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Sign of the determinant (`+1` for a zero determinant).
pub fn det_sign(m: &Mat) -> i8 {
    if m.nrows() == 0 {
        return 1;
    }
    if m.clone().lu().determinant() < 0.0 {
        -1
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_fn(n, n, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn svd_identity() {
        let f = svd(&Mat::identity(3, 3)).unwrap();
        assert_eq!(f.sigma, vec![1.0, 1.0, 1.0]);
        assert!((&f.u * f.v.transpose() - Mat::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn svd_diagonal_is_sorted() {
        let c = SquareMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let f = svd(&c).unwrap();
        assert!((f.sigma[0] - 2.0).abs() < 1e-15);
        assert!((f.sigma[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn svd_gaussian_residual_and_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = gaussian(5, &mut rng);
        let f = svd(&c).unwrap();
        assert!((f.reconstruct() - &c).norm() <= 1e-12 * c.norm());
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        for j in 0..5 {
            let col = f.u.column(j);
            let imax = col.iamax();
            assert!(col[imax] > 0.0);
        }
        assert!(orthogonality_residual(&f.u) < 1e-13);
        assert!(orthogonality_residual(&f.v) < 1e-13);
    }

    #[test]
    fn svd_rejects_nan() {
        let mut c = Mat::identity(2, 2);
        c[(0, 1)] = f64::NAN;
        assert!(matches!(svd(&c), Err(Error::NonFiniteInput)));
        assert!(matches!(spectral_norm(&c), Err(Error::NonFiniteInput)));
    }

    #[test]
    fn svd_rank_deficient_factors_stay_orthogonal() {
        let c = Mat::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        let f = svd(&c).unwrap();
        assert!(f.sigma[2] < 1e-14);
        assert!(orthogonality_residual(&f.u) < 1e-13);
        assert!(orthogonality_residual(&f.v) < 1e-13);
        assert!((f.reconstruct() - &c).norm() <= 1e-12 * c.norm());
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((spectral_norm(&Mat::identity(4, 4)).unwrap() - 1.0).abs() < 1e-15);
        let d = SquareMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        assert!((spectral_norm(&d).unwrap() - 2.0).abs() < 1e-15);
        let theta = -0.83;
        let s = Mat::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0]);
        assert!((spectral_norm(&s).unwrap() - theta.abs()).abs() < 1e-15);
    }

    #[test]
    fn orthonormalize_recovers_positive_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = gaussian(6, &mut rng);
        let q = orthonormalize(&m);
        assert!(orthogonality_residual(&q) < 1e-13);
        let r = q.tr_mul(&m);
        for j in 0..6 {
            assert!(r[(j, j)] > 0.0);
        }
    }

    #[test]
    fn square_matrix_validation() {
        assert!(matches!(
            SquareMatrix::new(Mat::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        assert!(SquareMatrix::from_row_slice(2, &[1.0, 0.0, 0.0]).is_err());
        assert!(matches!(
            SquareMatrix::from_row_slice(1, &[f64::INFINITY]),
            Err(Error::NonFiniteInput)
        ));
    }
}
