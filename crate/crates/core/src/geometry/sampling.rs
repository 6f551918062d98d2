use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::OrthogonalMatrix;
use crate::linalg::{orthonormalize, skew, spectral_norm, Mat};

fn gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    // Row-major fill so the stream order does not depend on storage layout.
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = StandardNormal.sample(rng);
        }
    }
    m
}

/// Haar-distributed element of `O(n)`: QR of a Gaussian matrix with `diag(R) > 0`.
pub fn haar_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OrthogonalMatrix {
    OrthogonalMatrix::from_trusted(orthonormalize(&gaussian(n, rng)))
}

/// Skew part of a standard Gaussian matrix.
pub fn random_skew<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    skew(&gaussian(n, rng))
}

/// Random skew matrix rescaled to spectral norm `radius` (zero when `n = 1`).
pub fn random_skew_spectral<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Mat {
    let w = random_skew(n, rng);
    let s = spectral_norm(&w).unwrap_or(0.0);
    if s > 0.0 {
        w * (radius / s)
    } else {
        w
    }
}

/// Random skew matrix rescaled to Frobenius norm `norm` (zero when `n = 1`).
pub fn random_skew_frobenius<R: Rng + ?Sized>(n: usize, norm: f64, rng: &mut R) -> Mat {
    let w = random_skew(n, rng);
    let f = w.norm();
    if f > 0.0 {
        w * (norm / f)
    } else {
        w
    }
}
