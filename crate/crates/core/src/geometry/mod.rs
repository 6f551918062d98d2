//! Riemannian geometry of the orthogonal group `O(n)` with the bi-invariant
//! (trace) metric.
//!
//! Tangent vectors at `X` are stored in left-trivialized form `XΩ` with `Ω`
//! skew-symmetric, so the metric is `⟨XΩ₁, XΩ₂⟩ = Tr(Ω₁ᵀΩ₂)`.

mod sampling;
mod transport;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{
    check_square_finite, det_sign, orthogonal_schur, orthogonality_residual, orthonormalize,
    skew, skew_canonical, spectral_norm, CanonicalForm, Mat, ORTH_TOL,
};

pub use sampling::{haar_sample, random_skew, random_skew_frobenius, random_skew_spectral};
pub use transport::{
    conjugation_transport, parallel_transport, transport_registry, ConjugationTransport,
    LeviCivitaTransport, VectorTransport,
};

/// Absolute tolerance on `|Ω + Ωᵀ|_F` for tangent generators.
pub const SKEW_TOL: f64 = 1e-10;
/// Margin below π required of phases for a unique geodesic.
pub const INJ_TOL: f64 = 1e-9;
/// exp/log roundtrip tolerance.
pub const ROUNDTRIP_TOL: f64 = 1e-9;
/// Allowed negative slack in the triangle comparison bounds.
pub const SLACK_TOL: f64 = 1e-10;

/// An element of `O(n)` tagged with its connected component.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalMatrix {
    q: Mat,
    det_sign: i8,
}

impl OrthogonalMatrix {
    pub fn new(q: Mat) -> Result<Self> {
        check_square_finite(&q)?;
        let residual = orthogonality_residual(&q);
        if residual > ORTH_TOL {
            return Err(Error::NotOrthogonal { residual });
        }
        let det_sign = det_sign(&q);
        Ok(Self { q, det_sign })
    }

    /// Skips the orthogonality check; the component tag is still computed.
    pub(crate) fn from_trusted(q: Mat) -> Self {
        let det_sign = det_sign(&q);
        Self { q, det_sign }
    }

    pub(crate) fn from_trusted_with_sign(q: Mat, det_sign: i8) -> Self {
        Self { q, det_sign }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            q: Mat::identity(n, n),
            det_sign: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.q
    }

    pub fn into_matrix(self) -> Mat {
        self.q
    }

    /// `+1` or `-1`.
    pub fn det_sign(&self) -> i8 {
        self.det_sign
    }

    pub fn orthogonality_residual(&self) -> f64 {
        orthogonality_residual(&self.q)
    }

    pub fn transpose(&self) -> OrthogonalMatrix {
        Self {
            q: self.q.transpose(),
            det_sign: self.det_sign,
        }
    }

    pub fn compose(&self, other: &OrthogonalMatrix) -> OrthogonalMatrix {
        Self {
            q: &self.q * &other.q,
            det_sign: self.det_sign * other.det_sign,
        }
    }

    /// `XᵀY`.
    pub fn relative_to(&self, other: &OrthogonalMatrix) -> Mat {
        self.q.tr_mul(&other.q)
    }

    pub fn same_component(&self, other: &OrthogonalMatrix) -> bool {
        self.det_sign == other.det_sign
    }
}

/// A tangent vector `XΩ ∈ T_X O(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: OrthogonalMatrix,
    omega: Mat,
}

impl TangentVector {
    /// Validates the generator and removes its symmetric drift.
    pub fn new(base: OrthogonalMatrix, omega: Mat) -> Result<Self> {
        check_square_finite(&omega)?;
        if omega.nrows() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: omega.nrows(),
            });
        }
        let residual = (&omega + omega.transpose()).norm();
        if residual > SKEW_TOL {
            return Err(Error::NotSkew { residual });
        }
        Ok(Self {
            base,
            omega: skew(&omega),
        })
    }

    /// The generator must already be exactly skew-symmetric.
    pub(crate) fn from_skew(base: OrthogonalMatrix, omega: Mat) -> Self {
        Self { base, omega }
    }

    pub fn zero(base: OrthogonalMatrix) -> Self {
        let n = base.dim();
        Self {
            base,
            omega: Mat::zeros(n, n),
        }
    }

    pub fn base(&self) -> &OrthogonalMatrix {
        &self.base
    }

    pub fn generator(&self) -> &Mat {
        &self.omega
    }

    /// The ambient matrix `XΩ`.
    pub fn ambient(&self) -> Mat {
        self.base.matrix() * &self.omega
    }

    pub fn norm(&self) -> f64 {
        self.omega.norm()
    }

    /// Trace inner product with a vector at the same base point.
    pub fn inner(&self, other: &TangentVector) -> f64 {
        self.omega.dot(&other.omega)
    }

    pub fn scale(&self, t: f64) -> TangentVector {
        Self {
            base: self.base.clone(),
            omega: &self.omega * t,
        }
    }

    /// `self - other` for vectors at the same base point.
    pub fn sub(&self, other: &TangentVector) -> TangentVector {
        Self {
            base: self.base.clone(),
            omega: &self.omega - &other.omega,
        }
    }
}

/// `P_X(Z) = X skew(XᵀZ)`.
pub fn project_to_tangent(x: &OrthogonalMatrix, z: &Mat) -> Result<TangentVector> {
    check_square_finite(z)?;
    if z.nrows() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: z.nrows(),
        });
    }
    Ok(TangentVector::from_skew(x.clone(), skew(&x.matrix().tr_mul(z))))
}

/// `exp_X(XΩ) = X exp_m(Ω)`, re-orthonormalized when rounding has drifted.
pub fn exp_map(v: &TangentVector) -> Result<OrthogonalMatrix> {
    let rotation = skew_canonical(v.generator())?.rotation();
    let y = v.base().matrix() * rotation;
    let y = if orthogonality_residual(&y) > ORTH_TOL / 10.0 {
        orthonormalize(&y)
    } else {
        y
    };
    Ok(OrthogonalMatrix::from_trusted_with_sign(y, v.base().det_sign()))
}

/// Canonical form of `XᵀY` after the component check.
pub fn relative_canonical(x: &OrthogonalMatrix, y: &OrthogonalMatrix) -> Result<CanonicalForm> {
    if !x.same_component(y) {
        return Err(Error::DifferentComponents);
    }
    let cf = orthogonal_schur(&x.relative_to(y))?;
    if cf.pi_count() % 2 == 1 {
        return Err(Error::DifferentComponents);
    }
    Ok(cf)
}

/// Fails with [`Error::NonUniqueGeodesic`] unless every phase is strictly
/// inside `(-π + INJ_TOL, π - INJ_TOL)`.
pub(crate) fn require_unique_geodesic(cf: &CanonicalForm) -> Result<()> {
    let max_phase = cf.max_abs_phase();
    if max_phase > PI - INJ_TOL {
        return Err(Error::NonUniqueGeodesic { max_phase });
    }
    Ok(())
}

/// `log_X(Y) = X log_m(XᵀY)` through the canonical form of `XᵀY`.
pub fn log_map(x: &OrthogonalMatrix, y: &OrthogonalMatrix) -> Result<TangentVector> {
    let cf = relative_canonical(x, y)?;
    require_unique_geodesic(&cf)?;
    Ok(log_from_canonical(x, &cf))
}

pub(crate) fn log_from_canonical(x: &OrthogonalMatrix, cf: &CanonicalForm) -> TangentVector {
    let omega = cf
        .generator()
        .expect("component check rules out lone reflections");
    TangentVector::from_skew(x.clone(), skew(&omega))
}

/// `dist(X, Y) = |φ|₂` over the phase vector of `XᵀY`; π phases included.
pub fn distance(x: &OrthogonalMatrix, y: &OrthogonalMatrix) -> Result<f64> {
    Ok(relative_canonical(x, y)?.phase_norm())
}

/// Whether `v` lies in the injectivity domain `|Ω|₂ < π - INJ_TOL`.
pub fn injectivity_check(v: &TangentVector) -> bool {
    spectral_norm(v.generator())
        .map(|s| s < PI - INJ_TOL)
        .unwrap_or(false)
}

/// The point `exp_X(t·v)` on the geodesic through `X` with velocity `v`.
pub fn geodesic_point(x: &OrthogonalMatrix, v: &TangentVector, t: f64) -> Result<OrthogonalMatrix> {
    if v.base().dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: v.base().dim(),
        });
    }
    exp_map(&TangentVector::from_skew(x.clone(), v.generator() * t))
}

/// Slacks of the two triangle comparison bounds in nonnegative curvature:
///
/// * `slack1 = dist²(Z,X) + dist²(Z,Y) - 2⟨log_Z X, log_Z Y⟩ - dist²(X,Y)`
/// * `slack2 = |log_Z X - log_Z Y| - dist(X,Y)`
pub fn law_of_cosines_slack(
    x: &OrthogonalMatrix,
    y: &OrthogonalMatrix,
    z: &OrthogonalMatrix,
) -> Result<(f64, f64)> {
    let lx = log_map(z, x)?;
    let ly = log_map(z, y)?;
    let cf = relative_canonical(x, y)?;
    require_unique_geodesic(&cf)?;
    let dxy = cf.phase_norm();
    let dzx2 = lx.inner(&lx);
    let dzy2 = ly.inner(&ly);
    let slack1 = dzx2 + dzy2 - 2.0 * lx.inner(&ly) - dxy * dxy;
    let slack2 = lx.sub(&ly).norm() - dxy;
    Ok((slack1, slack2))
}
