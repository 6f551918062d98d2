//! The Procrustes objective `f(X) = -Tr(CX)` on `O(n)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{
    relative_canonical, OrthogonalMatrix, TangentVector, INJ_TOL,
};
use crate::linalg::{skew, svd, Mat, SquareMatrix, SvdFactors};

/// Relative threshold `σ_min ≤ τ·σ_max` below which `C` counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// `min_{X ∈ O(n)} -Tr(CX)` with every constant the theory needs cached.
#[derive(Clone, Debug)]
pub struct ProcrustesProblem {
    c: SquareMatrix,
    svd: SvdFactors,
    lipschitz: f64,
    sigma_min: f64,
    x_star: OrthogonalMatrix,
    f_star: f64,
    mu: f64,
    singular: bool,
}

impl ProcrustesProblem {
    pub fn new(c: SquareMatrix) -> Result<Self> {
        if c.norm() == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let svd = svd(&c)?;
        let lipschitz = svd.sigma_max();
        let singular = svd.sigma_min() <= SINGULAR_TOL * lipschitz;
        // Below the threshold σ_min is rounding noise; treat it as exactly zero.
        let sigma_min = if singular { 0.0 } else { svd.sigma_min() };
        let x_star = OrthogonalMatrix::new(&svd.v * svd.u.transpose())?;
        let f_star = -svd.sigma.iter().sum::<f64>();
        Ok(Self {
            mu: 4.0 * sigma_min / (PI * PI),
            singular,
            c,
            svd,
            lipschitz,
            sigma_min,
            x_star,
            f_star,
        })
    }

    pub fn from_matrix(c: Mat) -> Result<Self> {
        Self::new(SquareMatrix::new(c)?)
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn c(&self) -> &SquareMatrix {
        &self.c
    }

    pub fn svd(&self) -> &SvdFactors {
        &self.svd
    }

    /// `L = σ_max(C)`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Smallest singular value, zero when `C` is numerically singular.
    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// `X* = V Uᵀ`; a representative of the optimal set when `C` is singular.
    pub fn x_star(&self) -> &OrthogonalMatrix {
        &self.x_star
    }

    /// `f* = -Σ σ_i`.
    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    /// `μ = 4 σ_min / π²`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// `max(1, |C|_F)`, the scale used for absolute tolerances.
    pub fn scale(&self) -> f64 {
        self.c.norm().max(1.0)
    }

    fn check_dim(&self, x: &OrthogonalMatrix) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(())
    }
}

/// `f(X) = -Tr(CX)`.
pub fn value(p: &ProcrustesProblem, x: &OrthogonalMatrix) -> f64 {
    -p.c().dot(&x.matrix().transpose())
}

/// `grad f(X) = -X skew(XᵀCᵀ)`.
pub fn riemannian_gradient(p: &ProcrustesProblem, x: &OrthogonalMatrix) -> Result<TangentVector> {
    p.check_dim(x)?;
    let xt_ct = x.matrix().tr_mul(&p.c().transpose());
    Ok(TangentVector::new(x.clone(), -skew(&xt_ct))?)
}

/// `Hess f(X)[Ẋ] = -Ẋ skew(XᵀCᵀ) - X skew(ẊᵀCᵀ)`, re-projected onto `T_X O(n)`.
pub fn hessian_apply(
    p: &ProcrustesProblem,
    x: &OrthogonalMatrix,
    v: &TangentVector,
) -> Result<TangentVector> {
    p.check_dim(x)?;
    let ct = p.c().transpose();
    let xdot = v.ambient();
    let h = -(&xdot * skew(&x.matrix().tr_mul(&ct))) - x.matrix() * skew(&xdot.tr_mul(&ct));
    Ok(TangentVector::new(x.clone(), skew(&x.matrix().tr_mul(&h)))?)
}

/// `|r|_max` of `XᵀX*` and `a(X) = (1 + cos |r|_max) / 4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandscapeCoefficients {
    pub r_max: f64,
    pub a_of_x: f64,
}

impl LandscapeCoefficients {
    pub fn from_r_max(r_max: f64) -> Self {
        Self {
            r_max,
            a_of_x: (1.0 + r_max.cos()) / 4.0,
        }
    }
}

pub fn landscape_coefficients(
    p: &ProcrustesProblem,
    x: &OrthogonalMatrix,
) -> Result<LandscapeCoefficients> {
    p.check_dim(x)?;
    let cf = relative_canonical(x, p.x_star())?;
    let r_max = cf.max_abs_phase();
    if r_max >= PI - INJ_TOL {
        return Err(Error::PhaseAtPi { max_phase: r_max });
    }
    Ok(LandscapeCoefficients::from_r_max(r_max))
}
