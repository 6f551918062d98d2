//! Moving tangent vectors between points of `O(n)`.

use std::sync::Arc;

use super::{relative_canonical, require_unique_geodesic, OrthogonalMatrix, TangentVector};
use crate::error::{Error, Result};
use crate::linalg::skew;
use crate::registry::Registry;

/// A rule carrying `v ∈ T_X O(n)` to `T_Y O(n)`.
pub trait VectorTransport: Send + Sync {
    fn name(&self) -> &'static str;

    fn transport(&self, v: &TangentVector, y: &OrthogonalMatrix) -> Result<TangentVector>;
}

/// Levi-Civita parallel transport along the unique geodesic from `X` to `Y`.
///
/// With `XᵀY = exp_m(A)`, the generator is carried to `exp_m(-A/2) Ω exp_m(A/2)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LeviCivitaTransport;

impl VectorTransport for LeviCivitaTransport {
    fn name(&self) -> &'static str {
        "levi-civita"
    }

    fn transport(&self, v: &TangentVector, y: &OrthogonalMatrix) -> Result<TangentVector> {
        check_dims(v, y)?;
        let cf = relative_canonical(v.base(), y)?;
        require_unique_geodesic(&cf)?;
        let half = cf.map_angles(|r| 0.5 * r).rotation();
        let omega = half.tr_mul(v.generator()) * &half;
        Ok(TangentVector::from_skew(y.clone(), skew(&omega)))
    }
}

/// Isometric vector transport by conjugation, `XΩ ↦ Y (XᵀY Ω YᵀX)`.
///
/// Defined on a whole connected component, but it is not the parallel
/// transport of the metric once `n ≥ 3`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConjugationTransport;

impl VectorTransport for ConjugationTransport {
    fn name(&self) -> &'static str {
        "conjugation"
    }

    fn transport(&self, v: &TangentVector, y: &OrthogonalMatrix) -> Result<TangentVector> {
        check_dims(v, y)?;
        if !v.base().same_component(y) {
            return Err(Error::DifferentComponents);
        }
        let rel = v.base().relative_to(y);
        let omega = &rel * v.generator() * rel.transpose();
        Ok(TangentVector::from_skew(y.clone(), skew(&omega)))
    }
}

fn check_dims(v: &TangentVector, y: &OrthogonalMatrix) -> Result<()> {
    if v.base().dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.base().dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

/// `Γ_X^Y v` for the Levi-Civita connection.
pub fn parallel_transport(v: &TangentVector, y: &OrthogonalMatrix) -> Result<TangentVector> {
    LeviCivitaTransport.transport(v, y)
}

pub fn conjugation_transport(v: &TangentVector, y: &OrthogonalMatrix) -> Result<TangentVector> {
    ConjugationTransport.transport(v, y)
}

pub fn transport_registry() -> Registry<dyn VectorTransport> {
    let mut reg: Registry<dyn VectorTransport> = Registry::new("vector transport");
    for t in [
        Arc::new(LeviCivitaTransport) as Arc<dyn VectorTransport>,
        Arc::new(ConjugationTransport),
    ] {
        reg.register(t.name(), t).expect("distinct names");
    }
    reg
}
