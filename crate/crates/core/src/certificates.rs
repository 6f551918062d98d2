//! Numerical checks of the landscape inequalities of the Procrustes objective.
//!
//! Every report is oriented so that `slack >= 0` means the inequality holds.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    exp_map, law_of_cosines_slack, log_from_canonical, random_skew_spectral, relative_canonical,
    require_unique_geodesic, LeviCivitaTransport, OrthogonalMatrix, TangentVector,
    VectorTransport,
};
use crate::linalg::{skew, spectral_norm};
use crate::objective::{
    landscape_coefficients, riemannian_gradient, value, LandscapeCoefficients, ProcrustesProblem,
};
use crate::registry::Registry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Wqc,
    QuadraticGrowth,
    Wqsc,
    SmoothnessTransport,
    SmoothnessTaylor,
    DescentBound,
    GradientSpectralBound,
    Toponogov,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Wqc => "wqc",
            Self::QuadraticGrowth => "quadratic-growth",
            Self::Wqsc => "wqsc",
            Self::SmoothnessTransport => "smoothness-transport",
            Self::SmoothnessTaylor => "smoothness-taylor",
            Self::DescentBound => "descent-bound",
            Self::GradientSpectralBound => "gradient-spectral-bound",
            Self::Toponogov => "toponogov",
        }
    }
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub sample_point: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    /// The bound holds trivially, e.g. quadratic growth with a singular `C`.
    pub vacuous: bool,
}

/// Absolute slack tolerance, `1e-9 · max(1, |C|_F)`.
pub fn certificate_tolerance(p: &ProcrustesProblem) -> f64 {
    1e-9 * p.scale()
}

fn report(
    p: &ProcrustesProblem,
    kind: CertificateKind,
    lhs: f64,
    rhs: f64,
    slack: f64,
) -> CertificateReport {
    CertificateReport {
        kind,
        sample_point: String::new(),
        lhs,
        rhs,
        slack,
        passed: slack >= -certificate_tolerance(p),
        vacuous: false,
    }
}

/// `⟨grad f(X), -log_X(X*)⟩`, `dist(X, X*)` and the landscape coefficients.
struct StarGeometry {
    inner: f64,
    dist: f64,
    coeffs: LandscapeCoefficients,
}

fn star_geometry(p: &ProcrustesProblem, x: &OrthogonalMatrix) -> Result<StarGeometry> {
    let coeffs = landscape_coefficients(p, x)?;
    let cf = relative_canonical(x, p.x_star())?;
    let log = log_from_canonical(x, &cf);
    let grad = riemannian_gradient(p, x)?;
    Ok(StarGeometry {
        inner: -grad.inner(&log),
        dist: cf.phase_norm(),
        coeffs,
    })
}

/// `⟨grad f(X), -log_X(X*)⟩ ≥ ½(1 + cos|r|_max)(f(X) - f*)`.
pub fn check_wqc(p: &ProcrustesProblem, x: &OrthogonalMatrix) -> Result<CertificateReport> {
    let g = star_geometry(p, x)?;
    let lhs = g.inner;
    let rhs = 0.5 * (1.0 + g.coeffs.r_max.cos()) * (value(p, x) - p.f_star());
    Ok(report(p, CertificateKind::Wqc, lhs, rhs, lhs - rhs))
}

/// `f(X) - f* ≥ (2σ_min/π²) dist²(X, X*)`.
pub fn check_quadratic_growth(
    p: &ProcrustesProblem,
    x: &OrthogonalMatrix,
) -> Result<CertificateReport> {
    let dist = relative_canonical(x, p.x_star())?.phase_norm();
    let lhs = value(p, x) - p.f_star();
    let rhs = 2.0 * p.sigma_min() / (PI * PI) * dist * dist;
    let mut r = report(p, CertificateKind::QuadraticGrowth, lhs, rhs, lhs - rhs);
    r.vacuous = p.is_singular();
    Ok(r)
}

/// `f(X) - f* ≤ ⟨grad f(X), -log_X(X*)⟩ / a(X) - (μ/2) dist²(X, X*)`.
pub fn check_wqsc(p: &ProcrustesProblem, x: &OrthogonalMatrix) -> Result<CertificateReport> {
    let g = star_geometry(p, x)?;
    let lhs = value(p, x) - p.f_star();
    let rhs = g.inner / g.coeffs.a_of_x - 0.5 * p.mu() * g.dist * g.dist;
    Ok(report(p, CertificateKind::Wqsc, lhs, rhs, rhs - lhs))
}

/// `|grad f(X) - Γ grad f(Y)| ≤ σ_max dist(X, Y)` with the given transport.
pub fn check_smoothness_transport_with(
    p: &ProcrustesProblem,
    x: &OrthogonalMatrix,
    y: &OrthogonalMatrix,
    transport: &dyn VectorTransport,
) -> Result<CertificateReport> {
    let cf = relative_canonical(x, y)?;
    require_unique_geodesic(&cf)?;
    let gx = riemannian_gradient(p, x)?;
    let gy = riemannian_gradient(p, y)?;
    let moved = transport.transport(&gy, x)?;
    let lhs = gx.sub(&moved).norm();
    let rhs = p.lipschitz() * cf.phase_norm();
    Ok(report(p, CertificateKind::SmoothnessTransport, lhs, rhs, rhs - lhs))
}

/// Gradient Lipschitz bound using Levi-Civita parallel transport.
pub fn check_smoothness_transport(
    p: &ProcrustesProblem,
    x: &OrthogonalMatrix,
    y: &OrthogonalMatrix,
) -> Result<CertificateReport> {
    check_smoothness_transport_with(p, x, y, &LeviCivitaTransport)
}

/// `f(Y) - f(X) ≤ ⟨grad f(X), log_X(Y)⟩ + (L/2) dist²(X, Y)`.
pub fn check_smoothness_taylor(
    p: &ProcrustesProblem,
    x: &OrthogonalMatrix,
    y: &OrthogonalMatrix,
) -> Result<CertificateReport> {
    let cf = relative_canonical(x, y)?;
    require_unique_geodesic(&cf)?;
    let log = log_from_canonical(x, &cf);
    let grad = riemannian_gradient(p, x)?;
    let dist = cf.phase_norm();
    let lhs = value(p, y) - value(p, x);
    let rhs = grad.inner(&log) + 0.5 * p.lipschitz() * dist * dist;
    Ok(report(p, CertificateKind::SmoothnessTaylor, lhs, rhs, rhs - lhs))
}

/// `f(X) - f* ≥ |grad f(X)|² / (2L)`, the consequence of the Taylor bound at
/// `Y = exp_X(-grad f(X) / L)`.
pub fn check_descent_bound(
    p: &ProcrustesProblem,
    x: &OrthogonalMatrix,
) -> Result<CertificateReport> {
    let grad = riemannian_gradient(p, x)?;
    let lhs = value(p, x) - p.f_star();
    let rhs = grad.inner(&grad) / (2.0 * p.lipschitz());
    Ok(report(p, CertificateKind::DescentBound, lhs, rhs, lhs - rhs))
}

/// `|skew(XᵀCᵀ)|₂ ≤ σ_max(C)`.
pub fn check_gradient_spectral_bound(
    p: &ProcrustesProblem,
    x: &OrthogonalMatrix,
) -> Result<CertificateReport> {
    if x.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x.dim(),
        });
    }
    let lhs = spectral_norm(&skew(&x.matrix().tr_mul(&p.c().transpose())))?;
    let rhs = p.lipschitz();
    Ok(report(p, CertificateKind::GradientSpectralBound, lhs, rhs, rhs - lhs))
}

/// Both triangle comparison bounds for the triple `(X, Y, Z)`, as two reports.
pub fn check_toponogov(
    p: &ProcrustesProblem,
    x: &OrthogonalMatrix,
    y: &OrthogonalMatrix,
    z: &OrthogonalMatrix,
) -> Result<[CertificateReport; 2]> {
    let (s1, s2) = law_of_cosines_slack(x, y, z)?;
    let first = CertificateReport {
        sample_point: "distance-squared bound".into(),
        ..report(p, CertificateKind::Toponogov, 0.0, s1, s1)
    };
    let second = CertificateReport {
        sample_point: "distance bound".into(),
        ..report(p, CertificateKind::Toponogov, 0.0, s2, s2)
    };
    Ok([first, second])
}

/// Points drawn for one sweep index.
#[derive(Clone, Debug)]
pub struct SweepSample {
    pub index: usize,
    /// `exp_{X*}(X*Ω)` with `|Ω|₂ ≤ radius cap`.
    pub x: OrthogonalMatrix,
    /// `exp_X(XΩ')` with `|Ω'|₂ ≤ radius cap`.
    pub y: OrthogonalMatrix,
    /// A triple whose legs from the last point have `|Ω|₂ ≤ radius cap / 2`.
    pub triple: [OrthogonalMatrix; 3],
}

/// A landscape check that can run on a sweep sample.
pub trait Certificate: Send + Sync {
    fn name(&self) -> &'static str;
    fn check(&self, p: &ProcrustesProblem, s: &SweepSample) -> Result<Vec<CertificateReport>>;
}

macro_rules! point_certificate {
    ($ty:ident, $name:literal, $f:ident) => {
        pub struct $ty;
        impl Certificate for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn check(
                &self,
                p: &ProcrustesProblem,
                s: &SweepSample,
            ) -> Result<Vec<CertificateReport>> {
                Ok(vec![$f(p, &s.x)?])
            }
        }
    };
}

point_certificate!(WqcCertificate, "wqc", check_wqc);
point_certificate!(QuadraticGrowthCertificate, "quadratic-growth", check_quadratic_growth);
point_certificate!(WqscCertificate, "wqsc", check_wqsc);
point_certificate!(DescentBoundCertificate, "descent-bound", check_descent_bound);
point_certificate!(
    GradientSpectralCertificate,
    "gradient-spectral-bound",
    check_gradient_spectral_bound
);

pub struct SmoothnessTransportCertificate {
    pub transport: Arc<dyn VectorTransport>,
}

impl Certificate for SmoothnessTransportCertificate {
    fn name(&self) -> &'static str {
        "smoothness-transport"
    }

    fn check(&self, p: &ProcrustesProblem, s: &SweepSample) -> Result<Vec<CertificateReport>> {
        Ok(vec![check_smoothness_transport_with(
            p,
            &s.x,
            &s.y,
            self.transport.as_ref(),
        )?])
    }
}

pub struct SmoothnessTaylorCertificate;

impl Certificate for SmoothnessTaylorCertificate {
    fn name(&self) -> &'static str {
        "smoothness-taylor"
    }

    fn check(&self, p: &ProcrustesProblem, s: &SweepSample) -> Result<Vec<CertificateReport>> {
        Ok(vec![check_smoothness_taylor(p, &s.x, &s.y)?])
    }
}

pub struct ToponogovCertificate;

impl Certificate for ToponogovCertificate {
    fn name(&self) -> &'static str {
        "toponogov"
    }

    fn check(&self, p: &ProcrustesProblem, s: &SweepSample) -> Result<Vec<CertificateReport>> {
        let [x, y, z] = &s.triple;
        Ok(check_toponogov(p, x, y, z)?.to_vec())
    }
}

/// Every certificate, in sweep order.
pub fn certificate_registry() -> Registry<dyn Certificate> {
    let mut r: Registry<dyn Certificate> = Registry::new("certificate");
    let all: Vec<Arc<dyn Certificate>> = vec![
        Arc::new(WqcCertificate),
        Arc::new(QuadraticGrowthCertificate),
        Arc::new(WqscCertificate),
        Arc::new(SmoothnessTransportCertificate {
            transport: Arc::new(LeviCivitaTransport),
        }),
        Arc::new(SmoothnessTaylorCertificate),
        Arc::new(DescentBoundCertificate),
        Arc::new(GradientSpectralCertificate),
        Arc::new(ToponogovCertificate),
    ];
    for c in all {
        r.register(c.name(), c).expect("names are distinct");
    }
    r
}

/// Draws the points for sample `index`; deterministic in `(seed, index)`.
pub fn draw_sample(
    p: &ProcrustesProblem,
    radius_cap: f64,
    seed: u64,
    index: usize,
) -> Result<SweepSample> {
    let n = p.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let step = |base: &OrthogonalMatrix, cap: f64, rng: &mut ChaCha8Rng| {
        let radius = cap * rand::Rng::random::<f64>(rng);
        let omega = random_skew_spectral(n, radius, rng);
        exp_map(&TangentVector::new(base.clone(), omega)?)
    };
    let x = step(p.x_star(), radius_cap, &mut rng)?;
    let y = step(&x, radius_cap, &mut rng)?;
    let z = step(p.x_star(), radius_cap, &mut rng)?;
    let a = step(&z, radius_cap / 2.0, &mut rng)?;
    let b = step(&z, radius_cap / 2.0, &mut rng)?;
    Ok(SweepSample {
        index,
        x,
        y,
        triple: [a, b, z],
    })
}

/// Runs `certificates` on `n_samples` deterministic samples, in parallel,
/// returning reports in sample order.
pub fn certificate_sweep_with(
    p: &ProcrustesProblem,
    certificates: &[Arc<dyn Certificate>],
    n_samples: usize,
    radius_cap: f64,
    seed: u64,
) -> Result<Vec<CertificateReport>> {
    if !(radius_cap >= 0.0 && radius_cap < PI) {
        return Err(Error::Config(format!(
            "radius cap {radius_cap} must lie in [0, π)"
        )));
    }
    let per_sample: Vec<Result<Vec<CertificateReport>>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let s = draw_sample(p, radius_cap, seed, i)?;
            let mut out = Vec::new();
            for c in certificates {
                for mut r in c.check(p, &s)? {
                    r.sample_point = if r.sample_point.is_empty() {
                        format!("sample {i}")
                    } else {
                        format!("sample {i}, {}", r.sample_point)
                    };
                    out.push(r);
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_sample {
        all.extend(r?);
    }
    Ok(all)
}

/// Sweep with every registered certificate.
pub fn certificate_sweep(
    p: &ProcrustesProblem,
    n_samples: usize,
    radius_cap: f64,
    seed: u64,
) -> Result<Vec<CertificateReport>> {
    let all: Vec<_> = certificate_registry().iter().map(|(_, c)| c.clone()).collect();
    certificate_sweep_with(p, &all, n_samples, radius_cap, seed)
}

/// The scalar lower bound `sin r (2r - sin r)` used to show the WQC
/// coefficient is nonnegative on `(-π, π)`.
pub fn wqc_alpha_lower_bound(r: f64) -> f64 {
    r.sin() * (2.0 * r - r.sin())
}
