//! Reference polar solvers: the exact SVD factorization and the classical
//! Newton iteration, plus a side-by-side comparison with gradient descent.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::OrthogonalMatrix;
use crate::linalg::{svd, sym, Mat, SquareMatrix};
use crate::objective::{value, ProcrustesProblem};
use crate::registry::Registry;
use crate::solver::{solve, start_registry, step_rule_registry, SolveOptions};

/// Relative threshold `σ_min ≤ τ·σ_max` at which Newton refuses to start.
pub const NEWTON_SINGULAR_TOL: f64 = 1e-12;

/// `C = X P` with `X` orthogonal and `P` symmetric positive semidefinite.
#[derive(Clone, Debug)]
pub struct PolarFactors {
    pub x: OrthogonalMatrix,
    pub p: SquareMatrix,
}

impl PolarFactors {
    /// `|C - X P|_F`.
    pub fn reconstruction_residual(&self, c: &Mat) -> f64 {
        (c - self.x.matrix() * self.p.as_matrix()).norm()
    }
}

/// `X = U Vᵀ`, `P = V Σ Vᵀ`.
pub fn polar_via_svd(c: &SquareMatrix) -> Result<PolarFactors> {
    let f = svd(c)?;
    let x = OrthogonalMatrix::new(&f.u * f.v.transpose())?;
    let mut vs = f.v.clone();
    for (j, s) in f.sigma.iter().enumerate() {
        vs.column_mut(j).scale_mut(*s);
    }
    let p = sym(&(vs * f.v.transpose()));
    Ok(PolarFactors {
        x,
        p: SquareMatrix::new(p)?,
    })
}

#[derive(Clone, Debug)]
pub struct NewtonPolar {
    pub factors: PolarFactors,
    pub iterations: usize,
    /// `|X_{k+1} - X_k|_F / |X_k|_F` per iteration.
    pub steps: Vec<f64>,
}

/// Unscaled Newton iteration `X ← (X + X⁻ᵀ)/2` from `X₀ = C`.
pub fn polar_via_newton(c: &SquareMatrix, tol: f64, max_iters: usize) -> Result<NewtonPolar> {
    let sigma = crate::linalg::singular_values(c)?;
    let (smax, smin) = (
        sigma.first().copied().unwrap_or(0.0),
        sigma.last().copied().unwrap_or(0.0),
    );
    if smin <= NEWTON_SINGULAR_TOL * smax {
        return Err(Error::SingularInput {
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    let mut x = c.as_matrix().clone();
    let mut steps = Vec::new();
    for k in 1..=max_iters {
        let inv = x
            .clone()
            .try_inverse()
            .ok_or(Error::SingularInput { ratio: smin / smax })?;
        let next = (&x + inv.transpose()) * 0.5;
        let step = (&next - &x).norm() / x.norm();
        steps.push(step);
        x = next;
        if step <= tol {
            let x = OrthogonalMatrix::new(x)?;
            let p = sym(&x.matrix().tr_mul(c.as_matrix()));
            return Ok(NewtonPolar {
                factors: PolarFactors {
                    x,
                    p: SquareMatrix::new(p)?,
                },
                iterations: k,
                steps,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
    })
}

/// Settings for the gradient-descent entry of a comparison.
#[derive(Clone, Debug)]
pub struct RgdSettings {
    pub step: String,
    pub start: String,
    pub radius: f64,
    pub eta: Option<f64>,
    pub grad_tol: Option<f64>,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for RgdSettings {
    fn default() -> Self {
        Self {
            step: "practical".into(),
            start: "identity".into(),
            radius: 0.0,
            eta: None,
            grad_tol: None,
            max_iters: 100_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_iters: 100,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CompareSettings {
    pub rgd: RgdSettings,
    pub newton: NewtonSettings,
}

/// A solver's answer to `min -Tr(CX)`.
#[derive(Clone, Debug)]
pub struct ProcrustesSolution {
    pub x: OrthogonalMatrix,
    pub iterations: usize,
}

/// A method computing the Procrustes optimum `X*`, the polar factor of `Cᵀ`.
pub trait PolarSolver: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(&self, p: &ProcrustesProblem, settings: &CompareSettings) -> Result<ProcrustesSolution>;
}

pub struct SvdSolver;

impl PolarSolver for SvdSolver {
    fn name(&self) -> &'static str {
        "svd"
    }

    fn solve(&self, p: &ProcrustesProblem, _: &CompareSettings) -> Result<ProcrustesSolution> {
        Ok(ProcrustesSolution {
            x: polar_via_svd(&p.c().transpose())?.x,
            iterations: 0,
        })
    }
}

pub struct NewtonSolver;

impl PolarSolver for NewtonSolver {
    fn name(&self) -> &'static str {
        "newton"
    }

    fn solve(&self, p: &ProcrustesProblem, s: &CompareSettings) -> Result<ProcrustesSolution> {
        let r = polar_via_newton(&p.c().transpose(), s.newton.tol, s.newton.max_iters)?;
        Ok(ProcrustesSolution {
            x: r.factors.x,
            iterations: r.iterations,
        })
    }
}

pub struct RgdSolver;

impl PolarSolver for RgdSolver {
    fn name(&self) -> &'static str {
        "rgd"
    }

    fn solve(&self, p: &ProcrustesProblem, s: &CompareSettings) -> Result<ProcrustesSolution> {
        let cfg = &s.rgd;
        let rule = step_rule_registry().get(&cfg.step)?;
        let start = start_registry().get(&cfg.start)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let x0 = start.start(p, cfg.radius, &mut rng)?;
        let mut opts = SolveOptions::defaults_for(p);
        opts.max_iters = cfg.max_iters;
        opts.user_eta = cfg.eta;
        if let Some(tol) = cfg.grad_tol {
            opts.grad_tol = tol;
        }
        let res = solve(p, &x0, rule.as_ref(), &opts)?;
        Ok(ProcrustesSolution {
            x: res.x,
            iterations: res.iterations,
        })
    }
}

pub fn polar_solver_registry() -> Registry<dyn PolarSolver> {
    let mut r: Registry<dyn PolarSolver> = Registry::new("polar solver");
    let all: Vec<Arc<dyn PolarSolver>> =
        vec![Arc::new(SvdSolver), Arc::new(NewtonSolver), Arc::new(RgdSolver)];
    for s in all {
        r.register(s.name(), s).expect("names are distinct");
    }
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonEntry {
    pub method: String,
    pub iterations: Option<usize>,
    /// `|X - X*|_F`; omitted for singular `C`, whose optimum is not unique.
    pub residual: Option<f64>,
    pub f_gap: Option<f64>,
    pub wall_time_s: f64,
    /// Why the method did not run or failed.
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub n: usize,
    pub singular: bool,
    pub entries: Vec<ComparisonEntry>,
}

impl Comparison {
    pub fn entry(&self, method: &str) -> Option<&ComparisonEntry> {
        self.entries.iter().find(|e| e.method == method)
    }
}

/// Runs every registered polar solver on `C` and measures it against `X*`.
/// Newton is skipped for singular `C`.
pub fn compare_solvers(c: &SquareMatrix, settings: &CompareSettings) -> Result<Comparison> {
    let p = ProcrustesProblem::new(c.clone())?;
    let mut entries = Vec::new();
    for (name, solver) in polar_solver_registry().iter() {
        if name == "newton" && p.is_singular() {
            entries.push(ComparisonEntry {
                method: name.into(),
                iterations: None,
                residual: None,
                f_gap: None,
                wall_time_s: 0.0,
                note: Some("excluded: singular input".into()),
            });
            continue;
        }
        let clock = Instant::now();
        let out = solver.solve(&p, settings);
        let wall_time_s = clock.elapsed().as_secs_f64();
        entries.push(match out {
            Ok(sol) => ComparisonEntry {
                method: name.into(),
                iterations: Some(sol.iterations),
                residual: (!p.is_singular())
                    .then(|| (sol.x.matrix() - p.x_star().matrix()).norm()),
                f_gap: Some(value(&p, &sol.x) - p.f_star()),
                wall_time_s,
                note: None,
            },
            Err(e) => ComparisonEntry {
                method: name.into(),
                iterations: None,
                residual: None,
                f_gap: None,
                wall_time_s,
                note: Some(e.to_string()),
            },
        });
    }
    Ok(Comparison {
        n: p.dim(),
        singular: p.is_singular(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::haar_sample;
    use rand_distr::{Distribution, StandardNormal};

    fn rot2(theta: f64) -> Mat {
        let (s, c) = theta.sin_cos();
        Mat::from_row_slice(2, 2, &[c, -s, s, c])
    }

    fn with_spectrum(s: &[f64], seed: u64) -> SquareMatrix {
        let n = s.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_sample(n, &mut rng);
        let v = haar_sample(n, &mut rng);
        SquareMatrix::new(
            u.matrix() * Mat::from_diagonal(&nalgebra::DVector::from_row_slice(s)) * v.matrix().transpose(),
        )
        .unwrap()
    }

    #[test]
    fn svd_polar_examples() {
        let spd = SquareMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let f = polar_via_svd(&spd).unwrap();
        assert!((f.x.matrix() - Mat::identity(2, 2)).norm() < 1e-14);
        assert!((f.p.as_matrix() - spd.as_matrix()).norm() < 1e-14);

        let r = SquareMatrix::new(rot2(0.9)).unwrap();
        let f = polar_via_svd(&r).unwrap();
        assert!((f.x.matrix() - rot2(0.9)).norm() < 1e-14);
        assert!((f.p.as_matrix() - Mat::identity(2, 2)).norm() < 1e-14);

        let d = SquareMatrix::from_diagonal(&[-2.0, 3.0]).unwrap();
        let f = polar_via_svd(&d).unwrap();
        assert!((f.x.matrix() - Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])).norm() < 1e-15);
        assert!((f.p.as_matrix() - Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0])).norm() < 1e-15);
    }

    #[test]
    fn svd_polar_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 3, 8] {
            let c = SquareMatrix::new(Mat::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng))).unwrap();
            let f = polar_via_svd(&c).unwrap();
            assert!(f.reconstruction_residual(&c) <= 1e-10 * c.norm());
            assert!((f.p.as_matrix() - f.p.transpose().as_matrix()).norm() <= 1e-10);
            let eig = f.p.as_matrix().clone().symmetric_eigen();
            assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-10));
        }
        assert!(polar_via_svd(&SquareMatrix::new(Mat::zeros(2, 2)).unwrap()).is_ok());
    }

    #[test]
    fn newton_examples() {
        let r = SquareMatrix::new(rot2(0.4)).unwrap();
        let out = polar_via_newton(&r, 1e-14, 50).unwrap();
        assert_eq!(out.iterations, 1);

        let d = SquareMatrix::from_diagonal(&[1.0, 10.0]).unwrap();
        let out = polar_via_newton(&d, 1e-14, 50).unwrap();
        assert!((out.factors.x.matrix() - Mat::identity(2, 2)).norm() < 1e-14);
        // Quadratic tail: late steps roughly square.
        let s = &out.steps;
        let k = s.len() - 2;
        assert!(s[k] <= 10.0 * s[k - 1] * s[k - 1] + 1e-15, "{s:?}");

        let c = with_spectrum(&[5.0, 4.0, 3.0, 2.5, 2.0, 1.5, 1.2, 1.0, 0.8, 0.5], 2);
        let newton = polar_via_newton(&c, 1e-14, 100).unwrap();
        let exact = polar_via_svd(&c).unwrap();
        assert!((newton.factors.x.matrix() - exact.x.matrix()).norm() <= 1e-8);
    }

    #[test]
    fn newton_errors() {
        let c = with_spectrum(&[1.0, 1.0, 0.0], 3);
        assert!(matches!(
            polar_via_newton(&c, 1e-14, 50),
            Err(Error::SingularInput { .. })
        ));
        let c = with_spectrum(&[1e6, 1.0, 1e-3], 4);
        assert!(matches!(
            polar_via_newton(&c, 1e-14, 2),
            Err(Error::NoConvergence { iterations: 2 })
        ));
    }

    #[test]
    fn oracle_identity() {
        for seed in 0..10 {
            let c = with_spectrum(&[3.0, 2.0, 1.0, 0.1], seed);
            let p = ProcrustesProblem::new(c.clone()).unwrap();
            let polar_t = polar_via_svd(&c.transpose()).unwrap();
            assert!((p.x_star().matrix() - polar_t.x.matrix()).norm() <= 1e-10);
        }
    }

    #[test]
    fn compare_on_identity_and_singular() {
        let cmp = compare_solvers(&SquareMatrix::identity(3), &CompareSettings::default()).unwrap();
        for e in &cmp.entries {
            assert!(e.residual.unwrap() < 1e-12, "{e:?}");
            if e.method != "newton" {
                assert_eq!(e.iterations, Some(0));
            }
        }
        let c = with_spectrum(&[2.0, 1.0, 0.0], 5);
        let cmp = compare_solvers(&c, &CompareSettings::default()).unwrap();
        assert!(cmp.singular);
        let newton = cmp.entry("newton").unwrap();
        assert!(newton.iterations.is_none() && newton.note.is_some());
        let rgd = cmp.entry("rgd").unwrap();
        assert!(rgd.residual.is_none());
        assert!(rgd.f_gap.unwrap() < 1e-8);
    }

    #[test]
    fn compare_agrees_with_oracle() {
        let c = with_spectrum(&[1.0, 0.6, 0.3, 0.1, 0.05], 6);
        let cmp = compare_solvers(&c, &CompareSettings::default()).unwrap();
        for e in &cmp.entries {
            assert!(e.residual.unwrap() <= 1e-7, "{e:?}");
        }
    }
}
