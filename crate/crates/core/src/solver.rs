//! Riemannian gradient descent `X ← exp_X(-η grad f(X))` with step-size
//! rules, start strategies and a per-iteration trace against the linear and
//! sublinear convergence envelopes.

use std::f64::consts::PI;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    exp_map, haar_sample, random_skew_frobenius, random_skew_spectral, relative_canonical,
    OrthogonalMatrix, TangentVector, INJ_TOL,
};
use crate::linalg::{spectral_norm, Mat};
use crate::objective::{riemannian_gradient, value, LandscapeCoefficients, ProcrustesProblem};
use crate::registry::Registry;

/// Largest phase of `XᵀX*` treated as comfortably away from the antipode.
pub const NEAR_ANTIPODAL: f64 = PI - 1e-3;

/// What a step rule may look at when choosing `η_t`.
#[derive(Clone, Copy, Debug)]
pub struct StepContext<'a> {
    pub problem: &'a ProcrustesProblem,
    /// `dist(X₀, X*)`, known in oracle mode.
    pub initial_distance: Option<f64>,
    /// `a(X_t)`, known in oracle mode away from the antipode.
    pub a_of_x: Option<f64>,
    /// Step size supplied by the user, if any.
    pub user_eta: Option<f64>,
}

/// A step-size policy.
pub trait StepRule: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the rule needs the optimum `X*`.
    fn needs_oracle(&self) -> bool {
        false
    }

    fn step_size(&self, ctx: &StepContext<'_>) -> Result<f64>;

    /// The fixed step the convergence envelopes are evaluated with, if any.
    fn envelope_step(&self, ctx: &StepContext<'_>) -> Option<f64> {
        self.step_size(ctx).ok()
    }
}

fn certified_eta(ctx: &StepContext<'_>) -> Result<f64> {
    let d0 = ctx
        .initial_distance
        .ok_or_else(|| Error::Config("the certified step needs dist(X0, X*)".into()))?;
    let eta = (1.0 + d0.cos()) / (4.0 * ctx.problem.lipschitz());
    if !(eta > 0.0) || d0 >= PI {
        return Err(Error::InvalidStepSize(eta));
    }
    Ok(eta)
}

/// `η = (1 + cos d₀) / (4L)`.
pub struct CertifiedStep;

impl StepRule for CertifiedStep {
    fn name(&self) -> &'static str {
        "certified"
    }

    fn needs_oracle(&self) -> bool {
        true
    }

    fn step_size(&self, ctx: &StepContext<'_>) -> Result<f64> {
        let eta = certified_eta(ctx)?;
        check_below_a(eta, ctx)?;
        Ok(eta)
    }
}

/// `η_t = a(X_t) / L`.
pub struct AdaptiveStep;

impl StepRule for AdaptiveStep {
    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn needs_oracle(&self) -> bool {
        true
    }

    fn step_size(&self, ctx: &StepContext<'_>) -> Result<f64> {
        let a = ctx
            .a_of_x
            .ok_or_else(|| Error::Config("the adaptive step needs a(X) away from the antipode".into()))?;
        Ok(a / ctx.problem.lipschitz())
    }

    // Along the iterates a(X_t) ≥ (1 + cos d₀)/4, so the certified step gives a
    // valid envelope for the larger adaptive steps.
    fn envelope_step(&self, ctx: &StepContext<'_>) -> Option<f64> {
        certified_eta(ctx).ok()
    }
}

/// `η = 1/(4L)`, which needs no knowledge of `X*`.
pub struct PracticalStep;

impl StepRule for PracticalStep {
    fn name(&self) -> &'static str {
        "practical"
    }

    fn step_size(&self, ctx: &StepContext<'_>) -> Result<f64> {
        Ok(0.25 / ctx.problem.lipschitz())
    }
}

/// A user-supplied constant step.
pub struct FixedStep;

impl StepRule for FixedStep {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn step_size(&self, ctx: &StepContext<'_>) -> Result<f64> {
        let eta = ctx
            .user_eta
            .ok_or_else(|| Error::Config("the fixed step rule needs an explicit eta".into()))?;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidStepSize(eta));
        }
        Ok(eta)
    }
}

fn check_below_a(eta: f64, ctx: &StepContext<'_>) -> Result<()> {
    if let Some(a) = ctx.a_of_x {
        if eta > a / ctx.problem.lipschitz() * (1.0 + 1e-9) {
            return Err(Error::InvalidStepSize(eta));
        }
    }
    Ok(())
}

pub fn step_rule_registry() -> Registry<dyn StepRule> {
    let mut r: Registry<dyn StepRule> = Registry::new("step rule");
    let all: Vec<Arc<dyn StepRule>> = vec![
        Arc::new(CertifiedStep),
        Arc::new(AdaptiveStep),
        Arc::new(PracticalStep),
        Arc::new(FixedStep),
    ];
    for s in all {
        r.register(s.name(), s).expect("names are distinct");
    }
    r
}

/// Produces a starting point for a solve.
pub trait StartStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// `radius` parameterizes the perturbation strategies and is ignored by
    /// the others.
    fn start(
        &self,
        p: &ProcrustesProblem,
        radius: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<OrthogonalMatrix>;
}

/// The identity, with its last column negated when `det X* = -1`.
pub struct SignCorrectedIdentity;

impl StartStrategy for SignCorrectedIdentity {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn start(&self, p: &ProcrustesProblem, _: f64, _: &mut ChaCha8Rng) -> Result<OrthogonalMatrix> {
        let n = p.dim();
        let mut q = Mat::identity(n, n);
        if p.x_star().det_sign() < 0 && n > 0 {
            q[(n - 1, n - 1)] = -1.0;
        }
        OrthogonalMatrix::new(q)
    }
}

/// A Haar sample moved into the component of `X*`.
pub struct HaarSameComponent;

impl StartStrategy for HaarSameComponent {
    fn name(&self) -> &'static str {
        "haar"
    }

    fn start(&self, p: &ProcrustesProblem, _: f64, rng: &mut ChaCha8Rng) -> Result<OrthogonalMatrix> {
        let x = haar_sample(p.dim(), rng);
        if x.same_component(p.x_star()) {
            return Ok(x);
        }
        let mut q = x.into_matrix();
        q.column_mut(0).neg_mut();
        OrthogonalMatrix::new(q)
    }
}

/// `exp_{X*}(X*Ω)` with a random direction and `|Ω|₂ = radius`.
pub struct TangentPerturbation;

impl StartStrategy for TangentPerturbation {
    fn name(&self) -> &'static str {
        "perturb"
    }

    fn start(&self, p: &ProcrustesProblem, radius: f64, rng: &mut ChaCha8Rng) -> Result<OrthogonalMatrix> {
        check_radius(radius, PI)?;
        let omega = random_skew_spectral(p.dim(), radius, rng);
        exp_map(&TangentVector::new(p.x_star().clone(), omega)?)
    }
}

/// `exp_{X*}(X*Ω)` with a random direction and `|Ω|_F = radius`, so that
/// `dist(X₀, X*) = radius` exactly.
pub struct DistancePerturbation;

impl StartStrategy for DistancePerturbation {
    fn name(&self) -> &'static str {
        "distance"
    }

    fn start(&self, p: &ProcrustesProblem, radius: f64, rng: &mut ChaCha8Rng) -> Result<OrthogonalMatrix> {
        // |Ω|₂ ≤ |Ω|_F/√2 for skew Ω, which keeps the geodesic minimizing.
        check_radius(radius, PI * 2f64.sqrt())?;
        if p.dim() < 2 {
            return Ok(p.x_star().clone());
        }
        let omega = random_skew_frobenius(p.dim(), radius, rng);
        exp_map(&TangentVector::new(p.x_star().clone(), omega)?)
    }
}

fn check_radius(radius: f64, limit: f64) -> Result<()> {
    if !(radius >= 0.0 && radius < limit) {
        return Err(Error::Config(format!(
            "start radius {radius} must lie in [0, {limit})"
        )));
    }
    Ok(())
}

pub fn start_registry() -> Registry<dyn StartStrategy> {
    let mut r: Registry<dyn StartStrategy> = Registry::new("start strategy");
    let all: Vec<Arc<dyn StartStrategy>> = vec![
        Arc::new(SignCorrectedIdentity),
        Arc::new(HaarSameComponent),
        Arc::new(TangentPerturbation),
        Arc::new(DistancePerturbation),
    ];
    for s in all {
        r.register(s.name(), s).expect("names are distinct");
    }
    r
}

/// One Riemannian gradient step `exp_X(-η grad f(X))`.
pub fn rgd_step(p: &ProcrustesProblem, x: &OrthogonalMatrix, eta: f64) -> Result<OrthogonalMatrix> {
    let grad = riemannian_gradient(p, x)?;
    step_along(&grad, eta)
}

fn step_along(grad: &TangentVector, eta: f64) -> Result<OrthogonalMatrix> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidStepSize(eta));
    }
    let step = grad.scale(-eta);
    // |Ω|₂ ≤ |Ω|_F, so the SVD is only needed near the boundary.
    let frob = step.norm();
    if frob >= PI - INJ_TOL {
        let step_norm = spectral_norm(step.generator())?;
        if step_norm >= PI - INJ_TOL {
            return Err(Error::StepOutsideInjectivity { step_norm });
        }
    }
    exp_map(&step)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    GradTol,
    MaxIters,
    StepRejected,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::GradTol => "grad-tol",
            Self::MaxIters => "max-iters",
            Self::StepRejected => "step-rejected",
        }
    }
}

/// One row of the trace, describing iterate `X_t` and the step taken from it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: usize,
    pub eta: Option<f64>,
    pub f_gap: f64,
    pub grad_norm: f64,
    pub dist_to_star: Option<f64>,
    pub linear_envelope: Option<f64>,
    pub sublinear_envelope: Option<f64>,
    pub a_of_x: Option<f64>,
    pub near_antipodal: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveTrace {
    pub rows: Vec<TraceRow>,
    /// `dist(X₀, X*)` against the SVD representative of the optimum.
    pub initial_distance: Option<f64>,
    /// The fixed step the envelopes use.
    pub envelope_eta: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub x: OrthogonalMatrix,
    pub iterations: usize,
    pub trace: SolveTrace,
    pub termination: TerminationReason,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Track distances and envelopes against `X*`.
    pub oracle: bool,
    pub user_eta: Option<f64>,
}

impl SolveOptions {
    /// `gradTol = 1e-10·max(1, |C|_F)`, `maxIters = 10⁵`, oracle tracking on.
    pub fn defaults_for(p: &ProcrustesProblem) -> Self {
        Self {
            grad_tol: 1e-10 * p.scale(),
            max_iters: 100_000,
            oracle: true,
            user_eta: None,
        }
    }
}

/// The two convergence envelopes for a fixed step `eta` from distance `d0`.
#[derive(Clone, Copy, Debug)]
pub struct Envelopes {
    pub d0: f64,
    pub eta: f64,
    pub sigma_min: f64,
    pub lipschitz: f64,
}

impl Envelopes {
    /// `(1 - (1/π²)(1 + cos d₀) σ_min η)^t · d₀²`.
    pub fn linear(&self, t: usize) -> f64 {
        let rate = 1.0 - (1.0 + self.d0.cos()) * self.sigma_min * self.eta / (PI * PI);
        rate.powf(t as f64) * self.d0 * self.d0
    }

    /// `(2L + 1/η) / ((1 + cos d₀)t + 4) · d₀²`.
    pub fn sublinear(&self, t: usize) -> f64 {
        (2.0 * self.lipschitz + 1.0 / self.eta) / ((1.0 + self.d0.cos()) * t as f64 + 4.0)
            * self.d0
            * self.d0
    }
}

struct OracleState {
    dist: f64,
    coeffs: Option<LandscapeCoefficients>,
    near_antipodal: bool,
}

fn oracle_state(p: &ProcrustesProblem, x: &OrthogonalMatrix) -> Result<OracleState> {
    let cf = relative_canonical(x, p.x_star())?;
    let r_max = cf.max_abs_phase();
    Ok(OracleState {
        dist: cf.phase_norm(),
        coeffs: (r_max < PI - INJ_TOL).then(|| LandscapeCoefficients::from_r_max(r_max)),
        near_antipodal: r_max > NEAR_ANTIPODAL,
    })
}

/// Runs gradient descent from `x0` until `|grad f|_F ≤ grad_tol` or
/// `max_iters` steps have been taken.
///
/// In oracle mode the start must share the component of `X*`; the descent
/// flow cannot leave its component.
pub fn solve(
    p: &ProcrustesProblem,
    x0: &OrthogonalMatrix,
    rule: &dyn StepRule,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    if x0.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x0.dim(),
        });
    }
    if rule.needs_oracle() && !opts.oracle {
        return Err(Error::Config(format!(
            "step rule `{}` needs oracle tracking",
            rule.name()
        )));
    }
    if !(opts.grad_tol >= 0.0) {
        return Err(Error::Config(format!("gradient tolerance {} is negative", opts.grad_tol)));
    }

    let initial = if opts.oracle {
        if !x0.same_component(p.x_star()) {
            return Err(Error::DifferentComponents);
        }
        Some(oracle_state(p, x0)?)
    } else {
        None
    };
    let d0 = initial.as_ref().map(|s| s.dist);
    let ctx0 = StepContext {
        problem: p,
        initial_distance: d0,
        a_of_x: initial.as_ref().and_then(|s| s.coeffs.map(|c| c.a_of_x)),
        user_eta: opts.user_eta,
    };
    // The envelopes are only meaningful from inside the injectivity radius.
    let envelope_eta = match d0 {
        Some(d0) if d0 < PI => rule.envelope_step(&ctx0),
        _ => None,
    };
    let envelopes = d0.zip(envelope_eta).map(|(d0, eta)| Envelopes {
        d0,
        eta,
        sigma_min: p.sigma_min(),
        lipschitz: p.lipschitz(),
    });

    let mut x = x0.clone();
    let mut rows = Vec::new();
    let mut state = initial;
    let mut t = 0;
    let termination = loop {
        let grad = riemannian_gradient(p, &x)?;
        let grad_norm = grad.norm();
        let ctx = StepContext {
            a_of_x: state.as_ref().and_then(|s| s.coeffs.map(|c| c.a_of_x)),
            ..ctx0
        };
        let eta = rule.step_size(&ctx)?;
        rows.push(TraceRow {
            t,
            eta: Some(eta),
            f_gap: value(p, &x) - p.f_star(),
            grad_norm,
            dist_to_star: state.as_ref().map(|s| s.dist),
            linear_envelope: envelopes.map(|e| e.linear(t)),
            sublinear_envelope: envelopes.map(|e| e.sublinear(t)),
            a_of_x: ctx.a_of_x,
            near_antipodal: state.as_ref().map(|s| s.near_antipodal),
        });
        if grad_norm <= opts.grad_tol {
            break TerminationReason::GradTol;
        }
        if t >= opts.max_iters {
            break TerminationReason::MaxIters;
        }
        x = match step_along(&grad, eta) {
            Ok(next) => next,
            Err(Error::StepOutsideInjectivity { .. }) => break TerminationReason::StepRejected,
            Err(e) => return Err(e),
        };
        t += 1;
        if opts.oracle {
            state = Some(oracle_state(p, &x)?);
        }
    };

    Ok(SolveResult {
        x,
        iterations: t,
        trace: SolveTrace {
            rows,
            initial_distance: d0,
            envelope_eta,
        },
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance;
    use crate::linalg::SquareMatrix;
    use rand::SeedableRng;

    fn rot2(theta: f64) -> OrthogonalMatrix {
        let (s, c) = theta.sin_cos();
        OrthogonalMatrix::new(Mat::from_row_slice(2, 2, &[c, -s, s, c])).unwrap()
    }

    fn spectral_problem(s: &[f64], seed: u64) -> ProcrustesProblem {
        let n = s.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_sample(n, &mut rng);
        let v = haar_sample(n, &mut rng);
        let c = u.matrix() * Mat::from_diagonal(&nalgebra::DVector::from_row_slice(s)) * v.matrix().transpose();
        ProcrustesProblem::from_matrix(c).unwrap()
    }

    #[test]
    fn fixed_point_at_optimum() {
        let p = spectral_problem(&[3.0, 2.0, 1.0], 1);
        let y = rgd_step(&p, p.x_star(), 0.1).unwrap();
        assert!((y.matrix() - p.x_star().matrix()).norm() < 1e-12);
        let res = solve(&p, p.x_star(), &CertifiedStep, &SolveOptions::defaults_for(&p)).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(res.termination, TerminationReason::GradTol);
        assert_eq!(res.trace.rows.len(), 1);
    }

    #[test]
    fn small_step_decreases_value_in_two_dimensions() {
        let p = ProcrustesProblem::new(SquareMatrix::identity(2)).unwrap();
        let x = rot2(1.2);
        let y = rgd_step(&p, &x, 0.05).unwrap();
        assert!(value(&p, &y) < value(&p, &x));
        // θ ← θ - η sin θ for C = I₂.
        let dist = distance(&y, p.x_star()).unwrap();
        assert!((dist - 2f64.sqrt() * (1.2 - 0.05 * 1.2f64.sin())).abs() < 1e-12);
    }

    #[test]
    fn one_step_contraction_with_adaptive_step() {
        let p = spectral_problem(&[4.0, 2.0, 1.5, 1.0, 0.5], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let x = TangentPerturbation.start(&p, 2.8, &mut rng).unwrap();
            let lc = crate::objective::landscape_coefficients(&p, &x).unwrap();
            let eta = lc.a_of_x / p.lipschitz();
            let d = distance(&x, p.x_star()).unwrap();
            let y = rgd_step(&p, &x, eta).unwrap();
            let d1 = distance(&y, p.x_star()).unwrap();
            let factor = 1.0 - 4.0 / (PI * PI) * p.sigma_min() * lc.a_of_x * eta;
            assert!(d1 * d1 <= factor * d * d + 1e-12, "{d1} {d}");
        }
    }

    #[test]
    fn step_errors() {
        let p = ProcrustesProblem::new(SquareMatrix::identity(2)).unwrap();
        assert!(matches!(rgd_step(&p, &rot2(1.0), 0.0), Err(Error::InvalidStepSize(_))));
        assert!(matches!(
            rgd_step(&p, &rot2(1.5), 10.0),
            Err(Error::StepOutsideInjectivity { .. })
        ));
    }

    #[test]
    fn certified_step_follows_linear_envelope() {
        let p = spectral_problem(&[10.0, 6.0, 3.0, 2.0, 1.0], 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x0 = DistancePerturbation.start(&p, PI / 2.0, &mut rng).unwrap();
        let res = solve(&p, &x0, &CertifiedStep, &SolveOptions::defaults_for(&p)).unwrap();
        assert_eq!(res.termination, TerminationReason::GradTol);
        let d0 = res.trace.initial_distance.unwrap();
        assert!((d0 - PI / 2.0).abs() < 1e-10);
        let mut prev = f64::INFINITY;
        for row in &res.trace.rows {
            let d = row.dist_to_star.unwrap();
            assert!(d * d <= row.linear_envelope.unwrap() * (1.0 + 1e-6) + 1e-30, "t = {}", row.t);
            assert!(d <= prev + 1e-9);
            assert!(row.eta.unwrap() <= row.a_of_x.unwrap() / p.lipschitz() * (1.0 + 1e-9));
            prev = d;
        }
        assert!((res.x.matrix() - p.x_star().matrix()).norm() < 1e-8);
    }

    #[test]
    fn practical_step_follows_sublinear_envelope_when_singular() {
        let p = spectral_problem(&[2.0, 1.0, 0.5, 0.0], 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x0 = DistancePerturbation.start(&p, 1.2, &mut rng).unwrap();
        let opts = SolveOptions {
            grad_tol: 0.0,
            max_iters: 2000,
            ..SolveOptions::defaults_for(&p)
        };
        let res = solve(&p, &x0, &PracticalStep, &opts).unwrap();
        assert_eq!(res.termination, TerminationReason::MaxIters);
        let mut prev_f = f64::INFINITY;
        for row in &res.trace.rows {
            assert!(row.f_gap <= row.sublinear_envelope.unwrap() * (1.0 + 1e-6));
            assert!(row.f_gap <= prev_f + 1e-9);
            prev_f = row.f_gap;
        }
    }

    #[test]
    fn adaptive_step_converges() {
        let p = spectral_problem(&[5.0, 1.0, 0.2], 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x0 = TangentPerturbation.start(&p, 2.5, &mut rng).unwrap();
        let res = solve(&p, &x0, &AdaptiveStep, &SolveOptions::defaults_for(&p)).unwrap();
        assert_eq!(res.termination, TerminationReason::GradTol);
        assert!((res.x.matrix() - p.x_star().matrix()).norm() < 1e-8);

        let x0 = TangentPerturbation.start(&p, 1.5, &mut rng).unwrap();
        let res = solve(&p, &x0, &AdaptiveStep, &SolveOptions::defaults_for(&p)).unwrap();
        assert!(res.trace.initial_distance.unwrap() < PI);
        for row in &res.trace.rows {
            let d = row.dist_to_star.unwrap();
            assert!(d * d <= row.linear_envelope.unwrap() * (1.0 + 1e-6) + 1e-30);
        }
    }

    #[test]
    fn oracle_mode_refuses_wrong_component() {
        let p = ProcrustesProblem::new(SquareMatrix::identity(3)).unwrap();
        let x0 = OrthogonalMatrix::new(Mat::from_diagonal(&nalgebra::DVector::from_row_slice(&[
            1.0, 1.0, -1.0,
        ])))
        .unwrap();
        let opts = SolveOptions::defaults_for(&p);
        assert!(matches!(
            solve(&p, &x0, &PracticalStep, &opts),
            Err(Error::DifferentComponents)
        ));
        let blind = SolveOptions {
            oracle: false,
            max_iters: 50,
            ..opts
        };
        let res = solve(&p, &x0, &PracticalStep, &blind).unwrap();
        assert!(res.trace.rows.iter().all(|r| r.dist_to_star.is_none()));
        assert_eq!(res.x.det_sign(), -1);
        assert!(matches!(
            solve(&p, &x0, &CertifiedStep, &blind),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fixed_step_needs_eta() {
        let p = ProcrustesProblem::new(SquareMatrix::identity(2)).unwrap();
        let opts = SolveOptions::defaults_for(&p);
        assert!(matches!(
            solve(&p, &rot2(0.5), &FixedStep, &opts),
            Err(Error::Config(_))
        ));
        let opts = SolveOptions {
            user_eta: Some(0.3),
            ..opts
        };
        let res = solve(&p, &rot2(0.5), &FixedStep, &opts).unwrap();
        assert!(res.trace.rows.iter().all(|r| r.eta == Some(0.3)));
    }

    #[test]
    fn oversized_step_breaks_the_envelope() {
        let p = ProcrustesProblem::new(SquareMatrix::identity(2)).unwrap();
        let opts = SolveOptions {
            user_eta: Some(2.0),
            max_iters: 20,
            ..SolveOptions::defaults_for(&p)
        };
        let res = solve(&p, &rot2(0.4), &FixedStep, &opts).unwrap();
        assert!(res.trace.rows.iter().any(|r| {
            let d = r.dist_to_star.unwrap();
            d * d > r.linear_envelope.unwrap() * (1.0 + 1e-6)
        }));
    }

    #[test]
    fn start_strategies() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let p = spectral_problem(&[3.0, 2.0, 1.0, 1.0], 11);
        let x = TangentPerturbation.start(&p, 0.0, &mut rng).unwrap();
        assert!((x.matrix() - p.x_star().matrix()).norm() < 1e-14);

        let id = SignCorrectedIdentity.start(&p, 0.0, &mut rng).unwrap();
        assert!(id.same_component(p.x_star()));
        let q = ProcrustesProblem::new(SquareMatrix::identity(3)).unwrap();
        assert_eq!(SignCorrectedIdentity.start(&q, 0.0, &mut rng).unwrap(), OrthogonalMatrix::identity(3));

        for _ in 0..10 {
            assert!(HaarSameComponent.start(&p, 0.0, &mut rng).unwrap().same_component(p.x_star()));
            let r = 2.0;
            let x = TangentPerturbation.start(&p, r, &mut rng).unwrap();
            let lc = crate::objective::landscape_coefficients(&p, &x).unwrap();
            assert!((lc.r_max - r).abs() < 1e-10);
            // Each rotation plane contributes two phases of size at most r.
            assert!(distance(&x, p.x_star()).unwrap() <= (2.0 * 2.0f64).sqrt() * r + 1e-10);
            let x = DistancePerturbation.start(&p, 2.5, &mut rng).unwrap();
            assert!((distance(&x, p.x_star()).unwrap() - 2.5).abs() < 1e-10);
        }
        assert!(TangentPerturbation.start(&p, PI, &mut rng).is_err());
    }

    #[test]
    fn registries_list_every_variant() {
        assert_eq!(step_rule_registry().names(), ["certified", "adaptive", "practical", "fixed"]);
        assert_eq!(start_registry().names(), ["identity", "haar", "perturb", "distance"]);
        assert!(step_rule_registry().get("newton").is_err());
    }
}
