use std::f64::consts::PI;

use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orthopolar::baselines::{polar_via_newton, polar_via_svd};
use orthopolar::certificates::{certificate_sweep, certificate_tolerance, check_wqc};
use orthopolar::geometry::{exp_map, haar_sample, random_skew_spectral, TangentVector};
use orthopolar::linalg::{Mat, SquareMatrix};
use orthopolar::objective::{riemannian_gradient, value, ProcrustesProblem};
use orthopolar::solver::{rgd_step, solve, PracticalStep, SolveOptions};

fn problem(n: usize, cond: f64, seed: u64) -> ProcrustesProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_sample(n, &mut rng);
    let v = haar_sample(n, &mut rng);
    let s: Vec<f64> = (0..n)
        .map(|k| if n == 1 { 1.0 } else { cond.powf(-(k as f64) / (n - 1) as f64) })
        .collect();
    let c = u.matrix() * Mat::from_diagonal(&DVector::from_vec(s)) * v.matrix().transpose();
    ProcrustesProblem::from_matrix(c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polar_factors_reconstruct(n in 1usize..9, seed in any::<u64>(), scale in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = Mat::from_fn(n, n, |_, _| rand::Rng::random_range(&mut rng, -scale..scale));
        let c = SquareMatrix::new(c).unwrap();
        let f = polar_via_svd(&c).unwrap();
        prop_assert!((f.x.matrix() * f.p.as_matrix() - c.as_matrix()).norm() <= 1e-10 * c.norm().max(1.0));
        prop_assert!((f.p.as_matrix() - f.p.as_matrix().transpose()).norm() <= 1e-10);
    }

    #[test]
    fn newton_matches_svd(n in 2usize..12, log_cond in 0.0f64..6.0, seed in any::<u64>()) {
        let p = problem(n, 10f64.powf(log_cond), seed);
        let newton = polar_via_newton(p.c(), 1e-14, 100).unwrap();
        let svd = polar_via_svd(p.c()).unwrap();
        prop_assert!((newton.factors.x.matrix() - svd.x.matrix()).norm() <= 1e-8);
    }

    #[test]
    fn optimum_beats_every_orthogonal_matrix(n in 1usize..8, seed in any::<u64>()) {
        let p = problem(n, 50.0, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..20 {
            let q = haar_sample(n, &mut rng);
            prop_assert!(value(&p, &q) >= p.f_star() - 1e-12 * p.scale());
        }
        prop_assert!((value(&p, p.x_star()) - p.f_star()).abs() <= 1e-12 * p.scale());
    }

    #[test]
    fn gradient_vanishes_at_the_optimum_and_wqc_holds(n in 2usize..8, seed in any::<u64>(), r in 0.05f64..3.0) {
        let p = problem(n, 10.0, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = random_skew_spectral(n, r, &mut rng);
        let x = exp_map(&TangentVector::new(p.x_star().clone(), omega).unwrap()).unwrap();
        prop_assert!(riemannian_gradient(&p, p.x_star()).unwrap().norm() <= 1e-12 * p.scale());
        let report = check_wqc(&p, &x).unwrap();
        prop_assert!(report.slack >= -certificate_tolerance(&p));
    }

    #[test]
    fn practical_steps_never_increase_f(n in 2usize..8, seed in any::<u64>(), r in 0.1f64..1.5) {
        let p = problem(n, 100.0, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = random_skew_spectral(n, r, &mut rng);
        let mut x = exp_map(&TangentVector::new(p.x_star().clone(), omega).unwrap()).unwrap();
        let eta = 0.25 / p.lipschitz();
        for _ in 0..50 {
            let next = rgd_step(&p, &x, eta).unwrap();
            prop_assert!(value(&p, &next) <= value(&p, &x) + 1e-9);
            x = next;
        }
    }

    #[test]
    fn sweeps_find_no_counterexamples(n in 2usize..6, seed in 0u64..1000, cap in 0.1f64..(0.95 * PI)) {
        let p = problem(n, 1e3, seed);
        let reports = certificate_sweep(&p, 10, cap, seed).unwrap();
        prop_assert!(reports.iter().all(|r| r.passed), "{:?}", reports.iter().find(|r| !r.passed));
    }
}

#[test]
fn practical_solve_reaches_the_optimum() {
    let p = problem(6, 10.0, 11);
    let x0 = haar_sample(6, &mut ChaCha8Rng::seed_from_u64(1));
    let x0 = if x0.same_component(p.x_star()) {
        x0
    } else {
        let mut m = x0.into_matrix();
        m.column_mut(0).neg_mut();
        orthopolar::geometry::OrthogonalMatrix::new(m).unwrap()
    };
    let opts = SolveOptions {
        oracle: false,
        ..SolveOptions::defaults_for(&p)
    };
    let res = solve(&p, &x0, &PracticalStep, &opts).unwrap();
    assert!((res.x.matrix() - p.x_star().matrix()).norm() < 1e-8);
}
