use ball_design::design::{ExactDesign, MarginalDesign};
use ball_design::discretize::{discretize_design, orbit_vertices, random_orientation, DiscretizeOptions, Polytope, Strategy as Plan, Weighting};
use ball_design::equivariance::{canonicalize, push_forward, scale_parameters, scale_points};
use ball_design::information::{exact_info, exact_log_det, log_det_two_point, marginal_info, marginal_log_det};
use ball_design::models::{IntensityModel, ShiftedIntensity};
use ball_design::roots::bisect;
use ball_design::solver::{solve, solve_canonical, SolveOptions, SupportForm};
use ball_design::verify::{oracle_two_point, support_sensitivities};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn models() -> [IntensityModel; 3] {
    [IntensityModel::logit(), IntensityModel::probit(), IntensityModel::exponential()]
}

fn model_strategy() -> impl Strategy<Value = IntensityModel> {
    (0usize..3).prop_map(|i| models()[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn two_point_formula_matches_matrix(
        model in model_strategy(),
        k in 1usize..=6,
        b0 in -3.0f64..3.0,
        b1 in 0.0f64..3.0,
        u in 0.0f64..=1.0,
        v in 0.0f64..=1.0,
        alpha in 0.01f64..0.99,
    ) {
        // the generic Cholesky route loses accuracy as det ~ (x - y)² -> 0,
        // so the matrix comparison keeps the levels 0.01 apart
        let y = -1.0 + 1.98 * u;
        let x = (y + 0.01 + (0.99 - y) * v).min(1.0);
        let s = ShiftedIntensity::new(model, b0, b1).unwrap();
        let m = MarginalDesign::two_point(x, y, alpha).unwrap();
        let direct = marginal_info(&s, &m, k).unwrap().log_det();
        let formula = log_det_two_point(&s, x, y, alpha, k);
        prop_assert!(direct.is_finite());
        prop_assert!((direct - formula).abs() <= 1e-9 * direct.abs().max(1.0), "{direct} vs {formula}");
    }

    #[test]
    fn two_point_formula_matches_moments(
        model in model_strategy(),
        k in 1usize..=6,
        b0 in -3.0f64..3.0,
        b1 in 0.0f64..3.0,
        u in 0.0f64..1.0,
        v in 1e-6f64..=1.0,
        alpha in 0.01f64..0.99,
    ) {
        let y = -1.0 + 2.0 * u;
        let x = (y + (1.0 - y) * v).min(1.0);
        prop_assume!(x > y);
        let s = ShiftedIntensity::new(model, b0, b1).unwrap();
        let m = MarginalDesign::two_point(x, y, alpha).unwrap();
        let moments = marginal_log_det(&s, &m, k).unwrap();
        let formula = log_det_two_point(&s, x, y, alpha, k);
        prop_assert!((moments - formula).abs() <= 1e-9 * moments.abs().max(1.0), "{moments} vs {formula}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, ..ProptestConfig::default() })]

    #[test]
    fn rotation_equivariance(
        model in model_strategy(),
        k in 2usize..=6,
        b0 in -2.0f64..2.0,
        b1 in 0.2f64..3.0,
        seed in any::<u64>(),
    ) {
        let s = ShiftedIntensity::new(model.clone(), b0, b1).unwrap();
        let report = solve_canonical(&s, k, SolveOptions::default()).unwrap();
        let opts = DiscretizeOptions { weighting: Weighting::Exact, ..Default::default() };
        let canonical = discretize_design(&s, &report.marginal, k, &opts).unwrap().design;
        let mut cb = vec![0.0; k + 1];
        cb[0] = b0;
        cb[1] = b1;
        let reference = exact_log_det(&model, &cb, &canonical).unwrap();
        prop_assert!((reference - report.log_det).abs() < 1e-9);

        let q = random_orientation(k, seed);
        let slope = &q * DVector::from_fn(k, |i, _| if i == 0 { b1 } else { 0.0 });
        let mut beta = vec![b0];
        beta.extend(slope.iter());
        let problem = canonicalize(&beta).unwrap();
        prop_assert!((problem.beta1_tilde() - b1).abs() < 1e-12);
        let moved = push_forward(&canonical, &problem).unwrap();
        let ld = exact_log_det(&model, &beta, &moved).unwrap();
        prop_assert!((ld - reference).abs() < 1e-9, "{ld} vs {reference}");
    }

    #[test]
    fn orbit_rotation_leaves_information_unchanged(
        k in 2usize..=6,
        x1 in -0.95f64..0.95,
        seed in any::<u64>(),
        kind in prop::sample::select(vec![Polytope::Simplex, Polytope::CrossPolytope, Polytope::Cube]),
    ) {
        let model = IntensityModel::logit();
        let mut beta = vec![0.0; k + 1];
        beta[0] = 0.3;
        beta[1] = 1.1;
        let fixed = orbit_vertices(k, x1, kind, None).unwrap();
        let r = random_orientation(k - 1, seed);
        let turned = orbit_vertices(k, x1, kind, Some(&r)).unwrap();
        let weights = vec![1.0 / fixed.len() as f64; fixed.len()];
        let a = exact_info(&model, &beta, &ExactDesign::new(fixed.points, weights.clone()).unwrap()).unwrap();
        let b = exact_info(&model, &beta, &ExactDesign::new(turned.points, weights).unwrap()).unwrap();
        prop_assert!((a.matrix() - b.matrix()).amax() < 1e-10);
    }
}

#[test]
fn exponential_root_is_unique() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for &(b0, b1, k) in &[(0.0, 1.0, 2usize), (-1.0, 2.5, 3), (0.5, 0.3, 6), (0.0, 3.0, 1)] {
        let s = ShiftedIntensity::new(IntensityModel::exponential(), b0, b1).unwrap();
        let kf = k as f64;
        let h = |y: f64| {
            if k == 1 {
                s.dlog_q(y) * (1.0 - y) - 2.0
            } else {
                s.dlog_q(y) * kf * (1.0 - y * y) - 2.0 * (1.0 + kf * y)
            }
        };
        let reference = bisect(h, -1.0, 1.0, 1e-14).unwrap();
        let mut hits = 0;
        while hits < 100 {
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (lo, hi) = (a.min(b), a.max(b));
            if h(lo).signum() == h(hi).signum() {
                continue;
            }
            let r = bisect(h, lo, hi, 1e-14).unwrap();
            assert!((r - reference).abs() < 1e-9, "{r} vs {reference}");
            hits += 1;
        }
    }
}

#[test]
fn symmetric_at_the_mode() {
    for model in [IntensityModel::logit(), IntensityModel::probit()] {
        for k in [1usize, 2, 3, 6] {
            for b1 in [0.5, 1.0, 2.5] {
                let s = ShiftedIntensity::new(model.clone(), 0.0, b1).unwrap();
                let r = solve_canonical(&s, k, SolveOptions::default()).unwrap();
                let (p, w) = (r.marginal.points(), r.marginal.weights());
                assert_eq!(p.len(), 2);
                assert!((p[0] + p[1]).abs() < 1e-6, "{} k={k} b1={b1}: {p:?}", model.name());
                assert!((w[0] - 0.5).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn sweep_is_continuous() {
    let model = IntensityModel::logit();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=240 {
        let b0 = -1.2 + 0.01 * i as f64;
        let s = ShiftedIntensity::new(model.clone(), b0, 1.0).unwrap();
        let r = solve_canonical(&s, 3, SolveOptions::default()).unwrap();
        let p = (r.marginal.points()[0], r.marginal.points()[1]);
        if let Some(q) = prev {
            assert!((p.0 - q.0).abs() <= 0.05 && (p.1 - q.1).abs() <= 0.05, "jump at {b0}: {q:?} -> {p:?}");
        }
        prev = Some(p);
    }
}

#[test]
fn logit_and_probit_keep_two_levels_and_equality_on_support() {
    for model in [IntensityModel::logit(), IntensityModel::probit()] {
        for b0 in [-3.0, -0.7, -0.2, 0.0, 0.3, 1.5] {
            for k in [1usize, 2, 3, 6] {
                let s = ShiftedIntensity::new(model.clone(), b0, 1.3).unwrap();
                let r = solve_canonical(&s, k, SolveOptions::default()).unwrap();
                assert_eq!(r.marginal.len(), 2);
                assert!(r.kw_pass);
                for psi in support_sensitivities(&s, &r.marginal, k).unwrap() {
                    assert!((psi - (k + 1) as f64).abs() < 1e-6, "{psi}");
                }
            }
        }
    }
}

#[test]
fn solver_dominates_oracle() {
    for model in models() {
        for &(b0, b1, k) in &[(-1.0, 1.0, 3usize), (0.2, 2.0, 2), (2.0, 0.7, 6), (0.0, 1.0, 1)] {
            let s = ShiftedIntensity::new(model.clone(), b0, b1).unwrap();
            let r = solve_canonical(&s, k, SolveOptions::default()).unwrap();
            let oracle = oracle_two_point(&s, k, 401).unwrap();
            let o = marginal_log_det(&s, &oracle, k).unwrap();
            assert!(r.log_det >= o - 1e-6, "{} {b0} {b1} {k}: {} < {o}", model.name(), r.log_det);
        }
    }
}

#[test]
fn ellipsoid_scaling() {
    let model = IntensityModel::logit();
    let scales = [2.0, 0.5];
    let beta = [0.3, 0.8, -1.4];
    // optimum on the ball for the transformed parameters
    let ball_beta = {
        let mut b = vec![beta[0]];
        b.extend(beta[1..].iter().zip(&scales).map(|(b, s)| b * s));
        b
    };
    assert_eq!(scale_parameters(&ball_beta, &scales).unwrap(), beta.to_vec());
    let report = solve(&model, &ball_beta, SolveOptions::default()).unwrap();
    let s = report.shifted().unwrap();
    let opts = DiscretizeOptions {
        strategy: Plan::Uniform(Polytope::Simplex),
        weighting: Weighting::Exact,
        seed: None,
    };
    let canonical = discretize_design(&s, &report.marginal, 2, &opts).unwrap().design;
    let on_ball = push_forward(&canonical, &report.problem().unwrap()).unwrap();
    let on_ellipse = scale_points(on_ball.points(), &scales).unwrap();

    let info = |points: &[Vec<f64>], weights: &[f64], b: &[f64]| -> DMatrix<f64> {
        let mut m = DMatrix::zeros(3, 3);
        for (p, w) in points.iter().zip(weights) {
            let f = DVector::from_vec(vec![1.0, p[0], p[1]]);
            let eta = b[0] + b[1] * p[0] + b[2] * p[1];
            m += (&f * f.transpose()) * (w * model.lambda(eta).unwrap());
        }
        m
    };
    let det_ball = info(on_ball.points(), on_ball.weights(), &ball_beta).determinant();
    let det_ellipse = info(&on_ellipse, on_ball.weights(), &beta).determinant();
    // det(diag(1, S))² = 1 here, so the determinant is preserved exactly
    let det_s: f64 = scales.iter().product();
    assert!((det_ellipse - det_s * det_s * det_ball).abs() < 1e-12 * det_ball.abs());

    // any other ball design mapped the same way does no better
    for (x, y, a) in [(0.9, -0.3, 0.4), (0.5, -0.5, 0.5), (1.0, -0.2, 0.25)] {
        let m = MarginalDesign::two_point(x, y, a).unwrap();
        let other = discretize_design(&s, &m, 2, &opts).unwrap().design;
        let moved = push_forward(&other, &report.problem().unwrap()).unwrap();
        let pts = scale_points(moved.points(), &scales).unwrap();
        assert!(info(&pts, moved.weights(), &beta).determinant() <= det_ellipse * (1.0 + 1e-12));
    }
    assert!(report.form != SupportForm::Simplex);
}
