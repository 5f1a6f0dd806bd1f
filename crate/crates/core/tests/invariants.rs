//! Randomized structural properties.

use bsde_lab::apriori::{b1_envelope, b2_recursion_limit, check_b1_threshold, DEFAULT_MAX_ITER, DEFAULT_TOL};
use bsde_lab::condexp::{fit, EstimatorSpec};
use bsde_lab::harness::{select_m, ScheduleRule};
use bsde_lab::model::{
    smooth_truncation, truncate_problem, CatalogProblem, RegularityParams, TruncationSpec, TruncationVariant,
};
use bsde_lab::scheme::solve_backward;
use bsde_lab::simulate::euler_paths;
use proptest::prelude::*;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0..20.0f64, 3)
}

proptest! {
    #[test]
    fn truncation_is_contractive(m in 1.01..30.0f64, x in vec3(), y in vec3()) {
        let t = TruncationSpec::new(m).unwrap();
        let (rx, ry) = (smooth_truncation(&x, &t), smooth_truncation(&y, &t));
        let gap: Vec<f64> = rx.iter().zip(&ry).map(|(a, b)| a - b).collect();
        let orig: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&gap) <= norm(&orig) * (1.0 + 1e-12) + 1e-12);
        prop_assert!(norm(&rx) < m);
    }

    #[test]
    fn truncation_fixes_inner_ball(m in 1.5..30.0f64, x in vec3()) {
        let t = TruncationSpec::new(m).unwrap();
        let n = norm(&x);
        prop_assume!(n > 0.0);
        let inside: Vec<f64> = x.iter().map(|v| v / n * (m - 1.0) * 0.999).collect();
        prop_assert_eq!(smooth_truncation(&inside, &t), inside);
    }

    #[test]
    fn estimators_are_linear(
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        seed in 0u64..1000,
        global in any::<bool>(),
    ) {
        let (x, u, v) = sample(seed, 3000);
        let est = if global { EstimatorSpec::global(3) } else { EstimatorSpec::partitioning(16) };
        let comb: Vec<f64> = u.iter().zip(&v).map(|(p, q)| a * p + b * q).collect();
        let (fu, fv, fc) = (fit(&x, 1, &u, &est).unwrap(), fit(&x, 1, &v, &est).unwrap(), fit(&x, 1, &comb, &est).unwrap());
        for t in [-2.5, -1.0, 0.0, 0.3, 1.7, 2.9] {
            let want = a * fu.predict(&[t]) + b * fv.predict(&[t]);
            prop_assert!((fc.predict(&[t]) - want).abs() <= 1e-8 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn projection_reproduces_fitted_values(seed in 0u64..1000, q in 1usize..5) {
        // refitting the fitted values is a no-op
        let (x, u, _) = sample(seed, 2000);
        for est in [EstimatorSpec::global(q), EstimatorSpec::partitioning(8 * q)] {
            let f = fit(&x, 1, &u, &est).unwrap();
            let fitted: Vec<f64> = x.iter().map(|t| f.predict(&[*t])).collect();
            let g = fit(&x, 1, &fitted, &est).unwrap();
            for t in x.iter().step_by(101) {
                prop_assert!((g.predict(&[*t]) - f.predict(&[*t])).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn partitioning_preserves_order(seed in 0u64..1000, bins in 2usize..64, shift in 0.0..1.0f64) {
        let (x, u, v) = sample(seed, 2000);
        let hi: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b.abs() + shift).collect();
        let est = EstimatorSpec::partitioning(bins);
        let (lo, up) = (fit(&x, 1, &u, &est).unwrap(), fit(&x, 1, &hi, &est).unwrap());
        for i in 0..200 {
            let t = -5.0 + 10.0 * i as f64 / 199.0;
            prop_assert!(lo.predict(&[t]) <= up.predict(&[t]));
        }
    }

    #[test]
    fn schedules_are_nondecreasing(n in 1.0..1e6f64, dn in 0.0..1e4f64, r in 0.0..0.49f64) {
        let sub = RegularityParams { r, ..RegularityParams::default() };
        let strict = RegularityParams { r, kappa: (1.0 - r) / 2.0 * 0.9, ..RegularityParams::default() };
        let boundary = RegularityParams { r, kappa: (1.0 - r) / 2.0, ..RegularityParams::default() };
        let cases = [
            (ScheduleRule::Thm56Subcritical, &sub, 1.5),
            (ScheduleRule::Thm56Critical, &sub, 1.0),
            (ScheduleRule::Thm57Strict, &strict, 0.6),
            (ScheduleRule::Thm57Boundary, &boundary, 1.0),
        ];
        for (rule, p, pe) in cases {
            let a = select_m(n, p, rule, pe, 0.8).unwrap();
            let b = select_m(n + dn, p, rule, pe, 0.8).unwrap();
            prop_assert!(b >= a, "{rule:?}: M({n}) = {a} > M({}) = {b}", n + dn);
        }
    }

    #[test]
    fn recursion_limit_forgets_start(rl in 0.05..0.9f64, c in 0.1..3.0f64, a0 in 0.0..100.0f64) {
        let p = RegularityParams { r: rl, l: 1.0, envelope_c: c, ..RegularityParams::default() };
        let from_zero = b2_recursion_limit(&p, 0.0, 1e-13).unwrap().a_inf;
        let from_a0 = b2_recursion_limit(&p, a0, 1e-13).unwrap().a_inf;
        prop_assert!((from_zero - from_a0).abs() <= 1e-9 * (1.0 + from_zero));
    }

    #[test]
    fn threshold_shrinks_with_constants(
        k_b in 0.0..1.0f64,
        k_fy in 0.0..1.0f64,
        sigma in 0.2..2.0f64,
        gamma in 0.2..2.0f64,
        bump in 0.01..0.5f64,
    ) {
        let base = RegularityParams { k_b, k_fy, sigma_sup: sigma, gamma, ..RegularityParams::default() };
        let t0 = check_b1_threshold(&base).unwrap().threshold;
        for p in [
            RegularityParams { k_b: k_b + bump, ..base.clone() },
            RegularityParams { k_fy: k_fy + bump, ..base.clone() },
            RegularityParams { sigma_sup: sigma + bump, ..base.clone() },
            RegularityParams { gamma: gamma + bump, ..base.clone() },
        ] {
            prop_assert!(check_b1_threshold(&p).unwrap().threshold < t0);
        }
    }

    #[test]
    fn envelope_grows_with_alpha(a in 0.0..0.3f64, da in 0.001..0.05f64) {
        let lo = RegularityParams { alpha: a, ..RegularityParams::default() };
        let hi = RegularityParams { alpha: a + da, ..RegularityParams::default() };
        let bl = b1_envelope(&lo, 0.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let bh = b1_envelope(&hi, 0.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(bl.converged && bh.converged);
        prop_assert!(bh.b >= bl.b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn inert_truncation_is_bit_identical(seed in 0u64..10_000, m in 30.0..60.0f64) {
        // paths and Z stay far inside the inner ball, so M and 2M agree exactly
        let spec = CatalogProblem::by_name("quadratic-sine").unwrap().spec().unwrap();
        let ens = euler_paths(&spec, 8, 3000, seed).unwrap();
        let est = EstimatorSpec::partitioning(32);
        let v = TruncationVariant::DeterministicSigma;
        let a = solve_backward(&truncate_problem(&spec, m, v).unwrap(), ens.clone(), &est).unwrap();
        let b = solve_backward(&truncate_problem(&spec, 2.0 * m, v).unwrap(), ens, &est).unwrap();
        for k in 0..=8 {
            prop_assert_eq!(a.y_step(k), b.y_step(k));
            prop_assert_eq!(a.z_step(k), b.z_step(k));
        }
    }
}

/// Features on [-3, 3] with two noisy responses, from a seeded generator.
fn sample(seed: u64, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    use bsde_lab::simulate::rng::{NormalStream, Purpose};
    let s = NormalStream::new(seed, Purpose::Increments);
    let mut z = [0.0; 3];
    let mut x = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for p in 0..n {
        s.fill(0, p as u64, &mut z);
        let t = (z[0] * 1.2).clamp(-3.0, 3.0);
        x.push(t);
        u.push(t.sin() + 0.3 * z[1]);
        v.push(t * t - 0.5 * z[2]);
    }
    (x, u, v)
}
