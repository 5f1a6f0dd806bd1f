//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one PASS/FAIL line each and exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use bsde_lab::apriori::{b1_closed_form, b1_envelope, check_b1_threshold, lipschitz_z_bound, DEFAULT_MAX_ITER, DEFAULT_TOL};
use bsde_lab::condexp::{fit, EstimatorSpec, FittedRegression};
use bsde_lab::harness::{
    convergence_study, select_m, truncation_study, MSchedule, ReferenceStrategy, ScheduleRule, StudyConfig,
    StudyOutputs, TruncationStudyConfig,
};
use bsde_lab::model::{
    smooth_truncation, truncate_problem, CatalogProblem, ProblemSpec, RegularityParams, TruncationSpec,
    TruncationVariant,
};
use bsde_lab::oracle::cole_hopf_y;
use bsde_lab::scheme::{replicate_y0, solve_backward};
use bsde_lab::simulate::euler_paths;
use bsde_lab::simulate::rng::{NormalStream, Purpose};
use bsde_lab::Error;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed < budget
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let unit = RegularityParams::default();
    let th = check_b1_threshold(&unit).unwrap().threshold;
    let th_ok = (th - (-1f64).exp()).abs() < 1e-12;

    // C1 = sigma (alpha + beta T) = 0.2, C2 = 2^(l-1) sigma gamma T = 1
    let p = RegularityParams { alpha: 0.2, ..unit.clone() };
    let rep = b1_envelope(&p, 0.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    // independent oracle: bisection for the lowest root of 0.2 e^B - B on [0, 1]
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 0.2 * mid.exp() - mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c1 = rep.c1.unwrap();
    let b_ok = rep.converged
        && (rep.b - 0.2592).abs() <= 1e-3
        && (rep.b - lo).abs() <= 1e-9
        && rep.b < c1 * std::f64::consts::E;

    let e = std::f64::consts::E;
    let div = RegularityParams { alpha: 1.1 / e, ..unit };
    let diverged = !b1_envelope(&div, 0.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap().converged;
    let el = t.elapsed();
    verdict(
        th_ok && b_ok && diverged && within(el, Duration::from_secs(1)),
        format!(
            "threshold {th:.15}, B_inf {:.10} (bisection {lo:.10}, C1 e = {:.4}), C1 = 1.1/e diverges: {diverged}, {:.3} s",
            rep.b,
            c1 * e,
            el.as_secs_f64()
        ),
    )
}

/// (K_b, K_f_y, sigma_sup, K_g, K_f_x, T, bound) from scripts/z_bound_table.py.
const Z_BOUND_TABLE: [(f64, f64, f64, f64, f64, f64, f64); 5] = [
    (1.794, 1.537, 1.47, 0.695, 1.176, 0.141, 2.606_511_920_015_337_990_2),
    (0.606, 1.876, 1.549, 1.098, 0.809, 0.228, 4.016_646_826_904_702_153_4),
    (1.639, 0.096, 0.406, 0.399, 0.957, 0.334, 0.900_429_286_408_990_876_22),
    (0.556, 1.144, 1.026, 0.033, 0.714, 1.946, 117.709_563_680_037_438_6),
    (0.044, 1.956, 0.512, 1.581, 1.841, 1.355, 33.287_976_968_530_044_17),
];

fn criterion_2() -> Verdict {
    let mut worst = 0.0f64;
    for (k_b, k_fy, sigma_sup, k_g, k_fx, horizon, want) in Z_BOUND_TABLE {
        let p = RegularityParams {
            k_b,
            k_fy,
            sigma_sup,
            k_g,
            k_fx,
            horizon,
            ..RegularityParams::default()
        };
        worst = worst.max((lipschitz_z_bound(&p) - want).abs());
    }
    verdict(worst <= 1e-12, format!("max |bound - table| = {worst:.3e} over 5 draws"))
}

fn criterion_3() -> Verdict {
    let t = Instant::now();
    let spec = CatalogProblem::by_name("quadratic-sine").unwrap().spec().unwrap();
    let tspec = truncate_problem(&spec, 8.0, TruncationVariant::DeterministicSigma).unwrap();
    let est = EstimatorSpec::partitioning(256);
    let (n, np) = (64, 200_000);
    let sol = solve_backward(&tspec, euler_paths(&tspec, n, np, 1).unwrap(), &est).unwrap();
    let y = sol.y0();
    // the per-run error includes regression noise from every step, so it
    // is measured by independent replications rather than taken from the
    // step-0 responses alone
    let rep = replicate_y0(&tspec, n, np, &est, &[1, 2, 3, 4, 5]).unwrap();
    let (ch, ch_se) = cole_hopf_y(&spec, 0.0, &[0.0], 1_000_000, 20_240_611).unwrap();
    let comb = (rep.run_std.powi(2) + ch_se.powi(2)).sqrt();
    let diff = (y - ch).abs();
    let el = t.elapsed();
    verdict(
        diff <= 3.0 * comb && diff <= 5e-2 && within(el, Duration::from_secs(120)),
        format!(
            "scheme {y:.6} (run std {:.2e}, conditional {:.2e}) vs Cole-Hopf {ch:.6} +- {ch_se:.2e}: |diff| = {diff:.2e} = {:.2} combined se, {:.1} s",
            rep.run_std,
            sol.y0_stderr(),
            diff / comb,
            el.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Verdict {
    let t = Instant::now();
    let spec = CatalogProblem::quadratic_linear(1.0, 1.0).spec().unwrap();
    let (n, np) = (64, 100_000);
    let sol = solve_backward(&spec, euler_paths(&spec, n, np, 1).unwrap(), &EstimatorSpec::global(3)).unwrap();
    let y0 = sol.y0();
    let ens = sol.ensemble();
    let mut worst_z = 0.0f64;
    let (mut inside, mut total) = (0usize, 0usize);
    for k in 0..n {
        let z = sol.z_step(k);
        let mean = z.iter().map(|v| (v - 1.0).abs()).sum::<f64>() / np as f64;
        worst_z = worst_z.max(mean);
        let env = b1_closed_form(spec.params(), ens.time(k));
        for (p, zp) in z.iter().enumerate() {
            let x = ens.state(p, k)[0].abs();
            total += 1;
            if zp.abs() <= 2.0 * env.bound(x) {
                inside += 1;
            }
        }
    }
    let frac = inside as f64 / total as f64;
    let el = t.elapsed();
    verdict(
        (y0 - 0.5).abs() <= 1e-2 && worst_z <= 5e-2 && frac >= 0.999 && within(el, Duration::from_secs(60)),
        format!(
            "Y0 {y0:.6}, max_k mean|Z - 1| {worst_z:.3e}, envelope holds on {:.4}% of particle-steps, {:.1} s",
            100.0 * frac,
            el.as_secs_f64()
        ),
    )
}

fn criterion_5() -> Verdict {
    let t = Instant::now();
    let cfg = StudyConfig {
        problem: "catalog:lipschitz-sine".into(),
        n_values: vec![8, 16, 32, 64, 128],
        particles: 1_000_000,
        estimator: EstimatorSpec::partitioning(256),
        schedule: MSchedule::None,
        variant: TruncationVariant::DeterministicSigma,
        seeds: vec![1],
        reference: ReferenceStrategy::ClosedForm,
        outputs: StudyOutputs::default(),
    };
    let out = convergence_study(&cfg).unwrap();
    let f = out.fit.unwrap();
    let el = t.elapsed();
    let totals: Vec<String> = out.reports.iter().map(|r| format!("{:.2e}", r.total)).collect();
    verdict(
        (0.6..=1.2).contains(&f.slope) && f.r2 >= 0.9 && within(el, Duration::from_secs(600)),
        format!(
            "slope {:.4}, r2 {:.4}, totals [{}], {:.1} s",
            f.slope,
            f.r2,
            totals.join(", "),
            el.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    // s = 2 so that X_T reaches the radii being compared
    let cfg = TruncationStudyConfig {
        problem: concat!(env!("CARGO_MANIFEST_DIR"), "/problems/quadratic-linear-wide.json").into(),
        n: 128,
        particles: 100_000,
        estimator: EstimatorSpec::partitioning(128),
        m_values: vec![2.0, 3.0, 4.0, 5.0, 6.0],
        m_ref: 8.0,
        variant: TruncationVariant::DeterministicSigma,
        seed: 1,
        outputs: StudyOutputs::default(),
    };
    let out = truncation_study(&cfg).unwrap();
    let f = out.fit.unwrap();
    let el = t.elapsed();
    let totals: Vec<String> = out.reports.iter().map(|r| format!("{:.2e}", r.total)).collect();
    verdict(
        f.slope < 0.0 && f.r2 >= 0.8 && f.points == 5 && within(el, Duration::from_secs(600)),
        format!(
            "slope {:.4} per unit M^2, r2 {:.4}, totals [{}], {:.1} s",
            f.slope,
            f.r2,
            totals.join(", "),
            el.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Verdict {
    let sub = RegularityParams { r: 0.25, l: 1.0, ..RegularityParams::default() };
    let strict = RegularityParams { r: 0.25, kappa: 0.25, ..RegularityParams::default() };
    let boundary = RegularityParams { r: 0.5, kappa: 0.25, ..RegularityParams::default() };
    let over = RegularityParams { r: 0.5, kappa: 0.5, ..RegularityParams::default() };
    // hand values: ln 55, (ln 55)^(1/4), sqrt(ln 100)
    let checks = [
        (select_m(55.0, &sub, ScheduleRule::Thm56Subcritical, 2.0, 1.0), 4.007_333_185_232_471),
        (select_m(55.0, &strict, ScheduleRule::Thm57Strict, 0.5, 1.0), 1.414_861_285_368_147_3),
        (select_m(100.0, &boundary, ScheduleRule::Thm57Boundary, 2.0, 1.0), 2.145_966_026_289_347),
        (select_m(4f64.exp(), &sub, ScheduleRule::Thm56Critical, 2.0, 1.0), 2.0),
    ];
    let mut worst = 0.0f64;
    let mut accepted = true;
    for (got, want) in &checks {
        match got {
            Ok(v) => worst = worst.max((v - want).abs()),
            Err(_) => accepted = false,
        }
    }
    let p_low = matches!(
        select_m(55.0, &sub, ScheduleRule::Thm56Subcritical, 1.0, 1.0),
        Err(Error::InvalidParameter { name: "p", .. })
    );
    let p_high = matches!(
        select_m(55.0, &sub, ScheduleRule::Thm56Subcritical, 4.5, 1.0),
        Err(Error::InvalidParameter { name: "p", .. })
    );
    let log_only = match select_m(55.0, &over, ScheduleRule::Thm57Strict, 0.5, 1.0) {
        Err(e @ Error::Regime(_)) => e.to_string().contains("only a logarithmic rate"),
        _ => false,
    };
    verdict(
        accepted && worst <= 1e-12 && p_low && p_high && log_only,
        format!("accepted {accepted}, max |M - hand| = {worst:.1e}, rejects p=1 {p_low}, p=4.5 {p_high}, 2kappa>1-r {log_only}"),
    )
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let bin = env!("CARGO_BIN_EXE_bsde-lab");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.json");
    std::fs::write(
        &cfg,
        r#"{
  "problem": "catalog:lipschitz-sine",
  "n_values": [4, 8, 16],
  "P": 30000,
  "estimator": {"kind": "partitioning", "bins": 64, "range": {"policy": "min-max"}},
  "schedule": {"kind": "rule", "rule": "thm5_6_subcritical", "p_exp": 2.0},
  "seeds": [1, 2],
  "reference": {"kind": "closed-form"}
}"#,
    )
    .unwrap();
    let run = |tag: &str, threads: &str| -> Option<Vec<Vec<u8>>> {
        let out = dir.path().join(tag);
        let o = Command::new(bin)
            .args(["--threads", threads, "--out"])
            .arg(&out)
            .arg("study")
            .arg(&cfg)
            .output()
            .ok()?;
        if !o.status.success() {
            eprintln!("{}", String::from_utf8_lossy(&o.stderr));
            return None;
        }
        let mut files = vec![o.stdout];
        for f in ["study.csv", "study.json", "study.dat"] {
            files.push(std::fs::read(out.join(f)).ok()?);
        }
        Some(files)
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "8");
    let ok = a.is_some() && a == b && a == c;
    let el = t.elapsed();
    verdict(
        ok,
        format!(
            "stdout + csv + json + plot data identical for run 1 / run 2 / 8 threads: {ok}, {:.1} s",
            el.as_secs_f64()
        ),
    )
}

fn uniform(stream: &NormalStream, i: u64, j: u32) -> f64 {
    stream.uniform(0, i, j)
}

fn criterion_9() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        notes.push(format!("{name} {}", if pass { "ok" } else { "FAILED" }));
        ok &= pass;
    };
    let u = NormalStream::new(99, Purpose::Increments);

    // truncation: 1-Lipschitz, bounded by M, identity on the inner ball
    let tr = TruncationSpec::new(4.0).unwrap();
    let (mut lip, mut bound, mut inner) = (true, true, true);
    for i in 0..10_000u64 {
        let x: Vec<f64> = (0..2).map(|j| 16.0 * uniform(&u, i, j) - 8.0).collect();
        let y: Vec<f64> = (0..2).map(|j| 16.0 * uniform(&u, i, j + 2) - 8.0).collect();
        let (rx, ry) = (smooth_truncation(&x, &tr), smooth_truncation(&y, &tr));
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        lip &= d(&rx, &ry) <= d(&x, &y) * (1.0 + 1e-12);
        bound &= d(&rx, &[0.0, 0.0]) <= 4.0;
        if d(&x, &[0.0, 0.0]) <= 3.0 {
            inner &= rx == x;
        }
    }
    check("truncation-lipschitz", lip);
    check("truncation-bound", bound);
    check("truncation-inner-identity", inner);

    // estimators: linearity, projection, order preservation
    let n = 20_000;
    let x: Vec<f64> = (0..n as u64).map(|i| 6.0 * uniform(&u, i, 4) - 3.0).collect();
    let a: Vec<f64> = x.iter().enumerate().map(|(i, v)| v.sin() + uniform(&u, i as u64, 5)).collect();
    let b: Vec<f64> = x.iter().enumerate().map(|(i, v)| v.abs() - uniform(&u, i as u64, 6)).collect();
    let mut linear = true;
    for est in [EstimatorSpec::global(4), EstimatorSpec::partitioning(32)] {
        let comb: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 2.0 * p - 0.5 * q).collect();
        let (fa, fb, fc) = (
            fit(&x, 1, &a, &est).unwrap(),
            fit(&x, 1, &b, &est).unwrap(),
            fit(&x, 1, &comb, &est).unwrap(),
        );
        for v in x.iter().step_by(97) {
            let want = 2.0 * fa.predict(&[*v]) - 0.5 * fb.predict(&[*v]);
            linear &= (fc.predict(&[*v]) - want).abs() <= 1e-8;
        }
    }
    check("estimator-linearity", linear);
    let g = fit(&x, 1, &a, &EstimatorSpec::global(4)).unwrap();
    let FittedRegression::Global(gf) = &g else { unreachable!() };
    let mut proj = true;
    for e in &gf.exponents {
        let col = |v: f64| ((v - gf.mean[0]) / gf.scale[0]).powi(e[0] as i32);
        let (mut dot, mut cn, mut rn) = (0.0, 0.0, 0.0);
        for (v, r) in x.iter().zip(&a) {
            let res = r - g.predict(&[*v]);
            dot += col(*v) * res;
            cn += col(*v).powi(2);
            rn += res * res;
        }
        proj &= dot.abs() <= 1e-6 * (cn * rn).sqrt();
    }
    check("estimator-projection", proj);
    let hi: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + uniform(&u, i as u64, 7)).collect();
    let part = EstimatorSpec::partitioning(32);
    let (flo, fhi) = (fit(&x, 1, &a, &part).unwrap(), fit(&x, 1, &hi, &part).unwrap());
    let order = (0..400).all(|i| {
        let v = -4.0 + 8.0 * i as f64 / 399.0;
        flo.predict(&[v]) <= fhi.predict(&[v])
    });
    check("estimator-order", order);

    // scheme: martingale property with f = 0
    let heat = CatalogProblem::by_name("heat-linear").unwrap().spec().unwrap();
    let sol = solve_backward(&heat, euler_paths(&heat, 16, 100_000, 4).unwrap(), &EstimatorSpec::partitioning(64)).unwrap();
    let np = 100_000f64;
    let yn = sol.y_step(16);
    let mn = yn.iter().sum::<f64>() / np;
    let se = (yn.iter().map(|v| (v - mn).powi(2)).sum::<f64>() / (np - 1.0) / np).sqrt();
    let mart = (0..16).all(|k| (sol.y_step(k).iter().sum::<f64>() / np - mn).abs() <= 4.0 * se);
    check("scheme-martingale", mart);

    // scheme: comparison for g1 <= g2, identical f monotone in y
    let problem = |g: &str| {
        let text = format!(
            r#"{{"d": 1, "T": 1.0, "x0": [0.0], "b": ["0"], "sigma": [["1"]],
                "f": "-0.5 * y + cos(x0)", "g": "{g}",
                "params": {{"K_f_y": 0.5, "K_f_x": 1.0, "K_g": 1.0}}, "regime": "B2-subcritical"}}"#
        );
        ProblemSpec::from_json_str(&text).unwrap()
    };
    let (p1, p2) = (problem("sin(x0)"), problem("sin(x0) + 0.2 * cos(x0)^2"));
    let ens = Arc::new(euler_paths(&p1, 16, 50_000, 6).unwrap());
    let est = EstimatorSpec::partitioning(64);
    let (s1, s2) = (
        solve_backward(&p1, Arc::clone(&ens), &est).unwrap(),
        solve_backward(&p2, ens, &est).unwrap(),
    );
    let cmp = (0..=16).all(|k| s1.y_step(k).iter().zip(s2.y_step(k)).all(|(a, b)| *a <= b + 1e-12));
    check("scheme-comparison", cmp);

    // exponential martingale under |z|^2/2
    let qs = CatalogProblem::by_name("quadratic-sine").unwrap().spec().unwrap();
    let sol = solve_backward(&qs, euler_paths(&qs, 32, 100_000, 9).unwrap(), &EstimatorSpec::partitioning(128)).unwrap();
    let stat = |k: usize| {
        let e: Vec<f64> = sol.y_step(k).iter().map(|v| v.exp()).collect();
        let m = e.iter().sum::<f64>() / np;
        let v = e.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (np - 1.0);
        (m, (v / np).sqrt())
    };
    let (m_end, se_end) = stat(32);
    let expm = (0..32).all(|k| (stat(k).0 - m_end).abs() <= 4.0 * se_end);
    check("exp-martingale", expm);

    verdict(ok, notes.join(", "))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 threshold and fixed points", criterion_1),
        ("2 Lipschitz Z-bound formula", criterion_2),
        ("3 Cole-Hopf oracle equivalence", criterion_3),
        ("4 closed-form exactness", criterion_4),
        ("5 Lipschitz rate", criterion_5),
        ("6 truncation-error shape", criterion_6),
        ("7 schedule regime enforcement", criterion_7),
        ("8 determinism", criterion_8),
        ("9 invariant suites", criterion_9),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, f) in criteria {
        if let Some(want) = &filter {
            if !name.starts_with(want.as_str()) {
                continue;
            }
        }
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        println!("[{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
