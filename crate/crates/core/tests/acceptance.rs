//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use quasimode_core::exponents::{
    beta_of, compute_delta, compute_kappa, delta_at_critical, delta_at_critical_direct, select_parameters, ExponentPlan,
};
use quasimode_core::mixed_norm::{sandwich_check, space_norm, BaseProfile, Domain, QuadratureConfig, SandwichProfile, UCap};
use quasimode_core::oscillator::{eigen_convergence_order, eigen_residual, ground_state};
use quasimode_core::potential::HomogeneousPotential;
use quasimode_core::quasimode::QuasimodeFamily;
use quasimode_core::sampling::halton;
use quasimode_core::sweep::{blow_up, fit_slopes, geometric_grid, measure_radius, run_sweep, upper_bound_audit, SweepRecord};

const SLOPE_TOL: f64 = 0.02;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn family(plan: &ExponentPlan) -> QuasimodeFamily<f64> {
    QuasimodeFamily::new(HomogeneousPotential::builtin("sin2", plan.n, plan.sigma).unwrap(), plan.gamma).unwrap()
}

fn reference() -> ExponentPlan {
    ExponentPlan::new(2, 0.0, 4.0, 0.6, 1.15).unwrap()
}

fn grid() -> Vec<f64> {
    geometric_grid(2.0, 4, 14).unwrap()
}

fn sweep(plan: &ExponentPlan) -> (Vec<SweepRecord>, Duration) {
    let start = Instant::now();
    let result = run_sweep(plan, &family(plan), &grid(), &QuadratureConfig::default()).unwrap();
    (result.records, start.elapsed())
}

fn eigenpair() -> Outcome {
    let start = Instant::now();
    let morse = HomogeneousPotential::<f64>::builtin("sin2", 2, 0.0).unwrap().extract_morse().unwrap();
    let e = ground_state(&morse.a).unwrap();
    let samples: Vec<Vec<f64>> = (1..=64).map(|k| vec![4.0 * halton(k, 0) - 2.0]).collect();
    let res = eigen_residual(&e, &morse.a, &samples, 1e-4).unwrap();
    let (_, order) = eigen_convergence_order(&e, &morse.a, &samples, 1e-2).unwrap();
    let elapsed = start.elapsed();
    outcome(
        res <= 1e-5 && (order - 2.0).abs() <= 0.2 && elapsed < Duration::from_secs(1),
        format!("lambda {:.12}, residual {res:.2e} at h=1e-4, order {order:.3}, {elapsed:.2?}", e.lambda),
    )
}

fn pde_identity() -> Outcome {
    let start = Instant::now();
    let plan = reference();
    let fam = family(&plan);
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [16.0f64, 64.0, 256.0] {
        let conv = fam.residual_convergence(r, 200, &[1e-3, 5e-4], r.powf(plan.alpha), 1e-3).unwrap();
        let first = conv.certificates[0].max_relative_residual;
        let ratio = conv.ratios[0];
        ok &= first <= 1e-3 && (ratio / 4.0 - 1.0).abs() <= 0.3;
        parts.push(format!("R={r}: {first:.2e}, ratio {ratio:.3}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(30);
    outcome(ok, format!("{}; {elapsed:.2?}", parts.join("; ")))
}

fn two_sided_slopes(records: &[SweepRecord], elapsed: Duration) -> Outcome {
    let plan = reference();
    let report = fit_slopes(records, &plan, SLOPE_TOL).unwrap();
    let f = report.get("norm_f").unwrap().slope().unwrap();
    let w = report.get("norm_W").unwrap().slope().unwrap();
    let ok = (f - 0.55).abs() <= SLOPE_TOL && (w - 0.5625).abs() <= SLOPE_TOL && elapsed < Duration::from_secs(120);
    outcome(ok, format!("slope f {f:.4} (0.55), slope W {w:.4} (0.5625), sweep {elapsed:.2?}"))
}

fn sandwich() -> Outcome {
    let fam = family(&reference());
    let cfg = QuadratureConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (d1, expected) in [(0u32, 0.55), (1, -0.05), (2, -0.65)] {
        let rep = sandwich_check(&fam, SandwichProfile::lambda(BaseProfile::V), (d1, 0), &grid(), 2.0, SLOPE_TOL, &cfg).unwrap();
        ok &= (rep.fit.slope - expected).abs() <= SLOPE_TOL;
        parts.push(format!("d1={d1}: {:.4} ({expected})", rep.fit.slope));
    }
    outcome(ok, parts.join(", "))
}

fn upper_bounds(records: &[SweepRecord]) -> (Outcome, String) {
    let plan = reference();
    let audit = upper_bound_audit(records, &plan, SLOPE_TOL).unwrap();
    let fr = audit.get("norm_FR").unwrap();
    let rem = audit.get("norm_rem").unwrap();
    let (s_fr, s_rem) = (fr.measured_slope.unwrap(), rem.measured_slope.unwrap());
    let ok = s_fr <= -0.0625 + SLOPE_TOL && s_rem <= -0.3625 + SLOPE_TOL;
    let info = format!(
        "dual-exponent bounds {:.4} and {:.4}: {}",
        fr.predicted_slope,
        rem.predicted_slope,
        if audit.passed { "satisfied" } else { "violated" }
    );
    (outcome(ok, format!("slope F_R {s_fr:.4} (<= -0.0425), slope remainder {s_rem:.4} (<= -0.3425)")), info)
}

fn exponent_engine() -> Outcome {
    let (n, beta, gamma, p) = (2, 1.0f64, 0.6f64, 4.0f64);
    let kappa = compute_kappa(n, beta, gamma, 1.15, p);
    let delta = compute_delta(n, beta, gamma, 1.15, p);
    // independent arithmetic: 2(2·1.15 − 2.2)/8 = 0.025, min{1.2 − 1.15, 4 − 3.45, 1.5 − 1.15} = 0.05
    let hand = 2.0 * (2.0 * 1.15 - 2.2) / 8.0 + (1.2f64 - 1.15).min(4.0 - 3.45).min(1.5 - 1.15);
    let at_crit = compute_delta(n, beta, gamma, 1.1, p);
    let mut worst = 0.0f64;
    for k in 1..=1000 {
        let n = 2 + (halton(k, 0) * 5.0) as usize;
        let beta = beta_of(2.0 * halton(k, 1));
        let gamma = halton(k, 2);
        let p = 2.0 + 8.0 * halton(k, 3);
        worst = worst.max((delta_at_critical(n, beta, gamma) - delta_at_critical_direct(n, beta, gamma, p)).abs());
    }
    let ok = (kappa - 0.075).abs() < 1e-12
        && (delta - 0.075).abs() < 1e-12
        && (hand - 0.075).abs() < 1e-12
        && (at_crit - 0.1).abs() < 1e-12
        && (delta_at_critical(n, beta, gamma) - 0.1).abs() < 1e-12
        && worst <= 1e-12;
    outcome(ok, format!("kappa {kappa:.15}, delta {delta:.15}, delta at alpha=1.1 {at_crit:.15}, route gap {worst:.1e}"))
}

fn blow_up_check(label: &str, plan: &ExponentPlan, records: &[SweepRecord]) -> (bool, String) {
    let b = blow_up(records, 10.0);
    let slope = fit_slopes(records, plan, SLOPE_TOL).unwrap().get("ratio_WFtilde").unwrap().slope().unwrap();
    let crossing = match (b.quotient_crossing, b.extrapolated_crossing) {
        (Some(r), _) => format!("quotient > 10 at R={r}"),
        (None, Some(r)) => format!("extrapolated crossing R={r:.2e}"),
        (None, None) => "no crossing".into(),
    };
    let ok = b.strictly_increasing && slope >= plan.delta - SLOPE_TOL && (b.quotient_crossing.is_some() || b.extrapolated_crossing.is_some());
    (ok, format!("{label}: increasing {}, slope {slope:.4} (>= {:.4}), {crossing}", b.strictly_increasing, plan.delta - SLOPE_TOL))
}

fn counterexample(records: &[SweepRecord], reference_time: Duration) -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    let (r_ok, r_text) = blow_up_check("n=2 sigma=0", &reference(), records);
    ok &= r_ok;
    parts.push(r_text);
    for plan in [select_parameters(2, 1.0, 4.0).unwrap(), select_parameters(3, 0.0, 2.0).unwrap()] {
        let (recs, _) = sweep(&plan);
        let (c_ok, text) = blow_up_check(&format!("n={} sigma={} p={} q={}", plan.n, plan.sigma, plan.p, plan.q), &plan, &recs);
        ok &= c_ok;
        parts.push(text);
    }
    let elapsed = start.elapsed() + reference_time;
    ok &= elapsed < Duration::from_secs(600);
    outcome(ok, format!("{}; {elapsed:.2?}", parts.join("; ")))
}

fn quadrature_oracle() -> Outcome {
    let cfg = QuadratureConfig::default();
    let domain = Domain {
        z_breaks: vec![1.0, 2.0],
        beta: 0.0,
        dim: 1,
        stiffness: vec![1.0],
        axes: vec![vec![1.0]],
        radial: true,
        cap: UCap::None,
        gaussian: true,
    };
    let gauss = |u: &[f64], _z: f64| (-0.5 * u[0] * u[0]).exp();
    let mut worst_gauss = 0.0f64;
    for q in [1.0, 2.0, 3.0, 4.0, 4.0 / 3.0, 6.0] {
        let got = space_norm(&gauss, &domain, q, &cfg).unwrap().value.powf(q);
        let exact = (2.0 * std::f64::consts::PI / q).sqrt();
        worst_gauss = worst_gauss.max((got - exact).abs());
    }
    let plan = reference();
    let fam = family(&plan);
    let fine = QuadratureConfig { u_panels: 2 * cfg.u_panels, ..cfg.doubled() };
    let mut worst_doubling = 0.0f64;
    for r in [16.0, 256.0, 4096.0] {
        let a = measure_radius(&plan, &fam, r, &cfg).unwrap();
        let b = measure_radius(&plan, &fam, r, &fine).unwrap();
        for (x, y) in [
            (a.norm_f, b.norm_f),
            (a.norm_w, b.norm_w),
            (a.norm_fr, b.norm_fr),
            (a.norm_rem, b.norm_rem),
            (a.norm_ftilde, b.norm_ftilde),
        ] {
            worst_doubling = worst_doubling.max((x - y).abs() / y.abs());
        }
    }
    outcome(
        worst_gauss <= 1e-8 && worst_doubling <= 10.0 * cfg.rel_tol,
        format!("Gaussian error {worst_gauss:.1e}, doubling change {worst_doubling:.1e} (<= {:.0e})", 10.0 * cfg.rel_tol),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, o: Outcome| {
        println!("[{id}] {:<34} {}  {}", name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    };
    report(1, "eigenpair residual and order", eigenpair());
    report(2, "truncated PDE identity", pde_identity());
    let (records, elapsed) = sweep(&reference());
    report(3, "two-sided slopes of f and W", two_sided_slopes(&records, elapsed));
    report(4, "sandwich slopes", sandwich());
    let (bounds, info) = upper_bounds(&records);
    report(5, "upper-bound slopes", bounds);
    println!("    info: {info}");
    report(6, "exponent engine", exponent_engine());
    report(7, "blow-up of the Strichartz quotient", counterexample(&records, elapsed));
    report(8, "quadrature oracle and doubling", quadrature_oracle());
    println!("{failed} of 8 criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
