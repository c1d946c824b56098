use std::fs::File;
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use quasimode_core::exponents::PredictedSlopes;
use quasimode_core::oscillator::{eigen_convergence_order, eigen_residual, ground_state};
use quasimode_core::quasimode::ResidualConvergence;
use quasimode_core::sampling::halton;
use quasimode_core::sweep::{blow_up, fit_slopes, read_csv, run_sweep, upper_bound_audit, AuditReport, BlowUpReport, SlopeReport};
use quasimode_core::{ExponentPlan, QuasimodeFamily, SweepRecord};
use serde::Serialize;

use crate::config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_QUADRATURE: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

const EIGEN_ORDER_SLACK: f64 = 0.2;

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn family(cfg: &RunConfig, plan: &ExponentPlan) -> Result<QuasimodeFamily> {
    Ok(QuasimodeFamily::new(cfg.potential()?, plan.gamma)?)
}

pub fn eigen_check(cfg: &RunConfig) -> Result<i32> {
    let morse = cfg.potential()?.extract_morse()?;
    let e = ground_state(&morse.a)?;
    let d = morse.a.dim();
    let width = 2.0 / e.principal_values[0].sqrt();
    let samples: Vec<Vec<f64>> = (1..=cfg.eigen.samples)
        .map(|k| (0..d).map(|i| width * (2.0 * halton(k, i) - 1.0)).collect())
        .collect();
    let res = eigen_residual(&e, &morse.a, &samples, cfg.eigen.fd_step)?;
    let (steps_res, order) = eigen_convergence_order(&e, &morse.a, &samples, cfg.eigen.order_step)?;
    let res_ok = res <= cfg.eigen.tolerance;
    let order_ok = (order - 2.0).abs() <= EIGEN_ORDER_SLACK;
    println!("profile {}  n = {}  sigma = {}", cfg.profile, cfg.n, cfg.sigma);
    println!("a = {:?}", morse.a.entries());
    println!("lambda = {}", e.lambda);
    println!("residual = {res:.3e} at h = {:e} (tolerance {:e})  {}", cfg.eigen.fd_step, cfg.eigen.tolerance, verdict(res_ok));
    println!(
        "order = {order:.3} from h = {:e}, {:e}, {:e} (residuals {:.3e}, {:.3e}, {:.3e})  {}",
        cfg.eigen.order_step,
        cfg.eigen.order_step / 2.0,
        cfg.eigen.order_step / 4.0,
        steps_res[0],
        steps_res[1],
        steps_res[2],
        verdict(order_ok)
    );
    Ok(if res_ok && order_ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn certificate(cfg: &RunConfig, plan: &ExponentPlan) -> Result<ResidualConvergence> {
    let r = cfg.residual.radius;
    Ok(family(cfg, plan)?.residual_convergence(r, cfg.residual.samples, &cfg.residual.fd_steps, r.powf(plan.alpha), cfg.residual.tolerance)?)
}

#[derive(Serialize)]
struct ResidualReport<'a> {
    config: &'a RunConfig,
    radius: f64,
    t_max: f64,
    second_order: bool,
    #[serde(flatten)]
    convergence: ResidualConvergence,
}

pub fn pde_residual(cfg: &RunConfig, plan: &ExponentPlan) -> Result<i32> {
    let convergence = certificate(cfg, plan)?;
    let second_order = convergence.second_order();
    let r = cfg.residual.radius;
    eprintln!(
        "residual {:.3e} within tolerance {:e}: {}",
        convergence.certificates[0].max_relative_residual,
        convergence.tolerance,
        convergence.certificates[0].max_relative_residual <= convergence.tolerance
    );
    eprintln!("second-order convergence {}", verdict(second_order));
    let report = ResidualReport { config: cfg, radius: r, t_max: r.powf(plan.alpha), second_order, convergence };
    write_json(&report, cfg.output.report.as_deref())?;
    Ok(if second_order { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct ExponentTable<'a> {
    #[serde(flatten)]
    plan: &'a ExponentPlan,
    p_dual: f64,
    q_dual: f64,
    gamma_in_window: bool,
    predicted: PredictedSlopes,
    warnings: Vec<String>,
}

pub fn exponents(plan: &ExponentPlan, json: bool) -> Result<i32> {
    let mut warnings = Vec::new();
    if plan.kappa <= 0.0 {
        warnings.push(format!("kappa = {} is not positive", plan.kappa));
    }
    if plan.delta <= 0.0 {
        warnings.push(format!("delta = {} is not positive", plan.delta));
    }
    if plan.delta_at_critical <= 0.0 {
        warnings.push(format!("delta_at_critical = {} is not positive: gamma is not inside the open window", plan.delta_at_critical));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if json {
        let table = ExponentTable {
            plan,
            p_dual: plan.p_dual(),
            q_dual: plan.q_dual(),
            gamma_in_window: plan.gamma_in_window(),
            predicted: plan.predicted(),
            warnings,
        };
        write_json(&table, None)?;
        return Ok(EXIT_OK);
    }
    let (lo, hi) = plan.gamma_window;
    println!("n                  {}", plan.n);
    println!("sigma              {}", plan.sigma);
    println!("beta               {}", plan.beta);
    println!("p, q               {}, {}", plan.p, plan.q);
    println!("p', q'             {}, {}", plan.p_dual(), plan.q_dual());
    println!("gamma window       ({lo}, {hi})");
    println!("gamma              {}", plan.gamma);
    println!("alpha              {}", plan.alpha);
    println!("alpha_critical     {}", plan.alpha_critical);
    println!("kappa              {}", plan.kappa);
    println!("delta              {}", plan.delta);
    println!("delta_at_critical  {}", plan.delta_at_critical);
    Ok(EXIT_OK)
}

fn write_records(records: &[SweepRecord], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            quasimode_core::sweep::write_csv(records, BufWriter::new(file))?;
        }
        None => quasimode_core::sweep::write_csv(records, io::stdout().lock())?,
    }
    Ok(())
}

fn sweep_records(cfg: &RunConfig, plan: &ExponentPlan) -> Result<Vec<SweepRecord>> {
    let radii = cfg.radii()?;
    eprintln!("sweeping {} radii from {} to {}", radii.len(), radii[0], radii[radii.len() - 1]);
    let result = run_sweep(plan, &family(cfg, plan)?, &radii, &cfg.quadrature)?;
    for (r, err) in result.failures() {
        eprintln!("R = {r}: {err}");
    }
    Ok(result.records)
}

#[derive(Serialize)]
struct SweepReport<'a> {
    config: &'a RunConfig,
    plan: &'a ExponentPlan,
    predicted: PredictedSlopes,
    gaussian_tail_bound: f64,
    records: &'a [SweepRecord],
}

pub fn sweep(cfg: &RunConfig, plan: &ExponentPlan) -> Result<i32> {
    let records = sweep_records(cfg, plan)?;
    write_records(&records, cfg.output.csv.as_deref())?;
    if let Some(path) = cfg.output.report.as_deref() {
        let report = SweepReport {
            config: cfg,
            plan,
            predicted: plan.predicted(),
            gaussian_tail_bound: cfg.quadrature.gaussian_tail_bound(plan.n - 1),
            records: &records,
        };
        write_json(&report, Some(path))?;
    }
    Ok(if records.iter().all(SweepRecord::is_ok) { EXIT_OK } else { EXIT_QUADRATURE })
}

#[derive(Serialize)]
struct Analysis {
    slopes: SlopeReport,
    audit: AuditReport,
    blow_up: BlowUpReport,
}

fn analyse(records: &[SweepRecord], cfg: &RunConfig, plan: &ExponentPlan) -> Result<Analysis> {
    let ok: Vec<SweepRecord> = records.iter().filter(|r| r.is_ok()).cloned().collect();
    Ok(Analysis {
        slopes: fit_slopes(&ok, plan, cfg.fit_tol)?,
        audit: upper_bound_audit(&ok, plan, cfg.fit_tol)?,
        blow_up: blow_up(&ok, cfg.target),
    })
}

fn summarize(a: &Analysis) {
    for c in &a.slopes.checks {
        let slope = c.slope().map_or("n/a".into(), |s| format!("{s:.4}"));
        eprintln!("{:<14} {:?} slope {slope} predicted {:.4}  {}", c.quantity, c.kind, c.predicted, verdict(c.passed));
    }
    for c in &a.audit.checks {
        let slope = c.measured_slope.map_or("n/a".into(), |s| format!("{s:.4}"));
        eprintln!("{:<14} audit slope {slope} bound {:.4}  {}", c.quantity, c.predicted_slope, verdict(c.passed));
    }
    let b = &a.blow_up;
    eprintln!("ratio strictly increasing: {}", b.strictly_increasing);
    match (b.quotient_crossing, b.extrapolated_crossing) {
        (Some(r), _) => eprintln!("quotient exceeds {} at R = {r}", b.target),
        (None, Some(r)) => eprintln!("quotient reaches {} at extrapolated R = {r:.3e}", b.target),
        (None, None) => eprintln!("quotient does not grow"),
    }
}

#[derive(Serialize)]
struct FitReport<'a> {
    config: &'a RunConfig,
    plan: &'a ExponentPlan,
    predicted: PredictedSlopes,
    #[serde(flatten)]
    analysis: Analysis,
}

pub fn fit(cfg: &RunConfig, plan: &ExponentPlan, input: &Path) -> Result<i32> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let records = read_csv(BufReader::new(file))?;
    let analysis = analyse(&records, cfg, plan)?;
    summarize(&analysis);
    let code = if !analysis.audit.passed {
        EXIT_AUDIT
    } else if !analysis.slopes.passed {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    };
    write_json(&FitReport { config: cfg, plan, predicted: plan.predicted(), analysis }, cfg.output.report.as_deref())?;
    Ok(code)
}

#[derive(Serialize)]
struct Criteria {
    certificate: bool,
    slopes: bool,
    ratio_increasing: bool,
    quotient_diverges: bool,
    audit: bool,
    quadrature: bool,
}

#[derive(Serialize)]
struct CounterexampleReport<'a> {
    config: &'a RunConfig,
    plan: &'a ExponentPlan,
    predicted: PredictedSlopes,
    gaussian_tail_bound: f64,
    certificate: ResidualConvergence,
    #[serde(flatten)]
    analysis: Analysis,
    criteria: Criteria,
    passed: bool,
    records: Vec<SweepRecord>,
}

pub fn counterexample(cfg: &RunConfig, plan: &ExponentPlan) -> Result<i32> {
    let mut cfg = cfg.clone();
    let csv = cfg.output.csv.get_or_insert_with(|| PathBuf::from("counterexample.csv")).clone();
    let report = cfg.output.report.get_or_insert_with(|| PathBuf::from("counterexample.json")).clone();
    let cfg = &cfg;
    let certificate = certificate(cfg, plan)?;
    eprintln!("pde residual certificate {}", verdict(certificate.passed));
    let records = sweep_records(cfg, plan)?;
    write_records(&records, Some(&csv))?;
    let analysis = analyse(&records, cfg, plan)?;
    summarize(&analysis);
    let b = &analysis.blow_up;
    let criteria = Criteria {
        certificate: certificate.passed,
        slopes: analysis.slopes.passed,
        ratio_increasing: b.strictly_increasing,
        quotient_diverges: b.quotient_crossing.is_some() || b.extrapolated_crossing.is_some(),
        audit: analysis.audit.passed,
        quadrature: records.iter().all(SweepRecord::is_ok),
    };
    let code = if !criteria.quadrature {
        EXIT_QUADRATURE
    } else if !criteria.audit {
        EXIT_AUDIT
    } else if !(criteria.certificate && criteria.slopes && criteria.ratio_increasing && criteria.quotient_diverges) {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    };
    let passed = code == EXIT_OK;
    let out = CounterexampleReport {
        config: cfg,
        plan,
        predicted: plan.predicted(),
        gaussian_tail_bound: cfg.quadrature.gaussian_tail_bound(plan.n - 1),
        certificate,
        analysis,
        criteria,
        passed,
        records,
    };
    write_json(&out, Some(&report))?;
    eprintln!("wrote {} and {}", csv.display(), report.display());
    eprintln!("counterexample {}", verdict(passed));
    Ok(code)
}
