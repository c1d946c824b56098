//! `R`-sweeps of the quasimode norms, slope fits and bound audits.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::exponents::ExponentPlan;
use crate::fit::{log_log, LineFit};
use crate::mixed_norm::{space_norm, spacetime_norm, spacetime_norms, Domain, NormSpec, QuadratureConfig, SpaceTimeField};
use crate::quasimode::{QuasimodeFamily, TimeQuadratic};
use crate::scalar::Scalar;

/// First line of every sweep CSV.
pub const CSV_HEADER_COMMENT: &str = "# quasimode-lab sweep csv v1";
pub const CSV_COLUMNS: [&str; 11] =
    ["R", "T", "norm_f", "norm_W", "norm_FR", "norm_rem", "norm_Ftilde", "ratio_Wf", "ratio_WF", "ratio_ben", "ratio_quotient"];

/// Environment variable with the sweep thread count.
pub const THREADS_ENV: &str = "QUASIMODE_THREADS";

pub const DEFAULT_FIT_TOL: f64 = 0.02;
pub const CALIBRATION_SAFETY: f64 = 1.05;
pub const MIN_FIT_POINTS: usize = 6;

/// Thread count requested through [`THREADS_ENV`], if any.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => match s.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(LabError::InvalidParameter(format!("{THREADS_ENV} = `{s}` is not a positive integer"))),
        },
        _ => Ok(None),
    }
}

/// `base^k` for `k = min_exp..=max_exp`.
pub fn geometric_grid(base: f64, min_exp: i32, max_exp: i32) -> Result<Vec<f64>> {
    if !(base > 1.0) || max_exp < min_exp {
        return Err(LabError::InvalidParameter(format!("grid base {base} must exceed 1 and exponents must be ordered")));
    }
    Ok((min_exp..=max_exp).map(|k| base.powi(k)).collect())
}

/// Norms and ratios at one radius; failed radii carry `NaN` and the error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub r: f64,
    pub t: f64,
    /// `‖f_R‖_{L²}`
    pub norm_f: f64,
    /// `‖W_R‖_{L^p((0,T); L^q)}`
    pub norm_w: f64,
    /// `‖F_R‖_{L^{p'}((0,T); L^{q'})}`
    pub norm_fr: f64,
    /// Remainder forcing in `L^{p'}L^{q'}`.
    pub norm_rem: f64,
    /// `‖F̃_R‖_{L^{p'}L^{q'}}`
    pub norm_ftilde: f64,
    pub ratio_wf: f64,
    pub ratio_wfr: f64,
    pub ratio_ben: f64,
    /// `‖W_R‖ / ‖F̃_R‖`
    pub ratio_wftilde: f64,
    /// `‖W_R‖ / (‖f_R‖ + ‖F̃_R‖)`
    pub ratio_quotient: f64,
    pub refinement_level: usize,
    pub error: Option<String>,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 && a > 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

impl SweepRecord {
    fn from_norms(r: f64, t: f64, f: f64, w: f64, fr: f64, rem: f64, ft: f64, level: usize) -> Self {
        Self {
            r,
            t,
            norm_f: f,
            norm_w: w,
            norm_fr: fr,
            norm_rem: rem,
            norm_ftilde: ft,
            ratio_wf: ratio(w, f),
            ratio_wfr: ratio(w, fr),
            ratio_ben: ratio(w, rem),
            ratio_wftilde: ratio(w, ft),
            ratio_quotient: ratio(w, f + ft),
            refinement_level: level,
            error: None,
        }
    }

    fn failed(r: f64, t: f64, e: &LabError) -> Self {
        let nan = f64::NAN;
        let mut rec = Self::from_norms(r, t, nan, nan, nan, nan, nan, 0);
        rec.error = Some(e.to_string());
        rec
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub plan: ExponentPlan,
    pub profile: String,
    pub config: QuadratureConfig,
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn radii(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.r).collect()
    }

    pub fn column(&self, f: impl Fn(&SweepRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn failures(&self) -> Vec<(f64, String)> {
        self.records.iter().filter_map(|r| r.error.clone().map(|e| (r.r, e))).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(&self.records, out)
    }
}

/// Norms of the family at one radius with `T = R^α`.
pub fn measure_radius<T: Scalar>(plan: &ExponentPlan, family: &QuasimodeFamily<T>, r: f64, cfg: &QuadratureConfig) -> Result<SweepRecord> {
    let rt = T::lit(r);
    let t_max = rt.powf(T::lit(plan.alpha));
    let domain = Domain::for_family(family, rt)?;
    let datum = |y: &[T], z: T| family.initial_datum_unchecked(rt, y, z);
    let f = space_norm(&datum, &domain, T::lit(2.0), cfg)?;
    let w_spec = NormSpec::new(T::lit(plan.p), T::lit(plan.q), t_max)?;
    let w = spacetime_norm(&SpaceTimeField::Stationary(&datum), &domain, &w_spec, cfg)?;
    let dual = NormSpec::new(T::lit(plan.p_dual()), T::lit(plan.q_dual()), t_max)?;
    let forcings = |y: &[T], z: T, out: &mut [TimeQuadratic<T>]| {
        let parts = family.forcing_parts_unchecked(rt, y, z);
        out[0] = parts.truncated();
        out[1] = parts.remainder_only();
        out[2] = parts.auxiliary();
    };
    let g = spacetime_norms(&forcings, 3, &domain, &dual, cfg)?;
    let level = [f.level, w.level, g[0].level, g[1].level, g[2].level].into_iter().max().unwrap_or(0);
    Ok(SweepRecord::from_norms(
        r,
        t_max.as_f64(),
        f.value.as_f64(),
        w.value.as_f64(),
        g[0].value.as_f64(),
        g[1].value.as_f64(),
        g[2].value.as_f64(),
        level,
    ))
}

/// Measures every radius of `radii` (in parallel); a radius whose quadrature
/// fails is recorded with `NaN` norms and the error text.
pub fn run_sweep<T: Scalar>(plan: &ExponentPlan, family: &QuasimodeFamily<T>, radii: &[f64], cfg: &QuadratureConfig) -> Result<SweepResult> {
    plan.verify()?;
    cfg.validate()?;
    if family.n != plan.n || (family.gamma.as_f64() - plan.gamma).abs() > 1e-12 || (family.sigma.as_f64() - plan.sigma).abs() > 1e-12 {
        return Err(LabError::InvalidParameter("family and plan disagree on (n, sigma, gamma)".into()));
    }
    for &r in radii {
        if !(r > 2.0) {
            return Err(LabError::InvalidParameter(format!("grid radius {r} must exceed 2")));
        }
        family.check_radius(T::lit(r))?;
    }
    let records = radii
        .par_iter()
        .map(|&r| {
            measure_radius(plan, family, r, cfg).unwrap_or_else(|e| SweepRecord::failed(r, r.powf(plan.alpha), &e))
        })
        .collect();
    Ok(SweepResult { plan: plan.clone(), profile: family.potential.name.clone(), config: cfg.clone(), records })
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    let io = |e: std::io::Error| LabError::InvalidParameter(format!("csv output: {e}"));
    writeln!(out, "{CSV_HEADER_COMMENT}").map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    let cerr = |e: csv::Error| LabError::InvalidParameter(format!("csv output: {e}"));
    w.write_record(CSV_COLUMNS).map_err(cerr)?;
    for r in records {
        let row = [r.r, r.t, r.norm_f, r.norm_w, r.norm_fr, r.norm_rem, r.norm_ftilde, r.ratio_wf, r.ratio_wfr, r.ratio_ben, r.ratio_quotient];
        w.write_record(row.iter().map(|&x| fmt(x))).map_err(cerr)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

/// Parses a sweep CSV; the derived ratios are recomputed from the norms.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let bad = |m: String| LabError::InvalidParameter(format!("sweep csv: {m}"));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_COLUMNS {
        return Err(bad(format!("unexpected columns {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let v: Vec<f64> = row.iter().map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")))).collect::<Result<_>>()?;
        let mut rec = SweepRecord::from_norms(v[0], v[1], v[2], v[3], v[4], v[5], v[6], 0);
        if [v[2], v[3], v[4], v[5], v[6]].iter().any(|x| x.is_nan()) {
            rec.error = Some("not measured".into());
        }
        out.push(rec);
    }
    Ok(out)
}

/// How a fitted slope is compared with its prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    TwoSided,
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub quantity: String,
    pub kind: BoundKind,
    pub predicted: f64,
    /// `None` when fewer than the required finite points were available.
    pub fit: Option<LineFit>,
    pub tolerance: f64,
    /// No finite positive data (e.g. an identically zero remainder).
    pub vacuous: bool,
    pub passed: bool,
}

impl SlopeCheck {
    fn new(quantity: &str, kind: BoundKind, predicted: f64, radii: &[f64], values: &[f64], tol: f64) -> Result<Self> {
        let usable = radii.iter().zip(values).filter(|(r, v)| r.is_finite() && v.is_finite() && **r > 0.0 && **v > 0.0).count();
        let all_degenerate = values.iter().all(|v| *v == 0.0 || v.is_infinite());
        if usable < MIN_FIT_POINTS {
            if all_degenerate {
                return Ok(Self { quantity: quantity.into(), kind, predicted, fit: None, tolerance: tol, vacuous: true, passed: true });
            }
            return Err(LabError::InsufficientPoints { needed: MIN_FIT_POINTS, got: usable });
        }
        let fit = log_log(radii, values)?;
        let s = fit.slope;
        let passed = match kind {
            BoundKind::TwoSided => (s - predicted).abs() <= tol,
            BoundKind::Lower => s >= predicted - tol,
            BoundKind::Upper => s <= predicted + tol,
        };
        Ok(Self { quantity: quantity.into(), kind, predicted, fit: Some(fit), tolerance: tol, vacuous: false, passed })
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub checks: Vec<SlopeCheck>,
    pub passed: bool,
}

impl SlopeReport {
    pub fn get(&self, quantity: &str) -> Option<&SlopeCheck> {
        self.checks.iter().find(|c| c.quantity == quantity)
    }
}

/// Log-log slopes of the tracked norms and ratios against their predicted
/// exponents.
pub fn fit_slopes(records: &[SweepRecord], plan: &ExponentPlan, fit_tol: f64) -> Result<SlopeReport> {
    if records.len() < MIN_FIT_POINTS {
        return Err(LabError::InsufficientPoints { needed: MIN_FIT_POINTS, got: records.len() });
    }
    let radii: Vec<f64> = records.iter().map(|r| r.r).collect();
    let col = |f: fn(&SweepRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
    let p = plan.predicted();
    let checks = vec![
        SlopeCheck::new("norm_f", BoundKind::TwoSided, p.norm_f, &radii, &col(|r| r.norm_f), fit_tol)?,
        SlopeCheck::new("norm_W", BoundKind::TwoSided, p.norm_w, &radii, &col(|r| r.norm_w), fit_tol)?,
        SlopeCheck::new("ratio_Wf", BoundKind::TwoSided, p.ratio_wf, &radii, &col(|r| r.ratio_wf), fit_tol)?,
        SlopeCheck::new("ratio_WF", BoundKind::Lower, p.kappa, &radii, &col(|r| r.ratio_wfr), fit_tol)?,
        SlopeCheck::new("ratio_ben", BoundKind::Lower, p.ratio_ben, &radii, &col(|r| r.ratio_ben), fit_tol)?,
        SlopeCheck::new("ratio_WFtilde", BoundKind::Lower, p.delta, &radii, &col(|r| r.ratio_wftilde), fit_tol)?,
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(SlopeReport { checks, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub quantity: String,
    pub predicted_slope: f64,
    pub measured_slope: Option<f64>,
    /// Calibrated constant `C` of `norm ≤ C · bound(R)`.
    pub constant: f64,
    /// Largest `norm / (C · bound(R) · (R/R₀)^{fit_tol})` over the grid.
    pub worst_ratio: f64,
    /// `worst_ratio ≤ 1`; reported only, since a constant calibrated at the
    /// smallest radius does not cover pre-asymptotic growth.
    pub pointwise_ok: bool,
    pub vacuous: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
    pub fit_tol: f64,
    pub passed: bool,
}

impl AuditReport {
    pub fn ensure(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.passed) {
            None => Ok(()),
            Some(c) => Err(LabError::BoundViolated(format!(
                "{}: slope {:?} against bound {} (worst ratio {})",
                c.quantity, c.measured_slope, c.predicted_slope, c.worst_ratio
            ))),
        }
    }

    pub fn get(&self, quantity: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.quantity == quantity)
    }
}

fn audit_one(quantity: &str, radii: &[f64], values: &[f64], bound: impl Fn(f64) -> f64, predicted_slope: f64, fit_tol: f64) -> Result<AuditCheck> {
    let pts: Vec<(f64, f64)> = radii.iter().copied().zip(values.iter().copied()).filter(|(_, v)| v.is_finite()).collect();
    if pts.iter().all(|(_, v)| *v == 0.0) {
        return Ok(AuditCheck {
            quantity: quantity.into(),
            predicted_slope,
            measured_slope: None,
            constant: 0.0,
            worst_ratio: 0.0,
            pointwise_ok: true,
            vacuous: true,
            passed: true,
        });
    }
    if pts.len() < MIN_FIT_POINTS {
        return Err(LabError::InsufficientPoints { needed: MIN_FIT_POINTS, got: pts.len() });
    }
    let (r0, v0) = pts[0];
    let constant = CALIBRATION_SAFETY * v0 / bound(r0);
    let worst_ratio = pts.iter().map(|&(r, v)| v / (constant * bound(r) * (r / r0).powf(fit_tol))).fold(0.0f64, f64::max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let slope = log_log(&xs, &ys)?.slope;
    let passed = slope <= predicted_slope + fit_tol;
    Ok(AuditCheck {
        quantity: quantity.into(),
        predicted_slope,
        measured_slope: Some(slope),
        constant,
        worst_ratio,
        pointwise_ok: worst_ratio <= 1.0,
        vacuous: false,
        passed,
    })
}

/// Upper bounds for `‖F_R‖` and the remainder forcing with a constant
/// calibrated at the smallest radius. A check passes when the fitted slope
/// stays within `fit_tol` of the bound's exponent.
pub fn upper_bound_audit(records: &[SweepRecord], plan: &ExponentPlan, fit_tol: f64) -> Result<AuditReport> {
    let radii: Vec<f64> = records.iter().map(|r| r.r).collect();
    let pred = plan.predicted();
    let (a, b, g) = (plan.alpha, plan.beta, plan.gamma);
    let base = a / plan.p_dual() + plan.spread() / (2.0 * plan.q_dual());
    let fr_bound = |r: f64| r.powf(base) * r.powf(-2.0 * g).max(r.powf(2.0 * a - (2.0 * b + 2.0)));
    let rem_bound = |r: f64| r.powf(pred.norm_rem_bound);
    let checks = vec![
        audit_one("norm_FR", &radii, &records.iter().map(|r| r.norm_fr).collect::<Vec<_>>(), fr_bound, pred.norm_fr_bound, fit_tol)?,
        audit_one("norm_rem", &radii, &records.iter().map(|r| r.norm_rem).collect::<Vec<_>>(), rem_bound, pred.norm_rem_bound, fit_tol)?,
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(AuditReport { checks, fit_tol, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUpReport {
    /// Smallest grid radius from which the `‖W_R‖/‖F̃_R‖` ratio increases
    /// strictly to the end of the grid.
    pub ratio_onset: Option<f64>,
    pub strictly_increasing: bool,
    pub target: f64,
    /// First grid radius where the Strichartz quotient exceeds `target`.
    pub quotient_crossing: Option<f64>,
    /// Radius where the fitted quotient reaches `target`.
    pub extrapolated_crossing: Option<f64>,
    pub quotient_fit: Option<LineFit>,
}

pub fn blow_up(records: &[SweepRecord], target: f64) -> BlowUpReport {
    let ratios: Vec<f64> = records.iter().map(|r| r.ratio_wftilde).collect();
    let mut onset = None;
    if !ratios.is_empty() && ratios.iter().all(|x| x.is_finite()) {
        let mut start = ratios.len() - 1;
        while start > 0 && ratios[start - 1] < ratios[start] {
            start -= 1;
        }
        if start + 1 < ratios.len() {
            onset = Some(records[start].r);
        }
    }
    let strictly_increasing = onset.is_some() && onset == records.first().map(|r| r.r);
    let quotient_crossing = records.iter().find(|r| r.ratio_quotient > target).map(|r| r.r);
    let radii: Vec<f64> = records.iter().map(|r| r.r).collect();
    let quotient: Vec<f64> = records.iter().map(|r| r.ratio_quotient).collect();
    let quotient_fit = log_log(&radii, &quotient).ok();
    let extrapolated_crossing = quotient_fit.filter(|f| f.slope > 0.0).map(|f| ((target.ln() - f.intercept) / f.slope).exp());
    BlowUpReport { ratio_onset: onset, strictly_increasing, target, quotient_crossing, extrapolated_crossing, quotient_fit }
}
