//! Growth exponents of the norm ratios and the parameter recipe.
//!
//! With `β = 1 + σ/2` and `X = (n−1)β + 2γ`:
//!
//! * `κ = 2(nα − X)/(np) + min{2γ − α, 2β + 2 − 3α}`
//! * `δ = 2(nα − X)/(np) + min{2γ − α, 2β + 2 − 3α, β/2 + 1 − α}`
//! * `α_c = X/n`, where the first term of both vanishes.
//!
//! `δ(α_c) > 0` exactly when `γ` lies in `(β/2, β/2 + (2−β)n/6)`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Scalar;

/// Slack coefficients of the three `δ` candidates in `α − α_c`.
const SLOPES: [f64; 3] = [1.0, 3.0, 1.0];

#[inline]
pub fn beta_of<T: Scalar>(sigma: T) -> T {
    T::one() + sigma * T::lit(0.5)
}

/// `X = (n−1)β + 2γ`.
#[inline]
pub fn spread<T: Scalar>(n: usize, beta: T, gamma: T) -> T {
    T::from_usize_lossy(n - 1) * beta + T::lit(2.0) * gamma
}

/// `q` from `2/p + n/q = n/2`.
pub fn admissible_q<T: Scalar>(n: usize, p: T) -> Result<T> {
    if n < 2 {
        return Err(LabError::InvalidParameter(format!("dimension n = {n} must be at least 2")));
    }
    if !p.is_finite() {
        return Err(LabError::NonAdmissible("p = ∞ is excluded".into()));
    }
    if p < T::lit(2.0) {
        return Err(LabError::NonAdmissible(format!("p = {p} is below 2")));
    }
    if n == 2 && p == T::lit(2.0) {
        return Err(LabError::ForbiddenEndpoint);
    }
    let nf = T::from_usize_lossy(n);
    let denom = nf * p - T::lit(4.0);
    if !(denom > T::zero()) {
        return Err(LabError::NonAdmissible(format!("no finite q for n = {n}, p = {p}")));
    }
    let q = T::lit(2.0) * nf * p / denom;
    if q < T::lit(2.0) {
        return Err(LabError::NonAdmissible(format!("q = {q} is below 2")));
    }
    Ok(q)
}

/// `p' = p/(p − 1)`.
#[inline]
pub fn dual<T: Scalar>(p: T) -> T {
    p / (p - T::one())
}

fn lead<T: Scalar>(n: usize, beta: T, gamma: T, alpha: T, p: T) -> T {
    let nf = T::from_usize_lossy(n);
    T::lit(2.0) * (nf * alpha - spread(n, beta, gamma)) / (nf * p)
}

pub fn compute_kappa<T: Scalar>(n: usize, beta: T, gamma: T, alpha: T, p: T) -> T {
    let two = T::lit(2.0);
    lead(n, beta, gamma, alpha, p) + (two * gamma - alpha).min(two * beta + two - T::lit(3.0) * alpha)
}

pub fn compute_delta<T: Scalar>(n: usize, beta: T, gamma: T, alpha: T, p: T) -> T {
    let two = T::lit(2.0);
    let m = (two * gamma - alpha).min(two * beta + two - T::lit(3.0) * alpha).min(beta * T::lit(0.5) + T::one() - alpha);
    lead(n, beta, gamma, alpha, p) + m
}

/// `α_c = X/n`.
pub fn alpha_critical<T: Scalar>(n: usize, beta: T, gamma: T) -> T {
    spread(n, beta, gamma) / T::from_usize_lossy(n)
}

/// The three candidates of `δ(α_c)` in closed form.
pub fn critical_margins<T: Scalar>(n: usize, beta: T, gamma: T) -> [T; 3] {
    let nf = T::from_usize_lossy(n);
    let n1 = T::from_usize_lossy(n - 1);
    let (two, three, four, six) = (T::lit(2.0), T::lit(3.0), T::lit(4.0), T::lit(6.0));
    [
        n1 * (two * gamma - beta) / nf,
        ((two - beta) * nf + three * beta - six * gamma) / nf,
        ((two - beta) * nf + two * beta - four * gamma) / (two * nf),
    ]
}

/// `δ(α_c)` through the closed three-term minimum.
pub fn delta_at_critical<T: Scalar>(n: usize, beta: T, gamma: T) -> T {
    let m = critical_margins(n, beta, gamma);
    m[0].min(m[1]).min(m[2])
}

/// `δ(α_c)` by substituting `α_c` into the general formula.
pub fn delta_at_critical_direct<T: Scalar>(n: usize, beta: T, gamma: T, p: T) -> T {
    compute_delta(n, beta, gamma, alpha_critical(n, beta, gamma), p)
}

/// Open interval `(β/2, β/2 + (2−β)n/6)` of `γ` with `δ(α_c) > 0`.
pub fn gamma_window<T: Scalar>(n: usize, beta: T) -> (T, T) {
    let lo = beta * T::lit(0.5);
    (lo, lo + (T::lit(2.0) - beta) * T::from_usize_lossy(n) / T::lit(6.0))
}

/// Largest `ε` with `δ(α_c + ε) > 0`; `δ(α_c + ε) = 2ε/p + min_k(m_k − c_k ε)`.
pub fn max_alpha_step(n: usize, beta: f64, gamma: f64, p: f64) -> f64 {
    let m = critical_margins(n, beta, gamma);
    let mut best = f64::INFINITY;
    for (mk, ck) in m.iter().zip(SLOPES) {
        let rate = ck - 2.0 / p;
        if rate > 0.0 {
            best = best.min(mk / rate);
        }
    }
    best
}

/// Exponents of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentPlan {
    pub n: usize,
    pub sigma: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub delta: f64,
    pub gamma_window: (f64, f64),
    pub alpha_critical: f64,
    pub delta_at_critical: f64,
}

/// Predicted log-log slopes in `R` with `T = R^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedSlopes {
    pub norm_f: f64,
    pub norm_w: f64,
    pub ratio_wf: f64,
    pub kappa: f64,
    /// Upper-bound slope of `‖F_R‖_{L^{p'}L^{q'}}`.
    pub norm_fr_bound: f64,
    /// Upper-bound slope of the remainder forcing.
    pub norm_rem_bound: f64,
    pub ratio_ben: f64,
    pub delta: f64,
}

impl ExponentPlan {
    /// Plan for explicit `(γ, α)`.
    pub fn new(n: usize, sigma: f64, p: f64, gamma: f64, alpha: f64) -> Result<Self> {
        if !(0.0..2.0).contains(&sigma) {
            return Err(LabError::InvalidParameter(format!("sigma = {sigma} must lie in [0, 2)")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(LabError::InvalidParameter(format!("gamma = {gamma} must lie in (0, 1)")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(LabError::InvalidParameter(format!("alpha = {alpha} must be positive")));
        }
        let q = admissible_q(n, p)?;
        let beta = beta_of(sigma);
        Ok(Self {
            n,
            sigma,
            beta,
            p,
            q,
            gamma,
            alpha,
            kappa: compute_kappa(n, beta, gamma, alpha, p),
            delta: compute_delta(n, beta, gamma, alpha, p),
            gamma_window: gamma_window(n, beta),
            alpha_critical: alpha_critical(n, beta, gamma),
            delta_at_critical: delta_at_critical(n, beta, gamma),
        })
    }

    pub fn p_dual(&self) -> f64 {
        dual(self.p)
    }

    pub fn q_dual(&self) -> f64 {
        dual(self.q)
    }

    pub fn spread(&self) -> f64 {
        spread(self.n, self.beta, self.gamma)
    }

    /// `|2/p + n/q − n/2|`.
    pub fn admissibility_defect(&self) -> f64 {
        let nf = self.n as f64;
        (2.0 / self.p + nf / self.q - nf / 2.0).abs()
    }

    /// Recomputes every derived field and compares exactly.
    pub fn verify(&self) -> Result<()> {
        if self.admissibility_defect() > 1e-12 {
            return Err(LabError::NonAdmissible(format!("2/p + n/q − n/2 = {:e}", self.admissibility_defect())));
        }
        let fresh = Self::new(self.n, self.sigma, self.p, self.gamma, self.alpha)?;
        if fresh != *self {
            return Err(LabError::InvalidParameter("stored exponents differ from recomputed values".into()));
        }
        Ok(())
    }

    /// `γ` strictly inside the window.
    pub fn gamma_in_window(&self) -> bool {
        self.gamma > self.gamma_window.0 && self.gamma < self.gamma_window.1
    }

    pub fn predicted(&self) -> PredictedSlopes {
        let (n, a, b, g) = (self.n as f64, self.alpha, self.beta, self.gamma);
        let x = self.spread();
        let (pd, qd) = (self.p_dual(), self.q_dual());
        PredictedSlopes {
            norm_f: x / 4.0,
            norm_w: a / self.p + x / (2.0 * self.q),
            ratio_wf: (a * n - x) / (n * self.p),
            kappa: self.kappa,
            norm_fr_bound: a / pd + x / (2.0 * qd) + (-2.0 * g).max(2.0 * a - (2.0 * b + 2.0)),
            norm_rem_bound: a / pd - (b / 2.0 + 1.0) + x / (2.0 * qd),
            ratio_ben: 2.0 * (n * a - x) / (n * self.p) + (b / 2.0 + 1.0 - a),
            delta: self.delta,
        }
    }
}

/// Fills in whichever of `γ`, `α` is missing: `γ` at the midpoint of the
/// window clipped to `(0, 1)`, then `α = α_c + min(0.05, ε_max/2)` with
/// `ε_max` from [`max_alpha_step`] (or `α_c` when no positive step exists).
pub fn resolve_plan(n: usize, sigma: f64, p: f64, gamma: Option<f64>, alpha: Option<f64>) -> Result<ExponentPlan> {
    if !(0.0..2.0).contains(&sigma) {
        return Err(LabError::InvalidParameter(format!("sigma = {sigma} must lie in [0, 2)")));
    }
    admissible_q(n, p)?;
    let beta = beta_of(sigma);
    let gamma = match gamma {
        Some(g) => g,
        None => {
            let (lo, hi) = gamma_window(n, beta);
            let (lo, hi) = (lo.max(0.0), hi.min(1.0));
            if !(hi > lo) {
                return Err(LabError::EmptyWindow { n, sigma });
            }
            0.5 * (lo + hi)
        }
    };
    let alpha = match alpha {
        Some(a) => a,
        None => {
            let step = 0.05f64.min(0.5 * max_alpha_step(n, beta, gamma, p)).max(0.0);
            alpha_critical(n, beta, gamma) + step
        }
    };
    ExponentPlan::new(n, sigma, p, gamma, alpha)
}

/// [`resolve_plan`] with both parameters chosen automatically; the result
/// has `κ > 0` and `δ > 0`.
pub fn select_parameters(n: usize, sigma: f64, p: f64) -> Result<ExponentPlan> {
    if !(0.0..2.0).contains(&sigma) {
        return Err(LabError::EmptyWindow { n, sigma });
    }
    let plan = resolve_plan(n, sigma, p, None, None)?;
    if !(plan.kappa > 0.0 && plan.delta > 0.0) {
        return Err(LabError::InvalidParameter(format!("selected plan has kappa = {}, delta = {}", plan.kappa, plan.delta)));
    }
    Ok(plan)
}
