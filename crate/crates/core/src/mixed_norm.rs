//! Mixed Lebesgue norms `‖f‖_{L^q_x}` and `‖F‖_{L^p((0,T); L^q_x)}` of fields
//! supported in the slab `R − R^γ ≤ z ≤ R + R^γ`.
//!
//! Integrals run in the coordinates `u = y / z^{β/2}` (Jacobian
//! `z^{(n−1)β/2}`), where the Gaussian factor of every family member has a
//! width independent of `R`. The `z` direction uses composite Gauss–Legendre
//! panels with breaks at the plateau edges `R ± R^γ/2`; the transverse
//! direction is either a radial line integral (isotropic fields) or a tensor
//! grid along the principal axes of `B`. Accuracy is estimated by doubling
//! every panel count and comparing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fit::{log_log, LineFit};
use crate::quadrature::{composite_nodes, GaussLegendre};
use crate::quasimode::{QuasimodeFamily, TimeQuadratic};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Target relative change between two refinement levels.
    pub rel_tol: f64,
    /// Panels across the `z` slab at the coarsest level.
    pub z_panels: usize,
    /// Panels across the transverse core at the coarsest level.
    pub u_panels: usize,
    /// Transverse truncation in standard deviations of `|v|^q`.
    pub u_radius: f64,
    /// Gauss–Legendre nodes on `(0, T)`.
    pub t_nodes: usize,
    /// Points per panel.
    pub order: usize,
    /// Number of panel doublings tried before giving up.
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-7, z_panels: 64, u_panels: 16, u_radius: 12.0, t_nodes: 65, order: 8, max_refinements: 3 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::InvalidParameter(m.into()));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol must be positive");
        }
        if self.z_panels == 0 || self.u_panels == 0 || self.t_nodes == 0 || self.order == 0 {
            return bad("panel, node and order counts must be positive");
        }
        if !(self.u_radius > 0.0 && self.u_radius.is_finite()) {
            return bad("u_radius must be positive");
        }
        if self.gaussian_tail_bound(1) >= self.rel_tol / 10.0 {
            return bad("u_radius leaves a Gaussian tail above rel_tol/10");
        }
        Ok(())
    }

    /// Upper bound for the Gaussian mass of `|v|^q` outside the truncation
    /// box in `dim` transverse dimensions: `dim · erfc(r/√2)`.
    pub fn gaussian_tail_bound(&self, dim: usize) -> f64 {
        let x = self.u_radius / std::f64::consts::SQRT_2;
        dim as f64 * (-x * x).exp() / (x * std::f64::consts::PI.sqrt())
    }

    /// The same configuration with `z_panels` and `t_nodes` doubled.
    pub fn doubled(&self) -> Self {
        Self { z_panels: 2 * self.z_panels, t_nodes: 2 * self.t_nodes, ..self.clone() }
    }
}

/// Exponents and horizon of an `L^p((0,T); L^q_x)` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec<T> {
    pub p: T,
    pub q: T,
    pub t_max: T,
}

impl<T: Scalar> NormSpec<T> {
    pub fn new(p: T, q: T, t_max: T) -> Result<Self> {
        let s = Self { p, q, t_max };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= T::one() && self.p.is_finite()) || !(self.q >= T::one() && self.q.is_finite()) {
            return Err(LabError::InvalidParameter(format!("norm exponents p = {}, q = {} must lie in [1, ∞)", self.p, self.q)));
        }
        if !(self.t_max > T::zero() && self.t_max.is_finite()) {
            return Err(LabError::InvalidParameter(format!("time horizon {} must be positive", self.t_max)));
        }
        Ok(())
    }
}

/// Transverse cap in addition to the Gaussian truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UCap<T> {
    /// `|y| < z`, with an extra break at `|y| = z/√2`.
    Cone,
    /// `|y| < r`.
    YRadius(T),
    None,
}

/// Integration region and transverse geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<T> {
    /// Sorted region boundaries in `z`; panels are shared out by length.
    pub z_breaks: Vec<T>,
    pub beta: T,
    pub dim: usize,
    /// Eigenvalues of `B`; `|v|^q` has standard deviation `1/√(q b_k)`
    /// along axis `k`.
    pub stiffness: Vec<T>,
    pub axes: Vec<Vec<T>>,
    /// Use the radial line integral (field depends on `|y|` only).
    pub radial: bool,
    pub cap: UCap<T>,
    /// Truncate at `u_radius` standard deviations.
    pub gaussian: bool,
}

impl<T: Scalar> Domain<T> {
    /// The slab of the family at radius `r`.
    pub fn for_family(family: &QuasimodeFamily<T>, r: T) -> Result<Self> {
        family.check_radius(r)?;
        let rg = r.powf(family.gamma);
        let half = T::lit(0.5) * rg;
        Ok(Self {
            z_breaks: vec![r - rg, r - half, r + half, r + rg],
            beta: family.beta,
            dim: family.transverse_dim(),
            stiffness: family.eigen.principal_values.clone(),
            axes: family.eigen.principal_axes.clone(),
            radial: family.eigen.is_isotropic() && family.potential.radial,
            cap: UCap::Cone,
            gaussian: true,
        })
    }

    pub fn with_z_breaks(mut self, breaks: Vec<T>) -> Self {
        self.z_breaks = breaks;
        self
    }

    pub fn with_cap(mut self, cap: UCap<T>) -> Self {
        self.cap = cap;
        self
    }

    pub fn without_gaussian_truncation(mut self) -> Self {
        self.gaussian = false;
        self
    }

    pub fn tensorized(mut self) -> Self {
        self.radial = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.z_breaks.len() < 2 || !self.z_breaks.windows(2).all(|w| w[0] < w[1]) || !(self.z_breaks[0] > T::zero()) {
            return Err(LabError::InvalidParameter("z breaks must be positive and strictly increasing".into()));
        }
        if self.stiffness.len() != self.dim || self.axes.len() != self.dim {
            return Err(LabError::DimensionMismatch { expected: self.dim, got: self.stiffness.len() });
        }
        if !self.gaussian && self.cap == UCap::None {
            return Err(LabError::InvalidParameter("transverse domain is unbounded".into()));
        }
        Ok(())
    }

    fn z_nodes(&self, rule: &GaussLegendre<T>, panels: usize) -> Vec<(T, T)> {
        let total = *self.z_breaks.last().unwrap() - self.z_breaks[0];
        let per: Vec<usize> = self
            .z_breaks
            .windows(2)
            .map(|w| {
                let share = ((w[1] - w[0]) / total * T::from_usize_lossy(panels)).round().to_usize().unwrap_or(1);
                share.max(4)
            })
            .collect();
        composite_nodes(rule, &self.z_breaks, &per)
    }

    /// Cap radius in `u` units at `z`, if any.
    fn cap_u(&self, z: T, zh: T) -> Option<T> {
        match self.cap {
            UCap::Cone => Some(z / zh),
            UCap::YRadius(r) => Some(r / zh),
            UCap::None => None,
        }
    }

    /// Breaks of the transverse line `[0, extent]` (radial) for axis `k`.
    fn u_breaks(&self, z: T, zh: T, q: T, k: usize, cfg: &QuadratureConfig) -> Vec<T> {
        let gauss = if self.gaussian { Some(T::lit(cfg.u_radius) / (q * self.stiffness[k]).sqrt()) } else { None };
        let cap = self.cap_u(z, zh);
        let extent = match (gauss, cap) {
            (Some(g), Some(c)) => g.min(c),
            (Some(g), None) => g,
            (None, Some(c)) => c,
            (None, None) => unreachable!("validated"),
        };
        let mut b = vec![T::zero()];
        if let (UCap::Cone, Some(c)) = (self.cap, cap) {
            let inner = c / T::SQRT_2();
            if inner < extent {
                b.push(inner);
            }
        }
        b.push(extent);
        b
    }

    fn u_panels(breaks: &[T], panels: usize) -> Vec<usize> {
        (0..breaks.len() - 1).map(|i| if i == 0 { panels } else { (panels / 2).max(2) }).collect()
    }

    /// Transverse nodes at `z`: `(y, weight)` with the Jacobian included.
    fn transverse_nodes(&self, rule: &GaussLegendre<T>, z: T, q: T, cfg: &QuadratureConfig, panels: usize, out: &mut Vec<(Vec<T>, T)>) {
        out.clear();
        let zh = z.powf(T::lit(0.5) * self.beta);
        let jac = zh.powi(self.dim as i32);
        if self.radial {
            let breaks = self.u_breaks(z, zh, q, 0, cfg);
            let area = sphere_area::<T>(self.dim);
            for (rho, w) in composite_nodes(rule, &breaks, &Self::u_panels(&breaks, panels)) {
                let mut y = vec![T::zero(); self.dim];
                y[0] = rho * zh;
                out.push((y, w * area * rho.powi(self.dim as i32 - 1) * jac));
            }
            return;
        }
        let per_axis: Vec<Vec<(T, T)>> = (0..self.dim)
            .map(|k| {
                let half = self.u_breaks(z, zh, q, k, cfg);
                let mut breaks: Vec<T> = half.iter().rev().map(|&x| -x).collect();
                breaks.extend_from_slice(&half[1..]);
                let m = breaks.len() - 1;
                let panels: Vec<usize> = (0..m)
                    .map(|i| if i == m / 2 - 1 || i == m / 2 { panels / 2 + panels % 2 } else { (panels / 4).max(2) })
                    .collect();
                composite_nodes(rule, &breaks, &panels)
            })
            .collect();
        let mut idx = vec![0usize; self.dim];
        loop {
            let mut y = vec![T::zero(); self.dim];
            let mut w = jac;
            for (k, &i) in idx.iter().enumerate() {
                let (s, wk) = per_axis[k][i];
                w = w * wk;
                for (yj, &a) in y.iter_mut().zip(&self.axes[k]) {
                    *yj = *yj + zh * s * a;
                }
            }
            out.push((y, w));
            let mut k = 0;
            loop {
                if k == self.dim {
                    return;
                }
                idx[k] += 1;
                if idx[k] < per_axis[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Sums `kernel(y, z, weight, acc)` over every node at refinement `level`,
    /// merging the per-`z` partial sums in a fixed order.
    fn accumulate<K>(&self, q: T, cfg: &QuadratureConfig, level: usize, width: usize, kernel: &K) -> Vec<T>
    where
        K: Fn(&[T], T, T, &mut [T]) + Sync,
    {
        let rule = GaussLegendre::<T>::new(cfg.order);
        let scale = 1usize << level;
        let zs = self.z_nodes(&rule, cfg.z_panels * scale);
        let partials: Vec<Vec<T>> = zs
            .par_iter()
            .map_init(Vec::new, |buf, &(z, wz)| {
                let mut acc = vec![T::zero(); width];
                self.transverse_nodes(&rule, z, q, cfg, cfg.u_panels * scale, buf);
                for (y, wu) in buf.iter() {
                    kernel(y, z, wz * *wu, &mut acc);
                }
                acc
            })
            .collect();
        let mut total = vec![T::zero(); width];
        for p in partials {
            for (t, x) in total.iter_mut().zip(p) {
                *t = *t + x;
            }
        }
        total
    }
}

/// Surface area of the unit sphere in `R^d` (`2` for `d = 1`).
pub fn sphere_area<T: Scalar>(d: usize) -> T {
    // |S^{d−1}| = 2π^{d/2}/Γ(d/2), with the recursion |S^{d+1}| = 2π/d |S^{d−1}|
    let mut area = if d % 2 == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let mut k = if d % 2 == 1 { 1 } else { 2 };
    while k < d {
        area *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    T::lit(area)
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume<T: Scalar>(d: usize) -> T {
    sphere_area::<T>(d) / T::from_usize_lossy(d)
}

/// A converged norm together with its refinement diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate<T> {
    pub value: T,
    /// Relative change against the previous level.
    pub relative_change: T,
    /// Number of panel doublings used.
    pub level: usize,
}

/// Space-time field handed to [`spacetime_norm`].
pub enum SpaceTimeField<'a, T> {
    /// Modulus at `(t, y, z)`.
    Pointwise(&'a (dyn Fn(T, &[T], T) -> T + Sync)),
    /// Phase-stripped coefficients at `(y, z)`; the modulus at time `t` is
    /// `|P + t²S + i t Q|`.
    Quadratic(&'a (dyn Fn(&[T], T) -> TimeQuadratic<T> + Sync)),
    /// Modulus independent of `t`.
    Stationary(&'a (dyn Fn(&[T], T) -> T + Sync)),
}

#[inline]
fn pow_abs<T: Scalar>(x: T, q: T) -> T {
    if q == T::lit(2.0) {
        x * x
    } else if q == T::one() {
        x.abs()
    } else {
        x.abs().powf(q)
    }
}

/// `|z|^q` from `|z|²`.
#[inline]
fn pow_from_sq<T: Scalar>(sq: T, half_q: T) -> T {
    if half_q == T::one() {
        sq
    } else if sq == T::zero() {
        T::zero()
    } else {
        sq.powf(half_q)
    }
}

/// Runs `level`, `level + 1`, … until consecutive results agree to
/// `rel_tol` in every component.
fn refine<T: Scalar>(cfg: &QuadratureConfig, mut eval: impl FnMut(usize) -> Vec<T>) -> Result<Vec<NormEstimate<T>>> {
    cfg.validate()?;
    let tol = T::lit(cfg.rel_tol);
    let mut prev = eval(0);
    let mut worst = T::infinity();
    for level in 1..=cfg.max_refinements {
        let cur = eval(level);
        worst = T::zero();
        for (a, b) in cur.iter().zip(&prev) {
            let change = relative_change(*a, *b);
            if !(change <= worst) {
                worst = change;
            }
        }
        if worst <= tol {
            return Ok(cur
                .iter()
                .zip(&prev)
                .map(|(&a, &b)| NormEstimate { value: a, relative_change: relative_change(a, b), level })
                .collect());
        }
        prev = cur;
    }
    Err(LabError::NonconvergedQuadrature { achieved: worst.as_f64(), target: cfg.rel_tol })
}

fn relative_change<T: Scalar>(a: T, b: T) -> T {
    if a == b {
        return T::zero();
    }
    let d = (a - b).abs();
    let s = a.abs().max(b.abs());
    if s > T::zero() {
        d / s
    } else {
        T::infinity()
    }
}

/// `(∫∫ |field(y, z)|^q dy dz)^{1/q}` over `domain`.
pub fn space_norm<T: Scalar>(
    field: &(dyn Fn(&[T], T) -> T + Sync),
    domain: &Domain<T>,
    q: T,
    cfg: &QuadratureConfig,
) -> Result<NormEstimate<T>> {
    domain.validate()?;
    check_exponent(q)?;
    let kernel = |y: &[T], z: T, w: T, acc: &mut [T]| {
        let f = field(y, z);
        if f != T::zero() {
            acc[0] = acc[0] + w * pow_abs(f, q);
        }
    };
    let inv = T::one() / q;
    let out = refine(cfg, |level| vec![domain.accumulate(q, cfg, level, 1, &kernel)[0].powf(inv)])?;
    Ok(out[0])
}

/// `(∫_0^T ‖field(t)‖_{L^q}^p dt)^{1/p}` with a fixed Gauss–Legendre rule in
/// `t`; stationary moduli use `T^{1/p} ‖field‖_{L^q}` directly.
pub fn spacetime_norm<T: Scalar>(
    field: &SpaceTimeField<'_, T>,
    domain: &Domain<T>,
    spec: &NormSpec<T>,
    cfg: &QuadratureConfig,
) -> Result<NormEstimate<T>> {
    spec.validate()?;
    match field {
        SpaceTimeField::Stationary(f) => {
            let mut e = space_norm(*f, domain, spec.q, cfg)?;
            e.value = e.value * spec.t_max.powf(T::one() / spec.p);
            Ok(e)
        }
        SpaceTimeField::Quadratic(f) => {
            let multi = |y: &[T], z: T, out: &mut [TimeQuadratic<T>]| out[0] = f(y, z);
            Ok(spacetime_norms(&multi, 1, domain, spec, cfg)?[0])
        }
        SpaceTimeField::Pointwise(f) => {
            domain.validate()?;
            let (tn, tw) = time_rule(spec.t_max, cfg.t_nodes);
            let nt = tn.len();
            let q = spec.q;
            let kernel = |y: &[T], z: T, w: T, acc: &mut [T]| {
                for (a, &t) in acc.iter_mut().zip(&tn) {
                    let m = f(t, y, z);
                    if m != T::zero() {
                        *a = *a + w * pow_abs(m, q);
                    }
                }
            };
            let out = refine(cfg, |level| vec![time_combine(&domain.accumulate(q, cfg, level, nt, &kernel), &tw, spec)])?;
            Ok(out[0])
        }
    }
}

/// Several quadratic-in-time fields sharing one pass over the nodes.
/// `fields(y, z, out)` fills `out[..count]`.
pub fn spacetime_norms<T: Scalar>(
    fields: &(dyn Fn(&[T], T, &mut [TimeQuadratic<T>]) + Sync),
    count: usize,
    domain: &Domain<T>,
    spec: &NormSpec<T>,
    cfg: &QuadratureConfig,
) -> Result<Vec<NormEstimate<T>>> {
    spec.validate()?;
    domain.validate()?;
    let (tn, tw) = time_rule(spec.t_max, cfg.t_nodes);
    let nt = tn.len();
    let t2: Vec<T> = tn.iter().map(|&t| t * t).collect();
    let half_q = T::lit(0.5) * spec.q;
    let kernel = |y: &[T], z: T, w: T, acc: &mut [T]| {
        let mut buf = [TimeQuadratic::zero(); 8];
        let mut heap;
        let coeffs: &mut [TimeQuadratic<T>] = if count <= 8 {
            &mut buf[..count]
        } else {
            heap = vec![TimeQuadratic::zero(); count];
            &mut heap
        };
        fields(y, z, coeffs);
        for (k, c) in coeffs.iter().enumerate() {
            if c.p == T::zero() && c.q == T::zero() && c.s == T::zero() {
                continue;
            }
            let row = &mut acc[k * nt..(k + 1) * nt];
            if c.q == T::zero() && c.s == T::zero() {
                let v = w * pow_from_sq(c.p * c.p, half_q);
                for a in row.iter_mut() {
                    *a = *a + v;
                }
                continue;
            }
            for j in 0..nt {
                let re = c.p + t2[j] * c.s;
                let im = tn[j] * c.q;
                row[j] = row[j] + w * pow_from_sq(re * re + im * im, half_q);
            }
        }
    };
    refine(cfg, |level| {
        let acc = domain.accumulate(spec.q, cfg, level, count * nt, &kernel);
        (0..count).map(|k| time_combine(&acc[k * nt..(k + 1) * nt], &tw, spec)).collect()
    })
}

fn check_exponent<T: Scalar>(q: T) -> Result<()> {
    if !(q >= T::one() && q.is_finite()) {
        return Err(LabError::InvalidParameter(format!("exponent q = {q} must lie in [1, ∞)")));
    }
    Ok(())
}

fn time_rule<T: Scalar>(t_max: T, nodes: usize) -> (Vec<T>, Vec<T>) {
    GaussLegendre::<T>::new(nodes).mapped(T::zero(), t_max).unzip()
}

/// `(Σ_j w_j (acc_j)^{p/q})^{1/p}` from per-node integrals of `|F|^q`.
fn time_combine<T: Scalar>(acc: &[T], tw: &[T], spec: &NormSpec<T>) -> T {
    let ratio = spec.p / spec.q;
    let s: T = acc.iter().zip(tw).map(|(&a, &w)| if a > T::zero() { w * a.powf(ratio) } else { T::zero() }).sum();
    s.powf(T::one() / spec.p)
}

/// Transverse profile `L` of the sandwich bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseProfile {
    V,
    G,
    H,
}

/// `L(u) |u|^{weight_power}` with `u = y / z^{β/2}`; powers `0, 2, 4` give
/// the three composites `Λ, Ω, Ψ` of a base profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichProfile {
    pub base: BaseProfile,
    pub weight_power: u32,
}

impl SandwichProfile {
    pub fn lambda(base: BaseProfile) -> Self {
        Self { base, weight_power: 0 }
    }

    pub fn omega(base: BaseProfile) -> Self {
        Self { base, weight_power: 2 }
    }

    pub fn psi(base: BaseProfile) -> Self {
        Self { base, weight_power: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub profile: SandwichProfile,
    pub derivs: (u32, u32),
    pub q: f64,
    pub radii: Vec<f64>,
    pub norms: Vec<f64>,
    pub predicted_slope: f64,
    pub fit: LineFit,
    pub slope_tol: f64,
    pub passed: bool,
}

/// `L(u)|u|^k · φ_R^{(d₁)}(z) · φ^{(d₂)}(|y|²/z²)` where `φ_R^{(d)}` is the
/// `d`-th `z` derivative of `φ((z − R)/R^γ)`.
pub fn sandwich_field<T: Scalar>(family: &QuasimodeFamily<T>, profile: SandwichProfile, derivs: (u32, u32), r: T) -> impl Fn(&[T], T) -> T + Sync + '_ {
    let rg = r.powf(family.gamma);
    let (lo, hi) = family.slab(r);
    move |y: &[T], z: T| {
        if !(z > lo && z < hi) {
            return T::zero();
        }
        let y2: T = y.iter().map(|&c| c * c).sum();
        if !(y2 < z * z) {
            return T::zero();
        }
        let jr = family.cutoff.jet((z - r) / rg);
        let fr = match derivs.0 {
            0 => jr.value,
            1 => jr.d1 / rg,
            _ => jr.d2 / (rg * rg),
        };
        if fr == T::zero() {
            return T::zero();
        }
        let jc = family.cutoff.jet(y2 / (z * z));
        let fc = match derivs.1 {
            0 => jc.value,
            1 => jc.d1,
            _ => jc.d2,
        };
        if fc == T::zero() {
            return T::zero();
        }
        let zh = z.powf(T::lit(0.5) * family.beta);
        let u: Vec<T> = y.iter().map(|&c| c / zh).collect();
        let (v, g, h) = family.eigen.v_g_h(&u);
        let base = match profile.base {
            BaseProfile::V => v,
            BaseProfile::G => g,
            BaseProfile::H => h,
        };
        let u2 = y2 / (zh * zh);
        base * u2.powi(profile.weight_power as i32 / 2) * fr * fc
    }
}

/// Norms of a sandwich field across `radii`, fitted against
/// `((n−1)β + 2γ)/(2q) − d₁γ`.
pub fn sandwich_check<T: Scalar>(
    family: &QuasimodeFamily<T>,
    profile: SandwichProfile,
    derivs: (u32, u32),
    radii: &[T],
    q: T,
    slope_tol: f64,
    cfg: &QuadratureConfig,
) -> Result<SandwichReport> {
    if derivs.0 > 2 || derivs.1 > 2 {
        return Err(LabError::InvalidParameter("derivative orders must be 0, 1 or 2".into()));
    }
    let mut norms = Vec::with_capacity(radii.len());
    for &r in radii {
        let domain = Domain::for_family(family, r)?;
        let field = sandwich_field(family, profile, derivs, r);
        norms.push(space_norm(&field, &domain, q, cfg)?.value.as_f64());
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.as_f64()).collect();
    let fit = log_log(&xs, &norms)?;
    let n1 = (family.n - 1) as f64;
    let (b, g) = (family.beta.as_f64(), family.gamma.as_f64());
    let predicted_slope = (n1 * b + 2.0 * g) / (2.0 * q.as_f64()) - derivs.0 as f64 * g;
    let passed = (fit.slope - predicted_slope).abs() <= slope_tol;
    Ok(SandwichReport { profile, derivs, q: q.as_f64(), radii: xs, norms, predicted_slope, fit, slope_tol, passed })
}
