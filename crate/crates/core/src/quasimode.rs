//! The quasimode family built from the oscillator ground state.
//!
//! Writing `x = (y, z)` with `z > 0` the longitudinal coordinate and
//! `β = 1 + σ/2`:
//!
//! * `w(y, z) = v(y / z^{β/2})`, the rescaled ground state;
//! * `W = e^{iλt/z^β} w`, which solves
//!   `i∂_t W − Δ_x W + z^{−2β}(yᵀa y) W = F` with an explicit forcing `F`;
//! * `W_R = φ_R φ W` with `φ_R = φ((z − R)/R^γ)` and `φ = φ(|y|²/z²)`,
//!   which solves the same equation with forcing `F_R = φ_R φ F + G_R`
//!   and initial datum `f_R = φ_R φ w`.
//!
//! Every forcing term has the shape `e^{iλt/z^β}(P + i t Q + t² S)` with real
//! `P, Q, S` depending only on `(y, z)`. [`TimeQuadratic`] carries that
//! triple; the norm engine uses it to integrate in time without
//! re-evaluating the spatial factors.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cutoff::{CutoffJet, CutoffProfile};
use crate::error::{LabError, Result};
use crate::oscillator::{ground_state, Eigenpair};
use crate::potential::{HomogeneousPotential, MorseData};
use crate::sampling::halton;
use crate::scalar::{norm_sq, Scalar};

/// `(t, y, z)` with `y ∈ R^{n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimePoint<T> {
    pub t: T,
    pub y: Vec<T>,
    pub z: T,
}

impl<T> SpaceTimePoint<T> {
    pub fn new(t: T, y: Vec<T>, z: T) -> Self {
        Self { t, y, z }
    }
}

/// Phase-stripped forcing `P + i t Q + t² S`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimeQuadratic<T> {
    pub p: T,
    pub q: T,
    pub s: T,
}

impl<T: Scalar> TimeQuadratic<T> {
    pub fn zero() -> Self {
        Self { p: T::zero(), q: T::zero(), s: T::zero() }
    }

    #[inline]
    pub fn at(&self, t: T) -> Complex<T> {
        Complex::new(self.p + t * t * self.s, t * self.q)
    }

    /// `|P + t²S + i t Q|`.
    #[inline]
    pub fn modulus(&self, t: T) -> T {
        let re = self.p + t * t * self.s;
        let im = t * self.q;
        re.hypot(im)
    }

    #[inline]
    pub fn scale(self, c: T) -> Self {
        Self { p: self.p * c, q: self.q * c, s: self.s * c }
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        Self { p: self.p + o.p, q: self.q + o.q, s: self.s + o.s }
    }
}

/// Forcing terms of the truncated problem at one spatial point, all sharing
/// the phase `e^{iλt/z^β}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForcingParts<T> {
    /// `φ_R φ F`
    pub bulk: TimeQuadratic<T>,
    /// `G_R`
    pub correction: TimeQuadratic<T>,
    /// `z^{−σ} R(y/z) φ_R φ w` (real, time independent)
    pub remainder: T,
}

impl<T: Scalar> ForcingParts<T> {
    /// `F_R = φ_R φ F + G_R`.
    pub fn truncated(&self) -> TimeQuadratic<T> {
        self.bulk.add(self.correction)
    }

    /// `F_R + z^{−σ}R(y/z) W_R` (phase stripped).
    pub fn auxiliary(&self) -> TimeQuadratic<T> {
        let mut f = self.truncated();
        f.p = f.p + self.remainder;
        f
    }

    pub fn remainder_only(&self) -> TimeQuadratic<T> {
        TimeQuadratic { p: self.remainder, q: T::zero(), s: T::zero() }
    }
}

/// The explicit quasimode family of a homogeneous potential.
#[derive(Debug, Clone)]
pub struct QuasimodeFamily<T> {
    pub n: usize,
    pub sigma: T,
    pub beta: T,
    pub gamma: T,
    pub eigen: Eigenpair<T>,
    pub morse: MorseData<T>,
    pub potential: HomogeneousPotential<T>,
    pub cutoff: CutoffProfile,
}

/// Spatial factors shared by every evaluator at one `(y, z)`.
struct Local<T> {
    y2: T,
    w: T,
    gamma_fn: T,
    h_fn: T,
    zb: T,
}

/// Cut-off jets at one `(y, z)` for a fixed `R`, with the `R^{−γ}` factors of
/// the `φ_R` derivatives already applied.
struct Cutoffs<T> {
    r: CutoffJet<T>,
    c: CutoffJet<T>,
}

impl<T: Scalar> QuasimodeFamily<T> {
    /// Extracts the quadratic form of `potential`, builds its ground state and
    /// fixes the truncation exponent `gamma ∈ (0, 1)`.
    pub fn new(potential: HomogeneousPotential<T>, gamma: T) -> Result<Self> {
        let morse = potential.extract_morse()?;
        Self::with_morse(potential, morse, gamma)
    }

    pub fn with_morse(potential: HomogeneousPotential<T>, morse: MorseData<T>, gamma: T) -> Result<Self> {
        if !(gamma > T::zero() && gamma < T::one()) {
            return Err(LabError::InvalidParameter(format!("gamma = {gamma} must lie in (0, 1)")));
        }
        if morse.a.dim() != potential.transverse_dim() {
            return Err(LabError::DimensionMismatch { expected: potential.transverse_dim(), got: morse.a.dim() });
        }
        let eigen = ground_state(&morse.a)?;
        let sigma = potential.sigma;
        Ok(Self {
            n: potential.n,
            sigma,
            beta: T::one() + sigma * T::lit(0.5),
            gamma,
            eigen,
            morse,
            potential,
            cutoff: CutoffProfile,
        })
    }

    /// Same potential and eigenpair with a different `gamma`.
    pub fn with_gamma(&self, gamma: T) -> Result<Self> {
        Self::with_morse(self.potential.clone(), self.morse.clone(), gamma)
    }

    pub fn transverse_dim(&self) -> usize {
        self.n - 1
    }

    pub fn lambda(&self) -> T {
        self.eigen.lambda
    }

    /// Slab `[R − R^γ, R + R^γ]` carrying the truncated family.
    pub fn slab(&self, r: T) -> (T, T) {
        let rg = r.powf(self.gamma);
        (r - rg, r + rg)
    }

    pub fn check_radius(&self, r: T) -> Result<()> {
        if !(r > T::lit(2.0)) {
            return Err(LabError::InvalidParameter(format!("truncation radius R = {r} must exceed 2")));
        }
        let (lo, _) = self.slab(r);
        if !(lo > T::zero()) {
            return Err(LabError::InvalidParameter(format!("slab R − R^γ = {lo} must stay positive")));
        }
        Ok(())
    }

    fn check_point(&self, y: &[T], z: T) -> Result<()> {
        if y.len() != self.transverse_dim() {
            return Err(LabError::DimensionMismatch { expected: self.transverse_dim(), got: y.len() });
        }
        if !(z > T::zero()) {
            return Err(LabError::NonpositiveZ { z: z.as_f64() });
        }
        Ok(())
    }

    /// `z^{−2β} yᵀa y`, the quadratic part of the potential.
    #[inline]
    pub fn quadratic_potential(&self, y: &[T], z: T) -> T {
        self.morse.a.quad_form(y) / z.powf(T::lit(2.0) * self.beta)
    }

    #[inline]
    fn phase(&self, t: T, z: T) -> Complex<T> {
        let theta = self.eigen.lambda * t / z.powf(self.beta);
        Complex::new(theta.cos(), theta.sin())
    }

    #[inline]
    fn local(&self, y: &[T], z: T) -> Local<T> {
        let zb = z.powf(self.beta);
        let inv = T::one() / zb.sqrt();
        let mut buf = [T::zero(); 8];
        let d = y.len();
        let (w, gamma_fn, h_fn) = if d <= 8 {
            for (u, &c) in buf[..d].iter_mut().zip(y) {
                *u = c * inv;
            }
            self.eigen.v_g_h(&buf[..d])
        } else {
            let u: Vec<T> = y.iter().map(|&c| c * inv).collect();
            self.eigen.v_g_h(&u)
        };
        Local { y2: norm_sq(y), w, gamma_fn, h_fn, zb }
    }

    #[inline]
    fn cutoffs(&self, r: T, y2: T, z: T) -> Cutoffs<T> {
        let rg = r.powf(self.gamma);
        let mut rj = self.cutoff.jet((z - r) / rg);
        rj.d1 = rj.d1 / rg;
        rj.d2 = rj.d2 / (rg * rg);
        Cutoffs { r: rj, c: self.cutoff.jet(y2 / (z * z)) }
    }

    #[inline]
    fn in_support(&self, r: T, y2: T, z: T) -> bool {
        let (lo, hi) = self.slab(r);
        z > lo && z < hi && y2 < z * z
    }

    /// `w(y, z) = v(y / z^{β/2})`.
    pub fn rescaled(&self, y: &[T], z: T) -> Result<T> {
        self.check_point(y, z)?;
        Ok(self.local(y, z).w)
    }

    /// `W(t, y, z) = e^{iλt/z^β} w(y, z)`.
    pub fn wave(&self, p: &SpaceTimePoint<T>) -> Result<Complex<T>> {
        self.check_point(&p.y, p.z)?;
        Ok(self.phase(p.t, p.z) * self.local(&p.y, p.z).w)
    }

    #[inline]
    fn bulk_from_local(&self, l: &Local<T>, z: T) -> TimeQuadratic<T> {
        let b = self.beta;
        let lam = self.eigen.lambda;
        let z2 = z * z;
        let four = T::lit(4.0);
        TimeQuadratic {
            p: (-l.gamma_fn * b * (b + T::lit(2.0)) / four - b * b / four * l.h_fn) / z2,
            q: (-b * (b + T::one()) * lam * l.w / l.zb - l.gamma_fn * b * b * lam / l.zb) / z2,
            s: b * b * lam * lam * l.w / (l.zb * l.zb) / z2,
        }
    }

    /// Phase-stripped coefficients of the forcing `F` of the untruncated wave.
    pub fn bulk_coefficients(&self, y: &[T], z: T) -> Result<TimeQuadratic<T>> {
        self.check_point(y, z)?;
        let l = self.local(y, z);
        Ok(self.bulk_from_local(&l, z))
    }

    /// `F(t, y, z)` with `i∂_t W − Δ_x W + z^{−2β}(yᵀa y) W = F`.
    pub fn bulk_forcing(&self, p: &SpaceTimePoint<T>) -> Result<Complex<T>> {
        let c = self.bulk_coefficients(&p.y, p.z)?;
        Ok(self.phase(p.t, p.z) * c.at(p.t))
    }

    /// `f_R = φ_R φ w`; zero off the slab.
    pub fn initial_datum(&self, r: T, y: &[T], z: T) -> Result<T> {
        self.check_radius(r)?;
        if y.len() != self.transverse_dim() {
            return Err(LabError::DimensionMismatch { expected: self.transverse_dim(), got: y.len() });
        }
        Ok(self.initial_datum_unchecked(r, y, z))
    }

    #[inline]
    pub(crate) fn initial_datum_unchecked(&self, r: T, y: &[T], z: T) -> T {
        let y2 = norm_sq(y);
        if !self.in_support(r, y2, z) {
            return T::zero();
        }
        let c = self.cutoffs(r, y2, z);
        let cut = c.r.value * c.c.value;
        if cut == T::zero() {
            return T::zero();
        }
        cut * self.local(y, z).w
    }

    /// `W_R = φ_R φ W`.
    pub fn truncated_wave(&self, r: T, p: &SpaceTimePoint<T>) -> Result<Complex<T>> {
        let f = self.initial_datum(r, &p.y, p.z)?;
        if f == T::zero() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        Ok(self.phase(p.t, p.z) * f)
    }

    /// Phase-stripped forcing terms of the truncated problem at `(y, z)`.
    pub fn forcing_parts(&self, r: T, y: &[T], z: T) -> Result<ForcingParts<T>> {
        self.check_radius(r)?;
        if y.len() != self.transverse_dim() {
            return Err(LabError::DimensionMismatch { expected: self.transverse_dim(), got: y.len() });
        }
        Ok(self.forcing_parts_unchecked(r, y, z))
    }

    pub(crate) fn forcing_parts_unchecked(&self, r: T, y: &[T], z: T) -> ForcingParts<T> {
        let y2 = norm_sq(y);
        if !self.in_support(r, y2, z) {
            return ForcingParts::default();
        }
        let Cutoffs { r: pr, c } = self.cutoffs(r, y2, z);
        if pr.value == T::zero() && pr.d1 == T::zero() && pr.d2 == T::zero() {
            return ForcingParts::default();
        }
        if c.value == T::zero() && c.d1 == T::zero() && c.d2 == T::zero() {
            return ForcingParts::default();
        }
        let l = self.local(y, z);
        let b = self.beta;
        let lam = self.eigen.lambda;
        let nm1 = T::from_usize_lossy(self.n - 1);
        let (two, four, six) = (T::lit(2.0), T::lit(4.0), T::lit(6.0));
        let z2 = z * z;
        let z3 = z2 * z;
        let z4 = z2 * z2;
        let z6 = z4 * z2;

        let cut = pr.value * c.value;
        let bulk = if cut == T::zero() { TimeQuadratic::zero() } else { self.bulk_from_local(&l, z).scale(cut) };

        let w_group_real = two * nm1 / z2 * pr.value * c.d1
            + four * l.y2 / z4 * pr.value * c.d2
            + pr.d2 * c.value
            - four * l.y2 / z3 * pr.d1 * c.d1
            + six * l.y2 / z4 * pr.value * c.d1
            + four * l.y2 * l.y2 / z6 * pr.value * c.d2;
        let w_group_imag = -two * b * lam / (l.zb * z) * pr.d1 * c.value + four * b * lam * l.y2 / (l.zb * z4) * pr.value * c.d1;
        let gamma_group = four / z2 * pr.value * c.d1 - b / z * pr.d1 * c.value + two * b * l.y2 / z4 * pr.value * c.d1;
        let correction = TimeQuadratic {
            p: -l.w * w_group_real - l.gamma_fn * gamma_group,
            q: -l.w * w_group_imag,
            s: T::zero(),
        };

        let remainder = if cut == T::zero() {
            T::zero()
        } else {
            self.potential.remainder_unchecked(&self.morse, y, z) * cut * l.w
        };
        ForcingParts { bulk, correction, remainder }
    }

    /// `G_R`, the forcing produced by differentiating the cut-offs.
    pub fn cutoff_forcing(&self, r: T, p: &SpaceTimePoint<T>) -> Result<Complex<T>> {
        self.check_point(&p.y, p.z)?;
        let parts = self.forcing_parts(r, &p.y, p.z)?;
        Ok(self.phase(p.t, p.z) * parts.correction.at(p.t))
    }

    /// `F_R = φ_R φ F + G_R`.
    pub fn truncated_forcing(&self, r: T, p: &SpaceTimePoint<T>) -> Result<Complex<T>> {
        self.check_point(&p.y, p.z)?;
        let parts = self.forcing_parts(r, &p.y, p.z)?;
        Ok(self.phase(p.t, p.z) * parts.truncated().at(p.t))
    }

    /// `z^{−σ} R(y/z) W_R`; zero outside the cone support of `W_R`.
    pub fn remainder_forcing(&self, r: T, p: &SpaceTimePoint<T>) -> Result<Complex<T>> {
        let parts = self.forcing_parts(r, &p.y, p.z)?;
        if parts.remainder == T::zero() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        Ok(self.phase(p.t, p.z) * parts.remainder)
    }

    /// `F̃_R = χ_{(0, R^α)}(t) [F_R + z^{−σ}R(y/z) W_R]`.
    pub fn auxiliary_forcing(&self, r: T, alpha: T, p: &SpaceTimePoint<T>) -> Result<Complex<T>> {
        let parts = self.forcing_parts(r, &p.y, p.z)?;
        if !(p.t > T::zero() && p.t < r.powf(alpha)) {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        if parts == ForcingParts::default() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        Ok(self.phase(p.t, p.z) * parts.auxiliary().at(p.t))
    }

    /// Finite-difference check of
    /// `i∂_t W_R − Δ_x W_R + z^{−2β}(yᵀa y) W_R = F_R` at `sample_count`
    /// Halton points of the slab with `t ∈ [0, t_max]`.
    ///
    /// `fd_step` is dimensionless: the actual steps are `fd_step` times the
    /// local length scales `z^β/λ` in `t`, `z^{β/2}` in `y` and `R^γ` in `z`.
    /// The reported relative residual is the largest residual divided by the
    /// largest sum of term magnitudes over the sample.
    pub fn residual_certificate(&self, r: T, sample_count: usize, fd_step: T, t_max: T) -> Result<ResidualCertificate> {
        self.check_radius(r)?;
        if !(fd_step > T::zero()) {
            return Err(LabError::InvalidParameter("finite-difference step must be positive".into()));
        }
        let d = self.transverse_dim();
        let (lo, hi) = self.slab(r);
        let b_min = self.eigen.principal_values[0];
        let two = T::lit(2.0);
        let rg = r.powf(self.gamma);
        let mut max_res = T::zero();
        let mut max_scale = T::zero();
        let mut y = vec![T::zero(); d];
        let mut probe = vec![T::zero(); d];
        let wr = |t: T, y: &[T], z: T| -> Complex<T> {
            let f = self.initial_datum_unchecked(r, y, z);
            if f == T::zero() {
                Complex::new(T::zero(), T::zero())
            } else {
                self.phase(t, z) * f
            }
        };
        for k in 1..=sample_count {
            let t = t_max * T::lit(halton(k, 0));
            let z = lo + (hi - lo) * T::lit(halton(k, 1));
            let zb = z.powf(self.beta);
            let cap = (T::lit(4.0) / b_min.sqrt()).min(z / zb.sqrt());
            for (i, c) in y.iter_mut().enumerate() {
                *c = zb.sqrt() * cap * T::lit(2.0 * halton(k, 2 + i) - 1.0);
            }
            let dt = fd_step * zb / self.eigen.lambda;
            let dy = fd_step * zb.sqrt();
            let dz = fd_step * rg;

            let w0 = wr(t, &y, z);
            let dtw = (wr(t + dt, &y, z) - wr(t - dt, &y, z)) / (two * dt);
            let mut lap_y = Complex::new(T::zero(), T::zero());
            for i in 0..d {
                probe.copy_from_slice(&y);
                probe[i] = y[i] + dy;
                let wp = wr(t, &probe, z);
                probe[i] = y[i] - dy;
                let wm = wr(t, &probe, z);
                lap_y = lap_y + (wp - w0 * two + wm) / (dy * dy);
            }
            let dzz = (wr(t, &y, z + dz) - w0 * two + wr(t, &y, z - dz)) / (dz * dz);
            let pot = w0 * self.quadratic_potential(&y, z);
            let i_dt = Complex::new(-dtw.im, dtw.re);
            let forcing = self.phase(t, z) * self.forcing_parts_unchecked(r, &y, z).truncated().at(t);
            let res = (i_dt - lap_y - dzz + pot - forcing).norm();
            let scale = i_dt.norm() + lap_y.norm() + dzz.norm() + pot.norm() + forcing.norm();
            max_res = max_res.max(res);
            max_scale = max_scale.max(scale);
        }
        let rel = if max_scale > T::zero() { max_res / max_scale } else { T::zero() };
        Ok(ResidualCertificate {
            radius: r.as_f64(),
            fd_step: fd_step.as_f64(),
            samples: sample_count,
            t_max: t_max.as_f64(),
            max_abs_residual: max_res.as_f64(),
            max_scale: max_scale.as_f64(),
            max_relative_residual: rel.as_f64(),
        })
    }

    /// Certificates at successively smaller steps plus the observed
    /// convergence ratios.
    pub fn residual_convergence(&self, r: T, sample_count: usize, steps: &[T], t_max: T, tol: f64) -> Result<ResidualConvergence> {
        if steps.len() < 2 {
            return Err(LabError::InsufficientPoints { needed: 2, got: steps.len() });
        }
        let certificates = steps
            .iter()
            .map(|&h| self.residual_certificate(r, sample_count, h, t_max))
            .collect::<Result<Vec<_>>>()?;
        Ok(ResidualConvergence::assess(certificates, tol))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualCertificate {
    pub radius: f64,
    pub fd_step: f64,
    pub samples: usize,
    pub t_max: f64,
    pub max_abs_residual: f64,
    pub max_scale: f64,
    pub max_relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualConvergence {
    pub certificates: Vec<ResidualCertificate>,
    /// `residual(h_k) / residual(h_{k+1})`.
    pub ratios: Vec<f64>,
    /// `(h_k / h_{k+1})²`, the ratio a second-order scheme should show.
    pub expected_ratios: Vec<f64>,
    pub orders: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl ResidualConvergence {
    /// Relative deviation allowed between observed and expected ratios.
    pub const RATIO_SLACK: f64 = 0.3;

    fn assess(certificates: Vec<ResidualCertificate>, tol: f64) -> Self {
        let mut ratios = Vec::new();
        let mut expected_ratios = Vec::new();
        let mut orders = Vec::new();
        for w in certificates.windows(2) {
            let ratio = w[0].max_relative_residual / w[1].max_relative_residual;
            let step_ratio = w[0].fd_step / w[1].fd_step;
            ratios.push(ratio);
            expected_ratios.push(step_ratio * step_ratio);
            orders.push(ratio.ln() / step_ratio.ln());
        }
        let first_ok = certificates[0].max_relative_residual <= tol;
        let mut out = Self { certificates, ratios, expected_ratios, orders, tolerance: tol, passed: false };
        out.passed = first_ok && out.second_order();
        out
    }

    /// Every observed ratio within [`Self::RATIO_SLACK`] of its expected value.
    pub fn second_order(&self) -> bool {
        self.ratios
            .iter()
            .zip(&self.expected_ratios)
            .all(|(r, e)| r.is_finite() && (r / e - 1.0).abs() <= Self::RATIO_SLACK)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn family(profile: &str, n: usize, sigma: f64, gamma: f64) -> QuasimodeFamily<f64> {
        let v = HomogeneousPotential::builtin(profile, n, sigma).unwrap();
        QuasimodeFamily::new(v, gamma).unwrap()
    }

    fn pt(t: f64, y: &[f64], z: f64) -> SpaceTimePoint<f64> {
        SpaceTimePoint::new(t, y.to_vec(), z)
    }

    #[test]
    fn beta_and_gamma_validation() {
        let q = family("sin2", 2, 1.0, 0.6);
        assert_eq!(q.beta, 1.5);
        let v = HomogeneousPotential::<f64>::builtin("sin2", 2, 0.0).unwrap();
        assert!(QuasimodeFamily::new(v.clone(), 0.0).is_err());
        assert!(QuasimodeFamily::new(v, 1.0).is_err());
    }

    #[test]
    fn rescaled_ground_state_values() {
        let q = family("sin2", 2, 0.0, 0.6);
        assert_eq!(q.rescaled(&[0.0], 7.0).unwrap(), 1.0);
        assert!((q.rescaled(&[1.0], 4.0).unwrap() - (-0.125f64).exp()).abs() < 1e-15);
        assert_eq!(q.rescaled(&[1.0], 0.0), Err(LabError::NonpositiveZ { z: 0.0 }));
        assert_eq!(q.rescaled(&[1.0], -1.0), Err(LabError::NonpositiveZ { z: -1.0 }));
    }

    #[test]
    fn rescaled_eigen_identity() {
        for (profile, n, sigma) in [("sin2", 2, 0.0), ("sin2", 2, 1.0), ("aniso", 3, 0.5)] {
            let q = family(profile, n, sigma, 0.6);
            let d = n - 1;
            let h = 1e-3;
            for k in 1..=100 {
                let z = 10.0 + 90.0 * halton(k, 0);
                let zb = z.powf(q.beta);
                let y: Vec<f64> = (0..d).map(|i| zb.sqrt() * (2.0 * halton(k, 1 + i) - 1.0) * 2.0).collect();
                let w = q.rescaled(&y, z).unwrap();
                let mut lap = 0.0;
                for i in 0..d {
                    let mut p = y.clone();
                    p[i] += h;
                    let wp = q.rescaled(&p, z).unwrap();
                    p[i] -= 2.0 * h;
                    let wm = q.rescaled(&p, z).unwrap();
                    lap += (wp - 2.0 * w + wm) / (h * h);
                }
                let res = -lap + q.quadratic_potential(&y, z) * w - q.lambda() / zb * w;
                assert!(res.abs() <= 1e-5, "{profile} {res}");
            }
        }
    }

    #[test]
    fn wave_phase_and_modulus() {
        let q = family("sin2", 2, 0.0, 0.6);
        let w0 = q.wave(&pt(0.0, &[0.3], 2.0)).unwrap();
        assert_eq!(w0.im, 0.0);
        assert_eq!(w0.re, q.rescaled(&[0.3], 2.0).unwrap());
        let w = q.wave(&pt(PI, &[0.0], 1.0)).unwrap();
        assert!((w.re + 1.0).abs() < 1e-15 && w.im.abs() < 1e-15);
        let a = q.wave(&pt(1.3, &[0.4], 3.0)).unwrap().norm();
        let b = q.wave(&pt(71.0, &[0.4], 3.0)).unwrap().norm();
        assert!((a - b).abs() <= 1e-15);
    }

    #[test]
    fn bulk_forcing_vanishes_on_axis_at_time_zero() {
        let q = family("sin2", 2, 0.0, 0.6);
        let f = q.bulk_forcing(&pt(0.0, &[0.0], 5.0)).unwrap();
        assert_eq!(f, Complex::new(0.0, 0.0));
    }

    fn fd_operator(q: &QuasimodeFamily<f64>, wave: &dyn Fn(f64, &[f64], f64) -> Complex<f64>, p: &SpaceTimePoint<f64>, h: f64) -> Complex<f64> {
        let (t, z) = (p.t, p.z);
        let y = &p.y;
        let w0 = wave(t, y, z);
        let dt = (wave(t + h, y, z) - wave(t - h, y, z)) / (2.0 * h);
        let mut lap = (wave(t, y, z + h) - w0 * 2.0 + wave(t, y, z - h)) / (h * h);
        for i in 0..y.len() {
            let mut a = y.clone();
            a[i] += h;
            let mut b = y.clone();
            b[i] -= h;
            lap += (wave(t, &a, z) - w0 * 2.0 + wave(t, &b, z)) / (h * h);
        }
        Complex::new(-dt.im, dt.re) - lap + w0 * q.quadratic_potential(y, z)
    }

    #[test]
    fn bulk_forcing_matches_finite_differences() {
        for (profile, n, sigma) in [("sin2", 2, 0.0), ("sin2", 2, 1.0), ("aniso", 3, 0.0)] {
            let q = family(profile, n, sigma, 0.6);
            let wave = |t: f64, y: &[f64], z: f64| q.wave(&pt(t, y, z)).unwrap();
            for k in 1..=100 {
                let t = 10.0 * halton(k, 0);
                let z = 20.0 + 30.0 * halton(k, 1);
                let y: Vec<f64> = (0..n - 1).map(|i| z.sqrt() * (2.0 * halton(k, 2 + i) - 1.0) / (n as f64 - 1.0).sqrt()).collect();
                let p = pt(t, &y, z);
                let lhs = fd_operator(&q, &wave, &p, 1e-3);
                let f = q.bulk_forcing(&p).unwrap();
                assert!((lhs - f).norm() <= 1e-4, "{profile}: {lhs} vs {f}");
            }
        }
    }

    #[test]
    fn forcing_is_quadratic_in_time() {
        let q = family("sin2", 2, 0.5, 0.6);
        let r = 40.0;
        for (y, z) in [(2.0, 39.0), (-5.0, 45.0), (0.3, 33.0)] {
            let strip = |t: f64, f: Complex<f64>| f * q.phase(t, z).conj();
            let f = |t: f64| strip(t, q.truncated_forcing(r, &pt(t, &[y], z)).unwrap());
            let b = |t: f64| strip(t, q.bulk_forcing(&pt(t, &[y], z)).unwrap());
            for g in [&f as &dyn Fn(f64) -> Complex<f64>, &b] {
                let (f0, f1, fm) = (g(0.0), g(1.0), g(-1.0));
                for t in [0.5, 2.0, 7.0] {
                    let interp = f0 + (f1 - fm) * (t / 2.0) + (f1 - f0 * 2.0 + fm) * (t * t / 2.0);
                    assert!((g(t) - interp).norm() <= 1e-12 * (1.0 + g(t).norm()));
                }
            }
        }
    }

    #[test]
    fn initial_datum_support() {
        let q = family("sin2", 2, 0.0, 0.6);
        let r: f64 = 50.0;
        assert_eq!(q.initial_datum(r, &[0.0], r).unwrap(), 1.0);
        assert_eq!(q.initial_datum(r, &[0.0], r + 2.0 * r.powf(0.6)).unwrap(), 0.0);
        assert_eq!(q.initial_datum(r, &[r], r).unwrap(), 0.0);
        assert_eq!(q.initial_datum(r, &[0.0], -3.0).unwrap(), 0.0);
        assert!(q.initial_datum(2.0, &[0.0], 2.0).is_err());
    }

    #[test]
    fn truncated_wave_starts_at_initial_datum() {
        let q = family("sin2", 2, 0.0, 0.6);
        let r = 30.0;
        for k in 1..50 {
            let z = 25.0 + 10.0 * halton(k, 0);
            let y = 6.0 * (2.0 * halton(k, 1) - 1.0);
            let w = q.truncated_wave(r, &pt(0.0, &[y], z)).unwrap();
            assert_eq!(w.re, q.initial_datum(r, &[y], z).unwrap());
            assert_eq!(w.im, 0.0);
        }
    }

    #[test]
    fn interior_cutoff_forcing_vanishes() {
        let q = family("sin2", 2, 0.0, 0.6);
        let r = 64.0;
        let g = q.cutoff_forcing(r, &pt(3.0, &[10.0], r)).unwrap();
        assert_eq!(g.norm(), 0.0);
        let f = q.truncated_forcing(r, &pt(0.0, &[0.0], r)).unwrap();
        assert_eq!(f.norm(), 0.0);
    }

    #[test]
    fn cutoff_forcing_real_at_time_zero() {
        let q = family("sin2", 2, 0.0, 0.6);
        let r: f64 = 64.0;
        let z = r + 0.7 * r.powf(0.6);
        let g = q.cutoff_forcing(r, &pt(0.0, &[3.0], z)).unwrap();
        assert!(g.norm() > 0.0);
        assert_eq!(g.im, 0.0);
    }

    #[test]
    fn truncated_forcing_matches_finite_differences() {
        for (profile, n, sigma) in [("sin2", 2, 0.0), ("sin2", 2, 1.0), ("aniso", 3, 0.0), ("sin2", 4, 0.4)] {
            let q = family(profile, n, sigma, 0.6);
            let r: f64 = 20.0;
            let (lo, hi) = q.slab(r);
            let wave = |t: f64, y: &[f64], z: f64| q.truncated_wave(r, &pt(t, y, z)).unwrap();
            for k in 1..=100 {
                let t = 10.0 * halton(k, 0);
                let z = lo + (hi - lo) * halton(k, 1);
                let y: Vec<f64> = (0..n - 1).map(|i| 2.0 * z.powf(q.beta / 2.0) * (2.0 * halton(k, 2 + i) - 1.0)).collect();
                let p = pt(t, &y, z);
                let lhs = fd_operator(&q, &wave, &p, 1e-3);
                let f = q.truncated_forcing(r, &p).unwrap();
                assert!((lhs - f).norm() <= 1e-4, "{profile} n={n}: {lhs} vs {f} at {p:?}");
            }
        }
    }

    #[test]
    fn support_of_forcings() {
        let q = family("sin2", 2, 0.0, 0.6);
        let r: f64 = 100.0;
        let (lo, hi) = q.slab(r);
        for k in 1..=1000 {
            let outside_z = if k % 2 == 0 { lo - 50.0 * halton(k, 0) } else { hi + 50.0 * halton(k, 0) };
            let p = pt(5.0, &[3.0 * halton(k, 1)], outside_z);
            assert_eq!(q.initial_datum(r, &p.y, p.z).unwrap(), 0.0);
            assert_eq!(q.forcing_parts(r, &p.y, p.z).unwrap(), ForcingParts::default());
            // outside the cone |y| ≤ z
            let z = lo + (hi - lo) * halton(k, 2);
            let y = z * (1.0 + halton(k, 3));
            assert_eq!(q.forcing_parts(r, &[y], z).unwrap(), ForcingParts::default());
            assert_eq!(q.initial_datum(r, &[y], z).unwrap(), 0.0);
        }
    }

    #[test]
    fn remainder_forcing_values() {
        let q = family("sin2", 2, 0.0, 0.6);
        let r = 40.0;
        assert_eq!(q.remainder_forcing(r, &pt(1.0, &[0.0], r)).unwrap().norm(), 0.0);
        let p = pt(0.0, &[0.5], r);
        let u: f64 = 0.5 / r;
        let expect = -(u.powi(4)) / (1.0 + u * u) * q.initial_datum(r, &[0.5], r).unwrap();
        let got = q.remainder_forcing(r, &p).unwrap();
        // a is extracted by finite differences, good to ~1e-12 relative
        assert!((got.re - expect).abs() <= 1e-6 * expect.abs(), "{got} {expect}");
        let quad = family("quad", 2, 0.0, 0.6);
        for y in [0.5, 3.0, -7.0] {
            assert!(quad.remainder_forcing(r, &pt(2.0, &[y], r)).unwrap().norm() < 1e-18);
        }
    }

    #[test]
    fn auxiliary_forcing_gating() {
        let q = family("sin2", 2, 0.0, 0.6);
        let (r, alpha): (f64, f64) = (40.0, 1.15);
        let z = r + 0.8 * r.powf(0.6);
        let big_t = r.powf(alpha);
        assert_eq!(q.auxiliary_forcing(r, alpha, &pt(2.0 * big_t, &[1.0], z)).unwrap().norm(), 0.0);
        assert_eq!(q.auxiliary_forcing(r, alpha, &pt(-1.0, &[1.0], z)).unwrap().norm(), 0.0);
        for k in 1..100 {
            let p = pt(big_t * halton(k, 0), &[8.0 * (2.0 * halton(k, 1) - 1.0)], r + r.powf(0.6) * (2.0 * halton(k, 2) - 1.0));
            let ft = q.auxiliary_forcing(r, alpha, &p).unwrap().norm();
            let fr = q.truncated_forcing(r, &p).unwrap().norm();
            let rem = q.remainder_forcing(r, &p).unwrap().norm();
            assert!(ft <= fr + rem + 1e-15);
        }
        let quad = family("quad", 2, 0.0, 0.6);
        let p = pt(3.0, &[2.0], z);
        let a = quad.auxiliary_forcing(r, alpha, &p).unwrap();
        let b = quad.truncated_forcing(r, &p).unwrap();
        assert!((a - b).norm() <= 1e-15 * b.norm().max(1e-300) + 1e-20);
    }

    #[test]
    fn certificate_converges_at_second_order() {
        let q = family("sin2", 2, 0.0, 0.6);
        let r: f64 = 32.0;
        let conv = q.residual_convergence(r, 200, &[1e-3, 5e-4], r.powf(1.15), 1e-3).unwrap();
        assert!(conv.passed, "{conv:?}");
        let doubled = q.residual_convergence(2.0 * r, 200, &[1e-3, 5e-4], (2.0 * r).powf(1.15), 1e-3).unwrap();
        assert!(doubled.passed, "{doubled:?}");
    }
}
