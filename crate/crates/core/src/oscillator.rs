//! Ground state of the anisotropic harmonic oscillator `−Δ_y + yᵀa y` on
//! `R^{n−1}`.
//!
//! With `B = a^{1/2}` the ground state is `v(y) = exp(−½ yᵀB y)` with
//! eigenvalue `λ = tr B`. The derived quantities `G = y·∇v` and
//! `H = y·D²v·y` have closed forms in terms of `Q = yᵀB y`:
//! `G = −Q v` and `H = (Q² − Q) v`.

use crate::error::{LabError, Result};
use crate::linalg::{quad_form, spd_sqrt, SpdMatrix};
use crate::scalar::Scalar;

/// The fixed eigenpair `(λ, v)`.
#[derive(Debug, Clone)]
pub struct Eigenpair<T> {
    pub lambda: T,
    pub sqrt_a: Vec<T>,
    pub dim: usize,
    /// Eigenvalues of `B` (ascending).
    pub principal_values: Vec<T>,
    /// Matching unit eigenvectors of `B`.
    pub principal_axes: Vec<Vec<T>>,
}

pub fn ground_state<T: Scalar>(a: &SpdMatrix<T>) -> Result<Eigenpair<T>> {
    let dim = a.dim();
    let b = spd_sqrt(a)?;
    let lambda = (0..dim).map(|i| b[i * dim + i]).sum();
    let eig = crate::linalg::jacobi_eigen(&b, dim);
    let principal_axes = (0..dim).map(|k| eig.vector(k)).collect();
    Ok(Eigenpair { lambda, sqrt_a: b, dim, principal_values: eig.values, principal_axes })
}

impl<T: Scalar> Eigenpair<T> {
    fn check(&self, y: &[T]) -> Result<()> {
        if y.len() != self.dim {
            return Err(LabError::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        Ok(())
    }

    /// `yᵀB y`; no dimension check.
    #[inline]
    pub fn b_form(&self, y: &[T]) -> T {
        quad_form(&self.sqrt_a, self.dim, y)
    }

    /// `(v, G, H)` at `y` from a single evaluation of the exponential.
    #[inline]
    pub fn v_g_h(&self, y: &[T]) -> (T, T, T) {
        let q = self.b_form(y);
        let v = (-T::lit(0.5) * q).exp();
        (v, -q * v, (q * q - q) * v)
    }

    pub fn eval_v(&self, y: &[T]) -> Result<T> {
        self.check(y)?;
        Ok((-T::lit(0.5) * self.b_form(y)).exp())
    }

    pub fn eval_g(&self, y: &[T]) -> Result<T> {
        self.check(y)?;
        Ok(self.v_g_h(y).1)
    }

    pub fn eval_h(&self, y: &[T]) -> Result<T> {
        self.check(y)?;
        Ok(self.v_g_h(y).2)
    }

    /// True when `B` is a multiple of the identity.
    pub fn is_isotropic(&self) -> bool {
        let first = self.principal_values[0];
        let last = self.principal_values[self.dim - 1];
        (last - first).abs() <= T::lit(1e-12) * last.abs()
    }
}

/// Maximum over `samples` of the relative residual
/// `|−Δ_h v + (yᵀa y) v − λ v| / max(|v|, 1e−300)`, with `Δ_h` the
/// second-order central difference Laplacian of step `h`.
pub fn eigen_residual<T: Scalar>(e: &Eigenpair<T>, a: &SpdMatrix<T>, samples: &[Vec<T>], h: T) -> Result<T> {
    let floor = T::min_positive_value().max(T::lit(1e-300));
    let mut worst = T::zero();
    let mut probe = vec![T::zero(); e.dim];
    for y in samples {
        e.check(y)?;
        let v0 = e.eval_v(y)?;
        let mut lap = T::zero();
        for i in 0..e.dim {
            probe.copy_from_slice(y);
            probe[i] = y[i] + h;
            let vp = e.eval_v(&probe)?;
            probe[i] = y[i] - h;
            let vm = e.eval_v(&probe)?;
            lap = lap + (vp - T::lit(2.0) * v0 + vm) / (h * h);
        }
        let r = (-lap + a.quad_form(y) * v0 - e.lambda * v0).abs() / v0.abs().max(floor);
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

/// Observed convergence order of [`eigen_residual`] from residuals at `h`,
/// `h/2`, `h/4`: least-squares slope of `log r` against `log h`.
pub fn eigen_convergence_order<T: Scalar>(e: &Eigenpair<T>, a: &SpdMatrix<T>, samples: &[Vec<T>], h: T) -> Result<(Vec<T>, T)> {
    let steps = [h, h * T::lit(0.5), h * T::lit(0.25)];
    let mut res = Vec::with_capacity(3);
    for &s in &steps {
        res.push(eigen_residual(e, a, samples, s)?);
    }
    let xs: Vec<f64> = steps.iter().map(|s| s.as_f64().ln()).collect();
    let ys: Vec<f64> = res.iter().map(|r| r.as_f64().ln()).collect();
    let fit = crate::fit::least_squares(&xs, &ys)?;
    Ok((res, T::lit(fit.slope)))
}
