//! Homogeneous potentials `V(λx) = λ^{−σ} V(x)` of generalized Morse type,
//! represented by their restriction `V(y, 1)` to the hyperplane `z = 1`.
//!
//! The minimum on the sphere is assumed to sit at `(0, …, 0, 1)` with value
//! zero; callers rotate their potential into that position beforehand.

use std::fmt;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::linalg::{jacobi_eigen, SpdMatrix};
use crate::sampling::halton;
use crate::scalar::{norm_sq, Scalar};

/// Evaluator of `V(y, 1)` on `R^{n−1}`.
pub type Profile<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Names of the profiles shipped with the crate.
pub const BUILTIN_PROFILES: [&str; 3] = ["sin2", "quad", "aniso"];

#[derive(Clone)]
pub struct HomogeneousPotential<T> {
    pub n: usize,
    pub sigma: T,
    pub profile: Profile<T>,
    pub name: String,
    /// Whether the profile depends on `y` only through `|y|`.
    pub radial: bool,
    pub min_direction: Vec<T>,
}

impl<T> fmt::Debug for HomogeneousPotential<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousPotential")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("sigma", &self.sigma)
            .field("radial", &self.radial)
            .finish()
    }
}

/// Quadratic part `a` of the profile at its minimum and a constant `C` with
/// `|V(y,1) − yᵀa y| ≤ C|y|³` on `|y| < 1`.
#[derive(Debug, Clone)]
pub struct MorseData<T> {
    pub a: SpdMatrix<T>,
    pub remainder_constant: T,
}

impl<T: Scalar> HomogeneousPotential<T> {
    pub fn new(n: usize, sigma: T, name: impl Into<String>, radial: bool, profile: Profile<T>) -> Result<Self> {
        if n < 2 {
            return Err(LabError::InvalidParameter(format!("dimension n = {n} must be at least 2")));
        }
        if !(sigma >= T::zero() && sigma < T::lit(2.0)) {
            return Err(LabError::InvalidParameter(format!("sigma = {sigma} must lie in [0, 2)")));
        }
        let mut min_direction = vec![T::zero(); n];
        min_direction[n - 1] = T::one();
        Ok(Self { n, sigma, profile, name: name.into(), radial, min_direction })
    }

    /// One of the built-in profiles:
    /// `sin2` → `|y|²/(1+|y|²)`, `quad` → `|y|²`, `aniso` → `2y₁² + 3y₂² + y₁³` (n = 3 only).
    pub fn builtin(name: &str, n: usize, sigma: T) -> Result<Self> {
        match name {
            "sin2" => Self::new(
                n,
                sigma,
                name,
                true,
                Arc::new(|y: &[T]| {
                    let r2 = norm_sq(y);
                    r2 / (T::one() + r2)
                }),
            ),
            "quad" => Self::new(n, sigma, name, true, Arc::new(|y: &[T]| norm_sq(y))),
            "aniso" => {
                if n != 3 {
                    return Err(LabError::InvalidParameter(format!("profile `aniso` needs n = 3, got n = {n}")));
                }
                Self::new(
                    n,
                    sigma,
                    name,
                    false,
                    Arc::new(|y: &[T]| T::lit(2.0) * y[0] * y[0] + T::lit(3.0) * y[1] * y[1] + y[0] * y[0] * y[0]),
                )
            }
            other => Err(LabError::UnknownProfile(other.to_string())),
        }
    }

    /// Dimension of the transverse variable `y`.
    pub fn transverse_dim(&self) -> usize {
        self.n - 1
    }

    #[inline]
    pub fn profile_at(&self, y: &[T]) -> T {
        (self.profile)(y)
    }

    /// `V(y, z) = z^{−σ} V(y/z, 1)` for `z > 0`.
    pub fn eval(&self, y: &[T], z: T) -> Result<T> {
        if y.len() != self.transverse_dim() {
            return Err(LabError::DimensionMismatch { expected: self.transverse_dim(), got: y.len() });
        }
        if !(z > T::zero()) {
            return Err(LabError::NonpositiveZ { z: z.as_f64() });
        }
        let scaled: Vec<T> = y.iter().map(|&c| c / z).collect();
        Ok(z.powf(-self.sigma) * self.profile_at(&scaled))
    }

    /// Taylor remainder `z^{−σ} R(y/z) = z^{−σ}(V(y/z,1) − (y/z)ᵀa(y/z))`,
    /// defined inside the cone `|y| < z`.
    pub fn remainder(&self, morse: &MorseData<T>, y: &[T], z: T) -> Result<T> {
        if y.len() != self.transverse_dim() {
            return Err(LabError::DimensionMismatch { expected: self.transverse_dim(), got: y.len() });
        }
        if !(z > T::zero()) {
            return Err(LabError::NonpositiveZ { z: z.as_f64() });
        }
        let r = norm_sq(y).sqrt();
        if !(r < z) {
            return Err(LabError::OutOfCone { y_norm: r.as_f64(), z: z.as_f64() });
        }
        Ok(self.remainder_unchecked(morse, y, z))
    }

    #[inline]
    pub(crate) fn remainder_unchecked(&self, morse: &MorseData<T>, y: &[T], z: T) -> T {
        let mut buf = [T::zero(); 8];
        let d = y.len();
        let scaled: &mut [T] = if d <= 8 { &mut buf[..d] } else { return self.remainder_alloc(morse, y, z) };
        for (s, &c) in scaled.iter_mut().zip(y) {
            *s = c / z;
        }
        z.powf(-self.sigma) * (self.profile_at(scaled) - morse.a.quad_form(scaled))
    }

    fn remainder_alloc(&self, morse: &MorseData<T>, y: &[T], z: T) -> T {
        let scaled: Vec<T> = y.iter().map(|&c| c / z).collect();
        z.powf(-self.sigma) * (self.profile_at(&scaled) - morse.a.quad_form(&scaled))
    }

    /// Extracts `a = ½·Hessian` of the profile at the origin and samples the
    /// cubic remainder constant on the unit ball.
    pub fn extract_morse(&self) -> Result<MorseData<T>> {
        self.extract_morse_with(10_000)
    }

    pub fn extract_morse_with(&self, remainder_samples: usize) -> Result<MorseData<T>> {
        let d = self.transverse_dim();
        let origin = vec![T::zero(); d];
        let value = self.profile_at(&origin);
        let h = T::lit(1e-4);
        // central differences of a smooth profile are off by O(h²) in the
        // gradient, so the gradient probe uses a smaller step
        let hg = T::lit(1e-6);
        let mut grad = T::zero();
        let mut probe = origin.clone();
        for i in 0..d {
            probe[i] = hg;
            let fp = self.profile_at(&probe);
            probe[i] = -hg;
            let fm = self.profile_at(&probe);
            probe[i] = T::zero();
            grad = grad.max(((fp - fm) / (T::lit(2.0) * hg)).abs());
        }
        if value.abs() > T::lit(1e-12) || grad > T::lit(1e-8) {
            return Err(LabError::NonzeroMinimum { value: value.as_f64(), gradient: grad.as_f64() });
        }

        // Richardson-extrapolated central-difference Hessian.
        let coarse = self.fd_hessian(h);
        let fine = self.fd_hessian(h * T::lit(0.5));
        let three = T::lit(3.0);
        let half = T::lit(0.5);
        let a_entries: Vec<T> = coarse
            .iter()
            .zip(&fine)
            .map(|(&c, &f)| half * (T::lit(4.0) * f - c) / three)
            .collect();
        let eig = jacobi_eigen(&a_entries, d);
        if eig.values[0] <= T::lit(1e-10) {
            return Err(LabError::DegenerateMinimum { min_eigenvalue: eig.values[0].as_f64() });
        }
        let a = SpdMatrix::new(d, a_entries)?;

        let mut sup = T::zero();
        let mut y = vec![T::zero(); d];
        let mut k = 0usize;
        let mut accepted = 0usize;
        while accepted < remainder_samples {
            k += 1;
            for (i, c) in y.iter_mut().enumerate() {
                *c = T::lit(2.0 * halton(k, i) - 1.0);
            }
            let r2 = norm_sq(&y);
            if !(r2 < T::one()) || r2 == T::zero() {
                continue;
            }
            accepted += 1;
            let r3 = r2 * r2.sqrt();
            let ratio = (self.profile_at(&y) - a.quad_form(&y)).abs() / r3;
            if ratio > sup {
                sup = ratio;
            }
        }
        Ok(MorseData { a, remainder_constant: T::lit(1.1) * sup })
    }

    fn fd_hessian(&self, h: T) -> Vec<T> {
        let d = self.transverse_dim();
        let mut hess = vec![T::zero(); d * d];
        let mut p = vec![T::zero(); d];
        let f0 = self.profile_at(&p);
        let two = T::lit(2.0);
        for i in 0..d {
            p[i] = h;
            let fp = self.profile_at(&p);
            p[i] = -h;
            let fm = self.profile_at(&p);
            p[i] = T::zero();
            hess[i * d + i] = (fp - two * f0 + fm) / (h * h);
            for j in (i + 1)..d {
                let mut corner = |si: T, sj: T| {
                    p[i] = si * h;
                    p[j] = sj * h;
                    let v = self.profile_at(&p);
                    p[i] = T::zero();
                    p[j] = T::zero();
                    v
                };
                let one = T::one();
                let v = (corner(one, one) - corner(one, -one) - corner(-one, one) + corner(-one, -one)) / (T::lit(4.0) * h * h);
                hess[i * d + j] = v;
                hess[j * d + i] = v;
            }
        }
        hess
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin2_values() {
        let v = HomogeneousPotential::<f64>::builtin("sin2", 2, 0.0).unwrap();
        assert_eq!(v.eval(&[0.0], 5.0).unwrap(), 0.0);
        assert!((v.eval(&[1.0], 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((v.eval(&[2.0], 2.0).unwrap() - v.eval(&[1.0], 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn homogeneity_for_every_builtin() {
        for (name, n) in [("sin2", 2), ("sin2", 3), ("quad", 2), ("aniso", 3)] {
            for sigma in [0.0, 0.7, 1.5] {
                let v = HomogeneousPotential::<f64>::builtin(name, n, sigma).unwrap();
                let y: Vec<f64> = (0..n - 1).map(|i| 0.3 - 0.45 * i as f64).collect();
                let z = 1.7;
                let base = v.eval(&y, z).unwrap();
                for lam in [0.5, 2.0, 10.0] {
                    let ys: Vec<f64> = y.iter().map(|c| c * lam).collect();
                    let scaled = v.eval(&ys, lam * z).unwrap();
                    let expect = lam.powf(-sigma) * base;
                    assert!((scaled - expect).abs() <= 1e-10 * expect.abs(), "{name} {sigma} {lam}");
                }
            }
        }
    }

    #[test]
    fn nonpositive_z_rejected() {
        let v = HomogeneousPotential::<f64>::builtin("quad", 2, 0.0).unwrap();
        assert_eq!(v.eval(&[0.0], 0.0), Err(LabError::NonpositiveZ { z: 0.0 }));
    }

    #[test]
    fn unknown_and_misdimensioned_profiles() {
        assert!(matches!(HomogeneousPotential::<f64>::builtin("cosh", 2, 0.0), Err(LabError::UnknownProfile(_))));
        assert!(HomogeneousPotential::<f64>::builtin("aniso", 2, 0.0).is_err());
        assert!(HomogeneousPotential::<f64>::builtin("sin2", 2, 2.0).is_err());
        assert!(HomogeneousPotential::<f64>::builtin("sin2", 1, 0.0).is_err());
    }

    #[test]
    fn morse_data_of_sin2() {
        // y²/(1+y²) = y² − y⁴ + …, remainder y⁴/(1+y²) ≤ |y|³ on |y| < 1
        let v = HomogeneousPotential::<f64>::builtin("sin2", 2, 0.0).unwrap();
        let m = v.extract_morse().unwrap();
        assert!((m.a.get(0, 0) - 1.0).abs() < 1e-9);
        // sup of r/(1+r²) on (0,1) is ½
        assert!(m.remainder_constant > 0.5 && m.remainder_constant <= 0.55 + 1e-9);
    }

    #[test]
    fn morse_data_of_exact_quadratic() {
        let v = HomogeneousPotential::<f64>::builtin("quad", 2, 0.0).unwrap();
        let m = v.extract_morse().unwrap();
        assert!((m.a.get(0, 0) - 1.0).abs() < 1e-10);
        assert!(m.remainder_constant < 1e-6);
    }

    #[test]
    fn morse_data_of_anisotropic_cubic() {
        let v = HomogeneousPotential::<f64>::builtin("aniso", 3, 0.0).unwrap();
        let m = v.extract_morse().unwrap();
        assert!((m.a.get(0, 0) - 2.0).abs() < 1e-8);
        assert!((m.a.get(1, 1) - 3.0).abs() < 1e-8);
        assert!(m.a.get(0, 1).abs() < 1e-8);
        assert!((m.remainder_constant - 1.1).abs() < 0.02, "{}", m.remainder_constant);
    }

    #[test]
    fn degenerate_and_shifted_minima() {
        let flat = HomogeneousPotential::<f64>::new(2, 0.0, "quartic", true, Arc::new(|y: &[f64]| y[0].powi(4))).unwrap();
        assert!(matches!(flat.extract_morse(), Err(LabError::DegenerateMinimum { .. })));
        let shifted = HomogeneousPotential::<f64>::new(2, 0.0, "shifted", true, Arc::new(|y: &[f64]| 1.0 + y[0] * y[0])).unwrap();
        assert!(matches!(shifted.extract_morse(), Err(LabError::NonzeroMinimum { .. })));
        let tilted = HomogeneousPotential::<f64>::new(2, 0.0, "tilted", true, Arc::new(|y: &[f64]| y[0] + y[0] * y[0])).unwrap();
        assert!(matches!(tilted.extract_morse(), Err(LabError::NonzeroMinimum { .. })));
    }

    #[test]
    fn remainder_values_and_cone() {
        let v = HomogeneousPotential::<f64>::builtin("sin2", 2, 0.0).unwrap();
        let m = v.extract_morse().unwrap();
        assert_eq!(v.remainder(&m, &[0.0], 1.0).unwrap(), 0.0);
        assert!((v.remainder(&m, &[0.5], 1.0).unwrap() + 0.05).abs() < 1e-9);
        assert!(matches!(v.remainder(&m, &[1.0], 1.0), Err(LabError::OutOfCone { .. })));
    }

    #[test]
    fn remainder_reconstructs_potential() {
        for sigma in [0.0, 1.0] {
            let v = HomogeneousPotential::<f64>::builtin("aniso", 3, sigma).unwrap();
            let m = v.extract_morse().unwrap();
            let beta = 1.0 + sigma / 2.0;
            for (y, z) in [([0.1, -0.2], 1.0f64), ([1.5, 0.3], 4.0), ([-3.0, 2.0], 9.0)] {
                let quad = m.a.quad_form(&y) / z.powf(2.0 * beta);
                let total = quad + v.remainder(&m, &y, z).unwrap();
                let direct = v.eval(&y, z).unwrap();
                assert!((total - direct).abs() <= 1e-12 * direct.abs().max(1e-300), "{y:?} {z}");
            }
        }
    }

    #[test]
    fn remainder_bound_over_the_cone() {
        for sigma in [0.0, 1.2] {
            let v = HomogeneousPotential::<f64>::builtin("sin2", 2, sigma).unwrap();
            let m = v.extract_morse().unwrap();
            for k in 1..=1000 {
                let z = 0.5 + 20.0 * halton(k, 0);
                let y = (halton(k, 1) - 0.5) * z; // |y| < z/2
                let r = v.remainder(&m, &[y], z).unwrap();
                let bound = m.remainder_constant * y.abs().powi(3) / z.powf(3.0 + sigma);
                assert!(r.abs() <= bound * (1.0 + 1e-12) + 1e-300, "{y} {z}");
            }
        }
    }
}
