//! Smooth even cut-off `φ` with `φ = 1` on `|s| < 1/2` and `φ = 0` on `|s| > 1`.
//!
//! On the transition band `1/2 ≤ |s| ≤ 1` we use `φ(s) = ψ(2(1 − |s|))` where
//! `ψ(x) = e^{−1/x} / (e^{−1/x} + e^{−1/(1−x)})`, written as the logistic
//! function `ψ = 1/(1 + e^{g})`, `g = 1/x − 1/(1−x)`, so that no overflow
//! reaches the quotient.

use crate::scalar::Scalar;

/// Value and first two derivatives of the cut-off at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffJet<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CutoffProfile;

impl CutoffProfile {
    pub fn jet<T: Scalar>(&self, s: T) -> CutoffJet<T> {
        let a = s.abs();
        let half = T::lit(0.5);
        if a <= half {
            return CutoffJet { value: T::one(), d1: T::zero(), d2: T::zero() };
        }
        if a >= T::one() {
            return CutoffJet { value: T::zero(), d1: T::zero(), d2: T::zero() };
        }
        let x = T::lit(2.0) * (T::one() - a);
        let (psi, dpsi, d2psi) = transition(x);
        // dx/ds = −2 sign(s); d²x/ds² = 0 away from s = 0
        let sign = s.signum();
        CutoffJet { value: psi, d1: -T::lit(2.0) * sign * dpsi, d2: T::lit(4.0) * d2psi }
    }

    #[inline]
    pub fn value<T: Scalar>(&self, s: T) -> T {
        self.jet(s).value
    }

    #[inline]
    pub fn first<T: Scalar>(&self, s: T) -> T {
        self.jet(s).d1
    }

    #[inline]
    pub fn second<T: Scalar>(&self, s: T) -> T {
        self.jet(s).d2
    }
}

/// `ψ(x)`, `ψ'(x)`, `ψ''(x)` for `x ∈ (0, 1)`.
fn transition<T: Scalar>(x: T) -> (T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let y = one - x;
    let g = one / x - one / y;
    let psi = one / (one + g.exp());
    let comp = one / (one + (-g).exp());
    let pc = psi * comp;
    if pc == T::zero() {
        return (psi, T::zero(), T::zero());
    }
    let h = one / (x * x) + one / (y * y);
    let dh = -two / (x * x * x) + two / (y * y * y);
    let d1 = pc * h;
    let d2 = d1 * (one - two * psi) * h + pc * dh;
    (psi, d1, d2)
}
