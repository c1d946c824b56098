//! Deterministic low-discrepancy sample points.

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `index` in the `dim`-th prime base (Halton sequence),
/// a value in `[0, 1)`.
pub fn halton(index: usize, dim: usize) -> f64 {
    let base = PRIMES[dim % PRIMES.len()];
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}
