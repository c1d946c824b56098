//! Gauss–Legendre rules and composite panel sums.

use crate::scalar::Scalar;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// Rule with `order` points; nodes are found by Newton iteration on the
    /// Legendre recurrence in `f64` and then converted.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss–Legendre order must be positive");
        let (x, w) = legendre_f64(order);
        Self { nodes: x.into_iter().map(T::lit).collect(), weights: w.into_iter().map(T::lit).collect() }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = T::lit(0.5) * (b - a);
        let mid = T::lit(0.5) * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        self.mapped(a, b).fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite(&self, a: T, b: T, panels: usize, mut f: impl FnMut(T) -> T) -> T {
        let mut acc = T::zero();
        for_each_node(self, a, b, panels, |x, w| acc = acc + w * f(x));
        acc
    }
}

/// Visits every node of the composite rule on `[a, b]`.
pub fn for_each_node<T: Scalar>(rule: &GaussLegendre<T>, a: T, b: T, panels: usize, mut visit: impl FnMut(T, T)) {
    if panels == 0 || !(b > a) {
        return;
    }
    let h = (b - a) / T::from_usize_lossy(panels);
    for k in 0..panels {
        let lo = a + h * T::from_usize_lossy(k);
        let hi = if k + 1 == panels { b } else { lo + h };
        for (x, w) in rule.mapped(lo, hi) {
            visit(x, w);
        }
    }
}

/// Nodes and weights of a piecewise composite rule: each consecutive pair of
/// `breaks` is one region, split into `panels[i]` panels.
pub fn composite_nodes<T: Scalar>(rule: &GaussLegendre<T>, breaks: &[T], panels: &[usize]) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(rule.order() * panels.iter().sum::<usize>());
    for (pair, &m) in breaks.windows(2).zip(panels) {
        for_each_node(rule, pair[0], pair[1], m, |x, w| out.push((x, w)));
    }
    out
}

fn legendre_f64(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut r = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, r);
            dp = d;
            let step = p / d;
            r -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_eval(n, r);
        if d.is_finite() {
            dp = d;
        }
        x[i] = -r;
        x[n - 1 - i] = r;
        let wi = 2.0 / ((1.0 - r * r) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(x), P_n'(x))`.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for order in [1, 2, 5, 8, 16, 65] {
            let g = GaussLegendre::<f64>::new(order);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "{order}");
            for k in 0..order {
                assert!((g.nodes[k] + g.nodes[order - 1 - k]).abs() < 1e-15);
            }
            assert!(g.nodes.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let g = GaussLegendre::<f64>::new(8);
        for deg in 0..16 {
            let got = g.integrate(0.0, 1.0, |x| x.powi(deg));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "{deg}");
        }
        let miss = g.integrate(0.0, 1.0, |x| x.powi(16)) - 1.0 / 17.0;
        assert!(miss.abs() > 1e-12);
    }

    #[test]
    fn two_point_rule() {
        let g = GaussLegendre::<f64>::new(2);
        assert!((g.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn composite_rule_on_smooth_function() {
        let g = GaussLegendre::<f64>::new(8);
        let got = g.composite(0.0, std::f64::consts::PI, 4, f64::sin);
        assert!((got - 2.0).abs() < 1e-14);
    }

    #[test]
    fn piecewise_nodes_cover_breaks() {
        let g = GaussLegendre::<f64>::new(4);
        let nodes = composite_nodes(&g, &[0.0, 1.0, 3.0], &[1, 2]);
        assert_eq!(nodes.len(), 12);
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((total - 3.0).abs() < 1e-14);
        // indicator of [0, 1] is integrated exactly because 1 is a break
        let ind: f64 = nodes.iter().filter(|(x, _)| *x < 1.0).map(|(_, w)| w).sum();
        assert!((ind - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_precision_rule() {
        let g = GaussLegendre::<f32>::new(8);
        let got = g.integrate(-1.0, 1.0, |x| x * x);
        assert!((got - 2.0 / 3.0).abs() < 1e-6);
    }
}
