//! Gauss–Legendre rules.

use crate::scalar::Real;

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Nodes come out in increasing order. Computed by Newton iteration on the Legendre
/// polynomial from the Chebyshev initial guess, so any `Real` works.
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let pi = T::pi();
    let one = T::one();
    let two = T::lit(2.0);
    for i in 0..(n + 1) / 2 {
        let mut x = -(pi * (T::lit(i as f64) + T::lit(0.75)) / (T::lit(n as f64) + T::lit(0.5))).cos();
        let mut dp = one;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::default_epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = two / ((one - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let k = T::lit(k as f64);
        let p2 = ((T::lit(2.0) * k - T::one()) * x * p1 - (k - T::one()) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nn = T::lit(n as f64);
    let d = nn * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Gauss rule mapped onto `[a, b]`.
pub fn gauss_on<T: Real>(order: usize, a: T, b: T) -> Vec<(T, T)> {
    let (x, w) = gauss_legendre::<T>(order);
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    x.into_iter()
        .zip(w)
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_integrate_polynomials() {
        for order in 1..=10 {
            let (x, w) = gauss_legendre::<f64>(order);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {order}");
            // exact for degree 2n-1
            let deg = 2 * order - 2;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = 2.0 / (deg as f64 + 1.0);
            assert!((approx - exact).abs() < 1e-13, "order {order}");
        }
    }

    #[test]
    fn three_point_rule_matches_closed_form() {
        let (x, w) = gauss_legendre::<f64>(3);
        let r = (0.6f64).sqrt();
        assert!((x[0] + r).abs() < 1e-15 && x[1].abs() < 1e-15 && (x[2] - r).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15 && (w[0] - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn mapped_rule_integrates_sine() {
        let rule = gauss_on::<f64>(8, 0.0, std::f64::consts::PI);
        let s: f64 = rule.iter().map(|(x, w)| w * x.sin()).sum();
        assert!((s - 2.0).abs() < 1e-9);
    }
}
