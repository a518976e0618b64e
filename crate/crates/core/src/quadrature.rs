//! Gauss–Legendre, Gauss–Lobatto and end-corrected trapezoid rules.

use std::f64::consts::PI;

/// Legendre `P_n(x)` and `P_n'(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let n = n as f64;
        x.signum().powi(n as i32 + 1) * n * (n + 1.0) / 2.0
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// `n`-point Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `n`-point Gauss–Lobatto nodes (ascending, including ±1) and weights.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let m = n - 1;
    let mf = m as f64;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    for i in 1..m {
        // Chebyshev–Gauss–Lobatto guess, refined by Newton on P_m'.
        let mut x = -(PI * i as f64 / mf).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let d2p = (2.0 * x * dp - mf * (mf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre(m, x);
            2.0 / (mf * (mf + 1.0) * p * p)
        })
        .collect();
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Gregory end corrections in forward-difference form, `Δ¹..Δ⁶`.
const GREGORY: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 24.0,
    19.0 / 720.0,
    -3.0 / 160.0,
    863.0 / 60480.0,
    -275.0 / 24192.0,
];

/// Weights (in units of `h`) of the trapezoid rule on `n` equispaced samples
/// with Gregory corrections through the `order`-th difference at both ends.
/// Falls back to lower order when there are too few samples.
pub fn gregory_weights(n: usize, order: usize) -> Vec<f64> {
    assert!(n >= 1);
    if n == 1 {
        return vec![0.0];
    }
    let mut w = vec![1.0; n];
    w[0] = 0.5;
    w[n - 1] = 0.5;
    // Each end needs order + 1 samples and the two stencils must not overlap.
    let order = order.min(GREGORY.len()).min((n - 1) / 2);
    let mut binom = vec![1.0f64];
    for (k, c) in GREGORY.iter().enumerate().take(order) {
        binom = (0..=k + 1)
            .map(|i| {
                let a = if i <= k { binom[i] } else { 0.0 };
                let b = if i > 0 { binom[i - 1] } else { 0.0 };
                a + b
            })
            .collect();
        // Δ^{k+1} f_0 = Σ_i (-1)^{k+1-i} C(k+1, i) f_i
        for (i, b) in binom.iter().enumerate() {
            let sign = if (k + 1 - i) % 2 == 0 { 1.0 } else { -1.0 };
            w[i] += c * sign * b;
            w[n - 1 - i] += c * sign * b;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in 1..12 {
            let rule = gauss_legendre(n);
            assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = integrate(|x| x.powi(deg as i32), -1.0, 1.0, &rule);
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}: {got}");
            }
        }
    }

    #[test]
    fn lobatto_rule_integrates_polynomials_exactly() {
        for n in 2..10 {
            let (x, w) = gauss_lobatto(n);
            assert_eq!(x[0], -1.0);
            assert_eq!(x[n - 1], 1.0);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for deg in 0..=(2 * n - 3) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}: {got}");
            }
        }
        // Known four-point nodes ±1/√5.
        let (x, w) = gauss_lobatto(4);
        assert!((x[2] - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn gregory_matches_classic_third_order_weights() {
        let w = gregory_weights(10, 2);
        assert!((w[0] - 3.0 / 8.0).abs() < 1e-15);
        assert!((w[1] - 7.0 / 6.0).abs() < 1e-15);
        assert!((w[2] - 23.0 / 24.0).abs() < 1e-15);
        assert!((w[9] - 3.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn gregory_is_exact_for_low_degree() {
        let n = 21;
        let h = 1.0 / (n - 1) as f64;
        let w = gregory_weights(n, 6);
        for deg in 0..=7 {
            let got: f64 = (0..n).map(|i| w[i] * (i as f64 * h).powi(deg)).sum::<f64>() * h;
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((got - exact).abs() < 1e-13, "deg={deg}: {got}");
        }
    }

    #[test]
    fn gregory_order_improves_accuracy() {
        let n = 41;
        let h = 2.0 / (n - 1) as f64;
        let exact = 2f64.sin();
        let err = |order| {
            let w = gregory_weights(n, order);
            ((0..n).map(|i| w[i] * (i as f64 * h).cos()).sum::<f64>() * h - exact).abs()
        };
        assert!(err(6) < err(4) && err(4) < err(2) && err(2) < err(0));
        assert!(err(6) < 1e-11);
    }
}
