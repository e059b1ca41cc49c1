//! Gauss-Legendre quadrature on intervals and tensor-product cells.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// exact for polynomials of degree `2n - 1`.
///
/// Computed by Newton iteration on the Legendre polynomial; converges to
/// machine precision in a handful of steps for the orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `n`-point Gauss rule mapped to `[a, b]`.
pub fn gauss_on_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights.iter())
        .map(|(&x, &w)| (mid + half * x, half * w))
        .collect()
}

/// Tensor-product Gauss points `((t, x), weight)` on a rectangle.
pub fn gauss_on_rect(n: usize, t0: f64, t1: f64, x0: f64, x1: f64) -> Vec<((f64, f64), f64)> {
    let pt = gauss_on_interval(n, t0, t1);
    let px = gauss_on_interval(n, x0, x1);
    let mut out = Vec::with_capacity(n * n);
    for &(t, wt) in &pt {
        for &(x, wx) in &px {
            out.push(((t, x), wt * wx));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_monomials_exactly() {
        // n-point rule is exact through degree 2n-1
        for n in 1..=8 {
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 0 {
                    2.0 / (deg as f64 + 1.0)
                } else {
                    0.0
                };
                let (nodes, weights) = gauss_legendre(n);
                let approx: f64 = nodes
                    .iter()
                    .zip(weights.iter())
                    .map(|(&x, &w)| w * x.powi(deg as i32))
                    .sum();
                assert!(
                    (approx - exact).abs() < 1e-13,
                    "n={n} deg={deg}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn weights_sum_to_measure() {
        let pts = gauss_on_rect(3, 0.0, 2.0, -1.0, 1.5);
        let total: f64 = pts.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0 * 2.5).abs() < 1e-13);
    }
}
