//! Gauss quadrature rules used across the crate.

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial.  Deterministic to the last bit for a given n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = (n as f64) * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// ∫_a^b f, with Gauss–Legendre panels doubled from 16 points until the
/// relative change drops below 1e-10 (capped at 1024 points).
pub fn adaptive_line_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mut n = 16;
    let mut prev = gauss_on_interval(&f, a, b, n);
    loop {
        n *= 2;
        let cur = gauss_on_interval(&f, a, b, n);
        if (cur - prev).abs() <= 1e-10 * (cur.abs() + 1.0) || n >= 1024 {
            return cur;
        }
        prev = cur;
    }
}

pub fn gauss_on_interval<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Symmetric 7-point rule on the reference triangle (barycentric coordinates),
/// exact for polynomials of degree 5.  Weights sum to 1.
pub fn triangle_rule_deg5() -> Vec<([f64; 3], f64)> {
    let s15 = 15.0f64.sqrt();
    let a = (6.0 - s15) / 21.0;
    let b = (6.0 + s15) / 21.0;
    let wa = (155.0 - s15) / 1200.0;
    let wb = (155.0 + s15) / 1200.0;
    let mut rule = vec![([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0)];
    for (c, w) in [(a, wa), (b, wb)] {
        rule.push(([c, c, 1.0 - 2.0 * c], w));
        rule.push(([c, 1.0 - 2.0 * c, c], w));
        rule.push(([1.0 - 2.0 * c, c, c], w));
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        // n-point Gauss is exact through degree 2n-1.
        let (xs, ws) = gauss_legendre(5);
        let mut acc = 0.0;
        for (x, w) in xs.iter().zip(&ws) {
            acc += w * x.powi(8);
        }
        assert_relative_eq!(acc, 2.0 / 9.0, epsilon = 1e-14);
        assert_relative_eq!(ws.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_line_matches_closed_form() {
        let v = adaptive_line_integral(|t| t.sin() * (3.0 * t).exp(), 0.0, 1.5);
        // ∫ e^{3t} sin t dt = e^{3t}(3 sin t − cos t)/10.
        let anti = |t: f64| (3.0 * t).exp() * (3.0 * t.sin() - t.cos()) / 10.0;
        assert_relative_eq!(v, anti(1.5) - anti(0.0), epsilon = 1e-10, max_relative = 1e-12);
    }

    #[test]
    fn triangle_rule_degree() {
        let rule = triangle_rule_deg5();
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14);
        // ∫ λ0^3 λ1^2 over the reference triangle (area 1/2) = 2·3!·2!/(3+2+0+2)! ... use
        // the closed form ∫ λ0^a λ1^b λ2^c dA = a! b! c! / (a+b+c+2)! · 2 · (1/2).
        let exact = {
            let (a, b, c) = (3u64, 2u64, 0u64);
            let fact = |k: u64| (1..=k).product::<u64>() as f64;
            fact(a) * fact(b) * fact(c) / fact(a + b + c + 2)
        };
        let mut acc = 0.0;
        for (l, w) in &rule {
            acc += w * 0.5 * l[0].powi(3) * l[1].powi(2);
        }
        assert_relative_eq!(acc, exact, epsilon = 1e-15);
    }
}
