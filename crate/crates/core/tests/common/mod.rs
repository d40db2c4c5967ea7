//! Independent numerical oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫_a^b f` with composite Gauss–Legendre on panels no wider than `panel`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panel: f64, rule: &[(f64, f64)]) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = ((b - a) / panel).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let mid = lo + 0.5 * h;
        for &(x, w) in rule {
            total += w * 0.5 * h * f(mid + 0.5 * h * x);
        }
    }
    total
}

/// Probability that a zero-mean Gaussian of variance `sigma2/2` lands in the
/// bins `jd + k` (all `j`) of width `spacing`, by direct quadrature.
pub fn quadrature_shift_probability(spacing: f64, d: i64, sigma2: f64, k: i64) -> f64 {
    let var = 0.5 * sigma2;
    let sd = var.sqrt();
    let density = |x: f64| (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
    let rule = gauss_legendre(24);
    let reach = 40.0 * sd;
    let mut total = 0.0;
    for j in -20..=20 {
        let n = (j * d + k) as f64;
        let lo = ((n - 0.5) * spacing).max(-reach);
        let hi = ((n + 0.5) * spacing).min(reach);
        total += integrate(density, lo, hi, 0.25 * sd, &rule);
    }
    total
}

/// Brute-force binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}
