//! Orthogonal polynomials by recurrence.

use std::f64::consts::PI;

/// Laguerre polynomial `L_n(x)` from the three-term recurrence
/// `(k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}`.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized Hermite function `h_n(xi) = (2^n n! sqrt(pi))^(-1/2) H_n(xi) exp(-xi^2/2)`,
/// evaluated by its own recurrence so that large `n` does not overflow.
pub fn hermite_function(n: usize, xi: f64) -> f64 {
    let mut prev = PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if n == 0 {
        return prev;
    }
    let mut cur = 2f64.sqrt() * xi * prev;
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Explicit coefficient sum `sum_k (-1)^k C(n,k) x^k / k!`.
    fn laguerre_explicit(n: usize, x: f64) -> f64 {
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut fact = 1.0;
        for k in 0..=n {
            if k > 0 {
                binom *= (n - k + 1) as f64 / k as f64;
                fact *= k as f64;
            }
            sum += (-1f64).powi(k as i32) * binom * x.powi(k as i32) / fact;
        }
        sum
    }

    #[test]
    fn laguerre_at_zero_is_one() {
        for n in 0..30 {
            assert!((laguerre(n, 0.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn laguerre_low_orders() {
        assert_eq!(laguerre(2, 2.0), -1.0);
        assert!((laguerre(5, 3.7) - laguerre_explicit(5, 3.7)).abs() < 1e-12);
        for n in 0..10 {
            for &x in &[-2.5, 0.3, 1.0, 4.2, 9.0] {
                let (a, b) = (laguerre(n, x), laguerre_explicit(n, x));
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let h = 0.01;
        let xs: Vec<f64> = (0..2400).map(|i| -12.0 + i as f64 * h).collect();
        for m in 0..6 {
            for n in 0..6 {
                let s: f64 = xs.iter().map(|&x| hermite_function(m, x) * hermite_function(n, x)).sum::<f64>() * h;
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-10, "m={m} n={n} s={s}");
            }
        }
    }

    #[test]
    fn hermite_matches_closed_forms() {
        let x: f64 = 0.7;
        let g = PI.powf(-0.25) * (-0.5 * x * x).exp();
        assert!((hermite_function(1, x) - g * 2f64.sqrt() * x).abs() < 1e-14);
        // H_3 = 8x^3 - 12x, norm (2^3 3!)^(-1/2)
        let h3 = (8.0 * x.powi(3) - 12.0 * x) / 48f64.sqrt() * g;
        assert!((hermite_function(3, x) - h3).abs() < 1e-14);
    }
}
