use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use wlab::numerics::fft::{fft_forward, fft_inverse, spectral_derivative, spectral_derivative_real, trig_interpolate};
use wlab::numerics::special::{hermite_function, laguerre};
use wlab::{Error, Grid1D};

fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn signal() -> impl Strategy<Value = Vec<Complex64>> {
    (1u32..8).prop_flat_map(|k| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), 1usize << k)
    })
}

proptest! {
    #[test]
    fn fft_agrees_with_direct_sum(x in signal()) {
        let fast = fft_forward(&x).unwrap();
        for (a, b) in fast.iter().zip(naive_dft(&x)) {
            prop_assert!((a - b).norm() < 1e-10 * x.len() as f64);
        }
    }

    #[test]
    fn inverse_undoes_forward(x in signal()) {
        let back = fft_inverse(&fft_forward(&x).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_band_limited_mode(m in 1i32..20, shift in 0.0f64..6.3) {
        let g = Grid1D::new(64, -PI, PI).unwrap();
        let f: Vec<Complex64> = g.points().iter().map(|x| Complex64::new((m as f64 * x + shift).sin(), 0.0)).collect();
        let d = spectral_derivative(&f, &g, 1).unwrap();
        for (x, v) in g.points().iter().zip(&d) {
            prop_assert!((v.re - m as f64 * (m as f64 * x + shift).cos()).abs() < 1e-10);
            prop_assert!(v.im.abs() < 1e-10);
        }
    }
}

#[test]
fn non_power_of_two_lengths_are_rejected() {
    let x = vec![Complex64::new(1.0, 0.0); 12];
    assert!(matches!(fft_forward(&x), Err(Error::Size(_))));
    assert!(matches!(Grid1D::new(100, 0.0, 1.0), Err(Error::Size(_))));
}

#[test]
fn second_derivative_of_gaussian() {
    let g = Grid1D::new(256, -10.0, 10.0).unwrap();
    let xs = g.points();
    let f: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
    let d2 = spectral_derivative_real(&f, g.dx(), 2).unwrap();
    for (x, v) in xs.iter().zip(d2) {
        let exact = (4.0 * x * x - 2.0) * (-x * x).exp();
        assert!((v - exact).abs() < 1e-10, "x = {x}");
    }
}

#[test]
fn interpolation_between_samples() {
    let n = 32;
    let samples: Vec<f64> = (0..n).map(|j| (2.0 * PI * 3.0 * j as f64 / n as f64).cos() + 0.5).collect();
    let positions = [0.25, 7.5, 13.1, 31.9];
    let values = trig_interpolate(&samples, &positions).unwrap();
    for (s, v) in positions.iter().zip(values) {
        assert!((v - ((2.0 * PI * 3.0 * s / n as f64).cos() + 0.5)).abs() < 1e-12);
    }
}

#[test]
fn laguerre_orthogonality() {
    // Composite Simpson on [0, 80] with weight exp(-x).
    let (a, b, cells) = (0.0, 80.0, 16000);
    let h = (b - a) / cells as f64;
    for m in 0..6 {
        for n in m..6 {
            let f = |x: f64| (-x).exp() * laguerre(m, x) * laguerre(n, x);
            let mut s = f(a) + f(b);
            for i in 1..cells {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let integral = s * h / 3.0;
            let expected = if m == n { 1.0 } else { 0.0 };
            assert!((integral - expected).abs() < 1e-7, "m={m} n={n}: {integral}");
        }
    }
}

/// Physicists' Hermite polynomial from its explicit coefficient sum.
fn hermite_explicit(n: usize, x: f64) -> f64 {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    (0..=n / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * fact(n) / (fact(m) * fact(n - 2 * m)) * (2.0 * x).powi((n - 2 * m) as i32)
        })
        .sum()
}

#[test]
fn hermite_functions_match_explicit_polynomials() {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    for n in 0..10 {
        let norm = (2f64.powi(n as i32) * fact(n) * PI.sqrt()).sqrt();
        for xi in [-3.0, -1.2, 0.0, 0.4, 2.5] {
            let expected = hermite_explicit(n, xi) * (-0.5 * xi * xi).exp() / norm;
            assert!((hermite_function(n, xi) - expected).abs() < 1e-12, "n={n} xi={xi}");
        }
    }
}

#[test]
fn hermite_functions_stay_finite_at_high_order() {
    let v = hermite_function(300, 5.0);
    assert!(v.is_finite() && v.abs() < 1.0);
}
