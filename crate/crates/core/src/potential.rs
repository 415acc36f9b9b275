//! Analytic one-dimensional potentials with exact derivatives of any order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order the tanh recurrence is trusted for. Beyond this
/// the polynomial coefficients in `tanh` lose too many digits to cancellation.
pub const MAX_DERIVATIVE_ORDER: usize = 31;

/// The potentials the toolkit knows how to evaluate analytically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Free,
    /// `m omega^2 x^2 / 2`
    Harmonic { omega: f64 },
    /// `m omega^2 x^2 / 2 + alpha x^4`
    AnharmonicQuartic { omega: f64, alpha: f64 },
    /// `v0 (tanh(x/delta) + 1)(tanh(-x/delta) + 1)`, equal to `v0 sech^2(x/delta)`.
    TanhBarrier { v0: f64, delta: f64 },
}

impl Potential {
    pub fn harmonic(omega: f64) -> Result<Self> {
        positive("omega", omega)?;
        Ok(Potential::Harmonic { omega })
    }

    pub fn anharmonic(omega: f64, alpha: f64) -> Result<Self> {
        positive("omega", omega)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be non-negative, got {alpha}")));
        }
        Ok(Potential::AnharmonicQuartic { omega, alpha })
    }

    pub fn barrier(v0: f64, delta: f64) -> Result<Self> {
        if !v0.is_finite() {
            return Err(Error::Domain(format!("barrier height must be finite, got {v0}")));
        }
        positive("delta", delta)?;
        Ok(Potential::TanhBarrier { v0, delta })
    }

    pub fn value(&self, x: f64, mass: f64) -> f64 {
        self.derivative(x, 0, mass)
    }

    /// `d^order V / dx^order` at `x`; order 0 is the value itself.
    pub fn derivative(&self, x: f64, order: usize, mass: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::Harmonic { omega } => {
                let k = mass * omega * omega;
                match order {
                    0 => 0.5 * k * x * x,
                    1 => k * x,
                    2 => k,
                    _ => 0.0,
                }
            }
            Potential::AnharmonicQuartic { omega, alpha } => {
                let k = mass * omega * omega;
                match order {
                    0 => 0.5 * k * x * x + alpha * x.powi(4),
                    1 => k * x + 4.0 * alpha * x.powi(3),
                    2 => k + 12.0 * alpha * x * x,
                    3 => 24.0 * alpha * x,
                    4 => 24.0 * alpha,
                    _ => 0.0,
                }
            }
            Potential::TanhBarrier { v0, delta } => {
                let coeffs = tanh_derivative_coefficients(order, delta);
                v0 * horner(&coeffs, (x / delta).tanh())
            }
        }
    }

    /// `V^(order)` on every point of `xs`, sharing the per-order setup.
    pub fn derivative_profile(&self, xs: &[f64], order: usize, mass: f64) -> Vec<f64> {
        match *self {
            Potential::TanhBarrier { v0, delta } => {
                let coeffs = tanh_derivative_coefficients(order, delta);
                xs.iter().map(|&x| v0 * horner(&coeffs, (x / delta).tanh())).collect()
            }
            _ => xs.iter().map(|&x| self.derivative(x, order, mass)).collect(),
        }
    }

    /// Order beyond which every derivative vanishes identically, for
    /// polynomial potentials.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            Potential::Free => Some(0),
            Potential::Harmonic { .. } => Some(2),
            Potential::AnharmonicQuartic { .. } => Some(4),
            Potential::TanhBarrier { .. } => None,
        }
    }

    /// Harmonic frequency of the quadratic part, if there is one.
    pub fn harmonic_omega(&self) -> Option<f64> {
        match *self {
            Potential::Harmonic { omega } | Potential::AnharmonicQuartic { omega, .. } => Some(omega),
            _ => None,
        }
    }

    pub fn check_order(&self, order: usize) -> Result<()> {
        if self.polynomial_degree().is_none() && order > MAX_DERIVATIVE_ORDER {
            return Err(Error::Capability(format!(
                "derivative of order {order} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}"
            )));
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Coefficients (in powers of `T = tanh(x/delta)`) of
/// `d^order/dx^order [1 - T^2]`, using `dT/dx = (1 - T^2)/delta`.
fn tanh_derivative_coefficients(order: usize, delta: f64) -> Vec<f64> {
    let mut poly = vec![1.0, 0.0, -1.0];
    for _ in 0..order {
        // d/dx P(T) = P'(T) (1 - T^2) / delta
        let dp: Vec<f64> = poly.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
        let mut next = vec![0.0; dp.len() + 2];
        for (k, &c) in dp.iter().enumerate() {
            next[k] += c / delta;
            next[k + 2] -= c / delta;
        }
        poly = next;
    }
    poly
}

/// A potential that may depend on time. The split-operator propagator asks
/// for values at the midpoint of each step.
pub trait TimePotential: Sync {
    fn value_at(&self, x: f64, t: f64, mass: f64) -> f64;

    /// Whether `value_at` ignores `t`, which lets the propagator cache the
    /// potential phase.
    fn is_static(&self) -> bool {
        false
    }
}

impl TimePotential for Potential {
    fn value_at(&self, x: f64, _t: f64, mass: f64) -> f64 {
        self.value(x, mass)
    }

    fn is_static(&self) -> bool {
        true
    }
}

/// An explicitly time-dependent potential given by a closure `V(x, t)`.
pub struct Driven<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Sync> TimePotential for Driven<F> {
    fn value_at(&self, x: f64, t: f64, _mass: f64) -> f64 {
        (self.0)(x, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference(v: &Potential, x: f64, order: usize) -> f64 {
        let h = 1e-3;
        let f = |d: f64| v.derivative(x + d, order - 1, 1.0);
        (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn polynomial_derivatives_terminate() {
        let h = Potential::harmonic(1.3).unwrap();
        let q = Potential::anharmonic(0.5, 0.25).unwrap();
        for x in [-2.0, 0.0, 0.7] {
            for k in 3..10 {
                assert_eq!(h.derivative(x, k, 1.0), 0.0);
            }
            for k in 5..10 {
                assert_eq!(q.derivative(x, k, 1.0), 0.0);
            }
        }
    }

    #[test]
    fn barrier_shape() {
        let b = Potential::barrier(64.0, 0.125).unwrap();
        assert_eq!(b.value(0.0, 1.0), 64.0);
        assert!(b.value(10.0, 1.0) < 1e-30);
        assert!(b.value(-10.0, 1.0) < 1e-30);
        let x: f64 = 0.07;
        let product = 64.0 * ((x / 0.125).tanh() + 1.0) * ((-x / 0.125).tanh() + 1.0);
        assert!((b.value(x, 1.0) - product).abs() < 1e-12);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let b = Potential::barrier(2.0, 0.8).unwrap();
        let q = Potential::anharmonic(0.5, 0.75).unwrap();
        for &x in &[-1.1, -0.3, 0.0, 0.45, 1.7] {
            for order in 1..6 {
                for v in [&b, &q] {
                    let a = v.derivative(x, order, 1.0);
                    let fd = finite_difference(v, x, order);
                    assert!((a - fd).abs() < 1e-6 * (1.0 + a.abs()), "{v:?} order {order} at {x}: {a} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn derivative_profile_matches_pointwise() {
        let b = Potential::barrier(64.0, 0.125).unwrap();
        let xs = [-0.3, 0.01, 0.2];
        let prof = b.derivative_profile(&xs, 3, 1.0);
        for (x, v) in xs.iter().zip(prof) {
            assert_eq!(v, b.derivative(*x, 3, 1.0));
        }
    }

    #[test]
    fn barrier_order_limit() {
        let b = Potential::barrier(1.0, 1.0).unwrap();
        assert!(b.check_order(MAX_DERIVATIVE_ORDER).is_ok());
        assert!(matches!(b.check_order(MAX_DERIVATIVE_ORDER + 1), Err(Error::Capability(_))));
        assert!(Potential::Free.check_order(1000).is_ok());
    }

    #[test]
    fn constructors_validate() {
        assert!(Potential::harmonic(0.0).is_err());
        assert!(Potential::anharmonic(1.0, -0.1).is_err());
        assert!(Potential::barrier(1.0, 0.0).is_err());
    }
}
