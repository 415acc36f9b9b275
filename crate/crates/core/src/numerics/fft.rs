//! Discrete Fourier transforms and spectral differentiation.
//!
//! Thin layer over `rustfft` that enforces power-of-two lengths and the
//! normalization used throughout the crate: the forward transform is
//! unnormalized with kernel `exp(-2 pi i jk / n)`, the inverse carries the
//! `1/n`.

use std::cell::RefCell;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::{wavenumbers, Grid1D};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Size(format!("FFT length must be a power of two, got {n}")));
    }
    Ok(())
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// In-place unnormalized forward DFT.
pub fn forward_in_place(data: &mut [Complex64]) -> Result<()> {
    check_len(data.len())?;
    forward_plan(data.len()).process(data);
    Ok(())
}

/// In-place inverse DFT, normalized by `1/n`.
pub fn inverse_in_place(data: &mut [Complex64]) -> Result<()> {
    inverse_unnormalized_in_place(data)?;
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    Ok(())
}

/// In-place inverse DFT without the `1/n` factor (kernel `exp(+2 pi i jk / n)`).
pub fn inverse_unnormalized_in_place(data: &mut [Complex64]) -> Result<()> {
    check_len(data.len())?;
    inverse_plan(data.len()).process(data);
    Ok(())
}

pub fn fft_forward(field: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = field.to_vec();
    forward_in_place(&mut out)?;
    Ok(out)
}

pub fn fft_inverse(spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = spectrum.to_vec();
    inverse_in_place(&mut out)?;
    Ok(out)
}

/// `(i k)^order`, with the unpaired Nyquist bin dropped for odd orders so
/// that real fields stay real.
fn derivative_symbol(k: f64, order: u32, nyquist: bool) -> Complex64 {
    if nyquist && order % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, k).powu(order)
}

/// Spectral derivative of order `order` of a periodic field sampled on `grid`.
pub fn spectral_derivative(field: &[Complex64], grid: &Grid1D, order: u32) -> Result<Vec<Complex64>> {
    if field.len() != grid.n() {
        return Err(Error::Size(format!("field has {} samples but grid has {}", field.len(), grid.n())));
    }
    let n = field.len();
    let mut spec = fft_forward(field)?;
    let k = grid.wavenumbers();
    for (j, s) in spec.iter_mut().enumerate() {
        *s *= derivative_symbol(k[j], order, j == n / 2);
    }
    inverse_in_place(&mut spec)?;
    Ok(spec)
}

/// Spectral derivative of a real periodic field with sample spacing `dx`.
pub fn spectral_derivative_real(field: &[f64], dx: f64, order: u32) -> Result<Vec<f64>> {
    let n = field.len();
    check_len(n)?;
    let mut spec: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_in_place(&mut spec)?;
    let k = wavenumbers(n, dx);
    for (j, s) in spec.iter_mut().enumerate() {
        *s *= derivative_symbol(k[j], order, j == n / 2);
    }
    inverse_in_place(&mut spec)?;
    Ok(spec.into_iter().map(|c| c.re).collect())
}

/// Evaluates the band-limited trigonometric interpolant of periodic samples
/// at fractional sample positions. Positions are in units of the sample
/// index; the Nyquist bin is split symmetrically.
pub fn trig_interpolate(samples: &[f64], positions: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    check_len(n)?;
    let mut spec: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_in_place(&mut spec)?;
    let scale = 1.0 / n as f64;
    let omega = 2.0 * std::f64::consts::PI / n as f64;
    Ok(positions
        .iter()
        .map(|&xi| {
            let mut acc = spec[0].re;
            for j in 1..n / 2 {
                let ph = Complex64::from_polar(1.0, omega * j as f64 * xi);
                acc += 2.0 * (spec[j] * ph).re;
            }
            if n >= 2 {
                // Nyquist bin, split between +n/2 and -n/2.
                acc += spec[n / 2].re * (omega * (n / 2) as f64 * xi).cos();
            }
            acc * scale
        })
        .collect())
}

/// Lane-wise spectra of a real 2-D array along one axis, kept around so that
/// several spectral multipliers can be applied without re-transforming.
///
/// For phase-space arrays (rows = momentum, columns = position), axis 1 runs
/// along `x` and axis 0 along `p`.
pub struct LaneSpectra {
    axis: Axis,
    /// One spectrum per lane, each of length `len`.
    spectra: Vec<Vec<Complex64>>,
    wavenumbers: Vec<f64>,
    shape: (usize, usize),
}

impl LaneSpectra {
    pub fn new(data: &Array2<f64>, axis: Axis, spacing: f64) -> Result<Self> {
        let len = data.len_of(axis);
        check_len(len)?;
        let spectra: Vec<Vec<Complex64>> = data
            .lanes(axis)
            .into_iter()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|lane| {
                let mut buf: Vec<Complex64> = lane.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                forward_plan(len).process(&mut buf);
                buf
            })
            .collect();
        Ok(LaneSpectra { axis, spectra, wavenumbers: wavenumbers(len, spacing), shape: data.dim() })
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Applies `symbol(lane, k)` to every spectral coefficient and returns the
    /// real part of the inverse transform. `lane` is the index along the
    /// other axis. The Nyquist bin receives `symbol(lane, k_nyq)` only when
    /// `keep_nyquist` is set.
    pub fn apply<F>(&self, keep_nyquist: bool, symbol: F) -> Array2<f64>
    where
        F: Fn(usize, f64) -> Complex64 + Sync,
    {
        let len = self.wavenumbers.len();
        let k = &self.wavenumbers;
        let lanes: Vec<Vec<f64>> = self
            .spectra
            .par_iter()
            .enumerate()
            .map(|(lane, spec)| {
                let mut buf: Vec<Complex64> = spec
                    .iter()
                    .enumerate()
                    .map(|(j, &s)| {
                        if j == len / 2 && !keep_nyquist {
                            Complex64::new(0.0, 0.0)
                        } else {
                            s * symbol(lane, k[j])
                        }
                    })
                    .collect();
                inverse_plan(len).process(&mut buf);
                let scale = 1.0 / len as f64;
                buf.into_iter().map(|c| c.re * scale).collect()
            })
            .collect();
        let mut out = Array2::<f64>::zeros(self.shape);
        for (lane, mut view) in lanes.iter().zip(out.lanes_mut(self.axis)) {
            for (dst, &src) in view.iter_mut().zip(lane) {
                *dst = src;
            }
        }
        out
    }

    /// Spectral derivative of the given order along the lane axis.
    pub fn derivative(&self, order: u32) -> Array2<f64> {
        self.apply(order % 2 == 0, |_, k| Complex64::new(0.0, k).powu(order))
    }
}

/// Spectral derivative of a real 2-D array along `axis`.
pub fn derivative_along(data: &Array2<f64>, axis: Axis, spacing: f64, order: u32) -> Result<Array2<f64>> {
    Ok(LaneSpectra::new(data, axis, spacing)?.derivative(order))
}
