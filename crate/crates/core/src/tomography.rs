//! Free-evolution shear and phase-space tomography.
//!
//! A projection at angle `theta` integrates `w` along the lines
//! `x cos(theta) - p sin(theta) = u`. With this orientation the position
//! density of a freely evolved state at time `t` is the projection of the
//! initial Wigner function at `theta = -arctan(t/m)`, sampled at offsets
//! `u = x cos(theta)`.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::fft::{forward_in_place, inverse_in_place, trig_interpolate, LaneSpectra};
use crate::numerics::grid::{Constants, Grid1D, PhaseGrid};
use crate::wigner::{marginal_x, WignerGrid};

/// Minimum number of distinct angles `reconstruct` accepts.
pub const MIN_ANGLES: usize = 32;
/// Minimum angular coverage, in degrees, `reconstruct` accepts.
pub const MIN_COVERAGE_DEG: f64 = 140.0;
const ROW_NORM_TOL: f64 = 1e-6;

/// Projections of a phase-space density: one row per angle, all rows
/// sampled at the same offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    angles: Vec<f64>,
    offsets: Vec<f64>,
    values: Array2<f64>,
    times: Option<Vec<f64>>,
}

impl Sinogram {
    /// Validates shapes, finiteness, evenly spaced offsets and that every row
    /// integrates to one.
    pub fn new(angles: Vec<f64>, offsets: Vec<f64>, values: Array2<f64>, times: Option<Vec<f64>>) -> Result<Self> {
        if values.dim() != (angles.len(), offsets.len()) {
            return Err(Error::Size(format!(
                "sinogram values have shape {:?} for {} angles and {} offsets",
                values.dim(),
                angles.len(),
                offsets.len()
            )));
        }
        if let Some(t) = &times {
            if t.len() != angles.len() {
                return Err(Error::Size(format!("{} times for {} angles", t.len(), angles.len())));
            }
        }
        if offsets.len() < 2 {
            return Err(Error::Size("a sinogram needs at least two offsets".into()));
        }
        let du = offsets[1] - offsets[0];
        if !(du > 0.0) || offsets.windows(2).any(|w| ((w[1] - w[0]) - du).abs() > 1e-9 * du.abs().max(1.0)) {
            return Err(Error::Domain("sinogram offsets must be increasing and evenly spaced".into()));
        }
        if values.iter().chain(&angles).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("sinogram contains non-finite entries".into()));
        }
        let sino = Sinogram { angles, offsets, values, times };
        for (i, total) in sino.row_integrals().iter().enumerate() {
            if (total - 1.0).abs() > ROW_NORM_TOL {
                return Err(Error::Domain(format!(
                    "projection at angle {} integrates to {total}, not 1",
                    sino.angles[i]
                )));
            }
        }
        Ok(sino)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn times(&self) -> Option<&[f64]> {
        self.times.as_deref()
    }

    pub fn offset_spacing(&self) -> f64 {
        self.offsets[1] - self.offsets[0]
    }

    pub fn row_integrals(&self) -> Vec<f64> {
        let du = self.offset_spacing();
        self.values.rows().into_iter().map(|r| r.sum() * du).collect()
    }
}

/// `w(x - p t / m, p)`: the free evolution of `w` by time `t`, applied as an
/// exact spectral shift of every momentum row.
pub fn free_shear_check(w0: &WignerGrid, t: f64, consts: Constants) -> Result<WignerGrid> {
    if t == 0.0 {
        return Ok(w0.clone());
    }
    let pg = *w0.pgrid();
    let spectra = LaneSpectra::new(w0.values(), Axis(1), pg.x.dx())?;
    let shifted = spectra.apply(true, |j, k| {
        let s = -pg.p.point(j) * t / consts.mass;
        Complex64::from_polar(1.0, k * s)
    });
    WignerGrid::new(pg, shifted, w0.t() + t, *w0.consts())
}

/// A single projection with its natural offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub theta: f64,
    /// Increasing, evenly spaced.
    pub offsets: Vec<f64>,
    pub values: Vec<f64>,
}

/// Radon projection of `w` at angle `theta` on the offsets the grid
/// produces without resampling: `x_k cos(theta)` when the direction is
/// closer to the `p` axis, `-p_k sin(theta)` otherwise. `theta = 0` is the
/// position marginal; `theta = -pi/2` is the momentum marginal.
pub fn project(w: &WignerGrid, theta: f64) -> Result<Projection> {
    let pg = *w.pgrid();
    let (s, c) = theta.sin_cos();
    let (offsets, mut values) = if c.abs() >= s.abs() {
        // Integrate over p: the row at p_j contributes w((u + p_j sin)/cos, p_j).
        let tan = s / c;
        let spectra = LaneSpectra::new(w.values(), Axis(1), pg.x.dx())?;
        let shifted = spectra.apply(true, |j, k| Complex64::from_polar(1.0, k * pg.p.point(j) * tan));
        let scale = pg.p.dx() / c.abs();
        let values: Vec<f64> = shifted.sum_axis(Axis(0)).iter().map(|v| v * scale).collect();
        (pg.x.points().into_iter().map(|x| x * c).collect::<Vec<_>>(), values)
    } else {
        // Integrate over x: the column at x_i contributes w(x_i, (x_i cos - u)/sin).
        let cot = c / s;
        let spectra = LaneSpectra::new(w.values(), Axis(0), pg.p.dx())?;
        let shifted = spectra.apply(true, |i, k| Complex64::from_polar(1.0, k * pg.x.point(i) * cot));
        let scale = pg.x.dx() / s.abs();
        let values: Vec<f64> = shifted.sum_axis(Axis(1)).iter().map(|v| v * scale).collect();
        (pg.p.points().into_iter().map(|p| -p * s).collect::<Vec<_>>(), values)
    };
    let mut offsets = offsets;
    if offsets.len() > 1 && offsets[1] < offsets[0] {
        offsets.reverse();
        values.reverse();
    }
    Ok(Projection { theta, offsets, values })
}

/// Trigonometric interpolation of evenly spaced samples at arbitrary points;
/// points outside `[first, first + n * spacing)` give zero.
fn resample(offsets: &[f64], values: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    let n = offsets.len();
    let du = offsets[1] - offsets[0];
    let u0 = offsets[0];
    let inside: Vec<(usize, f64)> = targets
        .iter()
        .enumerate()
        .filter_map(|(i, &u)| {
            let pos = (u - u0) / du;
            (pos >= -1e-9 && pos <= (n - 1) as f64 + 1e-9).then_some((i, pos))
        })
        .collect();
    let positions: Vec<f64> = inside.iter().map(|(_, p)| *p).collect();
    let interp = trig_interpolate(values, &positions)?;
    let mut out = vec![0.0; targets.len()];
    for ((i, _), v) in inside.into_iter().zip(interp) {
        out[i] = v;
    }
    Ok(out)
}

/// [`project`] resampled onto the given offsets.
pub fn project_onto(w: &WignerGrid, theta: f64, offsets: &[f64]) -> Result<Vec<f64>> {
    let proj = project(w, theta)?;
    resample(&proj.offsets, &proj.values, offsets)
}

/// Angle at which the position density at time `t` samples the initial
/// Wigner function.
pub fn shear_angle(t: f64, mass: f64) -> f64 {
    -(t / mass).atan()
}

/// Position densities of the freely evolving state at each time, recorded
/// as projections at `theta(t) = -arctan(t/m)`.
///
/// At time `t` the density at position `x` is the projection at offset
/// `u = x cos(theta)`; the row is resampled onto the position grid of `w0`
/// as offsets and divided by `cos(theta)` so that it is a density in `u`.
pub fn simulate_measurement_set(w0: &WignerGrid, times: &[f64], consts: Constants) -> Result<Sinogram> {
    let xg = w0.pgrid().x;
    let offsets = xg.points();
    let rows: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let rho = marginal_x(&free_shear_check(w0, t, consts)?);
            let c = shear_angle(t, consts.mass).cos();
            let xs: Vec<f64> = offsets.iter().map(|u| u / c).collect();
            let sampled = resample(&offsets, &rho, &xs)?;
            Ok(sampled.into_iter().map(|v| v / c).collect())
        })
        .collect::<Result<_>>()?;
    let mut values = Array2::<f64>::zeros((times.len(), offsets.len()));
    for (i, row) in rows.into_iter().enumerate() {
        values.row_mut(i).iter_mut().zip(row).for_each(|(d, s)| *d = s);
    }
    let angles = times.iter().map(|&t| shear_angle(t, consts.mass)).collect();
    Sinogram::new(angles, offsets, values, Some(times.to_vec()))
}

/// Forward projections of `w` at the given angles onto the given offsets.
pub fn radon(w: &WignerGrid, angles: &[f64], offsets: &[f64]) -> Result<Sinogram> {
    let rows: Vec<Vec<f64>> = angles.par_iter().map(|&th| project_onto(w, th, offsets)).collect::<Result<_>>()?;
    let mut values = Array2::<f64>::zeros((angles.len(), offsets.len()));
    for (i, row) in rows.into_iter().enumerate() {
        values.row_mut(i).iter_mut().zip(row).for_each(|(d, s)| *d = s);
    }
    Sinogram::new(angles.to_vec(), offsets.to_vec(), values, None)
}

/// Angles reduced to `[0, pi)`, sorted, with near-duplicates merged.
fn distinct_angles(angles: &[f64]) -> Vec<f64> {
    let mut reduced: Vec<f64> = angles.iter().map(|a| a.rem_euclid(PI)).collect();
    reduced.sort_by(f64::total_cmp);
    reduced.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if reduced.len() > 1 && (PI - reduced[reduced.len() - 1] + reduced[0]) < 1e-9 {
        reduced.pop();
    }
    reduced
}

/// Quadrature weight of each angle: half the gaps to its neighbours, taken
/// cyclically modulo `pi`. Coinciding angles share their weight.
fn angular_weights(angles: &[f64]) -> Vec<f64> {
    let reduced: Vec<f64> = angles.iter().map(|a| a.rem_euclid(PI)).collect();
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| reduced[a].total_cmp(&reduced[b]));
    let n = order.len();
    let mut weights = vec![0.0; n];
    for (pos, &idx) in order.iter().enumerate() {
        let prev = reduced[order[(pos + n - 1) % n]];
        let next = reduced[order[(pos + 1) % n]];
        let before = (reduced[idx] - prev).rem_euclid(PI);
        let after = (next - reduced[idx]).rem_euclid(PI);
        weights[idx] = 0.5 * (before + after);
    }
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (reduced[order[end]] - reduced[order[start]]).abs() < 1e-9 {
            end += 1;
        }
        if end - start > 1 {
            let total: f64 = order[start..end].iter().map(|&i| weights[i]).sum();
            for &i in &order[start..end] {
                weights[i] = total / (end - start) as f64;
            }
        }
        start = end;
    }
    weights
}

/// Checks the angular sampling requirements of [`reconstruct`].
pub fn check_coverage(angles: &[f64]) -> Result<()> {
    let distinct = distinct_angles(angles);
    if distinct.len() < MIN_ANGLES {
        return Err(Error::Coverage(format!(
            "{} distinct projection angles; at least {MIN_ANGLES} are needed",
            distinct.len()
        )));
    }
    let mut largest_gap = PI - distinct[distinct.len() - 1] + distinct[0];
    for w in distinct.windows(2) {
        largest_gap = largest_gap.max(w[1] - w[0]);
    }
    let coverage = (PI - largest_gap).to_degrees();
    if coverage < MIN_COVERAGE_DEG {
        return Err(Error::Coverage(format!(
            "projection angles cover {coverage:.1} degrees; at least {MIN_COVERAGE_DEG} are needed"
        )));
    }
    Ok(())
}

/// Discrete Ram-Lak kernel for sample spacing `tau`.
fn ram_lak(k: i64, tau: f64) -> f64 {
    if k == 0 {
        1.0 / (4.0 * tau * tau)
    } else if k % 2 == 0 {
        0.0
    } else {
        -1.0 / (PI * PI * (k * k) as f64 * tau * tau)
    }
}

/// Filtered rows are refined by this factor before linear interpolation.
const REFINE: usize = 8;

/// Ramp-filters every row of the sinogram by linear convolution with the
/// Ram-Lak kernel, done with zero-padded FFTs, and returns each filtered row
/// band-limited-interpolated onto offsets `REFINE` times finer.
fn filter_rows(sino: &Sinogram) -> Result<Array2<f64>> {
    let n = sino.offsets.len();
    let len = (2 * n).next_power_of_two();
    let tau = sino.offset_spacing();
    let mut kernel: Vec<Complex64> = (0..len)
        .map(|j| {
            let k = if j < len / 2 { j as i64 } else { j as i64 - len as i64 };
            Complex64::new(ram_lak(k, tau), 0.0)
        })
        .collect();
    forward_in_place(&mut kernel)?;
    let rows: Vec<Vec<f64>> = sino
        .values
        .rows()
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|row| {
            let mut buf = vec![Complex64::new(0.0, 0.0); len];
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = Complex64::new(*v, 0.0);
            }
            forward_in_place(&mut buf).expect("padded length is a power of two");
            let fine_len = len * REFINE;
            let mut fine = vec![Complex64::new(0.0, 0.0); fine_len];
            for (j, (b, h)) in buf.iter().zip(&kernel).enumerate() {
                let v = b * h;
                if j == len / 2 {
                    fine[j] = v * 0.5;
                    fine[fine_len - j] = v * 0.5;
                } else if j < len / 2 {
                    fine[j] = v;
                } else {
                    fine[fine_len - (len - j)] = v;
                }
            }
            inverse_in_place(&mut fine).expect("padded length is a power of two");
            let scale = tau * REFINE as f64;
            fine[..(n - 1) * REFINE + 1].iter().map(|c| c.re * scale).collect()
        })
        .collect();
    let mut out = Array2::<f64>::zeros((sino.angles.len(), (n - 1) * REFINE + 1));
    for (i, row) in rows.into_iter().enumerate() {
        out.row_mut(i).iter_mut().zip(row).for_each(|(d, s)| *d = s);
    }
    Ok(out)
}

/// Filtered back-projection onto `target`, normalized to unit integral.
///
/// Rows are back-projected one angle at a time in input order with linear
/// interpolation in the (refined) offset, so the result is bit-reproducible.
pub fn reconstruct(sino: &Sinogram, target: PhaseGrid) -> Result<WignerGrid> {
    reconstruct_with(sino, target, Constants::default())
}

/// [`reconstruct`] with explicit physical constants for the output grid.
pub fn reconstruct_with(sino: &Sinogram, target: PhaseGrid, consts: Constants) -> Result<WignerGrid> {
    check_coverage(&sino.angles)?;
    let filtered = filter_rows(sino)?;
    let weights = angular_weights(&sino.angles);
    let u0 = sino.offsets[0];
    let du = sino.offset_spacing() / REFINE as f64;
    let nu = filtered.ncols();
    let xs = target.x.points();
    let ps = target.p.points();
    let mut acc = Array2::<f64>::zeros(target.shape());
    for (a, (&theta, &weight)) in sino.angles.iter().zip(&weights).enumerate() {
        let (s, c) = theta.sin_cos();
        let q = filtered.row(a);
        acc.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(j, mut row)| {
            let ps_term = ps[j] * s;
            for (i, cell) in row.iter_mut().enumerate() {
                let pos = (xs[i] * c - ps_term - u0) / du;
                if pos < 0.0 || pos > (nu - 1) as f64 {
                    continue;
                }
                let k = (pos.floor() as usize).min(nu - 2);
                let f = pos - k as f64;
                *cell += weight * ((1.0 - f) * q[k] + f * q[k + 1]);
            }
        });
    }
    let total = acc.sum() * target.cell_area();
    if !(total.abs() > 0.0 && total.is_finite()) {
        return Err(Error::Numeric(format!("reconstruction integrates to {total}")));
    }
    acc.mapv_inplace(|v| v / total);
    WignerGrid::new(target, acc, 0.0, consts)
}

/// Evenly spaced angles `theta_k = -pi/2 + k pi / count`, covering a half turn.
pub fn uniform_angles(count: usize) -> Vec<f64> {
    (0..count).map(|k| -PI / 2.0 + PI * k as f64 / count as f64).collect()
}

/// `count` measurement times whose shear angles are evenly spaced over
/// `[-max_angle, max_angle]` (radians, below `pi/2`).
pub fn measurement_times(count: usize, max_angle: f64, mass: f64) -> Result<Vec<f64>> {
    if !(max_angle > 0.0 && max_angle < PI / 2.0) || count < 2 {
        return Err(Error::Domain(format!(
            "measurement angles need 0 < max_angle < pi/2 and at least two times, got {max_angle} and {count}"
        )));
    }
    let step = 2.0 * max_angle / (count - 1) as f64;
    Ok((0..count).map(|k| -mass * (-max_angle + k as f64 * step).tan()).collect())
}

/// Square grid helper for reconstructions: `n` points on `[-half, half)` in
/// both `x` and `p`.
pub fn square_grid(n: usize, half: f64) -> Result<PhaseGrid> {
    Ok(PhaseGrid::new(Grid1D::new(n, -half, half)?, Grid1D::new(n, -half, half)?))
}
