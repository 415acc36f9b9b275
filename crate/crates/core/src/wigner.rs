//! Wigner quasiprobability distributions of pure states.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::fft::{forward_in_place, inverse_in_place, inverse_unnormalized_in_place};
use crate::numerics::grid::{signed_index, Constants, Grid1D, PhaseGrid};
use crate::numerics::quadrature::trapezoid_2d;
use crate::numerics::special::laguerre;
use crate::state::{GaussianParams, MomentumWaveFunction, WaveFunction, SUPPORT_GUARD};

/// Largest imaginary part the transform may produce before it is treated as
/// a numerical failure.
pub const REALNESS_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-6;

/// A real field `w(x, p, t)` on a phase grid. Rows index momentum, columns
/// index position.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pgrid: PhaseGrid,
    values: Array2<f64>,
    t: f64,
    consts: Constants,
}

impl WignerGrid {
    pub fn new(pgrid: PhaseGrid, values: Array2<f64>, t: f64, consts: Constants) -> Result<Self> {
        if values.dim() != pgrid.shape() {
            return Err(Error::Size(format!(
                "Wigner values have shape {:?}, phase grid expects {:?}",
                values.dim(),
                pgrid.shape()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("Wigner values contain non-finite entries".into()));
        }
        Ok(WignerGrid { pgrid, values, t, consts })
    }

    pub fn pgrid(&self) -> &PhaseGrid {
        &self.pgrid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn consts(&self) -> &Constants {
        &self.consts
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// Same grid and metadata, new values.
    pub fn with_values(&self, values: Array2<f64>) -> Result<Self> {
        WignerGrid::new(self.pgrid, values, self.t, self.consts)
    }

    /// `∬ w dx dp`.
    pub fn integral(&self) -> f64 {
        trapezoid_2d(&self.values, &self.pgrid).expect("shape checked at construction")
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Convex combination `sum_i c_i w_i` of grids sharing one phase grid.
    pub fn mixture(parts: &[(f64, &WignerGrid)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::Domain("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|(c, _)| c).sum();
        if parts.iter().any(|(c, _)| *c < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("mixture weights must be non-negative and sum to 1, got sum {total}")));
        }
        let mut acc = Array2::<f64>::zeros(first.values.dim());
        for (c, w) in parts {
            require_same_grid(first, w)?;
            acc.scaled_add(*c, &w.values);
        }
        first.with_values(acc)
    }

    /// `<f(x)>` from the position marginal.
    pub fn expect_x(&self, f: impl Fn(f64) -> f64) -> f64 {
        let dx = self.pgrid.x.dx();
        marginal_x(self).iter().enumerate().map(|(i, r)| f(self.pgrid.x.point(i)) * r).sum::<f64>() * dx
    }

    /// `<g(p)>` from the momentum marginal.
    pub fn expect_p(&self, g: impl Fn(f64) -> f64) -> f64 {
        let dp = self.pgrid.p.dx();
        marginal_p(self).iter().enumerate().map(|(j, r)| g(self.pgrid.p.point(j)) * r).sum::<f64>() * dp
    }
}

fn require_same_grid(a: &WignerGrid, b: &WignerGrid) -> Result<()> {
    if !a.pgrid.same_as(&b.pgrid) {
        return Err(Error::Size(format!(
            "phase grids differ: {:?} vs {:?}",
            a.pgrid.shape(),
            b.pgrid.shape()
        )));
    }
    Ok(())
}

fn require_normalized(norm: f64) -> Result<()> {
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Domain(format!("Wigner transform needs a normalized state, norm is {norm}")));
    }
    Ok(())
}

/// Band-limited interpolation of periodic samples onto a grid twice as fine:
/// element `2i` of the result equals input `i`.
fn refine_twice(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut spec = values.to_vec();
    forward_in_place(&mut spec).expect("grid sizes are powers of two");
    let mut padded = vec![Complex64::new(0.0, 0.0); 2 * n];
    for j in 0..n {
        let k = signed_index(j, n);
        if j == n / 2 {
            // Split the Nyquist coefficient between +n/2 and -n/2.
            padded[n / 2] = spec[j] * 0.5;
            padded[2 * n - n / 2] = spec[j] * 0.5;
        } else {
            padded[k.rem_euclid(2 * n as i64) as usize] = spec[j];
        }
    }
    inverse_in_place(&mut padded).expect("grid sizes are powers of two");
    padded.iter_mut().for_each(|v| *v *= 2.0);
    padded
}

fn check_realness(max_imag: f64) -> Result<()> {
    if max_imag > REALNESS_TOL {
        return Err(Error::Numeric(format!("Wigner transform left an imaginary residue of {max_imag:.3e}")));
    }
    Ok(())
}

/// Wigner transform of a position-space wave function.
///
/// The result lives on [`PhaseGrid::for_wavefunction`]: the same position
/// samples and `n` centered momenta spaced `pi hbar / (n dx)`. Half-step
/// arguments `x ± s/2` come from a doubled-resolution spectral interpolant;
/// correlation samples that fall outside the domain are zero.
pub fn wigner_transform(psi: &WaveFunction) -> Result<WignerGrid> {
    wigner_transform_guarded(psi, SUPPORT_GUARD)
}

/// [`wigner_transform`] accepting boundary amplitudes up to `guard` times
/// the peak.
pub fn wigner_transform_guarded(psi: &WaveFunction, guard: f64) -> Result<WignerGrid> {
    psi.check_support_with(guard)?;
    require_normalized(psi.norm_squared())?;
    let grid = *psi.grid();
    let consts = *psi.consts();
    let n = grid.n();
    let pgrid = PhaseGrid::for_wavefunction(&grid, &consts);
    let fine = refine_twice(psi.values());
    let scale = grid.dx() / (2.0 * PI * consts.hbar);

    let columns: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut c = vec![Complex64::new(0.0, 0.0); 2 * n];
            for k in -(n as i64)..(n as i64) {
                let a = 2 * i as i64 + k;
                let b = 2 * i as i64 - k;
                if (0..2 * n as i64).contains(&a) && (0..2 * n as i64).contains(&b) {
                    c[k.rem_euclid(2 * n as i64) as usize] = fine[a as usize].conj() * fine[b as usize];
                }
            }
            inverse_unnormalized_in_place(&mut c).expect("grid sizes are powers of two");
            let mut max_imag = 0.0f64;
            let col = (0..n)
                .map(|jj| {
                    let j = jj as i64 - (n / 2) as i64;
                    let v = c[j.rem_euclid(2 * n as i64) as usize] * scale;
                    max_imag = max_imag.max(v.im.abs());
                    v.re
                })
                .collect();
            (col, max_imag)
        })
        .collect();

    let mut values = Array2::<f64>::zeros(pgrid.shape());
    let mut max_imag = 0.0f64;
    for (i, (col, imag)) in columns.into_iter().enumerate() {
        max_imag = max_imag.max(imag);
        values.column_mut(i).iter_mut().zip(col).for_each(|(d, s)| *d = s);
    }
    check_realness(max_imag)?;
    WignerGrid::new(pgrid, values, psi.t(), consts)
}

/// Wigner transform computed from the momentum representation, correlating
/// `Psi~*(p + s/2) Psi~(p - s/2)` and transforming over `s`. Produces the
/// same phase grid as [`wigner_transform`] of the matching position state.
pub fn wigner_from_momentum(psi_tilde: &MomentumWaveFunction) -> Result<WignerGrid> {
    let psi = psi_tilde.to_position();
    psi.check_support()?;
    require_normalized(psi_tilde.norm_squared())?;
    let grid = *psi.grid();
    let consts = *psi.consts();
    let hbar = consts.hbar;
    let n = grid.n();
    let pgrid = PhaseGrid::for_wavefunction(&grid, &consts);
    let dp = pgrid.p.dx();
    let delta = 0.5 * dp;

    // Psi~ at p = r * delta for r in [-2n, 2n), from a zero-padded 4n DFT.
    let mut padded = vec![Complex64::new(0.0, 0.0); 4 * n];
    padded[..n].copy_from_slice(psi.values());
    forward_in_place(&mut padded).expect("grid sizes are powers of two");
    let amp = grid.dx() / (2.0 * PI * hbar).sqrt();
    let x0 = grid.x_min();
    let fine = |r: i64| -> Complex64 {
        let p = r as f64 * delta;
        padded[r.rem_euclid(4 * n as i64) as usize] * Complex64::from_polar(amp, -x0 * p / hbar)
    };

    let scale = dp / (2.0 * PI * hbar);
    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|jj| {
            let j = jj as i64 - (n / 2) as i64;
            let mut c = vec![Complex64::new(0.0, 0.0); 2 * n];
            for k in -(n as i64)..(n as i64) {
                let s = k as f64 * dp;
                let mut v = fine(2 * j + k).conj() * fine(2 * j - k) * Complex64::from_polar(1.0, -s * x0 / hbar);
                if k == -(n as i64) {
                    // The +n partner aliases onto this bin; together they are real.
                    v = Complex64::new(v.re, 0.0);
                }
                c[k.rem_euclid(2 * n as i64) as usize] = v;
            }
            forward_in_place(&mut c).expect("grid sizes are powers of two");
            let mut max_imag = 0.0f64;
            let row = c[..n]
                .iter()
                .map(|v| {
                    let v = v * scale;
                    max_imag = max_imag.max(v.im.abs());
                    v.re
                })
                .collect();
            (row, max_imag)
        })
        .collect();

    let mut values = Array2::<f64>::zeros(pgrid.shape());
    let mut max_imag = 0.0f64;
    for (jj, (row, imag)) in rows.into_iter().enumerate() {
        max_imag = max_imag.max(imag);
        values.row_mut(jj).iter_mut().zip(row).for_each(|(d, s)| *d = s);
    }
    check_realness(max_imag)?;
    WignerGrid::new(pgrid, values, psi_tilde.t(), consts)
}

/// `rho(x) = ∫ w dp` on the position axis.
pub fn marginal_x(w: &WignerGrid) -> Vec<f64> {
    let dp = w.pgrid.p.dx();
    w.values.sum_axis(Axis(0)).iter().map(|v| v * dp).collect()
}

/// `∫ w dx` on the momentum axis.
pub fn marginal_p(w: &WignerGrid) -> Vec<f64> {
    let dx = w.pgrid.x.dx();
    w.values.sum_axis(Axis(1)).iter().map(|v| v * dx).collect()
}

/// `2 pi hbar ∬ w^2`, equal to one for pure states.
pub fn purity(w: &WignerGrid) -> f64 {
    2.0 * PI * w.consts.hbar * w.values.iter().map(|v| v * v).sum::<f64>() * w.pgrid.cell_area()
}

/// `2 pi hbar ∬ w1 w2`, equal to `|<Psi1|Psi2>|^2` for pure states.
pub fn overlap(w1: &WignerGrid, w2: &WignerGrid) -> Result<f64> {
    require_same_grid(w1, w2)?;
    let dot: f64 = w1.values.iter().zip(w2.values.iter()).map(|(a, b)| a * b).sum();
    Ok(2.0 * PI * w1.consts.hbar * dot * w1.pgrid.cell_area())
}

/// Phase-space volume of the negative part, `∬ max(0, -w)`.
pub fn negativity_volume(w: &WignerGrid) -> f64 {
    w.values.iter().map(|&v| (-v).max(0.0)).sum::<f64>() * w.pgrid.cell_area()
}

/// Negativity volume of the band-limited interpolant of `w`.
///
/// The grid sum in [`negativity_volume`] converges only quadratically in
/// the grid spacing because `max(0, -w)` has a kink on the nodal lines. Here
/// every momentum row of the two-dimensional trigonometric interpolant is
/// split at its roots and integrated in closed form, and the row integrals
/// are combined by adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn negativity_volume_converged(w: &WignerGrid, tol: f64) -> f64 {
    let bl = BandLimited::new(w);
    let np = w.pgrid.p.n();
    let dp = w.pgrid.p.dx();
    let p0 = w.pgrid.p.x_min();
    let panel_tol = tol / np as f64;
    (0..np)
        .into_par_iter()
        .map(|j| {
            let a = p0 + j as f64 * dp;
            let b = a + dp;
            let fa = bl.row_negativity(a);
            let fb = bl.row_negativity(b);
            let fm = bl.row_negativity(0.5 * (a + b));
            adaptive_simpson(&|p| bl.row_negativity(p), a, b, fa, fm, fb, panel_tol, 24)
        })
        .sum()
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) + adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1)
}

/// Two-dimensional trigonometric interpolant of a phase-space field.
struct BandLimited {
    /// Spectrum along `x` of every momentum row.
    rows: Array2<Complex64>,
    nx: usize,
    np: usize,
    x0: f64,
    lx: f64,
    p0: f64,
    lp: f64,
    /// Values above `-floor` count as non-negative, so that round-off
    /// oscillations in the tails do not register as nodal lines.
    floor: f64,
}

impl BandLimited {
    fn new(w: &WignerGrid) -> Self {
        let (np, nx) = w.pgrid.shape();
        let mut rows = Array2::<Complex64>::zeros((np, nx));
        for (j, row) in w.values.rows().into_iter().enumerate() {
            let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            forward_in_place(&mut buf).expect("grid sizes are powers of two");
            rows.row_mut(j).iter_mut().zip(buf).for_each(|(d, s)| *d = s);
        }
        // Transform along p as well, so that rows can be synthesized at any p.
        for k in 0..nx {
            let mut buf: Vec<Complex64> = rows.column(k).to_vec();
            forward_in_place(&mut buf).expect("grid sizes are powers of two");
            rows.column_mut(k).iter_mut().zip(buf).for_each(|(d, s)| *d = s);
        }
        BandLimited {
            rows,
            nx,
            np,
            x0: w.pgrid.x.x_min(),
            lx: w.pgrid.x.length(),
            p0: w.pgrid.p.x_min(),
            lp: w.pgrid.p.length(),
            floor: 1e-13 * w.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }

    /// Spectral coefficients along `x` of the interpolated row at momentum `p`,
    /// scaled so that the row is `sum_k c_k e^{i k u}` with the Nyquist term
    /// read as a cosine.
    fn row_coefficients(&self, p: f64) -> Vec<Complex64> {
        let theta = 2.0 * PI * (p - self.p0) / self.lp;
        let factors: Vec<Complex64> = (0..self.np)
            .map(|q| {
                if q == self.np / 2 {
                    Complex64::new((q as f64 * theta).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, signed_index(q, self.np) as f64 * theta)
                }
            })
            .collect();
        let scale = 1.0 / (self.np * self.nx) as f64;
        (0..self.nx)
            .map(|k| self.rows.column(k).iter().zip(&factors).map(|(a, b)| a * b).sum::<Complex64>() * scale)
            .collect()
    }

    fn eval(&self, c: &[Complex64], x: f64) -> f64 {
        let u = 2.0 * PI * (x - self.x0) / self.lx;
        c.iter()
            .enumerate()
            .map(|(k, ck)| {
                if k == self.nx / 2 {
                    ck.re * (k as f64 * u).cos()
                } else {
                    (ck * Complex64::from_polar(1.0, signed_index(k, self.nx) as f64 * u)).re
                }
            })
            .sum()
    }

    /// Antiderivative of the row, zero at `x0`; valid beyond one period.
    fn antiderivative(&self, c: &[Complex64], x: f64) -> f64 {
        let u = 2.0 * PI * (x - self.x0) / self.lx;
        let to_x = self.lx / (2.0 * PI);
        let mut acc = c[0].re * (x - self.x0);
        for (k, ck) in c.iter().enumerate().skip(1) {
            if k == self.nx / 2 {
                acc += ck.re * (k as f64 * u).sin() / k as f64 * to_x;
            } else {
                let kk = signed_index(k, self.nx) as f64;
                let e = Complex64::from_polar(1.0, kk * u) - 1.0;
                acc += (ck * e / Complex64::new(0.0, kk)).re * to_x;
            }
        }
        acc
    }

    /// `∫ max(0, -w(x, p)) dx` over one period of the interpolated row.
    fn row_negativity(&self, p: f64) -> f64 {
        let c = self.row_coefficients(p);
        let m = 4 * self.nx;
        let h = self.lx / m as f64;
        // Dense samples of the row from the zero-padded spectrum.
        let mut padded = vec![Complex64::new(0.0, 0.0); m];
        for (k, ck) in c.iter().enumerate() {
            if k == self.nx / 2 {
                padded[k] += ck * 0.5;
                padded[m - k] += ck * 0.5;
            } else {
                padded[signed_index(k, self.nx).rem_euclid(m as i64) as usize] = *ck;
            }
        }
        inverse_unnormalized_in_place(&mut padded).expect("grid sizes are powers of two");
        let samples: Vec<f64> = padded.iter().map(|v| v.re).collect();

        let mut roots = Vec::new();
        for i in 0..m {
            let (a, b) = (samples[i], samples[(i + 1) % m]);
            let floor = self.floor;
            if (a < -floor) != (b < -floor) {
                let mut lo = self.x0 + i as f64 * h;
                let mut hi = lo + h;
                let lo_negative = a < -floor;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (self.eval(&c, mid) < -floor) == lo_negative {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push((0.5 * (lo + hi), lo_negative));
            }
        }
        if roots.is_empty() {
            return if samples[0] < -self.floor { -c[0].re * self.lx } else { 0.0 };
        }
        // A root whose left side is negative closes a negative interval that
        // opened at the previous root, cyclically.
        let mut total = 0.0;
        for (idx, &(r, left_negative)) in roots.iter().enumerate() {
            if !left_negative {
                continue;
            }
            let prev = if idx == 0 { roots[roots.len() - 1].0 - self.lx } else { roots[idx - 1].0 };
            total -= self.antiderivative(&c, r) - self.antiderivative(&c, prev);
        }
        total
    }
}

/// Closed-form Wigner function of the freely evolving Gaussian packet: a
/// bivariate normal sheared along `x` by `p t / m`.
pub fn analytic_gaussian_wigner(pgrid: PhaseGrid, params: GaussianParams, t: f64, consts: Constants) -> WignerGrid {
    let GaussianParams { x_bar, p_bar, sigma } = params;
    let Constants { hbar, mass } = consts;
    let s2 = sigma * sigma;
    let values = Array2::from_shape_fn(pgrid.shape(), |(j, i)| {
        let x = pgrid.x.point(i);
        let p = pgrid.p.point(j);
        let u = x - p * t / mass - x_bar;
        let q = p - p_bar;
        (-u * u / (2.0 * s2) - 2.0 * s2 * q * q / (hbar * hbar)).exp() / (PI * hbar)
    });
    WignerGrid { pgrid, values, t, consts }
}

/// Closed-form Wigner function of harmonic-oscillator level `n`,
/// `(-1)^n / (pi hbar) exp(-r^2) L_n(2 r^2)` with
/// `r^2 = (x kappa)^2 + (p / (hbar kappa))^2` and `kappa = sqrt(m omega / hbar)`.
pub fn analytic_ho_wigner(pgrid: PhaseGrid, n: usize, omega: f64, consts: Constants) -> Result<WignerGrid> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("oscillator frequency must be positive, got {omega}")));
    }
    let Constants { hbar, mass } = consts;
    let kappa = (mass * omega / hbar).sqrt();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let values = Array2::from_shape_fn(pgrid.shape(), |(j, i)| {
        let xs = pgrid.x.point(i) * kappa;
        let ps = pgrid.p.point(j) / (hbar * kappa);
        let r2 = xs * xs + ps * ps;
        sign / (PI * hbar) * (-r2).exp() * laguerre(n, 2.0 * r2)
    });
    WignerGrid::new(pgrid, values, 0.0, consts)
}

/// Band-limited refinement of `w` along `p` by `p_refine` (a power of two),
/// cut down to the smallest power-of-two window covering `x_range` and
/// `p_range`. Used to produce display grids; the window should leave `w`
/// negligible at its edges if derivatives are taken on it.
pub fn view(w: &WignerGrid, x_range: (f64, f64), p_range: (f64, f64), p_refine: usize) -> Result<WignerGrid> {
    if p_refine == 0 || !p_refine.is_power_of_two() {
        return Err(Error::Size(format!("refinement factor must be a power of two, got {p_refine}")));
    }
    let np = w.pgrid.p.n();
    let fine_np = np * p_refine;
    let fine_p = Grid1D::centered(fine_np, w.pgrid.p.dx() / p_refine as f64)?;
    let (xs, x_grid) = window(&w.pgrid.x, x_range)?;
    let (ps, p_grid) = window(&fine_p, p_range)?;

    let columns: Vec<Vec<f64>> = (xs..xs + x_grid.n())
        .into_par_iter()
        .map(|i| {
            let mut spec: Vec<Complex64> = w.values.column(i).iter().map(|&v| Complex64::new(v, 0.0)).collect();
            forward_in_place(&mut spec).expect("grid sizes are powers of two");
            let mut padded = vec![Complex64::new(0.0, 0.0); fine_np];
            for (j, &c) in spec.iter().enumerate() {
                let k = signed_index(j, np);
                if p_refine > 1 && j == np / 2 {
                    padded[np / 2] = c * 0.5;
                    padded[fine_np - np / 2] = c * 0.5;
                } else {
                    padded[k.rem_euclid(fine_np as i64) as usize] = c;
                }
            }
            inverse_in_place(&mut padded).expect("grid sizes are powers of two");
            padded[ps..ps + p_grid.n()].iter().map(|c| c.re * p_refine as f64).collect()
        })
        .collect();

    let pgrid = PhaseGrid::new(x_grid, p_grid);
    let mut values = Array2::<f64>::zeros(pgrid.shape());
    for (i, col) in columns.into_iter().enumerate() {
        values.column_mut(i).iter_mut().zip(col).for_each(|(d, s)| *d = s);
    }
    WignerGrid::new(pgrid, values, w.t, w.consts)
}

/// Start index and sub-grid of the smallest power-of-two run of samples of
/// `g` covering `[lo, hi)`, centered on the range where the grid allows.
fn window(g: &Grid1D, (lo, hi): (f64, f64)) -> Result<(usize, Grid1D)> {
    if !(hi > lo) {
        return Err(Error::Domain(format!("empty window [{lo}, {hi})")));
    }
    let n = g.n() as f64;
    let d = g.dx();
    let i0 = ((lo - g.x_min()) / d).floor().clamp(0.0, n) as usize;
    let i1 = ((hi - g.x_min()) / d).ceil().clamp(0.0, n) as usize;
    let m = i1.saturating_sub(i0).max(2).next_power_of_two().min(g.n());
    let start = ((i0 + i1) / 2).saturating_sub(m / 2).min(g.n() - m);
    let sub = Grid1D::new(m, g.point(start), g.point(start) + m as f64 * d)?;
    Ok((start, sub))
}

/// A phase grid for analytic references: `nx` positions on `[x_min, x_max)`
/// and `np` centered momenta spaced `dp`.
pub fn phase_grid(x: Grid1D, np: usize, dp: f64) -> Result<PhaseGrid> {
    Ok(PhaseGrid::new(x, Grid1D::centered(np, dp)?))
}
