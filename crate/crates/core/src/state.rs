//! Wave functions on position grids and their momentum representation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::fft::{forward_in_place, inverse_unnormalized_in_place};
use crate::numerics::grid::{momentum_grid, Constants, Grid1D};
use crate::numerics::special::hermite_function;

/// Boundary samples must stay below this fraction of the peak amplitude.
pub const SUPPORT_GUARD: f64 = 1e-10;

/// A complex wave function `Psi(x, t)` sampled on a periodic position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    values: Vec<Complex64>,
    t: f64,
    consts: Constants,
}

impl WaveFunction {
    pub fn new(grid: Grid1D, values: Vec<Complex64>, t: f64, consts: Constants) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Size(format!("{} samples for a grid of {}", values.len(), grid.n())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numeric("wave function has non-finite samples".into()));
        }
        Ok(WaveFunction { grid, values, t, consts })
    }

    /// Samples `f(x)` on the grid. The result is not renormalized.
    pub fn from_fn(grid: Grid1D, t: f64, consts: Constants, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        WaveFunction::new(grid, values, t, consts)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn consts(&self) -> &Constants {
        &self.consts
    }

    pub(crate) fn into_parts(self) -> (Grid1D, Vec<Complex64>, f64, Constants) {
        (self.grid, self.values, self.t, self.consts)
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// `sum |Psi|^2 dx`.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_squared().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Numeric("cannot normalize a zero wave function".into()));
        }
        self.values.iter_mut().for_each(|v| *v /= norm);
        Ok(self)
    }

    /// Position density `|Psi(x)|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Checks that the amplitude at both ends of the grid is below
    /// [`SUPPORT_GUARD`] times the peak, so that periodic wrap-around cannot
    /// contaminate transforms or propagation.
    pub fn check_support(&self) -> Result<()> {
        self.check_support_with(SUPPORT_GUARD)
    }

    /// [`check_support`](Self::check_support) with a caller-chosen guard.
    pub fn check_support_with(&self, guard: f64) -> Result<()> {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(peak > 0.0) {
            return Err(Error::Domain("wave function vanishes identically".into()));
        }
        let n = self.values.len();
        let lower = self.values[0].norm();
        let upper = self.values[n - 1].norm();
        if lower >= guard * peak {
            return Err(Error::Domain(format!(
                "state not contained in the grid: lower boundary x = {} has |psi|/peak = {:.3e}",
                self.grid.x_min(),
                lower / peak
            )));
        }
        if upper >= guard * peak {
            return Err(Error::Domain(format!(
                "state not contained in the grid: upper boundary x = {} has |psi|/peak = {:.3e}",
                self.grid.point(n - 1),
                upper / peak
            )));
        }
        Ok(())
    }

    /// `integral f(x) |Psi(x)|^2 dx`.
    pub fn expect_position(&self, f: impl Fn(f64) -> f64) -> f64 {
        let dx = self.grid.dx();
        self.values.iter().enumerate().map(|(i, v)| f(self.grid.point(i)) * v.norm_sqr()).sum::<f64>() * dx
    }

    /// `integral f(p) |Psi~(p)|^2 dp`.
    pub fn expect_momentum(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.to_momentum().expect(f)
    }

    /// Complex conjugate state.
    pub fn conjugate(&self) -> Self {
        WaveFunction { values: self.values.iter().map(|v| v.conj()).collect(), ..self.clone() }
    }

    /// Parity-flipped state `Psi(-x)`. Requires a grid symmetric about zero;
    /// the unpaired sample at `x_min` maps outside the grid and is set to zero.
    pub fn parity(&self) -> Result<Self> {
        let n = self.grid.n();
        if (self.grid.x_min() + self.grid.x_max()).abs() > 1e-12 * self.grid.length() {
            return Err(Error::Domain("parity requires a grid symmetric about x = 0".into()));
        }
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for (i, v) in values.iter_mut().enumerate().skip(1) {
            *v = self.values[n - i];
        }
        Ok(WaveFunction { values, ..self.clone() })
    }

    /// The momentum-space wave function `Psi~(p)` on the conjugate grid.
    pub fn to_momentum(&self) -> MomentumWaveFunction {
        let n = self.grid.n();
        let pgrid = momentum_grid(&self.grid, &self.consts);
        let hbar = self.consts.hbar;
        let mut spec = self.values.clone();
        forward_in_place(&mut spec).expect("grid sizes are powers of two");
        let scale = self.grid.dx() / (2.0 * PI * hbar).sqrt();
        let x0 = self.grid.x_min();
        let values = (0..n)
            .map(|jj| {
                let p = pgrid.point(jj);
                // Centered index jj holds frequency jj - n/2.
                let bin = (jj + n / 2) % n;
                spec[bin] * Complex64::from_polar(scale, -x0 * p / hbar)
            })
            .collect();
        MomentumWaveFunction { grid: pgrid, position_grid: self.grid, values, t: self.t, consts: self.consts }
    }

    /// Kinetic energy `<p^2 / 2m>` evaluated spectrally.
    pub fn kinetic_energy(&self) -> f64 {
        let m = self.consts.mass;
        self.expect_momentum(|p| p * p / (2.0 * m))
    }
}

/// A wave function in the momentum representation, `Psi~(p)`, together with
/// the position grid it is conjugate to.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumWaveFunction {
    grid: Grid1D,
    position_grid: Grid1D,
    values: Vec<Complex64>,
    t: f64,
    consts: Constants,
}

impl MomentumWaveFunction {
    /// Builds a momentum-space state directly. `grid` must be the conjugate
    /// of `position_grid`.
    pub fn new(position_grid: Grid1D, values: Vec<Complex64>, t: f64, consts: Constants) -> Result<Self> {
        let grid = momentum_grid(&position_grid, &consts);
        if values.len() != grid.n() {
            return Err(Error::Size(format!("{} samples for a grid of {}", values.len(), grid.n())));
        }
        Ok(MomentumWaveFunction { grid, position_grid, values, t, consts })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn position_grid(&self) -> &Grid1D {
        &self.position_grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn consts(&self) -> &Constants {
        &self.consts
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        let dp = self.grid.dx();
        self.values.iter().enumerate().map(|(j, v)| f(self.grid.point(j)) * v.norm_sqr()).sum::<f64>() * dp
    }

    /// Inverse of [`WaveFunction::to_momentum`].
    pub fn to_position(&self) -> WaveFunction {
        let n = self.grid.n();
        let hbar = self.consts.hbar;
        let x0 = self.position_grid.x_min();
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        for jj in 0..n {
            let p = self.grid.point(jj);
            spec[(jj + n / 2) % n] = self.values[jj] * Complex64::from_polar(1.0, x0 * p / hbar);
        }
        inverse_unnormalized_in_place(&mut spec).expect("grid sizes are powers of two");
        let scale = self.grid.dx() / (2.0 * PI * hbar).sqrt();
        spec.iter_mut().for_each(|v| *v *= scale);
        WaveFunction { grid: self.position_grid, values: spec, t: self.t, consts: self.consts }
    }
}

/// Mean position, mean momentum and width of a Gaussian wave packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub x_bar: f64,
    pub p_bar: f64,
    pub sigma: f64,
}

impl GaussianParams {
    pub fn new(x_bar: f64, p_bar: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("packet width sigma must be positive, got {sigma}")));
        }
        Ok(GaussianParams { x_bar, p_bar, sigma })
    }
}

/// Closed-form freely evolving Gaussian packet at `(x, t)`.
///
/// The complex width factor `1 + i hbar t / (2 m sigma^2)` divides the whole
/// exponent and enters the prefactor through its principal square root.
pub fn gaussian_value(x: f64, params: &GaussianParams, t: f64, consts: &Constants) -> Complex64 {
    let GaussianParams { x_bar, p_bar, sigma } = *params;
    let Constants { hbar, mass } = *consts;
    let s2 = sigma * sigma;
    let width = Complex64::new(1.0, hbar * t / (2.0 * mass * s2));
    let u = x - x_bar;
    let exponent = Complex64::new(-u * u / (4.0 * s2), p_bar * u / hbar - p_bar * p_bar * t / (2.0 * mass * hbar)) / width;
    exponent.exp() / (width.sqrt() * (2.0 * PI * s2).powf(0.25))
}

/// Samples a Gaussian packet on `grid`, rejecting packets that are not
/// contained in it.
pub fn gaussian_packet(grid: Grid1D, params: GaussianParams, t: f64, consts: Constants) -> Result<WaveFunction> {
    let psi = WaveFunction::from_fn(grid, t, consts, |x| gaussian_value(x, &params, t, &consts))?;
    psi.check_support()?;
    Ok(psi)
}

/// Harmonic-oscillator eigenfunction of level `n` for `V = m omega^2 x^2 / 2`.
pub fn ho_eigenstate(grid: Grid1D, n: usize, omega: f64, consts: Constants) -> Result<WaveFunction> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("oscillator frequency must be positive, got {omega}")));
    }
    let kappa = (consts.mass * omega / consts.hbar).sqrt();
    let psi =
        WaveFunction::from_fn(grid, 0.0, consts, |x| Complex64::new(kappa.sqrt() * hermite_function(n, kappa * x), 0.0))?;
    psi.check_support()?;
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(512, -16.0, 16.0).unwrap()
    }

    fn fig1() -> GaussianParams {
        GaussianParams::new(1.0, 3.0, 0.5).unwrap()
    }

    #[test]
    fn packet_peak_density_and_phase() {
        let c = Constants::default();
        let v = gaussian_value(1.0, &fig1(), 0.0, &c);
        assert!((v.norm_sqr() - (2.0 * PI * 0.25f64).powf(-0.5)).abs() < 1e-12);
        assert!((v.norm_sqr() - 0.79788).abs() < 1e-5);
        assert_eq!(v.arg(), 0.0);
        let other = GaussianParams::new(-2.3, -1.1, 0.8).unwrap();
        assert_eq!(gaussian_value(-2.3, &other, 0.0, &c).arg(), 0.0);
    }

    #[test]
    fn packet_is_normalized_and_drifts() {
        let c = Constants::default();
        for t in [0.0, 1.0] {
            let psi = gaussian_packet(grid(), fig1(), t, c).unwrap();
            assert!((psi.norm_squared() - 1.0).abs() < 1e-8);
            let mean = psi.expect_position(|x| x);
            assert!((mean - (1.0 + 3.0 * t)).abs() < 1e-8, "t={t} mean={mean}");
        }
    }

    #[test]
    fn support_violation_names_the_boundary() {
        let c = Constants::default();
        let g = Grid1D::new(256, -4.0, 4.0).unwrap();
        let err = gaussian_packet(g, GaussianParams::new(3.5, 0.0, 0.5).unwrap(), 0.0, c).unwrap_err();
        assert!(matches!(&err, Error::Domain(m) if m.contains("upper")), "{err}");
        let err = gaussian_packet(g, GaussianParams::new(-3.5, 0.0, 0.5).unwrap(), 0.0, c).unwrap_err();
        assert!(matches!(&err, Error::Domain(m) if m.contains("lower")), "{err}");
    }

    #[test]
    fn sigma_must_be_positive() {
        assert!(GaussianParams::new(0.0, 0.0, 0.0).is_err());
        assert!(GaussianParams::new(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn momentum_distribution_of_a_gaussian() {
        let c = Constants::default();
        let sigma = 0.7;
        let psi = gaussian_packet(grid(), GaussianParams::new(0.0, 0.0, sigma).unwrap(), 0.0, c).unwrap();
        let phi = psi.to_momentum();
        assert!((phi.norm_squared() - 1.0).abs() < 1e-8);
        let sp = c.hbar / (2.0 * sigma);
        for (j, d) in phi.density().iter().enumerate() {
            let p = phi.grid().point(j);
            let exact = (-p * p / (2.0 * sp * sp)).exp() / (2.0 * PI * sp * sp).sqrt();
            assert!((d - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn boosted_gaussian_peaks_at_mean_momentum() {
        let psi = gaussian_packet(grid(), fig1(), 0.0, Constants::default()).unwrap();
        let phi = psi.to_momentum();
        let dens = phi.density();
        let jmax = (0..dens.len()).max_by(|&a, &b| dens[a].total_cmp(&dens[b])).unwrap();
        assert!((phi.grid().point(jmax) - 3.0).abs() <= phi.grid().dx());
    }

    #[test]
    fn momentum_round_trip() {
        let psi = gaussian_packet(grid(), fig1(), 0.4, Constants::default()).unwrap();
        let back = psi.to_momentum().to_position();
        for (a, b) in psi.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn expectation_values() {
        let c = Constants::default();
        let psi = gaussian_packet(grid(), fig1(), 0.0, c).unwrap();
        assert!((psi.expect_position(|_| 1.0) - 1.0).abs() < 1e-8);
        assert!((psi.expect_position(|x| x) - 1.0).abs() < 1e-6);
        assert!((psi.expect_position(|x| (x - 1.0).powi(2)) - 0.25).abs() < 1e-6);
        assert!((psi.expect_momentum(|_| 1.0) - 1.0).abs() < 1e-8);
        assert!((psi.expect_momentum(|p| p) - 3.0).abs() < 1e-6);
        // p_bar^2 / 2m + hbar^2 / (8 m sigma^2)
        assert!((psi.kinetic_energy() - (4.5 + 0.5)).abs() < 1e-8);
    }

    #[test]
    fn galilei_shift_of_samples() {
        let c = Constants::default();
        let g = grid();
        let y = 8.0 * g.dx();
        let a = gaussian_packet(g, fig1(), 0.0, c).unwrap();
        let b = gaussian_packet(g, GaussianParams::new(1.0 + y, 3.0, 0.5).unwrap(), 0.0, c).unwrap();
        for i in 8..g.n() {
            assert!((b.values()[i] - a.values()[i - 8]).norm() < 1e-12);
        }
    }

    #[test]
    fn ho_eigenstates_are_normalized_and_have_parity() {
        let c = Constants::default();
        let g = Grid1D::new(512, -8.0, 8.0).unwrap();
        for n in 0..5 {
            let psi = ho_eigenstate(g, n, 1.0, c).unwrap();
            assert!((psi.norm_squared() - 1.0).abs() < 1e-10);
            let flipped = psi.parity().unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for i in 1..g.n() {
                assert!((flipped.values()[i] - psi.values()[i] * sign).norm() < 1e-12);
            }
        }
    }
}
