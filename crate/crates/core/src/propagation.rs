//! Fourier split-operator propagation in real and imaginary time.
//!
//! One real-time step is the symmetric (Strang) product
//! `exp(-i V dt / 2hbar) exp(-i K dt / hbar) exp(-i V dt / 2hbar)`, with the
//! kinetic factor applied in the DFT basis. Imaginary-time steps replace
//! `dt` by `-i dt` and renormalize.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::fft::{forward_in_place, inverse_in_place};
use crate::numerics::grid::{Constants, Grid1D};
use crate::potential::{Potential, TimePotential};
use crate::state::{GaussianParams, WaveFunction, SUPPORT_GUARD};

/// Default relative energy change at which imaginary-time iteration stops.
pub const DEFAULT_GROUND_TOL: f64 = 1e-10;
/// Default imaginary time step.
pub const DEFAULT_GROUND_DT: f64 = 1e-3;
pub const MAX_GROUND_ITERATIONS: usize = 1_000_000;

/// Time step, step count and snapshot spacing of a real-time run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub dt: f64,
    pub steps: usize,
    pub snapshot_stride: usize,
    /// Boundary amplitude, relative to the peak, tolerated in snapshots.
    pub support_guard: f64,
}

impl PropagationConfig {
    pub fn new(dt: f64, steps: usize, snapshot_stride: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        if snapshot_stride == 0 {
            return Err(Error::Config("snapshot stride must be at least 1".into()));
        }
        Ok(PropagationConfig { dt, steps, snapshot_stride, support_guard: SUPPORT_GUARD })
    }

    pub fn with_support_guard(mut self, guard: f64) -> Result<Self> {
        if !(guard > 0.0 && guard < 1.0) {
            return Err(Error::Config(format!("support guard must lie in (0, 1), got {guard}")));
        }
        self.support_guard = guard;
        Ok(self)
    }

    /// Checks the step against the grid and potential, see [`check_aliasing`].
    pub fn validate(&self, grid: &Grid1D, v: &impl TimePotential, consts: &Constants) -> Result<()> {
        check_aliasing(grid, v, 0.0, self.dt, consts)
    }
}

/// Rejects steps whose phase factors alias on the grid.
///
/// The kinetic factor's phase must not advance by more than `pi` between
/// neighbouring spectral samples (equivalently, the fastest grid momentum
/// moves less than half the domain per step), and the potential factor's
/// phase must not advance by more than `pi` between neighbouring position
/// samples (the per-step momentum kick stays inside the grid's band).
pub fn check_aliasing(grid: &Grid1D, v: &impl TimePotential, t: f64, dt: f64, consts: &Constants) -> Result<()> {
    let Constants { hbar, mass } = *consts;
    let k_max = std::f64::consts::PI / grid.dx();
    let travel = hbar * k_max * dt.abs() / mass;
    if travel >= grid.length() / 2.0 {
        return Err(Error::Config(format!(
            "time step {dt} aliases the kinetic phase: Nyquist momentum travels {travel:.3} per step on a domain of length {}",
            grid.length()
        )));
    }
    let xs = grid.points();
    let vs: Vec<f64> = xs.iter().map(|&x| v.value_at(x, t + 0.5 * dt, mass)).collect();
    let max_jump = vs.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let phase_jump = max_jump * dt.abs() / hbar;
    if phase_jump >= std::f64::consts::PI {
        return Err(Error::Config(format!(
            "time step {dt} aliases the potential phase: {phase_jump:.3} rad between neighbouring samples"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Real,
    Imaginary,
}

/// Precomputed split-operator factors for one grid, potential and step.
pub struct SplitOperator<'a, V: TimePotential> {
    grid: Grid1D,
    consts: Constants,
    dt: f64,
    mode: Mode,
    v: &'a V,
    xs: Vec<f64>,
    kinetic: Vec<Complex64>,
    potential_half: Option<Vec<Complex64>>,
}

impl<'a, V: TimePotential> SplitOperator<'a, V> {
    pub fn real(grid: Grid1D, v: &'a V, consts: Constants, dt: f64) -> Self {
        Self::build(grid, v, consts, dt, Mode::Real)
    }

    pub fn imaginary(grid: Grid1D, v: &'a V, consts: Constants, dt: f64) -> Self {
        Self::build(grid, v, consts, dt, Mode::Imaginary)
    }

    fn build(grid: Grid1D, v: &'a V, consts: Constants, dt: f64, mode: Mode) -> Self {
        let Constants { hbar, mass } = consts;
        let kinetic = grid
            .wavenumbers()
            .iter()
            .map(|&k| {
                let phase = hbar * k * k * dt / (2.0 * mass);
                match mode {
                    Mode::Real => Complex64::from_polar(1.0, -phase),
                    Mode::Imaginary => Complex64::new((-phase).exp(), 0.0),
                }
            })
            .collect();
        let xs = grid.points();
        let mut op = SplitOperator { grid, consts, dt, mode, v, xs, kinetic, potential_half: None };
        if v.is_static() {
            op.potential_half = Some(op.potential_factors(0.0));
        }
        op
    }

    fn potential_factors(&self, t_mid: f64) -> Vec<Complex64> {
        let Constants { hbar, mass } = self.consts;
        self.xs
            .iter()
            .map(|&x| {
                let phase = self.v.value_at(x, t_mid, mass) * self.dt / (2.0 * hbar);
                match self.mode {
                    Mode::Real => Complex64::from_polar(1.0, -phase),
                    Mode::Imaginary => Complex64::new((-phase).exp(), 0.0),
                }
            })
            .collect()
    }

    /// Advances `values`, sampled at time `t`, by one step.
    pub fn apply(&self, values: &mut [Complex64], t: f64) {
        let owned;
        let half = match &self.potential_half {
            Some(h) => h,
            None => {
                owned = self.potential_factors(t + 0.5 * self.dt);
                &owned
            }
        };
        for (v, f) in values.iter_mut().zip(half) {
            *v *= f;
        }
        forward_in_place(values).expect("grid sizes are powers of two");
        for (v, f) in values.iter_mut().zip(&self.kinetic) {
            *v *= f;
        }
        inverse_in_place(values).expect("grid sizes are powers of two");
        for (v, f) in values.iter_mut().zip(half) {
            *v *= f;
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
}

/// One Strang step of real-time evolution. `dt` may be negative (backward
/// evolution); `dt = 0` returns the input unchanged.
pub fn split_operator_step(psi: &WaveFunction, v: &impl TimePotential, dt: f64) -> Result<WaveFunction> {
    if dt == 0.0 {
        return Ok(psi.clone());
    }
    check_aliasing(psi.grid(), v, psi.t(), dt, psi.consts())?;
    let op = SplitOperator::real(*psi.grid(), v, *psi.consts(), dt);
    let (grid, mut values, t, consts) = psi.clone().into_parts();
    op.apply(&mut values, t);
    WaveFunction::new(grid, values, t + dt, consts)
}

/// Evolves `psi` for `cfg.steps` steps and returns the snapshots taken every
/// `cfg.snapshot_stride` steps, starting with the initial state. The final
/// state is always included.
pub fn evolve(psi: &WaveFunction, v: &impl TimePotential, cfg: &PropagationConfig) -> Result<Vec<WaveFunction>> {
    psi.check_support_with(cfg.support_guard)?;
    cfg.validate(psi.grid(), v, psi.consts())?;
    let t0 = psi.t();
    let op = SplitOperator::real(*psi.grid(), v, *psi.consts(), cfg.dt);
    let (grid, mut values, _, consts) = psi.clone().into_parts();
    let mut snapshots = vec![psi.clone()];
    for step in 1..=cfg.steps {
        let t = t0 + (step - 1) as f64 * cfg.dt;
        op.apply(&mut values, t);
        if step % cfg.snapshot_stride == 0 || step == cfg.steps {
            let snap = WaveFunction::new(grid, values.clone(), t0 + step as f64 * cfg.dt, consts)?;
            snap.check_support_with(cfg.support_guard).map_err(|e| e.context(format!("snapshot at t = {}", snap.t())))?;
            snapshots.push(snap);
        }
    }
    Ok(snapshots)
}

/// `<H> = <K> + <V>` for a static potential.
pub fn energy(psi: &WaveFunction, v: &Potential) -> f64 {
    let m = psi.consts().mass;
    psi.kinetic_energy() + psi.expect_position(|x| v.value(x, m))
}

/// Result of imaginary-time relaxation.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub psi: WaveFunction,
    pub energy: f64,
    pub iterations: usize,
    /// Energy after each renormalized step.
    pub energy_history: Vec<f64>,
}

/// The default imaginary-time seed: a Gaussian at the origin whose width
/// matches the harmonic part of the potential, `sigma^2 = hbar / (2 m omega)`.
/// Potentials without a harmonic part get `sigma = 1`.
pub fn default_seed(grid: Grid1D, v: &Potential, consts: Constants) -> Result<WaveFunction> {
    let sigma = match v.harmonic_omega() {
        Some(omega) => (consts.hbar / (2.0 * consts.mass * omega)).sqrt(),
        None => 1.0,
    };
    crate::state::gaussian_packet(grid, GaussianParams::new(0.0, 0.0, sigma)?, 0.0, consts)
}

/// Ground state of `v` by imaginary-time propagation from [`default_seed`].
pub fn imaginary_time_ground_state(
    grid: Grid1D,
    v: &Potential,
    consts: Constants,
    dt: f64,
    tol: f64,
) -> Result<GroundState> {
    let seed = default_seed(grid, v, consts)?;
    imaginary_time_from(seed, v, dt, tol, MAX_GROUND_ITERATIONS)
}

/// Imaginary-time relaxation from an arbitrary seed. Stops once the relative
/// energy change over one step drops below `tol`.
pub fn imaginary_time_from(
    seed: WaveFunction,
    v: &Potential,
    dt: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<GroundState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("imaginary time step must be positive, got {dt}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let grid = *seed.grid();
    let consts = *seed.consts();
    let op = SplitOperator::imaginary(grid, v, consts, dt);
    let mut psi = seed.normalized()?;
    let mut last = energy(&psi, v);
    let mut history = Vec::new();
    for it in 1..=max_iterations {
        let (g, mut values, t, c) = psi.into_parts();
        op.apply(&mut values, 0.0);
        psi = WaveFunction::new(g, values, t, c)?.normalized()?;
        let e = energy(&psi, v);
        if !e.is_finite() {
            return Err(Error::Numeric(format!("energy became non-finite after {it} imaginary-time steps")));
        }
        history.push(e);
        if (e - last).abs() < tol * e.abs().max(f64::MIN_POSITIVE) {
            return Ok(GroundState { psi, energy: e, iterations: it, energy_history: history });
        }
        last = e;
    }
    Err(Error::Convergence { iterations: max_iterations, last_energy: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Driven;
    use crate::state::{gaussian_packet, gaussian_value};

    fn fig1(grid: Grid1D) -> WaveFunction {
        gaussian_packet(grid, GaussianParams::new(1.0, 3.0, 0.5).unwrap(), 0.0, Constants::default()).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let psi = fig1(Grid1D::new(256, -16.0, 16.0).unwrap());
        let out = split_operator_step(&psi, &Potential::harmonic(1.0).unwrap(), 0.0).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn free_evolution_matches_closed_form() {
        let g = Grid1D::new(512, -16.0, 16.0).unwrap();
        let c = Constants::default();
        let params = GaussianParams::new(1.0, 3.0, 0.5).unwrap();
        let psi = fig1(g);
        let cfg = PropagationConfig::new(0.01, 100, 100).unwrap();
        let snaps = evolve(&psi, &Potential::Free, &cfg).unwrap();
        let last = snaps.last().unwrap();
        assert!((last.t() - 1.0).abs() < 1e-15);
        let err = g
            .points()
            .iter()
            .zip(last.values())
            .map(|(&x, v)| (v - gaussian_value(x, &params, 1.0, &c)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "L_inf error {err}");
    }

    #[test]
    fn coherent_state_follows_classical_orbit() {
        let g = Grid1D::new(512, -10.0, 10.0).unwrap();
        let c = Constants::default();
        let sigma = (0.5f64).sqrt();
        let psi = gaussian_packet(g, GaussianParams::new(2.0, 0.0, sigma).unwrap(), 0.0, c).unwrap();
        let cfg = PropagationConfig::new(1e-3, 2000, 500).unwrap();
        let snaps = evolve(&psi, &Potential::harmonic(1.0).unwrap(), &cfg).unwrap();
        for s in &snaps {
            let dens = s.density();
            let imax = (0..dens.len()).max_by(|&a, &b| dens[a].total_cmp(&dens[b])).unwrap();
            assert!((g.point(imax) - 2.0 * s.t().cos()).abs() <= g.dx(), "t={}", s.t());
        }
    }

    #[test]
    fn snapshot_bookkeeping() {
        let psi = fig1(Grid1D::new(256, -16.0, 16.0).unwrap());
        let none = evolve(&psi, &Potential::Free, &PropagationConfig::new(0.1, 0, 1).unwrap()).unwrap();
        assert_eq!(none.len(), 1);
        assert_eq!(none[0], psi);
        let some = evolve(&psi, &Potential::Free, &PropagationConfig::new(0.1, 5, 2).unwrap()).unwrap();
        let times: Vec<f64> = some.iter().map(|s| s.t()).collect();
        assert_eq!(times.len(), 4);
        assert!((times[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn momentum_is_conserved_for_free_motion() {
        let psi = fig1(Grid1D::new(512, -16.0, 16.0).unwrap());
        let snaps = evolve(&psi, &Potential::Free, &PropagationConfig::new(0.05, 20, 5).unwrap()).unwrap();
        let p0 = psi.expect_momentum(|p| p);
        for s in snaps {
            assert!((s.expect_momentum(|p| p) - p0).abs() < 1e-8);
        }
    }

    #[test]
    fn aliasing_is_rejected() {
        let g = Grid1D::new(256, -16.0, 16.0).unwrap();
        let psi = gaussian_packet(g, GaussianParams::new(0.0, 0.0, 1.0).unwrap(), 0.0, Constants::default()).unwrap();
        // Nyquist momentum pi/dx ~ 25.1 crosses half the domain in dt ~ 0.64.
        let err = split_operator_step(&psi, &Potential::Free, 1.0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let steep = Potential::barrier(1e4, 0.01).unwrap();
        assert!(matches!(split_operator_step(&psi, &steep, 0.01), Err(Error::Config(_))));
        assert!(PropagationConfig::new(0.0, 1, 1).is_err());
        assert!(PropagationConfig::new(0.1, 1, 0).is_err());
    }

    #[test]
    fn time_dependent_potential_uses_midpoint() {
        // A spatially uniform V(t) = t only contributes a global phase
        // -integral V dt / hbar, which the midpoint rule integrates exactly.
        let g = Grid1D::new(128, -16.0, 16.0).unwrap();
        let psi = gaussian_packet(g, GaussianParams::new(0.0, 0.0, 1.0).unwrap(), 0.0, Constants::default()).unwrap();
        let v = Driven(|_x: f64, t: f64| t);
        let out = split_operator_step(&psi.clone().with_time(1.0), &v, 0.5).unwrap();
        let phase = Complex64::from_polar(1.0, -(1.5f64 * 1.5 - 1.0) / 2.0);
        let free = split_operator_step(&psi, &Potential::Free, 0.5).unwrap();
        for (a, b) in out.values().iter().zip(free.values()) {
            assert!((a - b * phase).norm() < 1e-12);
        }
    }

    #[test]
    fn harmonic_ground_state_energy() {
        let g = Grid1D::new(256, -8.0, 8.0).unwrap();
        let gs = imaginary_time_ground_state(g, &Potential::harmonic(1.0).unwrap(), Constants::default(), 1e-3, 1e-10)
            .unwrap();
        assert!((gs.energy - 0.5).abs() < 1e-4);
        assert!((gs.psi.norm_squared() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn quartic_without_anharmonicity_is_harmonic() {
        let g = Grid1D::new(512, -12.0, 12.0).unwrap();
        let v = Potential::anharmonic(0.5, 0.0).unwrap();
        let gs = imaginary_time_ground_state(g, &v, Constants::default(), 1e-3, 1e-10).unwrap();
        assert!((gs.energy - 0.25).abs() < 1e-4);
    }

    #[test]
    fn free_particle_has_no_ground_state() {
        let g = Grid1D::new(128, -16.0, 16.0).unwrap();
        let seed = default_seed(g, &Potential::Free, Constants::default()).unwrap();
        let err = imaginary_time_from(seed, &Potential::Free, 1e-2, 1e-14, 50).unwrap_err();
        assert!(matches!(err, Error::Convergence { iterations: 50, .. }));
    }
}
