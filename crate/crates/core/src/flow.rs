//! Wigner flow, quantum and classical Liouville right-hand sides, stationary
//! residuals and the flow-tangency diagnostic.
//!
//! The potential enters through the series
//! `sum_l (i hbar/2)^{2l} / (2l+1)! V^(2l+1)(x) d_p^{2l}` (and its even-order
//! sibling in the energy equation). Derivatives in `p` are spectral, so term
//! `l` is the multiplier `(hbar k / 2)^{2l} V^(2l+1)(x) / (2l+1)!` on the
//! Fourier transform of `w` along `p`. Summed to all orders that multiplier
//! is the finite difference `(V(x + hbar k/2) - V(x - hbar k/2)) / (hbar k)`,
//! which is how [`SeriesPolicy::Exact`] treats non-polynomial potentials.

use ndarray::{Array2, Axis, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::fft::LaneSpectra;
use crate::numerics::grid::PhaseGrid;
use crate::potential::Potential;
use crate::wigner::WignerGrid;

/// How many terms of the `hbar` series to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesPolicy {
    /// Terms `l = 0..=l_max`, stopping early once a term's largest magnitude
    /// falls below `term_tol` times that of the running sum.
    Truncated { l_max: usize, term_tol: f64 },
    /// The full series: the terminating order for polynomial potentials, the
    /// resummed finite-difference kernel otherwise.
    Exact,
}

impl SeriesPolicy {
    pub const DEFAULT_TERM_TOL: f64 = 1e-12;

    pub fn truncated(l_max: usize) -> Self {
        SeriesPolicy::Truncated { l_max, term_tol: Self::DEFAULT_TERM_TOL }
    }

    /// The classical limit: only the `l = 0` term.
    pub fn classical() -> Self {
        SeriesPolicy::Truncated { l_max: 0, term_tol: 0.0 }
    }
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        SeriesPolicy::truncated(3)
    }
}

/// The flow field `j = (jx, jp)` on a phase grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pgrid: PhaseGrid,
    jx: Array2<f64>,
    jp: Array2<f64>,
    t: f64,
    truncation_l_max: i64,
}

impl FlowField {
    pub fn new(pgrid: PhaseGrid, jx: Array2<f64>, jp: Array2<f64>, t: f64, truncation_l_max: i64) -> Result<Self> {
        if jx.dim() != pgrid.shape() || jp.dim() != pgrid.shape() {
            return Err(Error::Size(format!(
                "flow components have shapes {:?} and {:?}, phase grid expects {:?}",
                jx.dim(),
                jp.dim(),
                pgrid.shape()
            )));
        }
        if jx.iter().chain(jp.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("flow field contains non-finite entries".into()));
        }
        Ok(FlowField { pgrid, jx, jp, t, truncation_l_max })
    }

    pub fn pgrid(&self) -> &PhaseGrid {
        &self.pgrid
    }

    pub fn jx(&self) -> &Array2<f64> {
        &self.jx
    }

    pub fn jp(&self) -> &Array2<f64> {
        &self.jp
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Highest series order included, or `-1` when the series was summed
    /// completely.
    pub fn truncation_l_max(&self) -> i64 {
        self.truncation_l_max
    }

    pub fn magnitude(&self) -> Array2<f64> {
        Zip::from(&self.jx).and(&self.jp).map_collect(|a, b| a.hypot(*b))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Parity {
    /// Derivatives `V^(2l+1)`, as in the flow and the Liouville equation.
    Odd,
    /// Derivatives `V^(2l)`, as in the energy equation.
    Even,
}

enum Plan {
    Terms { l_max: usize, term_tol: f64, complete: bool },
    Resummed,
}

impl Plan {
    fn new(v: &Potential, policy: SeriesPolicy, parity: Parity) -> Result<Plan> {
        let offset = if parity == Parity::Odd { 1 } else { 0 };
        match (v.polynomial_degree(), policy) {
            (Some(deg), policy) => {
                let last = deg.saturating_sub(offset) / 2;
                Ok(match policy {
                    SeriesPolicy::Exact => Plan::Terms { l_max: last, term_tol: 0.0, complete: true },
                    SeriesPolicy::Truncated { l_max, term_tol } => {
                        Plan::Terms { l_max: l_max.min(last), term_tol, complete: l_max >= last }
                    }
                })
            }
            (None, SeriesPolicy::Exact) => Ok(Plan::Resummed),
            (None, SeriesPolicy::Truncated { l_max, term_tol }) => {
                v.check_order(2 * l_max + offset)?;
                Ok(Plan::Terms { l_max, term_tol, complete: false })
            }
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// The potential part of the series applied to `w`: the sum over `l` of
/// `c_l(x) (hbar k/2)^{2l}` acting along `p`, times `(i k)` when `with_dp`
/// is set. Returns the field and the highest order used (`-1` if complete).
fn potential_series(
    w: &WignerGrid,
    spectra: &LaneSpectra,
    v: &Potential,
    plan: &Plan,
    parity: Parity,
    with_dp: bool,
) -> (Array2<f64>, i64) {
    let pg = w.pgrid();
    let hbar = w.consts().hbar;
    let mass = w.consts().mass;
    let xs = pg.x.points();
    let offset = if parity == Parity::Odd { 1 } else { 0 };
    let dp_factor = |k: f64| if with_dp { Complex64::new(0.0, k) } else { Complex64::new(1.0, 0.0) };
    // Odd-order operators break the real-field symmetry at the Nyquist bin.
    let keep_nyquist = !with_dp;

    match *plan {
        Plan::Resummed => {
            let field = spectra.apply(keep_nyquist, |i, k| {
                let x = xs[i];
                let a = 0.5 * hbar * k;
                let s = match parity {
                    Parity::Odd if k == 0.0 => v.derivative(x, 1, mass),
                    Parity::Odd => (v.value(x + a, mass) - v.value(x - a, mass)) / (hbar * k),
                    Parity::Even => 0.5 * (v.value(x + a, mass) + v.value(x - a, mass)),
                };
                dp_factor(k) * s
            });
            (field, -1)
        }
        Plan::Terms { l_max, term_tol, complete } => {
            let mut total = Array2::<f64>::zeros(pg.shape());
            let mut used = 0usize;
            for l in 0..=l_max {
                let order = 2 * l + offset;
                let coeff: Vec<f64> =
                    v.derivative_profile(&xs, order, mass).into_iter().map(|d| d / factorial(order)).collect();
                if l > 0 && coeff.iter().all(|c| *c == 0.0) {
                    continue;
                }
                let term = spectra.apply(keep_nyquist, |i, k| dp_factor(k) * (0.5 * hbar * k).powi(2 * l as i32) * coeff[i]);
                let term_max = term.iter().fold(0.0f64, |m, t| m.max(t.abs()));
                let total_max = total.iter().fold(0.0f64, |m, t| m.max(t.abs()));
                total += &term;
                used = l;
                if l > 0 && term_max <= term_tol * total_max {
                    break;
                }
            }
            (total, if complete { -1 } else { used as i64 })
        }
    }
}

fn p_spectra(w: &WignerGrid) -> Result<LaneSpectra> {
    LaneSpectra::new(w.values(), Axis(0), w.pgrid().p.dx())
}

fn x_derivative(field: &Array2<f64>, pg: &PhaseGrid) -> Result<Array2<f64>> {
    Ok(LaneSpectra::new(field, Axis(1), pg.x.dx())?.derivative(1))
}

/// `p / m` at every grid point, broadcast over columns.
fn velocity(pg: &PhaseGrid, mass: f64) -> Array2<f64> {
    Array2::from_shape_fn(pg.shape(), |(j, _)| pg.p.point(j) / mass)
}

/// The Wigner flow `j = (p w / m, -sum_l ... V^(2l+1) d_p^{2l} w)`.
///
/// The `l = 0` term is formed pointwise, so in a harmonic potential
/// `jp = -m omega^2 x w` exactly.
pub fn wigner_flow(w: &WignerGrid, v: &Potential, policy: SeriesPolicy) -> Result<FlowField> {
    let plan = Plan::new(v, policy, Parity::Odd)?;
    let pg = *w.pgrid();
    let mass = w.consts().mass;
    let jx = &velocity(&pg, mass) * w.values();
    let xs = pg.x.points();
    let vp = v.derivative_profile(&xs, 1, mass);
    let mut jp = Array2::from_shape_fn(pg.shape(), |(j, i)| -vp[i] * w.values()[[j, i]]);
    let (higher, used) = match plan {
        Plan::Terms { l_max: 0, complete, .. } => (None, if complete { -1 } else { 0 }),
        _ => {
            let spectra = p_spectra(w)?;
            let (mut field, used) = potential_series(w, &spectra, v, &plan, Parity::Odd, false);
            // Remove the l = 0 part, already added pointwise above.
            let base = spectra.apply(true, |i, _| Complex64::new(vp[i], 0.0));
            field -= &base;
            (Some(field), used)
        }
    };
    if let Some(h) = higher {
        jp -= &h;
    }
    FlowField::new(pg, jx, jp, w.t(), used)
}

/// Classical probability flow `(p w / m, -V' w)`.
pub fn classical_flow(w: &WignerGrid, v: &Potential) -> Result<FlowField> {
    wigner_flow(w, v, SeriesPolicy::classical())
}

/// `d_x jx + d_p jp`, with spectral derivatives.
pub fn divergence(j: &FlowField) -> Result<Array2<f64>> {
    let pg = j.pgrid;
    let dx = x_derivative(&j.jx, &pg)?;
    let dp = LaneSpectra::new(&j.jp, Axis(0), pg.p.dx())?.derivative(1);
    Ok(dx + dp)
}

/// `dw/dt = -(p/m) d_x w + sum_l (i hbar/2)^{2l}/(2l+1)! V^(2l+1) d_p^{2l+1} w`.
pub fn quantum_liouville_rhs(w: &WignerGrid, v: &Potential, policy: SeriesPolicy) -> Result<Array2<f64>> {
    let plan = Plan::new(v, policy, Parity::Odd)?;
    let pg = *w.pgrid();
    let kinetic = -&velocity(&pg, w.consts().mass) * &x_derivative(w.values(), &pg)?;
    let spectra = p_spectra(w)?;
    let (potential, _) = potential_series(w, &spectra, v, &plan, Parity::Odd, true);
    Ok(kinetic + potential)
}

/// Poisson bracket `{H, w}` with `H = p^2/2m + V`; the `l = 0` truncation of
/// [`quantum_liouville_rhs`], computed by the same code.
pub fn classical_liouville_rhs(w: &WignerGrid, v: &Potential) -> Result<Array2<f64>> {
    quantum_liouville_rhs(w, v, SeriesPolicy::classical())
}

/// Left side of the stationary equation
/// `((p/m) d_x - sum_l ... V^(2l+1) d_p^{2l+1}) w`, which vanishes for energy
/// eigenstates.
pub fn stationarity_residual(w: &WignerGrid, v: &Potential, policy: SeriesPolicy) -> Result<Array2<f64>> {
    Ok(-quantum_liouville_rhs(w, v, policy)?)
}

/// `(p^2/2m - hbar^2/(8m) d_x^2 + sum_l (i hbar/2)^{2l}/(2l)! V^(2l) d_p^{2l}) w - E w`.
pub fn energy_residual(w: &WignerGrid, v: &Potential, e: f64, policy: SeriesPolicy) -> Result<Array2<f64>> {
    let plan = Plan::new(v, policy, Parity::Even)?;
    let pg = *w.pgrid();
    let (hbar, mass) = (w.consts().hbar, w.consts().mass);
    let dxx = LaneSpectra::new(w.values(), Axis(1), pg.x.dx())?.derivative(2);
    let spectra = p_spectra(w)?;
    let (potential, _) = potential_series(w, &spectra, v, &plan, Parity::Even, false);
    let mut out = potential - hbar * hbar / (8.0 * mass) * dxx;
    Zip::indexed(&mut out).and(w.values()).for_each(|(j, _), o, &wv| {
        let p = pg.p.point(j);
        *o += (p * p / (2.0 * mass) - e) * wv;
    });
    Ok(out)
}

/// Pointwise misalignment between a flow and the level lines of `w`.
#[derive(Debug, Clone)]
pub struct Tangency {
    /// `(j . grad w) / (|j| |grad w| + eps)`.
    pub misalignment: Array2<f64>,
    /// `w^2`-weighted root mean square of the misalignment over points where
    /// `|w| >= 1e-6 max |w|`.
    pub summary: f64,
}

pub fn tangency_divergence(w: &WignerGrid, j: &FlowField) -> Result<Tangency> {
    if !w.pgrid().same_as(j.pgrid()) {
        return Err(Error::Size("flow and Wigner function live on different phase grids".into()));
    }
    let pg = *w.pgrid();
    let gx = x_derivative(w.values(), &pg)?;
    let gp = p_spectra(w)?.derivative(1);
    let max_abs = |a: &Array2<f64>| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let grad_mag = Zip::from(&gx).and(&gp).map_collect(|a, b| a.hypot(*b));
    let j_mag = j.magnitude();
    let eps = 1e-12 * max_abs(&j_mag) * max_abs(&grad_mag);
    let mut misalignment = Array2::<f64>::zeros(pg.shape());
    Zip::from(&mut misalignment)
        .and(&j.jx)
        .and(&j.jp)
        .and(&gx)
        .and(&gp)
        .for_each(|m, &jx, &jp, &ax, &ap| {
            let den = jx.hypot(jp) * ax.hypot(ap) + eps;
            *m = if den > 0.0 { (jx * ax + jp * ap) / den } else { 0.0 };
        });
    let cutoff = 1e-6 * max_abs(w.values());
    let (mut num, mut den) = (0.0, 0.0);
    Zip::from(&misalignment).and(w.values()).for_each(|&m, &wv| {
        if wv.abs() >= cutoff {
            num += wv * wv * m * m;
            den += wv * wv;
        }
    });
    let summary = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    Ok(Tangency { misalignment, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::{Constants, Grid1D};
    use crate::wigner::{analytic_gaussian_wigner, analytic_ho_wigner};
    use crate::state::GaussianParams;

    fn ho(n: usize) -> WignerGrid {
        let x = Grid1D::new(128, -8.0, 8.0).unwrap();
        let pg = PhaseGrid::for_wavefunction(&x, &Constants::default());
        analytic_ho_wigner(pg, n, 1.0, Constants::default()).unwrap()
    }

    fn linf(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn harmonic_flow_is_single_term() {
        let w = ho(2);
        let v = Potential::harmonic(1.0).unwrap();
        let f = wigner_flow(&w, &v, SeriesPolicy::Exact).unwrap();
        for ((j, i), &jp) in f.jp().indexed_iter() {
            assert_eq!(jp, -w.pgrid().x.point(i) * w.values()[[j, i]]);
        }
        assert_eq!(f.truncation_l_max(), -1);
    }

    #[test]
    fn free_flow_has_no_momentum_component() {
        let f = wigner_flow(&ho(1), &Potential::Free, SeriesPolicy::default()).unwrap();
        assert!(f.jp().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ho_states_are_stationary_with_correct_energy() {
        let v = Potential::harmonic(1.0).unwrap();
        for n in 0..5 {
            let w = ho(n);
            assert!(linf(&stationarity_residual(&w, &v, SeriesPolicy::Exact).unwrap()) < 1e-6);
            let e = n as f64 + 0.5;
            assert!(linf(&energy_residual(&w, &v, e, SeriesPolicy::Exact).unwrap()) < 1e-6, "n = {n}");
        }
    }

    #[test]
    fn polynomial_series_terminates() {
        let w = ho(3);
        let q = Potential::anharmonic(0.5, 0.25).unwrap();
        let a = quantum_liouville_rhs(&w, &q, SeriesPolicy::truncated(1)).unwrap();
        let b = quantum_liouville_rhs(&w, &q, SeriesPolicy::truncated(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn barrier_policies_converge() {
        let x = Grid1D::new(128, -8.0, 8.0).unwrap();
        let c = Constants::default();
        let pg = PhaseGrid::for_wavefunction(&x, &c);
        let w = analytic_gaussian_wigner(pg, GaussianParams::new(0.0, 1.0, 1.0).unwrap(), 0.0, c);
        // A wide, smooth barrier where the series converges quickly.
        let v = Potential::barrier(1.0, 8.0).unwrap();
        let exact = quantum_liouville_rhs(&w, &v, SeriesPolicy::Exact).unwrap();
        let trunc = quantum_liouville_rhs(&w, &v, SeriesPolicy::truncated(6)).unwrap();
        assert!(linf(&(&exact - &trunc)) < 1e-9 * linf(&exact));
        assert!(matches!(
            wigner_flow(&w, &v, SeriesPolicy::truncated(40)),
            Err(Error::Capability(_))
        ));
    }
}
