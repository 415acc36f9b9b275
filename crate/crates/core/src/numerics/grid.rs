//! Uniform periodic sampling lattices.
//!
//! All grids exclude their upper endpoint: sample `i` sits at
//! `x_min + i * dx` for `i in 0..n`, and `dx = (x_max - x_min) / n`. This is
//! the convention the FFT expects, so a grid and its discrete spectrum line
//! up without any bookkeeping.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the model: the reduced Planck constant and the
/// particle mass. Both default to one (dimensionless units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { hbar: 1.0, mass: 1.0 }
    }
}

impl Constants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Domain(format!("hbar must be positive and finite, got {hbar}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Domain(format!("mass must be positive and finite, got {mass}")));
        }
        Ok(Constants { hbar, mass })
    }
}

/// A uniform one-dimensional lattice with a power-of-two sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid1D {
    pub fn new(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Size(format!("grid size must be a power of two >= 2, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Domain(format!("grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max})")));
        }
        Ok(Grid1D { n, x_min, x_max })
    }

    /// A grid of `n` points with the given spacing, centered so that zero is
    /// sample `n / 2`.
    pub fn centered(n: usize, spacing: f64) -> Result<Self> {
        let half = (n / 2) as f64 * spacing;
        Grid1D::new(n, -half, half)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Index of the sample nearest to `x`, or `None` when `x` lies outside
    /// `[x_min, x_max)` by more than half a cell.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let pos = ((x - self.x_min) / self.dx()).round();
        if pos < 0.0 || pos >= self.n as f64 {
            None
        } else {
            Some(pos as usize)
        }
    }

    /// Signed angular wavenumbers of the unnormalized DFT of a field on this
    /// grid, in FFT order: `2 pi j' / (n dx)` with `j'` running
    /// `0, 1, .., n/2 - 1, -n/2, .., -1`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        wavenumbers(self.n, self.dx())
    }

    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.n == other.n && close(self.x_min, other.x_min) && close(self.x_max, other.x_max)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Signed FFT frequency index for bin `j` of an `n`-point transform.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Angular wavenumbers in FFT order for `n` samples of spacing `dx`.
pub fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * dx);
    (0..n).map(|j| signed_index(j, n) as f64 * dk).collect()
}

/// The `(x, p)` product lattice on which Wigner functions and flow fields
/// live. Arrays over a phase grid are stored with the momentum index as the
/// row and the position index as the column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x: Grid1D,
    pub p: Grid1D,
}

impl PhaseGrid {
    pub fn new(x: Grid1D, p: Grid1D) -> Self {
        PhaseGrid { x, p }
    }

    /// The phase grid produced by the Wigner transform of a state sampled on
    /// `x`: same position axis, and `n` centered momenta spaced
    /// `pi hbar / (n dx)`.
    pub fn for_wavefunction(x: &Grid1D, consts: &Constants) -> Self {
        let dp = PI * consts.hbar / (x.n() as f64 * x.dx());
        let p = Grid1D::centered(x.n(), dp).expect("power-of-two size carried over from a valid grid");
        PhaseGrid { x: *x, p }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.p.n(), self.x.n())
    }

    pub fn cell_area(&self) -> f64 {
        self.x.dx() * self.p.dx()
    }

    pub fn same_as(&self, other: &PhaseGrid) -> bool {
        self.x.same_as(&other.x) && self.p.same_as(&other.p)
    }
}

/// The momentum lattice conjugate to `x` under the DFT: `n` centered points
/// spaced `2 pi hbar / (n dx)`.
pub fn momentum_grid(x: &Grid1D, consts: &Constants) -> Grid1D {
    let dp = 2.0 * PI * consts.hbar / (x.n() as f64 * x.dx());
    Grid1D::centered(x.n(), dp).expect("power-of-two size carried over from a valid grid")
}
