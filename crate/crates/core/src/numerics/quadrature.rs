//! Uniform-weight quadrature on periodic lattices.

use ndarray::Array2;

use super::grid::PhaseGrid;
use crate::error::{Error, Result};

/// Riemann sum of a field over a phase grid, `sum(field) dx dp`.
///
/// On periodic lattices this is the trapezoidal rule and is spectrally
/// accurate for smooth integrands that decay at the edges.
pub fn trapezoid_2d(field: &Array2<f64>, grid: &PhaseGrid) -> Result<f64> {
    if field.dim() != grid.shape() {
        return Err(Error::Size(format!("field shape {:?} does not match grid {:?}", field.dim(), grid.shape())));
    }
    if field.iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric("NaN in quadrature input".into()));
    }
    Ok(field.sum() * grid.cell_area())
}

/// Riemann sum of samples on a 1-D lattice of spacing `dx`.
pub fn trapezoid_1d(values: &[f64], dx: f64) -> f64 {
    values.iter().sum::<f64>() * dx
}
