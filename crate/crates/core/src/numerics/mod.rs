//! Grids, transforms, special functions and quadrature shared by every other
//! module.

pub mod fft;
pub mod grid;
pub mod quadrature;
pub mod special;

pub use fft::{fft_forward, fft_inverse, spectral_derivative};
pub use grid::{momentum_grid, Constants, Grid1D, PhaseGrid};
pub use quadrature::trapezoid_2d;
pub use special::{hermite_function, laguerre};
