//! Periodic grids, Fourier pseudo-spectral differentiation and the discrete
//! inner products used by every energy functional in the crate.

mod field;
mod grid;
mod operator;

pub(crate) use field::inner_unchecked;
pub use field::{inner_h, inner_h_array, norm_h, norm_inf, seminorm_h, FieldState};
pub use grid::{make_grid, Axis, Grid};
pub use operator::{apply_derivative, diff_matrix, symbol, SpectralOperator};
