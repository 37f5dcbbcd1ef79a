use nalgebra::DMatrix;
use num_complex::Complex64;

use super::grid::{Axis, Grid};
use crate::error::{Error, Result};

/// Eigenvalue of the order-`order` Fourier differentiation matrix at FFT bin `bin`.
///
/// Order 1 gives `i mu w` with the Nyquist bin set to zero; order 2 gives
/// `-(mu w)^2`, including the Nyquist bin.
pub fn symbol(axis: &Axis, bin: usize, order: u8) -> Complex64 {
    let w = axis.wavenumber(bin) as f64;
    let mu = axis.mu();
    match order {
        1 if axis.is_nyquist(bin) => Complex64::new(0.0, 0.0),
        1 => Complex64::new(0.0, mu * w),
        _ => Complex64::new(-(mu * w) * (mu * w), 0.0),
    }
}

fn check_order(order: u8) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "only derivative orders 1 and 2 are supported, got {order}"
        )))
    }
}

/// Fourier differentiation along one grid dimension, stored as its eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    grid: Grid,
    dim: usize,
    order: u8,
    eigenvalues: Vec<Complex64>,
}

impl SpectralOperator {
    pub fn new(grid: &Grid, dim: usize, order: u8) -> Result<Self> {
        check_order(order)?;
        let axis = *grid.axis(dim)?;
        let eigenvalues = (0..axis.points).map(|b| symbol(&axis, b, order)).collect();
        Ok(SpectralOperator {
            grid: grid.clone(),
            dim,
            order,
            eigenvalues,
        })
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Diagonal of `Lambda` in FFT bin order.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Eigenvalue seen by a flat 2D mode index.
    pub fn mode_eigenvalue(&self, mode: usize) -> Complex64 {
        let (bx, by) = self.grid.mode_bins(mode);
        self.eigenvalues[if self.dim == 0 { bx } else { by }]
    }

    /// Multiply a spectrum in place by this operator's eigenvalues.
    pub fn apply_spectrum(&self, spectrum: &mut [Complex64]) {
        for (mode, v) in spectrum.iter_mut().enumerate() {
            *v *= self.mode_eigenvalue(mode);
        }
    }

    pub fn apply(&self, field: &[f64]) -> Result<Vec<f64>> {
        if field.len() != self.grid.len() {
            return Err(Error::invalid(format!(
                "field has {} entries, grid has {}",
                field.len(),
                self.grid.len()
            )));
        }
        let mut spectrum = self.grid.forward(field);
        self.apply_spectrum(&mut spectrum);
        Ok(self.grid.inverse(spectrum))
    }

    /// Dense `N x N` realization along this operator's dimension.
    pub fn dense(&self) -> DMatrix<f64> {
        diff_matrix(&self.grid, self.dim, self.order).expect("validated at construction")
    }
}

/// Dense Fourier pseudo-spectral differentiation matrix along `dim`.
///
/// Order 2 has diagonal `-mu^2 (N^2 + 2) / 12` and off-diagonal entries
/// `(-1)^(m+n+1) (mu^2 / 2) csc^2((m - n) mu h / 2)`; order 1 has a zero
/// diagonal and off-diagonal entries `(-1)^(m+n) (mu / 2) cot((m - n) mu h / 2)`.
pub fn diff_matrix(grid: &Grid, dim: usize, order: u8) -> Result<DMatrix<f64>> {
    check_order(order)?;
    let axis = grid.axis(dim)?;
    let n = axis.points;
    let (mu, h) = (axis.mu(), axis.h());
    let nf = n as f64;
    Ok(DMatrix::from_fn(n, n, |m, k| {
        let sign = if (m + k) % 2 == 0 { 1.0 } else { -1.0 };
        let half_angle = (m as f64 - k as f64) * mu * h / 2.0;
        match (order, m == k) {
            (1, true) => 0.0,
            (1, false) => sign * mu / 2.0 / half_angle.tan(),
            (_, true) => -mu * mu * (nf * nf + 2.0) / 12.0,
            (_, false) => -sign * mu * mu / 2.0 / half_angle.sin().powi(2),
        }
    }))
}

/// Apply `D^order` along `dim` by forward transform, eigenvalue multiply and
/// inverse transform.
pub fn apply_derivative(field: &[f64], grid: &Grid, dim: usize, order: u8) -> Result<Vec<f64>> {
    SpectralOperator::new(grid, dim, order)?.apply(field)
}
