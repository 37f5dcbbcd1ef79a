//! Hamiltonian systems `z_t = D(L z + N'(z))` on a periodic grid.
//!
//! Every model splits its energy into a quadratic part `H1 = (z, L z)_h / 2`
//! with constant-coefficient `L`, and a nonlinear part `H2 = (N(z), 1)_h`.
//! Because `D` and `L` are Fourier multipliers, each Fourier mode carries an
//! independent `m x m` block, which is what makes the linear solves cheap.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{diff_matrix, inner_unchecked, symbol, FieldState, Grid};

/// The skew-adjoint operator `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Skew {
    /// `[[0, I], [-I, 0]]` acting on a two-component state.
    Canonical,
    /// `d/dx` along the first grid dimension, single component.
    Derivative,
}

/// One diagonal block of `L`: `neg_laplacian * (-Delta) + identity * I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTerm {
    pub neg_laplacian: f64,
    pub identity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// `N = -(beta / 4) (p^2 + q^2)^2`
    Cubic { beta: f64 },
    /// `N = phi (1 - cos u)`
    Sine { phi: Vec<f64> },
    /// `N = -(beta / 6) u^3`
    Quadratic { beta: f64 },
}

/// The energy split `H = H1 + H2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub total: f64,
    pub quadratic: f64,
    pub nonlinear: f64,
}

#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    name: &'static str,
    parameters: Vec<(&'static str, f64)>,
    grid: Grid,
    skew: Skew,
    linear: Vec<LinearTerm>,
    nonlinearity: Nonlinearity,
    // Per component, per flat mode: the real diagonal entry of L-hat.
    l_symbols: Vec<Vec<f64>>,
    // Per flat mode: the order-1 symbol along x (used by Skew::Derivative).
    dx_symbol: Vec<Complex64>,
}

fn require_dim(grid: &Grid, dim: usize, model: &str) -> Result<()> {
    if grid.dim() != dim {
        return Err(Error::invalid(format!(
            "{model} needs a {dim}D grid, got {}D",
            grid.dim()
        )));
    }
    Ok(())
}

/// Cubic NLS `i u_t + Delta u + beta |u|^2 u = 0` as a real system in `(p, q)`,
/// `u = p + i q`.
pub fn nls_model(beta: f64, grid: &Grid) -> Result<HamiltonianModel> {
    require_dim(grid, 2, "NLS")?;
    let lap = LinearTerm {
        neg_laplacian: 1.0,
        identity: 0.0,
    };
    Ok(HamiltonianModel::build(
        "nls",
        vec![("beta", beta)],
        grid,
        Skew::Canonical,
        vec![lap, lap],
        Nonlinearity::Cubic { beta },
    ))
}

/// Sine-Gordon `u_tt - Delta u + phi sin u = 0` in `(u, v = u_t)`.
///
/// `phi` is either a single constant or one value per grid point.
pub fn sg_model(phi: &[f64], grid: &Grid) -> Result<HamiltonianModel> {
    require_dim(grid, 2, "sine-Gordon")?;
    let phi = match phi.len() {
        1 => vec![phi[0]; grid.len()],
        n if n == grid.len() => phi.to_vec(),
        n => {
            return Err(Error::invalid(format!(
                "phi must be a constant or have {} entries, got {n}",
                grid.len()
            )))
        }
    };
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("phi must be finite"));
    }
    let parameters = if phi.iter().all(|&v| v == phi[0]) {
        vec![("phi", phi[0])]
    } else {
        Vec::new()
    };
    Ok(HamiltonianModel::build(
        "sine-gordon",
        parameters,
        grid,
        Skew::Canonical,
        vec![
            LinearTerm {
                neg_laplacian: 1.0,
                identity: 0.0,
            },
            LinearTerm {
                neg_laplacian: 0.0,
                identity: 1.0,
            },
        ],
        Nonlinearity::Sine { phi },
    ))
}

/// KdV `u_t + alpha u_xxx + beta u u_x = 0` with `D = d/dx`, `L = -alpha d_xx`.
pub fn kdv_model(alpha: f64, beta: f64, grid: &Grid) -> Result<HamiltonianModel> {
    require_dim(grid, 1, "KdV")?;
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("KdV needs alpha > 0, got {alpha}")));
    }
    Ok(HamiltonianModel::build(
        "kdv",
        vec![("alpha", alpha), ("beta", beta)],
        grid,
        Skew::Derivative,
        vec![LinearTerm {
            neg_laplacian: alpha,
            identity: 0.0,
        }],
        Nonlinearity::Quadratic { beta },
    ))
}

impl HamiltonianModel {
    fn build(
        name: &'static str,
        parameters: Vec<(&'static str, f64)>,
        grid: &Grid,
        skew: Skew,
        linear: Vec<LinearTerm>,
        nonlinearity: Nonlinearity,
    ) -> Self {
        let neg_lap: Vec<f64> = (0..grid.len())
            .map(|mode| {
                let (bx, by) = grid.mode_bins(mode);
                grid.axes()
                    .iter()
                    .zip([bx, by])
                    .map(|(axis, bin)| -symbol(axis, bin, 2).re)
                    .sum()
            })
            .collect();
        let l_symbols = linear
            .iter()
            .map(|t| {
                neg_lap
                    .iter()
                    .map(|&k2| t.neg_laplacian * k2 + t.identity)
                    .collect()
            })
            .collect();
        let x_axis = grid.axes()[0];
        let dx_symbol = (0..grid.len())
            .map(|mode| symbol(&x_axis, grid.mode_bins(mode).0, 1))
            .collect();
        HamiltonianModel {
            name,
            parameters,
            grid: grid.clone(),
            skew,
            linear,
            nonlinearity,
            l_symbols,
            dx_symbol,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn parameters(&self) -> &[(&'static str, f64)] {
        &self.parameters
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn skew(&self) -> Skew {
        self.skew
    }

    pub fn linear_terms(&self) -> &[LinearTerm] {
        &self.linear
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    /// Component count `m`.
    pub fn components(&self) -> usize {
        self.linear.len()
    }

    pub fn zero_state(&self) -> FieldState {
        FieldState::zeros(self.components(), self.grid.len())
    }

    pub fn check_state(&self, z: &FieldState) -> Result<()> {
        if z.count() != self.components() {
            return Err(Error::invalid(format!(
                "{} states have {} components, got {}",
                self.name,
                self.components(),
                z.count()
            )));
        }
        z.check_grid(&self.grid)
    }

    /// Discrete inner product on this model's grid (shapes are trusted).
    pub fn inner(&self, a: &FieldState, b: &FieldState) -> f64 {
        inner_unchecked(&self.grid, a, b)
    }

    pub fn forward(&self, z: &FieldState) -> Vec<Vec<Complex64>> {
        z.components()
            .iter()
            .map(|c| self.grid.forward(c))
            .collect()
    }

    pub fn inverse(&self, spectra: Vec<Vec<Complex64>>) -> FieldState {
        let comps = spectra.into_iter().map(|s| self.grid.inverse(s)).collect();
        FieldState::new(comps).expect("spectra share one shape")
    }

    /// Diagonal of `L-hat` at a flat mode.
    pub fn mode_l(&self, mode: usize) -> Vec<f64> {
        self.l_symbols.iter().map(|s| s[mode]).collect()
    }

    /// `D-hat` at a flat mode as a row-major `m x m` block.
    pub fn mode_d(&self, mode: usize) -> Vec<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self.skew {
            Skew::Canonical => vec![zero, one, -one, zero],
            Skew::Derivative => vec![self.dx_symbol[mode]],
        }
    }

    /// Apply `D-hat` to per-component spectra.
    pub fn apply_d_spectrum(&self, spectra: &mut [Vec<Complex64>]) {
        match self.skew {
            Skew::Canonical => {
                spectra.swap(0, 1);
                for v in spectra[1].iter_mut() {
                    *v = -*v;
                }
            }
            Skew::Derivative => {
                for (v, s) in spectra[0].iter_mut().zip(&self.dx_symbol) {
                    *v *= s;
                }
            }
        }
    }

    /// Apply `L-hat` to per-component spectra.
    pub fn apply_l_spectrum(&self, spectra: &mut [Vec<Complex64>]) {
        for (spec, sym) in spectra.iter_mut().zip(&self.l_symbols) {
            for (v, s) in spec.iter_mut().zip(sym) {
                *v *= s;
            }
        }
    }

    pub fn apply_d(&self, z: &FieldState) -> FieldState {
        match self.skew {
            Skew::Canonical => {
                let p = z.component(0);
                let q = z.component(1);
                FieldState::new(vec![q.to_vec(), p.iter().map(|v| -v).collect()])
                    .expect("same shape")
            }
            Skew::Derivative => {
                let mut spectra = self.forward(z);
                self.apply_d_spectrum(&mut spectra);
                self.inverse(spectra)
            }
        }
    }

    pub fn apply_l(&self, z: &FieldState) -> FieldState {
        let mut spectra = self.forward(z);
        self.apply_l_spectrum(&mut spectra);
        self.inverse(spectra)
    }

    /// Energy density `N(z)` at every grid point.
    pub fn density(&self, z: &FieldState) -> Vec<f64> {
        match &self.nonlinearity {
            Nonlinearity::Cubic { beta } => z
                .component(0)
                .iter()
                .zip(z.component(1))
                .map(|(p, q)| {
                    let m = p * p + q * q;
                    -beta / 4.0 * m * m
                })
                .collect(),
            Nonlinearity::Sine { phi } => z
                .component(0)
                .iter()
                .zip(phi)
                .map(|(u, f)| f * (1.0 - u.cos()))
                .collect(),
            Nonlinearity::Quadratic { beta } => z
                .component(0)
                .iter()
                .map(|u| -beta / 6.0 * u * u * u)
                .collect(),
        }
    }

    /// Variational derivative `N'(z)` of `H2`.
    pub fn gradient(&self, z: &FieldState) -> FieldState {
        let comps = match &self.nonlinearity {
            Nonlinearity::Cubic { beta } => {
                let (p, q) = (z.component(0), z.component(1));
                let scale: Vec<f64> = p
                    .iter()
                    .zip(q)
                    .map(|(a, b)| -beta * (a * a + b * b))
                    .collect();
                vec![
                    p.iter().zip(&scale).map(|(a, s)| s * a).collect(),
                    q.iter().zip(&scale).map(|(b, s)| s * b).collect(),
                ]
            }
            Nonlinearity::Sine { phi } => vec![
                z.component(0)
                    .iter()
                    .zip(phi)
                    .map(|(u, f)| f * u.sin())
                    .collect(),
                vec![0.0; z.len()],
            ],
            Nonlinearity::Quadratic { beta } => {
                vec![z.component(0).iter().map(|u| -beta / 2.0 * u * u).collect()]
            }
        };
        FieldState::new(comps).expect("same shape")
    }

    /// `H2(z) = (N(z), 1)_h`
    pub fn nonlinear_energy(&self, z: &FieldState) -> f64 {
        self.grid.cell_volume() * self.density(z).iter().sum::<f64>()
    }

    /// `H1(z) = (z, L z)_h / 2`
    pub fn quadratic_energy(&self, z: &FieldState) -> f64 {
        0.5 * self.inner(z, &self.apply_l(z))
    }

    /// Right-hand side `D(L z + N'(z))`.
    pub fn vector_field(&self, z: &FieldState) -> FieldState {
        let mut mu = self.apply_l(z);
        mu.axpy(1.0, &self.gradient(z));
        self.apply_d(&mu)
    }

    fn dense_scalar_neg_laplacian(&self) -> DMatrix<f64> {
        let (nx, ny) = self.grid.shape();
        let dxx = diff_matrix(&self.grid, 0, 2).expect("order 2");
        let mut out = DMatrix::zeros(nx * ny, nx * ny);
        for j in 0..nx {
            for jj in 0..nx {
                for k in 0..ny {
                    out[(j * ny + k, jj * ny + k)] -= dxx[(j, jj)];
                }
            }
        }
        if self.grid.dim() == 2 {
            let dyy = diff_matrix(&self.grid, 1, 2).expect("order 2");
            for j in 0..nx {
                for k in 0..ny {
                    for kk in 0..ny {
                        out[(j * ny + k, j * ny + kk)] -= dyy[(k, kk)];
                    }
                }
            }
        }
        out
    }

    /// Dense `L` over the stacked state `(z_0, ..., z_{m-1})`.
    pub fn dense_l(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        let m = self.components();
        let neg_lap = self.dense_scalar_neg_laplacian();
        let mut out = DMatrix::zeros(m * n, m * n);
        for (c, term) in self.linear.iter().enumerate() {
            let mut block = out.view_mut((c * n, c * n), (n, n));
            block += &neg_lap * term.neg_laplacian;
            for i in 0..n {
                block[(i, i)] += term.identity;
            }
        }
        out
    }

    /// Dense `D` over the stacked state.
    pub fn dense_d(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        match self.skew {
            Skew::Canonical => {
                let mut out = DMatrix::zeros(2 * n, 2 * n);
                for i in 0..n {
                    out[(i, n + i)] = 1.0;
                    out[(n + i, i)] = -1.0;
                }
                out
            }
            Skew::Derivative => diff_matrix(&self.grid, 0, 1).expect("order 1"),
        }
    }
}

/// `(H, H1, H2)` of a state.
pub fn energy(model: &HamiltonianModel, z: &FieldState) -> Energy {
    let quadratic = model.quadratic_energy(z);
    let nonlinear = model.nonlinear_energy(z);
    Energy {
        total: quadratic + nonlinear,
        quadratic,
        nonlinear,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn square(n: usize) -> Grid {
        make_grid(&[(0.0, 2.0 * PI), (0.0, 2.0 * PI)], &[n, n]).unwrap()
    }

    fn plane_wave(grid: &Grid) -> FieldState {
        FieldState::new(vec![
            grid.sample(|x, y| (x + y).cos()),
            grid.sample(|x, y| (x + y).sin()),
        ])
        .unwrap()
    }

    #[test]
    fn dimension_checks() {
        let line = make_grid(&[(0.0, 1.0)], &[8]).unwrap();
        assert!(nls_model(1.0, &line).is_err());
        assert!(sg_model(&[1.0], &line).is_err());
        assert!(kdv_model(1.0, 1.0, &square(8)).is_err());
        assert!(kdv_model(0.0, 1.0, &line).is_err());
        assert!(sg_model(&[1.0, 2.0], &square(8)).is_err());
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let g = square(8);
        let models = [
            nls_model(1.0, &g).unwrap(),
            sg_model(&[1.0], &g).unwrap(),
            kdv_model(1.0, 1.0, &make_grid(&[(0.0, 1.0)], &[8]).unwrap()).unwrap(),
        ];
        for m in &models {
            let z = m.zero_state();
            let e = energy(m, &z);
            assert_eq!((e.total, e.quadratic, e.nonlinear), (0.0, 0.0, 0.0));
            assert!(norm(&m.gradient(&z)) == 0.0);
        }
    }

    fn norm(z: &FieldState) -> f64 {
        crate::spectral::norm_inf(z)
    }

    #[test]
    fn nls_plane_wave_quadratic_energy() {
        // A = c1 = c2 = 1: H1 = (c1^2 + c2^2) A^2 (2 pi)^2 / 2 = (2 pi)^2.
        let g = square(8);
        let m = nls_model(1.0, &g).unwrap();
        let e = energy(&m, &plane_wave(&g));
        assert!((e.quadratic - 4.0 * PI * PI).abs() < 1e-11);
        assert!((e.nonlinear + PI * PI).abs() < 1e-11);
    }

    #[test]
    fn nls_plane_wave_residual() {
        // omega = c1^2 + c2^2 - beta A^2 = 1, so u_t = -i u.
        let g = square(16);
        let m = nls_model(1.0, &g).unwrap();
        let z = plane_wave(&g);
        let rhs = m.vector_field(&z);
        let dt = FieldState::new(vec![
            z.component(1).to_vec(),
            z.component(0).iter().map(|v| -v).collect(),
        ])
        .unwrap();
        assert!(rhs.max_abs_diff(&dt) < 1e-10);
    }

    #[test]
    fn sine_gordon_nonlinear_energy_nonnegative() {
        let g = square(8);
        let m = sg_model(&[1.0], &g).unwrap();
        let z = FieldState::new(vec![
            g.sample(|x, y| 3.0 * x.sin() * y.cos()),
            vec![0.0; g.len()],
        ])
        .unwrap();
        assert!(m.nonlinear_energy(&z) >= 0.0);
    }

    #[test]
    fn kdv_nonlinear_energy_unbounded_below() {
        let line = make_grid(&[(0.0, 1.0)], &[8]).unwrap();
        let m = kdv_model(1.0, 1.0, &line).unwrap();
        let z = FieldState::new(vec![vec![10.0; 8]]).unwrap();
        // -(1/6) * 1000 * |Omega|
        assert!((m.nonlinear_energy(&z) + 1000.0 / 6.0).abs() < 1e-10);
        let big = FieldState::new(vec![vec![1000.0; 8]]).unwrap();
        assert!(m.nonlinear_energy(&big) < -1e8);
    }

    #[test]
    fn kdv_derivative_of_gradient_integrates_to_zero() {
        let line = make_grid(&[(-3.0, 5.0)], &[32]).unwrap();
        let m = kdv_model(0.1, 1.0, &line).unwrap();
        let z = FieldState::new(vec![
            line.sample(|x, _| (x * 0.7).sin() + 0.3 * (x * 1.57).cos())
        ])
        .unwrap();
        let dn = m.apply_d(&m.gradient(&z));
        let one = FieldState::new(vec![vec![1.0; 32]]).unwrap();
        assert!(m.inner(&dn, &one).abs() < 1e-11);
    }

    #[test]
    fn dense_operators_match_spectral_application() {
        let g = make_grid(&[(0.0, 2.0 * PI), (-1.0, 1.0)], &[8, 6]).unwrap();
        let m = sg_model(&[1.0], &g).unwrap();
        let z = FieldState::new(vec![
            g.sample(|x, y| (x + 0.3).sin() * (2.0 * PI * y).cos()),
            g.sample(|x, y| x.cos() + y * y),
        ])
        .unwrap();
        let stacked = nalgebra::DVector::from_iterator(2 * g.len(), z.values());
        let dl = m.dense_d() * (m.dense_l() * stacked);
        let spectral = m.apply_d(&m.apply_l(&z));
        for (a, b) in dl.iter().zip(spectral.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
