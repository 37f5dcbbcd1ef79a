use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::operator::apply_derivative;
use crate::error::{Error, Result};

/// A multi-component real grid function, e.g. `(p, q)` for NLS or `u` for KdV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    components: Vec<Vec<f64>>,
}

impl FieldState {
    pub fn new(components: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::invalid("a field state needs at least one component"));
        };
        let n = first.len();
        if components.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("field components differ in length"));
        }
        Ok(FieldState { components })
    }

    pub fn zeros(components: usize, len: usize) -> Self {
        FieldState {
            components: vec![vec![0.0; len]; components],
        }
    }

    pub fn zeros_like(other: &FieldState) -> Self {
        Self::zeros(other.count(), other.len())
    }

    /// Number of components `m`.
    pub fn count(&self) -> usize {
        self.components.len()
    }

    /// Points per component.
    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.components[c]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.components
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().flatten().copied()
    }

    pub fn same_shape(&self, other: &FieldState) -> bool {
        self.count() == other.count() && self.len() == other.len()
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &FieldState) {
        debug_assert!(self.same_shape(x));
        for (dst, src) in self.components.iter_mut().zip(&x.components) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in self.components.iter_mut().flatten() {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> FieldState {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `sum_i weights[i] * fields[i]`
    pub fn combination(weights: &[f64], fields: &[&FieldState]) -> FieldState {
        assert_eq!(weights.len(), fields.len());
        let mut out = FieldState::zeros_like(fields[0]);
        for (&w, f) in weights.iter().zip(fields) {
            out.axpy(w, f);
        }
        out
    }

    pub fn sub(&self, other: &FieldState) -> FieldState {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// `max |self - other|` over all components and points.
    pub fn max_abs_diff(&self, other: &FieldState) -> f64 {
        self.values()
            .zip(other.values())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field has {} points per component, grid has {}",
                self.len(),
                grid.len()
            )));
        }
        Ok(())
    }
}

fn check_pair(grid: &Grid, z: &FieldState, w: &FieldState) -> Result<()> {
    if !z.same_shape(w) {
        return Err(Error::invalid("inner product operands differ in shape"));
    }
    z.check_grid(grid)
}

/// Discrete inner product `h_x h_y sum Z_jk W_jk`, summed over components.
pub fn inner_h(grid: &Grid, z: &FieldState, w: &FieldState) -> Result<f64> {
    check_pair(grid, z, w)?;
    Ok(inner_unchecked(grid, z, w))
}

pub(crate) fn inner_unchecked(grid: &Grid, z: &FieldState, w: &FieldState) -> f64 {
    let sum: f64 = z
        .components
        .iter()
        .zip(&w.components)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
        .sum();
    grid.cell_volume() * sum
}

/// Single-array version of [`inner_h`].
pub fn inner_h_array(grid: &Grid, z: &[f64], w: &[f64]) -> Result<f64> {
    if z.len() != w.len() || z.len() != grid.len() {
        return Err(Error::invalid(
            "inner product operands do not match the grid",
        ));
    }
    Ok(grid.cell_volume() * z.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
}

pub fn norm_h(grid: &Grid, z: &FieldState) -> Result<f64> {
    Ok(inner_h(grid, z, z)?.sqrt())
}

pub fn norm_inf(z: &FieldState) -> f64 {
    z.values().fold(0.0, |m, v| m.max(v.abs()))
}

/// `|Z|_h = sqrt((-D_x^2 Z, Z)_h + (-Z D_y^2, Z)_h)` for one component.
pub fn seminorm_h(grid: &Grid, z: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for dim in 0..grid.dim() {
        let d2 = apply_derivative(z, grid, dim, 2)?;
        total -= inner_h_array(grid, &d2, z)?;
    }
    // Tiny negative values come from round-off on near-constant fields.
    Ok(total.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn square(n: usize) -> Grid {
        make_grid(&[(0.0, 2.0 * PI), (0.0, 2.0 * PI)], &[n, n]).unwrap()
    }

    #[test]
    fn ones_measure_the_domain() {
        let g = square(8);
        let one = FieldState::new(vec![vec![1.0; g.len()]]).unwrap();
        let area = inner_h(&g, &one, &one).unwrap();
        assert!((area - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn sine_and_cosine_are_orthogonal() {
        let g = square(8);
        let s = FieldState::new(vec![g.sample(|x, _| x.sin())]).unwrap();
        let c = FieldState::new(vec![g.sample(|x, _| x.cos())]).unwrap();
        // Oracle: direct summation, independent of inner_h.
        let direct: f64 = s
            .component(0)
            .iter()
            .zip(c.component(0))
            .map(|(a, b)| a * b)
            .sum();
        assert!(direct.abs() < 1e-12);
        assert!(inner_h(&g, &s, &c).unwrap().abs() < 1e-12);
    }

    #[test]
    fn norm_is_root_of_self_inner_product() {
        let g = square(8);
        let z = FieldState::new(vec![
            g.sample(|x, y| x * y - 1.0),
            g.sample(|x, y| (x + y).cos()),
        ])
        .unwrap();
        let n = norm_h(&g, &z).unwrap();
        assert!((n * n - inner_h(&g, &z, &z).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn norm_inf_picks_largest_magnitude() {
        let mut v = vec![0.0; 16];
        v[5] = 3.0;
        v[7] = -2.0;
        assert_eq!(norm_inf(&FieldState::new(vec![v]).unwrap()), 3.0);
    }

    #[test]
    fn seminorm_of_constant_vanishes() {
        let g = square(8);
        assert!(seminorm_h(&g, &vec![2.5; g.len()]).unwrap() < 1e-6);
    }

    #[test]
    fn seminorm_of_sine_matches_derivative_oracle() {
        let g = make_grid(&[(-1.0, 3.0)], &[16]).unwrap();
        let mu = g.axes()[0].mu();
        let s = g.sample(|x, _| (mu * x).sin());
        let scaled: Vec<f64> = s.iter().map(|v| mu * mu * v).collect();
        let expected = inner_h_array(&g, &scaled, &s).unwrap();
        let got = seminorm_h(&g, &s).unwrap();
        assert!((got * got - expected).abs() < 1e-11);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = square(8);
        let a = FieldState::zeros(1, g.len());
        let b = FieldState::zeros(2, g.len());
        assert!(inner_h(&g, &a, &b).is_err());
        let c = FieldState::zeros(1, 10);
        assert!(inner_h(&g, &c, &c).is_err());
        assert!(FieldState::new(vec![vec![0.0; 3], vec![0.0; 4]]).is_err());
    }
}
